#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "zxc/localtime.hpp"

using namespace zxc;

namespace {

// Naive count straight from the definition.
std::map<std::int64_t, std::int64_t> naive_counts(const WalkPath& p, std::int64_t m) {
    std::map<std::int64_t, std::int64_t> c;
    for (std::int64_t k = 0; k < m; ++k) ++c[p.at(k)];
    return c;
}

std::vector<WalkPath> toy_paths(std::uint64_t seed, int count, std::int64_t n) {
    Toy1 sys;
    std::mt19937_64 rng(seed);
    std::vector<WalkPath> out;
    for (int i = 0; i < count; ++i) {
        auto x = sys.sample(rng);
        out.push_back(birkhoff_path(sys, x, n));
    }
    return out;
}

// Histograms of 1000 toy walks at n = 1e4, 1e5, 1e6, built while streaming.
struct Snapshots {
    std::vector<std::int64_t> ns{10000, 100000, 1000000};
    std::vector<std::vector<LocalTimeHistogram>> h;  // [n][path]

    Snapshots() {
        Toy1 sys;
        std::mt19937_64 rng(77);
        h.resize(ns.size());
        for (int i = 0; i < 1000; ++i) {
            auto x = sys.sample(rng);
            LocalTimeBuilder b;
            std::int64_t s = 0;
            std::size_t next = 0;
            for (std::int64_t k = 0; k < ns.back(); ++k) {
                b.visit(s);
                s += sys.advance(x)[0];
                if (k + 1 == ns[next]) h[next++].push_back(b.snapshot());
            }
        }
    }
};

const Snapshots& snapshots() {
    static const Snapshots s;
    return s;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_CASE("local_time examples") {
    auto h = local_time(path_from_steps({1, 1, -1}));
    CHECK(h.sparse() == std::map<std::int64_t, std::int64_t>{{0, 1}, {1, 1}, {2, 1}});
    CHECK(h.n == 3);

    h = local_time(path_from_steps({1, -1, 1, 1}));
    CHECK(h.sparse() == std::map<std::int64_t, std::int64_t>{{0, 2}, {1, 2}});
    CHECK(occupation_square(h) == 8);
    CHECK(occupation_cross(h, 1) == 4);
    CHECK(occupation_cross(h, 0) == 8);

    h = local_time(path_from_steps({0, 0, 0, 0, 0, 0, 0}));
    CHECK(h.sparse() == std::map<std::int64_t, std::int64_t>{{0, 7}});
    CHECK(occupation_square(h) == 49);
}

TEST_CASE("local_time rejects d = 3") {
    Toy3 sys;
    std::mt19937_64 rng(1);
    auto x = sys.sample(rng);
    WalkPath p = birkhoff_path(sys, x, 10);
    CHECK_THROWS_AS(local_time(p), DimensionMismatch);
}

TEST_CASE("histogram invariants on random walks") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> st(-2, 2);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<int> steps(1 + rep * 7);
        for (int& s : steps) s = st(rng);
        WalkPath p = path_from_steps(steps);
        for (std::int64_t m : {std::int64_t{0}, p.n / 2, p.n}) {
            auto h = local_time_prefix(p, m);
            CHECK(h.sparse() == naive_counts(p, m));
            std::int64_t mass = 0;
            for (auto c : h.counts) mass += c;
            CHECK(mass == m);
            CHECK(occupation_square(h) <= m * h.max_count());
            CHECK(occupation_square(h) >= m);
            for (std::int64_t s : {-3, -1, 0, 2, 5})
                CHECK(occupation_cross(h, s) == occupation_cross(mirror(h), -s));
            for (auto [l, c] : h.sparse()) CHECK(std::abs(l) <= 2 * m);
        }
    }
}

TEST_CASE("builder snapshot equals batch histogram") {
    auto paths = toy_paths(3, 20, 5000);
    for (const auto& p : paths) {
        LocalTimeBuilder b;
        for (std::int64_t k = 0; k < p.n; ++k) b.visit(p.at(k));
        auto h = b.snapshot();
        CHECK(h.sparse() == local_time(p).sparse());
        CHECK(b.count(p.at(0)) == h.at(p.at(0)));
    }
}

TEST_CASE("continuity_modulus") {
    auto paths = toy_paths(4, 50, 1000);
    CHECK(continuity_modulus(paths, 3, 3, 1000) == 0.0);

    auto big = toy_paths(5, 200, 100000);
    double m4 = continuity_modulus(big, 0, 1, 10000), m5 = continuity_modulus(big, 0, 1, 100000);
    CHECK(m4 > 0);
    CHECK(std::max(m4, m5) / std::min(m4, m5) <= 1.5);
    // period 2: compare |x - y| = 2 with |x - y| = 4 on the same parity class
    double d2 = continuity_modulus(big, 0, 2, 100000), d4 = continuity_modulus(big, 0, 4, 100000);
    CHECK(std::max(d2, d4) / std::min(d2, d4) <= 1.5);
}

TEST_CASE("occupation_square scaling and oracle mean") {
    const auto& s = snapshots();
    std::vector<double> med;
    double mean_top = 0;
    for (std::size_t a = 0; a < s.ns.size(); ++a) {
        double n15 = std::pow(static_cast<double>(s.ns[a]), 1.5);
        std::vector<double> v;
        for (const auto& h : s.h[a]) v.push_back(static_cast<double>(occupation_square(h)) / n15);
        med.push_back(median(v));
        if (a + 1 == s.ns.size())
            for (double x : v) mean_top += x / static_cast<double>(v.size());
    }
    for (double m : med) CHECK(m == doctest::Approx(med.back()).epsilon(0.10));
    const double oracle = 8.0 / (3.0 * std::sqrt(2.0 * std::numbers::pi));
    CHECK(mean_top == doctest::Approx(oracle).epsilon(0.03 / oracle));
}

TEST_CASE("square minus shifted cross decays") {
    const auto& s = snapshots();
    std::vector<double> g;
    for (std::size_t a = 0; a < s.ns.size(); ++a) {
        double n15 = std::pow(static_cast<double>(s.ns[a]), 1.5), acc = 0;
        for (const auto& h : s.h[a])
            acc += std::abs(static_cast<double>(occupation_square(h) - occupation_cross(h, 1))) / n15;
        g.push_back(acc / static_cast<double>(s.h[a].size()));
    }
    CHECK(g[1] < g[0]);
    CHECK(g[2] < g[1]);
    CHECK(g[2] <= 0.05);
}

TEST_CASE("rw2 integrand and sup probe") {
    const auto& s = snapshots();
    // coarse to fine
    Rw2Report r = rw2_from_histograms({s.h[1]}, s.ns[1], {1.0}, {0.5, 0.1}, 3.0);
    CHECK(r.decreasing_in_delta);
    CHECK(r.integrand[0][1] < r.integrand[0][0]);
    CHECK(r.sup_finite);
    Rw2Report r4 = rw2_from_histograms({s.h[0]}, s.ns[0], {1.0}, {0.5, 0.1}, 3.0);
    CHECK(r.sup_l2 == doctest::Approx(r4.sup_l2).epsilon(0.20));

    // the zero walk only has mass at a = 0
    auto h = local_time(path_from_steps(std::vector<int>(100, 0)));
    auto terms = sup_probe_terms(h, 100);
    CHECK(terms[3] == doctest::Approx(100.0));
    for (int i : {0, 1, 2, 4, 5, 6}) CHECK(terms[i] == 0.0);
}

TEST_CASE("rw2_condition_check agrees with the histogram form") {
    auto paths = toy_paths(6, 30, 4000);
    Rw2Report a = rw2_condition_check(paths, {0.5, 1.0}, {0.5, 0.1}, 3.0);
    std::vector<std::vector<LocalTimeHistogram>> hs(2);
    for (const auto& p : paths) {
        hs[0].push_back(local_time_prefix(p, 2000));
        hs[1].push_back(local_time_prefix(p, 4000));
    }
    Rw2Report b = rw2_from_histograms(hs, 4000, {0.5, 1.0}, {0.5, 0.1}, 3.0);
    CHECK(a.integrand == b.integrand);
    CHECK(a.sup_l2 == b.sup_l2);
}
