#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "zxc/zext.hpp"

using namespace zxc;

namespace {

struct Liar {
    static constexpr int dim = 1;
    struct State {};
    State sample(std::mt19937_64&) const { return {}; }
    std::array<int, 1> advance(State&) const { return {2}; }
    int step_bound() const { return 1; }
};

}  // namespace

TEST_CASE("toy prefix digits give the Birkhoff sums") {
    Toy1 sys;
    auto x = Toy1::from_seed(1, 0b110, 3);
    WalkPath p = birkhoff_path(sys, x, 3);
    CHECK(p.values == std::vector<std::int64_t>{0, 1, 2, 1});
    CHECK(p.terminal() == 1);
}

TEST_CASE("toy terminal_sum agrees with stepping") {
    Toy1 sys;
    for (std::uint64_t s = 0; s < 50; ++s)
        for (std::int64_t n : {1, 63, 64, 65, 1000}) {
            auto a = Toy1::from_seed(s, 0b1011, 4), b = a;
            WalkPath p = birkhoff_path(sys, a, n);
            CHECK(sys.terminal_sum(b, n) == p.terminal());
            CHECK(a == b);
        }
}

TEST_CASE("billiard Birkhoff sums telescope to the cell index") {
    BilliardSystem sys(default_table());
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        CollisionState x = sys.sample(rng), y = x;
        const std::int64_t c0 = x.cell;
        WalkPath p = birkhoff_path(sys, x, 500);
        for (int k = 0; k < 500; ++k) y = billiard_map(sys.table(), y).next;
        CHECK(p.terminal() == y.cell - c0);
        CHECK(x.cell == y.cell);
    }
}

TEST_CASE("step bound is enforced") {
    Liar l;
    Liar::State s;
    CHECK_THROWS_AS(birkhoff_path(l, s, 5), Error);
    ZeroSystem z;
    ZeroSystem::State zs;
    CHECK_THROWS_AS(birkhoff_path(z, zs, 0), ContractError);
}

TEST_CASE("toy variance is 1") {
    Toy1 sys;
    std::mt19937_64 rng(2);
    std::vector<std::int64_t> term;
    for (int i = 0; i < 10000; ++i) {
        auto x = sys.sample(rng);
        term.push_back(sys.terminal_sum(x, 10000));
    }
    VarianceEstimate v = variance_from_terminals(term, 10000);
    CHECK(v.sigma == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("variance_estimate contract and degenerate input") {
    ZeroSystem z;
    std::mt19937_64 rng(3);
    std::vector<WalkPath> paths;
    for (int i = 0; i < 100; ++i) {
        auto s = z.sample(rng);
        paths.push_back(birkhoff_path(z, s, 10));
    }
    CHECK(variance_estimate(paths).sigma == 0.0);
    paths.pop_back();
    CHECK_THROWS_AS(variance_estimate(paths), ContractError);
    CHECK_THROWS_AS(variance_estimate({}), ContractError);
}

TEST_CASE("toy diffusive scaling across n") {
    Toy1 sys;
    std::mt19937_64 rng(4);
    for (std::int64_t n : {1000, 10000, 100000}) {
        std::vector<std::int64_t> term;
        for (int i = 0; i < 4000; ++i) {
            auto x = sys.sample(rng);
            term.push_back(sys.terminal_sum(x, n));
        }
        CHECK(variance_from_terminals(term, n).sigma == doctest::Approx(1.0).epsilon(0.10));
    }
}

TEST_CASE("billiard variance is stable when n doubles") {
    // S_n and S_2n read off the same 1000 orbits
    BilliardSystem sys(default_table());
    std::mt19937_64 rng(5);
    const std::int64_t n = 10000;
    std::vector<std::int64_t> a, b;
    for (int i = 0; i < 1000; ++i) {
        auto x = sys.sample(rng);
        std::int64_t s = 0;
        for (std::int64_t k = 0; k < 2 * n; ++k) {
            s += sys.advance(x)[0];
            if (k + 1 == n) a.push_back(s);
        }
        b.push_back(s);
    }
    double s1 = variance_from_terminals(a, n).sigma, s2 = variance_from_terminals(b, 2 * n).sigma;
    CHECK(s1 > 0);
    CHECK(std::isfinite(s1));
    CHECK(std::abs(s2 / s1 - 1.0) <= 0.05);
}

TEST_CASE("zero mean of phi") {
    Toy1 toy;
    std::mt19937_64 rng(6);
    auto x = toy.sample(rng);
    const std::int64_t N = 1000000;
    double s = static_cast<double>(toy.terminal_sum(x, N));
    CHECK(std::abs(s / N) <= 4 * std::sqrt(1.0 / N));

    BilliardSystem bil(default_table());
    auto y = bil.sample(rng);
    double sb = 0;
    for (std::int64_t k = 0; k < N; ++k) {
        int p = bil.advance(y)[0];
        REQUIRE(std::abs(p) <= bil.step_bound());
        sb += p;
    }
    // Sigma of the default table is about 0.06
    CHECK(std::abs(sb / N) <= 4 * std::sqrt(0.1 / N));
}

TEST_CASE("toy d=3 coordinates are uncorrelated") {
    Toy3 sys;
    std::mt19937_64 rng(7);
    auto x = sys.sample(rng);
    double c01 = 0, c02 = 0, c12 = 0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
        auto st = sys.advance(x);
        c01 += st[0] * st[1];
        c02 += st[0] * st[2];
        c12 += st[1] * st[2];
    }
    CHECK(std::abs(c01 / n) <= 0.02);
    CHECK(std::abs(c02 / n) <= 0.02);
    CHECK(std::abs(c12 / n) <= 0.02);
}

TEST_CASE("lattice period") {
    CHECK(lattice_period({-1, 1}) == 2);
    CHECK(lattice_period({-1, 0, 1}) == 1);
    CHECK(lattice_period({0}) == 1);
    CHECK(lattice_period({-3, 0, 3}) == 3);
}

TEST_CASE("toy local limit theorem") {
    Toy1 sys;
    std::mt19937_64 rng(8);
    LltReport r = llt_check(sys, 10000, 1000000, rng);
    CHECK(r.period == 2);
    CHECK(r.scaled_mass_at_zero == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(0.05));
    CHECK(r.ratio_one_sd == doctest::Approx(std::exp(-0.5)).epsilon(0.07));
}

TEST_CASE("toy sums stay on the parity lattice within n D") {
    Toy1 sys;
    std::mt19937_64 rng(9);
    const std::int64_t n = 50;
    for (int i = 0; i < 10000; ++i) {
        auto x = sys.sample(rng);
        std::int64_t s = sys.terminal_sum(x, n);
        CHECK(std::abs(s) <= n);
        CHECK((s - n) % 2 == 0);
    }
}

TEST_CASE("initial laws") {
    std::mt19937_64 rng(10);
    for (const auto& law : toy_laws()) CHECK_NOTHROW(validate_law(law, rng));
    CHECK_THROWS_AS(validate_law(toy_point_mass(3), rng), ContractError);
    InitialLaw<Toy1::State> sneaky{"sneaky", [](std::mt19937_64&) { return Toy1::from_seed(5); }, true};
    CHECK_THROWS_AS(validate_law(sneaky, rng), ContractError);
    // uniform on [0, 1/2): first digit is 0, so the first step is -1
    auto half = toy_laws()[1];
    Toy1 sys;
    for (int i = 0; i < 100; ++i) {
        auto x = half.draw(rng);
        CHECK(sys.advance(x)[0] == -1);
    }
}

TEST_CASE("mass beyond n D is exactly zero") {
    Toy1 sys;
    std::mt19937_64 rng(11);
    std::vector<std::int64_t> term;
    for (int i = 0; i < 1000; ++i) {
        auto x = sys.sample(rng);
        term.push_back(sys.terminal_sum(x, 1));
    }
    LltReport r = llt_from_terminals(term, 1, 2, 1, 1.0);
    int beyond = 0;
    for (const LltPoint& p : r.points)
        if (std::abs(p.N) > 1) {
            ++beyond;
            CHECK(p.count == 0);
            CHECK(p.empirical == 0.0);
        }
    CHECK(beyond > 0);
}
