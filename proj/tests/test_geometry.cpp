#include <doctest.h>

#include <cmath>
#include <random>

#include "zxc/geometry.hpp"

using namespace zxc;

namespace {

// Plain parametric solve, no canonical ordering; used as an oracle on
// generic (non-degenerate) inputs only.
bool naive_cross(Point2 p0, Point2 p1, Point2 q0, Point2 q1, Point2* at = nullptr) {
    double rx = p1.x - p0.x, ry = p1.y - p0.y, sx = q1.x - q0.x, sy = q1.y - q0.y;
    double d = rx * sy - ry * sx;
    if (d == 0) return false;
    double qx = q0.x - p0.x, qy = q0.y - p0.y;
    double t = (qx * sy - qy * sx) / d, u = (qx * ry - qy * rx) / d;
    if (t < 0 || t > 1 || u < 0 || u > 1) return false;
    if (at) *at = {p0.x + t * rx, p0.y + t * ry};
    return true;
}

int naive_modz(const Segment& a, const Segment& b, int span) {
    int n = 0;
    for (int k = -span; k <= span; ++k)
        for (int m = -4; m <= 4; ++m) {
            Point2 sh{double(m), double(k)};
            n += naive_cross(a.a, a.b, b.a + sh, b.b + sh);
        }
    return n;
}

Segment random_seg(std::mt19937_64& rng, double max_len) {
    std::uniform_real_distribution<double> u(0, 1), ang(0, 2 * M_PI), len(0.05, max_len);
    Point2 a{u(rng), u(rng) * 3 - 1};
    double th = ang(rng), l = len(rng);
    return {a, {a.x + l * std::cos(th), a.y + l * std::sin(th)}};
}

}  // namespace

TEST_CASE("segment_intersect examples") {
    auto r = segment_intersect({{0, 0}, {1, 1}}, {{0, 1}, {1, 0}});
    CHECK(r.kind == HitKind::point);
    CHECK(r.point.x == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.point.y == doctest::Approx(0.5).epsilon(1e-15));

    CHECK(segment_intersect({{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}).kind == HitKind::none);
    CHECK(segment_intersect({{0, 0}, {2, 0}}, {{1, 0}, {3, 0}}).kind == HitKind::overlap);
}

TEST_CASE("segment_intersect edge cases") {
    // touching endpoints of collinear segments: a single point
    auto r = segment_intersect({{0, 0}, {1, 0}}, {{1, 0}, {2, 0}});
    CHECK(r.kind == HitKind::point);
    CHECK(r.point.x == doctest::Approx(1.0));
    // T junction
    r = segment_intersect({{0, 0}, {2, 0}}, {{1, 0}, {1, 1}});
    CHECK(r.kind == HitKind::point);
    CHECK(r.tb == doctest::Approx(0.0));
    // zero length is a contract error
    CHECK_THROWS_AS(segment_intersect({{0, 0}, {0, 0}}, {{0, 1}, {1, 0}}), ContractError);
}

TEST_CASE("segment_intersect is symmetric and lies on both segments") {
    std::mt19937_64 rng(1);
    int hits = 0;
    for (int i = 0; i < 20000; ++i) {
        Segment a = random_seg(rng, 1.0), b = random_seg(rng, 1.0);
        auto ab = segment_intersect(a, b), ba = segment_intersect(b, a);
        REQUIRE(ab.kind == ba.kind);
        if (ab.kind != HitKind::point) continue;
        ++hits;
        CHECK(ab.point.x == ba.point.x);
        CHECK(ab.point.y == ba.point.y);
        CHECK(ab.ta == ba.tb);
        CHECK(norm(a.at(ab.ta) - ab.point) <= 1e-10);
        CHECK(norm(b.at(ab.tb) - ab.point) <= 1e-10);
        Point2 p;
        CHECK(naive_cross(a.a, a.b, b.a, b.b, &p));
        CHECK(norm(p - ab.point) <= 1e-10);
    }
    CHECK(hits > 500);
}

TEST_CASE("wrap_x examples") {
    auto [p1, m1] = wrap_x({1.25, 3.0});
    CHECK(p1.x == 0.25);
    CHECK(p1.y == 3.0);
    CHECK(m1 == -1);
    auto [p2, m2] = wrap_x({0.5, -2.0});
    CHECK(p2.x == 0.5);
    CHECK(m2 == 0);
    auto [p3, m3] = wrap_x({-0.75, 0.0});
    CHECK(p3.x == 0.25);
    CHECK(m3 == 1);
    auto [p4, m4] = wrap_x({-1e-18, 0.0});
    CHECK(p4.x >= 0.0);
    CHECK(p4.x < 1.0);
    // 1 - 1e-18 rounds to 1, so the point lands on 0 with no translation
    CHECK(std::abs(p4.x - (-1e-18 + m4)) <= 1e-15);
    CHECK(m4 == 0);
}

TEST_CASE("modz_intersection_count examples") {
    Segment a{{0.1, 0.0}, {0.9, 0.0}};
    CHECK(modz_intersection_count(a, {{0.5, 1.0}, {0.5, -1.0}}, 0) == 1);
    Segment far{{0.5, 2.0}, {0.5, 4.0}};
    CHECK(modz_intersection_count(a, far, 0) == 0);
    CHECK(modz_intersection_count(a, far, 3) == 1);
    CHECK_THROWS_AS(modz_intersection_count(a, a, 0), OverlapDetected);
    CHECK_THROWS_AS(modz_intersection_count(a, far, -1), ContractError);
}

TEST_CASE("horizontal wraps are found") {
    // a crosses x = 1; b lives near x = 0 and meets a only after a wrap
    Segment a{{0.8, 0.5}, {1.2, 0.5}};
    Segment b{{0.1, 0.2}, {0.1, 0.8}};
    CHECK(modz_intersection_count(a, b, 0) == 1);
    CHECK(modz_intersection_count(b, a, 0) == 1);
    // a segment longer than 1 meets a vertical segment twice
    Segment l{{0.05, 0.5}, {1.65, 0.5}};
    CHECK(modz_intersection_count(l, {{0.5, 0.0}, {0.5, 1.0}}, 0) == 2);
}

TEST_CASE("modz count matches an independent enumeration") {
    std::mt19937_64 rng(2);
    int total = 0;
    for (int i = 0; i < 5000; ++i) {
        Segment a = random_seg(rng, 1.6), b = random_seg(rng, 1.6);
        for (int span : {0, 1, 3}) {
            int got = modz_intersection_count(a, b, span);
            CHECK(got == naive_modz(a, b, span));
            total += got;
        }
    }
    CHECK(total > 500);
}

TEST_CASE("modz count is invariant under a common vertical shift") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 3000; ++i) {
        Segment a = random_seg(rng, 1.5), b = random_seg(rng, 1.5);
        int base = modz_intersection_count(a, b, 2);
        for (int k : {-3, 1, 7}) {
            Point2 sh{0.0, double(k)};
            CHECK(modz_intersection_count({a.a + sh, a.b + sh}, {b.a + sh, b.b + sh}, 2) == base);
        }
    }
}

TEST_CASE("span 0 inside one cell equals the plain point count") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int i = 0; i < 5000; ++i) {
        Segment a{{u(rng), u(rng)}, {u(rng), u(rng)}};
        Segment b{{u(rng), u(rng)}, {u(rng), u(rng)}};
        int plain = segment_intersect(a, b).kind == HitKind::point ? 1 : 0;
        CHECK(modz_intersection_count(a, b, 0) == plain);
    }
}

TEST_CASE("torus count sums over every vertical translate") {
    Segment a{{0.1, 0.5}, {0.9, 0.5}};
    Segment b{{0.5, 7.0}, {0.5, 7.8}};
    CHECK(torus_intersection_count(a, b) == 1);
    CHECK(modz_intersection_count(a, b, 3) == 0);
}
