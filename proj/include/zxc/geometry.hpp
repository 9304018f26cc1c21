// Planar primitives on the cylinder T x R.
//
// Points are stored lifted (x not reduced mod 1) unless wrap_x is applied.
// Translate enumeration handles the identifications: a segment b is compared
// against b + (m, k) for every horizontal wrap m that can reach a, and for the
// vertical shifts k the caller allows.
#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "zxc/errors.hpp"

namespace zxc {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

struct UnitVec {
    double vx = 1.0;
    double vy = 0.0;

    static UnitVec from_angle(double a) { return {std::cos(a), std::sin(a)}; }
    // Rescale (vx, vy) to unit length.
    UnitVec normalized() const {
        double l = std::hypot(vx, vy);
        return {vx / l, vy / l};
    }
    double norm() const { return std::hypot(vx, vy); }
    Point2 as_point() const { return {vx, vy}; }
};

struct Segment {
    Point2 a;
    Point2 b;
    double length() const { return norm(b - a); }
    Point2 at(double t) const { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }
};

enum class HitKind { none, point, overlap };

struct IntersectionResult {
    HitKind kind = HitKind::none;
    Point2 point;  // meaningful for kind == point
    double ta = 0.0;  // parameter of the point along the first argument
    double tb = 0.0;  // ... and along the second
};

/// Closed-segment intersection. Symmetric in its arguments: the computation
/// runs on a canonical ordering so swapping inputs yields the same point.
IntersectionResult segment_intersect(const Segment& a, const Segment& b);

/// Reduce x to [0, 1). Returns the wrapped point and the integer m that was
/// added, so wrapped.x == p.x + m.
std::pair<Point2, std::int64_t> wrap_x(Point2 p);

/// Number of distinct points where a meets b + (m, k), m any integer,
/// |k| <= cell_span. Throws OverlapDetected on a collinear overlap.
int modz_intersection_count(const Segment& a, const Segment& b, int cell_span);

/// One hit of a against a translate of b.
struct TranslateHit {
    Point2 point;
    double ta;
    double tb;
    std::int64_t m;
    std::int64_t k;
};

/// Cheap sign test: true when one segment lies strictly on one side of the
/// other's line by a margin far above the tolerances of segment_intersect.
inline bool clearly_apart(const Segment& p, const Segment& q) {
    Point2 r = p.b - p.a, s = q.b - q.a;
    double lr = std::abs(r.x) + std::abs(r.y), ls = std::abs(s.x) + std::abs(s.y);
    double tol = 1e-9 * std::max(1.0, lr) * std::max(1.0, ls);
    double c1 = cross(r, q.a - p.a), c2 = cross(r, q.b - p.a);
    if ((c1 > tol * lr && c2 > tol * lr) || (c1 < -tol * lr && c2 < -tol * lr)) return true;
    double c3 = cross(s, p.a - q.a), c4 = cross(s, p.b - q.a);
    return (c3 > tol * ls && c4 > tol * ls) || (c3 < -tol * ls && c4 < -tol * ls);
}

/// Visit every intersection of a with b + (m, k) for every m whose horizontal
/// range can reach a and every k in [k_lo, k_hi] whose vertical range can.
/// Throws OverlapDetected on a collinear overlap.
template <class F>
void for_each_translate_hit(const Segment& a, const Segment& b, std::int64_t k_lo,
                            std::int64_t k_hi, F&& f) {
    constexpr double eps = 1e-9;
    double ax0 = std::min(a.a.x, a.b.x), ax1 = std::max(a.a.x, a.b.x);
    double ay0 = std::min(a.a.y, a.b.y), ay1 = std::max(a.a.y, a.b.y);
    double bx0 = std::min(b.a.x, b.b.x), bx1 = std::max(b.a.x, b.b.x);
    double by0 = std::min(b.a.y, b.b.y), by1 = std::max(b.a.y, b.b.y);
    auto m_lo = static_cast<std::int64_t>(std::ceil(ax0 - bx1 - eps));
    auto m_hi = static_cast<std::int64_t>(std::floor(ax1 - bx0 + eps));
    auto kk_lo = std::max(k_lo, static_cast<std::int64_t>(std::ceil(ay0 - by1 - eps)));
    auto kk_hi = std::min(k_hi, static_cast<std::int64_t>(std::floor(ay1 - by0 + eps)));
    for (std::int64_t k = kk_lo; k <= kk_hi; ++k) {
        for (std::int64_t m = m_lo; m <= m_hi; ++m) {
            Point2 sh{static_cast<double>(m), static_cast<double>(k)};
            Segment bt{b.a + sh, b.b + sh};
            if (clearly_apart(a, bt)) continue;
            IntersectionResult r = segment_intersect(a, bt);
            if (r.kind == HitKind::overlap)
                throw OverlapDetected("collinear overlap between segment translates");
            if (r.kind == HitKind::point) f(TranslateHit{r.point, r.ta, r.tb, m, k});
        }
    }
}

/// Count distinct hit points (within 1e-9) of a against translates of b with
/// k in [k_lo, k_hi].
int count_distinct_hits(const Segment& a, const Segment& b, std::int64_t k_lo,
                        std::int64_t k_hi);

/// Intersections on the torus T^2: every vertical translate is allowed.
int torus_intersection_count(const Segment& a, const Segment& b);

}  // namespace zxc
