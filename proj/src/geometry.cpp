#include "zxc/geometry.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace zxc {

namespace {

constexpr double kParallelTol = 1e-12;
constexpr double kEndTol = 1e-12;
constexpr double kDistinctTol = 1e-9;

bool lex_less(Point2 p, Point2 q) { return std::tie(p.x, p.y) < std::tie(q.x, q.y); }

// Endpoints ordered lexicographically; flipped records whether a and b swapped.
struct Canon {
    Segment s;
    bool flipped;
};

Canon canon(const Segment& s) {
    if (lex_less(s.b, s.a)) return {{s.b, s.a}, true};
    return {s, false};
}

bool seg_less(const Segment& p, const Segment& q) {
    return std::tie(p.a.x, p.a.y, p.b.x, p.b.y) < std::tie(q.a.x, q.a.y, q.b.x, q.b.y);
}

// p and q already canonical.
IntersectionResult intersect_canonical(const Segment& p, const Segment& q) {
    IntersectionResult out;
    Point2 r = p.b - p.a;
    Point2 s = q.b - q.a;
    double lr = norm(r), ls = norm(s);
    double d = cross(r, s);
    Point2 qp = q.a - p.a;
    if (std::abs(d) <= kParallelTol * lr * ls) {
        // parallel: collinear only if q.a lies on the line of p
        double dist = std::abs(cross(qp, r)) / lr;
        if (dist > kParallelTol * std::max({1.0, lr, norm(qp)})) return out;
        double rr = dot(r, r);
        double t0 = dot(qp, r) / rr;
        double t1 = dot(q.b - p.a, r) / rr;
        if (t0 > t1) std::swap(t0, t1);
        double lo = std::max(0.0, t0), hi = std::min(1.0, t1);
        double tol = kEndTol;
        if (hi < lo - tol) return out;
        if ((hi - lo) * lr > kDistinctTol) {
            out.kind = HitKind::overlap;
            return out;
        }
        double t = std::clamp(0.5 * (lo + hi), 0.0, 1.0);
        out.kind = HitKind::point;
        out.point = p.at(t);
        out.ta = t;
        double ss = dot(s, s);
        out.tb = std::clamp(dot(out.point - q.a, s) / ss, 0.0, 1.0);
        return out;
    }
    double t = cross(qp, s) / d;
    double u = cross(qp, r) / d;
    if (t < -kEndTol || t > 1.0 + kEndTol || u < -kEndTol || u > 1.0 + kEndTol) return out;
    out.kind = HitKind::point;
    out.ta = std::clamp(t, 0.0, 1.0);
    out.tb = std::clamp(u, 0.0, 1.0);
    out.point = p.at(out.ta);
    return out;
}

}  // namespace

IntersectionResult segment_intersect(const Segment& a, const Segment& b) {
    require(a.length() > 0.0 && b.length() > 0.0, "segment_intersect: zero-length segment");
    Canon ca = canon(a), cb = canon(b);
    bool swapped = seg_less(cb.s, ca.s);
    IntersectionResult r = swapped ? intersect_canonical(cb.s, ca.s)
                                   : intersect_canonical(ca.s, cb.s);
    if (r.kind != HitKind::point) return r;
    if (swapped) std::swap(r.ta, r.tb);
    if (ca.flipped) r.ta = 1.0 - r.ta;
    if (cb.flipped) r.tb = 1.0 - r.tb;
    return r;
}

std::pair<Point2, std::int64_t> wrap_x(Point2 p) {
    require(std::isfinite(p.x) && std::isfinite(p.y), "wrap_x: non-finite point");
    double f = std::floor(p.x);
    auto m = static_cast<std::int64_t>(-f);
    Point2 w{p.x - f, p.y};
    if (w.x >= 1.0) {  // rounding for tiny negative x
        w.x = 0.0;
        m -= 1;
    }
    return {w, m};
}

int count_distinct_hits(const Segment& a, const Segment& b, std::int64_t k_lo,
                        std::int64_t k_hi) {
    std::vector<Point2> pts;
    for_each_translate_hit(a, b, k_lo, k_hi, [&](const TranslateHit& h) {
        for (const Point2& q : pts)
            if (norm(q - h.point) <= kDistinctTol) return;
        pts.push_back(h.point);
    });
    return static_cast<int>(pts.size());
}

int modz_intersection_count(const Segment& a, const Segment& b, int cell_span) {
    require(cell_span >= 0, "modz_intersection_count: negative cell_span");
    return count_distinct_hits(a, b, -cell_span, cell_span);
}

int torus_intersection_count(const Segment& a, const Segment& b) {
    constexpr auto big = std::numeric_limits<std::int32_t>::max();
    return count_distinct_hits(a, b, -big, big);
}

}  // namespace zxc
