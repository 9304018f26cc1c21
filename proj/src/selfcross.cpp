#include "zxc/selfcross.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace zxc {

namespace {

constexpr double kDilate = 1e-9;
constexpr double kSame = 1e-9;
constexpr double kMinLen = 1e-12;
constexpr std::int64_t kAllK = std::numeric_limits<std::int32_t>::max();

std::int64_t floor_i(double v) { return static_cast<std::int64_t>(std::floor(v)); }
std::int64_t pmod(std::int64_t a, std::int64_t b) { return ((a % b) + b) % b; }

struct Box {
    double x0, x1, y0, y1;
};

Box box_of(const Segment& s) {
    return {std::min(s.a.x, s.b.x), std::max(s.a.x, s.b.x), std::min(s.a.y, s.b.y),
            std::max(s.a.y, s.b.y)};
}

// Hits between arcs i < j after the consecutive-endpoint exclusion, de-duplicated.
// Appends to out.
void pair_hits(const std::vector<TrajectoryArc>& arcs, std::size_t i, std::size_t j,
               CountMode mode, std::int64_t cell_span, std::vector<Point2>& out) {
    const Segment& a = arcs[i].seg;
    const Segment& b = arcs[j].seg;
    Box ba = box_of(a), bb = box_of(b);
    std::int64_t k_lo = -kAllK, k_hi = kAllK;
    if (mode == CountMode::cylinder) {
        if (ba.y1 < bb.y0 - kDilate || bb.y1 < ba.y0 - kDilate) return;
        std::int64_t gap = std::abs(arcs[i].start_cell - arcs[j].start_cell);
        if (gap > cell_span)
            throw SpanTooSmall("cell gap " + std::to_string(gap) + " exceeds cell_span " +
                               std::to_string(cell_span));
        k_lo = k_hi = 0;
    }
    const bool consecutive = arcs[j].index == arcs[i].index + 1;
    std::size_t first = out.size();
    for_each_translate_hit(a, b, k_lo, k_hi, [&](const TranslateHit& h) {
        if (consecutive && (1.0 - h.ta) * a.length() <= kSame && h.tb * b.length() <= kSame) return;
        for (std::size_t q = first; q < out.size(); ++q)
            if (norm(out[q] - h.point) <= kSame) return;
        out.push_back(h.point);
    });
}

class Grid {
public:
    Grid(const std::vector<TrajectoryArc>& arcs, CountMode mode, int b) : mode_(mode), b_(b) {
        if (mode_ == CountMode::cylinder) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& a : arcs) {
                Box bx = box_of(a.seg);
                lo = std::min(lo, bx.y0);
                hi = std::max(hi, bx.y1);
            }
            row_min_ = floor_i((lo - kDilate) * b_);
            rows_ = floor_i((hi + kDilate) * b_) - row_min_ + 1;
        } else {
            row_min_ = 0;
            rows_ = b_;
        }
        cells_.resize(static_cast<std::size_t>(rows_ * b_));
        for (std::size_t i = 0; i < arcs.size(); ++i) insert(static_cast<std::int32_t>(i), arcs[i].seg);
    }

    std::size_t owner(Point2 p) const { return index(floor_i(p.x * b_), floor_i(p.y * b_)); }
    const std::vector<std::vector<std::int32_t>>& cells() const { return cells_; }

private:
    std::size_t index(std::int64_t col, std::int64_t row) const {
        col = pmod(col, b_);
        row = mode_ == CountMode::torus ? pmod(row, b_) : row - row_min_;
        return static_cast<std::size_t>(row * b_ + col);
    }

    void insert(std::int32_t id, const Segment& s) {
        Point2 d = s.b - s.a;
        auto pieces = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(s.length() * b_)));
        for (std::int64_t p = 0; p < pieces; ++p) {
            Point2 u = s.a + (static_cast<double>(p) / pieces) * d;
            Point2 v = s.a + (static_cast<double>(p + 1) / pieces) * d;
            std::int64_t c0 = floor_i((std::min(u.x, v.x) - kDilate) * b_);
            std::int64_t c1 = floor_i((std::max(u.x, v.x) + kDilate) * b_);
            std::int64_t r0 = floor_i((std::min(u.y, v.y) - kDilate) * b_);
            std::int64_t r1 = floor_i((std::max(u.y, v.y) + kDilate) * b_);
            for (std::int64_t r = r0; r <= r1; ++r)
                for (std::int64_t c = c0; c <= c1; ++c) {
                    auto& cell = cells_[index(c, r)];
                    if (cell.empty() || cell.back() != id) cell.push_back(id);
                }
        }
    }

    CountMode mode_;
    std::int64_t b_;
    std::int64_t row_min_ = 0;
    std::int64_t rows_ = 0;
    std::vector<std::vector<std::int32_t>> cells_;
};

}  // namespace

Segment arc_of(const BilliardTable& t, const CollisionState& x) { return billiard_map(t, x).arc; }

std::vector<TrajectoryArc> orbit_arcs(const BilliardTable& t, CollisionState x, std::int64_t n) {
    std::vector<TrajectoryArc> arcs;
    arcs.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
    double time = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
        MapStep st = billiard_map(t, x);
        TrajectoryArc a;
        a.seg = st.arc;
        a.start_cell = x.cell;
        a.end_cell = st.next.cell;
        a.t_start = time;
        time += st.tau;
        a.t_end = time;
        a.index = k;
        arcs.push_back(a);
        x = st.next;
    }
    return arcs;
}

void for_each_crossing(const std::vector<TrajectoryArc>& arcs, CountMode mode,
                       std::int64_t cell_span, const CrossingVisitor& visit, int buckets_per_unit) {
    require(cell_span >= 0, "cell_span must be non-negative");
    if (arcs.size() < 2) return;
    int b = buckets_per_unit > 0 ? buckets_per_unit : (mode == CountMode::torus ? 16 : 8);
    Grid grid(arcs, mode, b);
    std::vector<Point2> hits;
    const auto& cells = grid.cells();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& ids = cells[c];
        for (std::size_t p = 0; p < ids.size(); ++p)
            for (std::size_t q = p + 1; q < ids.size(); ++q) {
                hits.clear();
                pair_hits(arcs, ids[p], ids[q], mode, cell_span, hits);
                for (Point2 h : hits)
                    if (grid.owner(h) == c) visit(ids[p], ids[q], h);
            }
    }
}

void for_each_crossing_bruteforce(const std::vector<TrajectoryArc>& arcs, CountMode mode,
                                  std::int64_t cell_span, const CrossingVisitor& visit) {
    require(cell_span >= 0, "cell_span must be non-negative");
    require(arcs.size() <= 10000, "brute-force count limited to 1e4 arcs");
    std::vector<Point2> hits;
    for (std::size_t i = 0; i < arcs.size(); ++i)
        for (std::size_t j = i + 1; j < arcs.size(); ++j) {
            hits.clear();
            pair_hits(arcs, i, j, mode, cell_span, hits);
            for (Point2 h : hits) visit(static_cast<std::int64_t>(i), static_cast<std::int64_t>(j), h);
        }
}

NuResult nu_n(const std::vector<TrajectoryArc>& arcs, std::int64_t cell_span, CountMode mode) {
    std::unordered_map<std::uint64_t, int> per_pair;
    NuResult r;
    for_each_crossing(arcs, mode, cell_span, [&](std::int64_t i, std::int64_t j, Point2) {
        ++r.nu;
        ++per_pair[(static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j)];
    });
    for (const auto& [key, k] : per_pair)
        r.records.push_back({static_cast<std::int64_t>(key >> 32),
                             static_cast<std::int64_t>(key & 0xffffffffu), k});
    std::sort(r.records.begin(), r.records.end(), [](const CrossingRecord& x, const CrossingRecord& y) {
        return x.i != y.i ? x.i < y.i : x.j < y.j;
    });
    return r;
}

std::int64_t nu_n_bruteforce(const std::vector<TrajectoryArc>& arcs, std::int64_t cell_span,
                             CountMode mode) {
    std::int64_t nu = 0;
    for_each_crossing_bruteforce(arcs, mode, cell_span,
                                 [&](std::int64_t, std::int64_t, Point2) { ++nu; });
    return nu;
}

std::vector<std::int64_t> nu_prefix_counts(const std::vector<TrajectoryArc>& arcs,
                                           const std::vector<std::int64_t>& ns,
                                           std::int64_t cell_span, CountMode mode) {
    std::vector<std::int64_t> by_last(arcs.size(), 0);
    for_each_crossing(arcs, mode, cell_span,
                      [&](std::int64_t, std::int64_t j, Point2) { ++by_last[static_cast<std::size_t>(j)]; });
    std::vector<std::int64_t> out;
    for (std::int64_t n : ns) {
        require(n >= 0 && n <= static_cast<std::int64_t>(arcs.size()), "nu_prefix_counts: n out of range");
        std::int64_t s = 0;
        for (std::int64_t j = 0; j < n; ++j) s += by_last[static_cast<std::size_t>(j)];
        out.push_back(s);
    }
    return out;
}

std::int64_t safe_cell_span(const std::vector<TrajectoryArc>& arcs, int step_bound) {
    if (arcs.empty()) return step_bound;
    std::int64_t lo = arcs.front().start_cell, hi = lo;
    for (const auto& a : arcs) {
        lo = std::min({lo, a.start_cell, a.end_cell});
        hi = std::max({hi, a.start_cell, a.end_cell});
    }
    return hi - lo + step_bound;
}

std::vector<TrajectoryArc> clip_arcs(const std::vector<TrajectoryArc>& arcs, double t0, double t1) {
    std::vector<TrajectoryArc> out;
    for (const auto& a : arcs) {
        if (a.t_end <= t0 || a.t_start >= t1) continue;
        double s0 = std::max(a.t_start, t0), s1 = std::min(a.t_end, t1);
        double len = a.t_end - a.t_start;
        if (s1 - s0 <= kMinLen || len <= 0) continue;
        TrajectoryArc c = a;
        c.seg = {a.seg.at((s0 - a.t_start) / len), a.seg.at((s1 - a.t_start) / len)};
        if (s0 == a.t_start) c.seg.a = a.seg.a;
        if (s1 == a.t_end) c.seg.b = a.seg.b;
        c.t_start = s0;
        c.t_end = s1;
        out.push_back(c);
    }
    return out;
}

std::int64_t continuous_count_window(const std::vector<TrajectoryArc>& arcs, double t0, double t) {
    require(t >= 0, "continuous_count: negative time");
    if (arcs.empty() || t == 0) return 0;
    require(t0 + t <= arcs.back().t_end + 1e-9, "continuous_count: t beyond the trajectory");
    auto clipped = clip_arcs(arcs, t0, t0 + t);
    std::int64_t span = safe_cell_span(clipped, 0);
    std::int64_t n = 0;
    for_each_crossing(clipped, CountMode::cylinder, span,
                      [&](std::int64_t, std::int64_t, Point2) { ++n; });
    return n;
}

std::int64_t continuous_count(const std::vector<TrajectoryArc>& arcs, double t) {
    if (arcs.empty()) return 0;
    return continuous_count_window(arcs, arcs.front().t_start, t);
}

VkProfile vk_profile(const BilliardTable& t, const CollisionState& x, std::int64_t n_samples,
                     std::mt19937_64& rng) {
    require(n_samples > 0, "vk_profile: n_samples must be positive");
    CollisionState x0 = x;
    x0.cell = 0;
    Segment ax = arc_of(t, x0);
    std::map<int, std::int64_t> counts;
    VkProfile p;
    for (std::int64_t s = 0; s < n_samples;) {
        CollisionState y = sample_mu_bar(t, rng);
        Segment ay;
        try {
            ay = arc_of(t, y);
        } catch (const TangentialHit&) {
            continue;
        }
        int k = torus_intersection_count(ax, ay);
        if (k > 0) ++counts[k];
        p.max_k = std::max(p.max_k, k);
        ++s;
    }
    p.samples = n_samples;
    for (const auto& [k, c] : counts) {
        double m = static_cast<double>(c) / static_cast<double>(n_samples);
        p.mass[k] = m;
        p.mean_count += k * m;
    }
    return p;
}

}  // namespace zxc
