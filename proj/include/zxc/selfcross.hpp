// Self-intersections of billiard traces.
//
// Cylinder mode counts true crossings in T x R (lifted arcs, horizontal wraps
// only). Torus mode identifies vertical translates as well, i.e. counts on
// the compact quotient T^2.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "zxc/billiard.hpp"

namespace zxc {

struct TrajectoryArc {
    Segment seg;
    std::int64_t start_cell = 0;
    std::int64_t end_cell = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    std::int64_t index = 0;
};

struct CrossingRecord {
    std::int64_t i = 0;
    std::int64_t j = 0;
    int k = 0;
};

enum class CountMode { cylinder, torus };

/// Arcs of the first n collisions from x0; t_start of arc 0 is 0.
/// Throws TangentialHit / HorizonViolation from the dynamics.
std::vector<TrajectoryArc> orbit_arcs(const BilliardTable& t, CollisionState x0, std::int64_t n);

/// Arc [x] as a segment with x's own cell offset.
Segment arc_of(const BilliardTable& t, const CollisionState& x);

using CrossingVisitor = std::function<void(std::int64_t i, std::int64_t j, Point2 p)>;

/// Every crossing point between arcs i < j, each visited once. The shared
/// collision point of consecutive arcs is excluded. Uses a uniform hash of
/// side 1/buckets_per_unit on the quotient.
void for_each_crossing(const std::vector<TrajectoryArc>& arcs, CountMode mode,
                       std::int64_t cell_span, const CrossingVisitor& visit,
                       int buckets_per_unit = 0);

/// All-pairs version of the same enumeration.
void for_each_crossing_bruteforce(const std::vector<TrajectoryArc>& arcs, CountMode mode,
                                  std::int64_t cell_span, const CrossingVisitor& visit);

struct NuResult {
    std::int64_t nu = 0;
    std::vector<CrossingRecord> records;  // sorted by (i, j)
};

/// Weighted pair count over the given arcs (all of them are used).
NuResult nu_n(const std::vector<TrajectoryArc>& arcs, std::int64_t cell_span,
              CountMode mode = CountMode::cylinder);
std::int64_t nu_n_bruteforce(const std::vector<TrajectoryArc>& arcs, std::int64_t cell_span,
                             CountMode mode = CountMode::cylinder);

/// nu over the first n arcs for every n in ns (one pass).
std::vector<std::int64_t> nu_prefix_counts(const std::vector<TrajectoryArc>& arcs,
                                           const std::vector<std::int64_t>& ns,
                                           std::int64_t cell_span,
                                           CountMode mode = CountMode::cylinder);

/// Cell range of the arcs plus D: a span that never trips SpanTooSmall.
std::int64_t safe_cell_span(const std::vector<TrajectoryArc>& arcs, int step_bound);

/// Arcs restricted to flow times [t0, t1]; empty pieces dropped.
std::vector<TrajectoryArc> clip_arcs(const std::vector<TrajectoryArc>& arcs, double t0, double t1);

/// Number of pairs s < u in [0, t] with equal positions (flow starts at the
/// first arc's t_start).
std::int64_t continuous_count(const std::vector<TrajectoryArc>& arcs, double t);
/// Same over the window [t0, t0 + t].
std::int64_t continuous_count_window(const std::vector<TrajectoryArc>& arcs, double t0, double t);

struct VkProfile {
    std::map<int, double> mass;  // k -> mu_bar(V_k), k >= 1
    int max_k = 0;
    double mean_count = 0.0;  // sum_k k mass
    std::int64_t samples = 0;
};

/// Monte Carlo profile of |[x] cap [y]| over y ~ mu_bar, summed over all
/// vertical translates of y.
VkProfile vk_profile(const BilliardTable& t, const CollisionState& x, std::int64_t n_samples,
                     std::mt19937_64& rng);

}  // namespace zxc
