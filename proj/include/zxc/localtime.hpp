// Local times N_n(l) of lattice walks and their occupation functionals.
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "zxc/zext.hpp"

namespace zxc {

/// Visit counts over a contiguous level range [min_level, min_level + size).
/// Walks visit an interval, so dense storage is O(range) = O(sqrt n).
struct LocalTimeHistogram {
    std::int64_t n = 0;
    std::int64_t min_level = 0;
    std::vector<std::int64_t> counts;

    std::int64_t at(std::int64_t level) const {
        std::int64_t i = level - min_level;
        if (i < 0 || i >= static_cast<std::int64_t>(counts.size())) return 0;
        return counts[static_cast<std::size_t>(i)];
    }
    std::int64_t max_level() const {
        return min_level + static_cast<std::int64_t>(counts.size()) - 1;
    }
    std::int64_t max_count() const;
    /// Present levels only.
    std::map<std::int64_t, std::int64_t> sparse() const;
};

/// Streaming builder: visit(level) once per time step.
class LocalTimeBuilder {
public:
    void visit(std::int64_t level) {
        std::int64_t i = level - lo_;
        if (static_cast<std::uint64_t>(i) >= counts_.size()) i = grow(level);
        ++counts_[static_cast<std::size_t>(i)];
        ++n_;
    }
    std::int64_t n() const { return n_; }
    std::int64_t count(std::int64_t level) const {
        std::int64_t i = level - lo_;
        if (static_cast<std::uint64_t>(i) >= counts_.size()) return 0;
        return counts_[static_cast<std::size_t>(i)];
    }
    LocalTimeHistogram snapshot() const;

private:
    std::int64_t grow(std::int64_t level);
    std::int64_t lo_ = 0;
    std::int64_t n_ = 0;
    std::vector<std::int64_t> counts_;
};

/// Counts over S_0..S_{n-1}. Throws DimensionMismatch for d != 1.
LocalTimeHistogram local_time(const WalkPath& path);
/// Same over the first m values S_0..S_{m-1}, m <= path.n.
LocalTimeHistogram local_time_prefix(const WalkPath& path, std::int64_t m);

/// sum_l N(l)^2, accumulated exactly.
std::int64_t occupation_square(const LocalTimeHistogram& h);
/// sum_l N(l) N(l + shift).
std::int64_t occupation_cross(const LocalTimeHistogram& h, std::int64_t shift);
/// Levels negated.
LocalTimeHistogram mirror(const LocalTimeHistogram& h);

/// E|N_n(x) - N_n(y)|^2 / (sqrt(n) |x - y|) over the paths' first n steps.
double continuity_modulus(const std::vector<WalkPath>& paths, std::int64_t x, std::int64_t y,
                          std::int64_t n);

/// Per-path value of n^{-1} int_{-M}^{M} |N(floor(sqrt(n) a)) - N(floor(sqrt(n) delta floor(a/delta)))|^2 da
/// for a histogram h; n is the normalising length.
double rw2_integrand(const LocalTimeHistogram& h, std::int64_t n, double delta, double M);

/// Per-path values N(floor(sqrt(n) a))^2 / n for a = -3..3.
std::vector<double> sup_probe_terms(const LocalTimeHistogram& h, std::int64_t n);

struct Rw2Report {
    std::int64_t n = 0;
    std::vector<double> t_grid;
    std::vector<double> delta_grid;
    std::vector<std::vector<double>> integrand;  // [t][delta]
    bool decreasing_in_delta = false;  // along the given delta order
    double sup_l2 = 0.0;  // sup_a || n^{-1/2} N_n(floor(sqrt(n) a)) ||_2
    bool sup_finite = false;
};

/// Tabulate the integrand on t_grid x delta_grid (delta_grid listed from
/// coarse to fine) and the L2 sup over a in {-3..3}.
Rw2Report rw2_condition_check(const std::vector<WalkPath>& paths,
                              const std::vector<double>& t_grid,
                              const std::vector<double>& delta_grid, double M);

/// The same from per-path histograms, hists[t][path] taken at floor(n t).
Rw2Report rw2_from_histograms(const std::vector<std::vector<LocalTimeHistogram>>& hists,
                              std::int64_t n, const std::vector<double>& t_grid,
                              const std::vector<double>& delta_grid, double M);

}  // namespace zxc
