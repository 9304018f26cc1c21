#include "zxc/localtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace zxc {

namespace {

__extension__ typedef __int128 i128;

std::int64_t narrow(i128 v, const char* what) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        throw Error(std::string(what) + ": result exceeds 64-bit range");
    return static_cast<std::int64_t>(v);
}

}  // namespace

std::int64_t LocalTimeHistogram::max_count() const {
    std::int64_t m = 0;
    for (std::int64_t c : counts) m = std::max(m, c);
    return m;
}

std::map<std::int64_t, std::int64_t> LocalTimeHistogram::sparse() const {
    std::map<std::int64_t, std::int64_t> out;
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] > 0) out[min_level + static_cast<std::int64_t>(i)] = counts[i];
    return out;
}

std::int64_t LocalTimeBuilder::grow(std::int64_t level) {
    if (counts_.empty()) {
        counts_.assign(1024, 0);
        lo_ = level - 512;
        return level - lo_;
    }
    std::int64_t size = static_cast<std::int64_t>(counts_.size());
    std::int64_t new_lo = lo_, new_hi = lo_ + size;
    while (level < new_lo) new_lo -= size;
    while (level >= new_hi) new_hi += size;
    std::vector<std::int64_t> next(static_cast<std::size_t>(new_hi - new_lo), 0);
    std::copy(counts_.begin(), counts_.end(), next.begin() + (lo_ - new_lo));
    counts_.swap(next);
    lo_ = new_lo;
    return level - lo_;
}

LocalTimeHistogram LocalTimeBuilder::snapshot() const {
    LocalTimeHistogram h;
    h.n = n_;
    std::size_t a = 0, b = counts_.size();
    while (a < b && counts_[a] == 0) ++a;
    while (b > a && counts_[b - 1] == 0) --b;
    h.min_level = lo_ + static_cast<std::int64_t>(a);
    h.counts.assign(counts_.begin() + a, counts_.begin() + b);
    return h;
}

LocalTimeHistogram local_time_prefix(const WalkPath& path, std::int64_t m) {
    if (path.dim != 1) throw DimensionMismatch("local time needs a d = 1 walk");
    require(m >= 0 && m <= path.n, "local_time_prefix: m out of range");
    LocalTimeHistogram h;
    h.n = m;
    if (m == 0) return h;
    std::int64_t lo = path.values[0], hi = lo;
    for (std::int64_t k = 0; k < m; ++k) {
        lo = std::min(lo, path.values[k]);
        hi = std::max(hi, path.values[k]);
    }
    h.min_level = lo;
    h.counts.assign(static_cast<std::size_t>(hi - lo + 1), 0);
    for (std::int64_t k = 0; k < m; ++k) ++h.counts[static_cast<std::size_t>(path.values[k] - lo)];
    return h;
}

LocalTimeHistogram local_time(const WalkPath& path) { return local_time_prefix(path, path.n); }

std::int64_t occupation_square(const LocalTimeHistogram& h) {
    i128 s = 0;
    for (std::int64_t c : h.counts) s += static_cast<i128>(c) * c;
    return narrow(s, "occupation_square");
}

std::int64_t occupation_cross(const LocalTimeHistogram& h, std::int64_t shift) {
    i128 s = 0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        if (h.counts[i] == 0) continue;
        std::int64_t l = h.min_level + static_cast<std::int64_t>(i);
        s += static_cast<i128>(h.counts[i]) * h.at(l + shift);
    }
    return narrow(s, "occupation_cross");
}

LocalTimeHistogram mirror(const LocalTimeHistogram& h) {
    LocalTimeHistogram m;
    m.n = h.n;
    m.min_level = h.counts.empty() ? 0 : -h.max_level();
    m.counts.assign(h.counts.rbegin(), h.counts.rend());
    return m;
}

double continuity_modulus(const std::vector<WalkPath>& paths, std::int64_t x, std::int64_t y,
                          std::int64_t n) {
    require(!paths.empty(), "continuity_modulus: no paths");
    if (x == y) return 0.0;
    double acc = 0.0;
    for (const WalkPath& p : paths) {
        LocalTimeHistogram h = local_time_prefix(p, n);
        double d = static_cast<double>(h.at(x) - h.at(y));
        acc += d * d;
    }
    acc /= static_cast<double>(paths.size());
    return acc / (std::sqrt(static_cast<double>(n)) * std::abs(static_cast<double>(x - y)));
}

double rw2_integrand(const LocalTimeHistogram& h, std::int64_t n, double delta, double M) {
    require(delta > 0 && M > 0 && n > 0, "rw2_integrand: bad parameters");
    const double s = std::sqrt(static_cast<double>(n));
    double acc = 0.0;
    auto j_lo = static_cast<std::int64_t>(std::floor(-M / delta));
    auto j_hi = static_cast<std::int64_t>(std::ceil(M / delta));
    for (std::int64_t j = j_lo; j < j_hi; ++j) {
        double a0 = std::max(-M, j * delta), a1 = std::min(M, (j + 1) * delta);
        if (a1 <= a0) continue;
        double ref = static_cast<double>(h.at(static_cast<std::int64_t>(std::floor(s * delta * j))));
        // walk the lattice cells [l/s, (l+1)/s) inside [a0, a1)
        auto l = static_cast<std::int64_t>(std::floor(s * a0));
        double a = a0;
        while (a < a1) {
            double b = std::min(a1, static_cast<double>(l + 1) / s);
            if (b > a) {
                double d = static_cast<double>(h.at(l)) - ref;
                acc += d * d * (b - a);
            }
            a = b;
            ++l;
        }
    }
    return acc / static_cast<double>(n);
}

std::vector<double> sup_probe_terms(const LocalTimeHistogram& h, std::int64_t n) {
    const double s = std::sqrt(static_cast<double>(n));
    std::vector<double> out;
    for (int a = -3; a <= 3; ++a) {
        double c = static_cast<double>(h.at(static_cast<std::int64_t>(std::floor(s * a))));
        out.push_back(c * c / static_cast<double>(n));
    }
    return out;
}

Rw2Report rw2_from_histograms(const std::vector<std::vector<LocalTimeHistogram>>& hists,
                              std::int64_t n, const std::vector<double>& t_grid,
                              const std::vector<double>& delta_grid, double M) {
    require(hists.size() == t_grid.size() && !t_grid.empty(), "rw2: grid/histogram mismatch");
    Rw2Report rep;
    rep.n = n;
    rep.t_grid = t_grid;
    rep.delta_grid = delta_grid;
    rep.decreasing_in_delta = true;
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
        std::vector<double> row;
        for (double delta : delta_grid) {
            double acc = 0.0;
            for (const auto& h : hists[ti]) acc += rw2_integrand(h, n, delta, M);
            row.push_back(acc / static_cast<double>(hists[ti].size()));
        }
        for (std::size_t k = 1; k < row.size(); ++k)
            if (!(row[k] < row[k - 1])) rep.decreasing_in_delta = false;
        rep.integrand.push_back(row);
    }
    // sup over a at the last (largest) t
    std::vector<double> mean(7, 0.0);
    for (const auto& h : hists.back()) {
        auto terms = sup_probe_terms(h, n);
        for (int i = 0; i < 7; ++i) mean[i] += terms[i];
    }
    for (double& m : mean) m /= static_cast<double>(hists.back().size());
    rep.sup_l2 = std::sqrt(*std::max_element(mean.begin(), mean.end()));
    rep.sup_finite = std::isfinite(rep.sup_l2);
    return rep;
}

Rw2Report rw2_condition_check(const std::vector<WalkPath>& paths,
                              const std::vector<double>& t_grid,
                              const std::vector<double>& delta_grid, double M) {
    require(!paths.empty(), "rw2_condition_check: no paths");
    std::int64_t n = paths.front().n;
    std::vector<std::vector<LocalTimeHistogram>> hists;
    for (double t : t_grid) {
        require(t > 0 && t <= 1, "rw2_condition_check: t must lie in (0,1]");
        auto m = static_cast<std::int64_t>(std::floor(n * t));
        std::vector<LocalTimeHistogram> row;
        for (const WalkPath& p : paths) row.push_back(local_time_prefix(p, m));
        hists.push_back(std::move(row));
    }
    return rw2_from_histograms(hists, n, t_grid, delta_grid, M);
}

}  // namespace zxc
