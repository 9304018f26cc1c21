#include "zxc/zext.hpp"

#include <algorithm>
#include <numbers>

namespace zxc {

WalkPath path_from_steps(const std::vector<int>& steps) {
    WalkPath p;
    p.dim = 1;
    p.n = static_cast<std::int64_t>(steps.size());
    p.values.assign(steps.size() + 1, 0);
    for (std::size_t k = 0; k < steps.size(); ++k) p.values[k + 1] = p.values[k] + steps[k];
    return p;
}

VarianceEstimate variance_from_terminals(const std::vector<std::int64_t>& terminals,
                                         std::int64_t n) {
    require(!terminals.empty(), "variance_estimate: no paths");
    require(n >= 1, "variance_estimate: n must be >= 1");
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t s : terminals) {
        double v = static_cast<double>(s) * static_cast<double>(s) / static_cast<double>(n);
        sum += v;
        sum2 += v * v;
    }
    double m = static_cast<double>(terminals.size());
    VarianceEstimate e;
    e.n_paths = static_cast<std::int64_t>(terminals.size());
    e.sigma = sum / m;
    double var = m > 1 ? (sum2 - m * e.sigma * e.sigma) / (m - 1) : 0.0;
    e.stderr_ = std::sqrt(std::max(var, 0.0) / m);
    return e;
}

VarianceEstimate variance_estimate(const std::vector<WalkPath>& paths) {
    require(!paths.empty(), "variance_estimate: no paths");
    require(paths.size() >= 100, "variance_estimate: need at least 100 paths");
    std::int64_t n = paths.front().n;
    std::vector<std::int64_t> term;
    term.reserve(paths.size());
    for (const WalkPath& p : paths) {
        if (p.dim != 1) throw DimensionMismatch("variance_estimate expects d = 1 paths");
        require(p.n == n, "variance_estimate: paths of unequal length");
        term.push_back(p.terminal());
    }
    return variance_from_terminals(term, n);
}

int lattice_period(const std::vector<int>& observed_steps) {
    int g = 0;
    for (std::size_t i = 1; i < observed_steps.size(); ++i)
        g = std::gcd(g, std::abs(observed_steps[i] - observed_steps[0]));
    return g == 0 ? 1 : g;
}

LltReport llt_from_terminals(const std::vector<std::int64_t>& terminals, std::int64_t n,
                             int period, std::int64_t residue, double sigma) {
    LltReport rep;
    rep.n = n;
    rep.n_paths = static_cast<std::int64_t>(terminals.size());
    rep.period = period;
    rep.sigma = sigma;
    auto attainable = [&](std::int64_t N) {
        // smallest attainable value >= N on the shifted lattice
        std::int64_t r = ((N - residue) % period + period) % period;
        return r == 0 ? N : N + (period - r);
    };
    std::int64_t root = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(n))));
    std::vector<std::int64_t> probes{0, root, -root, 2 * root, -2 * root};
    for (std::int64_t& N : probes) N = attainable(N);
    double var = sigma * static_cast<double>(n);
    for (std::int64_t N : probes) {
        LltPoint pt;
        pt.N = N;
        pt.count = std::count(terminals.begin(), terminals.end(), N);
        pt.empirical = static_cast<double>(pt.count) / static_cast<double>(terminals.size());
        double dN = static_cast<double>(N);
        pt.predicted = var > 0 ? period * std::exp(-dN * dN / (2.0 * var)) /
                                     std::sqrt(2.0 * std::numbers::pi * var)
                               : (N == 0 ? 1.0 : 0.0);
        if (pt.predicted > 0)
            rep.max_rel_dev =
                std::max(rep.max_rel_dev, std::abs(pt.empirical / pt.predicted - 1.0));
        rep.points.push_back(pt);
    }
    if (var > 0) rep.scaled_mass_at_zero = rep.points[0].empirical * std::sqrt(var) / period;
    if (rep.points[0].empirical > 0) rep.ratio_one_sd = rep.points[1].empirical / rep.points[0].empirical;
    return rep;
}

std::vector<InitialLaw<Toy1::State>> toy_laws() {
    std::vector<InitialLaw<Toy1::State>> laws;
    laws.push_back({"lebesgue", [](std::mt19937_64& rng) { return Toy1::from_seed(rng()); }, true});
    laws.push_back({"uniform_half",
                    [](std::mt19937_64& rng) { return Toy1::from_seed(rng(), 0, 1); }, true});
    laws.push_back({"density_2x", [](std::mt19937_64& rng) {
                        double x = std::sqrt(uniform01(rng));
                        auto bits = static_cast<std::uint64_t>(std::ldexp(x, 52));
                        if (bits >> 52) bits = (std::uint64_t{1} << 52) - 1;
                        return Toy1::from_seed(rng(), bits, 52);
                    },
                    true});
    return laws;
}

InitialLaw<Toy1::State> toy_point_mass(std::uint64_t seed) {
    return {"point_mass", [seed](std::mt19937_64&) { return Toy1::from_seed(seed); }, false};
}

}  // namespace zxc
