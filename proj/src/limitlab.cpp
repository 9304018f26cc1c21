#include "zxc/limitlab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unordered_map>

namespace zxc {

namespace {

constexpr double kPi = std::numbers::pi;

struct Moments {
    double sum = 0.0;
    double sum2 = 0.0;
    std::int64_t n = 0;
    void add(double v) {
        sum += v;
        sum2 += v * v;
        ++n;
    }
    void merge(const Moments& o) {
        sum += o.sum;
        sum2 += o.sum2;
        n += o.n;
    }
    double mean() const { return n ? sum / n : 0.0; }
    double se() const {
        if (n < 2) return 0.0;
        double m = mean();
        return std::sqrt(std::max(0.0, (sum2 - n * m * m) / (n - 1)) / n);
    }
};

// xoshiro256** for the oracle walks; seeded through splitmix64.
class Xoshiro {
public:
    explicit Xoshiro(std::uint64_t seed) {
        for (auto& w : s_) {
            seed += 0x9E3779B97F4A7C15ull;
            std::uint64_t z = seed;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
            w = z ^ (z >> 31);
        }
    }
    std::uint64_t operator()() {
        std::uint64_t r = rotl(s_[1] * 5, 7) * 9;
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return r;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

double pow15(double n) { return n * std::sqrt(n); }

bool strictly_decreasing(const std::vector<GridPoint>& g) {
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i].ks < g[i - 1].ks)) return false;
    return g.size() >= 2;
}

}  // namespace

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : samples_(std::move(samples)) {
    require(samples_.size() >= 2, "EmpiricalDistribution: need at least 2 samples");
    std::sort(samples_.begin(), samples_.end());
}

double EmpiricalDistribution::cdf(double x) const {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
    return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

double EmpiricalDistribution::mean() const {
    if (samples_.empty()) return 0.0;
    return std::accumulate(samples_.begin(), samples_.end(), 0.0) / static_cast<double>(samples_.size());
}

double EmpiricalDistribution::median() const {
    if (samples_.empty()) return 0.0;
    std::size_t n = samples_.size();
    return n % 2 ? samples_[n / 2] : 0.5 * (samples_[n / 2 - 1] + samples_[n / 2]);
}

EmpiricalDistribution EmpiricalDistribution::scaled(double c) const {
    require(c > 0, "scaled: factor must be positive");
    std::vector<double> v = samples_;
    for (double& x : v) x *= c;
    return EmpiricalDistribution(std::move(v));
}

double brownian_L2_mean() { return 8.0 / (3.0 * std::sqrt(2.0 * kPi)); }

EmpiricalDistribution brownian_L2_oracle(std::int64_t m, std::int64_t reps, double sigma,
                                         std::uint64_t seed, int workers) {
    require(m >= 100000, "brownian_L2_oracle: m must be >= 1e5");
    require(sigma > 0, "brownian_L2_oracle: sigma must be positive");
    require(reps >= 2, "brownian_L2_oracle: need at least 2 reps");
    const double norm = 1.0 / (std::sqrt(sigma) * pow15(static_cast<double>(m)));
    auto vals = parallel_map<double>(static_cast<std::size_t>(reps), workers, [&](std::size_t r) {
        thread_local std::vector<std::uint32_t> cnt;
        if (cnt.size() < static_cast<std::size_t>(2 * m + 1)) cnt.assign(static_cast<std::size_t>(2 * m + 1), 0);
        Xoshiro g(derive_seed(seed, r));
        std::int64_t pos = m, lo = m, hi = m;
        std::int64_t k = 0;
        while (k < m) {
            std::uint64_t w = g();
            int lim = static_cast<int>(std::min<std::int64_t>(64, m - k));
            for (int b = 0; b < lim; ++b) {
                ++cnt[static_cast<std::size_t>(pos)];
                pos += static_cast<std::int64_t>((w >> b) & 1u) * 2 - 1;
            }
            lo = std::min(lo, pos);
            hi = std::max(hi, pos);
            k += lim;
        }
        std::uint64_t sq = 0;
        for (std::int64_t l = std::max<std::int64_t>(0, lo - 64); l <= std::min(2 * m, hi + 64); ++l) {
            std::uint64_t c = cnt[static_cast<std::size_t>(l)];
            sq += c * c;
            cnt[static_cast<std::size_t>(l)] = 0;
        }
        return static_cast<double>(sq) * norm;
    });
    return EmpiricalDistribution(std::move(vals));
}

double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    const auto& x = a.samples();
    const auto& y = b.samples();
    require(!x.empty() && !y.empty(), "ks_distance: empty sample");
    std::size_t i = 0, j = 0;
    const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

ConstantsReport estimate_constants(const BilliardTable& t, std::int64_t n_pairs,
                                   std::int64_t n_tau, std::uint64_t seed, int workers) {
    require(n_pairs > 0, "estimate_constants: n_pairs must be positive");
    require(n_tau > 0, "estimate_constants: n_tau must be positive");
    ConstantsReport rep;
    rep.Gamma = 2.0 * t.boundary_length();

    const std::int64_t blocks = 64;
    struct Block {
        Moments tau, count;
        int max_k = 0;
        std::int64_t resampled = 0;
    };
    auto self_check = [&](const Segment& a) {
        auto K = static_cast<std::int64_t>(std::ceil(a.length())) + 1;
        for (std::int64_t k = -K; k <= K; ++k)
            for (std::int64_t m = -K; m <= K; ++m) {
                if (k == 0 && m == 0) continue;
                Point2 sh{static_cast<double>(m), static_cast<double>(k)};
                if (segment_intersect(a, {a.a + sh, a.b + sh}).kind != HitKind::none)
                    throw BprimeViolation("arc meets one of its own translates");
            }
    };
    auto res = parallel_map<Block>(static_cast<std::size_t>(blocks), workers, [&](std::size_t b) {
        Block out;
        std::mt19937_64 rng(derive_seed(seed, b));
        std::int64_t np = n_pairs / blocks + (static_cast<std::int64_t>(b) < n_pairs % blocks ? 1 : 0);
        std::int64_t nt = n_tau / blocks + (static_cast<std::int64_t>(b) < n_tau % blocks ? 1 : 0);
        for (std::int64_t i = 0; i < nt;) {
            CollisionState x = sample_mu_bar(t, rng);
            try {
                out.tau.add(billiard_map(t, x).tau);
                ++i;
            } catch (const TangentialHit&) {
                ++out.resampled;
            }
        }
        for (std::int64_t i = 0; i < np;) {
            CollisionState x = sample_mu_bar(t, rng);
            CollisionState y = sample_mu_bar(t, rng);
            try {
                Segment ax = arc_of(t, x), ay = arc_of(t, y);
                self_check(ax);
                int k = torus_intersection_count(ax, ay);
                out.count.add(k);
                out.max_k = std::max(out.max_k, k);
                ++i;
            } catch (const TangentialHit&) {
                ++out.resampled;
            } catch (const OverlapDetected&) {
                ++out.resampled;
            }
        }
        return out;
    });
    Moments tau, count;
    for (const Block& b : res) {
        tau.merge(b.tau);
        count.merge(b.count);
        rep.max_multiplicity = std::max(rep.max_multiplicity, b.max_k);
        rep.resampled += b.resampled;
    }
    rep.E_tau = tau.mean();
    rep.E_tau_se = tau.se();
    rep.E_tau_formula = mean_free_path_formula(t);
    rep.mean_count = count.mean();
    rep.mean_count_se = count.se();
    double g2 = rep.Gamma * rep.Gamma;
    rep.e_I_direct = g2 * rep.mean_count;
    rep.e_I_direct_se = g2 * rep.mean_count_se;
    rep.e_I_kac = 4.0 * rep.Gamma * rep.E_tau;
    rep.e_I_kac_se = 4.0 * rep.Gamma * rep.E_tau_se;
    rep.e_I_prime = rep.e_I_direct / (rep.E_tau * rep.E_tau * g2);
    rep.e_I_formula = 8.0 * kPi * t.quotient_area();
    return rep;
}

VarianceEstimate billiard_variance(const BilliardTable& t, std::int64_t n, std::int64_t n_paths,
                                   std::uint64_t seed, int workers) {
    BilliardSystem sys(t);
    auto term = parallel_map<std::int64_t>(static_cast<std::size_t>(n_paths), workers, [&](std::size_t i) {
        std::mt19937_64 rng(derive_seed(seed, i));
        for (;;) {
            CollisionState x = sys.sample(rng);
            try {
                std::int64_t s = 0;
                for (std::int64_t k = 0; k < n; ++k) s += sys.advance(x)[0];
                return s;
            } catch (const TangentialHit&) {
            }
        }
    });
    return variance_from_terminals(term, n);
}

Theorem2Report theorem2_toy(const std::vector<std::int64_t>& ns, std::int64_t n_starts,
                            const EmpiricalDistribution& oracle, std::uint64_t seed, int workers) {
    require(!ns.empty() && std::is_sorted(ns.begin(), ns.end()), "theorem2_toy: ns must be increasing");
    const std::int64_t nmax = ns.back();
    auto rows = parallel_map<std::vector<double>>(static_cast<std::size_t>(n_starts), workers, [&](std::size_t i) {
        Toy1 sys;
        auto x = Toy1::from_seed(derive_seed(seed, i));
        LocalTimeBuilder b;
        std::int64_t level = 0, sq = 0;
        std::vector<double> out;
        std::size_t next = 0;
        for (std::int64_t k = 0; k < nmax; ++k) {
            sq += 2 * b.count(level) + 1;
            b.visit(level);
            level += sys.advance(x)[0];
            if (k + 1 == ns[next]) {
                out.push_back(static_cast<double>(sq) / pow15(static_cast<double>(k + 1)));
                ++next;
            }
        }
        return out;
    });
    Theorem2Report rep;
    rep.sigma = 1.0;
    rep.scale = 1.0;
    rep.oracle_mean = oracle.mean();
    for (std::size_t g = 0; g < ns.size(); ++g) {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r[g]);
        GridPoint p;
        p.n = ns[g];
        p.raw = v;
        p.dist = EmpiricalDistribution(std::move(v));
        p.ks = ks_distance(p.dist, oracle);
        p.mean = p.dist.mean();
        rep.grid.push_back(std::move(p));
    }
    rep.monotone_trend = strictly_decreasing(rep.grid);
    rep.first_moment_rel_err = std::abs(rep.grid.back().mean / rep.oracle_mean - 1.0);
    return rep;
}

double toy_occupation_stat(Toy1::State& x, std::int64_t n) {
    Toy1 sys;
    LocalTimeBuilder b;
    std::int64_t level = 0;
    for (std::int64_t k = 0; k < n; ++k) {
        b.visit(level);
        level += sys.advance(x)[0];
    }
    return static_cast<double>(occupation_square(b.snapshot())) / pow15(static_cast<double>(n));
}

Theorem2Report theorem2_check(const BilliardTable& t, const std::vector<std::int64_t>& ns,
                              std::int64_t n_starts, const EmpiricalDistribution& oracle,
                              const ConstantsReport& c, double sigma, std::uint64_t seed,
                              int workers) {
    require(!ns.empty() && std::is_sorted(ns.begin(), ns.end()), "theorem2_check: ns must be increasing");
    require(sigma > 0, "theorem2_check: sigma must be positive");
    const std::int64_t nmax = ns.back();
    struct Row {
        std::vector<double> v;
        std::int64_t resampled = 0;
    };
    auto rows = parallel_map<Row>(static_cast<std::size_t>(n_starts), workers, [&](std::size_t i) {
        Row r;
        std::mt19937_64 rng(derive_seed(seed, i));
        for (;;) {
            CollisionState x = sample_mu_bar(t, rng);
            try {
                auto arcs = orbit_arcs(t, x, nmax);
                auto nus = nu_prefix_counts(arcs, ns, safe_cell_span(arcs, t.step_bound()));
                for (std::size_t g = 0; g < ns.size(); ++g)
                    r.v.push_back(2.0 * static_cast<double>(nus[g]) / pow15(static_cast<double>(ns[g])));
                return r;
            } catch (const TangentialHit&) {
                ++r.resampled;
            } catch (const OverlapDetected&) {
                ++r.resampled;
            }
        }
    });
    Theorem2Report rep;
    rep.sigma = sigma;
    rep.scale = c.c_discrete() / std::sqrt(sigma);
    EmpiricalDistribution target = oracle.scaled(rep.scale);
    rep.oracle_mean = target.mean();
    for (const Row& r : rows) rep.resampled += r.resampled;
    for (std::size_t g = 0; g < ns.size(); ++g) {
        std::vector<double> v;
        for (const Row& r : rows) v.push_back(r.v[g]);
        GridPoint p;
        p.n = ns[g];
        p.raw = v;
        p.dist = EmpiricalDistribution(std::move(v));
        p.ks = ks_distance(p.dist, target);
        p.mean = p.dist.mean();
        rep.grid.push_back(std::move(p));
    }
    rep.monotone_trend = strictly_decreasing(rep.grid);
    rep.first_moment_rel_err = std::abs(rep.grid.back().mean / rep.oracle_mean - 1.0);
    return rep;
}

Theorem1Report theorem1_check(const BilliardTable& t, double horizon, std::int64_t n_starts,
                              const EmpiricalDistribution& oracle, const ConstantsReport& c,
                              double sigma, std::uint64_t seed, int workers) {
    require(horizon > 0, "theorem1_check: horizon must be positive");
    struct Row {
        double nt_stat = 0.0, nu_stat = 0.0, t_over_nt = 0.0;
        bool sandwich = false;
        std::int64_t resampled = 0;
    };
    auto rows = parallel_map<Row>(static_cast<std::size_t>(n_starts), workers, [&](std::size_t i) {
        Row r;
        std::mt19937_64 rng(derive_seed(seed, i));
        for (;;) {
            CollisionState x = sample_mu_bar(t, rng);
            try {
                std::vector<TrajectoryArc> arcs;
                CollisionState y = x;
                double time = 0.0, phase = 0.0;
                for (std::int64_t k = 0;; ++k) {
                    MapStep st = billiard_map(t, y);
                    if (k == 0) phase = uniform01(rng) * st.tau;
                    TrajectoryArc a;
                    a.seg = st.arc;
                    a.start_cell = y.cell;
                    a.end_cell = st.next.cell;
                    a.t_start = time;
                    time += st.tau;
                    a.t_end = time;
                    a.index = k;
                    arcs.push_back(a);
                    y = st.next;
                    if (time >= phase + horizon) break;
                }
                const double w1 = phase + horizon;
                std::int64_t n_t = 0, first_in = -1, last_in = -1;
                for (const auto& a : arcs) {
                    if (a.t_end > phase && a.t_end <= w1) ++n_t;
                    if (a.t_start >= phase && a.t_end <= w1) {
                        if (first_in < 0) first_in = a.index;
                        last_in = a.index;
                    }
                }
                std::int64_t lower = 0, upper = 0, nu_nt = 0;
                std::int64_t span = safe_cell_span(arcs, t.step_bound());
                for_each_crossing(arcs, CountMode::cylinder, span,
                                  [&](std::int64_t ii, std::int64_t jj, Point2) {
                                      ++upper;
                                      if (ii >= first_in && jj <= last_in) ++lower;
                                      if (jj < n_t) ++nu_nt;
                                  });
                std::int64_t N = continuous_count_window(arcs, phase, horizon);
                r.sandwich = lower <= N && N <= upper;
                r.nt_stat = static_cast<double>(N) / pow15(horizon);
                r.nu_stat = static_cast<double>(nu_nt) / pow15(static_cast<double>(n_t));
                r.t_over_nt = horizon / static_cast<double>(n_t);
                return r;
            } catch (const TangentialHit&) {
                ++r.resampled;
            } catch (const OverlapDetected&) {
                ++r.resampled;
            }
        }
    });
    Theorem1Report rep;
    rep.t = horizon;
    rep.n_starts = n_starts;
    std::vector<double> v;
    double pass = 0, s_nt = 0, s_nu = 0, s_ratio = 0;
    for (const Row& r : rows) {
        pass += r.sandwich ? 1 : 0;
        s_nt += r.nt_stat;
        s_nu += r.nu_stat;
        s_ratio += r.t_over_nt;
        rep.resampled += r.resampled;
        v.push_back(2.0 * r.nt_stat);
    }
    double n = static_cast<double>(rows.size());
    rep.sandwich_pass_fraction = pass / n;
    rep.mean_t_over_nt = s_ratio / n;
    rep.birkhoff_rel_err = std::abs(rep.mean_t_over_nt / c.E_tau - 1.0);
    rep.mean_Nt = s_nt / n;
    rep.mean_nu = s_nu / n;
    rep.mean_ratio = rep.mean_Nt / rep.mean_nu;
    rep.ratio_target = std::pow(c.E_tau, -1.5);
    rep.ratio_rel_err = std::abs(rep.mean_ratio / rep.ratio_target - 1.0);
    rep.sigma_tilde = sigma / c.E_tau;
    rep.raw = v;
    rep.dist = EmpiricalDistribution(std::move(v));
    rep.ks = ks_distance(rep.dist, oracle.scaled(c.e_I_prime / std::sqrt(rep.sigma_tilde)));
    return rep;
}

double return_probability(int dim, std::int64_t k) {
    require(dim >= 1 && k >= 0, "return_probability: bad arguments");
    if (k % 2) return 0.0;
    std::int64_t m = k / 2;
    double lp = std::lgamma(2.0 * m + 1) - 2.0 * std::lgamma(m + 1.0) - 2.0 * m * std::log(2.0);
    return std::exp(dim * lp);
}

double return_sum(int dim, std::int64_t k_max) {
    double p = 1.0, s = 0.0;
    for (std::int64_t m = 1; 2 * m <= k_max; ++m) {
        p *= (2.0 * m - 1.0) / (2.0 * m);
        s += std::pow(p, dim);
    }
    return s;
}

AppendixAReport appendixA_check(int dim, const std::vector<std::int64_t>& t_grid,
                                std::int64_t n_orbits, std::uint64_t seed, int workers) {
    require(dim == 1 || dim == 3, "appendixA_check: dim must be 1 or 3");
    require(t_grid.size() >= 2 && std::is_sorted(t_grid.begin(), t_grid.end()),
            "appendixA_check: need an increasing grid of >= 2 times");
    const std::int64_t tmax = t_grid.back();
    auto rows = parallel_map<std::vector<double>>(static_cast<std::size_t>(n_orbits), workers, [&](std::size_t o) {
        std::unordered_map<std::uint64_t, std::int64_t> visits;
        visits.reserve(static_cast<std::size_t>(tmax));
        std::vector<double> out;
        std::int64_t N = 0;
        std::size_t next = 0;
        std::int64_t pos[3] = {0, 0, 0};
        auto key = [&] {
            std::uint64_t k = 0;
            for (int c = 0; c < 3; ++c)
                k = (k << 21) | (static_cast<std::uint64_t>(pos[c] + (1 << 20)) & 0x1FFFFFu);
            return k;
        };
        auto visit = [&] { N += 2 * visits[key()]++; };
        auto record = [&](std::int64_t k) {
            if (next < t_grid.size() && k == t_grid[next]) {
                out.push_back(static_cast<double>(N) / static_cast<double>(k));
                ++next;
            }
        };
        if (dim == 3) {
            Toy3 sys;
            auto x = Toy3::from_seed(derive_seed(seed, o));
            for (std::int64_t k = 0; k < tmax; ++k) {
                visit();
                record(k + 1);
                auto st = sys.advance(x);
                for (int c = 0; c < 3; ++c) pos[c] += st[c];
            }
        } else {
            Toy1 sys;
            auto x = Toy1::from_seed(derive_seed(seed, o));
            for (std::int64_t k = 0; k < tmax; ++k) {
                visit();
                record(k + 1);
                pos[0] += sys.advance(x)[0];
            }
        }
        return out;
    });
    AppendixAReport rep;
    rep.dim = dim;
    rep.t_grid = t_grid;
    rep.ratio = rows;
    if (dim == 3) {
        // exact series plus the integral tail of (pi m)^{-3/2}
        const std::int64_t M = 20000000;
        double tail = 2.0 / (std::pow(kPi, 1.5) * std::sqrt(static_cast<double>(M)));
        rep.E_I = 2.0 * (return_sum(3, 2 * M) + tail);
    }
    for (std::int64_t tt : t_grid) rep.partial_sums.push_back(return_sum(dim, tt));
    std::size_t L = t_grid.size() - 1;
    rep.partial_sum_rel_gap = std::abs(rep.partial_sums[L] / rep.partial_sums[L - 1] - 1.0);
    double s = 0.0;
    for (const auto& r : rows) {
        rep.max_orbit_gap = std::max(rep.max_orbit_gap, std::abs(r[L] / r[L - 1] - 1.0));
        s += r[L];
    }
    rep.mean_last = s / static_cast<double>(rows.size());
    for (const auto& r : rows)
        rep.max_last_dispersion = std::max(rep.max_last_dispersion, std::abs(r[L] / rep.mean_last - 1.0));
    rep.rel_err_vs_E_I = rep.E_I > 0 ? std::abs(rep.mean_last / rep.E_I - 1.0) : INFINITY;
    rep.stabilized = rep.max_orbit_gap < 0.05;
    return rep;
}

AppendixBReport appendixB_check(const BilliardTable& t, const std::vector<std::int64_t>& n_grid,
                                std::int64_t n_orbits, const ConstantsReport& c,
                                std::uint64_t seed, int workers) {
    require(n_grid.size() >= 2 && std::is_sorted(n_grid.begin(), n_grid.end()),
            "appendixB_check: need an increasing grid of >= 2 sizes");
    struct Row {
        std::vector<double> r;
        bool dominates = true;
        std::int64_t resampled = 0;
    };
    auto rows = parallel_map<Row>(static_cast<std::size_t>(n_orbits), workers, [&](std::size_t o) {
        Row row;
        std::mt19937_64 rng(derive_seed(seed, o));
        for (;;) {
            CollisionState x = sample_mu_bar(t, rng);
            try {
                auto arcs = orbit_arcs(t, x, n_grid.back());
                std::int64_t span = safe_cell_span(arcs, t.step_bound());
                auto q = nu_prefix_counts(arcs, n_grid, span, CountMode::torus);
                auto cyl = nu_prefix_counts(arcs, n_grid, span, CountMode::cylinder);
                for (std::size_t g = 0; g < n_grid.size(); ++g) {
                    double n = static_cast<double>(n_grid[g]);
                    row.r.push_back(2.0 * static_cast<double>(q[g]) / (n * n));
                    if (q[g] < cyl[g]) row.dominates = false;
                }
                return row;
            } catch (const TangentialHit&) {
                ++row.resampled;
            } catch (const OverlapDetected&) {
                ++row.resampled;
            }
        }
    });
    AppendixBReport rep;
    rep.n_grid = n_grid;
    rep.e_bar = c.mean_count;
    rep.e_bar_se = c.mean_count_se;
    std::size_t L = n_grid.size() - 1;
    double s = 0.0, sg = 0.0;
    for (const Row& r : rows) {
        rep.ratio.push_back(r.r);
        double gap = std::abs(r.r[L] / r.r[L - 1] - 1.0);
        rep.max_orbit_gap = std::max(rep.max_orbit_gap, gap);
        sg += gap;
        s += r.r[L];
        rep.quotient_dominates = rep.quotient_dominates && r.dominates;
        rep.resampled += r.resampled;
    }
    double n = static_cast<double>(rows.size());
    rep.mean_gap = sg / n;
    rep.mean_last = s / n;
    rep.rel_err = std::abs(rep.mean_last / rep.e_bar - 1.0);
    return rep;
}

TplocReport moment_probes(const std::vector<std::int64_t>& ns, std::int64_t n_paths,
                          std::uint64_t seed, int workers) {
    require(ns.size() >= 2 && std::is_sorted(ns.begin(), ns.end()), "moment_probes: need increasing ns");
    const std::int64_t nmax = ns.back();
    struct Snap {
        double tploc, d01, d02, sq;
        std::vector<double> sup;
    };
    auto rows = parallel_map<std::vector<Snap>>(static_cast<std::size_t>(n_paths), workers, [&](std::size_t i) {
        Toy1 sys;
        auto x = Toy1::from_seed(derive_seed(seed, i));
        LocalTimeBuilder b;
        std::int64_t level = 0;
        std::size_t next = 0;
        std::vector<Snap> out;
        for (std::int64_t k = 0; k < nmax; ++k) {
            b.visit(level);
            level += sys.advance(x)[0];
            if (k + 1 == ns[next]) {
                auto h = b.snapshot();
                double n = static_cast<double>(k + 1);
                std::int64_t sq = occupation_square(h);
                std::int64_t cr = occupation_cross(h, 1);
                Snap s;
                s.tploc = static_cast<double>(std::abs(sq - cr)) / pow15(n);
                double d1 = static_cast<double>(h.at(0) - h.at(1));
                double d2 = static_cast<double>(h.at(0) - h.at(2));
                s.d01 = d1 * d1;
                s.d02 = d2 * d2;
                s.sq = static_cast<double>(sq) / pow15(n);
                s.sup = sup_probe_terms(h, k + 1);
                out.push_back(std::move(s));
                ++next;
            }
        }
        return out;
    });
    TplocReport rep;
    rep.ns = ns;
    const double np = static_cast<double>(rows.size());
    std::vector<double> mod02;
    for (std::size_t g = 0; g < ns.size(); ++g) {
        double tp = 0, d01 = 0, d02 = 0;
        std::vector<double> sup(7, 0.0), sqs;
        for (const auto& r : rows) {
            tp += r[g].tploc;
            d01 += r[g].d01;
            d02 += r[g].d02;
            sqs.push_back(r[g].sq);
            for (int a = 0; a < 7; ++a) sup[a] += r[g].sup[a];
        }
        double rn = std::sqrt(static_cast<double>(ns[g]));
        rep.tploc.push_back(tp / np);
        rep.modulus.push_back(d01 / np / rn);
        mod02.push_back(d02 / np / (2.0 * rn));
        double mx = 0;
        for (double s : sup) mx = std::max(mx, s / np);
        rep.sup_l2.push_back(std::sqrt(mx));
        rep.median_square.push_back(EmpiricalDistribution(sqs).median());
    }
    rep.tploc_decreasing = true;
    for (std::size_t g = 1; g < ns.size(); ++g)
        if (!(rep.tploc[g] < rep.tploc[g - 1])) rep.tploc_decreasing = false;
    std::size_t L = ns.size() - 1;
    for (std::size_t g = 1; g < ns.size(); ++g) {
        double r = rep.modulus[g] / rep.modulus[g - 1];
        rep.modulus_ratio = std::max({rep.modulus_ratio, r, 1.0 / r});
    }
    rep.modulus_lin_ratio = mod02[L] / rep.modulus[L];
    rep.sup_ratio = rep.sup_l2[L] / rep.sup_l2[L - 1];
    return rep;
}

}  // namespace zxc
