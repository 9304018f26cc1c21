// Limit-law verification: the walk-based oracle for int L_1^2, constants of
// the billiard, distribution comparisons and the almost-sure laws.
//
// Pair counts: nu_n and N_t count unordered pairs. The limit constants are
// stated for ordered pairs, so the checks compare 2 nu_n / n^{3/2} (and
// 2 N_t / t^{3/2}, 2 nubar_n / n^2) with the limit laws.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "zxc/billiard.hpp"
#include "zxc/localtime.hpp"
#include "zxc/parallel.hpp"
#include "zxc/selfcross.hpp"
#include "zxc/zext.hpp"

namespace zxc {

class EmpiricalDistribution {
public:
    EmpiricalDistribution() = default;
    explicit EmpiricalDistribution(std::vector<double> samples);

    const std::vector<double>& samples() const { return samples_; }
    std::size_t n() const { return samples_.size(); }
    /// Fraction of samples <= x.
    double cdf(double x) const;
    double mean() const;
    double median() const;
    EmpiricalDistribution scaled(double c) const;

private:
    std::vector<double> samples_;
};

/// 8 / (3 sqrt(2 pi)): E int L_1^2 for standard Brownian motion.
double brownian_L2_mean();

/// reps samples of sigma^{-1/2} m^{-3/2} sum_l N_m(l)^2 from simple random
/// walks of length m (own generator, independent of the toy system).
EmpiricalDistribution brownian_L2_oracle(std::int64_t m, std::int64_t reps, double sigma,
                                         std::uint64_t seed, int workers = 1);

/// Sup distance of the two empirical CDFs.
double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

struct ConstantsReport {
    double Gamma = 0.0;
    double E_tau = 0.0;
    double E_tau_se = 0.0;
    double E_tau_formula = 0.0;
    double mean_count = 0.0;  // E over mu_bar x mu_bar of the torus intersection count
    double mean_count_se = 0.0;
    double e_I_direct = 0.0;
    double e_I_direct_se = 0.0;
    double e_I_kac = 0.0;
    double e_I_kac_se = 0.0;
    double e_I_prime = 0.0;
    double e_I_formula = 0.0;  // 8 pi quotient_area
    int max_multiplicity = 0;
    std::int64_t resampled = 0;
    /// e_I Gamma^{-2}: the constant in front of the discrete-time limit.
    double c_discrete() const { return e_I_direct / (Gamma * Gamma); }
};

ConstantsReport estimate_constants(const BilliardTable& t, std::int64_t n_pairs,
                                   std::int64_t n_tau, std::uint64_t seed, int workers = 1);

/// Billiard walks S_n from mu_bar starts; Sigma-hat at n.
VarianceEstimate billiard_variance(const BilliardTable& t, std::int64_t n, std::int64_t n_paths,
                                   std::uint64_t seed, int workers = 1);

struct GridPoint {
    std::int64_t n = 0;
    double ks = 0.0;
    double mean = 0.0;
    EmpiricalDistribution dist;
    std::vector<double> raw;  // per start, in start order
};

struct Theorem2Report {
    std::vector<GridPoint> grid;
    double sigma = 0.0;
    double scale = 0.0;  // multiplies the unit-variance oracle
    double oracle_mean = 0.0;  // scale * mean(oracle)
    double first_moment_rel_err = 0.0;  // at the largest n
    bool monotone_trend = false;
    std::int64_t resampled = 0;
};

/// Toy analogue: n^{-3/2} sum N_n^2 for n in ns along the same walks.
Theorem2Report theorem2_toy(const std::vector<std::int64_t>& ns, std::int64_t n_starts,
                            const EmpiricalDistribution& oracle, std::uint64_t seed,
                            int workers = 1);

/// Billiard: 2 nu_n / n^{3/2} from mu_bar starts against
/// e_I Gamma^{-2} sigma^{-1/2} oracle, with oracle at sigma = 1.
Theorem2Report theorem2_check(const BilliardTable& t, const std::vector<std::int64_t>& ns,
                              std::int64_t n_starts, const EmpiricalDistribution& oracle,
                              const ConstantsReport& c, double sigma, std::uint64_t seed,
                              int workers = 1);

struct Theorem1Report {
    double t = 0.0;
    std::int64_t n_starts = 0;
    double sandwich_pass_fraction = 0.0;
    double mean_t_over_nt = 0.0;
    double birkhoff_rel_err = 0.0;  // |mean(t/n_t) / E_tau - 1|
    double mean_Nt = 0.0;  // mean of N_t / t^{3/2}
    double mean_nu = 0.0;  // mean of nu_{n_t} / n_t^{3/2}
    double mean_ratio = 0.0;  // mean_Nt / mean_nu
    double ratio_target = 0.0;  // E_tau^{-3/2}
    double ratio_rel_err = 0.0;
    double sigma_tilde = 0.0;
    double ks = 0.0;  // 2 N_t / t^{3/2} vs e'_I sigma_tilde^{-1/2} oracle
    EmpiricalDistribution dist;
    std::vector<double> raw;  // per start, in start order
    std::int64_t resampled = 0;
};

Theorem1Report theorem1_check(const BilliardTable& t, double horizon, std::int64_t n_starts,
                              const EmpiricalDistribution& oracle, const ConstantsReport& c,
                              double sigma, std::uint64_t seed, int workers = 1);

struct StrongReport {
    std::vector<std::string> laws;
    std::vector<double> ks_to_oracle;
    std::vector<double> means;
    double max_pairwise_ks = 0.0;
    std::vector<EmpiricalDistribution> dists;
    std::vector<std::vector<double>> raw;  // [law][sample]
};

/// The statistic sampled under each initial law; each law is validated for
/// absolute continuity first.
template <class State, class Stat>
StrongReport strong_convergence_check(const std::vector<InitialLaw<State>>& laws, Stat&& stat,
                                      std::int64_t n_samples, const EmpiricalDistribution& oracle,
                                      std::uint64_t seed, int workers = 1) {
    require(laws.size() >= 3, "strong_convergence_check: need at least 3 initial laws");
    for (std::size_t l = 0; l < laws.size(); ++l) {
        std::mt19937_64 probe(derive_seed(seed, 0xA5A5u + l));
        validate_law(laws[l], probe);
    }
    StrongReport rep;
    for (std::size_t l = 0; l < laws.size(); ++l) {
        std::uint64_t law_seed = derive_seed(seed, l);
        auto vals = parallel_map<double>(static_cast<std::size_t>(n_samples), workers,
                                         [&](std::size_t i) {
                                             std::mt19937_64 rng(derive_seed(law_seed, i));
                                             State x = laws[l].draw(rng);
                                             return stat(x);
                                         });
        rep.raw.push_back(vals);
        EmpiricalDistribution d(std::move(vals));
        rep.laws.push_back(laws[l].name);
        rep.ks_to_oracle.push_back(ks_distance(d, oracle));
        rep.means.push_back(d.mean());
        rep.dists.push_back(std::move(d));
    }
    for (std::size_t a = 0; a < rep.dists.size(); ++a)
        for (std::size_t b = a + 1; b < rep.dists.size(); ++b)
            rep.max_pairwise_ks = std::max(rep.max_pairwise_ks, ks_distance(rep.dists[a], rep.dists[b]));
    return rep;
}

/// n^{-3/2} sum_l N_n(l)^2 along a d = 1 toy orbit.
double toy_occupation_stat(Toy1::State& x, std::int64_t n);

struct AppendixAReport {
    int dim = 3;
    std::vector<std::int64_t> t_grid;
    std::vector<std::vector<double>> ratio;  // [orbit][t] N_t / t
    double E_I = 0.0;  // 2 sum_{k>=1} P(S_k = 0)
    std::vector<double> partial_sums;  // sum_{k<=t} P(S_k = 0) at each t
    double partial_sum_rel_gap = 0.0;
    double max_orbit_gap = 0.0;  // max over orbits of |r(t_last)/r(t_prev) - 1|
    double mean_last = 0.0;
    double rel_err_vs_E_I = 0.0;
    double max_last_dispersion = 0.0;  // max over orbits of |r_last / mean_last - 1|
    bool stabilized = false;
};

/// Exact P(S_k = 0) for the walk with d independent +-1 coordinates.
double return_probability(int dim, std::int64_t k);
double return_sum(int dim, std::int64_t k_max);

/// N_t = #{(k, m), k != m < t : S_k = S_m} along toy orbits. dim 1 is the
/// recurrent control and is expected to fail the stabilization test.
AppendixAReport appendixA_check(int dim, const std::vector<std::int64_t>& t_grid,
                                std::int64_t n_orbits, std::uint64_t seed, int workers = 1);

struct AppendixBReport {
    std::vector<std::int64_t> n_grid;
    std::vector<std::vector<double>> ratio;  // [orbit][n] 2 nubar_n / n^2
    double e_bar = 0.0;  // direct pair estimate of E count on T^2
    double e_bar_se = 0.0;
    double max_orbit_gap = 0.0;
    double mean_gap = 0.0;
    double mean_last = 0.0;
    double rel_err = 0.0;
    bool quotient_dominates = true;  // nubar_n >= cylinder nu_n on every orbit
    std::int64_t resampled = 0;
};

AppendixBReport appendixB_check(const BilliardTable& t, const std::vector<std::int64_t>& n_grid,
                                std::int64_t n_orbits, const ConstantsReport& c,
                                std::uint64_t seed, int workers = 1);

struct TplocReport {
    std::vector<std::int64_t> ns;
    std::vector<double> tploc;  // mean n^{-3/2} |sum N^2 - cross(1)|
    bool tploc_decreasing = false;
    std::vector<double> modulus;  // E|N(0) - N(1)|^2 / sqrt n at each n
    double modulus_ratio = 0.0;  // worst max(r, 1/r) between consecutive ns
    double modulus_lin_ratio = 0.0;  // modulus(x=0,y=2) / modulus(x=0,y=1) at the largest n
    std::vector<double> sup_l2;  // propplantar (2) sup at each n
    double sup_ratio = 0.0;  // sup at n_last / sup at n_prev
    std::vector<double> median_square;  // median of n^{-3/2} sum N^2
};

/// Moment probes on toy walks, one pass per walk with snapshots at ns.
TplocReport moment_probes(const std::vector<std::int64_t>& ns, std::int64_t n_paths,
                          std::uint64_t seed, int workers = 1);

}  // namespace zxc
