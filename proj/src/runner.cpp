#include "zxc/runner.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "zxc/limitlab.hpp"
#include "zxc/localtime.hpp"
#include "zxc/parallel.hpp"
#include "zxc/selfcross.hpp"
#include "zxc/zext.hpp"

namespace zxc {

const char* const kCodeVersion = "zxc 1.0.0";

namespace {

using json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

template <class T>
T parse_num(const std::string& s, int line) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw ValidationError("line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

std::int64_t parse_count(const std::string& s, int line) {
    // accepts 1e5-style integers as well
    double d = parse_num<double>(s, line);
    if (d != std::floor(d) || std::abs(d) > 9e15)
        throw ValidationError("line " + std::to_string(line) + ": expected an integer, got '" + s + "'");
    return static_cast<std::int64_t>(d);
}

const std::vector<std::string> kSystems = {"billiard", "toy1d", "toy3d", "quotient-billiard"};
const std::vector<std::string> kLaws = {"natural", "mu_bar", "lebesgue"};

bool one_of(const std::string& v, const std::vector<std::string>& set) {
    return std::find(set.begin(), set.end(), v) != set.end();
}

template <class T>
void check_increasing(const std::vector<T>& g, const std::string& name) {
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) throw ValidationError(name + " must be strictly increasing");
    for (const T& v : g)
        if (!(v > 0)) throw ValidationError(name + " entries must be positive");
}

// ---------------------------------------------------------------- output

struct Sample {
    std::string statistic;
    std::int64_t n;
    std::uint64_t seed;
    double value;
};

struct Ctx {
    const RunConfig& cfg;
    std::string sub;
    std::uint64_t seed;
    int workers;
    std::filesystem::path out;
    json report = json::object();
    json assertions = json::array();
    json constants = json::object();
    json stage_seeds = json::object();
    std::vector<Sample> samples;
    std::int64_t degenerate = 0;
    double events = 0.0;

    Ctx(const RunConfig& c, std::string sub_, int w, std::filesystem::path o)
        : cfg(c), sub(std::move(sub_)), seed(c.seed), workers(w), out(std::move(o)) {}

    std::uint64_t stage(const std::string& name, std::uint64_t id) {
        std::uint64_t s = derive_seed(seed, id);
        stage_seeds[name] = s;
        return s;
    }

    void check(const std::string& name, bool pass, double value, const std::string& target) {
        assertions.push_back({{"name", name}, {"pass", pass}, {"value", value}, {"target", target}});
    }

    void add(const std::string& stat, std::int64_t n, std::uint64_t s, double v) {
        samples.push_back({stat, n, s, v});
    }

    // stream seed of item i under a stage seed, as used by the library
    void add_all(const std::string& stat, std::int64_t n, std::uint64_t stage_seed,
                 const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) add(stat, n, derive_seed(stage_seed, i), v[i]);
    }
};

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << s;
}

std::string samples_csv(const std::vector<Sample>& rows) {
    std::string s = "statistic,n,seed,value\n";
    for (const Sample& r : rows) {
        s += r.statistic;
        s += ',';
        s += std::to_string(r.n);
        s += ',';
        s += std::to_string(r.seed);
        s += ',';
        s += format_double(r.value);
        s += '\n';
    }
    return s;
}

json config_echo(const RunConfig& c) {
    json j;
    j["system"] = c.system;
    j["seed"] = c.seed;
    j["n_grid"] = c.n_grid;
    j["t_grid"] = c.t_grid;
    j["n_starts"] = c.n_starts;
    j["reps"] = c.reps;
    j["initial_law"] = c.initial_law;
    j["output_dir"] = c.output_dir;
    j["n_pairs"] = c.n_pairs;
    j["n_tau"] = c.n_tau;
    j["oracle_m"] = c.oracle_m;
    j["variance_n"] = c.variance_n;
    j["variance_paths"] = c.variance_paths;
    j["angle_grid"] = c.angle_grid;
    if (c.has_table) {
        json t;
        t["tau_max"] = c.tau_max;
        t["disks"] = json::array();
        for (const Disk& d : c.disks) t["disks"].push_back({d.center.x, d.center.y, d.radius});
        j["table"] = t;
    }
    return j;
}

// ---------------------------------------------------------------- shared stages

bool is_billiard(const RunConfig& c) { return c.system == "billiard" || c.system == "quotient-billiard"; }

std::int64_t or_default(std::int64_t v, std::int64_t d) { return v > 0 ? v : d; }

std::vector<std::int64_t> n_grid_or(const RunConfig& c, std::vector<std::int64_t> d) {
    return c.n_grid.empty() ? d : c.n_grid;
}

void need_system(const Ctx& ctx, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (ctx.cfg.system == a) return;
    std::string msg = ctx.sub + " does not support system '" + ctx.cfg.system + "'";
    throw ValidationError(msg);
}

ConstantsReport constants_stage(Ctx& ctx, const BilliardTable& t) {
    std::int64_t np = or_default(ctx.cfg.n_pairs, 1000000);
    std::int64_t nt = or_default(ctx.cfg.n_tau, 1000000);
    ConstantsReport c = estimate_constants(t, np, nt, ctx.stage("constants", 1), ctx.workers);
    ctx.degenerate += c.resampled;
    ctx.events += 2.0 * static_cast<double>(np) + static_cast<double>(nt);
    ctx.constants["Gamma"] = c.Gamma;
    ctx.constants["E_tau"] = c.E_tau;
    ctx.constants["E_tau_se"] = c.E_tau_se;
    ctx.constants["E_tau_formula"] = c.E_tau_formula;
    ctx.constants["e_I"] = c.e_I_direct;
    ctx.constants["e_I_se"] = c.e_I_direct_se;
    ctx.constants["e_I_kac"] = c.e_I_kac;
    ctx.constants["e_I_kac_se"] = c.e_I_kac_se;
    ctx.constants["e_I_prime"] = c.e_I_prime;
    ctx.constants["e_I_area_formula"] = c.e_I_formula;
    ctx.constants["mean_torus_count"] = c.mean_count;
    ctx.constants["max_multiplicity"] = c.max_multiplicity;
    return c;
}

double sigma_stage(Ctx& ctx, const BilliardTable& t) {
    std::int64_t n = or_default(ctx.cfg.variance_n, 10000);
    std::int64_t paths = or_default(ctx.cfg.variance_paths, 2000);
    VarianceEstimate v = billiard_variance(t, n, paths, ctx.stage("variance", 2), ctx.workers);
    ctx.events += static_cast<double>(n) * static_cast<double>(paths);
    ctx.constants["Sigma_hat"] = v.sigma;
    ctx.constants["Sigma_hat_se"] = v.stderr_;
    ctx.constants["Sigma_hat_n"] = n;
    return v.sigma;
}

EmpiricalDistribution oracle_stage(Ctx& ctx, double sigma, std::uint64_t id) {
    std::int64_t m = or_default(ctx.cfg.oracle_m, 1000000);
    std::int64_t reps = or_default(ctx.cfg.reps, 2000);
    std::uint64_t s = ctx.stage("oracle", id);
    auto o = brownian_L2_oracle(m, reps, sigma, s, ctx.workers);
    ctx.report["oracle"] = {{"m", m}, {"reps", reps}, {"sigma", sigma}, {"mean", o.mean()}};
    return o;
}

void toy_constants(Ctx& ctx) { ctx.constants["Sigma_hat"] = 1.0; }

// ---------------------------------------------------------------- subcommands

void cmd_validate_table(Ctx& ctx, const BilliardTable& t) {
    TableReport r = validate_table(t, ctx.cfg.angle_grid);
    ctx.report["table"] = {{"max_flight", r.max_flight},
                           {"tau_max", t.tau_max()},
                           {"rays", r.rays},
                           {"min_clearance", r.min_clearance},
                           {"step_bound", t.step_bound()},
                           {"quotient_area", t.quotient_area()},
                           {"boundary_length", t.boundary_length()}};
    ctx.check("max_flight <= tau_max", r.max_flight <= t.tau_max(), r.max_flight,
              "<= " + format_double(t.tau_max()));
    ctx.add("max_flight", r.rays, ctx.seed, r.max_flight);
    ctx.add("min_clearance", r.rays, ctx.seed, r.min_clearance);
}

void cmd_constants(Ctx& ctx, const BilliardTable& t) {
    ConstantsReport c = constants_stage(ctx, t);
    double sigma = sigma_stage(ctx, t);
    double z_tau = std::abs(c.E_tau - c.E_tau_formula) / c.E_tau_se;
    ctx.check("E_tau matches pi area / perimeter", z_tau <= 3.0, z_tau, "<= 3 stderr");
    double comb = std::hypot(c.e_I_direct_se, c.e_I_kac_se);
    double z_e = std::abs(c.e_I_direct - c.e_I_kac) / comb;
    ctx.check("e_I direct equals 4 Gamma E_tau", z_e <= 3.0, z_e, "<= 3 combined stderr");
    double rel = c.e_I_direct_se / c.e_I_direct;
    ctx.check("e_I relative stderr", rel <= 0.015, rel, "<= 0.015");
    ctx.check("Sigma_hat positive and finite", sigma > 0 && std::isfinite(sigma), sigma, "> 0");
    std::int64_t np = or_default(ctx.cfg.n_pairs, 1000000);
    ctx.add("E_tau", np, ctx.stage_seeds["constants"], c.E_tau);
    ctx.add("e_I_direct", np, ctx.stage_seeds["constants"], c.e_I_direct);
    ctx.add("e_I_kac", np, ctx.stage_seeds["constants"], c.e_I_kac);
    ctx.add("e_I_prime", np, ctx.stage_seeds["constants"], c.e_I_prime);
    ctx.add("Sigma_hat", or_default(ctx.cfg.variance_n, 10000), ctx.stage_seeds["variance"], sigma);
}

void cmd_oracle(Ctx& ctx) {
    std::int64_t m = or_default(ctx.cfg.oracle_m, 1000000);
    std::int64_t reps = or_default(ctx.cfg.reps, 2000);
    const double sigmas[] = {0.25, 1.0, 4.0};
    double means[3];
    for (int k = 0; k < 3; ++k) {
        std::uint64_t s = ctx.stage("oracle_sigma_" + format_double(sigmas[k]), 20 + k);
        auto o = brownian_L2_oracle(m, reps, sigmas[k], s, ctx.workers);
        means[k] = o.mean();
        ctx.add_all("oracle_sigma_" + format_double(sigmas[k]), m, s, o.samples());
    }
    double target = brownian_L2_mean();
    ctx.report["oracle"] = {{"m", m}, {"reps", reps}, {"target_mean", target},
                            {"mean_sigma_0.25", means[0]}, {"mean_sigma_1", means[1]},
                            {"mean_sigma_4", means[2]}};
    ctx.check("oracle mean at sigma 1", std::abs(means[1] - target) <= 0.02, means[1],
              format_double(target) + " +- 0.02");
    double r4 = means[2] / (0.5 * means[1]) - 1.0;
    double r025 = means[0] / (2.0 * means[1]) - 1.0;
    ctx.check("sigma 4 mean is half of sigma 1", std::abs(r4) <= 0.03, r4, "|rel| <= 0.03");
    ctx.check("sigma 0.25 mean is twice sigma 1", std::abs(r025) <= 0.03, r025, "|rel| <= 0.03");
}

json grid_json(const Theorem2Report& r) {
    json g = json::array();
    for (const GridPoint& p : r.grid) g.push_back({{"n", p.n}, {"ks_distance", p.ks}, {"mean", p.mean}});
    return g;
}

void cmd_thm2(Ctx& ctx) {
    need_system(ctx, {"billiard", "toy1d"});
    Theorem2Report r;
    std::uint64_t s;
    if (ctx.cfg.system == "toy1d") {
        toy_constants(ctx);
        auto ns = n_grid_or(ctx.cfg, {1000, 10000, 100000});
        auto oracle = oracle_stage(ctx, 1.0, 3);
        s = ctx.stage("thm2", 4);
        r = theorem2_toy(ns, ctx.cfg.n_starts, oracle, s, ctx.workers);
        ctx.events += static_cast<double>(ns.back()) * static_cast<double>(ctx.cfg.n_starts);
        ctx.check("ks at largest n", r.grid.back().ks < 0.06, r.grid.back().ks, "< 0.06");
    } else {
        BilliardTable t = ctx.cfg.table();
        auto ns = n_grid_or(ctx.cfg, {1000, 3000, 10000});
        ConstantsReport c = constants_stage(ctx, t);
        double sigma = sigma_stage(ctx, t);
        auto oracle = oracle_stage(ctx, 1.0, 3);
        s = ctx.stage("thm2", 4);
        r = theorem2_check(t, ns, ctx.cfg.n_starts, oracle, c, sigma, s, ctx.workers);
        ctx.degenerate += r.resampled;
        ctx.events += static_cast<double>(ns.back()) * static_cast<double>(ctx.cfg.n_starts);
        ctx.check("first moment at largest n", r.first_moment_rel_err <= 0.10, r.first_moment_rel_err,
                  "<= 0.10");
    }
    ctx.report["grid"] = grid_json(r);
    ctx.report["monotone_trend"] = r.monotone_trend;
    ctx.report["scale"] = r.scale;
    ctx.report["oracle_mean_scaled"] = r.oracle_mean;
    ctx.check("ks decreasing across n grid", r.monotone_trend, r.grid.back().ks, "strictly decreasing");
    for (const GridPoint& p : r.grid) ctx.add_all("thm2", p.n, s, p.raw);
}

void cmd_thm1(Ctx& ctx) {
    need_system(ctx, {"billiard"});
    BilliardTable t = ctx.cfg.table();
    double horizon = ctx.cfg.t_grid.empty() ? 10000.0 : ctx.cfg.t_grid.back();
    ConstantsReport c = constants_stage(ctx, t);
    double sigma = sigma_stage(ctx, t);
    auto oracle = oracle_stage(ctx, 1.0, 3);
    std::uint64_t s = ctx.stage("thm1", 5);
    Theorem1Report r = theorem1_check(t, horizon, ctx.cfg.n_starts, oracle, c, sigma, s, ctx.workers);
    ctx.degenerate += r.resampled;
    ctx.events += horizon / c.E_tau * static_cast<double>(ctx.cfg.n_starts);
    ctx.constants["Sigma_tilde"] = r.sigma_tilde;
    ctx.report["thm1"] = {{"t", r.t},
                          {"n_starts", r.n_starts},
                          {"sandwich_pass_fraction", r.sandwich_pass_fraction},
                          {"mean_t_over_nt", r.mean_t_over_nt},
                          {"birkhoff_rel_err", r.birkhoff_rel_err},
                          {"mean_Nt", r.mean_Nt},
                          {"mean_nu", r.mean_nu},
                          {"mean_ratio", r.mean_ratio},
                          {"ratio_target", r.ratio_target},
                          {"ratio_rel_err", r.ratio_rel_err},
                          {"ks_distance", r.ks}};
    ctx.check("sandwich on every orbit", r.sandwich_pass_fraction == 1.0, r.sandwich_pass_fraction, "== 1");
    ctx.check("t / n_t near E_tau", r.birkhoff_rel_err <= 0.02, r.birkhoff_rel_err, "<= 0.02");
    ctx.check("mean ratio near E_tau^-3/2", r.ratio_rel_err <= 0.10, r.ratio_rel_err, "<= 0.10");
    ctx.add_all("thm1", static_cast<std::int64_t>(horizon), s, r.raw);
}

template <class State>
void strong_report(Ctx& ctx, const StrongReport& r, std::int64_t n, std::uint64_t s) {
    json laws = json::array();
    for (std::size_t l = 0; l < r.laws.size(); ++l) {
        laws.push_back({{"law", r.laws[l]}, {"ks_to_oracle", r.ks_to_oracle[l]}, {"mean", r.means[l]}});
        ctx.add_all("strong_" + r.laws[l], n, derive_seed(s, l), r.raw[l]);
    }
    ctx.report["laws"] = laws;
    ctx.report["max_pairwise_ks"] = r.max_pairwise_ks;
    ctx.check("pairwise ks across initial laws", r.max_pairwise_ks < 0.06, r.max_pairwise_ks, "< 0.06");
}

void cmd_strong(Ctx& ctx) {
    need_system(ctx, {"billiard", "toy1d"});
    if (ctx.cfg.system == "toy1d") {
        toy_constants(ctx);
        std::int64_t n = n_grid_or(ctx.cfg, {100000}).back();
        auto oracle = oracle_stage(ctx, 1.0, 3);
        std::uint64_t s = ctx.stage("strong", 6);
        auto stat = [n](Toy1::State& x) { return toy_occupation_stat(x, n); };
        StrongReport r = strong_convergence_check(toy_laws(), stat, ctx.cfg.n_starts, oracle, s, ctx.workers);
        ctx.events += 3.0 * static_cast<double>(n) * static_cast<double>(ctx.cfg.n_starts);
        strong_report<Toy1::State>(ctx, r, n, s);
        return;
    }
    BilliardTable t = ctx.cfg.table();
    std::int64_t n = n_grid_or(ctx.cfg, {3000}).back();
    ConstantsReport c = constants_stage(ctx, t);
    double sigma = sigma_stage(ctx, t);
    auto oracle = oracle_stage(ctx, 1.0, 3).scaled(c.c_discrete() / std::sqrt(sigma));
    std::uint64_t s = ctx.stage("strong", 6);

    std::vector<InitialLaw<CollisionState>> laws;
    laws.push_back({"mu_bar", [&t](std::mt19937_64& rng) { return sample_mu_bar(t, rng); }, true});
    laws.push_back({"mu_bar_disk0", [&t](std::mt19937_64& rng) {
                        for (;;) {
                            CollisionState x = sample_mu_bar(t, rng);
                            if (x.disk_id == 0) return x;
                        }
                    },
                    true});
    laws.push_back({"cos2_theta", [&t](std::mt19937_64& rng) {
                        // mu_bar reweighted by cos(theta): density proportional to cos^2
                        for (;;) {
                            CollisionState x = sample_mu_bar(t, rng);
                            if (uniform01(rng) <= std::cos(x.theta)) return x;
                        }
                    },
                    true});
    std::atomic<std::int64_t> degenerate{0};
    auto stat = [&](CollisionState& x) {
        for (int attempt = 1;; ++attempt) {
            try {
                auto arcs = orbit_arcs(t, x, n);
                auto nu = nu_prefix_counts(arcs, {n}, safe_cell_span(arcs, t.step_bound()));
                return 2.0 * static_cast<double>(nu[0]) / std::pow(static_cast<double>(n), 1.5);
            } catch (const TangentialHit&) {
            } catch (const OverlapDetected&) {
            }
            ++degenerate;
            x.s += 1e-9 * attempt;
        }
    };
    StrongReport r = strong_convergence_check(laws, stat, ctx.cfg.n_starts, oracle, s, ctx.workers);
    ctx.degenerate += degenerate.load();
    ctx.events += 3.0 * static_cast<double>(n) * static_cast<double>(ctx.cfg.n_starts);
    strong_report<CollisionState>(ctx, r, n, s);
}

json appendixA_json(const AppendixAReport& a) {
    return {{"dim", a.dim},
            {"t_grid", a.t_grid},
            {"E_I", a.E_I},
            {"partial_sums", a.partial_sums},
            {"max_orbit_gap", a.max_orbit_gap},
            {"mean_last", a.mean_last},
            {"rel_err_vs_E_I", a.rel_err_vs_E_I},
            {"max_last_dispersion", a.max_last_dispersion},
            {"stabilized", a.stabilized}};
}

void cmd_appendixA(Ctx& ctx) {
    need_system(ctx, {"toy3d"});
    std::vector<std::int64_t> tg;
    if (ctx.cfg.t_grid.empty()) {
        tg = {100000, 200000};
    } else {
        for (double v : ctx.cfg.t_grid) tg.push_back(static_cast<std::int64_t>(std::llround(v)));
    }
    if (tg.size() < 2) throw ValidationError("appendixA needs at least two entries in t_grid");
    std::uint64_t s3 = ctx.stage("appendixA_d3", 7);
    std::uint64_t s1 = ctx.stage("appendixA_d1", 8);
    AppendixAReport a3 = appendixA_check(3, tg, ctx.cfg.n_starts, s3, ctx.workers);
    AppendixAReport a1 = appendixA_check(1, tg, ctx.cfg.n_starts, s1, ctx.workers);
    ctx.events += 2.0 * static_cast<double>(tg.back()) * static_cast<double>(ctx.cfg.n_starts);
    ctx.constants["E_I"] = a3.E_I;
    ctx.report["d3"] = appendixA_json(a3);
    ctx.report["d1_control"] = appendixA_json(a1);
    ctx.check("d=3 N_t/t stabilizes", a3.stabilized, a3.max_orbit_gap, "per-orbit gap < 0.05");
    ctx.check("d=3 limit matches E(I)", a3.rel_err_vs_E_I <= 0.05, a3.rel_err_vs_E_I, "<= 0.05");
    ctx.check("d=1 control does not stabilize", !a1.stabilized, a1.max_orbit_gap, "per-orbit gap >= 0.05");
    std::size_t L = tg.size() - 1;
    for (std::size_t g = 0; g <= L; ++g) {
        std::vector<double> v3, v1;
        for (const auto& r : a3.ratio) v3.push_back(r[g]);
        for (const auto& r : a1.ratio) v1.push_back(r[g]);
        ctx.add_all("appendixA_d3", tg[g], s3, v3);
        ctx.add_all("appendixA_d1", tg[g], s1, v1);
    }
}

void cmd_appendixB(Ctx& ctx) {
    need_system(ctx, {"quotient-billiard", "billiard"});
    BilliardTable t = ctx.cfg.table();
    auto ns = n_grid_or(ctx.cfg, {2000, 4000});
    if (ns.size() < 2) throw ValidationError("appendixB needs at least two entries in n_grid");
    ConstantsReport c = constants_stage(ctx, t);
    std::uint64_t s = ctx.stage("appendixB", 9);
    AppendixBReport b = appendixB_check(t, ns, ctx.cfg.n_starts, c, s, ctx.workers);
    ctx.degenerate += b.resampled;
    ctx.events += static_cast<double>(ns.back()) * static_cast<double>(ctx.cfg.n_starts);
    ctx.report["appendixB"] = {{"n_grid", b.n_grid},
                               {"e_bar", b.e_bar},
                               {"e_bar_se", b.e_bar_se},
                               {"max_orbit_gap", b.max_orbit_gap},
                               {"mean_gap", b.mean_gap},
                               {"mean_last", b.mean_last},
                               {"rel_err", b.rel_err},
                               {"quotient_dominates", b.quotient_dominates}};
    ctx.check("per-orbit gap", b.max_orbit_gap < 0.05, b.max_orbit_gap, "< 0.05");
    ctx.check("limit matches direct e_bar", b.rel_err <= 0.05, b.rel_err, "<= 0.05");
    ctx.check("quotient count dominates cylinder count", b.quotient_dominates, b.quotient_dominates ? 1 : 0,
              "true");
    for (std::size_t g = 0; g < ns.size(); ++g) {
        std::vector<double> v;
        for (const auto& r : b.ratio) v.push_back(r[g]);
        ctx.add_all("appendixB", ns[g], s, v);
    }
}

json llt_json(const LltReport& r) {
    json pts = json::array();
    for (const LltPoint& p : r.points)
        pts.push_back({{"N", p.N}, {"count", p.count}, {"empirical", p.empirical}, {"predicted", p.predicted}});
    return {{"n", r.n},
            {"n_paths", r.n_paths},
            {"period", r.period},
            {"sigma", r.sigma},
            {"scaled_mass_at_zero", r.scaled_mass_at_zero},
            {"ratio_one_sd", r.ratio_one_sd},
            {"max_rel_dev", r.max_rel_dev},
            {"points", pts}};
}

void cmd_llt(Ctx& ctx) {
    need_system(ctx, {"billiard", "toy1d"});
    std::vector<std::int64_t> ns = n_grid_or(ctx.cfg, {10000});
    std::int64_t paths = or_default(ctx.cfg.reps, 2000);
    json pts = json::array();
    const double g0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const double g1 = std::exp(-0.5);
    for (std::size_t k = 0; k < ns.size(); ++k) {
        std::uint64_t s = ctx.stage("llt_" + std::to_string(ns[k]), 10 + 100 * k);
        std::mt19937_64 rng(s);
        LltReport r;
        int expected_period = 1;
        if (ctx.cfg.system == "toy1d") {
            toy_constants(ctx);
            r = llt_check(Toy1{}, ns[k], paths, rng);
            expected_period = 2;
        } else {
            r = llt_check(BilliardSystem(ctx.cfg.table()), ns[k], paths, rng);
        }
        ctx.events += static_cast<double>(ns[k]) * static_cast<double>(paths);
        pts.push_back(llt_json(r));
        std::string at = " at n=" + std::to_string(ns[k]);
        ctx.check("lattice period" + at, r.period == expected_period, r.period,
                  "== " + std::to_string(expected_period));
        double e0 = r.scaled_mass_at_zero / g0 - 1.0;
        ctx.check("mass at 0" + at, std::abs(e0) <= 0.05, e0, "|rel| <= 0.05");
        double e1 = r.ratio_one_sd / g1 - 1.0;
        ctx.check("ratio at one sd" + at, std::abs(e1) <= 0.07, e1, "|rel| <= 0.07");
        ctx.add("llt_mass_at_zero", ns[k], s, r.scaled_mass_at_zero);
        ctx.add("llt_ratio_one_sd", ns[k], s, r.ratio_one_sd);
    }
    ctx.report["llt"] = pts;
}

void cmd_localtime_props(Ctx& ctx) {
    need_system(ctx, {"toy1d"});
    toy_constants(ctx);
    auto ns = n_grid_or(ctx.cfg, {10000, 100000, 1000000});
    if (ns.size() < 2) throw ValidationError("localtime-props needs at least two entries in n_grid");
    std::int64_t paths = ctx.cfg.n_starts;
    std::uint64_t s = ctx.stage("localtime", 11);
    TplocReport r = moment_probes(ns, paths, s, ctx.workers);
    ctx.events += static_cast<double>(ns.back()) * static_cast<double>(paths);

    // (RW2) integrand on stored paths at the smallest n
    std::uint64_t s2 = ctx.stage("rw2", 12);
    std::int64_t n0 = ns.front();
    auto stored = parallel_map<WalkPath>(static_cast<std::size_t>(paths), ctx.workers, [&](std::size_t i) {
        Toy1 sys;
        auto x = Toy1::from_seed(derive_seed(s2, i));
        return birkhoff_path(sys, x, n0);
    });
    Rw2Report rw = rw2_condition_check(stored, {0.5, 1.0}, {0.5, 0.1}, 3.0);

    ctx.report["localtime"] = {{"ns", r.ns},
                               {"tploc", r.tploc},
                               {"tploc_decreasing", r.tploc_decreasing},
                               {"modulus", r.modulus},
                               {"modulus_ratio", r.modulus_ratio},
                               {"modulus_lin_ratio", r.modulus_lin_ratio},
                               {"sup_l2", r.sup_l2},
                               {"sup_ratio", r.sup_ratio},
                               {"median_square", r.median_square},
                               {"rw2_integrand", rw.integrand},
                               {"rw2_decreasing_in_delta", rw.decreasing_in_delta}};
    ctx.check("tploc decreasing in n", r.tploc_decreasing, r.tploc.back(), "strictly decreasing");
    ctx.check("modulus stable across n", r.modulus_ratio <= 1.5, r.modulus_ratio, "<= 1.5");
    double lin = std::max(r.modulus_lin_ratio, 1.0 / r.modulus_lin_ratio);
    ctx.check("modulus linear in |x-y|", lin <= 1.5, r.modulus_lin_ratio, "within factor 1.5 of 1");
    ctx.check("sup bounded across n", std::abs(r.sup_ratio - 1.0) <= 0.2, r.sup_ratio, "|ratio - 1| <= 0.2");
    ctx.check("rw2 integrand decreasing in delta", rw.decreasing_in_delta, rw.integrand.back().back(),
              "decreasing");
    for (std::size_t g = 0; g < ns.size(); ++g) {
        ctx.add("tploc", ns[g], s, r.tploc[g]);
        ctx.add("modulus", ns[g], s, r.modulus[g]);
        ctx.add("sup_l2", ns[g], s, r.sup_l2[g]);
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

BilliardTable RunConfig::table() const {
    if (!has_table) return default_table();
    return BilliardTable(disks, tau_max);
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    bool in_table = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw.substr(0, raw.find('#')));
        if (s.empty()) continue;
        auto err = [&](const std::string& m) { return ValidationError("line " + std::to_string(line) + ": " + m); };
        if (s == "[table]") {
            if (in_table) throw err("duplicate [table] section");
            in_table = true;
            c.has_table = true;
            continue;
        }
        if (s.front() == '[') throw err("unknown section " + s);
        auto eq = s.find('=');
        if (eq == std::string::npos) throw err("expected key = value");
        std::string key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
        if (in_table) {
            if (key == "tau_max") {
                c.tau_max = parse_num<double>(val, line);
            } else if (key == "disk") {
                auto parts = split_list(val);
                if (parts.size() != 3) throw err("disk needs cx, cy, r");
                Disk d;
                d.center = {parse_num<double>(parts[0], line), parse_num<double>(parts[1], line)};
                d.radius = parse_num<double>(parts[2], line);
                d.id = static_cast<int>(c.disks.size());
                c.disks.push_back(d);
            } else {
                throw err("unknown table key '" + key + "'");
            }
            continue;
        }
        if (key == "system") {
            if (!one_of(val, kSystems)) throw err("unknown system '" + val + "'");
            c.system = val;
        } else if (key == "seed") {
            c.seed = parse_num<std::uint64_t>(val, line);
            c.has_seed = true;
        } else if (key == "n_grid") {
            c.n_grid.clear();
            for (const auto& p : split_list(val)) c.n_grid.push_back(parse_count(p, line));
        } else if (key == "t_grid") {
            c.t_grid.clear();
            for (const auto& p : split_list(val)) c.t_grid.push_back(parse_num<double>(p, line));
        } else if (key == "n_starts") {
            c.n_starts = parse_count(val, line);
        } else if (key == "reps") {
            c.reps = parse_count(val, line);
        } else if (key == "initial_law") {
            if (!one_of(val, kLaws)) throw err("unknown initial_law '" + val + "'");
            c.initial_law = val;
        } else if (key == "output_dir") {
            c.output_dir = val;
        } else if (key == "n_pairs") {
            c.n_pairs = parse_count(val, line);
        } else if (key == "n_tau") {
            c.n_tau = parse_count(val, line);
        } else if (key == "oracle_m") {
            c.oracle_m = parse_count(val, line);
        } else if (key == "variance_n") {
            c.variance_n = parse_count(val, line);
        } else if (key == "variance_paths") {
            c.variance_paths = parse_count(val, line);
        } else if (key == "angle_grid") {
            c.angle_grid = static_cast<int>(parse_count(val, line));
        } else {
            throw err("unknown key '" + key + "'");
        }
    }
    if (c.has_table && c.disks.empty()) throw ValidationError("[table] has no disks");
    if (c.has_table && !(c.tau_max > 0)) throw ValidationError("[table] needs tau_max > 0");
    if (c.n_starts < 2) throw ValidationError("n_starts must be >= 2");
    check_increasing(c.n_grid, "n_grid");
    check_increasing(c.t_grid, "t_grid");
    if (c.initial_law == "mu_bar" && !is_billiard(c))
        throw ValidationError("initial_law mu_bar needs a billiard system");
    if (c.initial_law == "lebesgue" && is_billiard(c))
        throw ValidationError("initial_law lebesgue needs a toy system");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

int workers_from(const RunOptions& opt) {
    if (opt.workers > 0) return opt.workers;
    if (const char* env = std::getenv("ZXC_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    return resolve_workers(0);
}

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s = {"validate-table", "constants", "oracle", "thm2", "thm1", "strong",
                                               "appendixA", "appendixB", "llt", "localtime-props"};
    return s;
}

int run(const std::string& subcommand, const RunConfig& cfg_in, const RunOptions& opt) {
    RunConfig cfg = cfg_in;
    if (opt.seed) {
        cfg.seed = *opt.seed;
        cfg.has_seed = true;
    }
    std::filesystem::path out = opt.out ? std::filesystem::path(*opt.out) : std::filesystem::path(cfg.output_dir);
    std::filesystem::create_directories(out);
    std::filesystem::remove(out / "failed");

    Ctx ctx(cfg, subcommand, workers_from(opt), out);
    auto t0 = std::chrono::steady_clock::now();
    int status = 0;
    json failure;
    try {
        if (!one_of(subcommand, subcommands())) throw ValidationError("unknown subcommand '" + subcommand + "'");
        if (!cfg.has_seed) throw ValidationError("seed is required (config key or --seed)");
        if (is_billiard(cfg)) {
            BilliardTable t = cfg.table();
            cmd_validate_table(ctx, t);
            if (!ctx.assertions.back()["pass"].get<bool>()) throw HorizonViolation("table check failed", 0.0);
        }
        if (subcommand == "validate-table") {
            if (!is_billiard(cfg)) throw ValidationError("validate-table needs a billiard system");
        } else if (subcommand == "constants") {
            if (!is_billiard(cfg)) throw ValidationError("constants needs a billiard system");
            cmd_constants(ctx, cfg.table());
        } else if (subcommand == "oracle") {
            cmd_oracle(ctx);
        } else if (subcommand == "thm2") {
            cmd_thm2(ctx);
        } else if (subcommand == "thm1") {
            cmd_thm1(ctx);
        } else if (subcommand == "strong") {
            cmd_strong(ctx);
        } else if (subcommand == "appendixA") {
            cmd_appendixA(ctx);
        } else if (subcommand == "appendixB") {
            cmd_appendixB(ctx);
        } else if (subcommand == "llt") {
            cmd_llt(ctx);
        } else {
            cmd_localtime_props(ctx);
        }
        for (const auto& a : ctx.assertions)
            if (!a["pass"].get<bool>()) status = 1;
    } catch (const ValidationError& e) {
        status = 2;
        failure = {{"kind", e.kind()}, {"message", e.what()}};
    } catch (const OverlappingObstacles& e) {
        status = 2;
        failure = {{"kind", e.kind()}, {"message", e.what()}};
    } catch (const HorizonViolation& e) {
        status = 2;
        failure = {{"kind", e.kind()}, {"message", e.what()}};
    } catch (const Error& e) {
        status = 1;
        failure = {{"kind", e.kind()}, {"message", e.what()}};
    } catch (const std::exception& e) {
        status = 1;
        failure = {{"kind", "exception"}, {"message", e.what()}};
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double rate = ctx.events > 0 ? static_cast<double>(ctx.degenerate) / ctx.events : 0.0;
    json manifest;
    manifest["subcommand"] = subcommand;
    manifest["code_version"] = kCodeVersion;
    manifest["config"] = config_echo(cfg);
    manifest["master_seed"] = cfg.seed;
    manifest["stage_seeds"] = ctx.stage_seeds;
    manifest["workers"] = ctx.workers;
    manifest["wall_clock_seconds"] = wall;
    manifest["degenerate_events"] = ctx.degenerate;
    manifest["total_events"] = ctx.events;
    manifest["degenerate_rate"] = rate;
    manifest["degenerate_flagged"] = rate >= 1e-6;

    json report;
    report["subcommand"] = subcommand;
    report["status"] = status == 0 ? "pass" : (status == 1 ? "fail" : "invalid");
    report["constants"] = ctx.constants;
    report["assertions"] = ctx.assertions;
    for (auto it = ctx.report.begin(); it != ctx.report.end(); ++it) report[it.key()] = it.value();
    if (!failure.is_null()) report["error"] = failure;

    write_text(out / "manifest.json", manifest.dump(2) + "\n");
    write_text(out / "report.json", report.dump(2) + "\n");
    write_text(out / "samples.csv", samples_csv(ctx.samples));
    if (status != 0) {
        json rec = failure.is_null() ? json{{"kind", "assertion"}, {"message", "assertions failed"}} : failure;
        rec["exit_status"] = status;
        json failed = json::array();
        for (const auto& a : ctx.assertions)
            if (!a["pass"].get<bool>()) failed.push_back(a["name"]);
        rec["failed_assertions"] = failed;
        write_text(out / "failed", rec.dump(2) + "\n");
    }
    return status;
}

}  // namespace zxc
