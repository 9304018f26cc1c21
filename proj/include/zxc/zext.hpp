// Z^d-extensions over a probability preserving base.
//
// A base system exposes
//   State sample(rng)        draw from the invariant probability
//   Step  advance(State&)    return phi(x) and replace x by Tbar x
//   int   step_bound()       D with |phi| <= D componentwise
// and a static `dim`. Step is std::array<int, dim>.
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "zxc/billiard.hpp"

namespace zxc {

template <class S>
concept BaseSystem = requires(const S& s, typename S::State& x, std::mt19937_64& rng) {
    { s.sample(rng) } -> std::same_as<typename S::State>;
    { s.advance(x) } -> std::same_as<std::array<int, S::dim>>;
    { s.step_bound() } -> std::convertible_to<int>;
};

/// Symbolic doubling map: the binary digits of x are the steps.
/// d = 1 uses one digit per step, d = 3 three digits (one per coordinate).
/// A finite prefix of digits can be pinned; the tail is read from a private
/// generator, which is the exact itinerary of a Lebesgue point.
template <int D>
class DoublingToy {
    static_assert(D == 1 || D == 3);

public:
    static constexpr int dim = D;
    using Step = std::array<int, D>;

    struct State {
        std::uint64_t prefix = 0;  // pinned leading digits, most significant first
        int prefix_len = 0;
        std::uint64_t buf = 0;
        int buf_len = 0;
        std::mt19937_64 tail;

        bool operator==(const State&) const = default;

        int next_bit() {
            if (prefix_len > 0) {
                --prefix_len;
                return static_cast<int>((prefix >> prefix_len) & 1u);
            }
            if (buf_len == 0) {
                buf = tail();
                buf_len = 64;
            }
            --buf_len;
            return static_cast<int>((buf >> buf_len) & 1u);
        }
    };

    static State from_seed(std::uint64_t seed, std::uint64_t prefix = 0, int prefix_len = 0) {
        State s;
        s.prefix = prefix;
        s.prefix_len = prefix_len;
        s.tail.seed(seed);
        return s;
    }

    State sample(std::mt19937_64& rng) const { return from_seed(rng()); }

    Step advance(State& x) const {
        Step st;
        for (int c = 0; c < D; ++c) st[c] = x.next_bit() ? 1 : -1;
        return st;
    }

    int step_bound() const { return 1; }

    /// S_n for d = 1 by popcount over whole words.
    std::int64_t terminal_sum(State& x, std::int64_t n) const
        requires(D == 1)
    {
        std::int64_t s = 0;
        while (n > 0 && (x.prefix_len > 0 || x.buf_len > 0)) {
            s += x.next_bit() ? 1 : -1;
            --n;
        }
        for (; n >= 64; n -= 64) s += 2 * std::popcount(x.tail()) - 64;
        for (; n > 0; --n) s += x.next_bit() ? 1 : -1;
        return s;
    }
};

using Toy1 = DoublingToy<1>;
using Toy3 = DoublingToy<3>;

/// The billiard as a Z-extension of the quotient map.
class BilliardSystem {
public:
    static constexpr int dim = 1;
    using State = CollisionState;

    explicit BilliardSystem(BilliardTable t) : table_(std::move(t)) {}

    State sample(std::mt19937_64& rng) const { return sample_mu_bar(table_, rng); }

    std::array<int, 1> advance(State& x) const {
        MapStep st = billiard_map(table_, x);
        int phi = static_cast<int>(st.next.cell - x.cell);
        x = st.next;
        return {phi};
    }

    int step_bound() const { return table_.step_bound(); }
    const BilliardTable& table() const { return table_; }

private:
    BilliardTable table_;
};

/// phi identically zero; for degenerate-input tests.
struct ZeroSystem {
    static constexpr int dim = 1;
    struct State {
        bool operator==(const State&) const = default;
    };
    State sample(std::mt19937_64&) const { return {}; }
    std::array<int, 1> advance(State&) const { return {0}; }
    int step_bound() const { return 0; }
};

struct WalkPath {
    int dim = 1;
    std::int64_t n = 0;
    std::vector<std::int64_t> values;  // (n+1)*dim entries, S_0 = 0
    double variance_hint = 0.0;

    std::int64_t at(std::int64_t k, int c = 0) const { return values[k * dim + c]; }
    std::int64_t terminal(int c = 0) const { return at(n, c); }
};

/// Prefix sums of phi along the orbit of x0 (x0 is advanced in place).
template <BaseSystem S>
WalkPath birkhoff_path(const S& sys, typename S::State& x0, std::int64_t n) {
    require(n >= 1, "birkhoff_path: n must be >= 1");
    WalkPath p;
    p.dim = S::dim;
    p.n = n;
    p.values.assign(static_cast<std::size_t>((n + 1) * S::dim), 0);
    const int bound = sys.step_bound();
    for (std::int64_t k = 0; k < n; ++k) {
        auto st = sys.advance(x0);
        for (int c = 0; c < S::dim; ++c) {
            if (std::abs(st[c]) > bound)
                throw Error("step exceeds the declared bound D = " + std::to_string(bound));
            p.values[(k + 1) * S::dim + c] = p.values[k * S::dim + c] + st[c];
        }
    }
    return p;
}

/// Steps given explicitly; used for hand fixtures.
WalkPath path_from_steps(const std::vector<int>& steps);

struct VarianceEstimate {
    double sigma = 0.0;
    double stderr_ = 0.0;
    std::int64_t n_paths = 0;
};

/// Mean of S_n^2 / n over d = 1 paths of equal length.
VarianceEstimate variance_estimate(const std::vector<WalkPath>& paths);
/// Same from terminal values only.
VarianceEstimate variance_from_terminals(const std::vector<std::int64_t>& terminals,
                                         std::int64_t n);

struct LltPoint {
    std::int64_t N = 0;
    std::int64_t count = 0;
    double empirical = 0.0;  // P(S_n = N)
    double predicted = 0.0;  // period * gaussian density
};

struct LltReport {
    std::int64_t n = 0;
    std::int64_t n_paths = 0;
    int period = 1;
    double sigma = 0.0;
    std::vector<LltPoint> points;
    double max_rel_dev = 0.0;
    double scaled_mass_at_zero = 0.0;  // P(S_n = 0) sqrt(sigma n) / period
    double ratio_one_sd = 0.0;  // P(S_n = N1) / P(S_n = 0), N1 = first positive probe
};

/// Lattice period from the set of observed step values: gcd of their
/// pairwise differences (1 if only one value is seen).
int lattice_period(const std::vector<int>& observed_steps);

LltReport llt_from_terminals(const std::vector<std::int64_t>& terminals, std::int64_t n,
                             int period, std::int64_t residue, double sigma);

/// Sample S_n over n_paths independent starts and compare the mass function
/// with the lattice-corrected Gaussian at N in {0, +-floor(sqrt n), +-2 floor(sqrt n)}.
template <BaseSystem S>
    requires(S::dim == 1)
LltReport llt_check(const S& sys, std::int64_t n, std::int64_t n_paths, std::mt19937_64& rng) {
    require(n >= 1 && n_paths >= 2, "llt_check: need n >= 1 and >= 2 paths");
    std::vector<std::int64_t> term(static_cast<std::size_t>(n_paths));
    std::vector<int> seen;
    auto note = [&](int v) {
        if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
    };
    for (std::int64_t i = 0; i < n_paths; ++i) {
        auto x = sys.sample(rng);
        if constexpr (requires { sys.terminal_sum(x, n); }) {
            if (i == 0) {
                auto probe = x;
                for (int k = 0; k < 64; ++k) note(sys.advance(probe)[0]);
            }
            term[i] = sys.terminal_sum(x, n);
        } else {
            std::int64_t s = 0;
            for (std::int64_t k = 0; k < n; ++k) {
                int st = sys.advance(x)[0];
                note(st);
                s += st;
            }
            term[i] = s;
        }
    }
    int period = lattice_period(seen);
    std::int64_t residue = (static_cast<std::int64_t>(seen.empty() ? 0 : seen[0]) * n) % period;
    VarianceEstimate ve = variance_from_terminals(term, n);
    return llt_from_terminals(term, n, period, residue, ve.sigma);
}

/// Initial law on a system's state space. `absolutely_continuous` is the
/// caller's declaration; sampling is also checked for atoms.
template <class State>
struct InitialLaw {
    std::string name;
    std::function<State(std::mt19937_64&)> draw;
    bool absolutely_continuous = true;
};

/// Throws ContractError if the law is declared singular or shows an atom
/// (two equal states among `probes` draws).
template <class State>
void validate_law(const InitialLaw<State>& law, std::mt19937_64& rng, int probes = 16) {
    if (!law.absolutely_continuous)
        throw ContractError("initial law '" + law.name + "' is not absolutely continuous");
    if constexpr (std::equality_comparable<State>) {
        std::vector<State> xs;
        for (int i = 0; i < probes; ++i) {
            State s = law.draw(rng);
            for (const State& o : xs)
                if (o == s) throw ContractError("initial law '" + law.name + "' has an atom");
            xs.push_back(s);
        }
    }
}

/// Toy laws: Lebesgue, uniform on [0,1/2), density 2x on [0,1).
std::vector<InitialLaw<Toy1::State>> toy_laws();
/// A point mass; validate_law rejects it.
InitialLaw<Toy1::State> toy_point_mass(std::uint64_t seed);

}  // namespace zxc
