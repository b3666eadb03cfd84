#pragma once

// Exact engines used to certify closed forms and bounds: a pattern-counting
// automaton with a forward DP over (state, count), brute-force enumeration of
// trial strings, and exact conditional laws of W.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "psdstein/error.hpp"
#include "psdstein/pmf.hpp"
#include "psdstein/sequence.hpp"

namespace psdstein::oracle {

// Deterministic complete automaton counting (possibly overlapping)
// occurrences of a binary pattern. State s means "the longest suffix read so
// far that is a prefix of the pattern has length s"; reaching the full
// length emits a count and falls back along the failure function.
class RunAutomaton {
public:
    explicit RunAutomaton(std::vector<int> pattern) : pattern_(std::move(pattern)) {
        if (pattern_.empty()) throw PreconditionError("RunAutomaton: empty pattern");
        for (int c : pattern_)
            if (c != 0 && c != 1) throw PreconditionError("RunAutomaton: pattern must be binary");
        const std::size_t L = pattern_.size();
        // KMP failure function: fail_[q] = length of the longest proper border of pattern[0..q].
        fail_.assign(L, 0);
        for (std::size_t q = 1, k = 0; q < L; ++q) {
            while (k > 0 && pattern_[k] != pattern_[q]) k = fail_[k - 1];
            if (pattern_[k] == pattern_[q]) ++k;
            fail_[q] = k;
        }
        next_.assign(L, {0, 0});
        emit_.assign(L, {0, 0});
        for (std::size_t s = 0; s < L; ++s) {
            for (int c = 0; c < 2; ++c) {
                std::size_t t = s;
                while (t > 0 && pattern_[t] != c) t = fail_[t - 1];
                if (pattern_[t] == c) ++t;
                if (t == L) {
                    emit_[s][c] = 1;
                    t = fail_[L - 1];
                }
                next_[s][c] = t;
            }
        }
    }

    // Occurrences of 1 1: overlapping success pairs.
    static RunAutomaton two_runs() { return RunAutomaton({1, 1}); }

    // Occurrences of k1 failures followed by k2 successes.
    static RunAutomaton k1k2_runs(std::size_t k1, std::size_t k2) {
        std::vector<int> pat(k1, 0);
        pat.insert(pat.end(), k2, 1);
        return RunAutomaton(std::move(pat));
    }

    std::size_t state_count() const noexcept { return next_.size(); }
    std::size_t next(std::size_t s, int c) const { return next_[s][static_cast<std::size_t>(c)]; }
    int emits(std::size_t s, int c) const { return emit_[s][static_cast<std::size_t>(c)]; }
    const std::vector<int>& pattern() const noexcept { return pattern_; }

    int count(std::span<const int> bits) const {
        std::size_t s = 0;
        int total = 0;
        for (int c : bits) {
            total += emits(s, c);
            s = next(s, c);
        }
        return total;
    }

private:
    std::vector<int> pattern_;
    std::vector<std::size_t> fail_;
    std::vector<std::array<std::size_t, 2>> next_;
    std::vector<std::array<int, 2>> emit_;
};

// Occurrences of `pattern` in `bits` by checking every start position.
inline int direct_count(std::span<const int> bits, std::span<const int> pattern) {
    if (pattern.size() > bits.size()) return 0;
    int total = 0;
    for (std::size_t s = 0; s + pattern.size() <= bits.size(); ++s)
        if (std::equal(pattern.begin(), pattern.end(), bits.begin() + static_cast<std::ptrdiff_t>(s))) ++total;
    return total;
}

// Exact law of the occurrence count under independent trials with success
// probabilities p, by forward DP over (automaton state, count). Index k of the
// result is P(count = k); length is trials + 1.
template <typename T>
std::vector<T> dp_distribution(const RunAutomaton& automaton, std::span<const T> p) {
    const std::size_t S = automaton.state_count();
    const std::size_t N = p.size();
    // dist[s * (N + 1) + c]
    std::vector<T> dist(S * (N + 1), T(0));
    std::vector<T> next(S * (N + 1), T(0));
    dist[0] = T(1);
    for (std::size_t t = 0; t < N; ++t) {
        std::fill(next.begin(), next.end(), T(0));
        const T pr[2] = {T(1) - p[t], p[t]};
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t c = 0; c <= t; ++c) {
                const T& m = dist[s * (N + 1) + c];
                if (m == T(0)) continue;
                for (int bit = 0; bit < 2; ++bit) {
                    if (pr[bit] == T(0)) continue;
                    const std::size_t s2 = automaton.next(s, bit);
                    const std::size_t c2 = c + static_cast<std::size_t>(automaton.emits(s, bit));
                    next[s2 * (N + 1) + c2] += m * pr[bit];
                }
            }
        }
        std::swap(dist, next);
    }
    std::vector<T> out(N + 1, T(0));
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t c = 0; c <= N; ++c) out[c] += dist[s * (N + 1) + c];
    return out;
}

inline PMFTable dp_distribution(const RunAutomaton& automaton, std::span<const double> p) {
    return make_pmf(dp_distribution<double>(automaton, p));
}

inline constexpr std::size_t brute_force_max_trials = 24;

// Exact law of the occurrence count by visiting every trial string.
template <typename T>
std::vector<T> brute_force_distribution(std::span<const T> p, std::span<const int> pattern) {
    const std::size_t N = p.size();
    if (N > brute_force_max_trials)
        throw TooLargeError("brute_force_distribution: more than 24 trials");
    std::vector<T> out(N + 1, T(0));
    std::vector<int> bits(N, 0);
    auto rec = [&](auto&& self, std::size_t t, const T& prob) -> void {
        if (t == N) {
            out[static_cast<std::size_t>(direct_count(bits, pattern))] += prob;
            return;
        }
        const T q = T(1) - p[t];
        if (q != T(0)) {
            bits[t] = 0;
            self(self, t + 1, prob * q);
        }
        if (p[t] != T(0)) {
            bits[t] = 1;
            self(self, t + 1, prob * p[t]);
        }
    };
    rec(rec, 0, T(1));
    return out;
}

inline PMFTable brute_force_distribution(std::span<const double> p, std::span<const int> pattern) {
    return make_pmf(brute_force_distribution<double>(p, pattern));
}

// ---------------------------------------------------------------------------
// Conditional laws of W.

enum class Conditioning { n2, n1_n2, even, odd };

// For each attainable value of the conditioning statistic, D of the
// conditional law of W. Keys: {X_{N(i,2)}}, {X_{N(i,1)}, X_{N(i,2)}}, or the
// full vector of even- / odd-indexed summands (1-based parity, so "even"
// means X_2, X_4, ... i.e. 0-based indices 1, 3, ...).
inline std::map<std::vector<int>, double> exact_conditional_D(const DependentSequence& seq, std::size_t i,
                                                              Conditioning how,
                                                              std::uint64_t max_outcomes = default_max_outcomes) {
    require_enumerable(seq, max_outcomes, "exact_conditional_D");
    if (i >= seq.n) throw PreconditionError("exact_conditional_D: index out of range");
    const auto n1 = neighborhood_sum(seq, i, 1);
    const auto n2 = neighborhood_sum(seq, i, 2);
    std::map<std::vector<int>, std::vector<double>> laws;
    seq.enumerate([&](std::span<const int> x, double p) {
        std::vector<int> key;
        switch (how) {
        case Conditioning::n2: key = {n2(x)}; break;
        case Conditioning::n1_n2: key = {n1(x), n2(x)}; break;
        case Conditioning::even:
            for (std::size_t j = 1; j < x.size(); j += 2) key.push_back(x[j]);
            break;
        case Conditioning::odd:
            for (std::size_t j = 0; j < x.size(); j += 2) key.push_back(x[j]);
            break;
        }
        int w = 0;
        for (int v : x) w += v;
        auto& law = laws[key];
        if (law.size() <= static_cast<std::size_t>(w)) law.resize(static_cast<std::size_t>(w) + 1, 0.0);
        law[static_cast<std::size_t>(w)] += p;
    });
    std::map<std::vector<int>, double> out;
    for (const auto& [key, law] : laws) {
        double total = 0.0;
        for (double v : law) total += v;
        if (total > 0.0) out[key] = d_statistic_weights(law);
    }
    return out;
}

namespace detail {

struct CellLaw {
    double mass = 0.0;
    double xi_mass = 0.0;  // E[X_i ; cell]
    std::vector<double> w;
    void add(int xi, int wv, double p) {
        mass += p;
        xi_mass += xi * p;
        if (w.size() <= static_cast<std::size_t>(wv)) w.resize(static_cast<std::size_t>(wv) + 1, 0.0);
        w[static_cast<std::size_t>(wv)] += p;
    }
};

struct ConditionalCells {
    std::vector<std::map<std::pair<int, int>, CellLaw>> by_n1_n2;
    std::vector<std::map<int, CellLaw>> by_n2;
};

inline ConditionalCells conditional_cells(const DependentSequence& seq, std::uint64_t max_outcomes) {
    require_enumerable(seq, max_outcomes, "conditional_cells");
    ConditionalCells cells;
    cells.by_n1_n2.resize(seq.n);
    cells.by_n2.resize(seq.n);
    std::vector<int> prefix(seq.n + 1);
    seq.enumerate([&](std::span<const int> x, double p) {
        prefix[0] = 0;
        for (std::size_t j = 0; j < seq.n; ++j) prefix[j + 1] = prefix[j] + x[j];
        const int w = prefix[seq.n];
        for (std::size_t i = 0; i < seq.n; ++i) {
            auto win = [&](std::size_t l) {
                const std::size_t lo = i >= l ? i - l : 0;
                const std::size_t hi = std::min(seq.n, i + l + 1);
                return prefix[hi] - prefix[lo];
            };
            const int a = win(1);
            const int b = win(2);
            cells.by_n1_n2[i][{a, b}].add(x[i], w, p);
            cells.by_n2[i][b].add(x[i], w, p);
        }
    });
    return cells;
}

} // namespace detail

// The D-weighted moment terms of the Stein bound, computed exactly.
inline ConditionalTerms exact_conditional_terms(const DependentSequence& seq,
                                                std::uint64_t max_outcomes = default_max_outcomes) {
    const auto cells = detail::conditional_cells(seq, max_outcomes);
    ConditionalTerms t;
    t.bracket_d.assign(seq.n, 0.0);
    t.cross_bracket_d.assign(seq.n, 0.0);
    t.linear_d.assign(seq.n, 0.0);
    for (std::size_t i = 0; i < seq.n; ++i) {
        for (const auto& [key, cell] : cells.by_n1_n2[i]) {
            if (cell.mass <= 0.0) continue;
            const auto [a, b] = key;
            const double weight = static_cast<double>(a) * (2.0 * b - a - 1.0);
            if (weight == 0.0) continue;
            const double D = d_statistic_weights(cell.w);
            t.bracket_d[i] += cell.mass * weight * D;
            t.cross_bracket_d[i] += cell.xi_mass * weight * D;
        }
        for (const auto& [b, cell] : cells.by_n2[i]) {
            if (cell.xi_mass <= 0.0) continue;
            t.linear_d[i] += cell.xi_mass * (b - 1.0) * d_statistic_weights(cell.w);
        }
    }
    return t;
}

// Per-index max of D(W | X_{N(i,2)}) and D(W | X_{N(i,1)}, X_{N(i,2)}) over
// attainable conditioning values: the tightest constant c_i that dominates
// every conditional D entering the bound.
inline std::vector<double> exact_smoothing_constants(const DependentSequence& seq,
                                                     std::uint64_t max_outcomes = default_max_outcomes) {
    const auto cells = detail::conditional_cells(seq, max_outcomes);
    std::vector<double> c(seq.n, 0.0);
    for (std::size_t i = 0; i < seq.n; ++i) {
        for (const auto& [key, cell] : cells.by_n1_n2[i])
            if (cell.mass > 0.0) c[i] = std::max(c[i], d_statistic_weights(cell.w));
        for (const auto& [key, cell] : cells.by_n2[i])
            if (cell.mass > 0.0) c[i] = std::max(c[i], d_statistic_weights(cell.w));
    }
    return c;
}

// Ground-truth moments by direct expectation over the joint law.
inline MomentSet moment_oracle(const DependentSequence& seq, std::uint64_t max_outcomes = default_max_outcomes) {
    return enumerate_moments(seq, max_outcomes);
}

} // namespace psdstein::oracle
