#pragma once

// Overlapping 2-runs and (k1,k2)-runs: closed-form moments, smoothing
// constants, moment-matched targets and the resulting bounds.
//
// Indices are 0-based. For 2-runs, summand i is X_i = eta_i eta_{i+1} over
// n + 1 trials. For (k1,k2)-runs with m = k1 + k2 - 1 there are (n+1)m trials,
// Y_l = 1 when trials l..l+m read 0^{k1} 1^{k2}, and X_i sums Y over the block
// l in [im, (i+1)m).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "psdstein/bound.hpp"
#include "psdstein/error.hpp"
#include "psdstein/psd.hpp"
#include "psdstein/sequence.hpp"

namespace psdstein {

// ---------------------------------------------------------------------------
// Moments of 1-dependent Bernoulli summands.
//
// For 0/1-valued 1-dependent X, every product moment entering the bounds
// factorizes over maximal runs of consecutive indices, so three sequences
// determine them all:
//   single[j] = E X_j, pair[j] = E X_j X_{j+1}, triple[j] = E X_j X_{j+1} X_{j+2}.

struct ChainMoments {
    std::vector<double> single;
    std::vector<double> pair;    // length n, zero where j + 1 >= n
    std::vector<double> triple;  // length n, zero where j + 2 >= n

    std::size_t n() const noexcept { return single.size(); }
    double A(std::ptrdiff_t j) const { return in(j, 0) ? single[static_cast<std::size_t>(j)] : 0.0; }
    double P(std::ptrdiff_t j) const { return in(j, 1) ? pair[static_cast<std::size_t>(j)] : 0.0; }
    double T(std::ptrdiff_t j) const { return in(j, 2) ? triple[static_cast<std::size_t>(j)] : 0.0; }

private:
    bool in(std::ptrdiff_t j, std::ptrdiff_t span) const {
        return j >= 0 && j + span < static_cast<std::ptrdiff_t>(single.size());
    }
};

struct ChainBars {
    double abar1 = 0.0;  // E[X_N1 (2 X_N2 - X_N1 - 1)]
    double abar2 = 0.0;  // E[X_i X_N1 (2 X_N2 - X_N1 - 1)]
    double abar3 = 0.0;  // E[X_i (X_N2 - 1)]
};

inline ChainBars chain_bars(const ChainMoments& c, std::size_t i_) {
    const auto i = static_cast<std::ptrdiff_t>(i_);
    ChainBars b;
    double s = 0.0;
    for (std::ptrdiff_t j = i - 2; j <= i + 1; ++j) s += c.P(j);
    b.abar1 = 2.0 * s + 2.0 * (c.A(i - 1) * c.A(i + 1) + c.A(i - 2) * (c.A(i) + c.A(i + 1)) +
                               c.A(i + 2) * (c.A(i - 1) + c.A(i)));
    double t = 0.0;
    for (std::ptrdiff_t j = i - 2; j <= i; ++j) t += c.T(j);
    b.abar2 = 2.0 * c.A(i) * (c.A(i - 2) + c.A(i + 2)) + 2.0 * c.P(i - 1) * (1.0 + c.A(i + 2)) +
              2.0 * c.P(i) * (1.0 + c.A(i - 2)) + 2.0 * t;
    b.abar3 = c.A(i) * (c.A(i - 2) + c.A(i + 2)) + c.P(i - 1) + c.P(i);
    return b;
}

inline MomentSet chain_moment_set(const ChainMoments& c) {
    MomentSet m;
    m.at.resize(c.n());
    for (std::size_t i = 0; i < c.n(); ++i) {
        const auto s = static_cast<std::ptrdiff_t>(i);
        const auto bars = chain_bars(c, i);
        auto& v = m.at[i];
        v.mean = c.A(s);
        v.mean_n1 = c.A(s - 1) + c.A(s) + c.A(s + 1);
        v.cross_n1 = c.A(s) + c.P(s - 1) + c.P(s);
        v.bracket = bars.abar1;
        v.cross_bracket = bars.abar2;
        v.linear = bars.abar3;
    }
    m.mean_w = m.sum_means();
    m.var_w = m.variance_from_neighborhoods();
    return m;
}

namespace detail {

// Summand values from an explicit trial vector.
using BitsMap = std::function<void(std::span<const int>, std::span<int>)>;

inline DependentSequence bits_sequence(std::size_t n, const std::vector<double>& probs, BitsMap f, std::size_t radius,
                                       std::string label, std::function<MomentSet()> closed) {
    DependentSequence seq;
    if (probs.size() <= 62) {
        const std::size_t T = probs.size();
        seq = trial_sequence(
            n, probs,
            [f, T](std::uint64_t mask, std::span<int> x) {
                std::vector<int> bits(T);
                for (std::size_t t = 0; t < T; ++t) bits[t] = static_cast<int>((mask >> t) & 1U);
                f(bits, x);
            },
            radius, std::move(label));
    } else {
        seq.n = n;
        seq.dependence_radius = radius;
        seq.outcome_count = UINT64_MAX;
        seq.label = std::move(label);
        seq.sample = [n, probs, f](std::mt19937_64& rng) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::vector<int> bits(probs.size());
            for (std::size_t t = 0; t < probs.size(); ++t) bits[t] = u(rng) < probs[t] ? 1 : 0;
            std::vector<int> x(n, 0);
            f(bits, x);
            return x;
        };
    }
    seq.closed_form_moments = std::move(closed);
    return seq;
}

inline void require_probabilities(std::span<const double> p, const char* who) {
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError(std::string(who) + ": probabilities must lie in [0, 1]");
}

} // namespace detail

// ---------------------------------------------------------------------------
// 2-runs.

struct TwoRunsModel {
    std::vector<double> p;  // n + 1 trial probabilities

    std::size_t n() const noexcept { return p.empty() ? 0 : p.size() - 1; }

    static TwoRunsModel iid(std::size_t n, double prob) { return TwoRunsModel{std::vector<double>(n + 1, prob)}; }

    void validate() const {
        if (p.size() < 2) throw PreconditionError("two-runs model needs at least two trials");
        detail::require_probabilities(p, "two-runs model");
    }

    // Bound validity assumes every p_i <= 1/2.
    bool within_half() const {
        return std::all_of(p.begin(), p.end(), [](double v) { return v <= 0.5; });
    }
};

struct TwoRunsTerms {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0;
    double abar1 = 0.0, abar2 = 0.0, abar3 = 0.0;
};

inline ChainMoments two_runs_chain(const TwoRunsModel& m) {
    m.validate();
    const std::size_t n = m.n();
    ChainMoments c;
    c.single.assign(n, 0.0);
    c.pair.assign(n, 0.0);
    c.triple.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        c.single[j] = m.p[j] * m.p[j + 1];
        if (j + 1 < n) c.pair[j] = c.single[j] * m.p[j + 2];
        if (j + 2 < n) c.triple[j] = c.pair[j] * m.p[j + 3];
    }
    return c;
}

inline TwoRunsTerms two_runs_moments(const TwoRunsModel& m, std::size_t i) {
    if (i >= m.n()) throw PreconditionError("two_runs_moments: index out of range");
    const auto c = two_runs_chain(m);
    const auto s = static_cast<std::ptrdiff_t>(i);
    const auto b = chain_bars(c, i);
    return {c.A(s), c.P(s), c.T(s), b.abar1, b.abar2, b.abar3};
}

inline MomentSet two_runs_moment_set(const TwoRunsModel& m) { return chain_moment_set(two_runs_chain(m)); }

inline DependentSequence two_runs_sequence(const TwoRunsModel& m) {
    m.validate();
    const std::size_t n = m.n();
    return detail::bits_sequence(
        n, m.p,
        [n](std::span<const int> bits, std::span<int> x) {
            for (std::size_t i = 0; i < n; ++i) x[i] = bits[i] & bits[i + 1];
        },
        1, "two-runs", [m] { return two_runs_moment_set(m); });
}

// Exact Var(R_n) for iid trials.
inline double two_runs_variance_iid(std::size_t n, double p) {
    const double nn = static_cast<double>(n);
    return nn * p * p * (1.0 - p * p) + 2.0 * (nn - 1.0) * (p * p * p - p * p * p * p);
}

// c-bar(n) = 4 min{(m* - 3)^{-1/2}, (floor(n/2) - 3)^{-1/2}}.
inline double two_runs_cbar(std::size_t n) {
    if (n < 8) throw PreconditionError("c-bar(n) requires n >= 8 (got n = " + std::to_string(n) + ")");
    const double ms = static_cast<double>(m_star(n)) - 3.0;
    const double half = static_cast<double>(n / 2) - 3.0;
    return 4.0 * std::min(1.0 / std::sqrt(ms), 1.0 / std::sqrt(half));
}

inline SmoothingEstimate two_runs_smoothing(std::size_t n) {
    return SmoothingEstimate::uniform(n, two_runs_cbar(n), SmoothingMethod::model_closed_form);
}

struct RunsBoundReport : BoundReport {
    // Per index: {a1, a2, a3, abar1, abar2, abar3} for 2-runs,
    // {a*, pair*, triple*, a1*, a2*, a3*} for (k1,k2)-runs.
    std::vector<std::array<double, 6>> moment_terms;
    std::optional<double> c_constant;
    std::optional<double> brown_xia;
};

// ---------------------------------------------------------------------------
// Target fitting.

inline PanjerPSD fit_poisson(double mean) {
    if (!(mean > 0.0)) throw UnfittableError("Poisson fit needs a positive mean");
    return poisson(mean);
}

// NB(alpha, pbar) with matching mean and variance: pbar = E/Var.
inline PanjerPSD fit_negative_binomial(double mean, double var) {
    if (!(mean > 0.0)) throw UnfittableError("negative binomial fit needs a positive mean");
    if (!(var > mean))
        throw UnfittableError("negative binomial fit needs Var > E (got E = " + std::to_string(mean) +
                              ", Var = " + std::to_string(var) + ")");
    const double pbar = mean / var;
    const double alpha = mean * pbar / (1.0 - pbar);
    return negative_binomial(alpha, pbar);
}

inline PanjerPSD nb_moment_match_2runs(std::size_t n, double p) {
    if (!(p > 0.0 && p <= 0.5)) throw PreconditionError("nb_moment_match_2runs requires 0 < p <= 1/2");
    if (n == 0) throw PreconditionError("nb_moment_match_2runs requires n >= 1");
    return fit_negative_binomial(static_cast<double>(n) * p * p, two_runs_variance_iid(n, p));
}

// ---------------------------------------------------------------------------
// 2-runs bounds.

inline RunsBoundReport two_runs_bound(const TwoRunsModel& model, const PanjerPSD& spec, double delta_g,
                                      const BoundOptions& opt = {}) {
    model.validate();
    const std::size_t n = model.n();
    const double cbar = two_runs_cbar(n);
    if (!model.within_half()) throw PreconditionError("the 2-runs bound requires every p_i <= 1/2");
    const auto c = two_runs_chain(model);
    const auto moments = chain_moment_set(c);
    BoundOptions o = opt;
    o.enforce_min_n = false;
    RunsBoundReport r;
    static_cast<BoundReport&>(r) = bound_d1(moments, two_runs_smoothing(n), spec, delta_g, o);
    r.c_constant = cbar;
    for (std::size_t i = 0; i < n; ++i) {
        const auto t = two_runs_moments(model, i);
        r.moment_terms.push_back({t.a1, t.a2, t.a3, t.abar1, t.abar2, t.abar3});
    }
    return r;
}

// Smoothing constant of the closed-form NB bound: 4 (floor(n/2) - 3)^{-1/2}.
// Equals c-bar(n) for even n and is the larger of the two candidates for odd
// n; the tabulated comparison values are computed with it.
inline double closed_form_smoothing(std::size_t n) {
    if (n < 8) throw PreconditionError("the closed-form bound requires n >= 8 (got n = " + std::to_string(n) + ")");
    return 4.0 / std::sqrt(static_cast<double>(n / 2) - 3.0);
}

// (4p / sqrt(floor(n/2) - 3)) [4 + 11p + 4p^2 - p^3] for iid trials.
inline double nb_bound_closed_form(std::size_t n, double p) {
    const double c = closed_form_smoothing(n);
    if (!(p >= 0.0 && p <= 0.5)) throw PreconditionError("the closed-form bound requires 0 <= p <= 1/2");
    return c * p * (4.0 + 11.0 * p + 4.0 * p * p - p * p * p);
}

// Same value itemized as delta_g * (quadratic + linear) with the asymptotic
// fit pbar = 1 / (1 + 2p - 3p^2).
inline RunsBoundReport nb_bound_closed_form_report(std::size_t n, double p) {
    RunsBoundReport r;
    r.variant = BoundVariant::closed_form;
    r.n = n;
    r.total = nb_bound_closed_form(n, p);
    const double cbar = closed_form_smoothing(n);
    r.c_constant = cbar;
    r.smoothing.assign(n, cbar);
    const double nn = static_cast<double>(n);
    r.sum_means = nn * p * p;
    if (p == 0.0) return r;
    const double pbar = 1.0 / (1.0 + 2.0 * p - 3.0 * p * p);
    const double p2 = p * p, p3 = p2 * p, p4 = p3 * p, p5 = p4 * p, p6 = p5 * p;
    r.one_minus_b_abs = pbar;
    r.delta_g_factor = 1.0 / (nn * p2 * pbar);
    r.term_quadratic = nn * cbar * 0.5 * pbar * (4.0 * p3 + 10.0 * p4 + 12.0 * p5 + 10.0 * p6);
    r.term_linear = nn * cbar * 2.0 * (p3 + p4);
    r.term_tau = 0.0;
    return r;
}

// 32.2 p / sqrt((n - 1)(1 - p)^3).
inline double brown_xia_bound(std::size_t n, double p) {
    if (n < 2) throw PreconditionError("the Brown-Xia bound requires n >= 2");
    if (!(p >= 0.0 && p < 2.0 / 3.0)) throw PreconditionError("the Brown-Xia bound requires 0 <= p < 2/3");
    return 32.2 * p / std::sqrt((static_cast<double>(n) - 1.0) * std::pow(1.0 - p, 3));
}

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

struct Table1Row {
    std::size_t n = 0;
    double p = 0.0;
    double closed_form = 0.0;
    double brown_xia = 0.0;
    const char* expected_closed_form = "";
    const char* expected_brown_xia = "";

    bool matches() const {
        return fixed6(closed_form) == expected_closed_form && fixed6(brown_xia) == expected_brown_xia;
    }
};

struct Table1Cell {
    std::size_t n;
    double p;
    const char* closed_form;
    const char* brown_xia;
};

inline constexpr std::array<Table1Cell, 18> table1_expected{{
    {20, 0.05, "0.344694", "0.398900"}, {20, 0.07, "0.506847", "0.576571"}, {20, 0.09, "0.683285", "0.765878"},
    {25, 0.05, "0.303992", "0.354924"}, {25, 0.07, "0.446997", "0.513008"}, {25, 0.09, "0.602601", "0.681445"},
    {30, 0.05, "0.263265", "0.322880"}, {30, 0.07, "0.387111", "0.466692"}, {30, 0.09, "0.521867", "0.619922"},
    {35, 0.11, "0.618205", "0.723476"}, {35, 0.13, "0.763728", "0.884669"}, {35, 0.15, "0.919907", "1.057010"},
    {40, 0.11, "0.561012", "0.675509"}, {40, 0.13, "0.693072", "0.826015"}, {40, 0.15, "0.834802", "0.986930"},
    {50, 0.11, "0.493157", "0.602650"}, {50, 0.13, "0.609244", "0.736923"}, {50, 0.15, "0.733832", "0.880482"},
}};

inline std::vector<Table1Row> table1() {
    std::vector<Table1Row> rows;
    rows.reserve(table1_expected.size());
    for (const auto& c : table1_expected)
        rows.push_back({c.n, c.p, nb_bound_closed_form(c.n, c.p), brown_xia_bound(c.n, c.p), c.closed_form,
                        c.brown_xia});
    return rows;
}

// ---------------------------------------------------------------------------
// (k1,k2)-runs.

struct K1K2Model {
    std::size_t k1 = 1;
    std::size_t k2 = 1;
    std::size_t n = 0;
    std::vector<double> p;  // (n + 1) m trial probabilities

    std::size_t m() const noexcept { return k1 + k2 - 1; }

    static K1K2Model iid(std::size_t k1, std::size_t k2, std::size_t n, double prob) {
        K1K2Model mod{k1, k2, n, {}};
        mod.p.assign((n + 1) * mod.m(), prob);
        return mod;
    }

    void validate() const {
        if (k1 < 1 || k2 < 1) throw PreconditionError("(k1,k2)-runs need k1, k2 >= 1");
        if (n < 1) throw PreconditionError("(k1,k2)-runs need n >= 1");
        if (p.size() != (n + 1) * m())
            throw PreconditionError("(k1,k2)-runs need (n+1)(k1+k2-1) = " + std::to_string((n + 1) * m()) +
                                    " trial probabilities (got " + std::to_string(p.size()) + ")");
        detail::require_probabilities(p, "(k1,k2)-runs model");
    }

    // a(l) = P(Y_l = 1) for l in [0, nm).
    double a(std::size_t l) const {
        double v = 1.0;
        for (std::size_t t = l; t < l + k1; ++t) v *= 1.0 - p[t];
        for (std::size_t t = l + k1; t <= l + m(); ++t) v *= p[t];
        return v;
    }

    std::vector<int> pattern() const {
        std::vector<int> pat(k1, 0);
        pat.insert(pat.end(), k2, 1);
        return pat;
    }
};

inline ChainMoments k1k2_chain(const K1K2Model& mod) {
    mod.validate();
    const std::size_t n = mod.n, m = mod.m();
    std::vector<double> a(n * m);
    for (std::size_t l = 0; l < n * m; ++l) a[l] = mod.a(l);
    ChainMoments c;
    c.single.assign(n, 0.0);
    c.pair.assign(n, 0.0);
    c.triple.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l1 = i * m; l1 < (i + 1) * m; ++l1) {
            c.single[i] += a[l1];
            if (i + 1 >= n) continue;
            for (std::size_t l2 = l1 + m + 1; l2 < (i + 2) * m; ++l2) {
                c.pair[i] += a[l1] * a[l2];
                if (i + 2 >= n) continue;
                for (std::size_t l3 = l2 + m + 1; l3 < (i + 3) * m; ++l3) c.triple[i] += a[l1] * a[l2] * a[l3];
            }
        }
    }
    return c;
}

struct K1K2Terms {
    double a_star = 0.0, a_star_pair = 0.0, a_star_triple = 0.0;
    double a1_star = 0.0, a2_star = 0.0, a3_star = 0.0;
};

inline K1K2Terms k1k2_moments(const K1K2Model& mod, std::size_t i) {
    if (i >= mod.n) throw PreconditionError("k1k2_moments: index out of range");
    const auto c = k1k2_chain(mod);
    const auto s = static_cast<std::ptrdiff_t>(i);
    const auto b = chain_bars(c, i);
    return {c.A(s), c.P(s), c.T(s), b.abar1, b.abar2, b.abar3};
}

// The pair and triple sums with both orderings of the nested index ranges
// summed separately (1-based block arithmetic). Each unordered configuration
// is visited once per ordering, so these equal 2x and 3x the true moments;
// kept to document that discrepancy.
struct K1K2Literal {
    double pair = 0.0;
    double triple = 0.0;
};

inline K1K2Literal k1k2_literal_sums(const K1K2Model& mod, std::size_t i0) {
    mod.validate();
    const long m = static_cast<long>(mod.m());
    const long i = static_cast<long>(i0) + 1;
    const long nm = static_cast<long>(mod.n) * m;
    auto a = [&](long l) { return l >= 1 && l <= nm ? mod.a(static_cast<std::size_t>(l - 1)) : 0.0; };
    K1K2Literal r;
    if (i + 1 <= static_cast<long>(mod.n)) {
        for (long l1 = (i - 1) * m + 1; l1 <= i * m - 1; ++l1)
            for (long l2 = l1 + m + 1; l2 <= (i + 1) * m; ++l2) r.pair += a(l1) * a(l2);
        for (long l1 = i * m + 2; l1 <= (i + 1) * m; ++l1)
            for (long l2 = (i - 1) * m + 1; l2 <= l1 - m - 1; ++l2) r.pair += a(l1) * a(l2);
    }
    if (i + 2 <= static_cast<long>(mod.n)) {
        for (long l1 = (i - 1) * m + 1; l1 <= i * m - 1; ++l1)
            for (long l2 = l1 + m + 1; l2 <= (i + 1) * m - 1; ++l2)
                for (long l3 = l2 + m + 1; l3 <= (i + 2) * m; ++l3) r.triple += a(l1) * a(l2) * a(l3);
        for (long l1 = i * m + 2; l1 <= (i + 1) * m - 1; ++l1)
            for (long l2 = (i - 1) * m + 1; l2 <= l1 - m - 1; ++l2)
                for (long l3 = l1 + m + 1; l3 <= (i + 2) * m; ++l3) r.triple += a(l1) * a(l2) * a(l3);
        for (long l1 = (i + 1) * m + 3; l1 <= (i + 2) * m; ++l1)
            for (long l2 = i * m + 2; l2 <= l1 - m - 1; ++l2)
                for (long l3 = (i - 1) * m + 1; l3 <= l2 - m - 1; ++l3) r.triple += a(l1) * a(l2) * a(l3);
    }
    return r;
}

inline MomentSet k1k2_moment_set(const K1K2Model& mod) { return chain_moment_set(k1k2_chain(mod)); }

inline DependentSequence k1k2_sequence(const K1K2Model& mod) {
    mod.validate();
    const std::size_t n = mod.n, m = mod.m(), k1 = mod.k1;
    return detail::bits_sequence(
        n, mod.p,
        [n, m, k1](std::span<const int> bits, std::span<int> x) {
            for (std::size_t i = 0; i < n; ++i) {
                int s = 0;
                for (std::size_t l = i * m; l < (i + 1) * m; ++l) {
                    bool hit = true;
                    for (std::size_t t = 0; t <= m && hit; ++t) hit = bits[l + t] == (t < k1 ? 0 : 1);
                    s += hit ? 1 : 0;
                }
                x[i] = s;
            }
        },
        1, "k1k2-runs", [mod] { return k1k2_moment_set(mod); });
}

// a-bar(t) = max over attainable neighbour values of P(X_t = 0 | X_{t-1}, X_{t+1}),
// by enumeration of the at most 4m trials the three summands read.
inline double k1k2_abar(const K1K2Model& mod, std::size_t t) {
    mod.validate();
    if (t >= mod.n) throw PreconditionError("k1k2_abar: index out of range");
    const std::size_t m = mod.m(), k1 = mod.k1;
    const std::size_t lo_block = t == 0 ? 0 : t - 1;
    const std::size_t hi_block = std::min(mod.n - 1, t + 1);
    const std::size_t first = lo_block * m;
    const std::size_t last = (hi_block + 1) * m;  // inclusive trial index
    const std::size_t T = last - first + 1;
    if (T > 24) throw TooLargeError("k1k2_abar: local neighbourhood too large to enumerate");
    auto block = [&](std::uint32_t mask, std::size_t b) {
        int s = 0;
        for (std::size_t l = b * m; l < (b + 1) * m; ++l) {
            bool hit = true;
            for (std::size_t u = 0; u <= m && hit; ++u)
                hit = static_cast<int>((mask >> (l + u - first)) & 1U) == (u < k1 ? 0 : 1);
            s += hit ? 1 : 0;
        }
        return s;
    };
    // joint[left][right][x_t]; -1 index folded to 0 when the neighbour is absent.
    double joint[2][2][2] = {};
    for (std::uint32_t mask = 0; mask < (1U << T); ++mask) {
        double pr = 1.0;
        for (std::size_t u = 0; u < T; ++u) pr *= ((mask >> u) & 1U) ? mod.p[first + u] : 1.0 - mod.p[first + u];
        if (pr == 0.0) continue;
        const int left = t > 0 ? block(mask, t - 1) : 0;
        const int right = t + 1 < mod.n ? block(mask, t + 1) : 0;
        joint[left][right][block(mask, t)] += pr;
    }
    double best = 0.0;
    for (int l = 0; l < 2; ++l)
        for (int r = 0; r < 2; ++r) {
            const double z = joint[l][r][0] + joint[l][r][1];
            if (z > 0.0) best = std::max(best, joint[l][r][0] / z);
        }
    return best;
}

struct K1K2Smoothing {
    double v_even = 0.0;
    double v_odd = 0.0;
    double c = 0.0;
};

namespace detail {

inline double v_star(double sum) {
    const double v = 0.5 * std::min(1.0, sum);
    if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
    return 2.0 / std::sqrt(v);
}

inline void require_k1k2_conditions(const K1K2Model& mod, const std::vector<double>& a_star) {
    if (mod.n < 3 * mod.m())
        throw PreconditionError("the (k1,k2)-runs bound requires n >= 3m = " + std::to_string(3 * mod.m()) +
                                " (got n = " + std::to_string(mod.n) + ")");
    for (std::size_t t = 0; t < mod.n; t += 2)
        if (a_star[t] > 1.0 / 3.0)
            throw PreconditionError("the (k1,k2)-runs bound requires a(p_{2j-1}) <= 1/3 (index " +
                                    std::to_string(t + 1) + " has " + std::to_string(a_star[t]) + ")");
}

} // namespace detail

// c*_i = min{V*_e, V*_o}. The even bound frees the odd summands t = 2j - 1,
// j in {1..m*}; the odd bound frees the even summands t = 2j,
// j in {1..floor(n/2)}; both keep only summands with |t - i| > 2 (1-based).
inline std::vector<K1K2Smoothing> k1k2_smoothing_terms(const K1K2Model& mod) {
    mod.validate();
    const std::size_t n = mod.n;
    std::vector<double> abar(n);
    for (std::size_t t = 0; t < n; ++t) abar[t] = k1k2_abar(mod, t);
    std::vector<K1K2Smoothing> out(n);
    for (std::size_t i0 = 0; i0 < n; ++i0) {
        const long i = static_cast<long>(i0) + 1;
        double se = 0.0, so = 0.0;
        for (long j = 1; j <= static_cast<long>(m_star(n)); ++j)
            if (std::abs(2 * j - 1 - i) > 2) se += 1.0 - abar[static_cast<std::size_t>(2 * j - 2)];
        for (long j = 1; j <= static_cast<long>(n / 2); ++j)
            if (std::abs(2 * j - i) > 2) so += 1.0 - abar[static_cast<std::size_t>(2 * j - 1)];
        out[i0].v_even = detail::v_star(se);
        out[i0].v_odd = detail::v_star(so);
        out[i0].c = std::min(out[i0].v_even, out[i0].v_odd);
    }
    return out;
}

inline double k1k2_ci_star(const K1K2Model& mod, std::size_t i) {
    const auto c = k1k2_chain(mod);
    detail::require_k1k2_conditions(mod, c.single);
    if (i >= mod.n) throw PreconditionError("k1k2_ci_star: index out of range");
    return k1k2_smoothing_terms(mod)[i].c;
}

inline SmoothingEstimate k1k2_smoothing(const K1K2Model& mod) {
    const auto terms = k1k2_smoothing_terms(mod);
    SmoothingEstimate s;
    s.m_star = m_star(mod.n);
    for (const auto& t : terms) {
        s.c.push_back(t.c);
        s.method.push_back(t.v_odd < t.v_even ? SmoothingMethod::roellin_odd : SmoothingMethod::roellin_even);
    }
    return s;
}

inline RunsBoundReport k1k2_bound(const K1K2Model& mod, const PanjerPSD& spec, double delta_g,
                                  const BoundOptions& opt = {}) {
    const auto c = k1k2_chain(mod);
    detail::require_k1k2_conditions(mod, c.single);
    const auto moments = chain_moment_set(c);
    BoundOptions o = opt;
    o.enforce_min_n = false;
    RunsBoundReport r;
    static_cast<BoundReport&>(r) = bound_d1(moments, k1k2_smoothing(mod), spec, delta_g, o);
    for (std::size_t i = 0; i < mod.n; ++i) {
        const auto s = static_cast<std::ptrdiff_t>(i);
        const auto b = chain_bars(c, i);
        r.moment_terms.push_back({c.A(s), c.P(s), c.T(s), b.abar1, b.abar2, b.abar3});
    }
    return r;
}

} // namespace psdstein
