#pragma once

// Total-variation error bounds for PSD approximation of sums of 1-dependent
// summands, together with the smoothing constants c_i(n) they consume.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psdstein/error.hpp"
#include "psdstein/oracle.hpp"
#include "psdstein/pmf.hpp"
#include "psdstein/psd.hpp"
#include "psdstein/sequence.hpp"

namespace psdstein {

enum class BoundVariant { theorem31, d1, d2, crude, min, closed_form };

inline std::string_view to_string(BoundVariant v) {
    switch (v) {
    case BoundVariant::theorem31: return "theorem31";
    case BoundVariant::d1: return "d1";
    case BoundVariant::d2: return "d2";
    case BoundVariant::crude: return "crude";
    case BoundVariant::min: return "min";
    case BoundVariant::closed_form: return "closed-form";
    }
    return "unknown";
}

inline BoundVariant parse_variant(std::string_view s) {
    if (s == "theorem31" || s == "theorem") return BoundVariant::theorem31;
    if (s == "d1") return BoundVariant::d1;
    if (s == "d2") return BoundVariant::d2;
    if (s == "crude") return BoundVariant::crude;
    if (s == "min") return BoundVariant::min;
    if (s == "closed-form" || s == "closed_form") return BoundVariant::closed_form;
    throw PreconditionError("unknown bound variant '" + std::string(s) + "'");
}

enum class SmoothingMethod { exact_conditional, roellin_even, roellin_odd, model_closed_form };

inline std::string_view to_string(SmoothingMethod m) {
    switch (m) {
    case SmoothingMethod::exact_conditional: return "exact-conditional";
    case SmoothingMethod::roellin_even: return "roellin-even";
    case SmoothingMethod::roellin_odd: return "roellin-odd";
    case SmoothingMethod::model_closed_form: return "model-closed-form";
    }
    return "unknown";
}

// m* = floor(n/2) + 1 for odd n, n/2 for even n: the number of odd indices in 1..n.
inline std::size_t m_star(std::size_t n) { return n % 2 == 1 ? n / 2 + 1 : n / 2; }

struct SmoothingEstimate {
    std::vector<double> c;
    std::vector<SmoothingMethod> method;
    std::size_t m_star = 0;

    static SmoothingEstimate uniform(std::size_t n, double value, SmoothingMethod how) {
        return SmoothingEstimate{std::vector<double>(n, value), std::vector<SmoothingMethod>(n, how), psdstein::m_star(n)};
    }
};

// 2 / sqrt(V) with V = sum_j min{1/2, 1 - d_TV(X_j, X_j + 1)} over the
// conditionally independent summands. Infinite when V = 0.
inline double roellin_bound(std::span<const double> dtv_shift) {
    CompensatedSum<double> v;
    for (double d : dtv_shift) v += std::min(0.5, 1.0 - d);
    const double V = v.value();
    if (!(V > 0.0)) return std::numeric_limits<double>::infinity();
    return 2.0 / std::sqrt(V);
}

struct RoellinEntry {
    double c = 0.0;
    SmoothingMethod method = SmoothingMethod::roellin_even;
};

// Minimum of the bounds obtained by conditioning on the even- or the
// odd-indexed summands.
inline RoellinEntry smoothing_roellin(std::span<const double> dtv_even, std::span<const double> dtv_odd) {
    const double e = roellin_bound(dtv_even);
    const double o = roellin_bound(dtv_odd);
    if (o < e) return {o, SmoothingMethod::roellin_odd};
    return {e, SmoothingMethod::roellin_even};
}

// Tightest per-index constants dominating every conditional D, by exact
// conditional enumeration.
inline SmoothingEstimate smoothing_exact(const DependentSequence& seq,
                                         std::uint64_t max_outcomes = default_max_outcomes) {
    SmoothingEstimate s;
    s.c = oracle::exact_smoothing_constants(seq, max_outcomes);
    s.method.assign(seq.n, SmoothingMethod::exact_conditional);
    s.m_star = m_star(seq.n);
    return s;
}

// ---------------------------------------------------------------------------
// Reports.

struct BoundReport {
    BoundVariant variant = BoundVariant::theorem31;
    std::size_t n = 0;
    double delta_g_factor = 0.0;
    double g_norm = 0.0;           // crude variant only
    double one_minus_b_abs = 0.0;
    double term_quadratic = 0.0;   // |1-b|-weighted part, factor included
    double term_linear = 0.0;
    double term_tau = 0.0;         // |tau (1-b)|
    double tau = 0.0;
    std::vector<double> smoothing;
    double sum_means = 0.0;
    double total = 0.0;
    // Added to total when the inputs carry sampling or truncation error.
    double slack = 0.0;
    std::optional<double> d1_total;
    std::optional<double> d2_total;

    double recompute_total() const {
        switch (variant) {
        case BoundVariant::theorem31:
        case BoundVariant::d1:
        case BoundVariant::d2:
        case BoundVariant::closed_form:
            return delta_g_factor * (term_quadratic + term_linear + term_tau);
        case BoundVariant::crude:
            return (2.0 * one_minus_b_abs * g_norm + delta_g_factor) * sum_means;
        case BoundVariant::min:
            return std::min(d1_total.value_or(std::numeric_limits<double>::infinity()),
                            d2_total.value_or(std::numeric_limits<double>::infinity()));
        }
        return total;
    }

    double upper() const { return total + slack; }
};

struct BoundOptions {
    // The full bound is stated for n >= 6.
    bool enforce_min_n = true;
    double mean_tolerance = 1e-9;
};

inline void require_mean_match(const MomentSet& m, const PanjerPSD& spec, double tol) {
    const double target = spec.mean();
    if (std::abs(target - m.mean_w) > tol * std::max(1.0, std::abs(target)))
        throw MeanMismatchError("target mean " + std::to_string(target) + " differs from E(W) = " +
                                    std::to_string(m.mean_w),
                                target, m.mean_w);
}

// tau = Var(W) - Var(Z).
inline double tau(const MomentSet& m, const PanjerPSD& spec) { return m.var_w - spec.variance(); }

namespace detail {

inline void require_n(const MomentSet& m, const BoundOptions& opt) {
    if (opt.enforce_min_n && m.n() < 6)
        throw PreconditionError("the bound requires n >= 6 (got n = " + std::to_string(m.n()) +
                                "); use the crude bound instead");
}

inline void require_delta_g(double delta_g) {
    if (!(delta_g >= 0.0) || !std::isfinite(delta_g)) throw PreconditionError("delta_g must be finite and >= 0");
}

// Three-sigma propagation of Monte-Carlo error into the sums entering a bound.
inline double sampled_slack(const MomentSet& m, std::span<const double> c, double half_one_minus_b, double delta_g,
                            bool quadratic_uses_d) {
    if (m.certified || m.std_error.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < m.n(); ++i) {
        const auto& v = m.at[i];
        const auto& e = m.std_error[i];
        const double ci = c.empty() ? 1.0 : c[i];
        double q = 0.0;
        if (quadratic_uses_d)
            q = std::abs(v.mean) * e.bracket + e.mean * std::abs(v.bracket) + e.cross_bracket;
        s += ci * (half_one_minus_b * q + e.linear);
    }
    s += 2.0 * half_one_minus_b * m.var_w_se;
    return 3.0 * delta_g * s;
}

} // namespace detail

// The full bound with exact conditional smoothness terms.
inline BoundReport theorem31_bound(const MomentSet& m, const ConditionalTerms& cond, const PanjerPSD& spec,
                                   double delta_g, const BoundOptions& opt = {}) {
    detail::require_n(m, opt);
    detail::require_delta_g(delta_g);
    require_mean_match(m, spec, opt.mean_tolerance);
    if (cond.bracket_d.size() != m.n() || cond.cross_bracket_d.size() != m.n() || cond.linear_d.size() != m.n())
        throw PreconditionError("theorem31_bound: conditional terms do not match the moment set");
    BoundReport r;
    r.variant = BoundVariant::theorem31;
    r.n = m.n();
    r.delta_g_factor = delta_g;
    r.one_minus_b_abs = std::abs(1.0 - spec.b);
    CompensatedSum<double> quad, lin;
    for (std::size_t i = 0; i < m.n(); ++i) {
        quad += m.at[i].mean * cond.bracket_d[i] + cond.cross_bracket_d[i];
        lin += cond.linear_d[i];
    }
    r.term_quadratic = 0.5 * r.one_minus_b_abs * quad.value();
    r.term_linear = lin.value();
    r.tau = tau(m, spec);
    r.term_tau = std::abs(r.tau * (1.0 - spec.b));
    r.sum_means = m.sum_means();
    r.total = r.recompute_total();
    r.slack = detail::sampled_slack(m, {}, 0.5 * r.one_minus_b_abs, delta_g, false);
    return r;
}

// The theorem with every conditional D replaced by the constant c_i.
inline BoundReport bound_d1(const MomentSet& m, const SmoothingEstimate& s, const PanjerPSD& spec, double delta_g,
                            const BoundOptions& opt = {}) {
    detail::require_n(m, opt);
    detail::require_delta_g(delta_g);
    require_mean_match(m, spec, opt.mean_tolerance);
    if (s.c.size() != m.n()) throw PreconditionError("bound_d1: smoothing constants do not match the moment set");
    BoundReport r;
    r.variant = BoundVariant::d1;
    r.n = m.n();
    r.delta_g_factor = delta_g;
    r.one_minus_b_abs = std::abs(1.0 - spec.b);
    r.smoothing = s.c;
    CompensatedSum<double> quad, lin;
    for (std::size_t i = 0; i < m.n(); ++i) {
        const auto& v = m.at[i];
        // An infinite c_i against a vanishing moment contributes nothing.
        const double q = v.mean * v.bracket + v.cross_bracket;
        if (q != 0.0) quad += s.c[i] * q;
        if (v.linear != 0.0) lin += s.c[i] * v.linear;
    }
    r.term_quadratic = 0.5 * r.one_minus_b_abs * quad.value();
    r.term_linear = lin.value();
    r.tau = tau(m, spec);
    r.term_tau = std::abs(r.tau * (1.0 - spec.b));
    r.sum_means = m.sum_means();
    r.total = r.recompute_total();
    r.slack = detail::sampled_slack(m, s.c, 0.5 * r.one_minus_b_abs, delta_g, true);
    return r;
}

// First-moment bound: ||Delta g|| {|1-b| sum [E X_i E X_N1 + E X_i X_N1] + sum E X_i}.
inline BoundReport bound_d2(const MomentSet& m, const PanjerPSD& spec, double delta_g, const BoundOptions& opt = {}) {
    detail::require_delta_g(delta_g);
    require_mean_match(m, spec, opt.mean_tolerance);
    BoundReport r;
    r.variant = BoundVariant::d2;
    r.n = m.n();
    r.delta_g_factor = delta_g;
    r.one_minus_b_abs = std::abs(1.0 - spec.b);
    CompensatedSum<double> quad;
    for (const auto& v : m.at) quad += v.mean * v.mean_n1 + v.cross_n1;
    r.term_quadratic = r.one_minus_b_abs * quad.value();
    r.sum_means = m.sum_means();
    r.term_linear = r.sum_means;
    r.tau = tau(m, spec);
    r.total = r.recompute_total();
    if (!m.certified && !m.std_error.empty()) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.n(); ++i) {
            const auto& v = m.at[i];
            const auto& e = m.std_error[i];
            s += r.one_minus_b_abs * (std::abs(v.mean) * e.mean_n1 + e.mean * std::abs(v.mean_n1) + e.cross_n1) + e.mean;
        }
        r.slack = 3.0 * delta_g * s;
    }
    return r;
}

// (2 |1-b| ||g|| + ||Delta g||) sum E X_i.
inline BoundReport bound_crude(const MomentSet& m, const PanjerPSD& spec, double g_norm, double delta_g) {
    detail::require_delta_g(delta_g);
    if (!(g_norm >= 0.0) || !std::isfinite(g_norm)) throw PreconditionError("g_norm must be finite and >= 0");
    if (m.n() == 0) throw PreconditionError("bound_crude: empty sequence");
    BoundReport r;
    r.variant = BoundVariant::crude;
    r.n = m.n();
    r.delta_g_factor = delta_g;
    r.g_norm = g_norm;
    r.one_minus_b_abs = std::abs(1.0 - spec.b);
    r.sum_means = m.sum_means();
    r.term_linear = r.sum_means;
    r.tau = tau(m, spec);
    r.total = r.recompute_total();
    if (!m.certified && !m.std_error.empty()) {
        double s = 0.0;
        for (const auto& e : m.std_error) s += e.mean;
        r.slack = 3.0 * (2.0 * r.one_minus_b_abs * g_norm + delta_g) * s;
    }
    return r;
}

// min{d1, d2}; both operands are kept in the report.
inline BoundReport best_bound(const BoundReport& d1, const BoundReport& d2) {
    if (d1.variant != BoundVariant::d1 || d2.variant != BoundVariant::d2)
        throw PreconditionError("best_bound: expects a d1 and a d2 report");
    BoundReport r = d1.total <= d2.total ? d1 : d2;
    r.variant = BoundVariant::min;
    r.d1_total = d1.total;
    r.d2_total = d2.total;
    r.total = r.recompute_total();
    r.slack = d1.total <= d2.total ? d1.slack : d2.slack;
    return r;
}

} // namespace psdstein
