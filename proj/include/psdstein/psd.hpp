#pragma once

// Power-series distributions in the Panjer (a, b) parametrization and in the
// raw series form p_k = a_k theta^k / gamma(theta), together with the Stein
// operator, the explicit Stein-equation solution and bounds on its forward
// difference.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "psdstein/error.hpp"
#include "psdstein/pmf.hpp"

namespace psdstein {

// Which normalization of the Stein operator is in force. Only meaningful for
// finite-support members (b < 0): q_scaled multiplies the Panjer-form
// operator by q = 1/(1 - b), giving p(n - k)g(k + 1) - q k g(k) for the
// binomial.
enum class OperatorScale { panjer, q_scaled };

inline constexpr double default_tail_tolerance = 1e-14;

// Member of the class (k + 1) p_{k+1} = (a + b k) p_k. Construct through
// make_panjer() or one of the named factories; they validate the pair.
struct PanjerPSD {
    double a = 0.0;
    double b = 0.0;
    // Largest support point for finite-support members, empty otherwise.
    std::optional<std::size_t> max_support;

    bool in_p2() const noexcept { return a >= 0.0 && b >= 0.0; }

    // Mass at zero from the closed form (1 - b)^{a/b}, or e^{-a} when b = 0.
    double p0() const {
        if (b == 0.0) return std::exp(-a);
        return std::pow(1.0 - b, a / b);
    }

    double mean() const;
    double variance() const;
};

inline PanjerPSD make_panjer(double a, double b, std::optional<std::size_t> max_support = {}) {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw InvalidFamilyError("panjer: a and b must be finite");
    if (b >= 1.0)
        throw NonNormalizableError("panjer: b >= 1 gives a recursion ratio that never drops below one");
    if (a < 0.0)
        throw InvalidFamilyError("panjer: a < 0 makes p_1 negative");

    std::optional<std::size_t> top;
    if (a == 0.0) {
        top = 0;
    } else if (b < 0.0) {
        const double n = -a / b;
        const double rn = std::round(n);
        if (rn < 1.0 || std::abs(n - rn) > 1e-9 * std::max(1.0, n))
            throw InvalidFamilyError("panjer: b < 0 requires -a/b to be a positive integer, "
                                     "otherwise a + b k turns negative inside the support");
        top = static_cast<std::size_t>(rn);
    }
    if (max_support && max_support != top)
        throw InvalidFamilyError("panjer: declared max_support is inconsistent with (a, b)");
    return PanjerPSD{a, b, top};
}

inline PanjerPSD poisson(double lambda) {
    if (!(lambda > 0.0)) throw InvalidFamilyError("poisson: lambda must be positive");
    return make_panjer(lambda, 0.0);
}

// NB(alpha, p): P(k) = C(alpha + k - 1, k) p^alpha (1 - p)^k, so a = alpha(1 - p), b = 1 - p.
inline PanjerPSD negative_binomial(double alpha, double p) {
    if (!(alpha > 0.0) || !(p > 0.0) || !(p <= 1.0))
        throw InvalidFamilyError("negative_binomial: need alpha > 0 and 0 < p <= 1");
    return make_panjer(alpha * (1.0 - p), 1.0 - p);
}

// Bi(n, p): a = n p / q, b = -p / q.
inline PanjerPSD binomial(std::size_t n, double p) {
    if (n == 0 || !(p > 0.0) || !(p < 1.0))
        throw InvalidFamilyError("binomial: need n >= 1 and 0 < p < 1");
    const double q = 1.0 - p;
    return make_panjer(static_cast<double>(n) * p / q, -p / q, n);
}

// Mean a/(1 - b) and variance a/(1 - b)^2.
inline std::pair<double, double> psd_mean_var(const PanjerPSD& spec) {
    if (spec.b >= 1.0) throw UndefinedMomentsError("psd_mean_var: moments need b < 1");
    const double c = 1.0 - spec.b;
    return {spec.a / c, spec.a / (c * c)};
}

inline double PanjerPSD::mean() const { return psd_mean_var(*this).first; }
inline double PanjerPSD::variance() const { return psd_mean_var(*this).second; }

// Masses of a Panjer member in an arbitrary real type. The table always
// covers 0..k_max and extends internally until the geometric tail certificate
// is below tail_tol; whatever lies beyond k_max is reported in tail.
template <typename T>
struct PanjerValues {
    std::vector<T> masses;  // k = 0..k_max (or the support top, if smaller)
    T tail{0};              // certified bound on P(Z > k_max)
    T tail_moment{0};       // certified bound on E[Z; Z > k_max]
};

// With keep_all the table is not cut back to k_max but kept up to the point
// where the certificate was reached.
template <typename T>
PanjerValues<T> pmf_panjer_values(const PanjerPSD& spec, std::size_t k_max,
                                  double tail_tol = default_tail_tolerance, bool keep_all = false) {
    using std::exp;
    using std::log;
    const T a = spec.a;
    const T b = spec.b;
    constexpr std::size_t hard_limit = 50'000'000;

    // Log-weights relative to k = 0.
    std::vector<T> lw{T(0)};
    T cert_tail{0};
    T cert_moment{0};
    if (spec.max_support) {
        const std::size_t top = *spec.max_support;
        for (std::size_t k = 0; k < top; ++k)
            lw.push_back(lw.back() + log(a + b * T(k)) - log(T(k + 1)));
    } else {
        // Running log-sum-exp of weights so the stopping rule is relative to the total.
        T lmax = 0;
        T scaled = 1;  // sum exp(lw - lmax)
        for (std::size_t k = 0;; ++k) {
            const T next = lw.back() + log(a + b * T(k)) - log(T(k + 1));
            lw.push_back(next);
            if (next > lmax) {
                scaled = scaled * exp(lmax - next) + 1;
                lmax = next;
            } else {
                scaled += exp(next - lmax);
            }
            const std::size_t K = k + 1;  // last tabulated index
            if (K < k_max + 1) continue;
            // Ratios p_{j+1}/p_j for j >= K+1 are dominated by r.
            const T r_next = (a + b * T(K + 1)) / T(K + 2);
            const T r = r_next > b ? r_next : b;
            if (r < T(1)) {
                const T ratio_k = (a + b * T(K)) / T(K + 1);
                const T l_next_mass = next + log(ratio_k) - (lmax + log(scaled));
                const T p_next = exp(l_next_mass);  // normalized p_{K+1}
                const T tail = p_next / (T(1) - r);
                if (tail <= T(tail_tol) || l_next_mass < T(-700)) {
                    cert_tail = tail;
                    cert_moment = p_next * (T(K + 1) / (T(1) - r) + r / ((T(1) - r) * (T(1) - r)));
                    break;
                }
            }
            if (K > hard_limit)
                throw NonNormalizableError("pmf_panjer: tail certificate not reached; family is not normalizable");
        }
    }

    T lmax = *std::max_element(lw.begin(), lw.end());
    std::vector<T> w(lw.size());
    CompensatedSum<T> total;
    for (std::size_t k = 0; k < lw.size(); ++k) {
        w[k] = exp(lw[k] - lmax);
        total += w[k];
    }
    const T z = total.value();
    for (auto& x : w) x /= z;

    PanjerValues<T> out;
    const std::size_t keep = keep_all ? w.size() : std::min(k_max + 1, w.size());
    out.masses.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(keep));
    CompensatedSum<T> rest;
    CompensatedSum<T> rest_moment;
    for (std::size_t k = keep; k < w.size(); ++k) {
        rest += w[k];
        rest_moment += T(k) * w[k];
    }
    out.tail = rest.value() + cert_tail;
    out.tail_moment = rest_moment.value() + cert_moment;
    return out;
}

// Double-precision table truncated at k_max with a certified tail bound.
inline PMFTable pmf_panjer(const PanjerPSD& spec, std::size_t k_max,
                           double tail_tol = default_tail_tolerance) {
    auto v = pmf_panjer_values<double>(spec, k_max, tail_tol);
    PMFTable t;
    t.support_min = 0;
    t.masses = std::move(v.masses);
    t.tail_mass_bound = v.tail;
    t.tail_moment_bound = v.tail_moment;
    return t;
}

// Table whose truncation point is chosen automatically: the smallest top
// (at least min_k_max) at which the tail certificate falls below tail_tol.
inline PMFTable pmf_panjer_auto(const PanjerPSD& spec, double tail_tol = default_tail_tolerance,
                                std::size_t min_k_max = 0) {
    if (spec.max_support) return pmf_panjer(spec, std::max(min_k_max, *spec.max_support));
    auto v = pmf_panjer_values<double>(spec, min_k_max, tail_tol, true);
    PMFTable t;
    t.masses = std::move(v.masses);
    t.tail_mass_bound = v.tail;
    t.tail_moment_bound = v.tail_moment;
    return t;
}

// Exact masses for finite-support members in a field type T (e.g. rationals).
template <typename T>
std::vector<T> panjer_masses_exact(const T& a, const T& b, std::size_t top) {
    std::vector<T> w{T(1)};
    for (std::size_t k = 0; k < top; ++k) w.push_back(w.back() * (a + b * T(k)) / T(k + 1));
    T z(0);
    for (const auto& x : w) z += x;
    for (auto& x : w) x /= z;
    return w;
}

// ---------------------------------------------------------------------------
// Raw series form.

struct PSDSpec {
    double theta = 1.0;
    // ln a_k; -inf marks a zero coefficient.
    std::function<double(std::size_t)> log_coeff;
    double log_norm = 0.0;  // ln gamma(theta)
    PMFTable table;         // materialized at construction

    double coeff(std::size_t k) const { return std::exp(log_coeff(k)); }
    double norm() const { return std::exp(log_norm); }
    double pmf(std::size_t k) const { return table.at(k); }
};

namespace detail {

inline double log_add(double x, double y) {
    if (x == -std::numeric_limits<double>::infinity()) return y;
    if (y == -std::numeric_limits<double>::infinity()) return x;
    const double m = std::max(x, y);
    return m + std::log(std::exp(x - m) + std::exp(y - m));
}

} // namespace detail

// Builds and normalizes a series family. For unbounded support the tail is
// certified once the term ratio theta a_{k+1}/a_k has been non-increasing and
// below one over a window of 32 terms, which is assumed to persist.
inline PSDSpec make_series(double theta, std::function<double(std::size_t)> log_coeff,
                           std::optional<std::size_t> max_support = {},
                           double tail_tol = default_tail_tolerance) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidFamilyError("series: theta must be positive");
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    constexpr std::size_t window = 32;
    constexpr std::size_t hard_limit = 5'000'000;
    const double ltheta = std::log(theta);

    std::vector<double> lt;  // ln(a_k theta^k)
    double lsum = ninf;
    double cert = 0.0;
    for (std::size_t k = 0;; ++k) {
        const double lc = log_coeff(k);
        if (std::isnan(lc) || lc == std::numeric_limits<double>::infinity())
            throw InvalidFamilyError("series: coefficient must be finite and non-negative");
        const double term = lc == ninf ? ninf : lc + static_cast<double>(k) * ltheta;
        lt.push_back(term);
        lsum = detail::log_add(lsum, term);
        if (max_support) {
            if (k == *max_support) break;
            continue;
        }
        if (k >= window && term != ninf) {
            bool ok = true;
            double r_max = 0.0;
            double prev_r = std::numeric_limits<double>::infinity();
            for (std::size_t j = k - window; j < k; ++j) {
                if (lt[j] == ninf || lt[j + 1] == ninf) { ok = false; break; }
                const double r = std::exp(lt[j + 1] - lt[j]);
                if (r > prev_r * (1.0 + 1e-12) || r >= 1.0) { ok = false; break; }
                prev_r = r;
                r_max = std::max(r_max, r);
            }
            if (ok) {
                const double r = prev_r;
                const double tail = std::exp(term - lsum) * r / (1.0 - r);
                if (tail <= tail_tol) {
                    cert = tail;
                    break;
                }
            }
        }
        if (k > hard_limit) throw NonNormalizableError("series: normalizing sum does not converge");
    }
    if (lsum == ninf) throw InvalidFamilyError("series: all coefficients are zero");

    PSDSpec s;
    s.theta = theta;
    s.log_coeff = std::move(log_coeff);
    s.log_norm = lsum;
    s.table.support_min = 0;
    s.table.masses.resize(lt.size());
    for (std::size_t k = 0; k < lt.size(); ++k)
        s.table.masses[k] = lt[k] == ninf ? 0.0 : std::exp(lt[k] - lsum);
    s.table.tail_mass_bound = cert;
    return s;
}

// Finite coefficient list a_0..a_{n-1}.
inline PSDSpec make_series(double theta, const std::vector<double>& coeffs) {
    if (coeffs.empty()) throw InvalidFamilyError("series: empty coefficient list");
    for (double c : coeffs)
        if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidFamilyError("series: coefficients must be non-negative");
    auto lc = [coeffs](std::size_t k) {
        return k < coeffs.size() && coeffs[k] > 0.0 ? std::log(coeffs[k])
                                                    : -std::numeric_limits<double>::infinity();
    };
    return make_series(theta, lc, coeffs.size() - 1);
}

// Discrete Gibbs measure P(k) proportional to e^{V(k)} w^k / k!, viewed as a
// series family with a_k = e^{V(k)}/k! and theta = w.
inline PSDSpec dgm_to_psd(std::function<double(std::size_t)> V, double w,
                          double tail_tol = default_tail_tolerance) {
    auto lc = [V = std::move(V)](std::size_t k) { return V(k) - std::lgamma(static_cast<double>(k) + 1.0); };
    return make_series(w, lc, std::nullopt, tail_tol);
}

// ---------------------------------------------------------------------------
// Stein operator.

using TestFunction = std::function<double(std::size_t)>;

inline double stein_apply(const PanjerPSD& spec, const TestFunction& g, std::size_t k,
                          OperatorScale scale = OperatorScale::panjer) {
    const double kk = static_cast<double>(k);
    double v = (spec.a + spec.b * kk) * g(k + 1) - kk * g(k);
    if (scale == OperatorScale::q_scaled) {
        if (spec.b >= 0.0) throw PreconditionError("stein_apply: q-scaled form needs b < 0");
        v /= (1.0 - spec.b);
    }
    return v;
}

// theta (k + 1) a_{k+1}/a_k g(k + 1) - k g(k); the first term is dropped where
// a_k = 0 (off the support, where g vanishes anyway).
inline double stein_apply(const PSDSpec& spec, const TestFunction& g, std::size_t k) {
    const double kk = static_cast<double>(k);
    const double l0 = spec.log_coeff(k);
    const double l1 = spec.log_coeff(k + 1);
    double up = 0.0;
    if (l0 != -std::numeric_limits<double>::infinity() && l1 != -std::numeric_limits<double>::infinity())
        up = spec.theta * (kk + 1.0) * std::exp(l1 - l0) * g(k + 1);
    return up - kk * g(k);
}

// Both displayed forms of the Stein-equation solution, for any real type:
// forward[k] = (1/(k p_k)) sum_{j<k} p_j (f(j) - Ef) and
// tail[k] = -(1/(k p_k)) sum_{j>=k} p_j (f(j) - Ef), over the tabulated range.
template <typename T>
struct SolutionForms {
    T ef{0};
    std::vector<T> forward;
    std::vector<T> tail;
    std::vector<T> cdf_before;  // F(k - 1)
    std::vector<T> sf_from;     // tabulated part of P(Z >= k)
};

template <typename T>
SolutionForms<T> stein_solution_forms(std::span<const T> p, std::span<const T> f) {
    const std::size_t K = p.size();
    SolutionForms<T> s;
    CompensatedSum<T> ef;
    for (std::size_t j = 0; j < K; ++j) ef += p[j] * f[j];
    s.ef = ef.value();
    s.forward.assign(K, T(0));
    s.tail.assign(K, T(0));
    s.cdf_before.assign(K, T(0));
    s.sf_from.assign(K, T(0));

    CompensatedSum<T> fw;
    CompensatedSum<T> cdf;
    for (std::size_t k = 0; k < K; ++k) {
        s.cdf_before[k] = cdf.value();
        if (k > 0 && p[k] != T(0)) s.forward[k] = fw.value() / (T(k) * p[k]);
        fw += p[k] * (f[k] - s.ef);
        cdf += p[k];
    }
    CompensatedSum<T> tw;
    CompensatedSum<T> sf;
    for (std::size_t k = K; k-- > 0;) {
        tw += p[k] * (f[k] - s.ef);
        sf += p[k];
        s.sf_from[k] = sf.value();
        if (k > 0 && p[k] != T(0)) s.tail[k] = -tw.value() / (T(k) * p[k]);
    }
    return s;
}

// Solution g_f of A g(k) = f(k) - E f(Z), with g(0) = 0 and g = 0 off the
// support. Values are tabulated on 0..top; for truncated tables g is only
// trusted up to top (evaluation beyond throws), for complete tables it is
// zero beyond the support.
class SteinSolution {
public:
    SteinSolution() = default;
    SteinSolution(std::vector<double> g, double ef, double ef_slack, bool complete)
        : g_(std::move(g)), ef_(ef), ef_slack_(ef_slack), complete_(complete) {}

    double operator()(std::size_t k) const {
        if (k < g_.size()) return g_[k];
        if (complete_) return 0.0;
        throw PreconditionError("SteinSolution: k beyond the certified range");
    }
    double delta(std::size_t k) const { return (*this)(k + 1) - (*this)(k); }

    // Largest k with delta(k) available.
    std::size_t delta_top() const { return complete_ ? g_.size() : g_.size() - 2; }
    const std::vector<double>& values() const noexcept { return g_; }
    double ef() const noexcept { return ef_; }
    double ef_slack() const noexcept { return ef_slack_; }
    bool complete() const noexcept { return complete_; }

    TestFunction as_function() const {
        return [self = *this](std::size_t k) { return self(k); };
    }

private:
    std::vector<double> g_;
    double ef_ = 0.0;
    double ef_slack_ = 0.0;
    bool complete_ = false;
};

// Solves on a tabulated law (support_min must be 0). Picks the forward form
// where F(k-1) <= P(Z >= k) and the tail form otherwise, which keeps the
// cancellation in each partial sum bounded.
inline SteinSolution stein_solve(const PMFTable& table, const TestFunction& f) {
    if (table.support_min != 0) throw PreconditionError("stein_solve: table must start at 0");
    const std::size_t K = table.size();
    std::vector<double> fv(K);
    double fmax = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        fv[k] = f(k);
        fmax = std::max(fmax, std::abs(fv[k]));
    }
    auto forms = stein_solution_forms<double>(table.masses, fv);
    std::vector<double> g(K, 0.0);
    for (std::size_t k = 1; k < K; ++k) {
        if (table.masses[k] == 0.0) continue;
        const double sf = forms.sf_from[k] + table.tail_mass_bound;
        g[k] = forms.cdf_before[k] <= sf ? forms.forward[k] : forms.tail[k];
    }
    const bool complete = table.tail_mass_bound == 0.0;
    return SteinSolution(std::move(g), forms.ef, fmax * table.tail_mass_bound, complete);
}

// Table deep enough that g is accurate on 0..k_eval + 1: the truncated tail
// is pushed far below p_{k_eval + 1}.
inline PMFTable stein_table(const PanjerPSD& spec, std::size_t k_eval) {
    if (spec.max_support) return pmf_panjer(spec, *spec.max_support);
    const auto probe = pmf_panjer(spec, k_eval + 2);
    const double ref = std::max(probe.masses[k_eval + 1], 1e-290);
    return pmf_panjer_auto(spec, std::min(default_tail_tolerance, 1e-18 * ref), k_eval + 2);
}

inline SteinSolution stein_solve(const PanjerPSD& spec, const TestFunction& f, std::size_t k_eval = 60) {
    return stein_solve(stein_table(spec, k_eval), f);
}

inline SteinSolution stein_solve(const PSDSpec& spec, const TestFunction& f) {
    return stein_solve(spec.table, f);
}

// ---------------------------------------------------------------------------
// Bounds on Delta g.

// sup_k |Delta g_f(k)| <= 1 /\ 1/a for a, b >= 0; for b < 0 the pointwise
// bound 1/k /\ 1/(a + b k) peaks where the two branches cross at k = a/(1 - b),
// giving 1 /\ (1 - b)/a (= 1/(np) for the binomial). The q-scaled operator
// divides the bound by q.
inline double delta_g_uniform_bound(const PanjerPSD& spec, OperatorScale scale = OperatorScale::panjer) {
    if (spec.a < 0.0) throw PreconditionError("delta_g_uniform_bound: needs a >= 0");
    // a = 0 is the point mass at 0: g(k) = (f(0) - f(k)) / k, so |Δg| <= 1.
    if (spec.a == 0.0 && scale == OperatorScale::panjer) return 1.0;
    double bound = spec.b >= 0.0 ? std::min(1.0, 1.0 / spec.a)
                                 : std::min(1.0, (1.0 - spec.b) / spec.a);
    if (scale == OperatorScale::q_scaled) {
        if (spec.b >= 0.0) throw PreconditionError("delta_g_uniform_bound: q-scaled form needs b < 0");
        bound *= (1.0 - spec.b);
    }
    return bound;
}

// sup over 1 <= k <= k_max of F̄(k+1)/(a + b k) + F(k-1)/k, after checking
//   k F(k)/F(k-1) >= a + b k >= k F̄(k+1)/F̄(k)
// at every k used.
inline double delta_g_exact_sup(const PanjerPSD& spec, std::size_t k_max) {
    const PMFTable t = pmf_panjer(spec, k_max + 2, 1e-300);
    const std::size_t K = t.size();
    std::vector<double> cdf(K);
    std::vector<double> sf(K + 1);
    CompensatedSum<double> c;
    for (std::size_t k = 0; k < K; ++k) {
        c += t.masses[k];
        cdf[k] = c.value();
    }
    CompensatedSum<double> s;
    s += t.tail_mass_bound;
    sf[K] = t.tail_mass_bound;
    for (std::size_t k = K; k-- > 0;) {
        s += t.masses[k];
        sf[k] = s.value();
    }
    const std::size_t top = spec.max_support ? std::min(k_max, *spec.max_support) : k_max;
    constexpr double rel = 1e-9;
    double best = 0.0;
    for (std::size_t k = 1; k <= top && k + 1 <= K; ++k) {
        const double kk = static_cast<double>(k);
        const double rate = spec.a + spec.b * kk;
        if (cdf[k - 1] > 0.0 && kk * cdf[k] / cdf[k - 1] < rate * (1.0 - rel))
            throw ConditionFailedError("delta_g_exact_sup: left monotonicity condition fails at k = " +
                                           std::to_string(k), k);
        if (sf[k] > 0.0 && rate < kk * sf[k + 1] / sf[k] * (1.0 - rel))
            throw ConditionFailedError("delta_g_exact_sup: right monotonicity condition fails at k = " +
                                           std::to_string(k), k);
        const double first = sf[k + 1] > 0.0 ? sf[k + 1] / rate : 0.0;
        best = std::max(best, first + cdf[k - 1] / kk);
    }
    return best;
}

// sup_f sup_k |g_f(k)| over f: Z+ -> [0, 1]. Expanding f in the indicator
// basis 1_{j}, g_f(k) = sum_j f(j) p_j (1[j < k] - F(k-1)) / (k p_k); the
// positive part of the coefficients gives the sup exactly:
//   F(k-1) P(Z >= k) / (k p_k).
// Beyond the table this is bounded by 1/(k (1 - r)), r dominating the ratios.
inline double g_sup_norm(const PanjerPSD& spec, std::size_t k_max = 200) {
    k_max = std::max(k_max, static_cast<std::size_t>(4.0 * spec.mean()) + 50);
    const PMFTable t = spec.max_support ? pmf_panjer(spec, *spec.max_support) : pmf_panjer(spec, k_max, 1e-300);
    const std::size_t K = t.size();
    std::vector<double> sf(K + 1);
    CompensatedSum<double> s;
    s += t.tail_mass_bound;
    sf[K] = t.tail_mass_bound;
    for (std::size_t k = K; k-- > 0;) {
        s += t.masses[k];
        sf[k] = s.value();
    }
    double best = 0.0;
    CompensatedSum<double> cdf;
    for (std::size_t k = 0; k < K; ++k) {
        if (k > 0 && t.masses[k] > 0.0)
            best = std::max(best, cdf.value() * sf[k] / (static_cast<double>(k) * t.masses[k]));
        cdf += t.masses[k];
    }
    if (!spec.max_support) {
        const double next = static_cast<double>(K);
        const double r = std::max((spec.a + spec.b * next) / (next + 1.0), spec.b);
        if (r >= 1.0) throw PreconditionError("g_sup_norm: table too short to certify the tail; raise k_max");
        best = std::max(best, 1.0 / (next * (1.0 - r)));
    }
    return best;
}

} // namespace psdstein
