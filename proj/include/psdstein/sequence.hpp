#pragma once

// Finite sequences of Z+-valued locally dependent summands X_1..X_n, the
// m -> 1 blocking reduction, neighbourhood sums and the moment quantities the
// Stein bounds consume.
//
// Indices are 0-based throughout: summand i has neighbourhoods
// N(i, l) = {j : |j - i| <= l} clipped to [0, n).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "psdstein/error.hpp"
#include "psdstein/pmf.hpp"

namespace psdstein {

inline constexpr std::uint64_t default_max_outcomes = std::uint64_t{1} << 24;

// Visitor receives the summand values of one outcome and its probability.
using OutcomeVisitor = std::function<void(std::span<const int>, double)>;

struct IndexMoments {
    double mean = 0.0;           // E X_i
    double mean_n1 = 0.0;        // E X_{N(i,1)}
    double cross_n1 = 0.0;       // E X_i X_{N(i,1)}
    double bracket = 0.0;        // E[X_{N(i,1)} (2 X_{N(i,2)} - X_{N(i,1)} - 1)]
    double cross_bracket = 0.0;  // E[X_i X_{N(i,1)} (2 X_{N(i,2)} - X_{N(i,1)} - 1)]
    double linear = 0.0;         // E[X_i (X_{N(i,2)} - 1)]
};

struct MomentSet {
    std::vector<IndexMoments> at;
    double mean_w = 0.0;
    double var_w = 0.0;
    // False for Monte-Carlo estimates; standard errors are then filled in.
    bool certified = true;
    std::vector<IndexMoments> std_error;
    double mean_w_se = 0.0;
    double var_w_se = 0.0;

    std::size_t n() const noexcept { return at.size(); }

    double sum_means() const {
        CompensatedSum<double> s;
        for (const auto& m : at) s += m.mean;
        return s.value();
    }

    // Var(W) = sum_i [E X_i X_{N(i,1)} - E X_i E X_{N(i,1)}], valid for
    // 1-dependent summands.
    double variance_from_neighborhoods() const {
        CompensatedSum<double> s;
        for (const auto& m : at) s += m.cross_n1 - m.mean * m.mean_n1;
        return s.value();
    }
};

// Moment terms weighted by conditional smoothness of W, one entry per index:
//   bracket_d[i]       = E[X_{N(i,1)} (2 X_{N(i,2)} - X_{N(i,1)} - 1) D(W | X_{N(i,1)}, X_{N(i,2)})]
//   cross_bracket_d[i] = E[X_i X_{N(i,1)} (2 X_{N(i,2)} - X_{N(i,1)} - 1) D(W | X_{N(i,1)}, X_{N(i,2)})]
//   linear_d[i]        = E[X_i (X_{N(i,2)} - 1) D(W | X_{N(i,2)})]
struct ConditionalTerms {
    std::vector<double> bracket_d;
    std::vector<double> cross_bracket_d;
    std::vector<double> linear_d;
};

struct DependentSequence {
    std::size_t n = 0;
    std::size_t dependence_radius = 1;
    // Size of the finite outcome space behind `enumerate`, if any.
    std::uint64_t outcome_count = 0;
    std::function<void(const OutcomeVisitor&)> enumerate;
    std::function<std::vector<int>(std::mt19937_64&)> sample;
    // Closed-form moments registered by a model (e.g. the runs formulas).
    std::function<MomentSet()> closed_form_moments;
    std::string label;

    bool enumerable(std::uint64_t max_outcomes = default_max_outcomes) const {
        return static_cast<bool>(enumerate) && outcome_count <= max_outcomes;
    }
};

inline void require_enumerable(const DependentSequence& seq, std::uint64_t max_outcomes, const char* who) {
    if (!seq.enumerate) throw UnavailableError(std::string(who) + ": sequence has no exact enumerator");
    if (seq.outcome_count > max_outcomes)
        throw TooLargeError(std::string(who) + ": outcome space of " + std::to_string(seq.outcome_count) +
                            " exceeds the enumeration cutoff of " + std::to_string(max_outcomes));
}

// Summands driven by independent Bernoulli trials. `summands` fills X from a
// trial outcome whose bit t is trial t.
using TrialMap = std::function<void(std::uint64_t, std::span<int>)>;

inline DependentSequence trial_sequence(std::size_t n, std::vector<double> trial_probs, TrialMap summands,
                                        std::size_t radius, std::string label = {}) {
    const std::size_t T = trial_probs.size();
    if (T >= 63) throw TooLargeError("trial_sequence: at most 62 trials are supported");
    for (double p : trial_probs)
        if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("trial_sequence: probabilities must lie in [0, 1]");

    DependentSequence seq;
    seq.n = n;
    seq.dependence_radius = radius;
    seq.outcome_count = std::uint64_t{1} << T;
    seq.label = std::move(label);
    seq.enumerate = [n, trial_probs, summands](const OutcomeVisitor& visit) {
        const std::size_t T = trial_probs.size();
        std::vector<int> x(n);
        // Depth-first over trials with an incremental product; zero-probability
        // branches are pruned.
        auto rec = [&](auto&& self, std::size_t t, std::uint64_t mask, double prob) -> void {
            if (t == T) {
                std::fill(x.begin(), x.end(), 0);
                summands(mask, x);
                visit(x, prob);
                return;
            }
            const double p = trial_probs[t];
            if (p < 1.0) self(self, t + 1, mask, prob * (1.0 - p));
            if (p > 0.0) self(self, t + 1, mask | (std::uint64_t{1} << t), prob * p);
        };
        rec(rec, 0, 0, 1.0);
    };
    seq.sample = [n, trial_probs, summands](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::uint64_t mask = 0;
        for (std::size_t t = 0; t < trial_probs.size(); ++t)
            if (u(rng) < trial_probs[t]) mask |= std::uint64_t{1} << t;
        std::vector<int> x(n, 0);
        summands(mask, x);
        return x;
    };
    return seq;
}

// Independent Bernoulli summands X_i = eta_i.
inline DependentSequence bernoulli_product(std::vector<double> p) {
    const std::size_t n = p.size();
    return trial_sequence(
        n, std::move(p),
        [n](std::uint64_t mask, std::span<int> x) {
            for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<int>((mask >> i) & 1U);
        },
        0, "custom-bernoulli-product");
}

// ---------------------------------------------------------------------------
// Blocking.

struct BlockedSequence {
    std::size_t block_size = 1;
    // Half-open source index ranges of each block.
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    DependentSequence sequence;  // the blocked, 1-dependent sequence
};

// Groups consecutive runs of m summands: block j sums X_{jm}..X_{min((j+1)m, n)-1}.
// There are ceil(n/m) blocks.
inline BlockedSequence block_m_dependent(const DependentSequence& seq, std::ptrdiff_t m) {
    if (m <= 0) throw PreconditionError("block_m_dependent: block size m must be >= 1");
    if (seq.n == 0) throw PreconditionError("block_m_dependent: empty sequence");
    const auto bs = static_cast<std::size_t>(m);
    BlockedSequence out;
    out.block_size = bs;
    for (std::size_t lo = 0; lo < seq.n; lo += bs) out.blocks.emplace_back(lo, std::min(lo + bs, seq.n));

    const auto blocks = out.blocks;
    const std::size_t nb = blocks.size();
    auto fold = [blocks](std::span<const int> x, std::vector<int>& y) {
        for (std::size_t j = 0; j < blocks.size(); ++j) {
            int s = 0;
            for (std::size_t i = blocks[j].first; i < blocks[j].second; ++i) s += x[i];
            y[j] = s;
        }
    };

    DependentSequence& b = out.sequence;
    b.n = nb;
    b.dependence_radius = (seq.dependence_radius + bs - 1) / bs;
    b.outcome_count = seq.outcome_count;
    b.label = seq.label.empty() ? "blocked" : seq.label + "/blocked";
    if (seq.enumerate) {
        b.enumerate = [inner = seq.enumerate, fold, nb](const OutcomeVisitor& visit) {
            std::vector<int> y(nb);
            inner([&](std::span<const int> x, double p) {
                fold(x, y);
                visit(y, p);
            });
        };
    }
    if (seq.sample) {
        b.sample = [inner = seq.sample, fold, nb](std::mt19937_64& rng) {
            std::vector<int> y(nb);
            fold(inner(rng), y);
            return y;
        };
    }
    return out;
}

// Uses the sequence's own dependence radius as block size (radius 0 is
// treated as 1, i.e. singleton blocks).
inline BlockedSequence block_m_dependent(const DependentSequence& seq) {
    return block_m_dependent(seq, static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, seq.dependence_radius)));
}

// ---------------------------------------------------------------------------
// Neighbourhoods.

struct Neighborhood {
    std::size_t lo = 0;  // inclusive
    std::size_t hi = 0;  // exclusive

    int operator()(std::span<const int> x) const {
        int s = 0;
        for (std::size_t j = lo; j < hi; ++j) s += x[j];
        return s;
    }
    bool contains(std::size_t j) const noexcept { return j >= lo && j < hi; }
};

inline Neighborhood neighborhood_sum(std::size_t n, std::size_t i, int ell) {
    if (ell != 1 && ell != 2) throw PreconditionError("neighborhood_sum: ell must be 1 or 2");
    if (i >= n) throw PreconditionError("neighborhood_sum: index out of range");
    const auto l = static_cast<std::size_t>(ell);
    return Neighborhood{i >= l ? i - l : 0, std::min(n, i + l + 1)};
}

inline Neighborhood neighborhood_sum(const DependentSequence& seq, std::size_t i, int ell) {
    return neighborhood_sum(seq.n, i, ell);
}

// ---------------------------------------------------------------------------
// Moments.

namespace detail {

// Accumulates per-outcome moment contributions. Shared by the exact and the
// Monte-Carlo paths.
class MomentAccumulator {
public:
    explicit MomentAccumulator(std::size_t n) : n_(n), sums_(n), sq_(n), prefix_(n + 1) {}

    void add(std::span<const int> x, double w) {
        prefix_[0] = 0;
        for (std::size_t j = 0; j < n_; ++j) prefix_[j + 1] = prefix_[j] + x[j];
        const double W = prefix_[n_];
        for (std::size_t i = 0; i < n_; ++i) {
            const double xi = x[i];
            const double n1 = window(i, 1);
            const double n2 = window(i, 2);
            const double br = n1 * (2.0 * n2 - n1 - 1.0);
            const double v[6] = {xi, n1, xi * n1, br, xi * br, xi * (n2 - 1.0)};
            for (int f = 0; f < 6; ++f) {
                sums_[i][f] += w * v[f];
                sq_[i][f] += w * v[f] * v[f];
            }
        }
        w_sum_ += w;
        w1_ += w * W;
        w2_ += w * W * W;
        w3_ += w * W * W * W;
        w4_ += w * W * W * W * W;
    }

    // Normalized expectations (divides by total weight).
    MomentSet finish(bool certified, double samples = 0.0) const {
        MomentSet m;
        m.certified = certified;
        const double z = w_sum_.value();
        m.at.resize(n_);
        if (!certified) m.std_error.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            double e[6];
            double se[6];
            for (int f = 0; f < 6; ++f) {
                e[f] = sums_[i][f].value() / z;
                const double var = std::max(0.0, sq_[i][f].value() / z - e[f] * e[f]);
                se[f] = samples > 1.0 ? std::sqrt(var / (samples - 1.0)) : 0.0;
            }
            m.at[i] = IndexMoments{e[0], e[1], e[2], e[3], e[4], e[5]};
            if (!certified) m.std_error[i] = IndexMoments{se[0], se[1], se[2], se[3], se[4], se[5]};
        }
        const double mu = w1_.value() / z;
        const double m2 = w2_.value() / z;
        m.mean_w = mu;
        m.var_w = m2 - mu * mu;
        if (!certified && samples > 1.0) {
            m.mean_w_se = std::sqrt(std::max(0.0, m.var_w) / (samples - 1.0));
            // Delta-method standard error of the sample variance.
            const double m3 = w3_.value() / z;
            const double m4 = w4_.value() / z;
            const double c4 = m4 - 4 * mu * m3 + 6 * mu * mu * m2 - 3 * mu * mu * mu * mu;
            m.var_w_se = std::sqrt(std::max(0.0, c4 - m.var_w * m.var_w) / samples);
        }
        return m;
    }

private:
    double window(std::size_t i, std::size_t l) const {
        const std::size_t lo = i >= l ? i - l : 0;
        const std::size_t hi = std::min(n_, i + l + 1);
        return static_cast<double>(prefix_[hi] - prefix_[lo]);
    }

    std::size_t n_;
    std::vector<std::array<CompensatedSum<double>, 6>> sums_;
    std::vector<std::array<CompensatedSum<double>, 6>> sq_;
    std::vector<long long> prefix_;
    CompensatedSum<double> w_sum_, w1_, w2_, w3_, w4_;
};

} // namespace detail

struct MomentOptions {
    std::uint64_t max_outcomes = default_max_outcomes;
    std::size_t samples = 200'000;
    std::uint64_t seed = 0x5eed;
};

// Exact moments by full enumeration.
inline MomentSet enumerate_moments(const DependentSequence& seq, std::uint64_t max_outcomes = default_max_outcomes) {
    require_enumerable(seq, max_outcomes, "enumerate_moments");
    detail::MomentAccumulator acc(seq.n);
    seq.enumerate([&](std::span<const int> x, double p) { acc.add(x, p); });
    return acc.finish(true);
}

// Monte-Carlo moments; the result is flagged non-certified and carries
// standard errors.
inline MomentSet sample_moments(const DependentSequence& seq, std::size_t samples, std::uint64_t seed) {
    if (!seq.sample) throw UnavailableError("sample_moments: sequence has no sampler");
    if (samples < 2) throw PreconditionError("sample_moments: need at least two samples");
    std::mt19937_64 rng(seed);
    detail::MomentAccumulator acc(seq.n);
    for (std::size_t s = 0; s < samples; ++s) acc.add(seq.sample(rng), 1.0);
    return acc.finish(false, static_cast<double>(samples));
}

// Exact enumeration when the outcome space is small enough, else registered
// closed forms, else sampling.
inline MomentSet compute_moments(const DependentSequence& seq, const MomentOptions& opt = {}) {
    if (seq.enumerable(opt.max_outcomes)) return enumerate_moments(seq, opt.max_outcomes);
    if (seq.closed_form_moments) return seq.closed_form_moments();
    if (seq.sample) return sample_moments(seq, opt.samples, opt.seed);
    throw UnavailableError("compute_moments: no enumerator, closed form or sampler available");
}

// Exact law of W = sum X_i.
inline PMFTable law_of_sum(const DependentSequence& seq, std::uint64_t max_outcomes = default_max_outcomes) {
    require_enumerable(seq, max_outcomes, "law_of_sum");
    std::vector<CompensatedSum<double>> acc;
    seq.enumerate([&](std::span<const int> x, double p) {
        int w = 0;
        for (int v : x) w += v;
        if (static_cast<std::size_t>(w) >= acc.size()) acc.resize(static_cast<std::size_t>(w) + 1);
        acc[static_cast<std::size_t>(w)] += p;
    });
    std::vector<double> m(acc.size());
    for (std::size_t k = 0; k < acc.size(); ++k) m[k] = acc[k].value();
    return make_pmf(std::move(m));
}

// Largest |P(prefix = u, suffix = v) - P(prefix = u) P(suffix = v)| over all
// prefixes X_0..X_i and suffixes X_j..X_{n-1} with j - i > radius. Zero (up to
// rounding) certifies radius-dependence of the enumerated law.
inline double dependence_defect(const DependentSequence& seq, std::size_t radius,
                                std::uint64_t max_outcomes = default_max_outcomes) {
    require_enumerable(seq, max_outcomes, "dependence_defect");
    using Key = std::vector<int>;
    double worst = 0.0;
    for (std::size_t i = 0; i < seq.n; ++i) {
        for (std::size_t j = i + radius + 1; j < seq.n; ++j) {
            std::map<std::pair<Key, Key>, double> joint;
            std::map<Key, double> left;
            std::map<Key, double> right;
            seq.enumerate([&](std::span<const int> x, double p) {
                Key u(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(i) + 1);
                Key v(x.begin() + static_cast<std::ptrdiff_t>(j), x.end());
                left[u] += p;
                right[v] += p;
                joint[{std::move(u), std::move(v)}] += p;
            });
            for (const auto& [u, pu] : left)
                for (const auto& [v, pv] : right) {
                    auto it = joint.find({u, v});
                    const double pj = it == joint.end() ? 0.0 : it->second;
                    worst = std::max(worst, std::abs(pj - pu * pv));
                }
        }
    }
    return worst;
}

} // namespace psdstein
