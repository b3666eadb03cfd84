#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include "psdstein/error.hpp"

namespace psdstein {

// Neumaier's variant of Kahan summation. Works for any field type; for exact
// types the compensation term simply stays zero.
template <typename T>
class CompensatedSum {
public:
    CompensatedSum& operator+=(const T& x) {
        using std::abs;
        T t = sum_ + x;
        if constexpr (std::is_floating_point_v<T>) {
            if (!std::isfinite(t)) {
                sum_ = t;
                return *this;
            }
        }
        if (abs(sum_) >= abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }
    T value() const {
        if constexpr (std::is_floating_point_v<T>) {
            if (!std::isfinite(sum_)) return sum_;
        }
        return sum_ + comp_;
    }

private:
    T sum_{0};
    T comp_{0};
};

template <typename T>
T compensated_sum(std::span<const T> xs) {
    CompensatedSum<T> s;
    for (const auto& x : xs) s += x;
    return s.value();
}

// Finite probability table on {support_min, ..., support_min + masses.size() - 1}.
//
// tail_mass_bound certifies the probability lying above the table. For
// truncated infinite-support laws tail_moment_bound additionally bounds
// sum_{k > top} k * P(k); both are zero for laws whose support is fully
// tabulated.
struct PMFTable {
    std::size_t support_min = 0;
    std::vector<double> masses;
    double tail_mass_bound = 0.0;
    double tail_moment_bound = 0.0;

    std::size_t size() const noexcept { return masses.size(); }
    std::size_t top() const noexcept { return support_min + masses.size() - 1; }

    // P(k) for tabulated k, 0 elsewhere.
    double at(std::size_t k) const noexcept {
        if (k < support_min || k - support_min >= masses.size()) return 0.0;
        return masses[k - support_min];
    }

    double total() const { return compensated_sum<double>(masses); }

    double mean() const {
        CompensatedSum<double> s;
        for (std::size_t j = 0; j < masses.size(); ++j)
            s += static_cast<double>(support_min + j) * masses[j];
        return s.value();
    }

    double variance() const {
        const double mu = mean();
        CompensatedSum<double> s;
        for (std::size_t j = 0; j < masses.size(); ++j) {
            const double d = static_cast<double>(support_min + j) - mu;
            s += d * d * masses[j];
        }
        return s.value();
    }

    // Checks non-negativity and total + tail within [1 - eps, 1 + eps].
    bool is_valid(double eps = 1e-10) const {
        if (masses.empty()) return false;
        if (std::any_of(masses.begin(), masses.end(), [](double m) { return !(m >= 0.0); }))
            return false;
        const double t = total();
        return t <= 1.0 + eps && t + tail_mass_bound >= 1.0 - eps;
    }
};

inline PMFTable point_mass(std::size_t k) {
    return PMFTable{k, {1.0}, 0.0, 0.0};
}

// Builds a table from an occupancy vector starting at zero, trimming leading
// and trailing zeros.
inline PMFTable make_pmf(std::vector<double> masses_from_zero, double tail = 0.0) {
    std::size_t lo = 0;
    while (lo + 1 < masses_from_zero.size() && masses_from_zero[lo] == 0.0) ++lo;
    std::size_t hi = masses_from_zero.size();
    while (hi > lo + 1 && masses_from_zero[hi - 1] == 0.0) --hi;
    PMFTable t;
    t.support_min = lo;
    t.masses.assign(masses_from_zero.begin() + static_cast<std::ptrdiff_t>(lo),
                    masses_from_zero.begin() + static_cast<std::ptrdiff_t>(hi));
    t.tail_mass_bound = tail;
    return t;
}

// The law of Y + 1.
inline PMFTable shifted(const PMFTable& p) {
    PMFTable q = p;
    q.support_min += 1;
    q.tail_moment_bound = p.tail_moment_bound + p.tail_mass_bound;
    return q;
}

struct TvInterval {
    double value = 0.0;  // 1/2 sum over the tabulated range
    double lower = 0.0;
    double upper = 0.0;
};

// Total variation distance between two tables. The tabulated half-l1 sum is
// widened by half the combined tail certificates.
inline TvInterval exact_tv(const PMFTable& p, const PMFTable& q) {
    const std::size_t lo = std::min(p.support_min, q.support_min);
    const std::size_t hi = std::max(p.top(), q.top());
    CompensatedSum<double> s;
    for (std::size_t k = lo; k <= hi; ++k) s += std::abs(p.at(k) - q.at(k));
    TvInterval r;
    r.value = 0.5 * s.value();
    const double slack = 0.5 * (p.tail_mass_bound + q.tail_mass_bound);
    r.lower = std::max(0.0, r.value - slack);
    r.upper = std::min(1.0, r.value + slack);
    return r;
}

// D(Y) = 2 d_TV(Y, Y + 1) = sum_k |P(k) - P(k - 1)|.
inline double d_statistic(const PMFTable& p) {
    CompensatedSum<double> s;
    double prev = 0.0;
    for (double m : p.masses) {
        s += std::abs(m - prev);
        prev = m;
    }
    s += prev;
    return s.value();
}

// Same statistic from raw (unnormalized) weights; normalizes on the fly.
inline double d_statistic_weights(std::span<const double> w) {
    const double total = compensated_sum<double>(w);
    if (total <= 0.0) return 0.0;
    CompensatedSum<double> s;
    double prev = 0.0;
    for (double m : w) {
        s += std::abs(m - prev);
        prev = m;
    }
    s += prev;
    return s.value() / total;
}

} // namespace psdstein
