// Acceptance suite: one PASS/FAIL line per criterion.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "psdstein/oracle.hpp"
#include "psdstein/psdstein.hpp"

using namespace psdstein;
using big = boost::multiprecision::cpp_bin_float_50;
using boost::multiprecision::cpp_rational;

namespace {

int failures = 0;

struct Outcome {
    bool ok = true;
    std::string detail;
};

void run(const char* id, const char* title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
        r = body();
    } catch (const std::exception& e) {
        r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!r.ok) ++failures;
    std::printf("[%s] %s %s: %s (%.2f s)\n", r.ok ? "PASS" : "FAIL", id, title, r.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string num(double v, const char* f = "%.3e") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Named {
    std::string name;
    PanjerPSD spec;
};

std::vector<Named> stein_families() {
    std::vector<Named> out;
    for (double lambda : {0.5, 1.0, 4.0}) out.push_back({"Poisson(" + num(lambda, "%g") + ")", poisson(lambda)});
    for (double alpha : {1.0, 3.0})
        for (double pbar : {0.3, 0.6})
            out.push_back({"NB(" + num(alpha, "%g") + "," + num(pbar, "%g") + ")", negative_binomial(alpha, pbar)});
    for (std::size_t n : {5u, 20u})
        for (double p : {0.2, 0.5})
            out.push_back({"Bin(" + std::to_string(n) + "," + num(p, "%g") + ")", binomial(n, p)});
    return out;
}

// sup_k |Δg_f(k)| for f = 1_A, from the two solution representations in
// 50-digit arithmetic, on masses normalized over a table whose tail is
// negligible at that precision.
double delta_g_sup_reference(const Named& fam, const std::vector<bool>& in_a) {
    const std::size_t K = fam.spec.max_support ? *fam.spec.max_support : 400;
    std::vector<big> p(K + 1);
    p[0] = 1;
    big z = 1;
    for (std::size_t k = 0; k < K; ++k) {
        p[k + 1] = p[k] * (big(fam.spec.a) + big(fam.spec.b) * k) / (k + 1);
        z += p[k + 1];
    }
    for (auto& v : p) v /= z;
    auto f = [&](std::size_t k) { return k < in_a.size() && in_a[k] ? big(1) : big(0); };
    big ef = 0;
    for (std::size_t k = 0; k <= K; ++k) ef += p[k] * f(k);
    std::vector<big> head(K + 2, big(0)), tail(K + 2, big(0)), cdf(K + 2, big(0));
    for (std::size_t k = 0; k <= K; ++k) {
        head[k + 1] = head[k] + p[k] * (f(k) - ef);
        cdf[k + 1] = cdf[k] + p[k];
    }
    for (std::size_t k = K + 1; k-- > 0;) tail[k] = tail[k + 1] + p[k] * (f(k) - ef);
    const std::size_t top = std::min<std::size_t>(K, 120);
    std::vector<big> g(top + 2, big(0));
    for (std::size_t k = 1; k <= top + 1 && k <= K; ++k) {
        if (p[k] == 0) continue;
        g[k] = cdf[k] < big(0.5) ? head[k] / (k * p[k]) : -tail[k] / (k * p[k]);
    }
    double best = 0.0;
    for (std::size_t k = 0; k <= top; ++k) best = std::max(best, std::abs(static_cast<double>(g[k + 1] - g[k])));
    return best;
}

TwoRunsModel random_two_runs(std::mt19937_64& rng, std::size_t trials) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TwoRunsModel m;
    m.p.resize(trials);
    for (auto& v : m.p) v = u(rng);
    return m;
}

double moment_gap(const MomentSet& a, const MomentSet& b) {
    double gap = 0.0;
    for (std::size_t i = 0; i < a.n(); ++i) {
        const auto& x = a.at[i];
        const auto& y = b.at[i];
        for (double d : {x.mean - y.mean, x.cross_n1 - y.cross_n1, x.mean_n1 - y.mean_n1, x.bracket - y.bracket,
                         x.cross_bracket - y.cross_bracket, x.linear - y.linear})
            gap = std::max(gap, std::abs(d));
    }
    return gap;
}

} // namespace

int main() {
    run("AC1", "comparison table to 6 decimals", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto rows = table1();
        const double secs = seconds_since(t0);
        int bad = 0;
        std::string first;
        for (const auto& r : rows)
            if (!r.matches()) {
                if (bad++ == 0)
                    first = " first (" + std::to_string(r.n) + ", " + num(r.p, "%.2f") + ") -> " + fixed6(r.closed_form) +
                            " / " + fixed6(r.brown_xia);
            }
        return Outcome{bad == 0 && rows.size() == 18 && secs < 1.0,
                       std::to_string(rows.size() - bad) + "/18 cells match, " + num(secs) + " s" + first};
    });

    run("AC2", "closed form below Brown-Xia at every cell", [] {
        int below = 0;
        double worst = -INFINITY;
        for (const auto& r : table1()) {
            below += r.closed_form < r.brown_xia ? 1 : 0;
            worst = std::max(worst, r.closed_form - r.brown_xia);
        }
        return Outcome{below == 18, std::to_string(below) + "/18 strict, largest difference " + num(worst)};
    });

    run("AC3", "Stein identity, 100 random g per family", [] {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst = 0.0;
        std::size_t cases = 0;
        for (const auto& fam : stein_families()) {
            const auto t = pmf_panjer_auto(fam.spec, 1e-16);
            // |g| <= 1, so the untabulated part of E[A g(Z)] is at most
            // a P(Z > K) + (|b| + 1) E[Z; Z > K].
            const double slack =
                fam.spec.a * t.tail_mass_bound + (std::abs(fam.spec.b) + 1.0) * t.tail_moment_bound;
            for (int rep = 0; rep < 100; ++rep, ++cases) {
                std::vector<double> gv(t.size() + 2, 0.0);
                for (std::size_t k = 1; k < gv.size(); ++k) gv[k] = u(rng);
                auto g = [&](std::size_t k) { return k < gv.size() ? gv[k] : 0.0; };
                CompensatedSum<double> s;
                for (std::size_t k = 0; k < t.size(); ++k) s += t.masses[k] * stein_apply(fam.spec, g, k);
                worst = std::max(worst, std::abs(s.value()) + slack);
            }
        }
        const double secs = seconds_since(t0);
        return Outcome{worst < 1e-10 && secs < 10.0,
                       std::to_string(cases) + " cases, max |E A g| + tail " + num(worst) + ", " + num(secs) + " s"};
    });

    run("AC4", "Delta-g within the uniform bound, 200 random A per family", [] {
        std::mt19937_64 rng(77);
        std::bernoulli_distribution coin(0.5);
        double worst = -INFINITY;
        std::string where;
        for (const auto& fam : stein_families()) {
            const double bound = delta_g_uniform_bound(fam.spec);
            for (int rep = 0; rep < 200; ++rep) {
                std::vector<bool> a(31);
                for (std::size_t k = 0; k < a.size(); ++k) a[k] = coin(rng);
                const double sup = delta_g_sup_reference(fam, a);
                if (sup - bound > worst) {
                    worst = sup - bound;
                    where = fam.name;
                }
            }
        }
        return Outcome{worst <= 1e-12, "max(sup|Δg| - bound) = " + num(worst) + " at " + where};
    });

    run("AC5", "automaton DP equals brute force in rationals", [] {
        std::mt19937_64 rng(99);
        const std::vector<std::vector<int>> patterns{{1, 1}, {0, 1}, {0, 1, 1}, {0, 0, 1, 1}};
        int vectors = 0, equal = 0;
        for (const auto& pat : patterns) {
            const oracle::RunAutomaton aut(pat);
            for (int rep = 0; rep < 50; ++rep, ++vectors) {
                std::vector<cpp_rational> p(pat.size() + rng() % (16 - pat.size()));
                for (auto& x : p) x = cpp_rational(static_cast<long>(rng() % 21), 20);
                equal += oracle::dp_distribution<cpp_rational>(aut, p) ==
                                 oracle::brute_force_distribution<cpp_rational>(p, pat)
                             ? 1
                             : 0;
            }
        }
        return Outcome{equal == vectors, std::to_string(equal) + "/" + std::to_string(vectors) +
                                             " vectors identical (2-runs, (1,1), (1,2), (2,2); <= 15 trials)"};
    });

    run("AC6", "closed-form moments equal enumeration at every index", [] {
        std::mt19937_64 rng(6);
        double worst = 0.0;
        int models = 0;
        for (int rep = 0; rep < 20; ++rep, ++models) {
            const auto mod = random_two_runs(rng, 5 + rng() % 12);
            worst = std::max(worst, moment_gap(two_runs_moment_set(mod), enumerate_moments(two_runs_sequence(mod))));
        }
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto [k1, k2] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {1, 2}, {2, 1}, {2, 2}}) {
            for (int rep = 0; rep < 20; ++rep, ++models) {
                K1K2Model mod{k1, k2, 0, {}};
                mod.n = 2 + rng() % (18 / mod.m() - 2);
                mod.p.resize((mod.n + 1) * mod.m());
                for (auto& v : mod.p) v = u(rng);
                worst = std::max(worst, moment_gap(k1k2_moment_set(mod), enumerate_moments(k1k2_sequence(mod))));
            }
        }
        return Outcome{worst <= 1e-12, std::to_string(models) + " models, max gap " + num(worst)};
    });

    run("AC7", "every bound dominates the exact distance", [] {
        int checks = 0, held = 0;
        double tightest = INFINITY;
        std::string worst;
        auto record = [&](const std::string& label, double tv, const BoundReport& r) {
            ++checks;
            const double margin = r.upper() - tv;
            if (margin >= 0.0) ++held;
            if (margin < tightest) {
                tightest = margin;
                worst = label + " " + std::string(to_string(r.variant));
            }
        };
        for (std::size_t n = 8; n <= 14; ++n) {
            for (double p : {0.1, 0.2, 0.3, 0.4, 0.5}) {
                const auto mod = TwoRunsModel::iid(n, p);
                const auto seq = two_runs_sequence(mod);
                const auto m = enumerate_moments(seq);
                const auto spec = fit_negative_binomial(m.mean_w, m.var_w);
                const double dg = delta_g_uniform_bound(spec);
                const double tv = exact_tv(law_of_sum(seq), pmf_panjer_auto(spec, 1e-16)).upper;
                const std::string label = "2-runs n=" + std::to_string(n) + " p=" + num(p, "%.1f");
                record(label, tv, theorem31_bound(m, oracle::exact_conditional_terms(seq), spec, dg));
                const auto d1 = two_runs_bound(mod, spec, dg);
                const auto d2 = bound_d2(m, spec, dg);
                record(label, tv, d1);
                record(label, tv, d2);
                record(label, tv, best_bound(d1, d2));
                record(label, tv, nb_bound_closed_form_report(n, p));
            }
        }
        for (std::size_t n = 6; n <= 9; ++n) {
            for (double p : {0.1, 0.2, 0.3, 0.4, 0.5}) {
                const auto mod = K1K2Model::iid(1, 2, n, p);
                const auto seq = k1k2_sequence(mod);
                const auto m = enumerate_moments(seq);
                const auto spec =
                    m.var_w > m.mean_w ? fit_negative_binomial(m.mean_w, m.var_w) : fit_poisson(m.mean_w);
                const double dg = delta_g_uniform_bound(spec);
                const double tv = exact_tv(law_of_sum(seq), pmf_panjer_auto(spec, 1e-16)).upper;
                const std::string label = "(1,2)-runs n=" + std::to_string(n) + " p=" + num(p, "%.1f");
                record(label, tv, theorem31_bound(m, oracle::exact_conditional_terms(seq), spec, dg));
                const auto d1 = k1k2_bound(mod, spec, dg);
                const auto d2 = bound_d2(m, spec, dg);
                record(label, tv, d1);
                record(label, tv, d2);
                record(label, tv, best_bound(d1, d2));
            }
        }
        return Outcome{held == checks, std::to_string(held) + "/" + std::to_string(checks) +
                                           " hold, smallest margin " + num(tightest) + " (" + worst + ")"};
    });

    run("AC8", "d1 decays like n^(-1/2) for iid 2-runs", [] {
        const std::vector<std::size_t> ns{50, 100, 200, 400, 800};
        // Slope of log d1 against log n, and whether the Delta-g factor
        // min{1, 1/a} is in its 1/a branch over the whole grid.
        auto fit = [&](double p, bool& saturated) {
            std::vector<double> x, y;
            saturated = false;
            for (std::size_t n : ns) {
                const auto spec = nb_moment_match_2runs(n, p);
                const double dg = delta_g_uniform_bound(spec);
                saturated = saturated || dg >= 1.0;
                const auto r = two_runs_bound(TwoRunsModel::iid(n, p), spec, dg);
                x.push_back(std::log(static_cast<double>(n)));
                y.push_back(std::log(r.total));
            }
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / x.size(), my += y[i] / y.size();
            double sxy = 0, sxx = 0;
            for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
            return sxy / sxx;
        };
        std::string detail;
        bool ok = true;
        for (double p : {0.2, 0.3, 0.4, 0.5}) {
            bool saturated = false;
            const double slope = fit(p, saturated);
            ok = ok && !saturated && std::abs(slope + 0.5) <= 0.1;
            detail += (detail.empty() ? "" : ", ") + std::string("p=") + num(p, "%.1f") + " slope " + num(slope, "%.4f");
        }
        bool saturated = false;
        const double low = fit(0.1, saturated);
        detail += "; p=0.1 slope " + num(low, "%.4f") +
                  (saturated ? " (not scored: Delta-g factor capped at 1 while n p^2 is small)" : "");
        return Outcome{ok, detail};
    });

    run("AC9", "m* and c-bar arithmetic, n >= 8 boundary", [] {
        bool ok = m_star(20) == 10 && m_star(21) == 11;
        const double c20 = two_runs_cbar(20);
        ok = ok && std::abs(c20 - 4.0 / std::sqrt(7.0)) <= 1e-12;
        const auto spec = nb_moment_match_2runs(8, 0.3);
        bool accepted = true;
        try {
            two_runs_bound(TwoRunsModel::iid(8, 0.3), spec, delta_g_uniform_bound(spec));
            two_runs_cbar(8);
        } catch (const std::exception&) {
            accepted = false;
        }
        std::string message;
        try {
            two_runs_bound(TwoRunsModel::iid(7, 0.3), spec, 1.0);
        } catch (const PreconditionError& e) {
            message = e.what();
        }
        const bool rejected = message.find("n >= 8") != std::string::npos;
        ok = ok && accepted && rejected;
        return Outcome{ok, "m*(20)=" + std::to_string(m_star(20)) + ", m*(21)=" + std::to_string(m_star(21)) +
                               ", c(20)-4/sqrt7=" + num(c20 - 4.0 / std::sqrt(7.0)) + ", n=8 " +
                               (accepted ? "accepted" : "rejected") + ", n=7: \"" + message + "\""};
    });

    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
