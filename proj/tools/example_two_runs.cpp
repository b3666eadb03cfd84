// Negative binomial approximation of the 2-runs count: every bound variant
// next to the exact total-variation distance.

#include <cstdio>

#include "psdstein/oracle.hpp"
#include "psdstein/psdstein.hpp"

int main() {
    using namespace psdstein;
    const std::size_t n = 10;
    const double p = 0.3;

    const auto model = TwoRunsModel::iid(n, p);
    const auto seq = two_runs_sequence(model);
    const auto m = enumerate_moments(seq);
    const auto target = fit_negative_binomial(m.mean_w, m.var_w);
    const double dg = delta_g_uniform_bound(target);
    const double tv = exact_tv(law_of_sum(seq), pmf_panjer_auto(target, 1e-16)).upper;

    const auto t31 = theorem31_bound(m, oracle::exact_conditional_terms(seq), target, dg);
    const auto d1 = two_runs_bound(model, target, dg);
    const auto d2 = bound_d2(m, target, dg);
    const auto crude = bound_crude(m, target, g_sup_norm(target), dg);

    std::printf("2-runs, n = %zu, p = %.2f: E W = %.6f, Var W = %.6f\n", n, p, m.mean_w, m.var_w);
    std::printf("exact TV       %.6f\n", tv);
    std::printf("theorem31      %.6f\n", t31.total);
    std::printf("d1             %.6f\n", d1.total);
    std::printf("d2             %.6f\n", d2.total);
    std::printf("min(d1, d2)    %.6f\n", best_bound(d1, d2).total);
    std::printf("crude          %.6f\n", crude.total);
    std::printf("closed form    %.6f\n", nb_bound_closed_form(n, p));
}
