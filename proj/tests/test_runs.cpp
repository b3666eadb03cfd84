#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "psdstein/oracle.hpp"
#include "psdstein/runs.hpp"

using namespace psdstein;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

std::vector<double> random_probs(std::mt19937_64& rng, std::size_t count, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> p(count);
    for (auto& v : p) v = u(rng);
    return p;
}

void same_moments(const MomentSet& closed, const MomentSet& exact) {
    REQUIRE(closed.n() == exact.n());
    CHECK(closed.mean_w == Approx(exact.mean_w).margin(1e-12));
    CHECK(closed.var_w == Approx(exact.var_w).margin(1e-12));
    for (std::size_t i = 0; i < closed.n(); ++i) {
        CAPTURE(i);
        const auto& a = closed.at[i];
        const auto& b = exact.at[i];
        CHECK(a.mean == Approx(b.mean).margin(1e-12));
        CHECK(a.mean_n1 == Approx(b.mean_n1).margin(1e-12));
        CHECK(a.cross_n1 == Approx(b.cross_n1).margin(1e-12));
        CHECK(a.bracket == Approx(b.bracket).margin(1e-12));
        CHECK(a.cross_bracket == Approx(b.cross_bracket).margin(1e-12));
        CHECK(a.linear == Approx(b.linear).margin(1e-12));
    }
}

double tv_to(const DependentSequence& seq, const PanjerPSD& spec) {
    return exact_tv(law_of_sum(seq), pmf_panjer_auto(spec, 1e-16)).upper;
}

} // namespace

TEST_CASE("iid 2-runs terms at an interior index") {
    for (double p : {0.1, 0.25, 0.5}) {
        const auto t = two_runs_moments(TwoRunsModel::iid(10, p), 5);
        const double p2 = p * p, p3 = p2 * p, p4 = p3 * p, p5 = p4 * p;
        CHECK(t.a1 == Approx(p2));
        CHECK(t.a2 == Approx(p3));
        CHECK(t.a3 == Approx(p4));
        CHECK(t.abar1 == Approx(8 * p3 + 10 * p4));
        CHECK(t.abar2 == Approx(4 * p3 + 10 * p4 + 4 * p5));
        CHECK(t.abar3 == Approx(2 * p3 + 2 * p4));
    }
}

TEST_CASE("2-runs closed-form moments equal enumeration at every index") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        const TwoRunsModel mod{random_probs(rng, 4 + rng() % 10, 0.0, 1.0)};
        const auto seq = two_runs_sequence(mod);
        same_moments(two_runs_moment_set(mod), enumerate_moments(seq));
    }
    CHECK(two_runs_variance_iid(10, 0.3) == Approx(enumerate_moments(two_runs_sequence(TwoRunsModel::iid(10, 0.3))).var_w));
}

TEST_CASE("2-runs smoothing constant") {
    CHECK(two_runs_cbar(20) == Approx(4.0 / std::sqrt(7.0)).epsilon(1e-14));
    CHECK(two_runs_cbar(21) == Approx(4.0 / std::sqrt(8.0)).epsilon(1e-14));
    CHECK(two_runs_cbar(8) == Approx(4.0).epsilon(1e-14));
    CHECK_THROWS_WITH(two_runs_cbar(7), ContainsSubstring("n >= 8"));
    CHECK(closed_form_smoothing(21) == Approx(4.0 / std::sqrt(7.0)));
    CHECK_THROWS_WITH(closed_form_smoothing(7), ContainsSubstring("n >= 8"));
}

TEST_CASE("comparison table") {
    const auto rows = table1();
    REQUIRE(rows.size() == 18);
    for (const auto& r : rows) {
        CAPTURE(r.n, r.p, r.closed_form, r.brown_xia);
        CHECK(r.matches());
        CHECK(r.closed_form < r.brown_xia);
    }
    CHECK(fixed6(brown_xia_bound(20, 0.05)) == "0.398900");
}

TEST_CASE("closed-form report itemizes to its total") {
    for (std::size_t n : {8u, 20u, 35u}) {
        for (double p : {0.05, 0.2, 0.5}) {
            const auto r = nb_bound_closed_form_report(n, p);
            CHECK(r.recompute_total() == Approx(r.total).epsilon(1e-12));
            CHECK(r.total == nb_bound_closed_form(n, p));
        }
    }
    CHECK(nb_bound_closed_form(10, 0.0) == 0.0);
}

TEST_CASE("negative binomial fit") {
    const auto seq = two_runs_sequence(TwoRunsModel::iid(10, 0.3));
    const auto m = enumerate_moments(seq);
    const auto nb = fit_negative_binomial(m.mean_w, m.var_w);
    CHECK(nb.mean() == Approx(m.mean_w).epsilon(1e-12));
    CHECK(nb.variance() == Approx(m.var_w).epsilon(1e-12));
    const double pbar = m.mean_w / m.var_w;
    CHECK(nb.b == Approx(1.0 - pbar));
    const auto direct = nb_moment_match_2runs(10, 0.3);
    CHECK(direct.a == Approx(nb.a).epsilon(1e-12));
    CHECK(direct.b == Approx(nb.b).epsilon(1e-12));
    const double alpha = m.mean_w * pbar / (1.0 - pbar);
    CHECK(delta_g_uniform_bound(nb) <= 1.0 / (alpha * (1.0 - pbar)) + 1e-15);

    CHECK_THROWS_AS(fit_negative_binomial(1.0, 0.9), UnfittableError);
    CHECK_THROWS_AS(fit_negative_binomial(1.0, 1.0), UnfittableError);
    CHECK_THROWS_AS(fit_poisson(0.0), UnfittableError);
}

TEST_CASE("2-runs bound is d1 with the model's moments") {
    const auto mod = TwoRunsModel::iid(8, 0.3);
    const auto spec = nb_moment_match_2runs(8, 0.3);
    const double dg = delta_g_uniform_bound(spec);
    const auto r = two_runs_bound(mod, spec, dg);
    const auto ref = bound_d1(enumerate_moments(two_runs_sequence(mod)), two_runs_smoothing(8), spec, dg);
    CHECK(r.total == Approx(ref.total).epsilon(1e-12));
    CHECK(r.recompute_total() == Approx(r.total).epsilon(1e-12));
    REQUIRE(r.c_constant);
    CHECK(*r.c_constant == Approx(4.0));
    REQUIRE(r.moment_terms.size() == 8);
    CHECK(r.total >= tv_to(two_runs_sequence(mod), spec));

    // For iid trials each interior summand contributes
    // c [ (pbar/2)(p^2 abar1 + abar2) + abar3 ].
    const auto wide = TwoRunsModel::iid(40, 0.2);
    const auto wspec = nb_moment_match_2runs(40, 0.2);
    const auto w = two_runs_bound(wide, wspec, 1.0);
    const double p = 0.2, pbar = 1.0 - wspec.b, c = two_runs_cbar(40);
    const auto t = two_runs_moments(wide, 20);
    const double interior = c * (0.5 * pbar * (p * p * t.abar1 + t.abar2) + t.abar3);
    CHECK(t.abar1 == Approx(8 * std::pow(p, 3) + 10 * std::pow(p, 4)));
    CHECK(w.term_quadratic + w.term_linear > 36 * interior * 0.999);

    CHECK_THROWS_WITH(two_runs_bound(TwoRunsModel::iid(7, 0.3), spec, dg), ContainsSubstring("n >= 8"));
    CHECK_THROWS_AS(two_runs_bound(TwoRunsModel::iid(8, 0.6), spec, dg), PreconditionError);
}

TEST_CASE("(k1,k2)-runs closed-form moments equal enumeration") {
    std::mt19937_64 rng(5);
    const std::vector<std::pair<std::size_t, std::size_t>> shapes{{1, 1}, {1, 2}, {2, 1}, {2, 2}};
    for (auto [k1, k2] : shapes) {
        for (int rep = 0; rep < 5; ++rep) {
            K1K2Model mod{k1, k2, 0, {}};
            const std::size_t m = mod.m();
            mod.n = std::max<std::size_t>(2, 18 / m - 1 - rng() % 3);
            mod.p = random_probs(rng, (mod.n + 1) * m, 0.05, 0.95);
            CAPTURE(k1, k2, mod.n);
            same_moments(k1k2_moment_set(mod), enumerate_moments(k1k2_sequence(mod)));
        }
    }
}

TEST_CASE("(k1,k2)-runs count the pattern over all trials") {
    const auto mod = K1K2Model::iid(1, 2, 5, 0.4);
    const auto dp = oracle::dp_distribution(oracle::RunAutomaton::k1k2_runs(1, 2), mod.p);
    CHECK(exact_tv(dp, law_of_sum(k1k2_sequence(mod))).value < 1e-14);
}

TEST_CASE("literal nested sums double the pair and triple the triple") {
    std::mt19937_64 rng(3);
    K1K2Model mod{2, 2, 5, random_probs(rng, 6 * 3, 0.1, 0.9)};
    const auto c = k1k2_chain(mod);
    for (std::size_t i = 0; i + 2 < mod.n; ++i) {
        CAPTURE(i);
        const auto lit = k1k2_literal_sums(mod, i);
        CHECK(c.pair[i] > 0.0);
        CHECK(c.triple[i] > 0.0);
        CHECK(lit.pair == Approx(2.0 * c.pair[i]).epsilon(1e-12));
        CHECK(lit.triple == Approx(3.0 * c.triple[i]).epsilon(1e-12));
    }
    // Short patterns cannot fit three disjoint occurrences in three blocks.
    const auto c12 = k1k2_chain(K1K2Model::iid(1, 2, 6, 0.3));
    for (double v : c12.triple) CHECK(v == 0.0);
    const auto c11 = k1k2_chain(K1K2Model::iid(1, 1, 6, 0.3));
    for (double v : c11.pair) CHECK(v == 0.0);
}

TEST_CASE("(k1,k2)-runs with certain trials vanish") {
    const auto mod = K1K2Model::iid(1, 2, 6, 1.0);
    const auto m = k1k2_moment_set(mod);
    CHECK(m.mean_w == 0.0);
    CHECK(m.var_w == 0.0);
    const auto law = law_of_sum(k1k2_sequence(mod));
    CHECK(law.size() == 1);
    CHECK(law.support_min == 0);
}

TEST_CASE("(k1,k2)-runs smoothing constants") {
    for (const auto& mod : {K1K2Model::iid(1, 1, 9, 0.3), K1K2Model::iid(1, 2, 6, 0.3)}) {
        const auto seq = k1k2_sequence(mod);
        const auto exact = oracle::exact_smoothing_constants(seq);
        for (std::size_t i = 0; i < mod.n; ++i) {
            const double c = k1k2_ci_star(mod, i);
            CAPTURE(mod.k2, i, c, exact[i]);
            CHECK(c >= 2.0 * std::sqrt(2.0) - 1e-12);
            CHECK(c >= exact[i]);
        }
    }
    // Every a-bar is a conditional probability.
    const auto mod = K1K2Model::iid(2, 1, 8, 0.4);
    for (std::size_t t = 0; t < mod.n; ++t) {
        const double v = k1k2_abar(mod, t);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_WITH(k1k2_ci_star(K1K2Model::iid(1, 2, 5, 0.3), 0), ContainsSubstring("n >= 3m"));
    K1K2Model likely{1, 1, 9, {}};
    for (std::size_t t = 0; t < 10; ++t) likely.p.push_back(t % 2 == 0 ? 0.01 : 0.99);
    CHECK_THROWS_WITH(k1k2_ci_star(likely, 0), ContainsSubstring("1/3"));
}

TEST_CASE("(k1,k2)-runs bounds dominate the exact distance") {
    {
        const auto mod = K1K2Model::iid(1, 1, 9, 0.3);
        const auto seq = k1k2_sequence(mod);
        const auto spec = fit_poisson(k1k2_moment_set(mod).mean_w);
        const auto r = k1k2_bound(mod, spec, delta_g_uniform_bound(spec));
        CHECK(r.recompute_total() == Approx(r.total).epsilon(1e-12));
        CHECK(r.total >= tv_to(seq, spec));
    }
    {
        const auto mod = K1K2Model::iid(1, 2, 9, 0.3);
        const auto seq = k1k2_sequence(mod);
        const auto m = enumerate_moments(seq);
        if (m.var_w > m.mean_w) {
            const auto spec = fit_negative_binomial(m.mean_w, m.var_w);
            const auto r = k1k2_bound(mod, spec, delta_g_uniform_bound(spec));
            CHECK(r.total >= tv_to(seq, spec));
        } else {
            // Non-overlapping patterns are under-dispersed; only the Poisson fit applies.
            CHECK_THROWS_AS(fit_negative_binomial(m.mean_w, m.var_w), UnfittableError);
            const auto spec = fit_poisson(m.mean_w);
            const auto r = k1k2_bound(mod, spec, delta_g_uniform_bound(spec));
            CHECK(r.total >= tv_to(seq, spec));
        }
    }
}
