// psdstein: reproduce the comparison table, evaluate bounds on model files,
// and cross-check everything against exact oracles.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psdstein/io.hpp"
#include "psdstein/oracle.hpp"
#include "psdstein/psdstein.hpp"

namespace {

using namespace psdstein;
using io::json;

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_usage = 2;

struct UsageError : Error {
    using Error::Error;
};

std::string fmt(double v, int precision) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

void line(const std::string& key, const std::string& value) { std::printf("%-14s %s\n", key.c_str(), value.c_str()); }

// ---------------------------------------------------------------------------
// table1

struct Table1Config {
    bool check = false;
    std::string format = "text";
    int precision = 6;
    double perturb = 0.0;
};

int cmd_table1(const Table1Config& cfg) {
    auto rows = table1();
    for (auto& r : rows) r.closed_form += cfg.perturb;

    if (cfg.format == "csv") {
        std::printf("n,p,closed_form,brown_xia\n");
        for (const auto& r : rows)
            std::printf("%zu,%.2f,%s,%s\n", r.n, r.p, fmt(r.closed_form, cfg.precision).c_str(),
                        fmt(r.brown_xia, cfg.precision).c_str());
    } else if (cfg.format == "json") {
        json out = json::array();
        for (const auto& r : rows)
            out.push_back({{"n", r.n}, {"p", r.p}, {"closed_form", r.closed_form}, {"brown_xia", r.brown_xia}});
        std::printf("%s\n", out.dump(2).c_str());
    } else {
        std::printf("%4s  %5s  %12s  %12s\n", "n", "p", "closed-form", "Brown-Xia");
        for (const auto& r : rows)
            std::printf("%4zu  %5.2f  %12s  %12s\n", r.n, r.p, fmt(r.closed_form, cfg.precision).c_str(),
                        fmt(r.brown_xia, cfg.precision).c_str());
    }

    if (!cfg.check) return exit_ok;
    int bad = 0;
    for (const auto& r : rows) {
        if (r.matches()) continue;
        ++bad;
        std::fprintf(stderr, "mismatch at n = %zu, p = %.2f: closed-form %s (expected %s), Brown-Xia %s (expected %s)\n",
                     r.n, r.p, fixed6(r.closed_form).c_str(), r.expected_closed_form, fixed6(r.brown_xia).c_str(),
                     r.expected_brown_xia);
    }
    if (bad > 0) {
        std::fprintf(stderr, "%d of %zu cells differ\n", bad, rows.size());
        return exit_check_failed;
    }
    std::fprintf(stderr, "all %zu cells match to 6 decimals\n", rows.size());
    return exit_ok;
}

// ---------------------------------------------------------------------------
// Shared model plumbing

struct ModelConfig {
    std::string model_file;
    std::uint64_t max_outcomes = default_max_outcomes;
    std::size_t samples = 200'000;
    std::uint64_t seed = 0x5eed;
};

MomentOptions moment_options(const ModelConfig& cfg) {
    MomentOptions o;
    o.max_outcomes = cfg.max_outcomes;
    o.samples = cfg.samples;
    o.seed = cfg.seed;
    return o;
}

bool enumerable(const DependentSequence& seq, std::uint64_t max_outcomes) {
    return seq.enumerate && seq.outcome_count <= max_outcomes;
}

std::optional<PMFTable> exact_law(const io::Model& model, const DependentSequence& seq, std::uint64_t max_outcomes) {
    if (model.two_runs) return oracle::dp_distribution(oracle::RunAutomaton::two_runs(), model.two_runs->p);
    if (model.k1k2)
        return oracle::dp_distribution(oracle::RunAutomaton::k1k2_runs(model.k1k2->k1, model.k1k2->k2),
                                       model.k1k2->p);
    if (enumerable(seq, max_outcomes)) return law_of_sum(seq, max_outcomes);
    return std::nullopt;
}

PanjerPSD fit_target(const std::string& how, const MomentSet& m) {
    if (how == "nb") return fit_negative_binomial(m.mean_w, m.var_w);
    if (how == "poisson") return fit_poisson(m.mean_w);
    throw UsageError("--fit must be nb or poisson (got '" + how + "')");
}

PanjerPSD load_target(const std::string& path) {
    const auto fam = io::family_from_json(io::load_json_file(path));
    if (const auto* p = std::get_if<PanjerPSD>(&fam)) return *p;
    throw UsageError("bounds need a Panjer-class target; '" + path + "' is a general series family");
}

// d1 with the model's own smoothing constants.
BoundReport model_d1(const io::Model& model, const DependentSequence& seq, const MomentSet& m,
                     const PanjerPSD& spec, double dg, std::uint64_t max_outcomes) {
    if (model.two_runs) return two_runs_bound(*model.two_runs, spec, dg);
    if (model.k1k2) return k1k2_bound(*model.k1k2, spec, dg);
    return bound_d1(m, smoothing_exact(seq, max_outcomes), spec, dg);
}

// ---------------------------------------------------------------------------
// bound

struct BoundConfig {
    ModelConfig model;
    std::string target_file;
    std::string fit;
    std::string variant = "min";
    std::string format = "text";
    int precision = 12;
};

int cmd_bound(const BoundConfig& cfg) {
    if (cfg.target_file.empty() == cfg.fit.empty()) throw UsageError("give exactly one of --target FILE or --fit nb|poisson");
    const auto variant = parse_variant(cfg.variant);
    const auto model = io::model_from_json(io::load_json_file(cfg.model.model_file));
    const auto seq = model.sequence();
    const auto mopt = moment_options(cfg.model);

    RunsBoundReport report;
    PanjerPSD spec;
    if (variant == BoundVariant::closed_form) {
        const auto p = model.iid_p();
        if (!model.two_runs || !p) throw UsageError("the closed-form bound applies to iid two-runs models only");
        if (cfg.fit != "nb") throw UsageError("the closed-form bound uses the moment-matched negative binomial; pass --fit nb");
        report = nb_bound_closed_form_report(model.n(), *p);
        report.brown_xia = brown_xia_bound(model.n(), *p);
        spec = nb_moment_match_2runs(model.n(), *p);
    } else {
        const auto m = compute_moments(seq, mopt);
        spec = cfg.fit.empty() ? load_target(cfg.target_file) : fit_target(cfg.fit, m);
        const double dg = delta_g_uniform_bound(spec);
        switch (variant) {
        case BoundVariant::theorem31:
            if (!enumerable(seq, cfg.model.max_outcomes))
                throw UsageError("the theorem variant needs an enumerable model; use d1 or d2");
            static_cast<BoundReport&>(report) =
                theorem31_bound(m, oracle::exact_conditional_terms(seq, cfg.model.max_outcomes), spec, dg);
            break;
        case BoundVariant::d1:
            static_cast<BoundReport&>(report) = model_d1(model, seq, m, spec, dg, cfg.model.max_outcomes);
            break;
        case BoundVariant::d2: static_cast<BoundReport&>(report) = bound_d2(m, spec, dg); break;
        case BoundVariant::crude:
            static_cast<BoundReport&>(report) = bound_crude(m, spec, g_sup_norm(spec), dg);
            break;
        case BoundVariant::min:
            static_cast<BoundReport&>(report) =
                best_bound(model_d1(model, seq, m, spec, dg, cfg.model.max_outcomes), bound_d2(m, spec, dg));
            break;
        case BoundVariant::closed_form: break;
        }
    }

    std::optional<double> tv;
    if (const auto law = exact_law(model, seq, cfg.model.max_outcomes))
        tv = exact_tv(*law, pmf_panjer_auto(spec, 1e-16)).upper;
    const char* dominates = !tv ? "unknown" : *tv <= report.upper() ? "yes" : "no";

    if (cfg.format == "json") {
        json j = io::to_json(report);
        j["model"] = model.kind;
        j["target"] = io::to_json(spec);
        j["exact_tv"] = tv ? json(*tv) : json(nullptr);
        j["dominates"] = dominates;
        std::printf("%s\n", j.dump(2).c_str());
        return exit_ok;
    }
    if (cfg.format == "csv") {
        std::printf("%s,exact_tv,dominates\n", io::csv_header().c_str());
        std::printf("%s,%s,%s\n", io::csv_row(report, cfg.precision).c_str(),
                    tv ? fmt(*tv, cfg.precision).c_str() : "", dominates);
        return exit_ok;
    }
    const int pr = cfg.precision;
    line("model", model.kind);
    line("n", std::to_string(model.n()));
    line("target", "panjer a = " + fmt(spec.a, pr) + ", b = " + fmt(spec.b, pr));
    line("variant", std::string(to_string(report.variant)));
    line("delta_g", fmt(report.delta_g_factor, pr));
    line("|1-b|", fmt(report.one_minus_b_abs, pr));
    line("quadratic", fmt(report.term_quadratic, pr));
    line("linear", fmt(report.term_linear, pr));
    line("tau_term", fmt(report.term_tau, pr));
    if (report.variant == BoundVariant::crude) line("g_norm", fmt(report.g_norm, pr));
    if (report.c_constant) line("c", fmt(*report.c_constant, pr));
    if (report.d1_total) line("d1", fmt(*report.d1_total, pr));
    if (report.d2_total) line("d2", fmt(*report.d2_total, pr));
    line("total", fmt(report.total, pr));
    if (report.slack > 0.0) line("slack", fmt(report.slack, pr));
    if (report.brown_xia) line("brown_xia", fmt(*report.brown_xia, pr));
    line("exact_tv", tv ? fmt(*tv, pr) : "unavailable");
    line("dominates", dominates);
    return exit_ok;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyConfig {
    ModelConfig model;
    double perturb_abar2 = 0.0;
};

class Checklist {
public:
    void pass(const std::string& name, const std::string& detail) { emit("PASS", name, detail); }
    void fail(const std::string& name, const std::string& detail) {
        ++failures_;
        emit("FAIL", name, detail);
    }
    void skip(const std::string& name, const std::string& detail) { emit("SKIP", name, detail); }
    void expect(bool ok, const std::string& name, const std::string& detail) {
        ok ? pass(name, detail) : fail(name, detail);
    }
    // Runs a check; precondition errors turn it into a skip.
    void attempt(const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const PreconditionError& e) {
            skip(name, e.what());
        }
    }
    int failures() const { return failures_; }

private:
    static void emit(const char* tag, const std::string& name, const std::string& detail) {
        std::printf("[%s] %-26s %s\n", tag, name.c_str(), detail.c_str());
    }
    int failures_ = 0;
};

double max_moment_gap(const MomentSet& a, const MomentSet& b) {
    double gap = std::max(std::abs(a.mean_w - b.mean_w), std::abs(a.var_w - b.var_w));
    for (std::size_t i = 0; i < a.n(); ++i) {
        const auto& x = a.at[i];
        const auto& y = b.at[i];
        for (double d : {x.mean - y.mean, x.mean_n1 - y.mean_n1, x.cross_n1 - y.cross_n1, x.bracket - y.bracket,
                         x.cross_bracket - y.cross_bracket, x.linear - y.linear})
            gap = std::max(gap, std::abs(d));
    }
    return gap;
}

int cmd_verify(const VerifyConfig& cfg) {
    const auto model = io::model_from_json(io::load_json_file(cfg.model.model_file));
    const auto seq = model.sequence();
    const auto max = cfg.model.max_outcomes;
    if (!enumerable(seq, max))
        throw UsageError("verify needs an enumerable model (" + std::to_string(model.n()) +
                         " summands exceed --max-outcomes)");
    Checklist checks;
    constexpr double tol = 1e-12;

    const auto exact = enumerate_moments(seq, max);
    auto closed = model.closed_form_moments();
    for (auto& v : closed.at) v.cross_bracket += cfg.perturb_abar2;
    const double gap = max_moment_gap(closed, exact);
    checks.expect(gap <= tol, "moments", "closed form vs enumeration, max gap " + sci(gap));

    const auto law = law_of_sum(seq, max);
    if (model.two_runs || model.k1k2) {
        const auto dp = *exact_law(model, seq, max);
        const double d = exact_tv(dp, law).value;
        checks.expect(d <= tol, "dp-law", "automaton DP vs enumeration, TV " + sci(d));
    } else {
        checks.skip("dp-law", "no automaton for this model");
    }
    const double vgap = std::abs(exact.variance_from_neighborhoods() - law.variance());
    checks.expect(vgap <= 1e-10, "variance-identity", "neighbourhood form vs law, gap " + sci(vgap));

    if (!(exact.mean_w > 0.0)) {
        checks.skip("bounds", "the sum is identically zero");
        std::printf("%d failure(s)\n", checks.failures());
        return checks.failures() == 0 ? exit_ok : exit_check_failed;
    }
    const PanjerPSD spec =
        exact.var_w > exact.mean_w ? fit_negative_binomial(exact.mean_w, exact.var_w) : fit_poisson(exact.mean_w);
    const double dg = delta_g_uniform_bound(spec);
    const double tv = exact_tv(law, pmf_panjer_auto(spec, 1e-16)).upper;
    std::printf("target: %s fit, exact TV %s\n", spec.b == 0.0 ? "poisson" : "negative-binomial", fmt(tv, 12).c_str());

    auto dominate = [&](const std::string& name, const BoundReport& r) {
        checks.expect(tv <= r.upper(), name, "bound " + fmt(r.total, 12) + " vs TV " + fmt(tv, 12));
    };
    const auto cond = oracle::exact_conditional_terms(seq, max);
    const auto exact_c = oracle::exact_smoothing_constants(seq, max);
    std::optional<BoundReport> t31;
    checks.attempt("theorem31>=tv", [&] {
        t31 = theorem31_bound(exact, cond, spec, dg);
        dominate("theorem31>=tv", *t31);
    });
    const auto d2 = bound_d2(exact, spec, dg);
    dominate("d2>=tv", d2);
    dominate("crude>=tv", bound_crude(exact, spec, g_sup_norm(spec), dg));

    const auto d1x = bound_d1(exact, smoothing_exact(seq, max), spec, dg);
    dominate("d1[exact-c]>=tv", d1x);
    if (t31) checks.expect(t31->total <= d1x.total * (1 + tol), "theorem31<=d1[exact-c]", fmt(t31->total, 12) + " <= " + fmt(d1x.total, 12));

    checks.attempt("d1>=tv", [&] {
        const auto d1 = model_d1(model, seq, exact, spec, dg, max);
        dominate("d1>=tv", d1);
        dominate("min>=tv", best_bound(d1, d2));
        double worst = INFINITY;
        for (std::size_t i = 0; i < seq.n; ++i) worst = std::min(worst, d1.smoothing[i] - exact_c[i]);
        checks.expect(worst >= -tol, "c_i>=conditional-D", "min margin " + fmt(worst, 6));
    });

    std::printf("%d failure(s)\n", checks.failures());
    return checks.failures() == 0 ? exit_ok : exit_check_failed;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleConfig {
    ModelConfig model;
    std::optional<std::size_t> conditional;
    int precision = 12;
};

int cmd_oracle(const OracleConfig& cfg) {
    const auto model = io::model_from_json(io::load_json_file(cfg.model.model_file));
    const auto seq = model.sequence();
    const auto max = cfg.model.max_outcomes;
    const int pr = cfg.precision;
    const auto law = exact_law(model, seq, max);
    if (!law) throw UsageError("no exact distribution: the model is too large to enumerate");

    std::printf("# distribution of W (%s, n = %zu)\n", model.kind.c_str(), model.n());
    for (std::size_t k = law->support_min; k <= law->top(); ++k) std::printf("%-4zu %s\n", k, fmt(law->at(k), pr).c_str());
    line("mean", fmt(law->mean(), pr));
    line("variance", fmt(law->variance(), pr));
    if (enumerable(seq, max) && (model.two_runs || model.k1k2))
        line("tv(dp, enum)", fmt(exact_tv(*law, law_of_sum(seq, max)).value, pr));

    if (law->mean() > 0.0) {
        const double mean = law->mean(), var = law->variance();
        line("tv(poisson)", fmt(exact_tv(*law, pmf_panjer_auto(fit_poisson(mean), 1e-16)).upper, pr));
        if (var > mean)
            line("tv(nb)", fmt(exact_tv(*law, pmf_panjer_auto(fit_negative_binomial(mean, var), 1e-16)).upper, pr));
    }

    if (cfg.conditional) {
        const std::size_t i = *cfg.conditional;
        if (i < 1 || i > model.n()) throw UsageError("--conditional takes a 1-based index in 1.." + std::to_string(model.n()));
        if (!enumerable(seq, max)) throw UsageError("--conditional needs an enumerable model");
        const std::pair<oracle::Conditioning, const char*> kinds[] = {{oracle::Conditioning::n2, "N2"},
                                                                      {oracle::Conditioning::n1_n2, "N1,N2"},
                                                                      {oracle::Conditioning::even, "even"},
                                                                      {oracle::Conditioning::odd, "odd"}};
        for (const auto& [how, label] : kinds) {
            std::printf("# D(W | %s), i = %zu\n", label, i);
            for (const auto& [key, D] : oracle::exact_conditional_D(seq, i - 1, how, max)) {
                std::string k;
                for (int v : key) k += (k.empty() ? "" : ",") + std::to_string(v);
                std::printf("  (%s) %s\n", k.c_str(), fmt(D, pr).c_str());
            }
        }
    }
    return exit_ok;
}

void add_model_options(CLI::App* sub, ModelConfig& m) {
    sub->add_option("--model", m.model_file, "model JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--max-outcomes", m.max_outcomes, "largest outcome space to enumerate")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stein-method total-variation bounds for sums of dependent summands"};
    app.require_subcommand(1);

    Table1Config t1;
    auto* table = app.add_subcommand("table1", "closed-form NB bound vs Brown-Xia for iid 2-runs");
    table->add_flag("--check", t1.check, "compare against the stored 6-decimal values");
    table->add_option("--format", t1.format)->check(CLI::IsMember({"text", "csv", "json"}))->capture_default_str();
    table->add_option("--precision", t1.precision)->capture_default_str();
    table->add_option("--perturb", t1.perturb, "offset added to the closed-form column")->group("");

    BoundConfig bc;
    auto* bound = app.add_subcommand("bound", "evaluate a bound variant on a model");
    add_model_options(bound, bc.model);
    auto* target = bound->add_option("--target", bc.target_file, "target family JSON file")->check(CLI::ExistingFile);
    bound->add_option("--fit", bc.fit, "moment-match the target")
        ->check(CLI::IsMember({"nb", "poisson"}))
        ->excludes(target);
    bound->add_option("--variant", bc.variant)
        ->check(CLI::IsMember({"theorem", "theorem31", "d1", "d2", "crude", "min", "closed-form"}))
        ->capture_default_str();
    bound->add_option("--format", bc.format)->check(CLI::IsMember({"text", "csv", "json"}))->capture_default_str();
    bound->add_option("--precision", bc.precision)->capture_default_str();
    bound->add_option("--samples", bc.model.samples, "Monte-Carlo draws when moments cannot be enumerated")
        ->capture_default_str();
    bound->add_option("--seed", bc.model.seed, "Monte-Carlo seed")->capture_default_str();

    VerifyConfig vc;
    auto* verify = app.add_subcommand("verify", "cross-check closed forms and bounds against exact oracles");
    add_model_options(verify, vc.model);
    verify->add_option("--perturb-abar2", vc.perturb_abar2)->group("");

    OracleConfig oc;
    std::size_t conditional = 0;
    auto* orc = app.add_subcommand("oracle", "exact distribution and conditional D values");
    add_model_options(orc, oc.model);
    auto* cond = orc->add_option("--conditional", conditional, "1-based index for conditional D values");
    orc->add_option("--precision", oc.precision)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (table->parsed()) return cmd_table1(t1);
        if (bound->parsed()) return cmd_bound(bc);
        if (verify->parsed()) return cmd_verify(vc);
        if (orc->parsed()) {
            if (cond->count() > 0) oc.conditional = conditional;
            return cmd_oracle(oc);
        }
    } catch (const MeanMismatchError& e) {
        std::fprintf(stderr, "error: %s (use --fit to moment-match the target)\n", e.what());
        return exit_usage;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    }
    return exit_usage;
}
