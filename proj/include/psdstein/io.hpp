#pragma once

// JSON forms of families, models, tables and reports.

#include <cstddef>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "psdstein/bound.hpp"
#include "psdstein/error.hpp"
#include "psdstein/pmf.hpp"
#include "psdstein/psd.hpp"
#include "psdstein/runs.hpp"
#include "psdstein/sequence.hpp"

namespace psdstein::io {

using nlohmann::json;

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw PreconditionError("'" + path + "' is not valid JSON: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Families.
//
// {"family": "panjer", "a": .., "b": .., "max_support": ..}
// {"family": "series", "theta": .., "coeffs": [..]}
// Named shorthands: poisson {lambda}, negative-binomial {alpha, p},
// binomial {n, p}.

using Family = std::variant<PanjerPSD, PSDSpec>;

namespace detail {

inline double num(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw PreconditionError(std::string("missing numeric field '") + key + "'");
    return j.at(key).get<double>();
}

inline std::size_t count(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<long long>() < 0)
        throw PreconditionError(std::string("missing non-negative integer field '") + key + "'");
    return j.at(key).get<std::size_t>();
}

} // namespace detail

inline Family family_from_json(const json& j) {
    if (!j.is_object() || !j.contains("family")) throw PreconditionError("family JSON needs a \"family\" field");
    const auto kind = j.at("family").get<std::string>();
    if (kind == "panjer") {
        std::optional<std::size_t> top;
        if (j.contains("max_support") && !j.at("max_support").is_null()) top = detail::count(j, "max_support");
        return make_panjer(detail::num(j, "a"), detail::num(j, "b"), top);
    }
    if (kind == "series") {
        if (!j.contains("coeffs") || !j.at("coeffs").is_array())
            throw PreconditionError("series family needs a \"coeffs\" array");
        return make_series(detail::num(j, "theta"), j.at("coeffs").get<std::vector<double>>());
    }
    if (kind == "poisson") return poisson(detail::num(j, "lambda"));
    if (kind == "negative-binomial") return negative_binomial(detail::num(j, "alpha"), detail::num(j, "p"));
    if (kind == "binomial") return binomial(detail::count(j, "n"), detail::num(j, "p"));
    throw PreconditionError("unknown family '" + kind + "'");
}

inline json to_json(const PanjerPSD& s) {
    json j{{"family", "panjer"}, {"a", s.a}, {"b", s.b}};
    j["max_support"] = s.max_support ? json(*s.max_support) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// Models.
//
// {"model": "two-runs", "p": [..]}            n + 1 trial probabilities
// {"model": "two-runs", "n": N, "p": x}        iid shorthand
// {"model": "k1k2-runs", "k1": .., "k2": .., "n": N, "p": [..] | x}
// {"model": "custom-bernoulli-product", "p": [..]}

struct Model {
    std::string kind;
    std::optional<TwoRunsModel> two_runs;
    std::optional<K1K2Model> k1k2;
    std::vector<double> bernoulli;

    DependentSequence sequence() const {
        if (two_runs) return two_runs_sequence(*two_runs);
        if (k1k2) return k1k2_sequence(*k1k2);
        auto seq = bernoulli_product(bernoulli);
        const auto p = bernoulli;
        seq.closed_form_moments = [p] {
            ChainMoments c;
            c.single = p;
            c.pair.assign(p.size(), 0.0);
            c.triple.assign(p.size(), 0.0);
            for (std::size_t j = 0; j + 1 < p.size(); ++j) c.pair[j] = p[j] * p[j + 1];
            for (std::size_t j = 0; j + 2 < p.size(); ++j) c.triple[j] = p[j] * p[j + 1] * p[j + 2];
            return chain_moment_set(c);
        };
        return seq;
    }

    // Closed-form moments when the model has them.
    MomentSet closed_form_moments() const { return sequence().closed_form_moments(); }

    std::size_t n() const {
        if (two_runs) return two_runs->n();
        if (k1k2) return k1k2->n;
        return bernoulli.size();
    }

    // iid success probability, if every trial shares one.
    std::optional<double> iid_p() const {
        const std::vector<double>& p = two_runs ? two_runs->p : k1k2 ? k1k2->p : bernoulli;
        if (p.empty()) return std::nullopt;
        for (double v : p)
            if (v != p.front()) return std::nullopt;
        return p.front();
    }
};

inline Model model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("model")) throw PreconditionError("model JSON needs a \"model\" field");
    Model m;
    m.kind = j.at("model").get<std::string>();
    auto probs = [&](std::size_t expected) -> std::vector<double> {
        if (!j.contains("p")) throw PreconditionError("model JSON needs \"p\"");
        const auto& p = j.at("p");
        if (p.is_number()) {
            if (expected == 0) throw PreconditionError("a scalar \"p\" needs \"n\"");
            return std::vector<double>(expected, p.get<double>());
        }
        if (!p.is_array()) throw PreconditionError("\"p\" must be a number or an array");
        auto v = p.get<std::vector<double>>();
        if (expected != 0 && v.size() != expected)
            throw PreconditionError("\"p\" has " + std::to_string(v.size()) + " entries, expected " +
                                    std::to_string(expected));
        return v;
    };
    if (m.kind == "two-runs") {
        const std::size_t trials = j.contains("n") ? detail::count(j, "n") + 1 : 0;
        m.two_runs = TwoRunsModel{probs(trials)};
        m.two_runs->validate();
    } else if (m.kind == "k1k2-runs") {
        K1K2Model k;
        k.k1 = detail::count(j, "k1");
        k.k2 = detail::count(j, "k2");
        k.n = detail::count(j, "n");
        if (k.k1 < 1 || k.k2 < 1) throw PreconditionError("k1 and k2 must be >= 1");
        k.p = probs((k.n + 1) * k.m());
        k.validate();
        m.k1k2 = std::move(k);
    } else if (m.kind == "custom-bernoulli-product") {
        m.bernoulli = probs(j.contains("n") ? detail::count(j, "n") : 0);
        if (m.bernoulli.empty()) throw PreconditionError("custom-bernoulli-product needs at least one summand");
        for (double v : m.bernoulli)
            if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError("probabilities must lie in [0, 1]");
    } else {
        throw PreconditionError("unknown model '" + m.kind + "'");
    }
    return m;
}

// ---------------------------------------------------------------------------
// Tables and reports.

inline json to_json(const PMFTable& t) {
    return json{{"support_min", t.support_min}, {"masses", t.masses}, {"tail", t.tail_mass_bound}};
}

inline json to_json(const BoundReport& r) {
    json j{{"variant", std::string(to_string(r.variant))},
           {"n", r.n},
           {"delta_g_factor", r.delta_g_factor},
           {"one_minus_b_abs", r.one_minus_b_abs},
           {"term_quadratic", r.term_quadratic},
           {"term_linear", r.term_linear},
           {"term_tau", r.term_tau},
           {"tau", r.tau},
           {"sum_means", r.sum_means},
           {"total", r.total},
           {"slack", r.slack}};
    if (r.variant == BoundVariant::crude) j["g_norm"] = r.g_norm;
    if (!r.smoothing.empty()) j["smoothing"] = r.smoothing;
    if (r.d1_total) j["d1_total"] = *r.d1_total;
    if (r.d2_total) j["d2_total"] = *r.d2_total;
    return j;
}

inline json to_json(const RunsBoundReport& r) {
    json j = to_json(static_cast<const BoundReport&>(r));
    if (!r.moment_terms.empty()) j["moment_terms"] = r.moment_terms;
    if (r.c_constant) j["c_constant"] = *r.c_constant;
    if (r.brown_xia) j["brown_xia"] = *r.brown_xia;
    return j;
}

inline std::string csv_header() { return "variant,n,total,slack"; }

inline std::string csv_row(const BoundReport& r, int precision = 12) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s,%zu,%.*f,%.*f", std::string(to_string(r.variant)).c_str(), r.n, precision,
                  r.total, precision, r.slack);
    return buf;
}

} // namespace psdstein::io
