#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "surge_lab/best_response.hpp"
#include "surge_lab/earnings.hpp"
#include "surge_lab/errors.hpp"
#include "surge_lab/ic_pricing.hpp"
#include "surge_lab/model.hpp"
#include "surge_lab/simulator.hpp"
#include "surge_lab/sweep.hpp"

// JSON conversion for configs and results. Parsing failures surface as ConfigError.

namespace surge_lab::json_io {

using nlohmann::json;

namespace detail {

inline double number(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
    return v.get<double>();
}

inline double number_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? number(j, key) : fallback;
}

inline std::vector<double> numbers(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(std::string("key '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw ConfigError(std::string("key '") + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

/// inf has no JSON literal; encode it as the string "inf".
inline json finite_or_string(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

}  // namespace detail

inline TripDist dist_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("trip distribution must be an object");
    const auto family = j.value("family", std::string("weibull"));
    try {
        if (family == "weibull") {
            const double shape = detail::number(j, "shape");
            if (j.contains("mean")) return TripDist::weibull_with_mean(shape, detail::number(j, "mean"));
            return TripDist::weibull(shape, detail::number(j, "scale"));
        }
        if (family == "table") return TripDist::table(detail::numbers(j, "edges"), detail::numbers(j, "probabilities"));
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("invalid trip distribution: ") + e.what());
    }
    throw ConfigError("unknown trip distribution family '" + family + "'");
}

inline json to_json(const TripDist& d) {
    if (d.is_weibull()) return {{"family", "weibull"}, {"shape", d.as_weibull().shape}, {"scale", d.as_weibull().scale}};
    return {{"family", "table"}, {"edges", d.as_table().edges}, {"probabilities", d.as_table().probabilities}};
}

inline PricingSpec pricing_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("pricing must be an object");
    const auto family = j.value("family", std::string("multiplicative"));
    try {
        if (family == "multiplicative") return Multiplicative{detail::number_or(j, "m", 1.0)};
        if (family == "affine") return Affine{detail::number(j, "m"), detail::number(j, "a")};
        if (family == "ic_form") return ICForm{detail::number(j, "m"), detail::number(j, "z")};
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("invalid pricing: ") + e.what());
    }
    throw ConfigError("unknown pricing family '" + family + "'");
}

inline json to_json(const PricingSpec& w) {
    json j{{"family", to_string(w.family())}, {"m", w.m()}};
    if (w.family() == PricingFamily::Affine) j["a"] = w.offset();
    if (w.family() == PricingFamily::ICForm) j["z"] = w.offset();
    return j;
}

/**
 * Instance keys: lambda_1, lambda_2, lambda_12, lambda_21, dist_1, dist_2
 * (or a shared "dist"), pricing_1, pricing_2 (default multiplicative m = 1).
 * An optional "calibrate": {"mode", "R_1", "R_2"} replaces both pricings.
 */
inline ModelPrimitives primitives_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("instance must be a JSON object");
    ModelPrimitives p;
    p.lambda_1 = detail::number(j, "lambda_1");
    p.lambda_2 = detail::number(j, "lambda_2");
    p.lambda_12 = detail::number(j, "lambda_12");
    p.lambda_21 = detail::number(j, "lambda_21");
    if (j.contains("dist")) p.dist_1 = p.dist_2 = dist_from_json(j.at("dist"));
    if (j.contains("dist_1")) p.dist_1 = dist_from_json(j.at("dist_1"));
    if (j.contains("dist_2")) p.dist_2 = dist_from_json(j.at("dist_2"));
    if (!j.contains("dist") && !(j.contains("dist_1") && j.contains("dist_2")))
        throw ConfigError("instance needs 'dist' or both 'dist_1' and 'dist_2'");
    if (j.contains("pricing_1")) p.pricing_1 = pricing_from_json(j.at("pricing_1"));
    if (j.contains("pricing_2")) p.pricing_2 = pricing_from_json(j.at("pricing_2"));
    try {
        p.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    if (j.contains("calibrate")) {
        const auto& c = j.at("calibrate");
        const auto mode = pricing_mode_from_string(c.value("mode", std::string("multiplicative")));
        const auto cal = calibrate(p, mode, detail::number(c, "R_1"), detail::number(c, "R_2"));
        if (!cal.feasible) throw ConfigError("calibration targets are infeasible for mode " + to_string(mode));
        p = cal.primitives;
    }
    return p;
}

inline json to_json(const ModelPrimitives& p) {
    return {{"lambda_1", p.lambda_1}, {"lambda_2", p.lambda_2}, {"lambda_12", p.lambda_12},
            {"lambda_21", p.lambda_21}, {"dist_1", to_json(p.dist_1)}, {"dist_2", to_json(p.dist_2)},
            {"pricing_1", to_json(p.pricing_1)}, {"pricing_2", to_json(p.pricing_2)}};
}

inline json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in '" + path + "': " + e.what());
    }
}

inline json to_json(const StateAggregates& a) {
    return {{"f_sigma", a.f_sigma}, {"t_tilde", a.t_tilde}, {"q_tilde", a.q_tilde}, {"w_tilde", a.w_tilde}, {"rate", a.rate}};
}

inline json to_json(const EarningsBreakdown& b) {
    return {{"total_rate", b.total_rate},
            {"per_state_rate", b.per_state_rate},
            {"mu", b.occupancy},
            {"accepted_fraction", b.accepted_fraction},
            {"aggregates", {to_json(b.aggregates[0]), to_json(b.aggregates[1])}}};
}

inline json to_json(const PolicyPair& pp) { return {{"sigma_1", to_string(pp.sigma_1)}, {"sigma_2", to_string(pp.sigma_2)}}; }

inline json to_json(const StructuralForm& f) {
    json j{{"kind", to_string(f.kind)}};
    if (f.parameter_count() >= 1) j["a"] = detail::finite_or_string(f.a);
    if (f.parameter_count() == 2) j["b"] = detail::finite_or_string(f.b);
    return j;
}

inline json to_json(const BestResponseResult& r) {
    return {{"policy_pair", to_json(r.policy_pair)},
            {"forms", {to_json(r.forms[0]), to_json(r.forms[1])}},
            {"rate", r.rate},
            {"max_rate", r.max_rate},
            {"accept_all_rate", r.accept_all_rate},
            {"accepted_fractions", r.accepted_fractions},
            {"is_accept_all", r.is_accept_all},
            {"rounds", r.rounds},
            {"mu", r.breakdown.occupancy}};
}

inline json to_json(const OpenInterval& i) { return json::array({i.lo, i.hi}); }

inline json to_json(const ICConstruction& c) {
    return {{"feasibility", to_string(c.feasibility)},
            {"w_1", to_json(c.w_1)},
            {"w_2", to_json(c.w_2)},
            {"C", c.C},
            {"ratio", c.target_r1 / c.target_r2},
            {"z1_interval", to_json(c.z1_interval)},
            {"z2_ratio_interval", to_json(c.z2_ratio_interval)},
            {"rho", c.rho}};
}

inline json to_json(const CertificatePoint& p) {
    return {{"state", index_of(p.state) + 1}, {"u", p.u}, {"policy_pair", to_json(p.policies)}, {"r", p.r}};
}

inline json to_json(const CertificateReport& r) {
    json j{{"certified", r.certified()},
           {"min_r", detail::finite_or_string(r.min_r)},
           {"argmin", to_json(r.argmin)},
           {"evaluations", r.evaluations},
           {"policies_checked", r.policies_checked}};
    j["first_violation"] = r.first_violation ? to_json(*r.first_violation) : json(nullptr);
    return j;
}

inline json to_json(const SimResult& s) {
    return {{"rate_mean", s.rate_mean},
            {"rate_ci_halfwidth", s.rate_ci_halfwidth},
            {"mu_mean", s.mu_mean},
            {"mu_ci_halfwidth", s.mu_ci_halfwidth},
            {"n_trips_accepted", s.n_trips_accepted},
            {"n_requests", s.n_requests},
            {"n_world_transitions", s.n_world_transitions},
            {"starved", s.starved},
            {"total_earnings", s.total_earnings},
            {"open_time", s.open_time},
            {"trip_time", s.trip_time}};
}

/// Values from either a list or {"start", "stop", "count"} (linear) / {"start", "stop", "count", "log": true}.
inline std::vector<double> values_from_json(const json& j) {
    if (j.is_array()) {
        std::vector<double> v;
        for (const auto& x : j) {
            if (!x.is_number()) throw ConfigError("axis values must be numbers");
            v.push_back(x.get<double>());
        }
        return v;
    }
    if (!j.is_object()) throw ConfigError("axis values must be a list or a range object");
    const double a = detail::number(j, "start"), b = detail::number(j, "stop");
    const int n = static_cast<int>(detail::number(j, "count"));
    if (n < 1) throw ConfigError("range count must be >= 1");
    const bool log = j.value("log", false);
    if (log && !(a > 0.0 && b > 0.0)) throw ConfigError("log ranges need positive endpoints");
    std::vector<double> v;
    for (int k = 0; k < n; ++k) {
        const double f = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
        v.push_back(log ? a * std::pow(b / a, f) : a + (b - a) * f);
    }
    return v;
}

/**
 * {"base": instance, "axes": [{"param", "values"}], "pricing_mode": name or list,
 *  "targets": {"R_1", "R_2"}, "fix_nonsurge_accept_all", "delta", "threads", "output"}
 */
inline SweepConfig sweep_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("sweep config must be an object");
    if (!j.contains("base")) throw ConfigError("sweep config needs 'base'");
    SweepConfig cfg;
    cfg.base = primitives_from_json(j.at("base"));
    if (!j.contains("axes") || !j.at("axes").is_array() || j.at("axes").empty())
        throw ConfigError("sweep config needs a nonempty 'axes' list");
    for (const auto& a : j.at("axes")) {
        if (!a.contains("param") || !a.at("param").is_string()) throw ConfigError("each axis needs a 'param' name");
        if (!a.contains("values")) throw ConfigError("each axis needs 'values'");
        cfg.axes.push_back({a.at("param").get<std::string>(), values_from_json(a.at("values"))});
    }
    if (j.contains("pricing_mode")) {
        const auto& m = j.at("pricing_mode");
        cfg.modes.clear();
        if (m.is_string()) cfg.modes.push_back(pricing_mode_from_string(m.get<std::string>()));
        else if (m.is_array())
            for (const auto& x : m) cfg.modes.push_back(pricing_mode_from_string(x.get<std::string>()));
        else throw ConfigError("pricing_mode must be a string or a list");
    }
    if (j.contains("targets")) {
        cfg.r1 = detail::number_or(j.at("targets"), "R_1", cfg.r1);
        cfg.r2 = detail::number_or(j.at("targets"), "R_2", cfg.r2);
    }
    cfg.fix_nonsurge_accept_all = j.value("fix_nonsurge_accept_all", false);
    cfg.search.delta = detail::number_or(j, "delta", cfg.search.delta);
    cfg.output_path = j.value("output", std::string());
    const double threads = detail::number_or(j, "threads", 0.0);
    if (threads < 0 || threads != std::floor(threads)) throw ConfigError("'threads' must be a nonnegative integer");
    cfg.threads = static_cast<int>(threads);
    return cfg;
}

}  // namespace surge_lab::json_io
