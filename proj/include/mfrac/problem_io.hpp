#pragma once

// Problem-file loading: a single flat JSON object with keys
//   alpha, beta, coefficients, forcing?, initial?, lower_limit?, quad?
// Unknown keys are rejected; every constraint failure names the field.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mfrac/homogeneous.hpp"
#include "mfrac/mexpr.hpp"

namespace mfrac {

class problem_format_error : public std::runtime_error {
public:
    problem_format_error(const std::string& field, const std::string& reason)
        : std::runtime_error("problem file: field '" + field + "': " + reason), field_(field) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number()) throw problem_format_error(field, "must be a number");
    return j.get<double>();
}

} // namespace detail

inline ProblemSpec problem_from_json(const nlohmann::json& root) {
    if (!root.is_object()) throw problem_format_error("<root>", "must be a JSON object");

    static const std::vector<std::string> known = {"alpha", "beta", "coefficients", "forcing",
                                                   "initial", "lower_limit", "quad"};
    for (const auto& [key, value] : root.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw problem_format_error(key, "unknown key");
        }
    }
    for (const char* required : {"alpha", "beta", "coefficients"}) {
        if (!root.contains(required)) throw problem_format_error(required, "missing required key");
    }

    ProblemSpec spec;
    spec.alpha = detail::require_number(root["alpha"], "alpha");
    spec.beta = detail::require_number(root["beta"], "beta");

    const nlohmann::json& coeffs = root["coefficients"];
    if (!coeffs.is_array() || coeffs.empty()) throw problem_format_error("coefficients", "must be a non-empty array");
    for (const auto& c : coeffs) spec.p.push_back(detail::require_number(c, "coefficients"));

    if (root.contains("initial")) {
        const nlohmann::json& init = root["initial"];
        if (!init.is_object()) throw problem_format_error("initial", "must be an object");
        for (const auto& [key, value] : init.items()) {
            (void)value;
            if (key != "t0" && key != "values") throw problem_format_error("initial." + key, "unknown key");
        }
        if (!init.contains("t0") || !init.contains("values")) {
            throw problem_format_error("initial", "requires t0 and values");
        }
        InitialData data;
        data.t0 = detail::require_number(init["t0"], "initial.t0");
        if (!init["values"].is_array()) throw problem_format_error("initial.values", "must be an array");
        for (const auto& v : init["values"]) data.values.push_back(detail::require_number(v, "initial.values"));
        spec.initial = std::move(data);
    }

    if (root.contains("lower_limit")) spec.lower_limit = detail::require_number(root["lower_limit"], "lower_limit");

    if (root.contains("quad")) {
        const nlohmann::json& q = root["quad"];
        if (!q.is_object()) throw problem_format_error("quad", "must be an object");
        for (const auto& [key, value] : q.items()) {
            (void)value;
            if (key != "abs_tol" && key != "rel_tol" && key != "max_depth") {
                throw problem_format_error("quad." + key, "unknown key");
            }
        }
        if (q.contains("abs_tol")) spec.quad.abs_tol = detail::require_number(q["abs_tol"], "quad.abs_tol");
        if (q.contains("rel_tol")) spec.quad.rel_tol = detail::require_number(q["rel_tol"], "quad.rel_tol");
        if (q.contains("max_depth")) {
            const double d = detail::require_number(q["max_depth"], "quad.max_depth");
            spec.quad.max_depth = static_cast<int>(d);
        }
    }

    // Forcing is parsed with the file's alpha, so alpha must validate first.
    try {
        spec.validate();
    } catch (const validation_error& e) {
        throw problem_format_error("<validation>", e.what());
    }
    if (root.contains("forcing")) {
        if (!root["forcing"].is_string()) throw problem_format_error("forcing", "must be a string");
        const std::string text = root["forcing"].get<std::string>();
        spec.forcing = parse_expr(text, spec.alpha); // parse_error propagates with its offset
        spec.validate();
    }
    return spec;
}

inline ProblemSpec load_problem(const std::string& path) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw problem_format_error("<file>", "cannot stat '" + path + "'");
    if (size > 64 * 1024) throw problem_format_error("<file>", "file exceeds 64 KiB");

    std::ifstream in(path);
    if (!in) throw problem_format_error("<file>", "cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();

    nlohmann::json root;
    try {
        root = nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw problem_format_error("<json>", e.what());
    }
    return problem_from_json(root);
}

} // namespace mfrac
