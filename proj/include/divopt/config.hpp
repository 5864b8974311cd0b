#pragma once

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "divopt/errors.hpp"
#include "divopt/model.hpp"

namespace divopt {

/// Parses a flat key-value configuration (JSON text) into RawParams.
/// Keys are exactly r, mu, sigma, alpha, beta, gamma, lambda, rho, p,
/// delta, eta. lambda may be omitted (defaults to 0); everything else is
/// mandatory. Unknown keys are rejected.
inline RawParams parse_config(const std::string& text, const std::string& origin = "<config>") {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!j.is_object())
        throw ConfigError(origin + ": expected a flat key-value object");

    static const std::set<std::string> known = {"r",   "mu",  "sigma", "alpha", "beta", "gamma",
                                                "lambda", "rho", "p",  "delta", "eta"};
    for (const auto& [key, val] : j.items()) {
        if (!known.count(key))
            throw ConfigError(origin + ": unknown key \"" + key + "\"");
        if (!val.is_number())
            throw ConfigError(origin + ": key \"" + key + "\" must be numeric");
    }

    RawParams out;
    auto need = [&](const char* key) -> double {
        if (!j.contains(key))
            throw ConfigError(origin + ": missing mandatory key \"" + std::string(key) + "\"");
        return j.at(key).get<double>();
    };
    out.r = need("r");
    out.mu = need("mu");
    out.sigma = need("sigma");
    out.alpha = need("alpha");
    out.beta = need("beta");
    out.gamma = need("gamma");
    out.lambda = j.contains("lambda") ? j.at("lambda").get<double>() : 0.0;
    out.rho = need("rho");
    out.p = need("p");
    out.delta = need("delta");
    out.eta = need("eta");
    return out;
}

inline RawParams load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text, path);
}

} // namespace divopt
