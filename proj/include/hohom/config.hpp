#pragma once

#include "hohom/experiments.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace hohom::experiments {

namespace detail {

inline double parse_number(const std::string& key, const std::string& text) {
    const auto slash = text.find('/');
    auto one = [&](const std::string& t) {
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) throw ConfigError(key + ": not a number: '" + text + "'");
        return v;
    };
    if (slash == std::string::npos) return one(text);
    const double den = one(text.substr(slash + 1));
    if (den == 0.0) throw ConfigError(key + ": zero denominator");
    return one(text.substr(0, slash)) / den;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::istringstream is(text);
    std::vector<double> v;
    for (std::string t; is >> t;) {
        if (t.back() == ',') t.pop_back();
        if (!t.empty()) v.push_back(parse_number(key, t));
    }
    return v;
}

inline int parse_int(const std::string& key, const std::string& text) {
    const double v = parse_number(key, text);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": not an integer: '" + text + "'");
    return static_cast<int>(v);
}

inline const std::map<std::string, std::set<std::string>>& grammar() {
    static const std::map<std::string, std::set<std::string>> g = {
        {"experiment", {"kind", "seed", "eps", "out"}},
        {"preset", {"kind", "d", "m", "n", "c", "a0", "a1", "contrast", "width", "skew"}},
        {"cell", {"N", "tol", "trials", "expect_A_bar", "expect_tol"}},
        {"rates", {"domain", "forcing", "cells_per_eps", "torus_N", "value", "slope", "solve_tol", "slope_l2", "r2_min", "cert_max", "slope_w", "slope_torus"}},
        {"kernel", {"x0", "R", "constants"}},
        {"excess", {"deltas", "stability"}},
        {"probes", {"p", "spread_max", "affine"}},
    };
    return g;
}

inline void require_positive(const std::string& key, double v) {
    if (!(v > 0.0)) throw ConfigError(key + " must be positive");
}

}  // namespace detail

/// Parsed configuration plus the output directory it names.
struct ParsedConfig {
    Config config;
    std::string out;
};

/// Checks the invariants of an experiment configuration; throws ConfigError.
inline void validate(const Config& c) {
    static const std::set<std::string> kinds = {"cell", "rates", "excess", "probes"};
    if (!kinds.count(c.kind)) throw ConfigError("experiment.kind must be one of cell, rates, excess, probes");
    try {
        hohom::detail::validate(c.preset);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (c.N < 4 || c.N % 2) throw ConfigError("cell.N must be even and >= 4");
    detail::require_positive("cell.tol", c.cell_tol);
    detail::require_positive("rates.solve_tol", c.solve_tol);
    detail::require_positive("rates.cert_max", c.cert_max);
    detail::require_positive("cell.expect_tol", c.expect_tol);
    detail::require_positive("excess.stability", c.stability);
    detail::require_positive("probes.spread_max", c.spread_max);
    detail::require_positive("kernel.R", c.R);
    if (c.probe_trials < 1) throw ConfigError("cell.trials must be >= 1");
    if (c.kind == "cell") return;
    if (c.eps.empty()) throw ConfigError("experiment.eps is empty");
    for (std::size_t k = 0; k < c.eps.size(); ++k) {
        const double inv = 1.0 / c.eps[k];
        const double r = std::round(inv);
        if (!(c.eps[k] > 0.0) || std::abs(inv - r) > 1e-9 * inv) throw ConfigError("experiment.eps: 1/eps must be an integer");
        const auto n = static_cast<long long>(r);
        if ((n & (n - 1)) != 0) throw ConfigError("experiment.eps: values must be dyadic");
        if (k > 0 && !(c.eps[k] < c.eps[k - 1])) throw ConfigError("experiment.eps: values must be strictly decreasing");
    }
    if (c.kind == "rates") {
        if (c.domain != "interval" && c.domain != "torus" && c.domain != "both") throw ConfigError("rates.domain must be interval, torus or both");
        if (c.forcing != "sin" && c.forcing != "one") throw ConfigError("rates.forcing must be sin or one");
        if (c.cells_per_eps < 16) throw ConfigError("rates.cells_per_eps must be >= 16");
        if (c.torus_N < 16 || c.torus_N % 2) throw ConfigError("rates.torus_N must be even and >= 16");
    }
    if (c.kind == "excess" || c.kind == "probes") {
        if (!c.kernel.empty() && c.kernel.size() != static_cast<std::size_t>(2 * c.preset.m)) throw ConfigError("kernel.constants needs 2m entries");
    }
    if (c.kind == "excess") {
        if (c.deltas.empty()) throw ConfigError("excess.deltas is empty");
        for (double d : c.deltas)
            if (!(d > 0.0 && d <= 0.125)) throw ConfigError("excess.deltas must lie in (0, 1/8]");
    }
    if (c.kind == "probes") {
        if (c.p.empty()) throw ConfigError("probes.p is empty");
        for (double p : c.p)
            if (!(p > 2.0)) throw ConfigError("probes.p values must exceed 2");
    }
}

/// Reads the INI-style configuration: `[section]` headers, `key = value`
/// lines, `;` or `#` comments. Unknown sections or keys are errors.
inline ParsedConfig parse_config(std::istream& is) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.message() + " at line " + std::to_string(e.line()));
    }
    ParsedConfig out;
    out.out = "out";
    Config& c = out.config;
    c.kind = "";
    const auto& g = detail::grammar();
    for (const auto& [section, body] : tree) {
        const auto it = g.find(section);
        if (it == g.end()) throw ConfigError("unknown section [" + section + "]");
        if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside a section");
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
            const std::string name = section + "." + key;
            const std::string v = value.data();
            if (section == "experiment") {
                if (key == "kind") c.kind = v;
                else if (key == "seed") {
                    const double s = detail::parse_number(name, v);
                    if (s < 0 || s != std::floor(s) || s > 9.007199254740992e15) throw ConfigError(name + ": must be a nonnegative integer");
                    c.seed = static_cast<std::uint64_t>(s);
                } else if (key == "eps") c.eps = detail::parse_list(name, v);
                else if (key == "out") out.out = v;
            } else if (section == "preset") {
                if (key == "kind") c.preset.kind = v;
                else if (key == "d") c.preset.d = detail::parse_int(name, v);
                else if (key == "m") c.preset.m = detail::parse_int(name, v);
                else if (key == "n") c.preset.n = detail::parse_int(name, v);
                else if (key == "c") c.preset.c = detail::parse_number(name, v);
                else if (key == "a0") c.preset.a0 = detail::parse_number(name, v);
                else if (key == "a1") c.preset.a1 = detail::parse_number(name, v);
                else if (key == "contrast") c.preset.contrast = detail::parse_number(name, v);
                else if (key == "width") c.preset.width = detail::parse_number(name, v);
                else if (key == "skew") c.preset.skew = detail::parse_number(name, v);
            } else if (section == "cell") {
                if (key == "N") c.N = detail::parse_int(name, v);
                else if (key == "tol") c.cell_tol = detail::parse_number(name, v);
                else if (key == "trials") c.probe_trials = detail::parse_int(name, v);
                else if (key == "expect_A_bar") c.expect_A_bar = detail::parse_list(name, v);
                else if (key == "expect_tol") c.expect_tol = detail::parse_number(name, v);
            } else if (section == "rates") {
                if (key == "domain") c.domain = v;
                else if (key == "forcing") c.forcing = v;
                else if (key == "cells_per_eps") c.cells_per_eps = detail::parse_int(name, v);
                else if (key == "torus_N") c.torus_N = detail::parse_int(name, v);
                else if (key == "value" || key == "slope") {
                    const auto l = detail::parse_list(name, v);
                    if (l.size() != 2) throw ConfigError(name + ": two values expected");
                    (key == "value" ? c.value : c.slope) = {l[0], l[1]};
                } else if (key == "solve_tol") c.solve_tol = detail::parse_number(name, v);
                else if (key == "slope_l2") c.slope_l2 = detail::parse_number(name, v);
                else if (key == "r2_min") c.r2_min = detail::parse_number(name, v);
                else if (key == "cert_max") c.cert_max = detail::parse_number(name, v);
                else if (key == "slope_w") c.slope_w = detail::parse_number(name, v);
                else if (key == "slope_torus") c.slope_torus = detail::parse_number(name, v);
            } else if (section == "kernel") {
                if (key == "x0") c.x0 = detail::parse_number(name, v);
                else if (key == "R") c.R = detail::parse_number(name, v);
                else if (key == "constants") c.kernel = detail::parse_list(name, v);
            } else if (section == "excess") {
                if (key == "deltas") c.deltas = detail::parse_list(name, v);
                else if (key == "stability") c.stability = detail::parse_number(name, v);
            } else if (section == "probes") {
                if (key == "p") c.p = detail::parse_list(name, v);
                else if (key == "spread_max") c.spread_max = detail::parse_number(name, v);
                else if (key == "affine") c.affine = detail::parse_list(name, v);
            }
        }
    }
    return out;
}

inline ParsedConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path);
    return parse_config(is);
}

}  // namespace hohom::experiments
