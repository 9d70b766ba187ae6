#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gblab/coefficients/regularity.hpp"
#include "gblab/core/errors.hpp"
#include "gblab/geometry/registry.hpp"
#include "gblab/xray/image.hpp"

namespace gblab::cli {

inline const std::vector<std::string>& experiment_tags() {
    static const std::vector<std::string> tags{"trace", "beam", "superpose", "xray", "wave", "observability", "sweep"};
    return tags;
}

inline const std::vector<std::string>& sweep_targets() {
    static const std::vector<std::string> t{"beam-residual", "quasimode", "wave-error"};
    return t;
}

struct ExperimentConfig {
    std::string experiment;
    std::string metric = "euclidean";
    std::string domain = "interval";
    std::string alpha = "constant";
    std::string phantom = "gauss";
    /// Sweep quantity.
    std::string target = "beam-residual";
    /// Source for superpose: bump or one.
    std::string f = "bump";
    /// Superpose operator: normal or modified.
    std::string op = "normal";
    /// Wave initial data: mode:<k> or bump.
    std::string initial = "mode:1";

    double h = 1.0 / 64;
    std::vector<double> h_values;
    double epsilon = 0.5;
    double dt = 1e-3;
    double T = 1.0;
    int nodes = 200;
    int n_angles = 180;
    int n_offsets = 129;
    int image = 128;
    double cfl = 0.45;
    int m = 0;
    int ensemble = 10;
    int random_draws = 0;
    /// y-quadrature spacing; 0 selects sqrt(h)/8.
    double spacing = 0.0;
    std::vector<double> z;
    std::vector<double> direction;
    unsigned seed = 1;
    std::string output = "run";
    bool serial = true;
    /// Requested checks, name -> threshold.
    nlohmann::json assertions = nlohmann::json::object();

    std::vector<double> h_list() const { return h_values.empty() ? std::vector<double>{h} : h_values; }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
    return {{"experiment", c.experiment}, {"metric", c.metric},     {"domain", c.domain},
            {"alpha", c.alpha},           {"phantom", c.phantom},   {"target", c.target},
            {"f", c.f},                   {"operator", c.op},       {"initial", c.initial},
            {"h", c.h},                   {"h_values", c.h_values}, {"epsilon", c.epsilon},
            {"dt", c.dt},                 {"T", c.T},               {"nodes", c.nodes},
            {"n_angles", c.n_angles},     {"n_offsets", c.n_offsets}, {"image", c.image},
            {"cfl", c.cfl},               {"m", c.m},               {"ensemble", c.ensemble},
            {"random_draws", c.random_draws}, {"spacing", c.spacing}, {"z", c.z},
            {"direction", c.direction},   {"seed", c.seed},         {"output", c.output},
            {"serial", c.serial},         {"assert", c.assertions}};
}

/// Strict parse: unknown keys and wrong types raise ConfigError.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known{"experiment", "metric",  "domain",       "alpha",   "phantom",  "target",
                                             "f",          "operator", "initial",     "h",       "h_values", "epsilon",
                                             "dt",         "T",        "nodes",       "n_angles", "n_offsets", "image",
                                             "cfl",        "m",        "ensemble",    "random_draws", "spacing", "z",
                                             "direction",  "seed",     "output",      "serial",  "assert"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
    if (!j.contains("experiment")) throw ConfigError("config needs an 'experiment'");
    ExperimentConfig c;
    auto get = [&j](const char* key, auto& out) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(out);
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(std::string("bad type for '") + key + "'");
        }
    };
    get("experiment", c.experiment);
    get("metric", c.metric);
    get("domain", c.domain);
    get("alpha", c.alpha);
    get("phantom", c.phantom);
    get("target", c.target);
    get("f", c.f);
    get("operator", c.op);
    get("initial", c.initial);
    get("h", c.h);
    get("h_values", c.h_values);
    get("epsilon", c.epsilon);
    get("dt", c.dt);
    get("T", c.T);
    get("nodes", c.nodes);
    get("n_angles", c.n_angles);
    get("n_offsets", c.n_offsets);
    get("image", c.image);
    get("cfl", c.cfl);
    get("m", c.m);
    get("ensemble", c.ensemble);
    get("random_draws", c.random_draws);
    get("spacing", c.spacing);
    get("z", c.z);
    get("direction", c.direction);
    get("seed", c.seed);
    get("output", c.output);
    get("serial", c.serial);
    if (j.contains("assert")) {
        if (!j["assert"].is_object()) throw ConfigError("'assert' must be an object");
        c.assertions = j["assert"];
    }
    return c;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config '" + path + "'");
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

struct Diagnostic {
    std::string level;
    std::string code;
    std::string message;
};

inline nlohmann::json to_json(const std::vector<Diagnostic>& d) {
    auto a = nlohmann::json::array();
    for (const auto& x : d) a.push_back({{"level", x.level}, {"code", x.code}, {"message", x.message}});
    return a;
}

inline bool has_errors(const std::vector<Diagnostic>& d) {
    for (const auto& x : d)
        if (x.level == "error") return true;
    return false;
}

/// Resolved fixtures of a config.
struct Fixtures {
    DomainSpec domain;
    MetricField metric;
    CoefficientField alpha;
};

inline Fixtures resolve_fixtures(const ExperimentConfig& c) {
    const DomainSpec d = domain_from_id(c.domain);
    return {d, metric_from_id(c.metric, d.dim), coefficient_from_id(c.alpha, d.dim)};
}

/// Points on a coarse lattice inside the domain.
inline std::vector<Vec> domain_samples(const DomainSpec& d, int per_axis = 9) {
    const double lo = d.kind == DomainKind::unit_ball ? -1.0 : d.lo, hi = d.kind == DomainKind::unit_ball ? 1.0 : d.hi;
    std::vector<Vec> out;
    const auto ax = linspace(lo, hi, per_axis + 2);
    std::vector<int> idx(static_cast<std::size_t>(d.dim), 1);
    while (true) {
        Vec x(d.dim);
        for (int k = 0; k < d.dim; ++k) x(k) = ax[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        if (d.inside(x)) out.push_back(x);
        int k = 0;
        while (k < d.dim && ++idx[static_cast<std::size_t>(k)] == per_axis + 1) idx[static_cast<std::size_t>(k++)] = 1;
        if (k == d.dim) break;
    }
    return out;
}

/// Static checks without running the experiment.
inline std::vector<Diagnostic> validate(const ExperimentConfig& c) {
    std::vector<Diagnostic> out;
    auto err = [&out](std::string code, std::string msg) { out.push_back({"error", std::move(code), std::move(msg)}); };
    auto warn = [&out](std::string code, std::string msg) { out.push_back({"warning", std::move(code), std::move(msg)}); };

    const auto& tags = experiment_tags();
    if (std::find(tags.begin(), tags.end(), c.experiment) == tags.end()) {
        err("experiment", "unknown experiment '" + c.experiment + "'");
        return out;
    }
    const bool wave_like = c.experiment == "wave" || c.experiment == "observability";

    for (double h : c.h_list())
        if (!(h > 0.0 && h < 1.0)) err("range", "h must lie in (0, 1)");
    if (c.experiment == "sweep" && c.h_values.size() < 2) err("range", "sweep needs at least two h_values");
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) err("range", "epsilon must lie in (0, 1)");
    if (!(c.dt > 0.0)) err("range", "dt must be positive");
    if (!(c.T > 0.0)) err("range", "T must be positive");
    if (c.nodes < 3) err("range", "nodes must be at least 3");
    if (c.n_angles < 2 || c.n_offsets < 2) err("range", "n_angles and n_offsets must be at least 2");
    if (c.image < 8) err("range", "image must be at least 8");
    if (c.m < 0) err("range", "m must be non-negative");
    if (c.ensemble < 1) err("range", "ensemble must be at least 1");
    if (c.random_draws < 0) err("range", "random_draws must be non-negative");
    if (!(c.cfl > 0.0 && c.cfl <= 0.5)) err("cfl", "cfl " + std::to_string(c.cfl) + " is infeasible, need 0 < cfl <= 0.5");
    if (c.spacing < 0.0) err("range", "spacing must be non-negative");
    if (c.experiment == "sweep") {
        const auto& t = sweep_targets();
        if (std::find(t.begin(), t.end(), c.target) == t.end()) err("target", "unknown sweep target '" + c.target + "'");
    }
    if (c.experiment == "superpose") {
        if (c.f != "bump" && c.f != "one") err("fixture", "unknown source f '" + c.f + "'");
        if (c.op != "normal" && c.op != "modified") err("fixture", "unknown operator '" + c.op + "'");
    }
    if (c.experiment == "beam" || c.experiment == "superpose" || c.experiment == "sweep") {
        for (double h : c.h_list())
            if (c.spacing > 0.0 && h > 0.0 && c.spacing > std::sqrt(h) / 8.0 + 1e-15)
                err("resolution", "spacing " + std::to_string(c.spacing) + " does not resolve h = " + std::to_string(h) +
                                      " (need <= sqrt(h)/8)");
    }
    if (c.experiment == "xray") {
        try {
            phantom_from_id(c.phantom);
        } catch (const std::exception& e) {
            err("fixture", e.what());
        }
        return out;
    }

    Fixtures fx;
    try {
        fx = resolve_fixtures(c);
    } catch (const ConfigError& e) {
        err("fixture", e.what());
        return out;
    }
    if (fx.metric.dim() != fx.domain.dim) {
        err("fixture", "metric and domain dimensions differ");
        return out;
    }
    if (c.z.size() && static_cast<int>(c.z.size()) != fx.domain.dim) err("range", "z has the wrong dimension");
    if (c.direction.size() && static_cast<int>(c.direction.size()) != fx.domain.dim) err("range", "direction has the wrong dimension");
    if (wave_like || c.experiment == "sweep") {
        if (fx.domain.kind == DomainKind::unit_ball) err("fixture", "wave grids need an interval or a rectangle");
        if (c.experiment == "observability" && fx.domain.dim != 1) err("fixture", "observability ladders are 1-D");
        if (c.experiment == "sweep" && c.target != "beam-residual" && fx.domain.dim != 1) err("fixture", "ansatz sweeps are 1-D");
    }

    // Assumption 1 spot check
    if (wave_like || c.experiment == "sweep") {
        const auto pts = domain_samples(fx.domain);
        try {
            check_hyperbolic(fx.alpha, pts);
        } catch (const DomainError& e) {
            err("assumption", e.what());
        }
        if (!monotonicity_check(fx.alpha, fx.metric, pts).holds)
            warn("assumption", "monotonicity (x alpha)' > 0 fails at a sample point");
    }
    if (wave_like) {
        try {
            const double Ta = travel_time(fx.alpha, fx.metric, fx.domain, 2 * fx.domain.dim + 1);
            if (!(c.T > 2.0 * Ta)) warn("time", "T <= 2T_alpha (2T_alpha = " + std::to_string(2.0 * Ta) + ")");
        } catch (const std::exception& e) {
            err("time", std::string("travel time: ") + e.what());
        }
    }
    return out;
}

} // namespace gblab::cli
