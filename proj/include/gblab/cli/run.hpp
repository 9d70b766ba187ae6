#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gblab/beams/beam.hpp"
#include "gblab/cli/config.hpp"
#include "gblab/cli/svg.hpp"
#include "gblab/superposition/family.hpp"
#include "gblab/superposition/normal.hpp"
#include "gblab/wave/ansatz.hpp"
#include "gblab/wave/observability.hpp"
#include "gblab/wave/solver.hpp"
#include "gblab/xray/riesz.hpp"
#include "gblab/xray/transform.hpp"

namespace gblab::cli {

inline constexpr const char* code_version = "gblab 0.1.0";
inline constexpr const char* output_root_env = "GBLAB_OUTPUT_ROOT";

enum ExitCode : int { exit_pass = 0, exit_assertion = 1, exit_config = 2, exit_numerical = 3 };

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    nlohmann::json threshold;
};

struct RunManifest {
    nlohmann::json config;
    std::string code_version;
    double wall_time_s = 0.0;
    std::vector<std::string> outputs;
    std::vector<CheckResult> checks;
    std::vector<Diagnostic> diagnostics;
    nlohmann::json metrics = nlohmann::json::object();
    std::string status = "pass";
    std::string error;
    int exit_code = exit_pass;
    std::string directory;
};

inline nlohmann::json to_json(const RunManifest& m) {
    auto checks = nlohmann::json::array();
    for (const auto& c : m.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}});
    return {{"config", m.config},   {"code_version", m.code_version}, {"wall_time_s", m.wall_time_s},
            {"outputs", m.outputs}, {"checks", checks},               {"diagnostics", to_json(m.diagnostics)},
            {"metrics", m.metrics}, {"status", m.status},             {"error", m.error},
            {"exit_code", m.exit_code}};
}

/// Output directory: $GBLAB_OUTPUT_ROOT/<output> when the variable is set, <output> otherwise.
inline std::filesystem::path output_directory(const std::string& output) {
    const char* root = std::getenv(output_root_env);
    if (root && *root) return std::filesystem::path(root) / output;
    return std::filesystem::path(output);
}

/// Collects output files and summary metrics of one run.
class RunContext {
public:
    explicit RunContext(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

    std::string file(const std::string& name) {
        outputs_.push_back(name);
        return (dir_ / name).string();
    }

    void write_json(const std::string& name, const nlohmann::json& j) {
        std::ofstream os(file(name));
        os << j.dump(2) << "\n";
    }

    void metric(const std::string& name, double v) { metrics_[name] = v; }

    const std::vector<std::string>& outputs() const { return outputs_; }
    const nlohmann::json& metrics() const { return metrics_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> outputs_;
    nlohmann::json metrics_ = nlohmann::json::object();
};

/// Assertion keys are <metric>_<op> with op in max, min, gt, lt, range.
inline std::vector<CheckResult> evaluate_assertions(const nlohmann::json& assertions, const nlohmann::json& metrics) {
    static const std::vector<std::string> ops{"_range", "_max", "_min", "_gt", "_lt"};
    std::vector<CheckResult> out;
    for (const auto& [key, thr] : assertions.items()) {
        std::string op, name;
        for (const auto& o : ops)
            if (key.size() > o.size() && key.compare(key.size() - o.size(), o.size(), o) == 0) {
                op = o;
                name = key.substr(0, key.size() - o.size());
                break;
            }
        if (op.empty()) throw ConfigError("assertion '" + key + "' has no _max/_min/_gt/_lt/_range suffix");
        if (!metrics.contains(name)) throw ConfigError("assertion '" + key + "' names an unknown metric '" + name + "'");
        const double v = metrics[name].get<double>();
        bool ok = false;
        try {
            if (op == "_range") ok = v >= thr.at(0).get<double>() && v <= thr.at(1).get<double>();
            else if (op == "_max") ok = v <= thr.get<double>();
            else if (op == "_min") ok = v >= thr.get<double>();
            else if (op == "_gt") ok = v > thr.get<double>();
            else ok = v < thr.get<double>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("assertion '" + key + "' has a malformed threshold");
        }
        out.push_back({key, ok, v, thr});
    }
    return out;
}

namespace detail {

inline Vec vec_or(const std::vector<double>& v, const Vec& fallback) {
    if (v.empty()) return fallback;
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Vec domain_centre(const DomainSpec& d) {
    return d.kind == DomainKind::unit_ball ? Vec(Vec::Zero(d.dim)) : Vec(Vec::Constant(d.dim, 0.5 * (d.lo + d.hi)));
}

inline double box_lo(const DomainSpec& d) { return d.kind == DomainKind::unit_ball ? -1.0 : d.lo; }
inline double box_hi(const DomainSpec& d) { return d.kind == DomainKind::unit_ball ? 1.0 : d.hi; }

/// exp(-|x - c|^2 / 0.05) with c at 60% of the box in every coordinate.
inline ScalarFn bump_source(const DomainSpec& d) {
    const Vec c = Vec::Constant(d.dim, box_lo(d) + 0.6 * (box_hi(d) - box_lo(d)));
    return [c](const Vec& x) { return std::exp(-(x - c).squaredNorm() / 0.05); };
}

inline BeamFamily line_family(const MetricField& metric, const DomainSpec& d, const Vec& xi, double h, double T, double dt) {
    const int nz = static_cast<int>(std::ceil((box_hi(d) - box_lo(d)) / (std::sqrt(h) / 4.0))) + 1;
    FamilyOptions opt;
    opt.T = T;
    opt.dt = dt;
    return build_family(metric, [](const Vec&) { return cplx(1.0); }, InitialPhase::linear(xi),
                        uniform_grid(Vec::Constant(d.dim, box_lo(d)), Vec::Constant(d.dim, box_hi(d)), nz), h, opt);
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header, const std::vector<std::vector<double>>& cols) {
    std::ofstream os(path);
    os.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    const std::size_t rows = cols.empty() ? 0 : cols.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c][r];
        os << "\n";
    }
}

} // namespace detail

/// Values of one sweep point, keyed by quantity name.
using SweepPoint = std::map<std::string, double>;

/// One h of a sweep target, independent of every other point.
inline SweepPoint sweep_point(const ExperimentConfig& c, double h) {
    const Fixtures fx = resolve_fixtures(c);
    const int n = fx.domain.dim;
    const Vec eta = detail::vec_or(c.direction, unit_vector(n, 0));
    if (c.target == "beam-residual") {
        BeamOptions bo;
        bo.dt = c.dt;
        bo.T = c.T;
        const Beam b = propagate_beam(fx.metric, detail::vec_or(c.z, detail::domain_centre(fx.domain)), eta, h, 1.0, bo,
                                      CutoffSpec::none(h));
        const auto stride = static_cast<std::size_t>(std::max(1.0, std::round(0.05 / c.dt)));
        return {{"residual_sq", residual_time_integral(b, stride)}};
    }
    const auto fam = detail::line_family(fx.metric, fx.domain, eta, h, c.T, c.dt);
    const WaveGrid grid = WaveGrid::on(fx.domain, c.nodes);
    const ScalarFn f = detail::bump_source(fx.domain);
    const auto an = build_lifted_ansatz(fam, f, c.T, c.epsilon, fx.alpha, grid, 33);
    if (c.target == "quasimode") {
        const auto q = quasimode_residual(an, fx.alpha, fx.metric, default_test_bumps(), h1_norm(f, fx.metric, grid));
        return {{"normalized_residual", q.normalized}, {"max_residual", q.max_residual}, {"bound", q.bound}};
    }
    WaveOptions wo;
    wo.cfl = c.cfl;
    const LaplaceBeltrami L(fx.metric, grid);
    const double f_l2 = std::sqrt(l2_sq(L, grid.sample(f)));
    const auto e = wave_error_decomposition(an, fx.alpha, fx.metric, c.T, default_test_bumps(), f_l2, wo);
    return {{"pairing_value", e.pairing_value}, {"pairing_gradient", e.pairing_gradient}, {"rhs_gain", e.rhs_gain},
            {"source_norm", e.source_norm}};
}

namespace experiments {

inline void trace(const ExperimentConfig& c, RunContext& ctx) {
    const Fixtures fx = resolve_fixtures(c);
    const int n = fx.domain.dim;
    const Vec z = detail::vec_or(c.z, detail::domain_centre(fx.domain));
    const Vec dir = detail::vec_or(c.direction, unit_vector(n, 0));
    const Ray ray = hamiltonian_flow(fx.metric, {z, unit_covector(fx.metric, z, dir)}, c.dt, c.T, fx.domain);
    {
        std::ofstream os(ctx.file("ray.csv"));
        write_ray_csv(os, ray);
    }
    Series s{"x(t)", {}, {}};
    for (const auto& r : ray.samples) {
        s.x.push_back(n == 1 ? r.t : r.x(0));
        s.y.push_back(n == 1 ? r.x(0) : r.x(1));
    }
    write_line_plot(ctx.file("ray.svg"), "ray " + c.metric, {s}, false, false, n == 1 ? "t" : "x1", n == 1 ? "x1" : "x2");
    const double H0 = hamiltonian(fx.metric, ray.samples.front().x, ray.samples.front().p);
    const double H1 = hamiltonian(fx.metric, ray.samples.back().x, ray.samples.back().p);
    ctx.metric("exit_time", ray.exit_time ? *ray.exit_time : -1.0);
    ctx.metric("exited", ray.exit_time ? 1.0 : 0.0);
    ctx.metric("transversal", ray.exit_transversal ? 1.0 : 0.0);
    ctx.metric("hamiltonian_drift", std::abs(H1 - H0) / H0);
    ctx.write_json("summary.json", ctx.metrics());
}

inline void beam(const ExperimentConfig& c, RunContext& ctx) {
    const Fixtures fx = resolve_fixtures(c);
    const int n = fx.domain.dim;
    BeamOptions bo;
    bo.dt = c.dt;
    bo.T = c.T;
    const Beam b = propagate_beam(fx.metric, detail::vec_or(c.z, detail::domain_centre(fx.domain)),
                                  detail::vec_or(c.direction, unit_vector(n, 0)), c.h, 1.0, bo, CutoffSpec::tube(c.h, 0.5));
    {
        std::ofstream os(ctx.file("beam.jsonl"));
        os.precision(17);
        write_beam_jsonl(os, b);
    }
    Series lkk{"det(Im M) |det Y|^2", {}, {}}, im{"min eig Im M", {}, {}};
    double drift = 0.0, min_im = 1e300, L0 = 0.0;
    for (const auto& s : b.states) {
        const double v = s.M.imag().determinant() * std::norm(s.Y.determinant());
        if (lkk.x.empty()) L0 = v;
        drift = std::max(drift, std::abs(v - L0) / std::abs(L0));
        const double e = min_eig_imag(s.M);
        min_im = std::min(min_im, e);
        lkk.x.push_back(s.t);
        lkk.y.push_back(v);
        im.x.push_back(s.t);
        im.y.push_back(e);
    }
    write_line_plot(ctx.file("beam.svg"), "beam invariants", {lkk, im}, false, false, "t", "value");
    ctx.metric("lkk_drift", drift);
    ctx.metric("min_im_m", min_im);
    ctx.metric("final_t", b.t_end());
    ctx.write_json("summary.json", ctx.metrics());
}

inline void superpose(const ExperimentConfig& c, RunContext& ctx) {
    const Fixtures fx = resolve_fixtures(c);
    const int n = fx.domain.dim;
    const auto fam = detail::line_family(fx.metric, fx.domain, detail::vec_or(c.direction, unit_vector(n, 0)), c.h, c.T, c.dt);
    QuadratureGrid y = family_y_grid(fam, c.T);
    if (c.spacing > 0.0) {
        Vec lo = y.points.front(), hi = y.points.back();
        const int ny = static_cast<int>(std::ceil((hi - lo).maxCoeff() / c.spacing)) + 1;
        y = uniform_grid(lo, hi, std::max(ny, 2));
    }
    const ScalarFn f = c.f == "one" ? ScalarFn([](const Vec&) { return 1.0; }) : detail::bump_source(fx.domain);
    NormalOperatorSample s;
    if (c.op == "modified") {
        ModifiedNormalOptions mo;
        mo.epsilon = c.epsilon;
        s = apply_modified_normal(fam, f, c.T, fx.alpha, mo, y);
    } else {
        s = apply_QstarQ(fam, f, c.T, y);
    }
    write_sample_csv(ctx.file("normal.csv"), s);
    std::vector<double> mag;
    double l2 = 0.0, mx = 0.0;
    for (std::size_t j = 0; j < s.values.size(); ++j) {
        mag.push_back(std::abs(s.values[j]));
        l2 += fam.K.weights[j] * std::norm(s.values[j]);
        mx = std::max(mx, mag.back());
    }
    if (n == 1) {
        Series se{"|Q*Q f|", {}, mag};
        for (const auto& z : s.z) se.x.push_back(z(0));
        write_line_plot(ctx.file("normal.svg"), c.op + " operator", {se}, false, false, "z", "|value|");
    } else if (n == 2) {
        const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(mag.size()))));
        write_heatmap(ctx.file("normal.svg"), c.op + " operator", mag, side, side);
    }
    ctx.metric("beams", static_cast<double>(fam.size()));
    ctx.metric("max_abs", mx);
    ctx.metric("l2", std::sqrt(l2));
    ctx.metric("normalization", s.normalization);
    ctx.metric("c1", fam.c1);
    ctx.metric("c2", fam.c2);
    ctx.write_json("summary.json", ctx.metrics());
}

inline void xray(const ExperimentConfig& c, RunContext& ctx) {
    const Phantom p = phantom_from_id(c.phantom);
    const Sinogram g = xray_forward_euclid(p.fn, uniform_angles(static_cast<std::size_t>(c.n_angles)),
                                           uniform_offsets(static_cast<std::size_t>(c.n_offsets)));
    write_sinogram_csv(ctx.file("sinogram.csv"), g);
    write_heatmap(ctx.file("sinogram.svg"), "sinogram " + c.phantom, g.values, g.n_angles(), g.n_offsets());
    const Image rec = reconstruct(g, 0.0, c.image);
    const Image truth = rasterize(p.fn, c.image);
    write_heatmap(ctx.file("reconstruction.svg"), "reconstruction " + c.phantom, rec.values, static_cast<std::size_t>(rec.n),
                  static_cast<std::size_t>(rec.n));
    ctx.metric("roundtrip_error", relative_l2(rec, truth));
    ctx.metric("support_warning", g.support_warning ? 1.0 : 0.0);
    ctx.write_json("roundtrip.json", ctx.metrics());
}

inline std::vector<double> initial_field(const ExperimentConfig& c, const WaveGrid& grid, const DomainSpec& d) {
    std::vector<double> u;
    if (c.initial.rfind("mode:", 0) == 0) {
        int k = 0;
        try {
            k = std::stoi(c.initial.substr(5));
        } catch (const std::exception&) {
            throw ConfigError("bad initial '" + c.initial + "'");
        }
        if (k < 1) throw ConfigError("mode index must be positive");
        const double lo = d.lo, len = d.hi - d.lo;
        u = grid.sample([&](const Vec& x) {
            double v = 1.0;
            for (int i = 0; i < x.size(); ++i) v *= std::sin(k * pi * (x(i) - lo) / len);
            return v;
        });
    } else if (c.initial == "bump") {
        u = grid.sample(detail::bump_source(d));
    } else {
        throw ConfigError("unknown initial '" + c.initial + "'");
    }
    for (std::size_t k = 0; k < u.size(); ++k)
        if (grid.on_boundary(k)) u[k] = 0.0;
    return u;
}

inline void wave(const ExperimentConfig& c, RunContext& ctx) {
    const Fixtures fx = resolve_fixtures(c);
    const WaveGrid grid = WaveGrid::on(fx.domain, c.nodes);
    WaveOptions wo;
    wo.cfl = c.cfl;
    const auto u0 = initial_field(c, grid, fx.domain);
    const auto sol = solve_wave(fx.alpha, fx.metric, grid, u0, std::vector<double>(grid.size(), 0.0), c.T, wo);
    write_trace_csv(ctx.file("trace.csv"), sol.trace);
    detail::write_csv(ctx.file("energy.csv"), {"t", "energy"}, {sol.energy_times, sol.energy});
    write_line_plot(ctx.file("energy.svg"), "discrete energy", {{"E", sol.energy_times, sol.energy}}, false, false, "t", "E");
    ctx.metric("energy_drift", sol.energy_drift());
    ctx.metric("trace_norm_sq", sol.trace.norm_sq());
    ctx.metric("dt", sol.dt);
    ctx.metric("steps", static_cast<double>(sol.steps));
    ctx.write_json("summary.json", ctx.metrics());
}

inline void observability(const ExperimentConfig& c, RunContext& ctx) {
    const Fixtures fx = resolve_fixtures(c);
    const WaveGrid grid = WaveGrid::on(fx.domain, c.nodes);
    const auto lad = eigenmode_ladder(fx.alpha, fx.metric, grid, c.ensemble);
    auto ens = eigenmode_ensemble(lad);
    for (auto& d : random_band_limited_data(lad, c.random_draws, c.seed)) ens.push_back(std::move(d));
    WaveOptions wo;
    wo.cfl = c.cfl;
    const auto rep = observability_ratio(fx.alpha, fx.metric, fx.domain, grid, ens, c.T, c.m, wo);
    ctx.write_json("report.json", to_json(rep));
    Series s{"r(k)", {}, {}};
    for (const auto& e : rep.ensemble)
        if (e.k > 0) {
            s.x.push_back(e.k);
            s.y.push_back(e.ratio);
        }
    write_line_plot(ctx.file("ratio_vs_k.svg"), "observability ratio, alpha = " + c.alpha, {s}, true, true, "k", "ratio");
    ctx.metric("min_ratio", rep.min_ratio);
    ctx.metric("median_ratio", rep.median_ratio);
    ctx.metric("k_slope", rep.k_slope);
    ctx.metric("time_condition", rep.time_condition ? 1.0 : 0.0);
    ctx.metric("max_energy_drift", rep.max_energy_drift);
}

inline void sweep(const ExperimentConfig& c, RunContext& ctx) {
    const auto hs = c.h_list();
    std::vector<SweepPoint> pts(hs.size());
    if (c.serial) {
        for (std::size_t i = 0; i < hs.size(); ++i) pts[i] = sweep_point(c, hs[i]);
    } else {
        std::vector<std::future<SweepPoint>> fut;
        for (double h : hs) fut.push_back(std::async(std::launch::async, [&c, h] { return sweep_point(c, h); }));
        for (std::size_t i = 0; i < hs.size(); ++i) pts[i] = fut[i].get();
    }
    nlohmann::json values = nlohmann::json::object(), slopes = nlohmann::json::object();
    std::vector<std::string> header{"h"};
    std::vector<std::vector<double>> cols{hs};
    std::vector<Series> plot;
    for (const auto& [name, v0] : pts.front()) {
        (void)v0;
        std::vector<double> ys;
        for (const auto& p : pts) ys.push_back(p.at(name));
        values[name] = ys;
        const double sl = loglog_slope(hs, ys);
        slopes[name] = sl;
        ctx.metric("slope_" + name, sl);
        header.push_back(name);
        cols.push_back(ys);
        plot.push_back({name, hs, ys});
    }
    ctx.metric("slope", slopes.begin().value().get<double>());
    ctx.write_json("sweep.json", {{"target", c.target}, {"h", hs}, {"values", values}, {"slopes", slopes}});
    detail::write_csv(ctx.file("sweep.csv"), header, cols);
    write_line_plot(ctx.file("sweep.svg"), "sweep " + c.target, plot, true, true, "h", "value");
}

} // namespace experiments

inline void dispatch(const ExperimentConfig& c, RunContext& ctx) {
    if (c.experiment == "trace") return experiments::trace(c, ctx);
    if (c.experiment == "beam") return experiments::beam(c, ctx);
    if (c.experiment == "superpose") return experiments::superpose(c, ctx);
    if (c.experiment == "xray") return experiments::xray(c, ctx);
    if (c.experiment == "wave") return experiments::wave(c, ctx);
    if (c.experiment == "observability") return experiments::observability(c, ctx);
    if (c.experiment == "sweep") return experiments::sweep(c, ctx);
    throw ConfigError("unknown experiment '" + c.experiment + "'");
}

inline void write_manifest(const RunManifest& m) {
    std::filesystem::create_directories(m.directory);
    std::ofstream os(std::filesystem::path(m.directory) / "manifest.json");
    os << to_json(m).dump(2) << "\n";
}

/// Validates, dispatches, evaluates assertions and writes manifest.json (also on failure).
inline RunManifest run(const ExperimentConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    RunManifest m;
    m.config = to_json(c);
    m.code_version = code_version;
    m.directory = output_directory(c.output).string();
    auto fail = [&m](int code, const std::string& status, const std::string& msg) {
        m.exit_code = code;
        m.status = status;
        m.error = msg;
    };
    try {
        m.diagnostics = validate(c);
        if (has_errors(m.diagnostics)) {
            std::string msg;
            for (const auto& d : m.diagnostics)
                if (d.level == "error") msg += (msg.empty() ? "" : "; ") + d.message;
            throw ConfigError(msg);
        }
        RunContext ctx(m.directory);
        try {
            dispatch(c, ctx);
        } catch (...) {
            m.outputs = ctx.outputs();
            m.metrics = ctx.metrics();
            throw;
        }
        m.outputs = ctx.outputs();
        m.metrics = ctx.metrics();
        m.checks = evaluate_assertions(c.assertions, m.metrics);
        for (const auto& ch : m.checks)
            if (!ch.passed) fail(exit_assertion, "assertion_failure", "assertion '" + ch.name + "' failed");
    } catch (const ConfigError& e) {
        fail(exit_config, "config_error", e.what());
    } catch (const ParameterError& e) {
        fail(exit_config, "config_error", e.what());
    } catch (const std::exception& e) {
        fail(exit_numerical, "numerical_failure", e.what());
    }
    m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(m);
    return m;
}

/// Runs a config file; an unreadable config still yields a manifest under its file stem.
inline RunManifest run_file(const std::string& path, bool force_serial = false) {
    ExperimentConfig c;
    try {
        c = load_config(path);
    } catch (const ConfigError& e) {
        RunManifest m;
        m.code_version = code_version;
        m.directory = output_directory(std::filesystem::path(path).stem().string()).string();
        m.exit_code = exit_config;
        m.status = "config_error";
        m.error = e.what();
        try {
            m.config = read_json_file(path);
        } catch (const ConfigError&) {
            m.config = nullptr;
        }
        if (m.config.is_object() && m.config.contains("output") && m.config["output"].is_string())
            m.directory = output_directory(m.config["output"].get<std::string>()).string();
        write_manifest(m);
        return m;
    }
    if (force_serial) c.serial = true;
    return run(c);
}

/// Fixture registries as JSON.
inline nlohmann::json list_fixtures() {
    return {{"experiments", experiment_tags()}, {"sweep_targets", sweep_targets()}, {"metrics", metric_ids()},
            {"domains", domain_ids()},          {"alpha", coefficient_ids()},       {"phantoms", phantom_ids()},
            {"initial", {"mode:<k>", "bump"}},  {"f", {"bump", "one"}},             {"operator", {"normal", "modified"}}};
}

} // namespace gblab::cli
