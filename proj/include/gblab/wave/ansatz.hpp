#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "gblab/coefficients/regularity.hpp"
#include "gblab/core/numerics.hpp"
#include "gblab/superposition/family.hpp"
#include "gblab/superposition/normal.hpp"
#include "gblab/wave/solver.hpp"

namespace gblab {

struct LiftedAnsatz {
    double h = 1.0;
    double epsilon = 0.5;
    double T = 0.0;
    /// omega = h^{-1/2 - eps/2}.
    double omega = 1.0;
    int dim = 1;
    std::vector<Vec> z;
    /// phi(z) = int_0^T Qt*Qt f(s, z) ds at the family nodes.
    std::vector<cplx> phi_z;
    WaveGrid grid;
    std::vector<cplx> phi;
    std::vector<cplx> pi_applied;

    cplx time_factor(double t) const { return std::exp(cplx(0.0, omega * t)); }
    /// h^{n(1-eps)/2} phi at the nodes.
    std::vector<cplx> normalized() const {
        std::vector<cplx> out(phi_z);
        const double c = std::pow(h, 0.5 * dim * (1.0 - epsilon));
        for (auto& v : out) v *= c;
        return out;
    }
};

namespace detail {

/// Linear interpolation of nodal values on ascending 1-D nodes; zero outside.
inline cplx interp_nodes(const std::vector<Vec>& z, const std::vector<cplx>& v, double x) {
    if (z.empty() || x < z.front()(0) || x > z.back()(0)) return 0.0;
    const auto it = std::upper_bound(z.begin(), z.end(), x, [](double a, const Vec& b) { return a < b(0); });
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - z.begin()), z.size() - 1);
    if (j == 0) return v.front();
    const double a = (x - z[j - 1](0)) / (z[j](0) - z[j - 1](0));
    return (1.0 - a) * v[j - 1] + a * v[j];
}

} // namespace detail

/// phi = int_0^T Qt*Qt f(s, .) ds by the trapezoid rule on n_times nodes, transferred to the wave grid.
/// Pi = I* X^{-1} reduces to the identity for n = 1.
inline LiftedAnsatz build_lifted_ansatz(const BeamFamily& fam, const ScalarFn& f, double T, double epsilon,
                                        const CoefficientField& alpha, const WaveGrid& grid, int n_times = 65) {
    if (fam.dim != 1 || grid.dim != 1) throw ParameterError("build_lifted_ansatz: implemented for n = 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("build_lifted_ansatz: epsilon must lie in (0, 1)");
    if (n_times < 2) throw ParameterError("build_lifted_ansatz: need at least two time nodes");
    LiftedAnsatz an;
    an.h = fam.h;
    an.epsilon = epsilon;
    an.T = T;
    an.dim = 1;
    an.omega = std::pow(fam.h, -0.5 - 0.5 * epsilon);
    an.z = fam.K.points;
    an.phi_z.assign(fam.size(), 0.0);
    an.grid = grid;
    ModifiedNormalOptions opt;
    opt.epsilon = epsilon;
    const auto ts = linspace(0.0, T, n_times);
    const double ds = T / (n_times - 1);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto s = apply_modified_normal(fam, f, ts[i], alpha, opt);
        const double w = (i == 0 || i + 1 == ts.size() ? 0.5 : 1.0) * ds / s.normalization;
        for (std::size_t j = 0; j < fam.size(); ++j) an.phi_z[j] += w * s.values[j];
    }
    std::vector<std::size_t> order(fam.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return an.z[a](0) < an.z[b](0); });
    std::vector<Vec> zs;
    std::vector<cplx> vs;
    for (auto j : order) {
        zs.push_back(an.z[j]);
        vs.push_back(an.phi_z[j]);
    }
    an.phi.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) an.phi[k] = detail::interp_nodes(zs, vs, grid.coord(static_cast<int>(k)));
    an.pi_applied = an.phi;
    return an;
}

/// int_0^T f(x(s, z)) ds along every family ray (trapezoid on the beam nodes).
inline std::vector<double> family_ray_integrals(const BeamFamily& fam, const ScalarFn& f, double T) {
    std::vector<double> out;
    for (const auto& b : fam.beams) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < b.states.size() && b.states[i].t < T; ++i) {
            const double t1 = std::min(b.states[i + 1].t, T), t0 = b.states[i].t;
            const double f0 = f(b.states[i].x), f1 = f(b.states[i + 1].x);
            const double a = (t1 - t0) / (b.states[i + 1].t - t0);
            acc += 0.5 * (t1 - t0) * (f0 + (f0 + a * (f1 - f0)));
        }
        out.push_back(acc);
    }
    return out;
}

/// Smooth bump b((x - c) / w), b(r) = exp(-1 / (1 - r^2)), with analytic derivatives.
struct TestBump {
    double c = 0.5;
    double w = 0.2;

    double value(double x) const {
        const double r = (x - c) / w, q = 1.0 - r * r;
        return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
    }
    double d1(double x) const {
        const double r = (x - c) / w, q = 1.0 - r * r;
        return q > 0.0 ? std::exp(-1.0 / q) * (-2.0 * r / (q * q)) / w : 0.0;
    }
    double d2(double x) const {
        const double r = (x - c) / w, q = 1.0 - r * r;
        if (q <= 0.0) return 0.0;
        const double s = 2.0 * r / (q * q);
        return std::exp(-1.0 / q) * (s * s - 2.0 / (q * q) - 8.0 * r * r / (q * q * q)) / (w * w);
    }
};

inline std::vector<TestBump> default_test_bumps() { return {{0.3, 0.15}, {0.5, 0.2}, {0.7, 0.15}}; }

namespace detail {

/// Delta_g of a test bump in 1-D: g^{11} b'' + (sqrt g)^{-1} (sqrt g g^{11})' b'.
inline double bump_laplacian(const TestBump& b, const MetricField& metric, double x) {
    auto c = [&metric](double y) {
        const Mat g = metric.eval_g(Vec::Constant(1, y));
        return std::sqrt(g(0, 0)) / g(0, 0);
    };
    const Mat g = metric.eval_g(Vec::Constant(1, x));
    const double e = 1e-5;
    const double dc = (c(x + e) - c(x - e)) / (2 * e);
    return b.d2(x) / g(0, 0) + dc / std::sqrt(g(0, 0)) * b.d1(x);
}

/// Trapezoid weights sqrt(g) dx over all grid nodes (1-D).
inline std::vector<double> trapezoid_metric_weights(const MetricField& metric, const WaveGrid& grid) {
    std::vector<double> w(grid.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double end = (k == 0 || k + 1 == w.size()) ? 0.5 : 1.0;
        w[k] = end * grid.dx() * std::sqrt(metric.eval_g(grid.point(k)).determinant());
    }
    return w;
}

} // namespace detail

/// (int f^2 + |f'|^2)^{1/2} on the grid, centred differences.
inline double h1_norm(const ScalarFn& f, const MetricField& metric, const WaveGrid& grid) {
    const auto w = detail::trapezoid_metric_weights(metric, grid);
    const double e = 0.5 * grid.dx();
    double acc = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double x = grid.coord(static_cast<int>(k));
        const double d = (f(Vec::Constant(1, x + e)) - f(Vec::Constant(1, x - e))) / (2 * e);
        const double v = f(Vec::Constant(1, x));
        acc += w[k] * (v * v + metric.eval_ginv(Vec::Constant(1, x))(0, 0) * d * d);
    }
    return std::sqrt(acc);
}

struct QuasimodeReport {
    double h = 1.0;
    double epsilon = 0.5;
    std::vector<double> residuals;
    double max_residual = 0.0;
    /// h^{-1-eps} kappa(h) h^{-n(1-eps)/2}.
    double bound = 0.0;
    double normalized = 0.0;
};

/// |<phi, Delta phihat> + h^{-1-eps} <alpha phi, phihat>| / ||f||_{H^1} for every test bump.
inline QuasimodeReport quasimode_residual(const std::vector<cplx>& phi, const WaveGrid& grid, double h, double epsilon,
                                          const CoefficientField& alpha, const MetricField& metric,
                                          const std::vector<TestBump>& tests, double f_h1) {
    if (grid.dim != 1) throw ParameterError("quasimode_residual: implemented for n = 1");
    QuasimodeReport rep;
    rep.h = h;
    rep.epsilon = epsilon;
    const double w2 = std::pow(h, -1.0 - epsilon);
    const auto w = detail::trapezoid_metric_weights(metric, grid);
    for (const auto& b : tests) {
        cplx acc = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double x = grid.coord(static_cast<int>(k));
            const double bv = b.value(x);
            if (bv == 0.0 && b.d2(x) == 0.0) continue;
            acc += w[k] * phi[k] * (detail::bump_laplacian(b, metric, x) + w2 * alpha(grid.point(k)) * bv);
        }
        const double r = f_h1 > 0.0 ? std::abs(acc) / f_h1 : std::abs(acc);
        rep.residuals.push_back(r);
        rep.max_residual = std::max(rep.max_residual, r);
    }
    rep.bound = w2 * modulus_kappa(alpha.declared_class, h, alpha.holder_exponent) * std::pow(h, -0.5 * (1.0 - epsilon));
    rep.normalized = rep.max_residual / rep.bound;
    return rep;
}

inline QuasimodeReport quasimode_residual(const LiftedAnsatz& an, const CoefficientField& alpha, const MetricField& metric,
                                          const std::vector<TestBump>& tests, double f_h1) {
    return quasimode_residual(an.pi_applied, an.grid, an.h, an.epsilon, alpha, metric, tests, f_h1);
}

struct WaveErrorReport {
    double h = 1.0;
    double epsilon = 0.5;
    double omega = 1.0;
    /// max over tests of |<v(T), phihat>| and |<d_x v(T), phihat>|.
    double pairing_value = 0.0;
    double pairing_gradient = 0.0;
    /// C-free contract h^{-1/2-eps/2} h^{-n(1-eps)/2} kappa(h) ||f||.
    double contract = 0.0;
    /// max_t ||int_0^t k|| / max_t ||k||.
    double rhs_gain = 0.0;
    double source_norm = 0.0;
};

/// Solves alpha v_tt = L v + k with zero data, k = box(Pi U_h) for U_h = exp(i omega t) phi, evaluated
/// with the discrete operator; real and imaginary parts are solved separately.
inline WaveErrorReport wave_error_decomposition(const LiftedAnsatz& an, const CoefficientField& alpha, const MetricField& metric,
                                                double T, const std::vector<TestBump>& tests, double f_l2,
                                                const WaveOptions& base = {}) {
    const WaveGrid& grid = an.grid;
    const std::size_t N = grid.size();
    const LaplaceBeltrami L(metric, grid);
    std::vector<double> pr(N), pi_(N);
    for (std::size_t k = 0; k < N; ++k) {
        pr[k] = an.pi_applied[k].real();
        pi_[k] = an.pi_applied[k].imag();
    }
    const auto Lr = L.apply(pr), Li = L.apply(pi_);
    std::vector<double> Kr(N, 0.0), Ki(N, 0.0);
    const double w2 = an.omega * an.omega;
    for (std::size_t k = 0; k < N; ++k) {
        if (grid.on_boundary(k)) continue;
        const double a = alpha(grid.point(k));
        Kr[k] = -w2 * a * pr[k] - Lr[k];
        Ki[k] = -w2 * a * pi_[k] - Li[k];
    }
    WaveErrorReport rep;
    rep.h = an.h;
    rep.epsilon = an.epsilon;
    rep.omega = an.omega;
    auto solve_part = [&](bool imag) {
        WaveOptions opt = base;
        opt.save_every = 0;
        opt.source = [&, imag](double t, std::vector<double>& out) {
            const double c = std::cos(an.omega * t), s = std::sin(an.omega * t);
            for (std::size_t k = 0; k < N; ++k) out[k] = imag ? s * Kr[k] + c * Ki[k] : c * Kr[k] - s * Ki[k];
        };
        const std::vector<double> zero(N, 0.0);
        return solve_wave(alpha, metric, grid, zero, zero, T, opt);
    };
    const WaveSolution sr = solve_part(false), si = solve_part(true);
    const auto& vr = sr.history.back().u;
    const auto& vi = si.history.back().u;
    const auto w = detail::trapezoid_metric_weights(metric, grid);
    for (const auto& b : tests) {
        cplx p0 = 0.0, p1 = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            const double x = grid.coord(static_cast<int>(k));
            const cplx v(vr[k], vi[k]);
            p0 += w[k] * v * b.value(x);
            p1 -= w[k] * v * b.d1(x);
        }
        rep.pairing_value = std::max(rep.pairing_value, std::abs(p0));
        rep.pairing_gradient = std::max(rep.pairing_gradient, std::abs(p1));
    }
    double knorm = 0.0;
    for (std::size_t k = 0; k < N; ++k) knorm += L.weight(k) * (Kr[k] * Kr[k] + Ki[k] * Ki[k]);
    rep.source_norm = std::sqrt(knorm);
    // ||int_0^t k|| = |int_0^t e^{i omega s} ds| ||K|| and ||k(t)|| = ||K||; trapezoid on the solver steps
    cplx integral = 0.0;
    double best = 0.0;
    for (long n = 0; n < sr.steps; ++n) {
        integral += 0.5 * sr.dt * (an.time_factor(n * sr.dt) + an.time_factor((n + 1) * sr.dt));
        best = std::max(best, std::abs(integral));
    }
    rep.rhs_gain = best;
    rep.contract = std::pow(an.h, -0.5 - 0.5 * an.epsilon) * std::pow(an.h, -0.5 * an.dim * (1.0 - an.epsilon)) *
                   modulus_kappa(alpha.declared_class, an.h, alpha.holder_exponent) * f_l2;
    return rep;
}

struct IntegralObservabilityReport {
    /// h^{n(1-eps)/2} |int_0^T int_{boundary} d_nu(Pi U_h) d_nu u|.
    double lower = 0.0;
    /// Cauchy-Schwarz bound of the same pairing.
    double upper = 0.0;
    double dnu_f_sq = 0.0;
    double trace_norm_sq = 0.0;
    /// h^{-1/2-eps/2} kappa(h) ||f||^2_{H^2}.
    double budget = 0.0;
};

/// Pairs d_nu(Pi U_h)(t) = exp(i omega t) d_nu phi with the trace of the solution started from (f, 0).
inline IntegralObservabilityReport integral_observability_constant(const LiftedAnsatz& an, const WaveSolution& sol,
                                                                   const MetricField& metric, const CoefficientField& alpha,
                                                                   const std::vector<double>& f_nodes, double f_h2) {
    const auto st = detail::trace_stencils(metric, an.grid);
    std::vector<double> pr(an.grid.size()), pim(an.grid.size());
    for (std::size_t k = 0; k < pr.size(); ++k) {
        pr[k] = an.pi_applied[k].real();
        pim[k] = an.pi_applied[k].imag();
    }
    const auto dr = detail::eval_trace(st, pr), di = detail::eval_trace(st, pim), df = detail::eval_trace(st, f_nodes);
    IntegralObservabilityReport rep;
    const auto& tr = sol.trace;
    const double scale = std::pow(an.h, 0.5 * an.dim * (1.0 - an.epsilon));
    cplx acc = 0.0;
    double phi_sq = 0.0;
    for (std::size_t t = 0; t + 1 < tr.times.size(); ++t) {
        cplx a = 0.0, b = 0.0;
        double pa = 0.0, pb = 0.0;
        for (std::size_t k = 0; k < tr.nodes.size(); ++k) {
            const cplx dn(dr[k], di[k]);
            a += tr.weights[k] * an.time_factor(tr.times[t]) * dn * tr.values[t][k];
            b += tr.weights[k] * an.time_factor(tr.times[t + 1]) * dn * tr.values[t + 1][k];
            pa += tr.weights[k] * std::norm(dn);
            pb += tr.weights[k] * std::norm(dn);
        }
        const double dt = tr.times[t + 1] - tr.times[t];
        acc += 0.5 * dt * (a + b);
        phi_sq += 0.5 * dt * (pa + pb);
    }
    rep.trace_norm_sq = tr.norm_sq();
    rep.lower = scale * std::abs(acc);
    rep.upper = scale * std::sqrt(phi_sq * rep.trace_norm_sq);
    for (std::size_t k = 0; k < df.size(); ++k) rep.dnu_f_sq += st[k].weight * df[k] * df[k];
    rep.budget = std::pow(an.h, -0.5 - 0.5 * an.epsilon) * modulus_kappa(alpha.declared_class, an.h, alpha.holder_exponent) *
                 f_h2 * f_h2;
    return rep;
}

struct TwoBranch {
    cplx value;
    cplx time_derivative;
};

/// cos(omega t) phi0 + sin(omega t) / omega phi1 and its time derivative, at one point.
inline TwoBranch two_branch_ansatz(cplx phi0, cplx phi1, double omega, double t) {
    return {std::cos(omega * t) * phi0 + std::sin(omega * t) / omega * phi1,
            -omega * std::sin(omega * t) * phi0 + std::cos(omega * t) * phi1};
}

inline nlohmann::json to_json(const QuasimodeReport& r) {
    return {{"h", r.h}, {"epsilon", r.epsilon}, {"residuals", r.residuals}, {"max_residual", r.max_residual},
            {"bound", r.bound}, {"normalized", r.normalized}};
}

inline nlohmann::json to_json(const WaveErrorReport& r) {
    return {{"h", r.h}, {"epsilon", r.epsilon}, {"omega", r.omega}, {"pairing_value", r.pairing_value},
            {"pairing_gradient", r.pairing_gradient}, {"contract", r.contract}, {"rhs_gain", r.rhs_gain},
            {"source_norm", r.source_norm}};
}

} // namespace gblab
