#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "gblab/beams/cutoff.hpp"
#include "gblab/beams/hessian.hpp"
#include "gblab/core/grid.hpp"
#include "gblab/geometry/fermi.hpp"
#include "gblab/geometry/flow.hpp"

namespace gblab {

struct BeamState {
    double t = 0.0;
    Vec x;
    Vec p;
    CMat M;
    CMat Y;
    cplx a;
    double phase0 = 0.0;
    double arg_detY = 0.0;
};

/// Time derivatives of a beam state, evaluated from the ODE right-hand sides.
struct BeamRates {
    Vec xdot;
    Vec pdot;
    CMat Mdot;
    cplx adot;
    double phase_dot = 0.0;
};

struct Beam {
    std::vector<BeamState> states;
    double h = 1.0;
    CutoffSpec cutoff;
    MetricField metric;
    std::shared_ptr<const FermiChart> chart;
    bool half_density = true;
    double detg0 = 1.0;

    double t_begin() const { return states.front().t; }
    double t_end() const { return states.back().t; }

    /// Index of the node nearest to t.
    std::size_t nearest(double t) const {
        auto it = std::lower_bound(states.begin(), states.end(), t, [](const BeamState& s, double v) { return s.t < v; });
        if (it == states.end()) return states.size() - 1;
        const auto i = static_cast<std::size_t>(it - states.begin());
        if (i > 0 && std::abs(states[i - 1].t - t) <= std::abs(it->t - t)) return i - 1;
        return i;
    }
};

struct BeamOptions {
    double dt = 1e-3;
    double T = 1.0;
    std::optional<CMat> M0;
    double phase0 = 0.0;
    bool half_density = true;
};

namespace detail {

struct BeamOde {
    Vec x;
    Vec p;
    CMat M;
    CMat Y;
    double phase = 0.0;
};

inline BeamOde operator+(const BeamOde& a, const BeamOde& b) {
    return {a.x + b.x, a.p + b.p, a.M + b.M, a.Y + b.Y, a.phase + b.phase};
}

inline BeamOde operator*(double s, const BeamOde& a) { return {s * a.x, s * a.p, s * a.M, s * a.Y, s * a.phase}; }

inline BeamOde beam_rhs(const MetricField& metric, const BeamOde& s) {
    const MetricJet j = metric.jet(s.x, 2);
    const HessianTriple t = hessian_from_jet(j, s.p);
    const auto n = s.x.size();
    BeamOde out;
    out.x = j.ginv * s.p;
    out.p.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) out.p(k) = -0.5 * s.p.dot(j.dginv[static_cast<std::size_t>(k)] * s.p);
    out.M = riccati_rhs(s.M, t);
    out.Y = y_rhs(s.Y, s.M, t);
    out.phase = 0.5 * s.p.dot(out.x);
    return out;
}

/// d/dt log sqrt(det g(x(t))) = 1/2 tr(g^{-1} d_k g) xdot^k
inline double log_sqrt_detg_rate(const MetricJet& j, const Vec& xdot) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < xdot.size(); ++k) acc += 0.5 * (j.ginv * j.dg[static_cast<std::size_t>(k)]).trace() * xdot(k);
    return acc;
}

/// b^j = (1/sqrt g) d_i (sqrt g g^{ij}), so Lap_g u = g^{ij} u_ij + b^j u_j.
inline Vec laplacian_drift(const MetricJet& j) {
    const auto n = j.ginv.rows();
    Vec b = Vec::Zero(n);
    Vec dlog(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dlog(i) = 0.5 * (j.ginv * j.dg[static_cast<std::size_t>(i)]).trace();
        b += j.dginv[static_cast<std::size_t>(i)].row(i).transpose();
    }
    return b + j.ginv * dlog;
}

} // namespace detail

inline BeamRates beam_rates(const Beam& beam, const BeamState& s) {
    const MetricJet j = beam.metric.jet(s.x, 2);
    const HessianTriple t = hessian_from_jet(j, s.p);
    BeamRates r;
    r.xdot = j.ginv * s.p;
    r.pdot.resize(s.p.size());
    for (Eigen::Index k = 0; k < s.p.size(); ++k) r.pdot(k) = -0.5 * s.p.dot(j.dginv[static_cast<std::size_t>(k)] * s.p);
    r.Mdot = riccati_rhs(s.M, t);
    r.phase_dot = 0.5 * s.p.dot(r.xdot);
    cplx rate = -0.5 * (t.C.cast<cplx>() * s.M + t.B.transpose().cast<cplx>()).trace();
    if (beam.half_density) rate -= 0.5 * detail::log_sqrt_detg_rate(j, r.xdot);
    r.adot = s.a * rate;
    return r;
}

/// Integrates ray, Riccati, Y, amplitude and on-ray phase jointly on the given
/// time nodes (starting at times[0] = 0).
inline Beam propagate_on_times(const MetricField& metric, const Vec& z, const Vec& eta, double h, cplx a0,
                               const std::vector<double>& times, const CMat& M0, const CutoffSpec& cutoff,
                               bool half_density = true, double phase0 = 0.0) {
    const int n = metric.dim();
    if (z.size() != n || eta.size() != n || M0.rows() != n || M0.cols() != n)
        throw ParameterError("propagate_beam: dimension mismatch");
    if (!(h > 0.0)) throw ParameterError("propagate_beam: h must be positive");
    if (metric.smoothness_order() < 3) throw PreconditionError("propagate_beam: metric must be at least C^3");
    if ((M0 - M0.transpose()).norm() > 1e-10) throw ParameterError("propagate_beam: M(0) must be symmetric");
    if (!(min_eig_imag(M0) > 0.0)) throw RiccatiBlowupError("propagate_beam: Im M(0) is not positive definite");
    Beam beam;
    beam.h = h;
    beam.cutoff = cutoff;
    beam.cutoff.h = h;
    beam.metric = metric;
    beam.half_density = half_density;
    beam.detg0 = metric.eval_g(z).determinant();

    detail::BeamOde y{z, eta, M0, CMat::Identity(n, n), phase0};
    BranchTracker branch;
    auto push = [&](double t) {
        const cplx det = y.Y.determinant();
        BeamState s;
        s.t = t;
        s.x = y.x;
        s.p = y.p;
        s.M = y.M;
        s.Y = y.Y;
        s.phase0 = y.phase;
        s.arg_detY = branch.arg();
        s.a = amplitude(a0, det, s.arg_detY);
        if (half_density) s.a *= std::pow(beam.detg0 / metric.eval_g(y.x).determinant(), 0.25);
        beam.states.push_back(std::move(s));
    };
    push(times.front());
    auto rhs = [&metric](double, const detail::BeamOde& s) { return detail::beam_rhs(metric, s); };
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double dt = times[i] - times[i - 1];
        y = rk4_step(y, times[i - 1], dt, rhs);
        y.M = 0.5 * (y.M + y.M.transpose()).eval();
        if (!y.x.allFinite() || !y.p.allFinite() || !y.M.allFinite() || !y.Y.allFinite() || !std::isfinite(y.phase))
            throw IntegrationError("propagate_beam: non-finite state at t = " + std::to_string(times[i]));
        if (!(min_eig_imag(y.M) > 0.0))
            throw RiccatiBlowupError("propagate_beam: Im M lost positive definiteness at t = " + std::to_string(times[i]));
        const cplx det = y.Y.determinant();
        if (!(std::abs(det) > singular_y_threshold)) throw SingularYError("propagate_beam: det Y underflowed");
        branch.update(det);
        push(times[i]);
    }
    return beam;
}

/// Beam from (z, eta) on [0, T] with fixed step; M(0) defaults to i Id.
inline Beam propagate_beam(const MetricField& metric, const Vec& z, const Vec& eta, double h, cplx a0,
                           const BeamOptions& opt, const CutoffSpec& cutoff) {
    if (!(opt.dt > 0.0) || !(opt.T > 0.0)) throw ParameterError("propagate_beam: dt and T must be positive");
    std::vector<double> times{0.0};
    const long steps = static_cast<long>(std::ceil(opt.T / opt.dt - 1e-9));
    for (long k = 1; k <= steps; ++k) times.push_back(std::min(opt.T, static_cast<double>(k) * opt.dt));
    const int n = metric.dim();
    const CMat M0 = opt.M0 ? *opt.M0 : CMat(cplx(0, 1) * CMat::Identity(n, n));
    return propagate_on_times(metric, z, eta, h, a0, times, M0, cutoff, opt.half_density, opt.phase0);
}

/// Beam along a Fermi chart's ray, on the ray's own time nodes. The default
/// cutoff is the chart tube.
inline Beam propagate_beam(const MetricField& metric, std::shared_ptr<const FermiChart> chart, double h, cplx a0,
                           const std::optional<CMat>& M0 = std::nullopt,
                           const std::optional<CutoffSpec>& cutoff = std::nullopt) {
    const auto& s = chart->ray.samples;
    std::vector<double> times;
    for (const auto& r : s) times.push_back(r.t);
    const int n = metric.dim();
    const CMat m0 = M0 ? *M0 : CMat(cplx(0, 1) * CMat::Identity(n, n));
    Beam b = propagate_on_times(metric, s.front().x, s.front().p, h, a0, times, m0,
                                cutoff ? *cutoff : CutoffSpec::tube(h, chart->tube_radius));
    b.chart = std::move(chart);
    return b;
}

/// Theorem-style Gaussian constant C(t) = 1/2 min eig Im M(t).
inline double gaussian_constant(const BeamState& s) { return 0.5 * min_eig_imag(s.M); }

/// Value and derivatives of U at node i and point x.
struct BeamLocal {
    cplx u;
    CVec grad;
    CMat hess;
    cplx u_t;
    cplx psi;
    cplx psi_t;
    CVec grad_psi;
};

inline BeamLocal beam_local(const Beam& beam, std::size_t i, const Vec& x, const BeamRates& r) {
    const BeamState& s = beam.states[i];
    const double h = beam.h;
    const cplx I(0.0, 1.0);
    const Vec d = x - s.x;
    const CVec dc = d.cast<cplx>();
    BeamLocal L;
    L.psi = s.phase0 + s.p.dot(d) + 0.5 * dc.dot(s.M * dc);
    // dc.dot conjugates its left argument; d is real so this is d^T M d
    L.grad_psi = s.p.cast<cplx>() + s.M * dc;
    L.psi_t = r.phase_dot + r.pdot.dot(d) - s.p.dot(r.xdot) + 0.5 * dc.dot(r.Mdot * dc) - dc.dot(s.M * r.xdot.cast<cplx>());
    const CutoffJet c = beam.cutoff.jet(d);
    const auto [w, wt] = beam.cutoff.time_value(s.t);
    const cplx E = std::exp(I * L.psi / h);
    const cplx A = s.a * w;
    const auto n = x.size();
    L.u = A * c.value * E;
    const CVec gc = c.grad.cast<cplx>();
    L.grad = A * E * (gc + c.value * (I / h) * L.grad_psi);
    L.hess = A * E *
             (c.hess.cast<cplx>() + (I / h) * (gc * L.grad_psi.transpose() + L.grad_psi * gc.transpose()) +
              c.value * ((I / h) * s.M - L.grad_psi * L.grad_psi.transpose() / (h * h)));
    const double chi_t = -c.grad.dot(r.xdot);
    L.u_t = E * (r.adot * w * c.value + s.a * wt * c.value + s.a * w * chi_t + A * c.value * (I / h) * L.psi_t);
    (void)n;
    return L;
}

/// State at time t, linearly interpolated between nodes (x, p, M, a, phase0).
inline BeamState state_at(const Beam& beam, double t) {
    if (t < beam.t_begin() - 1e-12 || t > beam.t_end() + 1e-12) throw DomainError("evaluate_beam: t outside beam range");
    auto it = std::lower_bound(beam.states.begin(), beam.states.end(), t, [](const BeamState& s, double v) { return s.t < v; });
    if (it == beam.states.end()) return beam.states.back();
    if (std::abs(it->t - t) <= 1e-12 || it == beam.states.begin()) return *it;
    const BeamState& b = *it;
    const BeamState& a = *(it - 1);
    const double th = (t - a.t) / (b.t - a.t);
    BeamState s;
    s.t = t;
    s.x = (1 - th) * a.x + th * b.x;
    s.p = (1 - th) * a.p + th * b.p;
    s.M = (1 - th) * a.M + th * b.M;
    s.Y = (1 - th) * a.Y + th * b.Y;
    s.a = (1 - th) * a.a + th * b.a;
    s.phase0 = (1 - th) * a.phase0 + th * b.phase0;
    s.arg_detY = (1 - th) * a.arg_detY + th * b.arg_detY;
    return s;
}

/// Complex phase psi(t, x) for a given state.
inline cplx beam_phase(const BeamState& s, const Vec& x) {
    const Vec d = x - s.x;
    const CVec dc = d.cast<cplx>();
    return s.phase0 + s.p.dot(d) + 0.5 * (dc.transpose() * s.M * dc)(0, 0);
}

/// U at x for an already interpolated state.
inline cplx evaluate_state(const Beam& beam, const BeamState& s, const Vec& x) {
    const double c = beam.cutoff.value(x - s.x);
    if (c == 0.0) return 0.0;
    const double w = beam.cutoff.time_value(s.t).first;
    if (w == 0.0) return 0.0;
    return c * w * s.a * std::exp(cplx(0.0, 1.0) * beam_phase(s, x) / beam.h);
}

/// U(t, x) with linear interpolation of the state between nodes.
inline cplx evaluate_beam(const Beam& beam, double t, const Vec& x) { return evaluate_state(beam, state_at(beam, t), x); }

struct BeamResiduals {
    cplx eikonal;
    cplx transport;
};

/// Eikonal psi_t + H(x, grad psi) and transport a_t + grad a . grad_g psi + 1/2 a Lap_g psi
/// at the node nearest t; time derivatives come from the ODE right-hand sides.
inline BeamResiduals eikonal_transport_residuals(const Beam& beam, double t, const Vec& x) {
    const std::size_t i = beam.nearest(t);
    const BeamState& s = beam.states[i];
    const BeamRates r = beam_rates(beam, s);
    const MetricJet j = beam.metric.jet(x, 1);
    const Vec d = x - s.x;
    const CVec dc = d.cast<cplx>();
    const cplx psi_t = r.phase_dot + r.pdot.dot(d) - s.p.dot(r.xdot) + 0.5 * dc.dot(r.Mdot * dc) - dc.dot(s.M * r.xdot.cast<cplx>());
    const CVec gpsi = s.p.cast<cplx>() + s.M * dc;
    const cplx H = 0.5 * (gpsi.transpose() * j.ginv.cast<cplx>() * gpsi)(0, 0);
    const Vec b = detail::laplacian_drift(j);
    const cplx lap = (j.ginv.cast<cplx>() * s.M).trace() + (b.cast<cplx>().transpose() * gpsi)(0, 0);
    return {psi_t + H, r.adot + 0.5 * s.a * lap};
}

/// P_h U = -i h U_t - 1/2 h^2 Lap_g U at node i.
inline cplx schrodinger_residual(const Beam& beam, std::size_t i, const Vec& x, const BeamRates& r) {
    const BeamLocal L = beam_local(beam, i, x, r);
    const MetricJet j = beam.metric.jet(x, 1);
    const Vec b = detail::laplacian_drift(j);
    const cplx lap = (j.ginv.cast<cplx>() * L.hess).trace() + (b.cast<cplx>().transpose() * L.grad)(0, 0);
    const double h = beam.h;
    return -cplx(0.0, h) * L.u_t - 0.5 * h * h * lap;
}

/// ||P_h U(t, .)||_{L^2(dvol_g)} on `grid` at the node nearest t.
inline double schrodinger_residual_norm(const Beam& beam, double t, const QuadratureGrid& grid) {
    if (grid.spacing > std::sqrt(beam.h) / 8.0 + 1e-15)
        throw ResolutionError("schrodinger_residual_norm: grid spacing exceeds sqrt(h)/8");
    const std::size_t i = beam.nearest(t);
    const BeamRates r = beam_rates(beam, beam.states[i]);
    double acc = 0.0;
    for (std::size_t k = 0; k < grid.points.size(); ++k) {
        const cplx v = schrodinger_residual(beam, i, grid.points[k], r);
        acc += grid.weights[k] * std::norm(v) * std::sqrt(beam.metric.eval_g(grid.points[k]).determinant());
    }
    return std::sqrt(acc);
}

/// int_0^T ||h^{-1} P_h U(t)||^2 dt by Simpson over every `stride`-th node (uniform nodes),
/// with spatial grids x(t) +- width * sqrt(h) at spacing sqrt(h)/16.
inline double residual_time_integral(const Beam& beam, std::size_t stride, double width = 10.0) {
    std::vector<double> vals;
    std::size_t last = 0;
    for (std::size_t i = 0; i < beam.states.size(); i += stride) {
        const auto& s = beam.states[i];
        const QuadratureGrid g = centred_grid(s.x, width * std::sqrt(beam.h), std::sqrt(beam.h) / 16.0);
        const double v = schrodinger_residual_norm(beam, s.t, g) / beam.h;
        vals.push_back(v * v);
        last = i;
    }
    const double dt = beam.states[stride].t - beam.states[0].t;
    (void)last;
    return simpson(vals, dt);
}

/// One JSON object per state: t, x, p, M, Y (re/im), a (re/im).
inline void write_beam_jsonl(std::ostream& os, const Beam& beam) {
    auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    auto mat = [](const Mat& m) {
        std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(m(i, j));
        return out;
    };
    for (const auto& s : beam.states) {
        nlohmann::json j{{"t", s.t},        {"x", vec(s.x)},       {"p", vec(s.p)},       {"M_re", mat(s.M.real())},
                         {"M_im", mat(s.M.imag())}, {"Y_re", mat(s.Y.real())}, {"Y_im", mat(s.Y.imag())},
                         {"a_re", s.a.real()}, {"a_im", s.a.imag()}, {"phase0", s.phase0}};
        os << j.dump() << "\n";
    }
}

} // namespace gblab
