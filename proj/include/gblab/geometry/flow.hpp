#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gblab/core/errors.hpp"
#include "gblab/core/numerics.hpp"
#include "gblab/core/types.hpp"
#include "gblab/geometry/domain.hpp"
#include "gblab/geometry/metric.hpp"

namespace gblab {

struct PhasePoint {
    Vec x;
    Vec p;
};

struct RaySample {
    double t = 0.0;
    Vec x;
    Vec p;
};

struct Ray {
    std::vector<RaySample> samples;
    double dt = 1e-3;
    std::optional<double> exit_time;
    bool exit_transversal = false;
    bool trapped = false;

    double final_time() const { return samples.empty() ? 0.0 : samples.back().t; }
};

inline constexpr double transversality_tolerance = 1e-3;

/// Gamma[d](a, b) = Gamma^d_{ab}.
inline Tensor3 christoffel(const MetricField& metric, const Vec& x) {
    const MetricJet j = metric.jet(x, 1);
    const int n = metric.dim();
    Tensor3 out(static_cast<std::size_t>(n), Mat::Zero(n, n));
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            Vec low(n); // Gamma_{eta a b}
            for (int e = 0; e < n; ++e)
                low(e) = 0.5 * (j.dg[static_cast<std::size_t>(a)](e, b) + j.dg[static_cast<std::size_t>(b)](a, e) -
                                j.dg[static_cast<std::size_t>(e)](a, b));
            const Vec up = j.ginv * low;
            for (int d = 0; d < n; ++d) {
                out[static_cast<std::size_t>(d)](a, b) = up(d);
                out[static_cast<std::size_t>(d)](b, a) = up(d);
            }
        }
    }
    return out;
}

inline double hamiltonian(const MetricField& metric, const Vec& x, const Vec& p) {
    return 0.5 * p.dot(metric.eval_ginv(x) * p);
}

/// (dH/dx, dH/dp) at (x, p).
inline std::pair<Vec, Vec> hamiltonian_gradient(const MetricField& metric, const Vec& x, const Vec& p) {
    const MetricJet j = metric.jet(x, 1);
    Vec hx(metric.dim());
    for (int k = 0; k < metric.dim(); ++k) hx(k) = 0.5 * p.dot(j.dginv[static_cast<std::size_t>(k)] * p);
    return {hx, j.ginv * p};
}

/// Right-hand side of Hamilton's equations on the stacked state (x, p).
inline Vec hamilton_rhs(const MetricField& metric, const Vec& y) {
    const int n = metric.dim();
    const auto [hx, hp] = hamiltonian_gradient(metric, y.head(n), y.tail(n));
    Vec out(2 * n);
    out.head(n) = hp;
    out.tail(n) = -hx;
    return out;
}

/// Momentum p = g(x) omega after scaling omega to unit g-length.
inline Vec unit_covector(const MetricField& metric, const Vec& x, const Vec& omega) {
    const Mat g = metric.eval_g(x);
    const double len = std::sqrt(omega.dot(g * omega));
    if (!(len > 0.0)) throw DomainError("unit_covector: zero direction");
    return g * (omega / len);
}

namespace detail {

inline void check_finite(const Vec& y, double t) {
    if (!y.allFinite()) throw IntegrationError("hamiltonian_flow: non-finite state at t = " + std::to_string(t));
}

} // namespace detail

/// RK4 integration of x' = H_p, p' = -H_x from `start` for up to time T.
/// With a domain the ray stops at the first boundary crossing, refined by
/// bisection on the RK4 sub-step to 1e-10 in time.
inline Ray hamiltonian_flow(const MetricField& metric, const PhasePoint& start, double dt, double T,
                            const std::optional<DomainSpec>& domain = std::nullopt) {
    if (!(dt > 0.0) || !(T > 0.0)) throw ParameterError("hamiltonian_flow: dt and T must be positive");
    const int n = metric.dim();
    if (start.x.size() != n || start.p.size() != n) throw ParameterError("hamiltonian_flow: dimension mismatch");
    Ray ray;
    ray.dt = dt;
    Vec y(2 * n);
    y << start.x, start.p;
    double t = 0.0;
    ray.samples.push_back({t, start.x, start.p});
    auto rhs = [&metric](double, const Vec& s) { return hamilton_rhs(metric, s); };
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    for (long k = 0; k < steps; ++k) {
        const double h = std::min(dt, T - t);
        Vec next = rk4_step(y, t, h, rhs);
        detail::check_finite(next, t + h);
        if (domain && domain->boundary_distance(next.head(n)) < 0.0) {
            double a = 0.0, b = h;
            while (b - a > 1e-10) {
                const double m = 0.5 * (a + b);
                const Vec trial = rk4_step(y, t, m, rhs);
                if (domain->boundary_distance(trial.head(n)) < 0.0) b = m;
                else a = m;
            }
            const double s = 0.5 * (a + b);
            const Vec exitp = rk4_step(y, t, s, rhs);
            ray.samples.push_back({t + s, exitp.head(n), exitp.tail(n)});
            ray.exit_time = t + s;
            const Vec xe = exitp.head(n), pe = exitp.tail(n);
            const Vec xdot = metric.eval_ginv(xe) * pe;
            const Vec nu = domain->boundary_normal(xe, metric);
            const double speed = std::sqrt(xdot.dot(metric.eval_g(xe) * xdot));
            ray.exit_transversal = std::abs(nu.dot(xdot)) / speed >= transversality_tolerance;
            return ray;
        }
        y = next;
        t += h;
        ray.samples.push_back({t, y.head(n), y.tail(n)});
    }
    ray.trapped = domain.has_value();
    return ray;
}

struct GeodesicSample {
    double t = 0.0;
    Vec x;
    Vec v;
};

/// Second-order integration of x'' = -Gamma(x', x') with RK4.
inline std::vector<GeodesicSample> geodesic_flow(const MetricField& metric, const Vec& x0, const Vec& v0, double dt,
                                                 double T) {
    const int n = metric.dim();
    Vec y(2 * n);
    y << x0, v0;
    auto rhs = [&metric, n](double, const Vec& s) {
        const Vec v = s.tail(n);
        const Tensor3 gam = christoffel(metric, s.head(n));
        Vec out(2 * n);
        out.head(n) = v;
        for (int d = 0; d < n; ++d) out(n + d) = -v.dot(gam[static_cast<std::size_t>(d)] * v);
        return out;
    };
    std::vector<GeodesicSample> out{{0.0, x0, v0}};
    double t = 0.0;
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    for (long k = 0; k < steps; ++k) {
        const double h = std::min(dt, T - t);
        y = rk4_step(y, t, h, rhs);
        detail::check_finite(y, t + h);
        t += h;
        out.push_back({t, y.head(n), y.tail(n)});
    }
    return out;
}

struct NontrappingViolation {
    Vec x;
    Vec omega;
    std::string reason;
    double exit_time = 0.0;
};

struct NontrappingReport {
    double max_exit_time = 0.0;
    bool all_transversal = true;
    std::vector<NontrappingViolation> violations;
    int n_rays = 0;
};

/// Deterministic stratified inward boundary directions (x, omega), omega Euclidean-unit.
/// The angle grid is odd so the inward normal is sampled at the first boundary point.
inline std::vector<std::pair<Vec, Vec>> inward_boundary_directions(const DomainSpec& domain, int n_samples) {
    if (n_samples < 1) throw ParameterError("inward_boundary_directions: need at least one sample");
    std::vector<std::pair<Vec, Vec>> out;
    if (domain.dim == 1) {
        Vec a(1), b(1), r(1), l(1);
        a << domain.lo;
        b << domain.hi;
        r << 1.0;
        l << -1.0;
        out.emplace_back(a, r);
        if (n_samples > 1) out.emplace_back(b, l);
        return out;
    }
    if (domain.dim != 2) throw DomainError("inward_boundary_directions: sampling implemented for n <= 2");
    const int na = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_samples)))) | 1;
    const int nb = std::max(1, (n_samples + na - 1) / na);
    for (int i = 0; i < nb; ++i) {
        const double u = (i + 0.5) / nb;
        Vec x(2);
        if (domain.kind == DomainKind::unit_ball) {
            x << std::cos(2.0 * pi * u), std::sin(2.0 * pi * u);
        } else {
            const double side = domain.hi - domain.lo;
            const double s = 4.0 * u;
            const int e = static_cast<int>(s);
            const double f = domain.lo + (s - e) * side;
            switch (e) {
            case 0: x << f, domain.lo; break;
            case 1: x << domain.hi, f; break;
            case 2: x << domain.hi + domain.lo - f, domain.hi; break;
            default: x << domain.lo, domain.hi + domain.lo - f; break;
            }
        }
        const Vec nrm = domain.euclidean_normal(x);
        Vec tan(2);
        tan << -nrm(1), nrm(0);
        for (int j = 0; j < na && static_cast<int>(out.size()) < n_samples; ++j) {
            // the first point keeps the centred strata; the rest are shifted
            // by a golden-ratio sequence so symmetric metrics see distinct angles
            const double shift = i == 0 ? 0.5 : 0.05 + 0.9 * std::fmod(0.5 + i * 0.6180339887498949, 1.0);
            const double ang = -0.5 * pi + pi * (j + shift) / na;
            out.emplace_back(x, Vec(-std::cos(ang) * nrm + std::sin(ang) * tan));
        }
    }
    return out;
}

/// Traces n_samples inward boundary rays and reports exit times and violations.
inline NontrappingReport check_nontrapping(const MetricField& metric, const DomainSpec& domain, int n_samples,
                                           double T_max, double dt = 1e-3) {
    NontrappingReport rep;
    for (const auto& [x, omega] : inward_boundary_directions(domain, n_samples)) {
        const Ray ray = hamiltonian_flow(metric, {x, unit_covector(metric, x, omega)}, dt, T_max, domain);
        ++rep.n_rays;
        if (!ray.exit_time) {
            rep.violations.push_back({x, omega, "trapped", T_max});
            rep.max_exit_time = std::max(rep.max_exit_time, T_max);
            continue;
        }
        rep.max_exit_time = std::max(rep.max_exit_time, *ray.exit_time);
        if (!ray.exit_transversal) {
            rep.all_transversal = false;
            rep.violations.push_back({x, omega, "tangential exit", *ray.exit_time});
        }
    }
    return rep;
}

/// CSV with columns t, x1..xn, p1..pn.
inline void write_ray_csv(std::ostream& os, const Ray& ray) {
    if (ray.samples.empty()) return;
    const auto n = ray.samples.front().x.size();
    os << "t";
    for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i + 1;
    for (Eigen::Index i = 0; i < n; ++i) os << ",p" << i + 1;
    os << "\n";
    os.precision(17);
    for (const auto& s : ray.samples) {
        os << s.t;
        for (Eigen::Index i = 0; i < n; ++i) os << "," << s.x(i);
        for (Eigen::Index i = 0; i < n; ++i) os << "," << s.p(i);
        os << "\n";
    }
}

} // namespace gblab
