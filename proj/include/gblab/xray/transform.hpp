#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "gblab/core/errors.hpp"
#include "gblab/core/numerics.hpp"
#include "gblab/geometry/domain.hpp"
#include "gblab/geometry/flow.hpp"
#include "gblab/xray/image.hpp"

namespace gblab {

enum class SinogramGeometry { parallel_euclidean, boundary_fan };

/// Parallel geometry: row j is the direction theta_j = (cos phi_j, sin phi_j), phi_j in [0, pi),
/// column k the offset s_k; the value is the integral of f over the line x.theta = s.
struct Sinogram {
    SinogramGeometry geometry = SinogramGeometry::parallel_euclidean;
    std::vector<double> angles;
    std::vector<double> offsets;
    std::vector<double> values;
    bool support_warning = false;

    std::size_t n_angles() const { return angles.size(); }
    std::size_t n_offsets() const { return offsets.size(); }
    double& at(std::size_t j, std::size_t k) { return values[j * offsets.size() + k]; }
    double at(std::size_t j, std::size_t k) const { return values[j * offsets.size() + k]; }
    double ds() const { return offsets.size() > 1 ? offsets[1] - offsets[0] : 1.0; }
    double dtheta() const { return pi / static_cast<double>(angles.size()); }

    /// Linear interpolation in s; zero outside the offset range.
    double interp(std::size_t j, double s) const {
        const double f = (s - offsets.front()) / ds();
        const auto k = static_cast<long>(std::floor(f));
        if (k < 0 || k + 1 >= static_cast<long>(offsets.size())) return 0.0;
        const double a = f - static_cast<double>(k);
        return (1 - a) * at(j, static_cast<std::size_t>(k)) + a * at(j, static_cast<std::size_t>(k) + 1);
    }
};

/// n angles phi_j = j pi / n.
inline std::vector<double> uniform_angles(std::size_t n) {
    std::vector<double> a(n);
    for (std::size_t j = 0; j < n; ++j) a[j] = pi * static_cast<double>(j) / static_cast<double>(n);
    return a;
}

/// n offsets with endpoints +-R.
inline std::vector<double> uniform_offsets(std::size_t n, double R = 1.0) { return linspace(-R, R, static_cast<int>(n)); }

/// Simpson quadrature along each line over its chord of the ball of radius R with step <= `step`.
/// Sets support_warning if f is non-negligible just outside that ball.
inline Sinogram xray_forward_euclid(const std::function<double(const Vec&)>& f, const std::vector<double>& angles,
                                    const std::vector<double>& offsets, double R = 1.0, double step = 1.0 / 512) {
    Sinogram g;
    g.angles = angles;
    g.offsets = offsets;
    g.values.assign(angles.size() * offsets.size(), 0.0);
    for (double r : {1.02 * R, 1.2 * R, 1.5 * R})
        for (int k = 0; k < 64; ++k) {
            const double a = 2 * pi * k / 64.0;
            if (std::abs(f((Vec(2) << r * std::cos(a), r * std::sin(a)).finished())) > 1e-12) g.support_warning = true;
        }
    std::vector<double> vals;
    for (std::size_t j = 0; j < angles.size(); ++j) {
        const double c = std::cos(angles[j]), s = std::sin(angles[j]);
        for (std::size_t k = 0; k < offsets.size(); ++k) {
            const double off = offsets[k];
            if (std::abs(off) >= R) continue;
            const double L = std::sqrt(R * R - off * off);
            int m = static_cast<int>(std::ceil(2 * L / step));
            m += m % 2;
            m = std::max(m, 2);
            const double dt = 2 * L / m;
            vals.resize(static_cast<std::size_t>(m) + 1);
            for (int i = 0; i <= m; ++i) {
                const double tau = -L + i * dt;
                vals[static_cast<std::size_t>(i)] = f((Vec(2) << off * c - tau * s, off * s + tau * c).finished());
            }
            g.at(j, k) = simpson(vals, dt);
        }
    }
    return g;
}

/// P*g(x) = int_{S^1} g(theta, x.theta) dtheta, using g(theta + pi, -s) = g(theta, s).
inline double adjoint_P_at(const Sinogram& g, const Vec& x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.n_angles(); ++j) acc += g.interp(j, x(0) * std::cos(g.angles[j]) + x(1) * std::sin(g.angles[j]));
    return 2.0 * g.dtheta() * acc;
}

inline Image adjoint_P(const Sinogram& g, int n, double L = 1.0) {
    Image im(n, L);
    std::vector<double> c(g.n_angles()), s(g.n_angles());
    for (std::size_t j = 0; j < g.n_angles(); ++j) {
        c[j] = std::cos(g.angles[j]);
        s[j] = std::sin(g.angles[j]);
    }
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const double x = im.coord(ix), y = im.coord(iy);
            double acc = 0.0;
            for (std::size_t j = 0; j < g.n_angles(); ++j) acc += g.interp(j, x * c[j] + y * s[j]);
            im.at(ix, iy) = 2.0 * g.dtheta() * acc;
        }
    return im;
}

/// <a, b>_{L^2(T)} over the full circle of directions.
inline double sinogram_inner(const Sinogram& a, const Sinogram& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) acc += a.values[i] * b.values[i];
    return 2.0 * a.dtheta() * a.ds() * acc;
}

inline void write_sinogram_csv(const std::string& path, const Sinogram& g) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path);
    os.precision(17);
    os << "theta,s,value\n";
    for (std::size_t j = 0; j < g.n_angles(); ++j)
        for (std::size_t k = 0; k < g.n_offsets(); ++k) os << g.angles[j] << "," << g.offsets[k] << "," << g.at(j, k) << "\n";
}

/// int_0^tau f(s, gamma(s)) ds along the unit-speed geodesic entering at x with direction omega.
inline double xray_forward_geodesic(const std::function<double(double, const Vec&)>& f, const MetricField& metric,
                                    const DomainSpec& domain, const Vec& x, const Vec& omega, double dt = 1e-3,
                                    double T_max = 50.0) {
    const Vec p = unit_covector(metric, x, omega);
    const Ray probe = hamiltonian_flow(metric, {x, p}, dt, T_max, domain);
    if (!probe.exit_time) throw TrappedRayError("xray_forward_geodesic: geodesic does not exit by T_max");
    const double tau = *probe.exit_time;
    const int m = std::max(2, 2 * static_cast<int>(std::ceil(0.5 * tau / dt)));
    const Ray ray = hamiltonian_flow(metric, {x, p}, tau / m, tau);
    std::vector<double> vals;
    for (const auto& s : ray.samples) vals.push_back(f(s.t, s.x));
    if (vals.size() != static_cast<std::size_t>(m) + 1) throw IntegrationError("xray_forward_geodesic: unexpected sample count");
    return simpson(vals, tau / m);
}

inline double xray_forward_geodesic(const std::function<double(const Vec&)>& f, const MetricField& metric,
                                    const DomainSpec& domain, const Vec& x, const Vec& omega, double dt = 1e-3,
                                    double T_max = 50.0) {
    return xray_forward_geodesic([&f](double, const Vec& y) { return f(y); }, metric, domain, x, omega, dt, T_max);
}

} // namespace gblab
