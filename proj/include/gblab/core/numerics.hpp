#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gblab/core/errors.hpp"
#include "gblab/core/types.hpp"

namespace gblab {

/// Classical fourth-order Runge-Kutta step for any state type supporting
/// `State + State` and `double * State`.
template <class State, class Rhs>
State rk4_step(const State& y, double t, double dt, Rhs&& rhs) {
    const State k1 = rhs(t, y);
    const State k2 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k1);
    const State k3 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k2);
    const State k4 = rhs(t + dt, y + dt * k3);
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Composite Simpson rule on uniformly spaced samples. An even number of
/// intervals uses Simpson throughout; an odd count closes with Simpson's 3/8
/// rule on the last three intervals.
template <class T>
T simpson(std::span<const T> f, double dx) {
    const std::size_t n = f.size();
    if (n == 0) return T{};
    if (n == 1) return T{};
    if (n == 2) return 0.5 * dx * (f[0] + f[1]);
    if (n == 4) return (3.0 * dx / 8.0) * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
    std::size_t m = n - 1; // intervals
    std::size_t simpson_end = (m % 2 == 0) ? n - 1 : n - 4;
    T acc = f[0] + f[simpson_end];
    for (std::size_t i = 1; i < simpson_end; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
    T total = (dx / 3.0) * acc;
    if (m % 2 == 1) {
        const std::size_t j = simpson_end;
        total += (3.0 * dx / 8.0) * (f[j] + 3.0 * f[j + 1] + 3.0 * f[j + 2] + f[j + 3]);
    }
    return total;
}

inline double simpson(const std::vector<double>& f, double dx) {
    return simpson<double>(std::span<const double>(f), dx);
}

inline cplx simpson(const std::vector<cplx>& f, double dx) {
    return simpson<cplx>(std::span<const cplx>(f), dx);
}

/// Trapezoid rule on possibly non-uniform nodes.
inline double trapezoid(std::span<const double> x, std::span<const double> f) {
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
    return acc;
}

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    return trapezoid(std::span<const double>(x), std::span<const double>(f));
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line: need at least two paired samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw DomainError("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

/// Slope of log(y) against log(x), natural or any base (the slope is base-free).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(lx, ly).slope;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

/// Uniform grid of n points on [a, b] inclusive.
inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = a;
        return out;
    }
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return out;
}

/// C^2 smooth step: 0 for s <= 0, 1 for s >= 1, quintic in between.
inline double smoothstep5(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

inline double smoothstep5_d1(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 30.0 * s * s * (1.0 - s) * (1.0 - s);
}

inline double smoothstep5_d2(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
}

} // namespace gblab
