#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gblab/core/errors.hpp"
#include "gblab/core/numerics.hpp"
#include "gblab/core/types.hpp"

namespace gblab {

/// Value, gradient and Hessian of a spatial cutoff at displacement d.
struct CutoffJet {
    double value = 1.0;
    Vec grad;
    Mat hess;
};

/// Window 1 on [t0, t1], decaying to 0 over [t0 - left, t0] and [t1, t1 + right].
struct TimeWindow {
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::infinity();
    double left = 0.0;
    double right = 0.0;

    /// (value, d/dt)
    std::pair<double, double> eval(double t) const {
        if (t >= t0 && t <= t1) return {1.0, 0.0};
        if (t < t0) {
            if (left <= 0.0) return {0.0, 0.0};
            const double s = (t - (t0 - left)) / left;
            return {smoothstep5(s), smoothstep5_d1(s) / left};
        }
        if (right <= 0.0) return {0.0, 0.0};
        const double s = ((t1 + right) - t) / right;
        return {smoothstep5(s), -smoothstep5_d1(s) / right};
    }
};

/// Radial C^2 cutoff chi_h: 1 for |d| <= inner, 0 for |d| >= outer, quintic in between,
/// plus an optional time window.
struct CutoffSpec {
    double h = 1.0;
    double inner = std::numeric_limits<double>::infinity();
    double outer = std::numeric_limits<double>::infinity();
    TimeWindow window;

    /// Radius h^{1/n} and 2 h^{1/n}, the literal tube scaling.
    static CutoffSpec verbatim(double h, int n) {
        const double r = std::pow(h, 1.0 / n);
        return {h, r, 2.0 * r, {}};
    }

    /// h-independent tube of radius r (inner) and 2r (outer).
    static CutoffSpec tube(double h, double r) {
        if (!(r > 0.0)) throw ParameterError("CutoffSpec::tube: radius must be positive");
        return {h, r, 2.0 * r, {}};
    }

    static CutoffSpec none(double h) { return {h, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), {}}; }

    /// Window for chart interval [t_l, t_{l+1}] with transition width min(t_l, eps1/4) on the left, eps1/4 on the right.
    void set_window(double t_l, double t_next, double eps1) {
        window = {t_l, t_next, std::min(t_l, 0.25 * eps1), 0.25 * eps1};
    }

    bool bounded() const { return std::isfinite(outer); }

    double value(const Vec& d) const {
        if (!bounded()) return 1.0;
        const double r = d.norm();
        return 1.0 - smoothstep5((r - inner) / (outer - inner));
    }

    CutoffJet jet(const Vec& d) const {
        const auto n = d.size();
        CutoffJet j{1.0, Vec::Zero(n), Mat::Zero(n, n)};
        if (!bounded()) return j;
        const double r = d.norm();
        const double w = outer - inner;
        const double s = (r - inner) / w;
        j.value = 1.0 - smoothstep5(s);
        if (s <= 0.0 || s >= 1.0 || r == 0.0) return j;
        const Vec e = d / r;
        const double s1 = smoothstep5_d1(s), s2 = smoothstep5_d2(s);
        j.grad = -(s1 / w) * e;
        j.hess = -(s2 / (w * w)) * e * e.transpose() - (s1 / (w * r)) * (Mat::Identity(n, n) - e * e.transpose());
        return j;
    }

    std::pair<double, double> time_value(double t) const { return window.eval(t); }
};

} // namespace gblab
