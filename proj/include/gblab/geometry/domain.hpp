#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gblab/core/errors.hpp"
#include "gblab/core/types.hpp"
#include "gblab/geometry/metric.hpp"

namespace gblab {

enum class DomainKind { interval, unit_ball, rectangle };

inline std::string to_string(DomainKind k) {
    switch (k) {
    case DomainKind::interval: return "interval";
    case DomainKind::unit_ball: return "unit_ball";
    case DomainKind::rectangle: return "rectangle";
    }
    return "?";
}

/// Interval [lo, hi], the unit ball in R^n, or a box [lo, hi]^n.
struct DomainSpec {
    DomainKind kind = DomainKind::unit_ball;
    int dim = 2;
    double lo = 0.0;
    double hi = 1.0;

    static DomainSpec interval(double a = 0.0, double b = 1.0) { return {DomainKind::interval, 1, a, b}; }
    static DomainSpec unit_ball(int n) { return {DomainKind::unit_ball, n, -1.0, 1.0}; }
    static DomainSpec rectangle(int n, double a = 0.0, double b = 1.0) { return {DomainKind::rectangle, n, a, b}; }

    /// Positive inside, zero on the boundary, negative outside (Euclidean distance).
    double boundary_distance(const Vec& x) const {
        if (kind == DomainKind::unit_ball) return 1.0 - x.norm();
        double d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < x.size(); ++i) d = std::min({d, x(i) - lo, hi - x(i)});
        return d;
    }

    bool inside(const Vec& x) const { return boundary_distance(x) > 0.0; }

    /// Euclidean outward normal (a unit vector) at the boundary point nearest x.
    Vec euclidean_normal(const Vec& x) const {
        if (kind == DomainKind::unit_ball) {
            const double r = x.norm();
            if (r == 0.0) throw DomainError("boundary_normal: origin is not a boundary point");
            return x / r;
        }
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        double sign = 1.0;
        for (int i = 0; i < x.size(); ++i) {
            if (x(i) - lo < bd) { bd = x(i) - lo; best = i; sign = -1.0; }
            if (hi - x(i) < bd) { bd = hi - x(i); best = i; sign = 1.0; }
        }
        return sign * unit_vector(static_cast<int>(x.size()), best);
    }

    /// Outer unit conormal nu_k with g^{kl} nu_k nu_l = 1.
    Vec boundary_normal(const Vec& x, const MetricField& metric) const {
        const Vec n = euclidean_normal(x);
        const Mat ginv = metric.eval_ginv(x);
        return n / std::sqrt(n.dot(ginv * n));
    }
};

} // namespace gblab
