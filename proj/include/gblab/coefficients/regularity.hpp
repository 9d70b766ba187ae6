#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

#include "gblab/coefficients/field.hpp"
#include "gblab/core/errors.hpp"
#include "gblab/core/numerics.hpp"
#include "gblab/geometry/flow.hpp"

namespace gblab {

/// Continuity modulus for class c at displacement 0 < y < 1.
inline double modulus_kappa(RegularityClass c, double y, double holder_exponent = 0.5) {
    if (!(y > 0.0) || !(y < 1.0)) throw DomainError("modulus_kappa: need 0 < y < 1");
    switch (c) {
    case RegularityClass::lipschitz:
    case RegularityClass::zygmund: return y;
    case RegularityClass::log_lipschitz:
    case RegularityClass::log_zygmund: return y * std::log(1.0 + 1.0 / y);
    case RegularityClass::holder: return std::pow(y, holder_exponent);
    }
    return y;
}

inline bool uses_second_difference(RegularityClass c) {
    return c == RegularityClass::zygmund || c == RegularityClass::log_zygmund;
}

/// Base points and displacements; pairs leaving the box [lo, hi]^n are skipped.
struct PairSamples {
    std::vector<Vec> base;
    std::vector<Vec> displacements;
    double lo = -1e300;
    double hi = 1e300;
};

/// Uniform base grid on [lo, hi]^n (n_base points per axis) crossed with
/// displacements 2^{-k} e_j for k = k_min..k_max.
inline PairSamples dyadic_pairs(double lo, double hi, int n_base, int k_min, int k_max, int dim = 1) {
    if (n_base < 1 || k_max < k_min) throw DomainError("dyadic_pairs: empty sample set");
    PairSamples s;
    s.lo = lo;
    s.hi = hi;
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    while (true) {
        Vec x(dim);
        for (int d = 0; d < dim; ++d)
            x(d) = n_base == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * idx[static_cast<std::size_t>(d)] / (n_base - 1);
        s.base.push_back(x);
        int d = 0;
        while (d < dim && ++idx[static_cast<std::size_t>(d)] == n_base) idx[static_cast<std::size_t>(d++)] = 0;
        if (d == dim) break;
    }
    for (int k = k_min; k <= k_max; ++k)
        for (int j = 0; j < dim; ++j) s.displacements.push_back(std::ldexp(1.0, -k) * unit_vector(dim, j));
    return s;
}

struct ModulusReport {
    RegularityClass class_tested = RegularityClass::lipschitz;
    double estimate = 0.0;
    long sample_count = 0;
    Vec worst_x;
    Vec worst_y;
};

inline nlohmann::json to_json(const ModulusReport& r) {
    auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return {{"class", to_string(r.class_tested)},
            {"estimate", r.estimate},
            {"samples", r.sample_count},
            {"worst_pair", {{"x", vec(r.worst_x)}, {"y", vec(r.worst_y)}}}};
}

/// Sampled seminorm: sup |f(x+y) - f(x)| / kappa(|y|) for first-difference
/// classes, sup |f(x+y) + f(x-y) - 2 f(x)| / kappa(|y|) for second-difference
/// classes. A lower bound for the true supremum.
inline ModulusReport seminorm(const CoefficientField& f, RegularityClass cls, const PairSamples& s,
                              double holder_exponent = 0.5) {
    ModulusReport rep;
    rep.class_tested = cls;
    const bool second = uses_second_difference(cls);
    auto in_box = [&](const Vec& x) { return (x.array() >= s.lo).all() && (x.array() <= s.hi).all(); };
    for (const Vec& y : s.displacements) {
        const double ny = y.norm();
        if (!(ny > 0.0) || !(ny < 1.0)) continue;
        const double kap = modulus_kappa(cls, ny, holder_exponent);
        for (const Vec& x : s.base) {
            const Vec xp = x + y, xm = x - y;
            double num;
            if (second) {
                if (!in_box(xp) || !in_box(xm)) continue;
                num = std::abs(f(xp) + f(xm) - 2.0 * f(x));
            } else {
                if (!in_box(xp)) continue;
                num = std::abs(f(xp) - f(x));
            }
            ++rep.sample_count;
            const double q = num / kap;
            if (q > rep.estimate || rep.worst_x.size() == 0) {
                rep.estimate = std::max(rep.estimate, q);
                rep.worst_x = x;
                rep.worst_y = y;
            }
        }
    }
    if (rep.sample_count == 0) throw DomainError("seminorm: empty sample set");
    return rep;
}

inline ModulusReport lipschitz_seminorm(const CoefficientField& f, const PairSamples& s) {
    return seminorm(f, RegularityClass::lipschitz, s);
}
inline ModulusReport zygmund_seminorm(const CoefficientField& f, const PairSamples& s) {
    return seminorm(f, RegularityClass::zygmund, s);
}
inline ModulusReport log_lipschitz_seminorm(const CoefficientField& f, const PairSamples& s) {
    return seminorm(f, RegularityClass::log_lipschitz, s);
}
inline ModulusReport log_zygmund_seminorm(const CoefficientField& f, const PairSamples& s) {
    return seminorm(f, RegularityClass::log_zygmund, s);
}

/// Forward-difference gradient (alpha(x + h e_j) - alpha(x)) / h.
inline Vec fd_gradient(const CoefficientField& f, const Vec& x, double h) {
    if (!(h > 0.0) || !(h < 1.0)) throw DomainError("fd_gradient: need 0 < h < 1");
    const double f0 = f(x);
    Vec g(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) g(j) = (f(x + h * unit_vector(static_cast<int>(x.size()), static_cast<int>(j))) - f0) / h;
    return g;
}

/// Second-difference Laplacian sum_j (alpha(x+h e_j) + alpha(x-h e_j) - 2 alpha(x)) / h^2.
inline double fd_laplacian(const CoefficientField& f, const Vec& x, double h) {
    if (!(h > 0.0) || !(h < 1.0)) throw DomainError("fd_laplacian: need 0 < h < 1");
    const double f0 = f(x);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const Vec e = h * unit_vector(static_cast<int>(x.size()), static_cast<int>(j));
        acc += f(x + e) + f(x - e) - 2.0 * f0;
    }
    return acc / (h * h);
}

struct MonotonicityReport {
    double alpha0_estimate = 0.0;
    bool holds = false;
};

/// Infimum over samples and coordinates of the forward difference of
/// x_j alpha(x) in direction e_j, with the index raised by g^{jj}.
inline MonotonicityReport monotonicity_check(const CoefficientField& f, const MetricField& metric,
                                             const std::vector<Vec>& samples, double step = 1e-4) {
    if (samples.empty()) throw DomainError("monotonicity_check: empty sample set");
    double inf = std::numeric_limits<double>::infinity();
    for (const Vec& x : samples) {
        const Mat ginv = metric.eval_ginv(x);
        const double a0 = f(x);
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            Vec xp = x;
            xp(j) += step;
            const double d = (xp(j) * f(xp) - x(j) * a0) / step;
            inf = std::min(inf, ginv(j, j) * d);
        }
    }
    return {inf, inf > 0.0};
}

/// max over sampled inward boundary geodesics of int sqrt(alpha) ds.
inline double travel_time(const CoefficientField& alpha, const MetricField& metric, const DomainSpec& domain,
                          int n_rays, double dt = 1e-3, double T_max = 50.0) {
    double best = 0.0;
    for (const auto& [x, omega] : inward_boundary_directions(domain, n_rays)) {
        const Ray ray = hamiltonian_flow(metric, {x, unit_covector(metric, x, omega)}, dt, T_max, domain);
        if (!ray.exit_time) throw TrappedRayError("travel_time: trapped ray, T_alpha undefined");
        const auto& s = ray.samples;
        // uniform part by Simpson, trailing partial step by trapezoid
        std::vector<double> v;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) v.push_back(std::sqrt(alpha(s[i].x)));
        double total = simpson(v, dt);
        const double tail = s.back().t - s[s.size() - 2].t;
        total += 0.5 * tail * (v.back() + std::sqrt(alpha(s.back().x)));
        best = std::max(best, total);
    }
    return best;
}

} // namespace gblab
