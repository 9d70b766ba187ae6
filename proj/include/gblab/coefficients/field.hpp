#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gblab/core/errors.hpp"
#include "gblab/core/types.hpp"

namespace gblab {

enum class RegularityClass { lipschitz, zygmund, log_lipschitz, log_zygmund, holder };

inline std::string to_string(RegularityClass c) {
    switch (c) {
    case RegularityClass::lipschitz: return "lipschitz";
    case RegularityClass::zygmund: return "zygmund";
    case RegularityClass::log_lipschitz: return "log_lipschitz";
    case RegularityClass::log_zygmund: return "log_zygmund";
    case RegularityClass::holder: return "holder";
    }
    return "?";
}

/// A scalar coefficient alpha(x) with its declared regularity and bounds.
struct CoefficientField {
    std::string id;
    int dim = 1;
    std::function<double(const Vec&)> fn;
    RegularityClass declared_class = RegularityClass::lipschitz;
    double holder_exponent = 1.0;
    double lower = 1.0;
    double upper = 1.0;

    double operator()(const Vec& x) const { return fn(x); }
    double at(double x) const { return fn(Vec::Constant(1, x)); }

    /// Multiplies the field (and its bounds) by c.
    CoefficientField scaled(double c) const {
        CoefficientField out = *this;
        auto f = fn;
        out.fn = [f, c](const Vec& x) { return c * f(x); };
        out.lower = c >= 0 ? c * lower : c * upper;
        out.upper = c >= 0 ? c * upper : c * lower;
        out.id = id + "*" + std::to_string(c);
        return out;
    }
};

/// Verifies 0 < lower <= alpha <= upper at the given points; returns the observed (min, max).
inline std::pair<double, double> check_hyperbolic(const CoefficientField& a, const std::vector<Vec>& pts) {
    double lo = 1e300, hi = -1e300;
    for (const Vec& x : pts) {
        const double v = a(x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(lo > 0.0)) throw DomainError("coefficient " + a.id + " is not strictly positive");
    if (lo < a.lower - 1e-12 || hi > a.upper + 1e-12) throw DomainError("coefficient " + a.id + " violates its declared bounds");
    return {lo, hi};
}

namespace fixtures {

inline CoefficientField constant(double c, int dim = 1) {
    return {"constant", dim, [c](const Vec&) { return c; }, RegularityClass::lipschitz, 1.0, c, c};
}

/// alpha(x) = x_1, for derivative checks (not hyperbolic).
inline CoefficientField linear(int dim = 1) {
    return {"linear", dim, [](const Vec& x) { return x(0); }, RegularityClass::lipschitz, 1.0, -1e300, 1e300};
}

/// alpha(x) = |x|^2.
inline CoefficientField quadratic(int dim = 1) {
    return {"quadratic", dim, [](const Vec& x) { return x.squaredNorm(); }, RegularityClass::lipschitz, 1.0, 0.0, 1e300};
}

/// 1 + 0.5 exp(-|x - c|^2 / 0.02), c = (0.5, ..., 0.5).
inline CoefficientField smooth_bump(int dim = 1) {
    return {"bump", dim,
            [](const Vec& x) { return 1.0 + 0.5 * std::exp(-(x.array() - 0.5).matrix().squaredNorm() / 0.02); },
            RegularityClass::lipschitz, 1.0, 1.0, 1.5};
}

/// 1 + 0.5 max(0, 1 - |x_1 - 0.5| / 0.25), piecewise linear.
inline CoefficientField hat(int dim = 1) {
    return {"hat", dim, [](const Vec& x) { return 1.0 + 0.5 * std::max(0.0, 1.0 - std::abs(x(0) - 0.5) / 0.25); },
            RegularityClass::lipschitz, 1.0, 1.0, 1.5};
}

/// W(x) = sum_{j=1..16} 2^{-j} cos(2^j pi x).
inline double weierstrass_w(double x) {
    double acc = 0.0, amp = 0.5, freq = 2.0 * pi;
    for (int j = 1; j <= 16; ++j) {
        acc += amp * std::cos(freq * x);
        amp *= 0.5;
        freq *= 2.0;
    }
    return acc;
}

/// base + amp * W(x_1). With base = 0, amp = 1 this is W itself.
inline CoefficientField weierstrass(double base = 1.0, double amp = 0.2, int dim = 1) {
    const double wmax = 1.0 - std::ldexp(1.0, -16);
    return {"weierstrass", dim, [base, amp](const Vec& x) { return base + amp * weierstrass_w(x(0)); },
            RegularityClass::zygmund, 1.0, base - std::abs(amp) * wmax, base + std::abs(amp) * wmax};
}

/// base + amp * |x_1 - c| log(1 / |x_1 - c|), zero at c; for |x_1 - c| <= 1/2.
inline CoefficientField xlog(double base = 0.0, double amp = 1.0, double c = 0.0, int dim = 1) {
    auto f = [base, amp, c](const Vec& x) {
        const double r = std::abs(x(0) - c);
        return base + amp * (r > 0.0 ? r * std::log(1.0 / r) : 0.0);
    };
    const double m = std::abs(amp) / std::exp(1.0);
    return {"xlog", dim, f, RegularityClass::log_lipschitz, 1.0, base - m, base + m};
}

/// base + amp * |x_1 - c|^{1/2}.
inline CoefficientField holder_half(double base = 1.0, double amp = 0.5, double c = 0.5, int dim = 1) {
    return {"holder", dim, [base, amp, c](const Vec& x) { return base + amp * std::sqrt(std::abs(x(0) - c)); },
            RegularityClass::holder, 0.5, base, base + std::abs(amp)};
}

/// 1 + a sin(k x_1).
inline CoefficientField sine(double a = 0.1, double k = 4.0, int dim = 1) {
    return {"sine", dim, [a, k](const Vec& x) { return 1.0 + a * std::sin(k * x(0)); }, RegularityClass::lipschitz,
            1.0, 1.0 - std::abs(a), 1.0 + std::abs(a)};
}

/// 1 / (1 + |x|^2).
inline CoefficientField lorentzian(int dim = 1) {
    return {"lorentzian", dim, [](const Vec& x) { return 1.0 / (1.0 + x.squaredNorm()); }, RegularityClass::lipschitz,
            1.0, 0.0, 1.0};
}

} // namespace fixtures

/// Coefficient registry: constant[:c], bump, hat, weierstrass, xlog, holder, sine, lorentzian.
inline CoefficientField coefficient_from_id(const std::string& id, int dim = 1) {
    const auto c = id.find(':');
    const std::string head = id.substr(0, c);
    if (head == "constant") {
        double v = 1.0;
        if (c != std::string::npos) {
            try {
                v = std::stod(id.substr(c + 1));
            } catch (const std::exception&) {
                throw ConfigError("bad constant in coefficient id '" + id + "'");
            }
        }
        if (!(v > 0.0)) throw ConfigError("constant coefficient must be positive");
        return fixtures::constant(v, dim);
    }
    if (head == "bump") return fixtures::smooth_bump(dim);
    if (head == "hat") return fixtures::hat(dim);
    if (head == "weierstrass") return fixtures::weierstrass(1.0, 0.2, dim);
    if (head == "xlog") return fixtures::xlog(1.0, 0.5, 0.5, dim);
    if (head == "holder") return fixtures::holder_half(1.0, 0.5, 0.5, dim);
    if (head == "sine") return fixtures::sine(0.1, 4.0, dim);
    if (head == "lorentzian") return fixtures::lorentzian(dim);
    throw ConfigError("unknown coefficient id '" + id + "'");
}

inline std::vector<std::string> coefficient_ids() {
    return {"constant[:c]", "bump", "hat", "weierstrass", "xlog", "holder", "sine", "lorentzian"};
}

} // namespace gblab
