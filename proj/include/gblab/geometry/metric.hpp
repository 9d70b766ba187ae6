#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include <Eigen/Cholesky>

#include "gblab/core/errors.hpp"
#include "gblab/core/types.hpp"

namespace gblab {

/// Metric value together with first and second derivatives of g and g^{-1}.
struct MetricJet {
    Mat g;
    Mat ginv;
    double detg = 1.0;
    Tensor3 dg;     // dg[k](i,j) = d_k g_ij
    Tensor3 dginv;  // d_k g^ij
    Tensor4 d2g;    // d2g[k][l](i,j)
    Tensor4 d2ginv;
};

/// A Riemannian metric g_ij(x) on an open subset of R^n.
///
/// Derivatives come from the analytic closures when supplied, otherwise from
/// central differences with step `fd_step`.
class MetricField {
public:
    using GFn = std::function<Mat(const Vec&)>;
    using DgFn = std::function<Tensor3(const Vec&)>;
    using D2gFn = std::function<Tensor4(const Vec&)>;

    MetricField() = default;
    MetricField(int dim, std::string id, GFn g, DgFn dg = {}, D2gFn d2g = {}, int smoothness = 4)
        : dim_(dim), id_(std::move(id)), g_(std::move(g)), dg_(std::move(dg)), d2g_(std::move(d2g)),
          smoothness_(smoothness) {}

    int dim() const { return dim_; }
    const std::string& id() const { return id_; }
    int smoothness_order() const { return smoothness_; }
    bool has_analytic_derivatives() const { return static_cast<bool>(dg_) && static_cast<bool>(d2g_); }
    double fd_step = 1e-5;

    Mat eval_g(const Vec& x) const { return g_(x); }

    Mat eval_ginv(const Vec& x) const { return invert(g_(x)); }

    Tensor3 eval_dg(const Vec& x) const {
        if (dg_) return dg_(x);
        Tensor3 out(static_cast<std::size_t>(dim_));
        for (int k = 0; k < dim_; ++k) {
            const Vec e = fd_step * unit_vector(dim_, k);
            out[static_cast<std::size_t>(k)] = (g_(x + e) - g_(x - e)) / (2.0 * fd_step);
        }
        return out;
    }

    Tensor4 eval_d2g(const Vec& x) const {
        if (d2g_) return d2g_(x);
        const auto n = static_cast<std::size_t>(dim_);
        Tensor4 out(n, Tensor3(n));
        if (dg_) {
            for (int l = 0; l < dim_; ++l) {
                const Vec e = fd_step * unit_vector(dim_, l);
                const Tensor3 up = dg_(x + e), dn = dg_(x - e);
                for (std::size_t k = 0; k < n; ++k)
                    out[k][static_cast<std::size_t>(l)] = (up[k] - dn[k]) / (2.0 * fd_step);
            }
            return out;
        }
        const double s = 1e-4;
        const Mat g0 = g_(x);
        for (int k = 0; k < dim_; ++k) {
            for (int l = k; l < dim_; ++l) {
                Mat v;
                if (k == l) {
                    const Vec e = s * unit_vector(dim_, k);
                    v = (g_(x + e) - 2.0 * g0 + g_(x - e)) / (s * s);
                } else {
                    const Vec ek = s * unit_vector(dim_, k), el = s * unit_vector(dim_, l);
                    v = (g_(x + ek + el) - g_(x + ek - el) - g_(x - ek + el) + g_(x - ek - el)) / (4.0 * s * s);
                }
                out[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = v;
                out[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = v;
            }
        }
        return out;
    }

    /// g, g^{-1} and derivatives up to `order` (0, 1 or 2).
    MetricJet jet(const Vec& x, int order = 2) const {
        MetricJet j;
        j.g = g_(x);
        j.ginv = invert(j.g);
        j.detg = j.g.determinant();
        if (order < 1) return j;
        j.dg = eval_dg(x);
        const auto n = static_cast<std::size_t>(dim_);
        j.dginv.resize(n);
        for (std::size_t k = 0; k < n; ++k) j.dginv[k] = -j.ginv * j.dg[k] * j.ginv;
        if (order < 2) return j;
        j.d2g = eval_d2g(x);
        j.d2ginv.assign(n, Tensor3(n));
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t l = 0; l < n; ++l) {
                j.d2ginv[k][l] = j.ginv * (j.dg[k] * j.ginv * j.dg[l] + j.dg[l] * j.ginv * j.dg[k] - j.d2g[k][l]) * j.ginv;
            }
        }
        return j;
    }

    /// Minimum eigenvalue of g(x); positive for a valid metric.
    double min_eigenvalue(const Vec& x) const { return min_eigenvalue_sym(g_(x)); }

private:
    Mat invert(const Mat& g) const {
        if (dim_ == 1) {
            if (!(g(0, 0) > 0.0) || !std::isfinite(g(0, 0))) throw DegenerateMetricError("metric " + id_ + " is not positive definite");
            return Mat::Constant(1, 1, 1.0 / g(0, 0));
        }
        Eigen::LLT<Mat> llt(g);
        if (llt.info() != Eigen::Success) throw DegenerateMetricError("metric " + id_ + " is not positive definite");
        return llt.solve(Mat::Identity(dim_, dim_));
    }

    int dim_ = 0;
    std::string id_;
    GFn g_;
    DgFn dg_;
    D2gFn d2g_;
    int smoothness_ = 4;
};

/// Scalar potential with derivatives, used for conformal metrics e^{2 phi} I.
struct ConformalPotential {
    std::function<double(const Vec&)> phi;
    std::function<Vec(const Vec&)> grad;
    std::function<Mat(const Vec&)> hess;
};

namespace metrics {

inline MetricField euclidean(int n) {
    return MetricField(
        n, "euclidean", [n](const Vec&) { return Mat(Mat::Identity(n, n)); },
        [n](const Vec&) { return Tensor3(static_cast<std::size_t>(n), Mat::Zero(n, n)); },
        [n](const Vec&) { return Tensor4(static_cast<std::size_t>(n), Tensor3(static_cast<std::size_t>(n), Mat::Zero(n, n))); },
        1000);
}

/// g = c I for a constant c > 0.
inline MetricField scaled_euclidean(int n, double c) {
    if (!(c > 0.0)) throw DegenerateMetricError("scaled_euclidean: scale must be positive");
    return MetricField(
        n, "scaled", [n, c](const Vec&) { return Mat(c * Mat::Identity(n, n)); },
        [n](const Vec&) { return Tensor3(static_cast<std::size_t>(n), Mat::Zero(n, n)); },
        [n](const Vec&) { return Tensor4(static_cast<std::size_t>(n), Tensor3(static_cast<std::size_t>(n), Mat::Zero(n, n))); },
        1000);
}

/// g = e^{2 phi(x)} I with analytic derivatives.
inline MetricField conformal(int n, const ConformalPotential& pot, std::string id = "conformal") {
    auto g = [n, pot](const Vec& x) { return Mat(std::exp(2.0 * pot.phi(x)) * Mat::Identity(n, n)); };
    auto dg = [n, pot](const Vec& x) {
        const double e = std::exp(2.0 * pot.phi(x));
        const Vec d = pot.grad(x);
        Tensor3 out(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = 2.0 * d(k) * e * Mat::Identity(n, n);
        return out;
    };
    auto d2g = [n, pot](const Vec& x) {
        const double e = std::exp(2.0 * pot.phi(x));
        const Vec d = pot.grad(x);
        const Mat hs = pot.hess(x);
        Tensor4 out(static_cast<std::size_t>(n), Tensor3(static_cast<std::size_t>(n)));
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                out[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] =
                    (4.0 * d(k) * d(l) + 2.0 * hs(k, l)) * e * Mat::Identity(n, n);
        return out;
    };
    return MetricField(n, std::move(id), g, dg, d2g, 4);
}

/// Polar-form metric dr^2 + r^2 dtheta^2 in coordinates (r, theta).
inline MetricField polar() {
    auto g = [](const Vec& x) {
        Mat m = Mat::Zero(2, 2);
        m(0, 0) = 1.0;
        m(1, 1) = x(0) * x(0);
        return m;
    };
    auto dg = [](const Vec& x) {
        Tensor3 out(2, Mat::Zero(2, 2));
        out[0](1, 1) = 2.0 * x(0);
        return out;
    };
    auto d2g = [](const Vec&) {
        Tensor4 out(2, Tensor3(2, Mat::Zero(2, 2)));
        out[0][0](1, 1) = 2.0;
        return out;
    };
    return MetricField(2, "polar", g, dg, d2g, 1000);
}

/// One-dimensional metric (1 + beta x)^2 dx^2; arclength s = x + beta x^2 / 2.
inline MetricField stretch1d(double beta) {
    auto g = [beta](const Vec& x) { return Mat(Mat::Constant(1, 1, (1.0 + beta * x(0)) * (1.0 + beta * x(0)))); };
    auto dg = [beta](const Vec& x) { return Tensor3{Mat::Constant(1, 1, 2.0 * beta * (1.0 + beta * x(0)))}; };
    auto d2g = [beta](const Vec&) { return Tensor4{Tensor3{Mat::Constant(1, 1, 2.0 * beta * beta)}}; };
    return MetricField(1, "stretch", g, dg, d2g, 1000);
}

} // namespace metrics
} // namespace gblab
