#pragma once

#include <cmath>
#include <complex>

#include "gblab/core/errors.hpp"
#include "gblab/core/numerics.hpp"
#include "gblab/core/types.hpp"
#include "gblab/geometry/metric.hpp"

namespace gblab {

/// Second derivatives of H = 1/2 g^{ij} p_i p_j: D = H_xx, B = H_xp, C = H_pp.
struct HessianTriple {
    Mat D;
    Mat B;
    Mat C;
};

/// D_kl = 1/2 p^T d_k d_l g^{-1} p, B_ij = (d_i g^{-1} p)_j, C = g^{-1}, from a jet of order 2.
inline HessianTriple hessian_from_jet(const MetricJet& j, const Vec& p) {
    const auto n = p.size();
    HessianTriple t;
    t.C = j.ginv;
    t.B.resize(n, n);
    t.D.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        t.B.row(i) = (j.dginv[static_cast<std::size_t>(i)] * p).transpose();
        for (Eigen::Index l = i; l < n; ++l) {
            const double v = 0.5 * p.dot(j.d2ginv[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] * p);
            t.D(i, l) = v;
            t.D(l, i) = v;
        }
    }
    return t;
}

inline HessianTriple hessian_matrices(const MetricField& metric, const Vec& x, const Vec& p) {
    if (metric.smoothness_order() < 2) throw PreconditionError("hessian_matrices: metric must be at least C^2");
    return hessian_from_jet(metric.jet(x, 2), p);
}

/// dM/dt = -(D + B M + M B^T + M C M).
inline CMat riccati_rhs(const CMat& M, const HessianTriple& t) {
    const CMat Bc = t.B.cast<cplx>();
    return -(t.D.cast<cplx>() + Bc * M + M * Bc.transpose() + M * t.C.cast<cplx>() * M);
}

/// dY/dt = (C M + B^T) Y.
inline CMat y_rhs(const CMat& Y, const CMat& M, const HessianTriple& t) {
    return (t.C.cast<cplx>() * M + t.B.transpose().cast<cplx>()) * Y;
}

inline double min_eig_imag(const CMat& M) {
    const Mat im = M.imag();
    return min_eigenvalue_sym(0.5 * (im + im.transpose()));
}

/// One RK4 step of the Riccati equation with the triple held fixed; the
/// result is re-symmetrized and must keep Im M positive definite.
inline CMat riccati_step(const CMat& M, const HessianTriple& t, double dt) {
    if (!(min_eig_imag(M) > 0.0)) throw RiccatiBlowupError("riccati_step: Im M is not positive definite");
    CMat out = rk4_step(M, 0.0, dt, [&t](double, const CMat& m) { return riccati_rhs(m, t); });
    out = 0.5 * (out + out.transpose()).eval();
    if (!out.allFinite() || !(min_eig_imag(out) > 0.0))
        throw RiccatiBlowupError("riccati_step: Im M lost positive definiteness");
    return out;
}

inline constexpr double singular_y_threshold = 1e-200;

/// One RK4 step of dY/dt = (C M + B^T) Y with M and the triple held fixed.
inline CMat y_step(const CMat& Y, const CMat& M, const HessianTriple& t, double dt) {
    const CMat out = rk4_step(Y, 0.0, dt, [&](double, const CMat& y) { return y_rhs(y, M, t); });
    if (!out.allFinite() || !(std::abs(out.determinant()) > singular_y_threshold))
        throw SingularYError("y_step: det Y underflowed");
    return out;
}

/// Follows a continuous branch of arg det Y. Increments larger than pi/2 per
/// step are refused as ambiguous.
class BranchTracker {
public:
    explicit BranchTracker(cplx det0 = cplx(1.0, 0.0)) : prev_(det0), arg_(std::arg(det0)) {}

    double update(cplx det) {
        const double delta = std::arg(det / prev_);
        if (std::abs(delta) > 0.5 * pi) throw BranchError("branch of sqrt(det Y) jumped; reduce dt");
        arg_ += delta;
        prev_ = det;
        return arg_;
    }

    double arg() const { return arg_; }

private:
    cplx prev_;
    double arg_;
};

/// a0 / sqrt(det Y) on the branch with the given unwrapped argument of det Y.
inline cplx amplitude(cplx a0, cplx detY, double unwrapped_arg) {
    return a0 * std::exp(-0.5 * cplx(std::log(std::abs(detY)), unwrapped_arg));
}

/// a0 / sqrt(det Y), principal branch (valid while arg det Y stays in (-pi, pi)).
inline cplx amplitude(cplx a0, const CMat& Y) {
    const cplx d = Y.determinant();
    return amplitude(a0, d, std::arg(d));
}

} // namespace gblab
