#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gblab/beams/beam.hpp"
#include "gblab/core/grid.hpp"

namespace gblab {

/// Initial phase Phi on K with gradient and Hessian.
struct InitialPhase {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> grad;
    std::function<Mat(const Vec&)> hess;

    static InitialPhase zero(int n) {
        return {[](const Vec&) { return 0.0; }, [n](const Vec&) { return Vec(Vec::Zero(n)); },
                [n](const Vec&) { return Mat(Mat::Zero(n, n)); }};
    }

    static InitialPhase linear(const Vec& xi) {
        const auto n = xi.size();
        return {[xi](const Vec& z) { return xi.dot(z); }, [xi](const Vec&) { return xi; },
                [n](const Vec&) { return Mat(Mat::Zero(n, n)); }};
    }
};

using AmplitudeFn = std::function<cplx(const Vec&)>;

struct FamilyOptions {
    double dt = 1e-3;
    double T = 1.0;
    std::optional<CutoffSpec> cutoff;
    int squeeze_pairs = 200;
    unsigned seed = 1;
};

struct BeamFamily {
    int dim = 1;
    double h = 1.0;
    QuadratureGrid K;
    std::vector<Beam> beams;
    MetricField metric;
    double c1 = 0.0;
    double c2 = 0.0;

    std::size_t size() const { return beams.size(); }
};

/// (c1, c2) with c1 |z - z'| <= |x - x'| + |p - p'| <= c2 |z - z'| over random node pairs and every
/// `stride`-th time node.
inline std::pair<double, double> squeezing_constants(const BeamFamily& fam, int pairs, unsigned seed, std::size_t stride = 50) {
    if (fam.size() < 2) return {1.0, 1.0};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, fam.size() - 1);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int k = 0; k < pairs; ++k) {
        const std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        if (i == j) j = (j + 1) % fam.size();
        const Beam& a = fam.beams[i];
        const Beam& b = fam.beams[j];
        const double dz = (a.states.front().x - b.states.front().x).norm();
        const std::size_t m = std::min(a.states.size(), b.states.size());
        for (std::size_t s = 0; s < m; s += stride) {
            const double r = ((a.states[s].x - b.states[s].x).norm() + (a.states[s].p - b.states[s].p).norm()) / dz;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
    }
    return {lo, hi};
}

/// One beam per node z of K with x(0) = z, p(0) = grad Phi(z), M(0) = Hess Phi(z) + i Id,
/// a(0) = A(z) and on-ray phase Phi(z).
inline BeamFamily build_family(const MetricField& metric, const AmplitudeFn& A, const InitialPhase& Phi,
                               const QuadratureGrid& K, double h, const FamilyOptions& opt = {}) {
    const int n = metric.dim();
    if (K.dim != n) throw ParameterError("build_family: K dimension does not match metric");
    BeamFamily fam;
    fam.dim = n;
    fam.h = h;
    fam.K = K;
    fam.metric = metric;
    const CutoffSpec cut = opt.cutoff ? *opt.cutoff : CutoffSpec::tube(h, 0.5);
    fam.beams.reserve(K.points.size());
    for (std::size_t i = 0; i < K.points.size(); ++i) {
        const Vec& z = K.points[i];
        BeamOptions bo;
        bo.dt = opt.dt;
        bo.T = opt.T;
        bo.M0 = CMat(Phi.hess(z).cast<cplx>() + cplx(0, 1) * CMat::Identity(n, n));
        bo.phase0 = Phi.value(z);
        try {
            fam.beams.push_back(propagate_beam(metric, z, Phi.grad(z), h, A(z), bo, cut));
        } catch (const Error& e) {
            throw FamilyError(std::string("build_family: beam failed: ") + e.what(), static_cast<int>(i));
        }
    }
    std::tie(fam.c1, fam.c2) = squeezing_constants(fam, opt.squeeze_pairs, opt.seed);
    return fam;
}

/// States of every beam at time t.
inline std::vector<BeamState> family_states(const BeamFamily& fam, double t) {
    std::vector<BeamState> out;
    out.reserve(fam.size());
    for (const auto& b : fam.beams) out.push_back(state_at(b, t));
    return out;
}

/// Matrix of beam values U_z(t, y): rows are nodes z, columns are grid points y.
inline CMat beam_value_matrix(const BeamFamily& fam, double t, const QuadratureGrid& y) {
    const auto st = family_states(fam, t);
    CMat E(static_cast<Eigen::Index>(fam.size()), static_cast<Eigen::Index>(y.points.size()));
    for (std::size_t i = 0; i < fam.size(); ++i)
        for (std::size_t k = 0; k < y.points.size(); ++k)
            E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = evaluate_state(fam.beams[i], st[i], y.points[k]);
    return E;
}

/// Qw(t, y) = h^{-n/2} sum_z weight(z) w(z) U_z(t, y).
inline cplx apply_Q(const BeamFamily& fam, const std::function<cplx(const Vec&)>& w, double t, const Vec& y) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < fam.size(); ++i) {
        const cplx wz = w(fam.K.points[i]);
        if (wz == cplx(0.0)) continue;
        acc += fam.K.weights[i] * wz * evaluate_beam(fam.beams[i], t, y);
    }
    return std::pow(fam.h, -0.5 * fam.dim) * acc;
}

/// Qw on every point of a grid.
inline CVec apply_Q_grid(const BeamFamily& fam, const std::function<cplx(const Vec&)>& w, double t, const QuadratureGrid& y) {
    const CMat E = beam_value_matrix(fam, t, y);
    CVec c(static_cast<Eigen::Index>(fam.size()));
    for (std::size_t i = 0; i < fam.size(); ++i) c(static_cast<Eigen::Index>(i)) = fam.K.weights[i] * w(fam.K.points[i]);
    return std::pow(fam.h, -0.5 * fam.dim) * (E.transpose() * c);
}

/// Grid covering every beam centre at time t by +- width sqrt(h), spacing sqrt(h)/8.
inline QuadratureGrid family_y_grid(const BeamFamily& fam, double t, double width = 8.0) {
    const auto st = family_states(fam, t);
    Vec lo = st.front().x, hi = st.front().x;
    for (const auto& s : st) {
        lo = lo.cwiseMin(s.x);
        hi = hi.cwiseMax(s.x);
    }
    const double r = width * std::sqrt(fam.h), sp = std::sqrt(fam.h) / 8.0;
    const int n = static_cast<int>(std::ceil(((hi - lo).maxCoeff() + 2 * r) / sp)) + 1;
    const Vec centre = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo).maxCoeff() + r;
    return uniform_grid(centre.array() - half, centre.array() + half, std::max(n, 2));
}

} // namespace gblab
