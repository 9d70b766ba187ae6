#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <json.hpp>

#include "gblab/coefficients/field.hpp"
#include "gblab/superposition/family.hpp"

namespace gblab {

struct NormalOperatorSample {
    double t = 0.0;
    double h = 1.0;
    double epsilon = 0.0;
    std::vector<Vec> z;
    std::vector<cplx> values;
    /// h^{n(1-eps)/2} for the modified operator, 1 for Q*Q.
    double normalization = 1.0;
};

/// Kernel K(z, z') = h^{-n} int U_{z'}(t, y) conj(U_z(t, y)) dy on the grid.
inline CMat normal_kernel(const BeamFamily& fam, double t, const QuadratureGrid& y) {
    if (y.spacing > std::sqrt(fam.h) / 8.0 + 1e-15) throw ResolutionError("normal operator: y-grid spacing exceeds sqrt(h)/8");
    const CMat E = beam_value_matrix(fam, t, y);
    Vec w(static_cast<Eigen::Index>(y.weights.size()));
    for (std::size_t k = 0; k < y.weights.size(); ++k) w(static_cast<Eigen::Index>(k)) = y.weights[k];
    const CMat Ew = E * w.cast<cplx>().asDiagonal();
    return std::pow(fam.h, -static_cast<double>(fam.dim)) * (E.conjugate() * Ew.transpose());
}

using ScalarFn = std::function<double(const Vec&)>;

/// Q*Q f(t, z) at every node, f sampled at the nodes z'.
inline NormalOperatorSample apply_QstarQ(const BeamFamily& fam, const ScalarFn& f, double t, const QuadratureGrid& y) {
    const CMat Kz = normal_kernel(fam, t, y);
    CVec fw(static_cast<Eigen::Index>(fam.size()));
    for (std::size_t j = 0; j < fam.size(); ++j) fw(static_cast<Eigen::Index>(j)) = fam.K.weights[j] * f(fam.K.points[j]);
    const CVec out = Kz * fw;
    NormalOperatorSample s;
    s.t = t;
    s.h = fam.h;
    s.z = fam.K.points;
    s.values.assign(out.data(), out.data() + out.size());
    return s;
}

inline NormalOperatorSample apply_QstarQ(const BeamFamily& fam, const ScalarFn& f, double t) {
    return apply_QstarQ(fam, f, t, family_y_grid(fam, t));
}

struct ModifiedNormalOptions {
    double epsilon = 0.5;
    /// Contraction vector for alpha(z) x(t, z); empty means (1, ..., 1)/sqrt(n).
    Vec direction;
    /// Sample f at z' instead of at x(t, z').
    bool sample_at_initial = false;
};

/// Q*Q with the extra factor exp(i h^{-eps} u.(alpha(z) x(t,z) - alpha(z') x(t,z'))). Values are
/// multiplied by h^{n(1-eps)/2}.
inline NormalOperatorSample apply_modified_normal(const BeamFamily& fam, const ScalarFn& f, double t,
                                                  const CoefficientField& alpha, const ModifiedNormalOptions& opt,
                                                  const QuadratureGrid& y) {
    if (!(opt.epsilon > 0.0 && opt.epsilon < 1.0)) throw ParameterError("apply_modified_normal: epsilon must lie in (0, 1)");
    const int n = fam.dim;
    Vec u = opt.direction.size() ? opt.direction : Vec(Vec::Ones(n) / std::sqrt(static_cast<double>(n)));
    if (u.size() != n || std::abs(u.norm() - 1.0) > 1e-12) throw ParameterError("apply_modified_normal: direction must be a unit vector");
    const CMat Kz = normal_kernel(fam, t, y);
    const auto st = family_states(fam, t);
    const double lam = std::pow(fam.h, -opt.epsilon);
    CVec e(static_cast<Eigen::Index>(fam.size())), fw(static_cast<Eigen::Index>(fam.size()));
    for (std::size_t j = 0; j < fam.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        e(jj) = std::exp(cplx(0.0, lam * alpha(fam.K.points[j]) * u.dot(st[j].x)));
        const Vec& at = opt.sample_at_initial ? fam.K.points[j] : st[j].x;
        fw(jj) = fam.K.weights[j] * f(at) / e(jj);
    }
    const CVec out = e.asDiagonal() * (Kz * fw);
    NormalOperatorSample s;
    s.t = t;
    s.h = fam.h;
    s.epsilon = opt.epsilon;
    s.z = fam.K.points;
    s.normalization = std::pow(fam.h, 0.5 * n * (1.0 - opt.epsilon));
    s.values.resize(fam.size());
    for (std::size_t i = 0; i < fam.size(); ++i) s.values[i] = s.normalization * out(static_cast<Eigen::Index>(i));
    return s;
}

inline NormalOperatorSample apply_modified_normal(const BeamFamily& fam, const ScalarFn& f, double t,
                                                  const CoefficientField& alpha, const ModifiedNormalOptions& opt = {}) {
    return apply_modified_normal(fam, f, t, alpha, opt, family_y_grid(fam, t));
}

inline void write_sample_csv(const std::string& path, const NormalOperatorSample& s) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path);
    os.precision(17);
    const auto n = s.z.empty() ? 0 : s.z.front().size();
    for (Eigen::Index d = 0; d < n; ++d) os << "z" << d + 1 << ",";
    os << "re,im\n";
    for (std::size_t i = 0; i < s.z.size(); ++i) {
        for (Eigen::Index d = 0; d < n; ++d) os << s.z[i](d) << ",";
        os << s.values[i].real() << "," << s.values[i].imag() << "\n";
    }
}

/// Largest delta with Im psi~(y; z, z') >= delta (|y - m|^2 + |x(t,z) - x(t,z')|^2 / 4), m the midpoint
/// of the two centres, over random node pairs and offsets y.
inline double phase_lower_bound(const BeamFamily& fam, double t, int samples, unsigned seed, double radius = 1.0) {
    const auto st = family_states(fam, t);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, fam.size() - 1);
    std::uniform_real_distribution<double> off(-radius, radius);
    double delta = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        const auto& a = st[pick(rng)];
        const auto& b = st[pick(rng)];
        const Vec m = 0.5 * (a.x + b.x);
        Vec y = m;
        for (Eigen::Index d = 0; d < y.size(); ++d) y(d) += off(rng);
        const double im = (beam_phase(b, y) - std::conj(beam_phase(a, y))).imag();
        const double q = (y - m).squaredNorm() + 0.25 * (a.x - b.x).squaredNorm();
        if (q > 0.0) delta = std::min(delta, im / q);
    }
    return delta;
}

/// min over node pairs z != z' and grid points y (inside both supports) of |grad_y psi~| / |z - z'|.
inline double phase_gradient_bound(const BeamFamily& fam, double t, const QuadratureGrid& y, int pairs, unsigned seed) {
    const auto st = family_states(fam, t);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, fam.size() - 1);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < pairs; ++k) {
        const std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        if (i == j) j = (j + 1) % fam.size();
        const auto& a = st[i];
        const auto& b = st[j];
        const double dz = (fam.K.points[i] - fam.K.points[j]).norm();
        for (const Vec& yy : y.points) {
            if (fam.beams[i].cutoff.value(yy - a.x) == 0.0 || fam.beams[j].cutoff.value(yy - b.x) == 0.0) continue;
            const CVec ga = a.p.cast<cplx>() + a.M * (yy - a.x).cast<cplx>();
            const CVec gb = b.p.cast<cplx>() + b.M * (yy - b.x).cast<cplx>();
            best = std::min(best, (gb - ga.conjugate()).norm() / dz);
        }
    }
    return best;
}

inline nlohmann::json concentration_json(double h, double epsilon, double factor, double kappa_term, double sqrt_term) {
    return {{"h", h}, {"epsilon", epsilon}, {"factor", factor}, {"error_bound_terms", {{"kappa", kappa_term}, {"sqrt_h", sqrt_term}}}};
}

} // namespace gblab
