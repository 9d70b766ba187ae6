#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "gblab/core/errors.hpp"
#include "gblab/geometry/domain.hpp"
#include "gblab/geometry/flow.hpp"
#include "gblab/xray/image.hpp"
#include "gblab/xray/riesz.hpp"
#include "gblab/xray/transform.hpp"

namespace gblab {

/// Entries (x, omega) on the inward boundary of the unit disk: n_points boundary points times n_angles
/// inward angles, both midpoint strata.
struct EntryGrid {
    int n_points = 128;
    int n_angles = 64;
    double dt = 8e-3;
    /// Exit-time bound used when checking that the fixture is simple.
    double simple_T_max = 6.0;
    int simple_samples = 64;
};

struct ManifoldEntry {
    Vec x;
    Vec omega;
    double mu = 0.0;
    double weight = 0.0;
};

struct ManifoldNormalResult {
    Image value;
    double ratio = 0.0;
    double f_norm = 0.0;
    int n_rays = 0;
};

/// True when every sampled boundary geodesic exits transversally before `T_max`.
inline bool is_simple_fixture(const MetricField& metric, const DomainSpec& domain, int n_samples, double T_max) {
    return check_nontrapping(metric, domain, n_samples, T_max).violations.empty();
}

/// mu = |<omega, nu>| with omega g-unit and nu the outer g-unit conormal; weight = dsigma_g dangle.
inline std::vector<ManifoldEntry> manifold_entries(const MetricField& metric, const DomainSpec& domain, const EntryGrid& grid) {
    if (domain.kind != DomainKind::unit_ball || domain.dim != 2)
        throw DomainError("manifold_entries: implemented for the unit disk");
    if (grid.n_points < 1 || grid.n_angles < 1) throw ParameterError("manifold_entries: empty entry grid");
    std::vector<ManifoldEntry> out;
    const double db = 2 * pi / grid.n_points, da = pi / grid.n_angles;
    for (int i = 0; i < grid.n_points; ++i) {
        const double b = (i + 0.5) * db;
        const Vec x = (Vec(2) << std::cos(b), std::sin(b)).finished();
        const Vec tan = (Vec(2) << -std::sin(b), std::cos(b)).finished();
        const Mat g = metric.eval_g(x);
        const double dsigma = std::sqrt(tan.dot(g * tan)) * db;
        const Vec nu = domain.boundary_normal(x, metric);
        for (int j = 0; j < grid.n_angles; ++j) {
            const double a = -0.5 * pi + (j + 0.5) * da;
            const Vec w = -std::cos(a) * x + std::sin(a) * tan;
            const Vec omega = w / std::sqrt(w.dot(g * w));
            out.push_back({x, omega, std::abs(nu.dot(omega)), dsigma * da});
        }
    }
    return out;
}

namespace detail {

/// Adds `mass` to the image as a Gaussian of width one cell centred at p, normalized on the grid.
inline void deposit(Image& im, const Vec& p, double mass) {
    const double dx = im.dx(), s2 = dx * dx;
    const int cx = static_cast<int>(std::floor((p(0) + im.half_width) / dx));
    const int cy = static_cast<int>(std::floor((p(1) + im.half_width) / dx));
    double wx[7], wy[7];
    for (int a = 0; a < 7; ++a) {
        const int ix = cx + a - 3, iy = cy + a - 3;
        const double ddx = ix >= 0 && ix < im.n ? im.coord(ix) - p(0) : 0.0;
        const double ddy = iy >= 0 && iy < im.n ? im.coord(iy) - p(1) : 0.0;
        wx[a] = ix >= 0 && ix < im.n ? std::exp(-ddx * ddx / (2 * s2)) : 0.0;
        wy[a] = iy >= 0 && iy < im.n ? std::exp(-ddy * ddy / (2 * s2)) : 0.0;
    }
    double sx = 0.0, sy = 0.0;
    for (int a = 0; a < 7; ++a) {
        sx += wx[a];
        sy += wy[a];
    }
    const double total = sx * sy;
    if (total == 0.0) return;
    const double scale = mass / (total * dx * dx);
    for (int a = 0; a < 7; ++a)
        for (int b = 0; b < 7; ++b)
            if (wx[a] * wy[b] != 0.0) im.at(cx + a - 3, cy + b - 3) += scale * wx[a] * wy[b];
}

/// Trapezoid weights on the (possibly shortened last step) ray samples.
inline std::vector<double> trapezoid_weights(const Ray& ray) {
    const std::size_t m = ray.samples.size();
    std::vector<double> w(m, 0.0);
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const double d = ray.samples[k + 1].t - ray.samples[k].t;
        w[k] += 0.5 * d;
        w[k + 1] += 0.5 * d;
    }
    return w;
}

} // namespace detail

/// (||u||^2 + ||grad u||^2)^{1/2} over the cells of the unit disk, with centred differences where both
/// neighbours lie inside.
inline double disk_h1_norm(const Image& u, double radius = 1.0) {
    const double dx = u.dx();
    auto in = [&](int ix, int iy) { return ix >= 0 && iy >= 0 && ix < u.n && iy < u.n && u.point(ix, iy).norm() < radius; };
    double acc = 0.0;
    for (int iy = 0; iy < u.n; ++iy)
        for (int ix = 0; ix < u.n; ++ix) {
            if (!in(ix, iy)) continue;
            acc += u.at(ix, iy) * u.at(ix, iy);
            if (in(ix - 1, iy) && in(ix + 1, iy)) {
                const double d = (u.at(ix + 1, iy) - u.at(ix - 1, iy)) / (2 * dx);
                acc += d * d;
            }
            if (in(ix, iy - 1) && in(ix, iy + 1)) {
                const double d = (u.at(ix, iy + 1) - u.at(ix, iy - 1)) / (2 * dx);
                acc += d * d;
            }
        }
    return std::sqrt(acc * dx * dx);
}

/// I*If on an n-by-n grid of [-1, 1]^2: every entry ray carries If weighted by mu and the entry measure,
/// deposited along the geodesic with the cell-wide Gaussian kernel. Ratio is ||I*If||_{H^1(M)} / ||f||_{L^2(M)}.
inline ManifoldNormalResult normal_operator_manifold(const MetricField& metric, const std::function<double(const Vec&)>& f,
                                                     const DomainSpec& domain, const EntryGrid& grid = {}, int n = 64) {
    if (!is_simple_fixture(metric, domain, grid.simple_samples, grid.simple_T_max))
        throw PreconditionError("normal_operator_manifold: metric '" + metric.id() + "' is not simple on this domain");
    ManifoldNormalResult res;
    res.value = Image(n, 1.0);
    for (const auto& e : manifold_entries(metric, domain, grid)) {
        const Ray ray = hamiltonian_flow(metric, {e.x, unit_covector(metric, e.x, e.omega)}, grid.dt, grid.simple_T_max, domain);
        if (!ray.exit_time) throw TrappedRayError("normal_operator_manifold: geodesic does not exit");
        const auto w = detail::trapezoid_weights(ray);
        double If = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) If += w[k] * f(ray.samples[k].x);
        ++res.n_rays;
        if (If == 0.0) continue;
        const double c = e.mu * e.weight * If;
        for (std::size_t k = 0; k < w.size(); ++k) detail::deposit(res.value, ray.samples[k].x, c * w[k]);
    }
    const Image fr = rasterize([&](const Vec& x) { return domain.inside(x) ? f(x) : 0.0; }, n, 1.0);
    res.f_norm = fr.l2();
    res.ratio = res.f_norm > 0.0 ? disk_h1_norm(res.value) / res.f_norm : 0.0;
    return res;
}

/// Pi = I* X^{-1}, realized on the Euclidean disk as filtered backprojection of u's own parallel X-ray data.
inline Image apply_pi(const Image& u, std::size_t n_angles = 180, std::size_t n_offsets = 129) {
    const Sinogram g = xray_forward_euclid([&u](const Vec& x) { return u.sample(x); }, uniform_angles(n_angles),
                                           uniform_offsets(n_offsets));
    return reconstruct(g, 0.0, u.n, u.half_width);
}

} // namespace gblab
