#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gblab/core/errors.hpp"
#include "gblab/core/numerics.hpp"
#include "gblab/geometry/flow.hpp"

namespace gblab {

/// Core interval [t0, t1] of a chart together with its overlap extension [lo, hi].
struct ChartInterval {
    double t0 = 0.0;
    double t1 = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct FermiChart {
    Ray ray;
    std::vector<Mat> frames; // n x (n-1) per sample, columns E_2..E_n
    double tube_radius = 0.0;
    std::vector<ChartInterval> chart_intervals;
    std::vector<double> self_intersections;
    double curvature_estimate = 0.0;

    /// max over samples of |Gram(T, E_2..E_n) - I|.
    double gram_defect(const MetricField& metric) const {
        double worst = 0.0;
        for (std::size_t i = 0; i < frames.size(); ++i) worst = std::max(worst, (gram(metric, i) - Mat::Identity(metric.dim(), metric.dim())).cwiseAbs().maxCoeff());
        return worst;
    }

    /// Orthonormal basis (unit tangent, E_2..E_n) at sample i, as columns.
    Mat basis(const MetricField& metric, std::size_t i) const {
        const auto& s = ray.samples[i];
        const int n = metric.dim();
        Vec xdot = metric.eval_ginv(s.x) * s.p;
        xdot /= std::sqrt(xdot.dot(metric.eval_g(s.x) * xdot));
        Mat b(n, n);
        b.col(0) = xdot;
        if (n > 1) b.rightCols(n - 1) = frames[i];
        return b;
    }

    Mat gram(const MetricField& metric, std::size_t i) const {
        const Mat b = basis(metric, i);
        return b.transpose() * metric.eval_g(ray.samples[i].x) * b;
    }

    /// max over interior samples of the parallel-transport residual
    /// |dE/dt + Gamma(x', E)| computed with centered differences; O(dt^2).
    double transport_residual(const MetricField& metric) const {
        double worst = 0.0;
        const int n = metric.dim();
        if (n < 2) return 0.0;
        for (std::size_t i = 1; i + 1 < frames.size(); ++i) {
            const double dtl = ray.samples[i].t - ray.samples[i - 1].t;
            const double dtr = ray.samples[i + 1].t - ray.samples[i].t;
            if (std::abs(dtl - dtr) > 1e-12) continue;
            const Mat dE = (frames[i + 1] - frames[i - 1]) / (dtl + dtr);
            const auto& s = ray.samples[i];
            const Vec xdot = metric.eval_ginv(s.x) * s.p;
            const Tensor3 gam = christoffel(metric, s.x);
            Mat r = dE;
            for (int k = 0; k < n; ++k)
                for (int c = 0; c < n - 1; ++c) r(k, c) += xdot.dot(gam[static_cast<std::size_t>(k)] * frames[i].col(c));
            worst = std::max(worst, r.cwiseAbs().maxCoeff());
        }
        return worst;
    }
};

/// Riemann tensor Frobenius norm from centered differences of Christoffel symbols.
inline double curvature_norm(const MetricField& metric, const Vec& x, double step = 1e-4) {
    const int n = metric.dim();
    if (n < 2) return 0.0;
    const auto un = static_cast<std::size_t>(n);
    const Tensor3 gam = christoffel(metric, x);
    std::vector<Tensor3> dgam(un); // dgam[c][a](d, b) = d_c Gamma^a_{db}
    for (int c = 0; c < n; ++c) {
        const Vec e = step * unit_vector(n, c);
        const Tensor3 up = christoffel(metric, x + e), dn = christoffel(metric, x - e);
        dgam[static_cast<std::size_t>(c)].resize(un);
        for (std::size_t a = 0; a < un; ++a) dgam[static_cast<std::size_t>(c)][a] = (up[a] - dn[a]) / (2.0 * step);
    }
    double acc = 0.0;
    for (std::size_t a = 0; a < un; ++a)
        for (std::size_t b = 0; b < un; ++b)
            for (std::size_t c = 0; c < un; ++c)
                for (std::size_t d = 0; d < un; ++d) {
                    double r = dgam[c][a](static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(b)) -
                               dgam[d][a](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b));
                    for (std::size_t e = 0; e < un; ++e)
                        r += gam[a](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(e)) * gam[e](static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(b)) -
                             gam[a](static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(e)) * gam[e](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b));
                    acc += r * r;
                }
    return std::sqrt(acc);
}

struct FermiOptions {
    double radius_cap = 0.25;
    double radius_constant = 0.5;
    int curvature_stride = 50;
    /// Chart core length; 0 means use the tube radius.
    double chart_length = 0.0;
};

namespace detail {

/// Gram-Schmidt in the g inner product, starting from the unit tangent.
inline Mat initial_frame(const Mat& g, const Vec& tangent) {
    const int n = static_cast<int>(g.rows());
    std::vector<Vec> basis{tangent / std::sqrt(tangent.dot(g * tangent))};
    for (int j = 0; j < n && static_cast<int>(basis.size()) < n; ++j) {
        Vec v = unit_vector(n, j);
        for (const Vec& b : basis) v -= v.dot(g * b) * b;
        const double len = std::sqrt(v.dot(g * v));
        if (len > 1e-6) basis.push_back(v / len);
    }
    Mat out(n, n - 1);
    for (int c = 1; c < n; ++c) out.col(c - 1) = basis[static_cast<std::size_t>(c)];
    return out;
}

inline std::vector<ChartInterval> make_intervals(std::vector<double> breaks) {
    std::sort(breaks.begin(), breaks.end());
    std::vector<ChartInterval> out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i], b = breaks[i + 1];
        if (b - a <= 1e-12) continue;
        out.push_back({a, b, a, b});
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double left = i > 0 ? out[i - 1].t1 - out[i - 1].t0 : 0.0;
        const double right = i + 1 < out.size() ? out[i + 1].t1 - out[i + 1].t0 : 0.0;
        const double own = out[i].t1 - out[i].t0;
        if (i > 0) out[i].lo = out[i].t0 - 0.25 * std::min(own, left);
        if (i + 1 < out.size()) out[i].hi = out[i].t1 + 0.25 * std::min(own, right);
    }
    return out;
}

} // namespace detail

/// Parallel-transported orthonormal normal frame along `ray`, tube radius and chart cover.
inline FermiChart fermi_frame(const Ray& ray, const MetricField& metric, const FermiOptions& opt = {}) {
    if (ray.samples.size() < 2) throw PreconditionError("fermi_frame: ray needs at least two samples");
    const int n = metric.dim();
    FermiChart chart;
    chart.ray = ray;
    const std::size_t ns = ray.samples.size();
    chart.frames.resize(ns);
    if (n > 1) {
        const auto& s0 = ray.samples.front();
        Mat E = detail::initial_frame(metric.eval_g(s0.x), metric.eval_ginv(s0.x) * s0.p);
        const int m = n - 1;
        // state: x (n), p (n), E columns (n*m)
        Vec y(2 * n + n * m);
        y << s0.x, s0.p, Eigen::Map<const Vec>(E.data(), n * m);
        auto rhs = [&metric, n, m](double, const Vec& s) {
            Vec out(s.size());
            const Vec x = s.head(n), p = s.segment(n, n);
            const MetricJet j = metric.jet(x, 1);
            const Vec xdot = j.ginv * p;
            out.head(n) = xdot;
            for (int k = 0; k < n; ++k) out(n + k) = -0.5 * p.dot(j.dginv[static_cast<std::size_t>(k)] * p);
            const Tensor3 gam = christoffel(metric, x);
            for (int c = 0; c < m; ++c) {
                const Vec e = s.segment(2 * n + c * n, n);
                for (int k = 0; k < n; ++k) out(2 * n + c * n + k) = -xdot.dot(gam[static_cast<std::size_t>(k)] * e);
            }
            return out;
        };
        chart.frames[0] = E;
        for (std::size_t i = 1; i < ns; ++i) {
            const double h = ray.samples[i].t - ray.samples[i - 1].t;
            y = rk4_step(y, ray.samples[i - 1].t, h, rhs);
            if (!y.allFinite()) throw ChartError("fermi_frame: non-finite frame; reduce dt");
            chart.frames[i] = Eigen::Map<const Mat>(y.data() + 2 * n, n, m);
            chart.ray.samples[i].x = y.head(n);
            chart.ray.samples[i].p = y.segment(n, n);
            const double det = chart.gram(metric, i).determinant();
            if (det < 0.5) throw ChartError("fermi_frame: frame degenerated (Gram determinant " + std::to_string(det) + "); reduce dt");
        }
    } else {
        for (auto& f : chart.frames) f = Mat(1, 0);
    }

    double rmax = 0.0;
    const std::size_t stride = static_cast<std::size_t>(std::max(1, opt.curvature_stride));
    for (std::size_t i = 0; i < ns; i += stride) rmax = std::max(rmax, curvature_norm(metric, ray.samples[i].x));
    rmax = std::max(rmax, curvature_norm(metric, ray.samples.back().x));
    chart.curvature_estimate = rmax;
    chart.tube_radius = std::min(opt.radius_cap, opt.radius_constant / std::sqrt(1.0 + rmax));

    const double t_end = ray.samples.back().t;
    const double len = opt.chart_length > 0.0 ? opt.chart_length : chart.tube_radius;
    std::vector<double> breaks{0.0, t_end};
    for (double t = len; t < t_end - 0.5 * len; t += len) breaks.push_back(t);

    // A return of the ray to within the tube radius of an earlier point, after
    // leaving it, is treated as a self-intersection and becomes a chart break.
    const double sep = 4.0 * chart.tube_radius;
    for (std::size_t i = 0; i < ns; i += stride) {
        for (std::size_t j = i + stride; j < ns; j += stride) {
            if (ray.samples[j].t - ray.samples[i].t <= sep) continue;
            if ((ray.samples[j].x - ray.samples[i].x).norm() < chart.tube_radius) {
                chart.self_intersections.push_back(ray.samples[j].t);
                breaks.push_back(ray.samples[j].t);
                break;
            }
        }
    }
    chart.chart_intervals = detail::make_intervals(breaks);
    return chart;
}

} // namespace gblab
