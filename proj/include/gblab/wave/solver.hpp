#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gblab/coefficients/field.hpp"
#include "gblab/core/errors.hpp"
#include "gblab/geometry/domain.hpp"
#include "gblab/geometry/metric.hpp"

namespace gblab {

/// Uniform node grid on an interval [lo, hi] or a square [lo, hi]^2, boundary nodes included.
struct WaveGrid {
    int dim = 1;
    int nodes = 0;
    double lo = 0.0;
    double hi = 1.0;

    static WaveGrid on(const DomainSpec& d, int nodes_per_axis) {
        if (d.kind == DomainKind::unit_ball) throw DomainError("wave grid: finite differences need an interval or a rectangle");
        if (d.dim < 1 || d.dim > 2) throw DomainError("wave grid: implemented for n <= 2");
        if (nodes_per_axis < 4) throw ParameterError("wave grid: need at least 4 nodes per axis");
        return {d.dim, nodes_per_axis, d.lo, d.hi};
    }

    double dx() const { return (hi - lo) / (nodes - 1); }
    std::size_t size() const { return dim == 1 ? static_cast<std::size_t>(nodes) : static_cast<std::size_t>(nodes) * nodes; }
    std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(j) * nodes + i; }
    double coord(int i) const { return lo + i * dx(); }

    Vec point(std::size_t k) const {
        if (dim == 1) return Vec::Constant(1, coord(static_cast<int>(k)));
        return (Vec(2) << coord(static_cast<int>(k % nodes)), coord(static_cast<int>(k / nodes))).finished();
    }

    bool on_boundary(std::size_t k) const {
        const int i = static_cast<int>(k % nodes);
        if (dim == 1) return i == 0 || i == nodes - 1;
        const int j = static_cast<int>(k / nodes);
        return i == 0 || j == 0 || i == nodes - 1 || j == nodes - 1;
    }

    std::vector<double> sample(const std::function<double(const Vec&)>& f) const {
        std::vector<double> v(size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(point(k));
        return v;
    }
};

/// Divergence-form Laplace-Beltrami on a WaveGrid, (L u) = (1/sqrt g) d_j (sqrt g g^{jk} d_k u), with
/// face coefficients at midpoints. Rows on boundary nodes are zero.
struct LaplaceBeltrami {
    WaveGrid grid;
    std::vector<double> sqrtg;
    /// sqrt g g^{11} at (i + 1/2, j); sqrt g g^{22} at (i, j + 1/2); sqrt g g^{12} at nodes.
    std::vector<double> cx, cy, cxy;

    LaplaceBeltrami(const MetricField& metric, const WaveGrid& g) : grid(g) {
        if (metric.dim() != g.dim) throw ParameterError("LaplaceBeltrami: metric and grid dimensions differ");
        const std::size_t N = g.size();
        const double dx = g.dx();
        sqrtg.resize(N);
        cx.assign(N, 0.0);
        cy.assign(N, 0.0);
        cxy.assign(N, 0.0);
        auto coef = [&metric](const Vec& x, int a, int b) {
            const Mat gm = metric.eval_g(x);
            return std::sqrt(gm.determinant()) * gm.inverse()(a, b);
        };
        for (std::size_t k = 0; k < N; ++k) {
            const Vec x = g.point(k);
            sqrtg[k] = std::sqrt(metric.eval_g(x).determinant());
            Vec xm = x;
            xm(0) += 0.5 * dx;
            cx[k] = coef(xm, 0, 0);
            if (g.dim == 2) {
                Vec ym = x;
                ym(1) += 0.5 * dx;
                cy[k] = coef(ym, 1, 1);
                cxy[k] = coef(x, 0, 1);
            }
        }
    }

    std::vector<double> apply(const std::vector<double>& u) const {
        const int n = grid.nodes;
        const double dx = grid.dx(), d2 = dx * dx;
        std::vector<double> out(u.size(), 0.0);
        if (grid.dim == 1) {
            for (int i = 1; i < n - 1; ++i)
                out[static_cast<std::size_t>(i)] =
                    (cx[static_cast<std::size_t>(i)] * (u[static_cast<std::size_t>(i) + 1] - u[static_cast<std::size_t>(i)]) -
                     cx[static_cast<std::size_t>(i) - 1] * (u[static_cast<std::size_t>(i)] - u[static_cast<std::size_t>(i) - 1])) /
                    (d2 * sqrtg[static_cast<std::size_t>(i)]);
            return out;
        }
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                const std::size_t k = grid.index(i, j);
                const std::size_t e = grid.index(i + 1, j), w = grid.index(i - 1, j), nn = grid.index(i, j + 1),
                                  s = grid.index(i, j - 1);
                double acc = cx[k] * (u[e] - u[k]) - cx[w] * (u[k] - u[w]) + cy[k] * (u[nn] - u[k]) - cy[s] * (u[k] - u[s]);
                // d_1 (c12 d_2 u) + d_2 (c12 d_1 u) by centred differences
                const auto ne = grid.index(i + 1, j + 1), nw = grid.index(i - 1, j + 1), se = grid.index(i + 1, j - 1),
                           sw = grid.index(i - 1, j - 1);
                acc += 0.25 * (cxy[e] * (u[ne] - u[se]) - cxy[w] * (u[nw] - u[sw]));
                acc += 0.25 * (cxy[nn] * (u[ne] - u[nw]) - cxy[s] * (u[se] - u[sw]));
                out[k] = acc / (d2 * sqrtg[k]);
            }
        return out;
    }

    /// Quadrature weight sqrt(g) dx^n; zero on boundary nodes.
    double weight(std::size_t k) const { return grid.on_boundary(k) ? 0.0 : sqrtg[k] * std::pow(grid.dx(), grid.dim); }
};

/// <a, b> with the Laplace-Beltrami weights.
inline double weighted_inner(const LaplaceBeltrami& L, const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += L.weight(k) * a[k] * b[k];
    return s;
}

/// ||u||^2_{H^1_0} = <-L u, u>.
inline double h1_seminorm_sq(const LaplaceBeltrami& L, const std::vector<double>& u) {
    const auto Lu = L.apply(u);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s -= L.weight(k) * Lu[k] * u[k];
    return s;
}

inline double l2_sq(const LaplaceBeltrami& L, const std::vector<double>& u) { return weighted_inner(L, u, u); }

struct BoundaryTrace {
    std::vector<double> times;
    std::vector<std::size_t> nodes;
    /// Boundary measure of each node.
    std::vector<double> weights;
    /// values[t][b] = d_nu u(times[t], nodes[b]).
    std::vector<std::vector<double>> values;

    /// ||d_nu u||^2 over (0, T) x boundary, trapezoid in time.
    double norm_sq() const {
        double acc = 0.0;
        for (std::size_t t = 0; t + 1 < times.size(); ++t) {
            double a = 0.0, b = 0.0;
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                a += weights[k] * values[t][k] * values[t][k];
                b += weights[k] * values[t + 1][k] * values[t + 1][k];
            }
            acc += 0.5 * (times[t + 1] - times[t]) * (a + b);
        }
        return acc;
    }
};

namespace detail {

struct TraceStencil {
    std::size_t node;
    std::size_t in1, in2;
    double factor;
    double weight;
};

/// One-sided second-order stencils for d_nu u = n_a sqrt(g^{aa}) d_a u (u = 0 on the boundary).
inline std::vector<TraceStencil> trace_stencils(const MetricField& metric, const WaveGrid& g) {
    std::vector<TraceStencil> out;
    const double dx = g.dx();
    const int n = g.nodes;
    auto add = [&](std::size_t b, std::size_t i1, std::size_t i2, int axis, int tangent_axis) {
        const Vec x = g.point(b);
        const Mat gm = metric.eval_g(x), gi = gm.inverse();
        const double w = g.dim == 1 ? 1.0 : std::sqrt(gm(tangent_axis, tangent_axis)) * dx;
        out.push_back({b, i1, i2, std::sqrt(gi(axis, axis)) / (2.0 * dx), w});
    };
    if (g.dim == 1) {
        add(0, 1, 2, 0, 0);
        add(g.index(n - 1), g.index(n - 2), g.index(n - 3), 0, 0);
        return out;
    }
    for (int j = 1; j < n - 1; ++j) {
        add(g.index(0, j), g.index(1, j), g.index(2, j), 0, 1);
        add(g.index(n - 1, j), g.index(n - 2, j), g.index(n - 3, j), 0, 1);
    }
    for (int i = 1; i < n - 1; ++i) {
        add(g.index(i, 0), g.index(i, 1), g.index(i, 2), 1, 0);
        add(g.index(i, n - 1), g.index(i, n - 2), g.index(i, n - 3), 1, 0);
    }
    return out;
}

/// d_nu u = sqrt(g^{aa}) (3 u_b - 4 u_1 + u_2) / (2 dx) with u_1, u_2 the inward neighbours.
inline std::vector<double> eval_trace(const std::vector<TraceStencil>& st, const std::vector<double>& u) {
    std::vector<double> v(st.size());
    for (std::size_t k = 0; k < st.size(); ++k) {
        const auto& s = st[k];
        v[k] = s.factor * (3.0 * u[s.node] - 4.0 * u[s.in1] + u[s.in2]);
    }
    return v;
}

} // namespace detail

struct WaveOptions {
    double cfl = 0.45;
    /// Keep every k-th state (0: only the final one).
    int save_every = 0;
    /// Source k(t, x) added to the right-hand side, alpha u_tt = L u + k.
    std::function<void(double, std::vector<double>&)> source;
};

struct WaveField {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> v;
};

struct WaveSolution {
    WaveGrid grid;
    double dt = 0.0;
    long steps = 0;
    double cfl = 0.0;
    std::vector<WaveField> history;
    BoundaryTrace trace;
    /// Energy at t = 0 and at the half steps t_{n+1/2}.
    std::vector<double> energy_times;
    std::vector<double> energy;

    double energy_drift() const {
        double worst = 0.0;
        for (double e : energy) worst = std::max(worst, std::abs(e - energy.front()));
        return energy.front() > 0.0 ? worst / energy.front() : worst;
    }
};

/// Largest characteristic speed sqrt(lambda_max(g^{-1}) / alpha) over the grid nodes.
inline double max_wave_speed(const CoefficientField& alpha, const MetricField& metric, const WaveGrid& g) {
    double c = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vec x = g.point(k);
        const double a = alpha(x);
        if (!(a > 0.0)) throw DomainError("solve_wave: coefficient " + alpha.id + " is not positive at a grid node");
        const Eigen::SelfAdjointEigenSolver<Mat> es(metric.eval_ginv(x));
        c = std::max(c, std::sqrt(es.eigenvalues().maxCoeff() / a));
    }
    return c;
}

/// Leapfrog for alpha u_tt = L u with Dirichlet data. The time step is T / ceil(T / dt_max), with
/// dt_max = cfl dx / (c_max sqrt n). Energy is the staggered form conserved by the scheme.
inline WaveSolution solve_wave(const CoefficientField& alpha, const MetricField& metric, const WaveGrid& grid,
                               const std::vector<double>& u0, const std::vector<double>& u1, double T,
                               const WaveOptions& opt = {}) {
    if (!(opt.cfl > 0.0) || opt.cfl > 0.5) throw CflError("solve_wave: cfl must lie in (0, 0.5]");
    if (!(T > 0.0)) throw ParameterError("solve_wave: T must be positive");
    const std::size_t N = grid.size();
    if (u0.size() != N || u1.size() != N) throw ParameterError("solve_wave: initial data size does not match the grid");
    double scale = 0.0;
    for (double v : u0) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < N; ++k)
        if (grid.on_boundary(k) && std::abs(u0[k]) > 1e-12 * std::max(scale, 1.0))
            throw PreconditionError("solve_wave: u0 must vanish on the boundary");

    const LaplaceBeltrami L(metric, grid);
    std::vector<double> a(N), w(N);
    for (std::size_t k = 0; k < N; ++k) {
        a[k] = alpha(grid.point(k));
        w[k] = L.weight(k);
    }
    const double c = max_wave_speed(alpha, metric, grid);
    const double dt_max = opt.cfl * grid.dx() / (c * std::sqrt(static_cast<double>(grid.dim)));
    const long steps = static_cast<long>(std::ceil(T / dt_max - 1e-12));
    const double dt = T / static_cast<double>(steps);

    WaveSolution sol;
    sol.grid = grid;
    sol.dt = dt;
    sol.steps = steps;
    sol.cfl = dt * c * std::sqrt(static_cast<double>(grid.dim)) / grid.dx();

    const auto stencils = detail::trace_stencils(metric, grid);
    for (const auto& s : stencils) {
        sol.trace.nodes.push_back(s.node);
        sol.trace.weights.push_back(s.weight);
    }

    std::vector<double> src(N, 0.0);
    auto rhs = [&](double t, const std::vector<double>& u) {
        auto Lu = L.apply(u);
        if (opt.source) {
            std::fill(src.begin(), src.end(), 0.0);
            opt.source(t, src);
        }
        for (std::size_t k = 0; k < N; ++k) Lu[k] = grid.on_boundary(k) ? 0.0 : (Lu[k] + src[k]) / a[k];
        return Lu;
    };

    std::vector<double> prev = u0, cur(N);
    {
        const auto acc = rhs(0.0, u0);
        for (std::size_t k = 0; k < N; ++k) cur[k] = grid.on_boundary(k) ? 0.0 : u0[k] + dt * u1[k] + 0.5 * dt * dt * acc[k];
    }
    auto energy_half = [&](const std::vector<double>& un, const std::vector<double>& un1) {
        const auto Lu = L.apply(un1);
        double kin = 0.0, pot = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            const double v = (un1[k] - un[k]) / dt;
            kin += w[k] * a[k] * v * v;
            pot -= w[k] * Lu[k] * un[k];
        }
        return 0.5 * (kin + pot);
    };
    {
        double kin = 0.0;
        for (std::size_t k = 0; k < N; ++k) kin += w[k] * a[k] * u1[k] * u1[k];
        sol.energy_times.push_back(0.0);
        sol.energy.push_back(0.5 * kin + 0.5 * h1_seminorm_sq(L, u0));
    }
    auto record = [&](long n, const std::vector<double>& u, const std::vector<double>& v) {
        sol.trace.times.push_back(n * dt);
        sol.trace.values.push_back(detail::eval_trace(stencils, u));
        if (opt.save_every > 0 && n % opt.save_every == 0) sol.history.push_back({n * dt, u, v});
    };
    record(0, u0, u1);
    std::vector<double> next(N), vel(N);
    for (long n = 1; n <= steps; ++n) {
        sol.energy_times.push_back((n - 0.5) * dt);
        sol.energy.push_back(energy_half(prev, cur));
        const auto acc = rhs(n * dt, cur);
        bool finite = true;
        for (std::size_t k = 0; k < N; ++k) {
            next[k] = grid.on_boundary(k) ? 0.0 : 2.0 * cur[k] - prev[k] + dt * dt * acc[k];
            vel[k] = (next[k] - prev[k]) / (2.0 * dt);
            finite = finite && std::isfinite(next[k]);
        }
        if (!finite) throw BlowupError("solve_wave: non-finite values at step " + std::to_string(n), n);
        record(n, cur, vel);
        prev.swap(cur);
        cur.swap(next);
    }
    if (opt.save_every == 0 || steps % opt.save_every != 0) sol.history.push_back({steps * dt, prev, vel});
    return sol;
}

/// Normal-derivative trace recomputed from the stored states.
inline BoundaryTrace dtn_trace(const WaveSolution& sol, const MetricField& metric) {
    const auto st = detail::trace_stencils(metric, sol.grid);
    BoundaryTrace tr;
    for (const auto& s : st) {
        tr.nodes.push_back(s.node);
        tr.weights.push_back(s.weight);
    }
    for (const auto& f : sol.history) {
        tr.times.push_back(f.t);
        tr.values.push_back(detail::eval_trace(st, f.u));
    }
    return tr;
}

/// m-th time derivative of a trace by repeated centred differences; each pass drops the end samples.
inline BoundaryTrace trace_time_derivative(const BoundaryTrace& tr, int m) {
    BoundaryTrace out = tr;
    for (int pass = 0; pass < m; ++pass) {
        if (out.times.size() < 3) throw ParameterError("trace_time_derivative: too few samples");
        BoundaryTrace d = out;
        d.times.assign(out.times.begin() + 1, out.times.end() - 1);
        d.values.clear();
        for (std::size_t t = 1; t + 1 < out.times.size(); ++t) {
            std::vector<double> row(out.nodes.size());
            const double h = out.times[t + 1] - out.times[t - 1];
            for (std::size_t k = 0; k < row.size(); ++k) row[k] = (out.values[t + 1][k] - out.values[t - 1][k]) / h;
            d.values.push_back(row);
        }
        out = d;
    }
    return out;
}

inline void write_trace_csv(const std::string& path, const BoundaryTrace& tr) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path);
    os.precision(17);
    os << "t,node,value\n";
    for (std::size_t t = 0; t < tr.times.size(); ++t)
        for (std::size_t k = 0; k < tr.nodes.size(); ++k) os << tr.times[t] << "," << tr.nodes[k] << "," << tr.values[t][k] << "\n";
}

/// k-fold application of f -> alpha^{-1} L f.
inline std::vector<double> d_alpha_apply(const CoefficientField& alpha, const MetricField& metric, const WaveGrid& grid,
                                         const std::vector<double>& f, int k) {
    if (k < 0) throw ParameterError("d_alpha_apply: k must be non-negative");
    const LaplaceBeltrami L(metric, grid);
    std::vector<double> out = f;
    for (int r = 0; r < k; ++r) {
        out = L.apply(out);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] /= alpha(grid.point(i));
    }
    return out;
}

} // namespace gblab
