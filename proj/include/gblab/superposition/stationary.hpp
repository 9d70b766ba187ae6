#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "gblab/core/errors.hpp"
#include "gblab/core/grid.hpp"
#include "gblab/core/numerics.hpp"

namespace gblab {

struct DecayReport {
    std::vector<double> lambdas;
    std::vector<cplx> values;
    /// Fitted N with |I(lambda)| ~ lambda^{-N}.
    double order = 0.0;
    double min_gradient = 0.0;
};

/// I(lambda) = int exp(-pi i lambda phi) a v over the grid; fails if grad phi vanishes on supp v.
inline DecayReport stationary_phase_decay(const std::function<double(const Vec&)>& phi,
                                          const std::function<double(const Vec&)>& a,
                                          const std::function<double(const Vec&)>& v, const std::vector<double>& lambdas,
                                          const QuadratureGrid& grid, double grad_tol = 1e-6) {
    DecayReport r;
    r.lambdas = lambdas;
    std::vector<double> ph(grid.points.size()), av(grid.points.size());
    double gmin = std::numeric_limits<double>::infinity();
    const double e = 1e-6;
    for (std::size_t k = 0; k < grid.points.size(); ++k) {
        const Vec& x = grid.points[k];
        ph[k] = phi(x);
        const double vv = v(x);
        av[k] = a(x) * vv;
        if (vv == 0.0) continue;
        Vec g(x.size());
        for (Eigen::Index d = 0; d < x.size(); ++d) {
            Vec xp = x, xm = x;
            xp(d) += e;
            xm(d) -= e;
            g(d) = (phi(xp) - phi(xm)) / (2 * e);
        }
        gmin = std::min(gmin, g.norm());
    }
    r.min_gradient = gmin;
    if (gmin < grad_tol) throw PreconditionError("stationary_phase_decay: grad phi vanishes on supp v");
    std::vector<double> mags;
    for (double lam : lambdas) {
        cplx acc = 0.0;
        for (std::size_t k = 0; k < grid.points.size(); ++k)
            if (av[k] != 0.0) acc += grid.weights[k] * av[k] * std::exp(cplx(0.0, -pi * lam * ph[k]));
        r.values.push_back(acc);
        mags.push_back(std::abs(acc));
    }
    bool all_zero = true;
    for (double m : mags) all_zero = all_zero && m == 0.0;
    r.order = all_zero ? std::numeric_limits<double>::infinity() : -loglog_slope(lambdas, mags);
    return r;
}

} // namespace gblab
