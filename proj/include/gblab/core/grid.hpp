#pragma once

#include <cmath>
#include <vector>

#include "gblab/core/errors.hpp"
#include "gblab/core/types.hpp"

namespace gblab {

/// Tensor-product uniform grid with trapezoid weights.
struct QuadratureGrid {
    int dim = 1;
    double spacing = 0.0;
    std::vector<Vec> points;
    std::vector<double> weights;
};

/// Grid on the box [lo, hi] with n points per axis (n >= 2).
inline QuadratureGrid uniform_grid(const Vec& lo, const Vec& hi, int n) {
    if (n < 2) throw DomainError("uniform_grid: need at least two points per axis");
    const int dim = static_cast<int>(lo.size());
    QuadratureGrid g;
    g.dim = dim;
    Vec step = (hi - lo) / (n - 1);
    g.spacing = step.maxCoeff();
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    while (true) {
        Vec x(dim);
        double w = 1.0;
        for (int d = 0; d < dim; ++d) {
            const int i = idx[static_cast<std::size_t>(d)];
            x(d) = lo(d) + step(d) * i;
            w *= step(d) * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
        }
        g.points.push_back(x);
        g.weights.push_back(w);
        int d = 0;
        while (d < dim && ++idx[static_cast<std::size_t>(d)] == n) idx[static_cast<std::size_t>(d++)] = 0;
        if (d == dim) break;
    }
    return g;
}

/// Grid of the cube centre +- half_width with spacing at most `spacing`.
inline QuadratureGrid centred_grid(const Vec& centre, double half_width, double spacing) {
    const int n = static_cast<int>(std::ceil(2.0 * half_width / spacing)) + 1;
    return uniform_grid(centre.array() - half_width, centre.array() + half_width, std::max(n, 2));
}

} // namespace gblab
