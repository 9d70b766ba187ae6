#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gblab/core/errors.hpp"
#include "gblab/core/types.hpp"

namespace gblab {

/// Square cell-centred image on [-L, L]^2, row-major (row = y index).
struct Image {
    int n = 0;
    double half_width = 1.0;
    std::vector<double> values;

    Image() = default;
    Image(int n_, double L) : n(n_), half_width(L), values(static_cast<std::size_t>(n_) * n_, 0.0) {}

    double dx() const { return 2.0 * half_width / n; }
    double coord(int i) const { return -half_width + (i + 0.5) * dx(); }
    Vec point(int ix, int iy) const { return (Vec(2) << coord(ix), coord(iy)).finished(); }
    double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * n + ix]; }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * n + ix]; }

    double l2() const {
        double s = 0.0;
        for (double v : values) s += v * v;
        return std::sqrt(s * dx() * dx());
    }

    double integral() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * dx() * dx();
    }

    /// Bilinear interpolation; zero outside the cell-centre hull.
    double sample(const Vec& x) const {
        const double fx = (x(0) + half_width) / dx() - 0.5, fy = (x(1) + half_width) / dx() - 0.5;
        const int ix = static_cast<int>(std::floor(fx)), iy = static_cast<int>(std::floor(fy));
        if (ix < 0 || iy < 0 || ix + 1 >= n || iy + 1 >= n) return 0.0;
        const double ax = fx - ix, ay = fy - iy;
        return (1 - ax) * (1 - ay) * at(ix, iy) + ax * (1 - ay) * at(ix + 1, iy) + (1 - ax) * ay * at(ix, iy + 1) +
               ax * ay * at(ix + 1, iy + 1);
    }
};

inline Image rasterize(const std::function<double(const Vec&)>& f, int n, double L = 1.0) {
    Image im(n, L);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) im.at(ix, iy) = f(im.point(ix, iy));
    return im;
}

inline double relative_l2(const Image& a, const Image& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        num += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
        den += b.values[i] * b.values[i];
    }
    return std::sqrt(num / den);
}

/// Binary grid: int64 rows, int64 cols, then row-major doubles.
inline void write_grid_binary(const std::string& path, const std::vector<double>& v, std::int64_t rows, std::int64_t cols) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + path);
    os.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    os.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline std::vector<double> read_grid_binary(const std::string& path, std::int64_t& rows, std::int64_t& cols) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + path);
    is.read(reinterpret_cast<char*>(&rows), sizeof rows);
    is.read(reinterpret_cast<char*>(&cols), sizeof cols);
    std::vector<double> v(static_cast<std::size_t>(rows * cols));
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!is) throw ConfigError("truncated grid file " + path);
    return v;
}

struct Phantom {
    std::string id;
    std::function<double(const Vec&)> fn;
    /// Radius outside of which fn is negligible.
    double support_radius = 1.0;
};

namespace phantoms {

inline Phantom gauss(double width = 0.18) {
    return {"gauss", [width](const Vec& x) { return std::exp(-x.squaredNorm() / (width * width)); }, 1.0};
}

inline Phantom unit_gaussian() {
    return {"unit-gaussian", [](const Vec& x) { return std::exp(-x.squaredNorm()); }, 7.0};
}

inline Phantom disk() {
    // closed disk up to rounding
    return {"disk", [](const Vec& x) { return x.squaredNorm() <= 1.0 + 1e-12 ? 1.0 : 0.0; }, 1.0};
}

/// Smooth ellipse with a C^2 edge: 1 inside, 0 beyond the rim.
inline double smooth_ellipse(const Vec& x, double cx, double cy, double a, double b, double angle, double edge) {
    const double c = std::cos(angle), s = std::sin(angle);
    const double u = (c * (x(0) - cx) + s * (x(1) - cy)) / a, v = (-s * (x(0) - cx) + c * (x(1) - cy)) / b;
    const double r = std::sqrt(u * u + v * v);
    if (r <= 1.0 - edge) return 1.0;
    if (r >= 1.0) return 0.0;
    const double t = (1.0 - r) / edge;
    return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

inline Phantom shepp_like_smooth() {
    return {"shepp-like-smooth",
            [](const Vec& x) {
                return smooth_ellipse(x, 0, 0, 0.69, 0.92, 0, 0.15) - 0.6 * smooth_ellipse(x, 0, -0.02, 0.62, 0.85, 0, 0.15) -
                       0.3 * smooth_ellipse(x, 0.22, 0, 0.16, 0.38, -0.3, 0.4) -
                       0.3 * smooth_ellipse(x, -0.22, 0, 0.2, 0.45, 0.3, 0.4) +
                       0.2 * smooth_ellipse(x, 0, 0.35, 0.21, 0.25, 0, 0.4);
            },
            1.0};
}

/// Sum of five Gaussian bumps with seeded centres (|c| <= 0.4), widths in [0.08, 0.2] and signed amplitudes.
inline Phantom random_band_limited(unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uc(-0.4, 0.4), uw(0.08, 0.2), ua(-1.0, 1.0);
    std::vector<std::array<double, 4>> bumps;
    while (bumps.size() < 5) {
        const double x = uc(rng), y = uc(rng);
        if (x * x + y * y > 0.16) continue;
        bumps.push_back({x, y, uw(rng), ua(rng)});
    }
    return {"random:" + std::to_string(seed),
            [bumps](const Vec& p) {
                double s = 0.0;
                for (const auto& b : bumps) {
                    const double dx = p(0) - b[0], dy = p(1) - b[1];
                    s += b[3] * std::exp(-(dx * dx + dy * dy) / (b[2] * b[2]));
                }
                return s;
            },
            1.0};
}

} // namespace phantoms

inline Phantom phantom_from_id(const std::string& id) {
    if (id == "gauss") return phantoms::gauss();
    if (id == "disk") return phantoms::disk();
    if (id == "shepp-like-smooth") return phantoms::shepp_like_smooth();
    if (id == "unit-gaussian") return phantoms::unit_gaussian();
    if (id.rfind("random:", 0) == 0) return phantoms::random_band_limited(static_cast<unsigned>(std::stoul(id.substr(7))));
    throw ConfigError("unknown phantom id: " + id);
}

inline std::vector<std::string> phantom_ids() { return {"gauss", "disk", "shepp-like-smooth", "unit-gaussian", "random:<seed>"}; }

} // namespace gblab
