#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "gblab/core/errors.hpp"
#include "gblab/core/fft.hpp"
#include "gblab/xray/transform.hpp"

namespace gblab {

/// Fourier multiplier |xi|^{-alpha} on a 2-D image, treated as periodic after zero padding to
/// `pad` times its size; xi = 0 maps to 0. alpha = 0 is the identity.
inline Image riesz_apply(const Image& u, double alpha, int pad = 1, int dim = 2) {
    if (alpha >= dim) throw ParameterError("riesz_apply: order must be below the dimension");
    if (alpha == 0.0) return u;
    const int n = u.n, N = pad * n, off = (N - n) / 2;
    std::vector<cplx> buf(static_cast<std::size_t>(N) * N, 0.0);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) buf[static_cast<std::size_t>(iy + off) * N + ix + off] = u.at(ix, iy);
    buf = fft::forward2(buf, static_cast<std::size_t>(N), static_cast<std::size_t>(N));
    const auto k = fft::frequencies(static_cast<std::size_t>(N), u.dx());
    for (int iy = 0; iy < N; ++iy)
        for (int ix = 0; ix < N; ++ix) {
            const double r = std::hypot(k[static_cast<std::size_t>(ix)], k[static_cast<std::size_t>(iy)]);
            buf[static_cast<std::size_t>(iy) * N + ix] *= r == 0.0 ? 0.0 : std::pow(r, -alpha);
        }
    buf = fft::inverse2(buf, static_cast<std::size_t>(N), static_cast<std::size_t>(N));
    Image out(n, u.half_width);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) out.at(ix, iy) = buf[static_cast<std::size_t>(iy + off) * N + ix + off].real();
    return out;
}

/// Spatial kernel of the band-limited multiplier |eta|^{-alpha} on offset spacing ds, for |k| <= half,
/// obtained from a 16x oversampled frequency grid.
inline std::vector<double> offset_kernel(double alpha, std::size_t half, double ds) {
    static std::mutex mu;
    static std::map<std::tuple<double, std::size_t, double>, std::vector<double>> cache;
    const auto key = std::make_tuple(alpha, half, ds);
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const std::size_t N = 16 * half;
    const auto k = fft::frequencies(N, ds);
    std::vector<cplx> spec(N);
    for (std::size_t i = 0; i < N; ++i) spec[i] = k[i] == 0.0 ? 0.0 : std::pow(std::abs(k[i]), -alpha);
    const auto h = fft::inverse(spec);
    std::vector<double> out(2 * half + 1);
    for (std::size_t j = 0; j <= 2 * half; ++j) {
        const long m = static_cast<long>(j) - static_cast<long>(half);
        out[j] = h[static_cast<std::size_t>((m + static_cast<long>(N)) % static_cast<long>(N))].real() / ds;
    }
    std::lock_guard<std::mutex> lock(mu);
    cache[key] = out;
    return out;
}

/// Multiplier |eta|^{-alpha} along the offset variable of every direction, by linear convolution
/// with the band-limited kernel. The result lives on offsets extended to `extend` times the input range.
inline Sinogram riesz_offsets(const Sinogram& g, double alpha, double extend = 1.0) {
    if (alpha >= 1.0) throw ParameterError("riesz_offsets: order must be below 1");
    const std::size_t ns = g.n_offsets();
    const double ds = g.ds();
    const auto pad = static_cast<std::size_t>(std::ceil((extend - 1.0) * 0.5 * static_cast<double>(ns - 1)));
    const std::size_t no = ns + 2 * pad;
    Sinogram out = g;
    out.offsets.resize(no);
    for (std::size_t i = 0; i < no; ++i) out.offsets[i] = g.offsets.front() + (static_cast<double>(i) - static_cast<double>(pad)) * ds;
    out.values.assign(g.n_angles() * no, 0.0);
    if (alpha == 0.0) {
        for (std::size_t j = 0; j < g.n_angles(); ++j)
            for (std::size_t i = 0; i < ns; ++i) out.at(j, i + pad) = g.at(j, i);
        return out;
    }
    const std::size_t half = no;
    const auto h = offset_kernel(alpha, half, ds);
    for (std::size_t j = 0; j < g.n_angles(); ++j)
        for (std::size_t i = 0; i < no; ++i) {
            double acc = 0.0;
            for (std::size_t m = 0; m < ns; ++m) {
                const long d = static_cast<long>(i) - static_cast<long>(pad) - static_cast<long>(m);
                acc += h[static_cast<std::size_t>(d + static_cast<long>(half))] * g.at(j, m);
            }
            out.at(j, i) = acc * ds;
        }
    return out;
}

/// X^{-alpha} P* X^{alpha - 1} g on an n-by-n grid of [-L, L]^2, without the constant.
inline Image reconstruct_raw(const Sinogram& g, double alpha, int n, double L = 1.0) {
    if (alpha >= 2.0) throw ParameterError("reconstruct: order must be below the dimension");
    const double R = g.offsets.back();
    if (alpha == 0.0) return adjoint_P(riesz_offsets(g, -1.0, std::sqrt(2.0) * L / R + 0.05), n, L);
    const Sinogram filtered = riesz_offsets(g, alpha - 1.0, 2.0 * std::sqrt(2.0) * L / R + 0.05);
    const Image wide = adjoint_P(filtered, 2 * n, 2 * L);
    const Image lifted = riesz_apply(wide, -alpha, 1);
    Image out(n, L);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) out.at(ix, iy) = lifted.at(ix + n / 2, iy + n / 2);
    return out;
}

/// Least-squares scalar c with c * raw ~ f.
inline double fit_constant(const Image& raw, const Image& f) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < raw.values.size(); ++i) {
        num += raw.values[i] * f.values[i];
        den += raw.values[i] * raw.values[i];
    }
    return num / den;
}

/// int Pf(theta, s) ds averaged over directions; equals int f by mass conservation.
inline double sinogram_mass(const Sinogram& g) {
    double acc = 0.0;
    for (double v : g.values) acc += v;
    return acc * g.ds() / static_cast<double>(g.n_angles());
}

inline Image shifted(Image im, double by) {
    for (double& v : im.values) v += by;
    return im;
}

/// Constant of the reconstruction formula calibrated once per (alpha, geometry, grid) on the Gaussian
/// phantom; cached. For alpha > 0 the fit is done after mean restoration.
inline double reconstruction_constant(double alpha, std::size_t n_angles, std::size_t n_offsets, int n, double L = 1.0) {
    static std::mutex mu;
    static std::map<std::tuple<double, std::size_t, std::size_t, int, double>, double> cache;
    const auto key = std::make_tuple(alpha, n_angles, n_offsets, n, L);
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const Phantom ph = phantoms::gauss();
    const Sinogram g = xray_forward_euclid(ph.fn, uniform_angles(n_angles), uniform_offsets(n_offsets));
    const Image raw = reconstruct_raw(g, alpha, n, L);
    const Image f = rasterize(ph.fn, n, L);
    const double area = 4 * L * L;
    const double c = alpha == 0.0 ? fit_constant(raw, f)
                                  : fit_constant(shifted(raw, -raw.integral() / area), shifted(f, -sinogram_mass(g) / area));
    std::lock_guard<std::mutex> lock(mu);
    cache[key] = c;
    return c;
}

/// Inverse formula f = c X^{-alpha} P* X^{alpha - 1} g with the calibrated constant. For alpha > 0 the
/// mean over [-L, L]^2, lost with the zero frequency, is restored from the sinogram mass.
inline Image reconstruct(const Sinogram& g, double alpha, int n = 256, double L = 1.0) {
    const double c = reconstruction_constant(alpha, g.n_angles(), g.n_offsets(), n, L);
    Image im = reconstruct_raw(g, alpha, n, L);
    for (double& v : im.values) v *= c;
    if (alpha != 0.0) im = shifted(im, (sinogram_mass(g) - im.integral()) / (4 * L * L));
    return im;
}

/// (int_{S^1} int (1 + eta^2)^{alpha0} |g^(theta, eta)|^2 deta dtheta)^{1/2} with the unitary transform in s.
inline double sinogram_sobolev_norm(const Sinogram& g, double alpha0) {
    const std::size_t ns = g.n_offsets(), N = 2 * ns;
    const auto k = fft::frequencies(N, g.ds());
    const double deta = 2 * pi / (static_cast<double>(N) * g.ds());
    double acc = 0.0;
    std::vector<cplx> row(N);
    for (std::size_t j = 0; j < g.n_angles(); ++j) {
        std::fill(row.begin(), row.end(), cplx(0.0));
        for (std::size_t i = 0; i < ns; ++i) row[i] = g.at(j, i);
        const auto spec = fft::forward(row);
        for (std::size_t i = 0; i < N; ++i) {
            const double gh = std::norm(spec[i]) * g.ds() * g.ds() / (2 * pi);
            acc += std::pow(1.0 + k[i] * k[i], alpha0) * gh * deta;
        }
    }
    return std::sqrt(2.0 * g.dtheta() * acc);
}

/// H^s norm of an image extended by zero (unitary transform).
inline double image_sobolev_norm(const Image& u, double s, int pad = 2) {
    const int n = u.n, N = pad * n;
    std::vector<cplx> buf(static_cast<std::size_t>(N) * N, 0.0);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) buf[static_cast<std::size_t>(iy) * N + ix] = u.at(ix, iy);
    buf = fft::forward2(buf, static_cast<std::size_t>(N), static_cast<std::size_t>(N));
    const auto k = fft::frequencies(static_cast<std::size_t>(N), u.dx());
    double acc = 0.0;
    for (int iy = 0; iy < N; ++iy)
        for (int ix = 0; ix < N; ++ix) {
            const double r2 = k[static_cast<std::size_t>(ix)] * k[static_cast<std::size_t>(ix)] +
                              k[static_cast<std::size_t>(iy)] * k[static_cast<std::size_t>(iy)];
            acc += std::pow(1.0 + r2, s) * std::norm(buf[static_cast<std::size_t>(iy) * N + ix]);
        }
    // discrete Parseval: sum |u|^2 dx^2 = sum |U|^2 dx^2 / N^2
    return std::sqrt(acc * u.dx() * u.dx() / (static_cast<double>(N) * N));
}

} // namespace gblab
