#pragma once

#include <cstddef>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "gblab/core/types.hpp"

namespace gblab::fft {

/// Forward DFT, X_k = sum_j x_j exp(-2 pi i jk/N) (unscaled).
inline std::vector<cplx> forward(const std::vector<cplx>& in) {
    Eigen::FFT<double> engine;
    std::vector<cplx> out;
    engine.fwd(out, in);
    return out;
}

/// Inverse DFT including the 1/N factor.
inline std::vector<cplx> inverse(const std::vector<cplx>& in) {
    Eigen::FFT<double> engine;
    std::vector<cplx> out;
    engine.inv(out, in);
    return out;
}

/// Angular frequencies for an N-point grid with spacing dx, in DFT order.
inline std::vector<double> frequencies(std::size_t n, double dx) {
    std::vector<double> k(n);
    const double base = 2.0 * pi / (static_cast<double>(n) * dx);
    for (std::size_t i = 0; i < n; ++i) {
        const long j = (i <= n / 2) ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
        k[i] = base * static_cast<double>(j);
    }
    return k;
}

/// Row-major 2-D transform of an ny-by-nx array.
inline std::vector<cplx> forward2(const std::vector<cplx>& in, std::size_t ny, std::size_t nx) {
    Eigen::FFT<double> engine;
    std::vector<cplx> work(in), row(nx), col(ny), tmp;
    for (std::size_t r = 0; r < ny; ++r) {
        for (std::size_t c = 0; c < nx; ++c) row[c] = work[r * nx + c];
        engine.fwd(tmp, row);
        for (std::size_t c = 0; c < nx; ++c) work[r * nx + c] = tmp[c];
    }
    for (std::size_t c = 0; c < nx; ++c) {
        for (std::size_t r = 0; r < ny; ++r) col[r] = work[r * nx + c];
        engine.fwd(tmp, col);
        for (std::size_t r = 0; r < ny; ++r) work[r * nx + c] = tmp[r];
    }
    return work;
}

inline std::vector<cplx> inverse2(const std::vector<cplx>& in, std::size_t ny, std::size_t nx) {
    Eigen::FFT<double> engine;
    std::vector<cplx> work(in), row(nx), col(ny), tmp;
    for (std::size_t r = 0; r < ny; ++r) {
        for (std::size_t c = 0; c < nx; ++c) row[c] = work[r * nx + c];
        engine.inv(tmp, row);
        for (std::size_t c = 0; c < nx; ++c) work[r * nx + c] = tmp[c];
    }
    for (std::size_t c = 0; c < nx; ++c) {
        for (std::size_t r = 0; r < ny; ++r) col[r] = work[r * nx + c];
        engine.inv(tmp, col);
        for (std::size_t r = 0; r < ny; ++r) work[r * nx + c] = tmp[r];
    }
    return work;
}

} // namespace gblab::fft
