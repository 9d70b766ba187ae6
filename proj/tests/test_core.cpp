#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gblab/core/fft.hpp"
#include "gblab/core/numerics.hpp"

using namespace gblab;

TEST(Rk4, ExponentialDecayIsFourthOrder) {
    auto rhs = [](double, const Vec& y) { return Vec(-y); };
    auto err = [&](double dt) {
        Vec y = Vec::Ones(1);
        const int n = static_cast<int>(std::lround(1.0 / dt));
        for (int i = 0; i < n; ++i) y = rk4_step(y, i * dt, dt, rhs);
        return std::abs(y(0) - std::exp(-1.0));
    };
    const double ratio = err(0.1) / err(0.05);
    EXPECT_NEAR(std::log2(ratio), 4.0, 0.15);
}

TEST(Simpson, ExactForCubicsEvenAndOddIntervalCounts) {
    for (int n : {5, 6, 9, 10, 4}) {
        const double dx = 2.0 / (n - 1);
        std::vector<double> f(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double x = i * dx;
            f[static_cast<std::size_t>(i)] = x * x * x - x + 1.0;
        }
        EXPECT_NEAR(simpson(f, dx), 4.0 - 2.0 + 2.0, 1e-12) << n;
    }
}

TEST(Simpson, ComplexOverload) {
    std::vector<cplx> f(101);
    const double dx = pi / 100;
    for (int i = 0; i <= 100; ++i) f[static_cast<std::size_t>(i)] = std::exp(cplx(0, i * dx));
    const cplx v = simpson(f, dx);
    EXPECT_NEAR(v.real(), 0.0, 1e-7);
    EXPECT_NEAR(v.imag(), 2.0, 1e-7);
}

TEST(FitLine, RecoversSlopeAndIntercept) {
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    const LineFit f = fit_line(x, y);
    EXPECT_NEAR(f.slope, 2.0, 1e-14);
    EXPECT_NEAR(f.intercept, 1.0, 1e-14);
    EXPECT_NEAR(loglog_slope({1, 2, 4}, {1, 8, 64}), 3.0, 1e-12);
    EXPECT_THROW(fit_line(std::vector<double>{1}, std::vector<double>{1}), DomainError);
}

TEST(Smoothstep, EndpointsAndDerivatives) {
    EXPECT_EQ(smoothstep5(-1.0), 0.0);
    EXPECT_EQ(smoothstep5(2.0), 1.0);
    EXPECT_NEAR(smoothstep5(0.5), 0.5, 1e-15);
    for (double s : {0.1, 0.37, 0.8}) {
        const double e = 1e-6;
        EXPECT_NEAR(smoothstep5_d1(s), (smoothstep5(s + e) - smoothstep5(s - e)) / (2 * e), 1e-7);
        EXPECT_NEAR(smoothstep5_d2(s), (smoothstep5_d1(s + e) - smoothstep5_d1(s - e)) / (2 * e), 1e-6);
    }
}

TEST(Fft, RoundTripAndPureTone) {
    const std::size_t n = 64;
    std::vector<cplx> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::exp(cplx(0, 2 * pi * 5.0 * static_cast<double>(i) / n));
    const auto U = fft::forward(u);
    EXPECT_NEAR(std::abs(U[5]), static_cast<double>(n), 1e-9);
    const auto back = fft::inverse(U);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(std::abs(back[i] - u[i]), 0.0, 1e-12);
    const auto k = fft::frequencies(n, 1.0 / n);
    EXPECT_NEAR(k[5], 2 * pi * 5, 1e-12);
    EXPECT_NEAR(k[n - 1], -2 * pi, 1e-12);
}

TEST(Fft, TwoDimensionalRoundTrip) {
    const std::size_t ny = 8, nx = 16;
    std::vector<cplx> u(ny * nx);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = cplx(std::sin(0.3 * static_cast<double>(i)), std::cos(0.1 * static_cast<double>(i * i)));
    const auto back = fft::inverse2(fft::forward2(u, ny, nx), ny, nx);
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(std::abs(back[i] - u[i]), 0.0, 1e-12);
}
