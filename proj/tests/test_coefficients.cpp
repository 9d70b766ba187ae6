#include <cmath>

#include <gtest/gtest.h>

#include "gblab/coefficients/field.hpp"
#include "gblab/coefficients/regularity.hpp"
#include "gblab/geometry/registry.hpp"

using namespace gblab;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

std::vector<Vec> grid1(double lo, double hi, int n) {
    std::vector<Vec> out;
    for (double x : linspace(lo, hi, n)) out.push_back(v1(x));
    return out;
}

} // namespace

TEST(Kappa, Examples) {
    EXPECT_DOUBLE_EQ(modulus_kappa(RegularityClass::zygmund, 0.25), 0.25);
    EXPECT_NEAR(modulus_kappa(RegularityClass::log_lipschitz, 0.5), 0.5 * std::log(3.0), 1e-15);
    EXPECT_NEAR(modulus_kappa(RegularityClass::log_lipschitz, 0.5), 0.5493, 1e-4);
    EXPECT_GT(modulus_kappa(RegularityClass::log_zygmund, 1e-6) / 1e-6, 13.8);
    EXPECT_THROW(modulus_kappa(RegularityClass::zygmund, 0.0), DomainError);
    EXPECT_THROW(modulus_kappa(RegularityClass::zygmund, 1.0), DomainError);
}

TEST(Kappa, LogRatioDecreasingAndAtLeastOneBelowThreshold) {
    // log(1 + 1/y) >= 1 exactly when y <= 1/(e - 1); above that it drops toward log 2
    const double y_star = 1.0 / (std::exp(1.0) - 1.0);
    double prev = 1e300;
    for (double y = 1e-8; y < 1.0; y *= 1.5) {
        const double r = modulus_kappa(RegularityClass::log_lipschitz, y) / modulus_kappa(RegularityClass::zygmund, y);
        if (y <= y_star) {
            EXPECT_GE(r, 1.0);
        }
        EXPECT_GT(r, std::log(2.0));
        EXPECT_LT(r, prev);
        prev = r;
    }
    EXPECT_LT(modulus_kappa(RegularityClass::log_lipschitz, 0.99) / 0.99, 1.0);
}

TEST(Seminorm, ConstantIsZero) {
    const auto s = dyadic_pairs(0, 1, 65, 1, 10);
    EXPECT_EQ(zygmund_seminorm(fixtures::constant(1.0), s).estimate, 0.0);
    EXPECT_EQ(lipschitz_seminorm(fixtures::constant(1.0), s).estimate, 0.0);
}

TEST(Seminorm, EmptySampleSetThrows) {
    PairSamples s;
    EXPECT_THROW(zygmund_seminorm(fixtures::constant(1.0), s), DomainError);
}

TEST(Seminorm, WeierstrassZygmundBoundedLipschitzGrows) {
    const auto w = fixtures::weierstrass(0.0, 1.0);
    const auto coarse = dyadic_pairs(0.0, 2.0, 4097, 1, 6);
    const auto fine = dyadic_pairs(0.0, 2.0, 4097, 1, 14);
    const double z = zygmund_seminorm(w, fine).estimate;
    // second differences at |y| = 2^-k are at most (pi^2 + 4)|y|
    EXPECT_LE(z, 40.0);
    EXPECT_LE(z, pi * pi + 4.0 + 1e-9);
    const double l6 = lipschitz_seminorm(w, coarse).estimate;
    const double l14 = lipschitz_seminorm(w, fine).estimate;
    EXPECT_GE(l14 / l6, 2.0);
}

TEST(Seminorm, XLogIsLogLipschitzNotLipschitz) {
    const auto f = fixtures::xlog(0.0, 1.0, 0.0);
    const auto s8 = dyadic_pairs(-0.5, 0.5, 1025, 2, 8);
    const auto s20 = dyadic_pairs(-0.5, 0.5, 1025, 2, 20);
    const double ll8 = log_lipschitz_seminorm(f, s8).estimate, ll20 = log_lipschitz_seminorm(f, s20).estimate;
    EXPECT_LT(ll20, 2.0);
    EXPECT_LT(ll20 / ll8, 1.2);
    const double l8 = lipschitz_seminorm(f, s8).estimate, l20 = lipschitz_seminorm(f, s20).estimate;
    // at the origin |f(y) - f(0)| / y = log(1/y)
    EXPECT_NEAR(l20, 20.0 * std::log(2.0), 1e-9);
    EXPECT_GT(l20 / l8, 2.0);
}

TEST(Seminorm, ScaleCovariance) {
    const auto s = dyadic_pairs(0.0, 1.0, 257, 1, 10);
    for (const auto& f : {fixtures::weierstrass(), fixtures::hat(), fixtures::smooth_bump()}) {
        for (auto cls : {RegularityClass::lipschitz, RegularityClass::zygmund, RegularityClass::log_zygmund}) {
            const double a = seminorm(f, cls, s).estimate, b = seminorm(f.scaled(-3.0), cls, s).estimate;
            EXPECT_NEAR(b, 3.0 * a, 1e-12 * std::max(1.0, a));
        }
    }
}

TEST(Seminorm, ZygmundAtMostTwiceLipschitz) {
    const auto s = dyadic_pairs(0.0, 1.0, 513, 1, 12);
    for (const auto& f : {fixtures::hat(), fixtures::smooth_bump(), fixtures::sine()}) {
        EXPECT_LE(zygmund_seminorm(f, s).estimate, 2.0 * lipschitz_seminorm(f, s).estimate + 1e-12) << f.id;
    }
}

TEST(Seminorm, MonotoneInNestedSamples) {
    const auto f = fixtures::weierstrass();
    double prev = 0.0;
    for (int k = 2; k <= 12; k += 2) {
        const double e = lipschitz_seminorm(f, dyadic_pairs(0.0, 1.0, 257, 1, k)).estimate;
        EXPECT_GE(e, prev);
        prev = e;
    }
}

TEST(Seminorm, JsonShape) {
    const auto r = zygmund_seminorm(fixtures::weierstrass(), dyadic_pairs(0, 1, 33, 1, 4));
    const auto j = to_json(r);
    EXPECT_EQ(j["class"], "zygmund");
    EXPECT_TRUE(j.contains("worst_pair"));
    EXPECT_EQ(j["samples"].get<long>(), r.sample_count);
}

TEST(FdGradient, ConstantAndLinear) {
    EXPECT_EQ(fd_gradient(fixtures::constant(2.0, 2), Vec::Constant(2, 0.3), 1e-4).norm(), 0.0);
    const Vec g = fd_gradient(fixtures::linear(3), Vec::Constant(3, 0.25), 1e-4);
    EXPECT_NEAR(g(0), 1.0, 1e-11);
    EXPECT_EQ(g(1), 0.0);
    EXPECT_EQ(g(2), 0.0);
}

TEST(FdGradient, WeierstrassBoundedAtDyadicPoints) {
    const auto w = fixtures::weierstrass(0.0, 1.0);
    for (double x : {0.0, 0.5}) {
        for (int k = 4; k <= 16; ++k) {
            const double h = std::ldexp(1.0, -k);
            EXPECT_LE(std::abs(fd_gradient(w, v1(x), h)(0)) * h / modulus_kappa(RegularityClass::zygmund, h), pi * pi / 2 + 2.0 + 1e-6);
        }
    }
}

TEST(FdLaplacian, ConstantAndQuadratic) {
    EXPECT_EQ(fd_laplacian(fixtures::constant(1.0, 2), Vec::Constant(2, 0.1), 0.01), 0.0);
    EXPECT_NEAR(fd_laplacian(fixtures::quadratic(3), Vec::Constant(3, 0.5), 0.125), 6.0, 1e-12);
}

TEST(FdLaplacian, WeierstrassScalingStaysInBand) {
    const auto w = fixtures::weierstrass(0.0, 1.0);
    double lo = 1e300, hi = 0.0;
    for (int k = 4; k <= 16; ++k) {
        const double h = std::ldexp(1.0, -k);
        const double v = std::abs(fd_laplacian(w, v1(0.0), h)) * h * h / modulus_kappa(RegularityClass::zygmund, h);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_LE(hi, pi * pi + 4.0 + 1e-9);
    EXPECT_LE(hi / lo, 1.5);
}

TEST(Monotonicity, ConstantCoefficient) {
    const auto r = monotonicity_check(fixtures::constant(1.0), metrics::euclidean(1), grid1(0.0, 1.0, 101));
    EXPECT_NEAR(r.alpha0_estimate, 1.0, 1e-9);
    EXPECT_TRUE(r.holds);
}

TEST(Monotonicity, SineMatchesDenseOracle) {
    const auto f = fixtures::sine(0.1, 4.0);
    const auto r = monotonicity_check(f, metrics::euclidean(1), grid1(0.0, 1.0, 2001), 1e-6);
    double oracle = 1e300;
    for (double x : linspace(0.0, 1.0, 20001)) oracle = std::min(oracle, 1.0 + 0.1 * std::sin(4 * x) + 0.4 * x * std::cos(4 * x));
    EXPECT_NEAR(r.alpha0_estimate, oracle, 2e-4);
    EXPECT_TRUE(r.holds);
}

TEST(Monotonicity, LorentzianOnLargeDomainFails) {
    const auto r = monotonicity_check(fixtures::lorentzian(), metrics::euclidean(1), grid1(-3.0, 3.0, 601));
    EXPECT_FALSE(r.holds);
    EXPECT_LT(r.alpha0_estimate, 0.0);
}

TEST(TravelTime, Examples) {
    EXPECT_NEAR(travel_time(fixtures::constant(1.0, 2), metrics::euclidean(2), DomainSpec::unit_ball(2), 400, 1e-3), 2.0, 1e-3);
    EXPECT_NEAR(travel_time(fixtures::constant(4.0), metrics::euclidean(1), DomainSpec::interval(), 2), 2.0, 1e-9);
    EXPECT_NEAR(travel_time(fixtures::constant(1.0), metrics::euclidean(1), DomainSpec::interval(), 2), 1.0, 1e-9);
}

TEST(TravelTime, TrappedRayRaises) {
    EXPECT_THROW(travel_time(fixtures::constant(1.0, 2), metrics::trapping(), DomainSpec::unit_ball(2), 400, 5e-3, 6.0),
                 TrappedRayError);
}

TEST(Hyperbolicity, FixturesRespectBounds) {
    const auto pts = grid1(0.0, 1.0, 1001);
    for (const char* id : {"constant", "bump", "hat", "weierstrass", "xlog", "holder", "sine"}) {
        const auto a = coefficient_from_id(id);
        const auto [lo, hi] = check_hyperbolic(a, pts);
        EXPECT_GT(lo, 0.0) << id;
        EXPECT_LE(hi, a.upper) << id;
    }
    EXPECT_THROW(check_hyperbolic(fixtures::weierstrass(0.0, 1.0), pts), DomainError);
    EXPECT_THROW(coefficient_from_id("nope"), ConfigError);
}
