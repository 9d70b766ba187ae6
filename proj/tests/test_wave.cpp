#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "gblab/geometry/registry.hpp"
#include "gblab/wave/ansatz.hpp"
#include "gblab/wave/observability.hpp"
#include "gblab/wave/solver.hpp"

using namespace gblab;

namespace {

const DomainSpec unit_interval = DomainSpec::interval();

std::vector<double> sine_mode(const WaveGrid& g, double k = 1.0) {
    auto u = g.sample([k](const Vec& x) { return std::sin(k * pi * x(0)); });
    u.front() = 0.0;
    u.back() = 0.0;
    return u;
}

std::vector<double> zeros(const WaveGrid& g) { return std::vector<double>(g.size(), 0.0); }

/// Max over stored states of |u - sin(pi x) cos(pi t)|.
double mode_error(const WaveSolution& sol) {
    double err = 0.0;
    for (const auto& f : sol.history)
        for (std::size_t k = 0; k < sol.grid.size(); ++k)
            err = std::max(err, std::abs(f.u[k] - std::sin(pi * sol.grid.coord(static_cast<int>(k))) * std::cos(pi * f.t)));
    return err;
}

BeamFamily line_family(double h, double T) {
    const int nz = static_cast<int>(std::ceil(4.0 / std::sqrt(h))) + 1;
    FamilyOptions opt;
    opt.T = T;
    opt.dt = 2e-3;
    return build_family(metrics::euclidean(1), [](const Vec&) { return cplx(1.0); }, InitialPhase::linear(Vec::Ones(1)),
                        uniform_grid(Vec::Zero(1), Vec::Ones(1), nz), h, opt);
}

double bump_f(const Vec& x) { return std::exp(-(x(0) - 0.6) * (x(0) - 0.6) / 0.05); }

} // namespace

TEST(SolveWave, StandingModeAndEnergy) {
    const auto g = WaveGrid::on(unit_interval, 1000);
    WaveOptions opt;
    opt.save_every = 10;
    const auto sol = solve_wave(fixtures::constant(1.0), metrics::euclidean(1), g, sine_mode(g), zeros(g), 2.0, opt);
    EXPECT_NEAR(sol.history.back().t, 2.0, 1e-12);
    EXPECT_LE(mode_error(sol), 1e-3);
    EXPECT_LE(sol.energy_drift(), 1e-3);
    EXPECT_LE(sol.cfl, 0.45 + 1e-12);
    EXPECT_NEAR(sol.energy.front(), 0.25 * pi * pi, 1e-5);
}

TEST(SolveWave, SecondOrderConvergence) {
    double prev = 0.0;
    for (int nodes : {101, 201, 401}) {
        const auto g = WaveGrid::on(unit_interval, nodes);
        WaveOptions opt;
        opt.save_every = 1;
        const double e = mode_error(solve_wave(fixtures::constant(1.0), metrics::euclidean(1), g, sine_mode(g), zeros(g), 0.5, opt));
        if (prev > 0.0) {
            EXPECT_GE(prev / e, 3.6);
            EXPECT_LE(prev / e, 4.4);
        }
        prev = e;
    }
}

TEST(SolveWave, ZeroDataStaysZero) {
    const auto g = WaveGrid::on(unit_interval, 64);
    const auto sol = solve_wave(fixtures::weierstrass(), metrics::euclidean(1), g, zeros(g), zeros(g), 1.0);
    for (double v : sol.history.back().u) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(sol.trace.norm_sq(), 0.0);
}

TEST(SolveWave, RefusesBadInput) {
    const auto g = WaveGrid::on(unit_interval, 32);
    const auto a = fixtures::constant(1.0);
    const auto m = metrics::euclidean(1);
    WaveOptions opt;
    opt.cfl = 0.6;
    EXPECT_THROW(solve_wave(a, m, g, sine_mode(g), zeros(g), 1.0, opt), CflError);
    auto bad = sine_mode(g);
    bad.front() = 0.3;
    EXPECT_THROW(solve_wave(a, m, g, bad, zeros(g), 1.0), PreconditionError);
    EXPECT_THROW(WaveGrid::on(DomainSpec::unit_ball(2), 32), DomainError);
}

TEST(SolveWave, BlowupReportsStep) {
    const auto g = WaveGrid::on(unit_interval, 32);
    WaveOptions opt;
    double dt = 0.0;
    opt.source = [&dt](double t, std::vector<double>& out) {
        if (dt > 0.0 && t > 2.5 * dt) out[5] = std::numeric_limits<double>::infinity();
    };
    const auto probe = solve_wave(fixtures::constant(1.0), metrics::euclidean(1), g, zeros(g), zeros(g), 1.0);
    dt = probe.dt;
    try {
        solve_wave(fixtures::constant(1.0), metrics::euclidean(1), g, zeros(g), zeros(g), 1.0, opt);
        FAIL() << "expected blowup";
    } catch (const BlowupError& e) {
        EXPECT_EQ(e.step(), 3);
    }
}

TEST(SolveWave, SquareModeIn2D) {
    const auto g = WaveGrid::on(DomainSpec::rectangle(2), 101);
    const auto u0 = g.sample([](const Vec& x) { return std::sin(pi * x(0)) * std::sin(pi * x(1)); });
    std::vector<double> z = u0;
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = g.on_boundary(k) ? 0.0 : u0[k];
    const auto sol = solve_wave(fixtures::constant(1.0), metrics::euclidean(2), g, z, zeros(g), 0.5);
    const double c = std::cos(std::sqrt(2.0) * pi * 0.5);
    double err = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) err = std::max(err, std::abs(sol.history.back().u[k] - c * z[k]));
    EXPECT_LE(err, 1e-3);
    EXPECT_LE(sol.energy_drift(), 1e-3);
}

TEST(SolveWave, StretchedMetricModeInArclength) {
    // s = x + beta x^2 / 2 turns the operator into d^2/ds^2 on [0, 1 + beta / 2]
    const double beta = 0.5, ell = 1.0 + 0.5 * beta;
    const auto g = WaveGrid::on(unit_interval, 801);
    auto s = [beta](double x) { return x + 0.5 * beta * x * x; };
    auto u0 = g.sample([&](const Vec& x) { return std::sin(pi * s(x(0)) / ell); });
    u0.front() = 0.0;
    u0.back() = 0.0;
    const auto m = metrics::stretch1d(beta);
    const auto sol = solve_wave(fixtures::constant(1.0), m, g, u0, zeros(g), 1.0);
    const double c = std::cos(pi / ell);
    double err = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) err = std::max(err, std::abs(sol.history.back().u[k] - c * u0[k]));
    EXPECT_LE(err, 1e-3);
    EXPECT_LE(sol.energy_drift(), 1e-3);
    const auto lad = eigenmode_ladder(fixtures::constant(1.0), m, g, 3);
    for (int k = 1; k <= 3; ++k) EXPECT_NEAR(lad.omega[static_cast<std::size_t>(k - 1)] / (k * pi / ell), 1.0, 1e-4);
}

TEST(DtnTrace, AnalyticModeTrace) {
    const auto g = WaveGrid::on(unit_interval, 1000);
    const double T = 2.0;
    const auto sol = solve_wave(fixtures::constant(1.0), metrics::euclidean(1), g, sine_mode(g), zeros(g), T);
    const double exact = 2.0 * pi * pi * (T / 2.0 + std::sin(2.0 * pi * T) / (4.0 * pi));
    EXPECT_NEAR(sol.trace.norm_sq() / exact, 1.0, 0.02);
    ASSERT_EQ(sol.trace.nodes.front(), 0u);
    for (std::size_t t = 0; t < sol.trace.times.size(); t += 97)
        EXPECT_NEAR(sol.trace.values[t][0], -pi * std::cos(pi * sol.trace.times[t]), 1e-4);
}

TEST(DtnTrace, RecomputedFromHistoryAndLinear) {
    const auto g = WaveGrid::on(unit_interval, 200);
    const auto m = metrics::euclidean(1);
    const auto a = fixtures::sine();
    WaveOptions opt;
    opt.save_every = 1;
    const auto ua = sine_mode(g, 1), ub = sine_mode(g, 3);
    std::vector<double> sum(ua.size());
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = ua[k] + ub[k];
    const auto sa = solve_wave(a, m, g, ua, zeros(g), 1.0, opt), sb = solve_wave(a, m, g, ub, zeros(g), 1.0, opt),
               ss = solve_wave(a, m, g, sum, zeros(g), 1.0, opt);
    const auto re = dtn_trace(sa, m);
    ASSERT_EQ(re.times.size(), sa.trace.times.size());
    for (std::size_t t = 0; t < re.times.size(); ++t) {
        EXPECT_EQ(re.values[t], sa.trace.values[t]);
        for (std::size_t k = 0; k < 2; ++k)
            EXPECT_NEAR(ss.trace.values[t][k], sa.trace.values[t][k] + sb.trace.values[t][k], 1e-10);
    }
    const auto z = solve_wave(a, m, g, zeros(g), zeros(g), 1.0, opt);
    EXPECT_EQ(dtn_trace(z, m).norm_sq(), 0.0);
}

TEST(DtnTrace, CsvExport) {
    const auto g = WaveGrid::on(unit_interval, 16);
    const auto sol = solve_wave(fixtures::constant(1.0), metrics::euclidean(1), g, sine_mode(g), zeros(g), 0.1);
    const auto p = std::filesystem::temp_directory_path() / "gblab_wave_trace.csv";
    write_trace_csv(p.string(), sol.trace);
    std::ifstream is(p);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t,node,value");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 2 * sol.trace.times.size());
    std::filesystem::remove(p);
}

TEST(DAlpha, IdentitySpectralAndComposition) {
    const auto g = WaveGrid::on(unit_interval, 401);
    const auto m = metrics::euclidean(1);
    const auto a = fixtures::constant(1.0);
    const auto f = sine_mode(g);
    EXPECT_EQ(d_alpha_apply(a, m, g, f, 0), f);
    const auto d1 = d_alpha_apply(a, m, g, f, 1);
    for (std::size_t k = 1; k + 1 < f.size(); ++k) EXPECT_NEAR(d1[k], -pi * pi * f[k], 1e-4);
    const auto w = fixtures::weierstrass();
    EXPECT_EQ(d_alpha_apply(w, m, g, f, 2), d_alpha_apply(w, m, g, d_alpha_apply(w, m, g, f, 1), 1));
    EXPECT_THROW(d_alpha_apply(a, m, g, f, -1), ParameterError);
}

TEST(Observability, LadderMatchesSineModes) {
    const auto g = WaveGrid::on(unit_interval, 1000);
    const auto lad = eigenmode_ladder(fixtures::constant(1.0), metrics::euclidean(1), g, 5);
    const LaplaceBeltrami L(metrics::euclidean(1), g);
    for (int k = 1; k <= 5; ++k) {
        const auto j = static_cast<std::size_t>(k - 1);
        const double dx = g.dx();
        EXPECT_NEAR(lad.omega[j] / (2.0 / dx * std::sin(k * pi * dx / 2.0)), 1.0, 1e-10);
        EXPECT_NEAR(lad.omega[j] / (k * pi), 1.0, 1e-4);
        EXPECT_NEAR(h1_seminorm_sq(L, lad.modes[j]), 1.0, 1e-12);
    }
}

TEST(Observability, UnitCoefficientModesHaveFlatRatio) {
    const auto g = WaveGrid::on(unit_interval, 1000);
    const auto a = fixtures::constant(1.0);
    const auto m = metrics::euclidean(1);
    const double T = 4.0;
    const auto rep = observability_ratio(a, m, unit_interval, g, eigenmode_ensemble(eigenmode_ladder(a, m, g, 10)), T);
    EXPECT_TRUE(rep.time_condition);
    EXPECT_NEAR(rep.T_alpha, 1.0, 1e-6);
    // 2 (k pi)^2 (T/2 + sin(2 k pi T)/(4 k pi)) / ((k pi)^2 / 2) = 2T for integer T
    for (const auto& e : rep.ensemble) {
        EXPECT_NEAR(e.ratio / (2 * T), 1.0, 0.1) << e.id;
        EXPECT_GE(e.ratio, 0.5 * 2 * T);
    }
}

TEST(Observability, WeierstrassRatioIsUniformInK) {
    const auto g = WaveGrid::on(unit_interval, 1000);
    const auto a = fixtures::weierstrass();
    const auto m = metrics::euclidean(1);
    const auto rep = observability_ratio(a, m, unit_interval, g, eigenmode_ensemble(eigenmode_ladder(a, m, g, 20)), 4.0);
    EXPECT_TRUE(rep.time_condition);
    EXPECT_GT(rep.min_ratio, 0.0);
    EXPECT_GE(rep.k_slope, -0.1);
    EXPECT_LE(rep.max_energy_drift, 5e-3);
}

TEST(Observability, TimeDerivativeOrderScalesByFrequency) {
    const auto g = WaveGrid::on(unit_interval, 400);
    const auto a = fixtures::constant(1.0);
    const auto m = metrics::euclidean(1);
    const auto lad = eigenmode_ladder(a, m, g, 3);
    const auto ens = eigenmode_ensemble(lad);
    const auto r0 = observability_ratio(a, m, unit_interval, g, ens, 4.0, 0);
    const auto r2 = observability_ratio(a, m, unit_interval, g, ens, 4.0, 2);
    for (std::size_t k = 0; k < 3; ++k)
        EXPECT_NEAR(r2.ensemble[k].ratio / r0.ensemble[k].ratio / std::pow(lad.omega[k], 4), 1.0, 0.05);
    EXPECT_EQ(r2.m, 2);
}

TEST(Observability, RandomDrawsAndShortTimeWarning) {
    const auto g = WaveGrid::on(unit_interval, 200);
    const auto a = fixtures::constant(1.0);
    const auto m = metrics::euclidean(1);
    const auto lad = eigenmode_ladder(a, m, g, 6);
    const auto draws = random_band_limited_data(lad, 3, 11);
    const auto rep = observability_ratio(a, m, unit_interval, g, draws, 1.5);
    EXPECT_FALSE(rep.time_condition);
    ASSERT_EQ(rep.warnings.size(), 1u);
    for (const auto& e : rep.ensemble) EXPECT_GT(e.ratio, 0.0);
    const auto j = to_json(rep);
    EXPECT_EQ(j["ensemble"].size(), 3u);
    EXPECT_EQ(j["time_condition"], false);
    EXPECT_EQ(random_band_limited_data(lad, 3, 11)[2].u0, draws[2].u0);
}

TEST(LiftedAnsatz, ZeroInputAndTimeFactor) {
    const auto fam = line_family(std::ldexp(1.0, -6), 0.5);
    const auto g = WaveGrid::on(unit_interval, 201);
    const auto an = build_lifted_ansatz(fam, [](const Vec&) { return 0.0; }, 0.5, 0.5, fixtures::constant(1.0), g);
    for (const auto& v : an.phi) EXPECT_EQ(std::abs(v), 0.0);
    for (double t : {0.0, 0.3, 7.1}) EXPECT_NEAR(std::abs(an.time_factor(t)), 1.0, 1e-15);
    EXPECT_NEAR(an.omega, std::pow(std::ldexp(1.0, -6), -0.75), 1e-12);
    EXPECT_THROW(build_lifted_ansatz(fam, bump_f, 0.5, 1.0, fixtures::constant(1.0), g), ParameterError);
}

TEST(LiftedAnsatz, MatchesRayIntegralsOfF) {
    const double h = std::ldexp(1.0, -8), T = 0.5;
    const auto fam = line_family(h, T);
    const auto g = WaveGrid::on(unit_interval, 1001);
    const auto a = fixtures::constant(1.0);
    const auto nf = build_lifted_ansatz(fam, bump_f, T, 0.5, a, g, 33).normalized();
    const auto n1 = build_lifted_ansatz(fam, [](const Vec&) { return 1.0; }, T, 0.5, a, g, 33).normalized();
    const auto ray = family_ray_integrals(fam, bump_f, T);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < fam.size(); ++j) {
        const double z = fam.K.points[j](0);
        if (z < 0.25 || z > 0.75) continue;
        // C from the response to f = 1, which integrates to T along every ray
        const double pred = std::abs(n1[j]) / T * ray[j];
        num += std::pow(std::abs(nf[j]) - pred, 2);
        den += pred * pred;
    }
    EXPECT_LE(std::sqrt(num / den), 0.15);
}

TEST(Quasimode, ExactHelmholtzProfileAtNoiseFloor) {
    const double h = std::ldexp(1.0, -5), eps = 0.5, w = std::pow(h, -0.5 - 0.5 * eps);
    const auto g = WaveGrid::on(unit_interval, 4001);
    std::vector<cplx> phi(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) phi[k] = std::sin(w * g.coord(static_cast<int>(k)));
    const auto rep = quasimode_residual(phi, g, h, eps, fixtures::constant(1.0), metrics::euclidean(1), default_test_bumps(), 1.0);
    EXPECT_LE(rep.max_residual, 1e-6);
    const std::vector<cplx> zero(g.size(), 0.0);
    EXPECT_EQ(quasimode_residual(zero, g, h, eps, fixtures::weierstrass(), metrics::euclidean(1), default_test_bumps(), 1.0)
                  .max_residual,
              0.0);
}

TEST(Quasimode, BumpDerivativesMatchFiniteDifferences) {
    const TestBump b{0.4, 0.2};
    for (double x : {0.25, 0.33, 0.41, 0.55}) {
        const double e = 1e-5;
        EXPECT_NEAR(b.d1(x), (b.value(x + e) - b.value(x - e)) / (2 * e), 1e-6);
        EXPECT_NEAR(b.d2(x), (b.d1(x + e) - b.d1(x - e)) / (2 * e), 1e-5);
    }
    EXPECT_EQ(b.value(0.61), 0.0);
}

TEST(WaveError, ZeroInputGivesZeroPairings) {
    const auto fam = line_family(std::ldexp(1.0, -5), 0.5);
    const auto g = WaveGrid::on(unit_interval, 201);
    const auto a = fixtures::constant(1.0);
    const auto an = build_lifted_ansatz(fam, [](const Vec&) { return 0.0; }, 0.5, 0.5, a, g);
    const auto rep = wave_error_decomposition(an, a, metrics::euclidean(1), 0.5, default_test_bumps(), 1.0);
    EXPECT_EQ(rep.pairing_value, 0.0);
    EXPECT_EQ(rep.pairing_gradient, 0.0);
    EXPECT_EQ(rep.source_norm, 0.0);
}

TEST(WaveError, SweepSlopes) {
    const auto g = WaveGrid::on(unit_interval, 1001);
    const auto a = fixtures::constant(1.0);
    const auto m = metrics::euclidean(1);
    std::vector<double> hs, gains, pairs;
    for (int k = 5; k <= 9; ++k) {
        const double h = std::ldexp(1.0, -k);
        const auto an = build_lifted_ansatz(line_family(h, 0.5), bump_f, 0.5, 0.5, a, g, 33);
        const auto rep = wave_error_decomposition(an, a, m, 0.5, default_test_bumps(), 1.0);
        hs.push_back(h);
        gains.push_back(rep.rhs_gain);
        pairs.push_back(rep.pairing_value);
    }
    EXPECT_NEAR(loglog_slope(hs, gains), 0.75, 0.3);
    for (std::size_t k = 0; k < hs.size(); ++k) EXPECT_NEAR(gains[k] / (2.0 * std::pow(hs[k], 0.75)), 1.0, 1e-3);
    for (double p : pairs) EXPECT_TRUE(std::isfinite(p));
}

TEST(IntegralObservability, ZeroAndBracket) {
    const double h = std::ldexp(1.0, -8), T = 0.5;
    const auto g = WaveGrid::on(unit_interval, 1001);
    const auto a = fixtures::constant(1.0);
    const auto m = metrics::euclidean(1);
    const auto fam = line_family(h, T);
    auto fb = [](const Vec& x) { return 4.0 * x(0) * (1.0 - x(0)) * bump_f(x); };
    const auto an = build_lifted_ansatz(fam, fb, T, 0.5, a, g, 33);
    auto u0 = g.sample(fb);
    u0.front() = 0.0;
    u0.back() = 0.0;
    const auto sol = solve_wave(a, m, g, u0, zeros(g), T);
    const auto rep = integral_observability_constant(an, sol, m, a, u0, 1.0);
    EXPECT_LE(rep.lower, rep.upper);
    EXPECT_LE(rep.lower - rep.budget, rep.dnu_f_sq);
    EXPECT_LE(rep.dnu_f_sq, rep.upper + rep.budget);

    const auto an0 = build_lifted_ansatz(fam, [](const Vec&) { return 0.0; }, T, 0.5, a, g, 9);
    const auto sol0 = solve_wave(a, m, g, zeros(g), zeros(g), T);
    const auto z = integral_observability_constant(an0, sol0, m, a, zeros(g), 0.0);
    EXPECT_EQ(z.lower, 0.0);
    EXPECT_EQ(z.upper, 0.0);
    EXPECT_EQ(z.dnu_f_sq, 0.0);
}

TEST(IntegralObservability, TwoBranchInitialData) {
    const double h = std::ldexp(1.0, -8), eps = 0.5, w = std::pow(h, -0.5 - 0.5 * eps);
    const cplx p0(0.3, -0.2), p1(1.1, 0.4);
    const auto s = two_branch_ansatz(0.0, p1, w, 0.0);
    EXPECT_EQ(s.value, cplx(0.0));
    EXPECT_NEAR(std::abs(s.time_derivative - p1), 0.0, 1e-15);
    const auto c = two_branch_ansatz(p0, p1, w, 0.0);
    EXPECT_NEAR(std::abs(c.value - p0), 0.0, 1e-15);
    const double t = 0.37;
    const auto later = two_branch_ansatz(p0, p1, w, t);
    EXPECT_NEAR(std::abs(later.value - (std::cos(w * t) * p0 + std::sin(w * t) / w * p1)), 0.0, 1e-14);
}
