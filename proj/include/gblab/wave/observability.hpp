#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "gblab/coefficients/regularity.hpp"
#include "gblab/core/numerics.hpp"
#include "gblab/wave/solver.hpp"

namespace gblab {

struct WaveInitialData {
    std::string id;
    std::vector<double> u0;
    std::vector<double> u1;
    /// Ladder index for eigenmodes, 0 otherwise.
    int k = 0;
};

struct EigenLadder {
    std::vector<double> omega;
    /// modes[k - 1] on the full grid, zero on the boundary, H^1_0-normalized.
    std::vector<std::vector<double>> modes;
};

/// Lowest K discrete eigenmodes of -L phi = omega^2 alpha phi on a 1-D grid, from the symmetric
/// tridiagonal form B^{-1/2} S B^{-1/2} with S the stiffness and B = alpha sqrt(g) dx.
inline EigenLadder eigenmode_ladder(const CoefficientField& alpha, const MetricField& metric, const WaveGrid& grid, int K) {
    if (grid.dim != 1) throw DomainError("eigenmode_ladder: implemented for n = 1");
    const int m = grid.nodes - 2;
    if (K < 1 || K > m) throw ParameterError("eigenmode_ladder: K must lie in [1, interior nodes]");
    const LaplaceBeltrami L(metric, grid);
    const double dx = grid.dx();
    Vec B(m), diag(m), sub(m - 1);
    for (int i = 0; i < m; ++i) {
        const auto k = static_cast<std::size_t>(i + 1);
        B(i) = alpha(grid.point(k)) * L.sqrtg[k] * dx;
        if (!(B(i) > 0.0)) throw DomainError("eigenmode_ladder: coefficient is not positive");
    }
    for (int i = 0; i < m; ++i) {
        const auto k = static_cast<std::size_t>(i + 1);
        diag(i) = (L.cx[k] + L.cx[k - 1]) / dx / B(i);
        if (i + 1 < m) sub(i) = -L.cx[k] / dx / std::sqrt(B(i) * B(i + 1));
    }
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    EigenLadder out;
    for (int j = 0; j < K; ++j) {
        std::vector<double> phi(grid.size(), 0.0);
        const Vec psi = es.eigenvectors().col(j);
        for (int i = 0; i < m; ++i) phi[static_cast<std::size_t>(i + 1)] = psi(i) / std::sqrt(B(i));
        // sign: positive slope at the left end
        if (phi[1] < 0.0)
            for (double& v : phi) v = -v;
        const double nrm = std::sqrt(h1_seminorm_sq(L, phi));
        for (double& v : phi) v /= nrm;
        out.omega.push_back(std::sqrt(es.eigenvalues()(j)));
        out.modes.push_back(std::move(phi));
    }
    return out;
}

/// Eigenmode data (u0 = phi_k, u1 = 0) for k = 1..K.
inline std::vector<WaveInitialData> eigenmode_ensemble(const EigenLadder& lad) {
    std::vector<WaveInitialData> out;
    for (std::size_t k = 0; k < lad.modes.size(); ++k)
        out.push_back({"mode:" + std::to_string(k + 1), lad.modes[k], std::vector<double>(lad.modes[k].size(), 0.0),
                       static_cast<int>(k + 1)});
    return out;
}

/// Seeded draws u0 = sum c_j phi_j, u1 = sum d_j omega_j phi_j over the ladder, c, d ~ N(0, 1) / j.
inline std::vector<WaveInitialData> random_band_limited_data(const EigenLadder& lad, int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<WaveInitialData> out;
    const std::size_t N = lad.modes.front().size();
    for (int r = 0; r < count; ++r) {
        WaveInitialData d{"random:" + std::to_string(seed) + ":" + std::to_string(r), std::vector<double>(N, 0.0),
                          std::vector<double>(N, 0.0), 0};
        for (std::size_t j = 0; j < lad.modes.size(); ++j) {
            const double c = nd(rng) / static_cast<double>(j + 1), e = nd(rng) / static_cast<double>(j + 1);
            for (std::size_t i = 0; i < N; ++i) {
                d.u0[i] += c * lad.modes[j][i];
                d.u1[i] += e * lad.omega[j] * lad.modes[j][i];
            }
        }
        out.push_back(std::move(d));
    }
    return out;
}

struct ObservabilityEntry {
    std::string id;
    int k = 0;
    double trace_norm_sq = 0.0;
    double data_norm_sq = 0.0;
    double ratio = 0.0;
};

struct ObservabilityReport {
    std::vector<ObservabilityEntry> ensemble;
    double T = 0.0;
    double T_alpha = 0.0;
    bool time_condition = false;
    int m = 0;
    double min_ratio = 0.0;
    double median_ratio = 0.0;
    /// Slope of log r against log k over the eigenmode members.
    double k_slope = 0.0;
    std::vector<std::string> warnings;
    double max_energy_drift = 0.0;
};

inline nlohmann::json to_json(const ObservabilityReport& r) {
    nlohmann::json j;
    j["T"] = r.T;
    j["T_alpha"] = r.T_alpha;
    j["time_condition"] = r.time_condition;
    j["m"] = r.m;
    j["min_ratio"] = r.min_ratio;
    j["median_ratio"] = r.median_ratio;
    j["k_slope"] = r.k_slope;
    j["max_energy_drift"] = r.max_energy_drift;
    j["warnings"] = r.warnings;
    auto& e = j["ensemble"] = nlohmann::json::array();
    for (const auto& x : r.ensemble)
        e.push_back({{"id", x.id}, {"k", x.k}, {"trace_norm_sq", x.trace_norm_sq}, {"data_norm_sq", x.data_norm_sq}, {"ratio", x.ratio}});
    return j;
}

/// r = ||d_nu d_t^m u||^2_{L^2((0,T) x boundary)} / (||u0||^2_{H^1_0} + ||u1||^2_{L^2}) for every member.
inline ObservabilityReport observability_ratio(const CoefficientField& alpha, const MetricField& metric, const DomainSpec& domain,
                                               const WaveGrid& grid, const std::vector<WaveInitialData>& ensemble, double T,
                                               int m = 0, const WaveOptions& opt = {}) {
    if (m < 0) throw ParameterError("observability_ratio: m must be non-negative");
    ObservabilityReport rep;
    rep.T = T;
    rep.m = m;
    rep.T_alpha = travel_time(alpha, metric, domain, 2 * grid.dim);
    rep.time_condition = T > 2.0 * rep.T_alpha;
    if (!rep.time_condition) rep.warnings.push_back("T <= 2 T_alpha");
    const LaplaceBeltrami L(metric, grid);
    std::vector<double> ks, rs, all;
    for (const auto& d : ensemble) {
        const WaveSolution sol = solve_wave(alpha, metric, grid, d.u0, d.u1, T, opt);
        rep.max_energy_drift = std::max(rep.max_energy_drift, sol.energy_drift());
        ObservabilityEntry e;
        e.id = d.id;
        e.k = d.k;
        e.trace_norm_sq = trace_time_derivative(sol.trace, m).norm_sq();
        e.data_norm_sq = h1_seminorm_sq(L, d.u0) + l2_sq(L, d.u1);
        e.ratio = e.data_norm_sq > 0.0 ? e.trace_norm_sq / e.data_norm_sq : 0.0;
        rep.ensemble.push_back(e);
        all.push_back(e.ratio);
        if (d.k > 0) {
            ks.push_back(d.k);
            rs.push_back(e.ratio);
        }
    }
    if (!all.empty()) {
        rep.min_ratio = *std::min_element(all.begin(), all.end());
        std::vector<double> s = all;
        std::sort(s.begin(), s.end());
        rep.median_ratio = s.size() % 2 ? s[s.size() / 2] : 0.5 * (s[s.size() / 2 - 1] + s[s.size() / 2]);
    }
    if (ks.size() >= 2) rep.k_slope = loglog_slope(ks, rs);
    return rep;
}

} // namespace gblab
