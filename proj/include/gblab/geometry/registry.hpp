#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gblab/core/errors.hpp"
#include "gblab/geometry/domain.hpp"
#include "gblab/geometry/metric.hpp"

namespace gblab {

namespace potentials {

/// phi(x) = c . x
inline ConformalPotential linear(const Vec& c) {
    return {[c](const Vec& x) { return c.dot(x); }, [c](const Vec&) { return c; },
            [c](const Vec&) { return Mat(Mat::Zero(c.size(), c.size())); }};
}

/// phi(x) = sum_k a_k exp(-|x - c_k|^2 / (2 s_k^2))
struct GaussianSum {
    std::vector<double> amp;
    std::vector<Vec> center;
    std::vector<double> width;

    ConformalPotential potential() const {
        const GaussianSum self = *this;
        auto term = [self](const Vec& x, std::size_t k, double& e, Vec& d) {
            const double s2 = self.width[k] * self.width[k];
            d = x - self.center[k];
            e = self.amp[k] * std::exp(-d.squaredNorm() / (2.0 * s2));
            return s2;
        };
        ConformalPotential p;
        p.phi = [self, term](const Vec& x) {
            double acc = 0.0, e;
            Vec d;
            for (std::size_t k = 0; k < self.amp.size(); ++k) {
                term(x, k, e, d);
                acc += e;
            }
            return acc;
        };
        p.grad = [self, term](const Vec& x) {
            Vec acc = Vec::Zero(x.size()), d;
            double e;
            for (std::size_t k = 0; k < self.amp.size(); ++k) {
                const double s2 = term(x, k, e, d);
                acc -= e * d / s2;
            }
            return acc;
        };
        p.hess = [self, term](const Vec& x) {
            const auto n = x.size();
            Mat acc = Mat::Zero(n, n);
            Vec d;
            double e;
            for (std::size_t k = 0; k < self.amp.size(); ++k) {
                const double s2 = term(x, k, e, d);
                acc += e * (d * d.transpose() / (s2 * s2) - Mat::Identity(n, n) / s2);
            }
            return acc;
        };
        return p;
    }
};

/// Radial refractive profile n(r) = 1 + a exp(-b r^2), phi = log n.
inline ConformalPotential radial_lens(double a, double b) {
    ConformalPotential p;
    p.phi = [a, b](const Vec& x) { return std::log(1.0 + a * std::exp(-b * x.squaredNorm())); };
    p.grad = [a, b](const Vec& x) {
        const double e = a * std::exp(-b * x.squaredNorm());
        return Vec(-2.0 * b * e / (1.0 + e) * x);
    };
    p.hess = [a, b](const Vec& x) {
        const auto n = x.size();
        const double e = a * std::exp(-b * x.squaredNorm());
        const double q = e / (1.0 + e);
        // d/dr of q = -2 b r q (1 - q)
        return Mat(-2.0 * b * q * Mat::Identity(n, n) + 4.0 * b * b * q * (1.0 - q) * x * x.transpose());
    };
    return p;
}

} // namespace potentials

namespace metrics {

/// Random smooth conformal metric: three Gaussian bumps of amplitude <= 0.2.
inline MetricField random_conformal(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-0.2, 0.2), cen(-1.0, 1.0), wid(0.5, 1.0);
    potentials::GaussianSum gs;
    for (int k = 0; k < 3; ++k) {
        gs.amp.push_back(amp(rng));
        Vec c(n);
        for (int i = 0; i < n; ++i) c(i) = cen(rng);
        gs.center.push_back(c);
        gs.width.push_back(wid(rng));
    }
    return conformal(n, gs.potential(), "conformal:random:" + std::to_string(seed));
}

/// Strong radial lens on the unit ball with circular (trapped) geodesics.
inline MetricField trapping(int n = 2) {
    return conformal(n, potentials::radial_lens(4.0, 10.0), "conformal:trapping");
}

/// Mild simple conformal disk, phi = 0.1 exp(-|x|^2).
inline MetricField mild_disk(int n = 2) {
    potentials::GaussianSum gs{{0.1}, {Vec::Zero(n)}, {std::sqrt(0.5)}};
    return conformal(n, gs.potential(), "conformal:mild-disk");
}

} // namespace metrics

/// Parses metric ids: euclidean[:n], conformal:exp-x1[:n], conformal:mild-disk,
/// conformal:trapping, conformal:random:<seed>[:n], polar, stretch[:beta].
inline MetricField metric_from_id(const std::string& id, int default_dim = 2) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const auto c = id.find(':', pos);
        parts.push_back(id.substr(pos, c - pos));
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    auto dim_at = [&](std::size_t i) { return parts.size() > i ? std::stoi(parts[i]) : default_dim; };
    try {
        if (parts[0] == "euclidean") return metrics::euclidean(dim_at(1));
        if (parts[0] == "polar") return metrics::polar();
        if (parts[0] == "stretch") return metrics::stretch1d(parts.size() > 1 ? std::stod(parts[1]) : 0.5);
        if (parts[0] == "conformal" && parts.size() >= 2) {
            if (parts[1] == "exp-x1") {
                const int n = dim_at(2);
                return metrics::conformal(n, potentials::linear(unit_vector(n, 0)), "conformal:exp-x1");
            }
            if (parts[1] == "mild-disk") return metrics::mild_disk(dim_at(2));
            if (parts[1] == "trapping") return metrics::trapping(dim_at(2));
            if (parts[1] == "random" && parts.size() >= 3)
                return metrics::random_conformal(dim_at(3), static_cast<unsigned>(std::stoul(parts[2])));
        }
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
    throw ConfigError("unknown metric id '" + id + "'");
}

/// Parses domain ids: interval, unit_ball[:n], rectangle[:n].
inline DomainSpec domain_from_id(const std::string& id) {
    if (id == "interval") return DomainSpec::interval();
    const auto c = id.find(':');
    const std::string head = id.substr(0, c);
    int n = 2;
    if (c != std::string::npos) {
        try {
            n = std::stoi(id.substr(c + 1));
        } catch (const std::exception&) {
            throw ConfigError("bad domain dimension in '" + id + "'");
        }
    }
    if (n < 1) throw ConfigError("bad domain dimension in '" + id + "'");
    if (head == "unit_ball") return DomainSpec::unit_ball(n);
    if (head == "rectangle") return DomainSpec::rectangle(n);
    throw ConfigError("unknown domain id '" + id + "'");
}

inline std::vector<std::string> metric_ids() {
    return {"euclidean[:n]", "conformal:exp-x1[:n]", "conformal:mild-disk", "conformal:trapping",
            "conformal:random:<seed>[:n]", "polar", "stretch[:beta]"};
}

inline std::vector<std::string> domain_ids() { return {"interval", "unit_ball[:n]", "rectangle[:n]"}; }

} // namespace gblab
