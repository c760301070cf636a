#include "stochlab/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stochlab/errors.hpp"

namespace stochlab {

namespace {

void check_rates(const RateConstants& k) {
    if (k.k1 < 0.0 || k.k2 < 0.0 || k.k3 < 0.0 || k.k4 < 0.0) {
        throw InvalidInput("reaction: rate constants must be >= 0");
    }
}

void check_state(const MarketState& x) {
    if (!std::isfinite(x.S) || !std::isfinite(x.V)) {
        throw InvalidInput("reaction: state must be finite");
    }
}

} // namespace

MarketState drift(const MarketState& x, const RateConstants& k, ReactionVariant variant) {
    if (variant == ReactionVariant::Linear) {
        return {k.k2 * x.V - k.k3 * x.S, k.k1 * x.S - k.k4 * x.V};
    }
    return {k.k1 * x.S * x.V - k.k3 * x.S, k.k2 * x.V * x.S - k.k4 * x.V};
}

std::array<double, 4> propensities(const MarketState& x, const RateConstants& k) {
    return {k.k1 * x.S, k.k2 * x.V, k.k3 * x.S, k.k4 * x.V};
}

SimPath simulate_deterministic(const MarketState& x0, const RateConstants& k,
                               const TimeGrid& grid, OdeScheme scheme,
                               ReactionVariant variant) {
    check_rates(k);
    check_state(x0);

    auto f = [&](const MarketState& x) { return drift(x, k, variant); };

    std::vector<std::vector<double>> states;
    states.reserve(grid.size());
    MarketState x = x0;
    states.push_back({x.S, x.V});
    for (std::size_t step = 0; step + 1 < grid.size(); ++step) {
        const double dt = grid.dt(step);
        if (scheme == OdeScheme::Euler) {
            const MarketState d = f(x);
            x = {x.S + d.S * dt, x.V + d.V * dt};
        } else {
            const MarketState d1 = f(x);
            const MarketState mid1{x.S + 0.5 * dt * d1.S, x.V + 0.5 * dt * d1.V};
            const MarketState d2 = f(mid1);
            const MarketState mid2{x.S + 0.5 * dt * d2.S, x.V + 0.5 * dt * d2.V};
            const MarketState d3 = f(mid2);
            const MarketState end{x.S + dt * d3.S, x.V + dt * d3.V};
            const MarketState d4 = f(end);
            x = {x.S + dt / 6.0 * (d1.S + 2.0 * d2.S + 2.0 * d3.S + d4.S),
                 x.V + dt / 6.0 * (d1.V + 2.0 * d2.V + 2.0 * d3.V + d4.V)};
        }
        if (!std::isfinite(x.S) || !std::isfinite(x.V)) {
            throw NumericError("reaction: state blow-up at step " + std::to_string(step + 1));
        }
        states.push_back({x.S, x.V});
    }
    return SimPath{grid, std::move(states), {"S", "V"}};
}

SimPath simulate_stochastic(const MarketState& x0, const RateConstants& k,
                            const TimeGrid& grid, double noise_scale, RngSeed seed,
                            ReactionVariant variant) {
    check_rates(k);
    check_state(x0);
    if (noise_scale < 0.0) throw InvalidInput("reaction: noise_scale must be >= 0");

    Rng rng(seed);
    std::vector<std::vector<double>> states;
    states.reserve(grid.size());
    MarketState x = x0;
    states.push_back({x.S, x.V});
    for (std::size_t step = 0; step + 1 < grid.size(); ++step) {
        const double dt = grid.dt(step);
        const double sqrt_dt = std::sqrt(dt);
        const MarketState d = drift(x, k, variant);
        // Chemical-Langevin scaling: each species aggregates the variance of
        // the reactions that change it (S: channels 2 and 3, V: 1 and 4).
        const auto a = propensities(x, k);
        const double sig_s = noise_scale * std::sqrt(a[1] + a[2]);
        const double sig_v = noise_scale * std::sqrt(a[0] + a[3]);
        const double dw_s = sqrt_dt * rng.normal();
        const double dw_v = sqrt_dt * rng.normal();

        x = {x.S + d.S * dt + sig_s * dw_s, x.V + d.V * dt + sig_v * dw_v};
        if (!std::isfinite(x.S) || !std::isfinite(x.V)) {
            throw NumericError("reaction: state blow-up at step " + std::to_string(step + 1));
        }
        x.S = std::max(x.S, 0.0);
        x.V = std::max(x.V, 0.0);
        states.push_back({x.S, x.V});
    }
    return SimPath{grid, std::move(states), {"S", "V"}};
}

EquilibriumSet equilibria(const RateConstants& k) {
    check_rates(k);
    EquilibriumSet out;
    out.points.push_back({0.0, 0.0});
    if (k.k1 > 0.0 && k.k2 > 0.0) {
        out.points.push_back({k.k4 / k.k2, k.k3 / k.k1});
    } else {
        out.note = "interior equilibrium requires k1 > 0 and k2 > 0; only the origin exists";
    }
    for (const auto& pt : out.points) {
        const MarketState d = drift(pt, k);
        const double residual = std::max(std::abs(d.S), std::abs(d.V));
        if (!(residual < 1e-12)) {
            throw NumericError("equilibria: drift residual " + std::to_string(residual) +
                               " exceeds 1e-12 self-check");
        }
    }
    return out;
}

Matrix2 jacobian(const MarketState& x, const RateConstants& k) {
    check_rates(k);
    check_state(x);
    return {{{k.k1 * x.V - k.k3, k.k1 * x.S}, {k.k2 * x.V, k.k2 * x.S - k.k4}}};
}

const char* to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::StableNode: return "stable node";
        case StabilityClass::UnstableNode: return "unstable node";
        case StabilityClass::Saddle: return "saddle";
        case StabilityClass::Center: return "center";
        case StabilityClass::StableSpiral: return "stable spiral";
        case StabilityClass::UnstableSpiral: return "unstable spiral";
        case StabilityClass::Degenerate: return "degenerate";
    }
    return "degenerate";
}

EquilibriumReport classify(const RateConstants& k) {
    const EquilibriumSet eq = equilibria(k);
    EquilibriumReport report;
    report.points = eq.points;
    report.note = eq.note;

    for (const auto& pt : eq.points) {
        const Matrix2 j = jacobian(pt, k);
        const double tr = j[0][0] + j[1][1];
        const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        const double disc = tr * tr - 4.0 * det;

        std::array<std::complex<double>, 2> eig;
        if (disc >= 0.0) {
            const double root = std::sqrt(disc);
            eig = {std::complex<double>(0.5 * (tr - root), 0.0),
                   std::complex<double>(0.5 * (tr + root), 0.0)};
        } else {
            const double root = std::sqrt(-disc);
            eig = {std::complex<double>(0.5 * tr, -0.5 * root),
                   std::complex<double>(0.5 * tr, 0.5 * root)};
        }

        StabilityClass cls = StabilityClass::Degenerate;
        if (det < 0.0) {
            cls = StabilityClass::Saddle;
        } else if (det > 0.0 && tr < 0.0) {
            cls = disc >= 0.0 ? StabilityClass::StableNode : StabilityClass::StableSpiral;
        } else if (det > 0.0 && tr > 0.0) {
            cls = disc >= 0.0 ? StabilityClass::UnstableNode : StabilityClass::UnstableSpiral;
        } else if (tr == 0.0 && det > 0.0) {
            cls = StabilityClass::Center;
        }

        report.jacobians.push_back(j);
        report.eigenvalues.push_back(eig);
        report.classifications.push_back(cls);
    }
    return report;
}

} // namespace stochlab
