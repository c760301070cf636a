#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "stochlab/rng.hpp"
#include "stochlab/sim_path.hpp"

namespace stochlab {

// Rate constants for the two-species price/volatility reaction network.
struct RateConstants {
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    double k4 = 0.0;
};

struct MarketState {
    double S = 0.0; // price, >= 0
    double V = 0.0; // volatility, >= 0
};

// Bilinear is the canonical drift (dS = k1 S V - k3 S, dV = k2 V S - k4 V);
// Linear is the variant implied by reading the propensities as direct rates
// (dS = k2 V - k3 S, dV = k1 S - k4 V), kept for comparison runs.
enum class ReactionVariant { Bilinear, Linear };

enum class OdeScheme { Rk4, Euler };

MarketState drift(const MarketState& x, const RateConstants& k,
                  ReactionVariant variant = ReactionVariant::Bilinear);

// (k1 S, k2 V, k3 S, k4 V): the network's reaction propensities, with the
// volatility-decay channel completed as k4 V.
std::array<double, 4> propensities(const MarketState& x, const RateConstants& k);

SimPath simulate_deterministic(const MarketState& x0, const RateConstants& k,
                               const TimeGrid& grid, OdeScheme scheme = OdeScheme::Rk4,
                               ReactionVariant variant = ReactionVariant::Bilinear);

// Euler-Maruyama with per-species diffusion noise_scale * sqrt(sum of the
// species' propensity contributions); states are clamped at zero from below.
// With noise_scale = 0 this reproduces plain Euler drift integration exactly.
SimPath simulate_stochastic(const MarketState& x0, const RateConstants& k,
                            const TimeGrid& grid, double noise_scale, RngSeed seed,
                            ReactionVariant variant = ReactionVariant::Bilinear);

struct EquilibriumSet {
    std::vector<MarketState> points;
    std::string note; // set when the interior point does not exist
};

// (0, 0) always; the interior point (k4/k2, k3/k1) when k1, k2 > 0. Every
// returned point is self-checked to a drift residual below 1e-12.
EquilibriumSet equilibria(const RateConstants& k);

using Matrix2 = std::array<std::array<double, 2>, 2>;

// [[k1 V - k3, k1 S], [k2 V, k2 S - k4]]
Matrix2 jacobian(const MarketState& x, const RateConstants& k);

enum class StabilityClass {
    StableNode,
    UnstableNode,
    Saddle,
    Center,
    StableSpiral,
    UnstableSpiral,
    Degenerate
};

const char* to_string(StabilityClass c);

struct EquilibriumReport {
    std::vector<MarketState> points;
    std::vector<Matrix2> jacobians;
    std::vector<std::array<std::complex<double>, 2>> eigenvalues;
    std::vector<StabilityClass> classifications;
    std::string note;
};

// Eigenvalues from the 2x2 trace/determinant closed form plus the standard
// phase-plane classification.
EquilibriumReport classify(const RateConstants& k);

} // namespace stochlab
