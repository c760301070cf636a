#pragma once

#include <span>
#include <string>
#include <vector>

#include "stochlab/market_data.hpp"
#include "stochlab/optimize.hpp"
#include "stochlab/reaction.hpp"
#include "stochlab/sim_path.hpp"

namespace stochlab {

// -(1/2) sum_t (log 2pi + log var_t + (obs_t - sim_t)^2 / var_t)
double gaussian_track_score(std::span<const double> observed, std::span<const double> simulated,
                            std::span<const double> variance);

// The legacy whole-path score: Euler-integrate the reaction drift from the
// first observation, then apply gaussian_track_score to both tracks using the
// observed volatility itself as the variance of each term. Kept verbatim for
// reproduction runs; corrected_path_loglik is the statistically coherent
// transition form.
double legacy_path_loglik(const RateConstants& k, std::span<const double> observed_S,
                         std::span<const double> observed_V, const TimeGrid& grid);

struct CorrectedLoglikOptions {
    double s_variance_floor = 1e-12; // engaged when V_t = 0
    double v_variance = 1e-4;        // fixed variance of the volatility track
    double dt_override = 0.0;        // > 0 replaces the grid spacing
};

struct CorrectedLoglik {
    double loglik = 0.0;
    bool floor_engaged = false;
};

// One-step Gaussian transition likelihood: predictions are Euler steps from
// each observed state, the price-track variance is (V_t S_t)^2 dt with a
// floor, and the volatility track uses a configured constant variance.
CorrectedLoglik corrected_path_loglik(const RateConstants& k, std::span<const double> observed_S,
                                      std::span<const double> observed_V, const TimeGrid& grid,
                                      const CorrectedLoglikOptions& opts = {});

struct CalibrationResult {
    std::string model;
    std::vector<std::string> names;
    std::vector<double> values;
    double objective = 0.0; // minimized value (negative log-likelihood)
    std::size_t iterations = 0;
    bool converged = false;
};

// Which score the reaction calibration maximizes. Legacy is the historical
// whole-path form and the default for reproduction runs.
enum class PathObjective { Legacy, Corrected };

// Minimizes the negative path log-likelihood over k in [0, 10]^4 with
// bounded_descent. The prices and volatilities must be aligned (same dates,
// same length); the time grid spans 0..n over n points as in the reference
// workflow.
CalibrationResult calibrate_reaction_model(const PriceSeries& prices,
                                           const VolatilitySeries& vols,
                                           const RateConstants& x0 = {0.1, 0.2, 0.01, 0.05},
                                           const OptimOptions& opts = {},
                                           PathObjective objective = PathObjective::Legacy);

} // namespace stochlab
