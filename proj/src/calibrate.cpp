#include "stochlab/calibrate.hpp"

#include <cmath>

#include "stochlab/errors.hpp"

namespace stochlab {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

void check_tracks(std::span<const double> s, std::span<const double> v, const TimeGrid& grid) {
    if (s.size() != v.size() || s.size() != grid.size()) {
        throw InvalidInput("path loglik: S, V and grid must have equal length");
    }
    if (s.size() < 2) throw InvalidInput("path loglik: need at least 2 observations");
}

} // namespace

double gaussian_track_score(std::span<const double> observed, std::span<const double> simulated,
                            std::span<const double> variance) {
    if (observed.size() != simulated.size() || observed.size() != variance.size()) {
        throw InvalidInput("gaussian_track_score: length mismatch");
    }
    double score = 0.0;
    for (std::size_t t = 0; t < observed.size(); ++t) {
        if (!(variance[t] > 0.0)) {
            throw InvalidInput("gaussian_track_score: nonpositive variance at index " +
                               std::to_string(t));
        }
        const double resid = observed[t] - simulated[t];
        score += kLog2Pi + std::log(variance[t]) + resid * resid / variance[t];
    }
    return -0.5 * score;
}

double legacy_path_loglik(const RateConstants& k, std::span<const double> observed_S,
                         std::span<const double> observed_V, const TimeGrid& grid) {
    check_tracks(observed_S, observed_V, grid);
    for (std::size_t t = 0; t < observed_V.size(); ++t) {
        if (!(observed_V[t] > 0.0)) {
            throw InvalidInput("legacy_path_loglik: nonpositive observed volatility at index " +
                               std::to_string(t));
        }
    }

    const SimPath sim = simulate_deterministic(MarketState{observed_S[0], observed_V[0]}, k,
                                               grid, OdeScheme::Euler);
    const auto sim_s = sim.component(0);
    const auto sim_v = sim.component(1);
    return gaussian_track_score(observed_S, sim_s, observed_V) +
           gaussian_track_score(observed_V, sim_v, observed_V);
}

CorrectedLoglik corrected_path_loglik(const RateConstants& k, std::span<const double> observed_S,
                                      std::span<const double> observed_V, const TimeGrid& grid,
                                      const CorrectedLoglikOptions& opts) {
    check_tracks(observed_S, observed_V, grid);
    if (!(opts.v_variance > 0.0) || !(opts.s_variance_floor > 0.0)) {
        throw InvalidInput("corrected_path_loglik: variance options must be > 0");
    }
    for (double v : observed_V) {
        if (v < 0.0) throw InvalidInput("corrected_path_loglik: negative observed volatility");
    }

    CorrectedLoglik out;
    double score = 0.0;
    for (std::size_t t = 0; t + 1 < observed_S.size(); ++t) {
        const double dt = opts.dt_override > 0.0 ? opts.dt_override : grid.dt(t);
        const MarketState x{observed_S[t], observed_V[t]};
        const MarketState d = drift(x, k);
        const double pred_s = x.S + d.S * dt;
        const double pred_v = x.V + d.V * dt;

        double var_s = (x.V * x.S) * (x.V * x.S) * dt;
        if (!(var_s >= opts.s_variance_floor)) {
            var_s = opts.s_variance_floor;
            out.floor_engaged = true;
        }
        const double rs = observed_S[t + 1] - pred_s;
        const double rv = observed_V[t + 1] - pred_v;
        score += kLog2Pi + std::log(var_s) + rs * rs / var_s;
        score += kLog2Pi + std::log(opts.v_variance) + rv * rv / opts.v_variance;
    }
    out.loglik = -0.5 * score;
    return out;
}

CalibrationResult calibrate_reaction_model(const PriceSeries& prices,
                                           const VolatilitySeries& vols,
                                           const RateConstants& x0, const OptimOptions& opts,
                                           PathObjective objective) {
    if (prices.size() != vols.size()) {
        throw InvalidInput("calibrate: price and volatility series must be aligned");
    }
    if (prices.size() < 2) throw InvalidInput("calibrate: need at least 2 aligned rows");
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (prices.timestamps[i] != vols.timestamps[i]) {
            throw InvalidInput("calibrate: price and volatility dates must be aligned");
        }
    }

    const std::size_t n = prices.size();
    // linspace(0, n, n): n points with spacing n/(n-1), one step per row.
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = static_cast<double>(n) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    const TimeGrid grid{std::move(t)};

    Objective obj;
    obj.arity = 4;
    obj.bounds = std::vector<std::array<double, 2>>(4, {0.0, 10.0});
    obj.eval = [&, objective](const std::vector<double>& x) {
        const RateConstants k{x[0], x[1], x[2], x[3]};
        try {
            if (objective == PathObjective::Corrected) {
                return -corrected_path_loglik(k, prices.prices, vols.values, grid).loglik;
            }
            return -legacy_path_loglik(k, prices.prices, vols.values, grid);
        } catch (const NumericError&) {
            return std::numeric_limits<double>::infinity(); // diverged path
        }
    };

    CalibrationResult out;
    out.model = "reaction";
    out.names = {"k1", "k2", "k3", "k4"};

    const std::vector<double> start{x0.k1, x0.k2, x0.k3, x0.k4};
    if (!std::isfinite(obj.eval(start))) {
        // The simulated path diverges right at the start; report the failure
        // instead of optimizing a wall of infinities.
        out.values = start;
        out.objective = std::numeric_limits<double>::infinity();
        out.converged = false;
        return out;
    }

    const auto res = bounded_descent(obj, start, opts);
    out.values = res.x;
    out.objective = res.f;
    out.iterations = res.iterations;
    out.converged = res.converged;
    return out;
}

} // namespace stochlab
