#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stochlab/calibrate.hpp"
#include "stochlab/garch.hpp"
#include "stochlab/market_data.hpp"
#include "stochlab/reaction.hpp"
#include "stochlab/sde.hpp"

namespace stochlab {

enum class ModelTag { Reaction, Stable, Garch, Heston, Vg };

ModelTag parse_model_tag(const std::string& name);
const char* to_string(ModelTag tag);

// 1 - SS_res / SS_tot; may be negative. Errors when actual is constant.
double r_squared(std::span<const double> actual, std::span<const double> predicted);

struct TrackSeries {
    std::vector<double> t;
    std::vector<double> actual;
    std::vector<double> simulated;
};

// Cross-path mean and plus/minus one standard deviation of the simulated
// track, produced when a backtest is run with an ensemble size above one.
struct EnsembleBand {
    std::size_t paths = 0;
    std::vector<double> t;
    std::vector<double> mean;
    std::vector<double> lo;
    std::vector<double> hi;
};

struct BacktestReport {
    std::string ticker;
    ModelTag model = ModelTag::Stable;
    std::vector<std::pair<std::string, double>> params;
    DateRange train_range;
    DateRange test_range;
    std::uint64_t seed = 0;

    std::string track_label; // what the primary track holds
    double r_squared = 0.0;
    TrackSeries series;

    // Reaction backtests carry the volatility track as well.
    std::string aux_label;
    std::optional<double> aux_r_squared;
    std::optional<TrackSeries> aux_series;

    std::optional<EnsembleBand> ensemble;

    std::string footnote; // set when r_squared is negative
};

struct BacktestConfig {
    int vol_window = 30;
    double annualization = 252.0;
    double stable_alpha = 1.5;
    int garch_p = 1;
    int garch_q = 1;
    RateConstants reaction_x0{0.1, 0.2, 0.01, 0.05};
    double vg_fallback_nu = 0.2;
    // > 1 adds a mean +- one-sigma band over that many seeded paths; the
    // scored trajectory stays the single stream-0 path.
    int ensemble = 1;
};

// Fits the named model on the train slice, generates one seeded trajectory
// over the test slice and scores actual against simulated. Returns and price
// tracks follow the model: return-level for stable/vg/garch, price-level for
// heston, price plus volatility for the reaction model.
BacktestReport backtest(const PriceSeries& data, ModelTag model, const DateRange& train,
                        const DateRange& test, RngSeed seed, const BacktestConfig& cfg = {});

enum class PlotFormat { Csv, Svg };

// CSV: columns t, actual, simulated. SVG: two polylines with axes, a
// "<ticker> <model>" title and Actual/Simulated legend labels.
void emit_plot(const BacktestReport& report, PlotFormat format, const std::string& path);

// Quick moment/regression parameter matches used by the CLI for models whose
// full likelihood calibration is out of scope.
HestonParams fit_heston_quick(const PriceSeries& prices, int vol_window = 30,
                              double annualization = 252.0);
VgParams fit_vg_quick(std::span<const double> returns, double fallback_nu = 0.2);

std::string backtest_to_json(const BacktestReport& report);
std::string calibration_to_json(const CalibrationResult& result);
std::string garch_fit_to_json(const GarchFit& fit);
std::string equilibrium_to_json(const EquilibriumReport& report);

} // namespace stochlab
