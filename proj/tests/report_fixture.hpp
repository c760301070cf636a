#pragma once

// Builds a price series whose test segment is exactly the reaction model's
// own simulated continuation under the parameters the backtest fits on the
// train segment. Running the backtest on the result must reproduce the test
// prices, so the price-track R^2 is 1 by construction.

#include <cmath>
#include <vector>

#include "stochlab/report.hpp"
#include "test_helpers.hpp"

namespace testutil {

struct SelfConsistentFixture {
    stochlab::PriceSeries prices;
    stochlab::DateRange train;
    stochlab::DateRange test;
};

inline SelfConsistentFixture reaction_self_consistent_fixture(stochlab::RngSeed seed = {42, 0}) {
    using namespace stochlab;

    const RateConstants k_star{0.1, 0.2, 0.01, 0.05};
    const std::size_t n_train = 200;
    const std::size_t n_test = 60;

    std::vector<double> t(n_train);
    for (std::size_t i = 0; i < n_train; ++i) {
        t[i] = static_cast<double>(n_train) * static_cast<double>(i) /
               static_cast<double>(n_train - 1);
    }
    const auto train_path =
        simulate_deterministic({0.2, 0.08}, k_star, TimeGrid{t}, OdeScheme::Euler);
    std::vector<double> train_prices = train_path.component(0);

    const auto dates = consecutive_dates({2019, 1, 1}, n_train + n_test);
    const DateRange train_range{dates.front(), dates[n_train - 1]};
    const DateRange test_range{dates[n_train], dates.back()};

    // Pass 1: dummy test segment (tiny ramp off the last train price) to pin
    // the fitted constants and the simulated continuation.
    std::vector<double> prices = train_prices;
    const double anchor = train_prices.back();
    for (std::size_t i = 0; i < n_test; ++i) {
        prices.push_back(anchor * (1.0 + 1e-6 * static_cast<double>(i)));
    }
    const auto dummy = make_price_series("SYN", dates, prices);
    const auto first = backtest(dummy, ModelTag::Reaction, train_range, test_range, seed);

    // Pass 2: the simulated track becomes the actual test data. The boundary
    // return into the first test date is unchanged (sim starts at the actual
    // first test price), so the refit and the re-simulation reproduce it.
    std::vector<double> final_prices = train_prices;
    for (double v : first.series.simulated) final_prices.push_back(v);
    return {make_price_series("SYN", dates, final_prices), train_range, test_range};
}

} // namespace testutil
