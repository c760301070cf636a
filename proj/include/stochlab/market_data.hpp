#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "stochlab/dates.hpp"

namespace stochlab {

// Timestamped adjusted-close prices for one ticker. Timestamps are strictly
// increasing and every price is positive; both are enforced on construction.
struct PriceSeries {
    std::string ticker;
    std::vector<Date> timestamps;
    std::vector<double> prices;

    std::size_t size() const { return prices.size(); }
};

PriceSeries make_price_series(std::string ticker, std::vector<Date> timestamps,
                              std::vector<double> prices);

// Log-returns; one fewer row than the source series, stamped at the later
// date of each price pair.
struct ReturnSeries {
    std::vector<Date> timestamps;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

ReturnSeries make_return_series(std::vector<Date> timestamps, std::vector<double> values);

// Rolling annualized volatility, stamped at the window-end date.
struct VolatilitySeries {
    std::vector<Date> timestamps;
    std::vector<double> values; // >= 0, per sqrt(year)
    int window = 30;
    double annualization = 252.0;

    std::size_t size() const { return values.size(); }
};

struct CsvSchema {
    std::string date_column = "date";
    std::string price_column = "adj_close";
    std::string ticker; // defaults to the file stem when empty
};

struct LoadResult {
    PriceSeries series;
    std::size_t dropped_rows = 0; // rows with missing or non-positive prices
};

// Reads a header CSV, keeps the schema's two columns, drops rows whose price
// is missing or non-positive and sorts the survivors by date.
LoadResult load_csv(const std::string& path, const CsvSchema& schema = {});

// values[i] = ln(prices[i+1] / prices[i])
ReturnSeries log_returns(const PriceSeries& p);

// values[i] = sample std dev (divisor n-1) of returns[i .. i+window) * sqrt(annualization)
VolatilitySeries rolling_volatility(const ReturnSeries& r, int window = 30,
                                    double annualization = 252.0);

// Rows whose date falls in each range; train must end before test begins.
std::pair<PriceSeries, PriceSeries> split(const PriceSeries& p, const DateRange& train,
                                          const DateRange& test);

} // namespace stochlab
