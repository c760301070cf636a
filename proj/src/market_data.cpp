#include "stochlab/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stochlab/errors.hpp"

namespace stochlab {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string file_stem(const std::string& path) {
    auto slash = path.find_last_of("/\\");
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = name.find_last_of('.');
    return dot == std::string::npos ? name : name.substr(0, dot);
}

} // namespace

PriceSeries make_price_series(std::string ticker, std::vector<Date> timestamps,
                              std::vector<double> prices) {
    if (timestamps.size() != prices.size()) {
        throw InvalidInput("price series: timestamps and prices differ in length");
    }
    for (std::size_t i = 0; i + 1 < timestamps.size(); ++i) {
        if (!(timestamps[i] < timestamps[i + 1])) {
            throw InvalidInput("price series: timestamps must be strictly increasing (row " +
                               std::to_string(i + 1) + ")");
        }
    }
    for (double p : prices) {
        if (!(p > 0.0) || !std::isfinite(p)) {
            throw InvalidInput("price series: every price must be positive and finite");
        }
    }
    return PriceSeries{std::move(ticker), std::move(timestamps), std::move(prices)};
}

ReturnSeries make_return_series(std::vector<Date> timestamps, std::vector<double> values) {
    if (timestamps.size() != values.size()) {
        throw InvalidInput("return series: timestamps and values differ in length");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw InvalidInput("return series: values must be finite");
    }
    return ReturnSeries{std::move(timestamps), std::move(values)};
}

LoadResult load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("empty CSV file: " + path);
    auto header = split_fields(line);

    auto find_col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw InvalidInput("required column '" + name + "' absent in " + path);
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t date_col = find_col(schema.date_column);
    const std::size_t price_col = find_col(schema.price_column);

    std::vector<std::pair<Date, double>> rows;
    std::size_t dropped = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() <= date_col) {
            throw InvalidInput("unparseable date: row '" + line + "' in " + path);
        }
        Date d = parse_date(fields[date_col]);

        // Missing or bad prices are dropped, mirroring a dropna on ingest.
        if (fields.size() <= price_col || fields[price_col].empty()) {
            ++dropped;
            continue;
        }
        double price = 0.0;
        try {
            std::size_t used = 0;
            price = std::stod(fields[price_col], &used);
            if (used != fields[price_col].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            ++dropped;
            continue;
        }
        if (!(price > 0.0) || !std::isfinite(price)) {
            ++dropped;
            continue;
        }
        rows.emplace_back(d, price);
    }

    if (rows.size() < 2) {
        throw InvalidInput("fewer than 2 valid rows in " + path + " (" +
                           std::to_string(rows.size()) + " kept, " + std::to_string(dropped) +
                           " dropped)");
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (rows[i].first == rows[i + 1].first) {
            throw InvalidInput("duplicate date " + format_date(rows[i].first) + " in " + path);
        }
    }

    std::vector<Date> dates(rows.size());
    std::vector<double> prices(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        dates[i] = rows[i].first;
        prices[i] = rows[i].second;
    }
    std::string ticker = schema.ticker.empty() ? file_stem(path) : schema.ticker;
    return LoadResult{make_price_series(std::move(ticker), std::move(dates), std::move(prices)),
                      dropped};
}

ReturnSeries log_returns(const PriceSeries& p) {
    if (p.size() < 2) throw InvalidInput("log_returns: series too short (need >= 2 prices)");
    std::vector<Date> dates(p.timestamps.begin() + 1, p.timestamps.end());
    std::vector<double> values(p.size() - 1);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        values[i] = std::log(p.prices[i + 1] / p.prices[i]);
    }
    return ReturnSeries{std::move(dates), std::move(values)};
}

VolatilitySeries rolling_volatility(const ReturnSeries& r, int window, double annualization) {
    if (window < 2) throw InvalidInput("rolling_volatility: window must be >= 2");
    if (annualization <= 0.0) throw InvalidInput("rolling_volatility: annualization must be > 0");
    const std::size_t w = static_cast<std::size_t>(window);
    if (r.size() < w) {
        throw InvalidInput("rolling_volatility: window " + std::to_string(window) +
                           " larger than series of length " + std::to_string(r.size()));
    }

    const double root_ann = std::sqrt(annualization);
    VolatilitySeries out;
    out.window = window;
    out.annualization = annualization;
    out.timestamps.reserve(r.size() - w + 1);
    out.values.reserve(r.size() - w + 1);
    for (std::size_t i = 0; i + w <= r.size(); ++i) {
        double mean = 0.0;
        for (std::size_t j = i; j < i + w; ++j) mean += r.values[j];
        mean /= static_cast<double>(w);
        double ss = 0.0;
        for (std::size_t j = i; j < i + w; ++j) {
            const double d = r.values[j] - mean;
            ss += d * d;
        }
        out.timestamps.push_back(r.timestamps[i + w - 1]);
        out.values.push_back(std::sqrt(ss / static_cast<double>(w - 1)) * root_ann);
    }
    return out;
}

std::pair<PriceSeries, PriceSeries> split(const PriceSeries& p, const DateRange& train,
                                          const DateRange& test) {
    if (!(train.end < test.start)) {
        throw InvalidInput("split: train range must end before test range begins");
    }
    auto take = [&](const DateRange& range) {
        std::vector<Date> dates;
        std::vector<double> prices;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (range.contains(p.timestamps[i])) {
                dates.push_back(p.timestamps[i]);
                prices.push_back(p.prices[i]);
            }
        }
        return std::make_pair(std::move(dates), std::move(prices));
    };
    auto [train_dates, train_prices] = take(train);
    auto [test_dates, test_prices] = take(test);
    if (train_dates.empty()) throw InvalidInput("split: empty train slice");
    if (test_dates.empty()) throw InvalidInput("split: empty test slice");
    return {PriceSeries{p.ticker, std::move(train_dates), std::move(train_prices)},
            PriceSeries{p.ticker, std::move(test_dates), std::move(test_prices)}};
}

} // namespace stochlab
