#include "stochlab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stochlab/calibrate.hpp"
#include "stochlab/errors.hpp"
#include "stochlab/fetch.hpp"
#include "stochlab/garch.hpp"
#include "stochlab/market_data.hpp"
#include "stochlab/report.hpp"
#include "stochlab/sde.hpp"
#include "stochlab/stable.hpp"

namespace stochlab::cli {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct Globals {
    std::uint64_t seed = 42;
    std::string out_dir = ".";
};

fs::path ensure_out_dir(const Globals& g) {
    fs::path dir(g.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidInput("cannot create output directory " + dir.string());
    return dir;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write file: " + path.string());
    out << content;
    if (!out.good()) throw InvalidInput("write failed for file: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

double jreq(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw InvalidInput(std::string("params file: missing numeric field '") + key + "'");
    }
    return j[key].get<double>();
}

double jopt(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) {
        throw InvalidInput(std::string("params file: field '") + key + "' must be numeric");
    }
    return j[key].get<double>();
}

std::size_t jsteps(const nlohmann::json& j, const char* key, std::size_t fallback) {
    const double v = jopt(j, key, static_cast<double>(fallback));
    if (v < 1.0) throw InvalidInput(std::string("params file: '") + key + "' must be >= 1");
    return static_cast<std::size_t>(v);
}

RateConstants parse_rates(const std::string& text) {
    std::vector<double> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string tok =
            comma == std::string::npos ? text.substr(pos) : text.substr(pos, comma - pos);
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw InvalidInput("cannot parse rate constant '" + tok + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (parts.size() != 4) {
        throw InvalidInput("expected 4 comma-separated rate constants, got " +
                           std::to_string(parts.size()));
    }
    return {parts[0], parts[1], parts[2], parts[3]};
}

PriceSeries slice_range(const PriceSeries& p, const std::optional<DateRange>& range) {
    if (!range) return p;
    std::vector<Date> dates;
    std::vector<double> prices;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (range->contains(p.timestamps[i])) {
            dates.push_back(p.timestamps[i]);
            prices.push_back(p.prices[i]);
        }
    }
    if (dates.size() < 2) throw InvalidInput("date range selects fewer than 2 rows");
    return PriceSeries{p.ticker, std::move(dates), std::move(prices)};
}

std::string series_csv(const std::vector<double>& t, const std::string& label,
                       const std::vector<double>& values) {
    std::string out = "t," + label + "\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        out += format_double(t[i]);
        out += ',';
        out += format_double(values[i]);
        out += '\n';
    }
    return out;
}

struct CsvOptions {
    std::string csv;
    std::string date_col = "date";
    std::string price_col = "adj_close";
    std::string ticker;

    LoadResult load() const {
        if (csv.empty()) throw InvalidInput("--csv is required");
        return load_csv(csv, CsvSchema{date_col, price_col, ticker});
    }
};

void add_csv_options(CLI::App* sub, CsvOptions& opts, bool required = true) {
    auto* o = sub->add_option("--csv", opts.csv, "input price CSV");
    if (required) o->required();
    sub->add_option("--date-col", opts.date_col, "date column name");
    sub->add_option("--price-col", opts.price_col, "price column name");
    sub->add_option("--ticker", opts.ticker, "ticker label (defaults to the file stem)");
}

// ---- subcommands ----------------------------------------------------------

void cmd_ingest(const Globals& g, const CsvOptions& csv) {
    const fs::path dir = ensure_out_dir(g);
    const LoadResult loaded = csv.load();
    const PriceSeries& p = loaded.series;

    std::string normalized = "date,adj_close\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        normalized += format_date(p.timestamps[i]) + "," + format_double(p.prices[i]) + "\n";
    }
    write_text(dir / (p.ticker + ".csv"), normalized);

    ordered_json meta;
    meta["ticker"] = p.ticker;
    meta["rows"] = p.size();
    meta["dropped_rows"] = loaded.dropped_rows;
    meta["start"] = format_date(p.timestamps.front());
    meta["end"] = format_date(p.timestamps.back());
    write_text(dir / (p.ticker + "_meta.json"), meta.dump(2) + "\n");

    std::cout << "ingested " << p.size() << " rows for " << p.ticker << " ("
              << loaded.dropped_rows << " dropped) into " << (dir / (p.ticker + ".csv")).string()
              << "\n";
}

void cmd_fetch(const Globals& g, const std::string& url, std::string out_file,
               const CsvOptions& csv) {
    const fs::path dir = ensure_out_dir(g);
    const std::string body = http_get(url);
    fs::path target(out_file);
    if (target.is_relative()) target = dir / target;
    write_text(target, body);

    // The endpoint must serve the ingest schema; validate what we stored.
    LoadResult loaded = load_csv(target.string(), CsvSchema{csv.date_col, csv.price_col, ""});
    std::cout << "fetched " << loaded.series.size() << " rows ("
              << loaded.dropped_rows << " dropped) into " << target.string() << "\n";
}

void cmd_equilibrium(const Globals& g, const std::string& rates, std::string out_file) {
    const fs::path dir = ensure_out_dir(g);
    const RateConstants k = parse_rates(rates);
    const std::string json = equilibrium_to_json(classify(k));
    if (out_file.empty()) out_file = "equilibrium.json";
    fs::path target(out_file);
    if (target.is_relative()) target = dir / target;
    write_text(target, json);
    std::cout << json;
}

struct CalibrateOptions {
    std::string model;
    std::string train;
    int window = 30;
    double annualization = 252.0;
    double alpha = 1.5;
    int p = 1;
    int q = 1;
    std::string objective = "legacy"; // reaction only: legacy|corrected
};

void cmd_calibrate(const Globals& g, const CsvOptions& csv, const CalibrateOptions& opts) {
    const fs::path dir = ensure_out_dir(g);
    const PriceSeries full = csv.load().series;
    std::optional<DateRange> range;
    if (!opts.train.empty()) range = parse_date_range(opts.train);
    const PriceSeries prices = slice_range(full, range);
    const ModelTag model = parse_model_tag(opts.model);

    std::string json;
    switch (model) {
        case ModelTag::Reaction: {
            const ReturnSeries returns = log_returns(prices);
            const VolatilitySeries vols =
                rolling_volatility(returns, opts.window, opts.annualization);
            // Align prices onto the dates where the rolling window exists.
            std::vector<Date> dates;
            std::vector<double> px;
            std::size_t vi = 0;
            for (std::size_t i = 0; i < prices.size() && vi < vols.size(); ++i) {
                if (prices.timestamps[i] == vols.timestamps[vi]) {
                    dates.push_back(prices.timestamps[i]);
                    px.push_back(prices.prices[i]);
                    ++vi;
                }
            }
            PriceSeries aligned{prices.ticker, std::move(dates), std::move(px)};
            PathObjective obj = PathObjective::Legacy;
            if (opts.objective == "corrected") {
                obj = PathObjective::Corrected;
            } else if (opts.objective != "legacy") {
                throw InvalidInput("--objective must be legacy or corrected");
            }
            const CalibrationResult result =
                calibrate_reaction_model(aligned, vols, {0.1, 0.2, 0.01, 0.05}, {}, obj);
            json = calibration_to_json(result);
            break;
        }
        case ModelTag::Stable: {
            const ReturnSeries returns = log_returns(prices);
            const StableFit fit = fit_stable_mle(returns, opts.alpha);
            CalibrationResult result;
            result.model = "stable";
            result.names = {"alpha", "theta", "sigma"};
            result.values = {opts.alpha, fit.theta, fit.sigma};
            result.objective = -fit.loglik;
            result.iterations = fit.iterations;
            result.converged = fit.converged;
            json = calibration_to_json(result);
            break;
        }
        case ModelTag::Garch: {
            const ReturnSeries returns = log_returns(prices);
            const GarchFit fit = fit_garch(returns, opts.p, opts.q);
            json = garch_fit_to_json(fit);
            break;
        }
        case ModelTag::Heston: {
            const HestonParams hp = fit_heston_quick(prices, opts.window, opts.annualization);
            ordered_json j;
            j["model"] = "heston";
            j["method"] = "moment_match";
            j["params"] = ordered_json{{"mu", hp.mu},   {"kappa", hp.kappa},
                                       {"theta", hp.theta}, {"xi", hp.xi},
                                       {"rho", hp.rho}, {"s0", hp.s0},
                                       {"v0", hp.v0}};
            json = j.dump(2) + "\n";
            break;
        }
        case ModelTag::Vg: {
            const ReturnSeries returns = log_returns(prices);
            const VgParams vp = fit_vg_quick(returns.values);
            ordered_json j;
            j["model"] = "vg";
            j["method"] = "moment_match";
            j["params"] =
                ordered_json{{"theta", vp.theta}, {"sigma", vp.sigma}, {"nu", vp.nu}};
            json = j.dump(2) + "\n";
            break;
        }
    }

    const fs::path target = dir / (prices.ticker + "_" + opts.model + "_calibration.json");
    write_text(target, json);
    std::cout << json;
}

void cmd_simulate(const Globals& g, const std::string& model_name,
                  const std::string& params_file, std::string out_file, bool euler) {
    const fs::path dir = ensure_out_dir(g);
    const nlohmann::json j = nlohmann::json::parse(read_text(params_file), nullptr, true, true);
    const RngSeed seed{g.seed, 0};

    std::string csv;
    if (model_name == "gbm") {
        GbmParams p{jreq(j, "mu"), jreq(j, "sigma"), jreq(j, "s0")};
        const auto grid = TimeGrid::uniform(0.0, jopt(j, "t1", 1.0), jsteps(j, "steps", 252));
        csv = sim_path_to_csv(simulate_gbm(p, grid, seed));
    } else if (model_name == "heston") {
        HestonParams p;
        p.mu = jreq(j, "mu");
        p.kappa = jreq(j, "kappa");
        p.theta = jreq(j, "theta");
        p.xi = jreq(j, "xi");
        p.rho = jopt(j, "rho", 0.0);
        p.s0 = jreq(j, "s0");
        p.v0 = jreq(j, "v0");
        const auto grid = TimeGrid::uniform(0.0, jopt(j, "t1", 1.0), jsteps(j, "steps", 252));
        csv = sim_path_to_csv(simulate_heston(p, grid, seed));
    } else if (model_name == "fbm") {
        FbmParams p{jreq(j, "hurst"), jopt(j, "scale", 1.0)};
        const auto grid = TimeGrid::uniform(0.0, jopt(j, "t1", 1.0), jsteps(j, "steps", 252));
        csv = sim_path_to_csv(sample_fbm(p, grid, seed));
    } else if (model_name == "vg") {
        VgParams p{jreq(j, "theta"), jreq(j, "sigma"), jopt(j, "nu", 0.2)};
        const std::size_t steps = jsteps(j, "steps", 252);
        const auto grid = TimeGrid::uniform(0.0, jopt(j, "t1", static_cast<double>(steps)), steps);
        csv = sim_path_to_csv(simulate_vg(p, grid, seed));
    } else if (model_name == "reaction") {
        const RateConstants k{jreq(j, "k1"), jreq(j, "k2"), jreq(j, "k3"), jreq(j, "k4")};
        const MarketState x0{jreq(j, "s0"), jreq(j, "v0")};
        const std::size_t steps = jsteps(j, "steps", 252);
        const auto grid = TimeGrid::uniform(0.0, jopt(j, "t1", static_cast<double>(steps)), steps);
        const double noise = jopt(j, "noise_scale", 0.0);
        if (noise > 0.0) {
            csv = sim_path_to_csv(simulate_stochastic(x0, k, grid, noise, seed));
        } else {
            csv = sim_path_to_csv(simulate_deterministic(
                x0, k, grid, euler ? OdeScheme::Euler : OdeScheme::Rk4));
        }
    } else if (model_name == "stable") {
        const StableParams p{jopt(j, "alpha", 1.5), 0.0, jreq(j, "theta"), jreq(j, "sigma")};
        const std::size_t n = jsteps(j, "n", 252);
        const auto draws = stable_sample(n, p, seed);
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i);
        csv = series_csv(t, "X", draws);
    } else if (model_name == "garch") {
        if (!j.contains("alphas") || !j.contains("betas")) {
            throw InvalidInput("params file: garch needs 'alphas' and 'betas' arrays");
        }
        GarchParams p(jreq(j, "omega"), j["alphas"].get<std::vector<double>>(),
                      j["betas"].get<std::vector<double>>(), jopt(j, "mean", 0.0));
        const std::size_t n = jsteps(j, "n", 252);
        const auto draws = simulate_garch(p, n, seed);
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i);
        csv = series_csv(t, "r", draws);
    } else {
        throw InvalidInput("unknown model '" + model_name +
                           "' (expected reaction|stable|garch|heston|vg|gbm|fbm)");
    }

    if (out_file.empty()) out_file = "simulate_" + model_name + ".csv";
    fs::path target(out_file);
    if (target.is_relative()) target = dir / target;
    write_text(target, csv);
    std::cout << "wrote " << target.string() << "\n";
}

struct BacktestOptions {
    std::string model;
    std::string train;
    std::string test;
    std::string plot = "csv"; // csv|svg|both|none
    int window = 30;
    double annualization = 252.0;
    double alpha = 1.5;
    int p = 1;
    int q = 1;
    int ensemble = 1;
};

void cmd_backtest(const Globals& g, const CsvOptions& csv, const BacktestOptions& opts) {
    const fs::path dir = ensure_out_dir(g);
    const PriceSeries data = csv.load().series;
    const ModelTag model = parse_model_tag(opts.model);

    BacktestConfig cfg;
    cfg.vol_window = opts.window;
    cfg.annualization = opts.annualization;
    cfg.stable_alpha = opts.alpha;
    cfg.garch_p = opts.p;
    cfg.garch_q = opts.q;
    cfg.ensemble = opts.ensemble;

    const BacktestReport report = backtest(data, model, parse_date_range(opts.train),
                                           parse_date_range(opts.test), RngSeed{g.seed, 0}, cfg);

    const std::string stem = data.ticker + "_" + opts.model;
    write_text(dir / (stem + "_report.json"), backtest_to_json(report));

    const bool want_csv = opts.plot == "csv" || opts.plot == "both";
    const bool want_svg = opts.plot == "svg" || opts.plot == "both";
    if (want_csv) emit_plot(report, PlotFormat::Csv, (dir / (stem + "_plot.csv")).string());
    if (want_svg) emit_plot(report, PlotFormat::Svg, (dir / (stem + "_plot.svg")).string());
    if (report.aux_series && (want_csv || want_svg)) {
        BacktestReport aux = report;
        aux.series = *report.aux_series;
        aux.r_squared = *report.aux_r_squared;
        aux.track_label = report.aux_label;
        aux.aux_series.reset();
        if (want_csv) emit_plot(aux, PlotFormat::Csv, (dir / (stem + "_vol.csv")).string());
        if (want_svg) emit_plot(aux, PlotFormat::Svg, (dir / (stem + "_vol.svg")).string());
    }
    if (report.ensemble) {
        const auto& band = *report.ensemble;
        std::string csv_text = "t,mean,lo,hi\n";
        for (std::size_t i = 0; i < band.t.size(); ++i) {
            csv_text += format_double(band.t[i]) + "," + format_double(band.mean[i]) + "," +
                        format_double(band.lo[i]) + "," + format_double(band.hi[i]) + "\n";
        }
        write_text(dir / (stem + "_ensemble.csv"), csv_text);
    }

    std::cout << "backtest " << data.ticker << " " << opts.model
              << ": r_squared = " << format_double(report.r_squared);
    if (report.aux_r_squared) {
        std::cout << " (volatility track " << format_double(*report.aux_r_squared) << ")";
    }
    std::cout << "\n  report: " << (dir / (stem + "_report.json")).string() << "\n";
}

void cmd_report(const Globals& g) {
    const fs::path dir = ensure_out_dir(g);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    bool printed = false;
    for (const auto& file : files) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text(file));
        } catch (const std::exception&) {
            continue; // not ours
        }
        if (j.contains("r_squared") && j.contains("ticker")) {
            std::cout << j["ticker"].get<std::string>() << "  " << j["model"].get<std::string>()
                      << "  train " << j["train_range"]["start"].get<std::string>() << ".."
                      << j["train_range"]["end"].get<std::string>() << "  test "
                      << j["test_range"]["start"].get<std::string>() << ".."
                      << j["test_range"]["end"].get<std::string>()
                      << "  r_squared=" << j["r_squared"].dump() << "\n";
            printed = true;
        } else if (j.contains("model") && j.contains("params")) {
            std::cout << file.filename().string() << "  " << j["model"].get<std::string>()
                      << "  params=" << j["params"].dump() << "\n";
            printed = true;
        }
    }
    if (!printed) std::cout << "no stored results under " << dir.string() << "\n";
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"stochastic market-dynamics laboratory"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; flags take precedence");

    Globals globals;
    app.add_option("--seed", globals.seed, "base RNG seed")->capture_default_str();
    app.add_option("--out-dir", globals.out_dir, "output directory")
        ->envname("STOCHLAB_OUT_DIR")
        ->capture_default_str();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate a price CSV into the store");
    CsvOptions ingest_csv;
    add_csv_options(ingest, ingest_csv);
    ingest->callback([&] { cmd_ingest(globals, ingest_csv); });

    // fetch
    auto* fetch = app.add_subcommand("fetch", "download a CSV over HTTP(S)");
    std::string fetch_url;
    std::string fetch_out = "fetched.csv";
    CsvOptions fetch_csv;
    fetch->add_option("--url", fetch_url, "source URL")->required();
    fetch->add_option("--out", fetch_out, "output file name")->capture_default_str();
    fetch->add_option("--date-col", fetch_csv.date_col, "date column name");
    fetch->add_option("--price-col", fetch_csv.price_col, "price column name");
    fetch->callback([&] { cmd_fetch(globals, fetch_url, fetch_out, fetch_csv); });

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "fit a model to a price history");
    CsvOptions calibrate_csv;
    CalibrateOptions calibrate_opts;
    add_csv_options(calibrate, calibrate_csv);
    calibrate->add_option("--model", calibrate_opts.model, "reaction|stable|garch|heston|vg")
        ->required();
    calibrate->add_option("--train", calibrate_opts.train, "date range A..B (default: all rows)");
    calibrate->add_option("--window", calibrate_opts.window, "rolling volatility window")
        ->capture_default_str();
    calibrate
        ->add_option("--annualization", calibrate_opts.annualization,
                     "trading days per year for volatility scaling")
        ->capture_default_str();
    calibrate->add_option("--alpha", calibrate_opts.alpha, "stable index")->capture_default_str();
    calibrate->add_option("--p", calibrate_opts.p, "GARCH order p")->capture_default_str();
    calibrate->add_option("--q", calibrate_opts.q, "GARCH order q")->capture_default_str();
    calibrate
        ->add_option("--objective", calibrate_opts.objective,
                     "reaction path score: legacy|corrected")
        ->capture_default_str();
    calibrate->callback([&] { cmd_calibrate(globals, calibrate_csv, calibrate_opts); });

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate one path from a params file");
    std::string sim_model;
    std::string sim_params;
    std::string sim_out;
    bool sim_euler = false;
    simulate->add_option("--model", sim_model, "reaction|stable|garch|heston|vg|gbm|fbm")
        ->required();
    simulate->add_option("--params", sim_params, "JSON parameter file")->required();
    simulate->add_option("--out", sim_out, "output CSV name");
    simulate->add_flag("--euler", sim_euler, "use plain Euler for the reaction ODE");
    simulate->callback([&] { cmd_simulate(globals, sim_model, sim_params, sim_out, sim_euler); });

    // equilibrium
    auto* equilibrium = app.add_subcommand("equilibrium", "reaction-model stability analysis");
    std::string eq_rates;
    std::string eq_out;
    equilibrium->add_option("--k", eq_rates, "rate constants k1,k2,k3,k4")->required();
    equilibrium->add_option("--out", eq_out, "output JSON name");
    equilibrium->callback([&] { cmd_equilibrium(globals, eq_rates, eq_out); });

    // backtest
    auto* bt = app.add_subcommand("backtest", "fit on a train window, simulate the test window");
    CsvOptions bt_csv;
    BacktestOptions bt_opts;
    add_csv_options(bt, bt_csv);
    bt->add_option("--model", bt_opts.model, "reaction|stable|garch|heston|vg")->required();
    bt->add_option("--train", bt_opts.train, "train date range A..B")->required();
    bt->add_option("--test", bt_opts.test, "test date range C..D")->required();
    bt->add_option("--plot", bt_opts.plot, "csv|svg|both|none")->capture_default_str();
    bt->add_option("--window", bt_opts.window, "rolling volatility window")
        ->capture_default_str();
    bt->add_option("--annualization", bt_opts.annualization, "trading days per year")
        ->capture_default_str();
    bt->add_option("--alpha", bt_opts.alpha, "stable index")->capture_default_str();
    bt->add_option("--p", bt_opts.p, "GARCH order p")->capture_default_str();
    bt->add_option("--q", bt_opts.q, "GARCH order q")->capture_default_str();
    bt->add_option("--ensemble", bt_opts.ensemble,
                   "paths for a mean +- sigma band (1 = single trajectory)")
        ->capture_default_str();
    bt->callback([&] { cmd_backtest(globals, bt_csv, bt_opts); });

    // report
    auto* report = app.add_subcommand("report", "render stored results");
    report->callback([&] { cmd_report(globals); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
        return 1;
    } catch (const InvalidInput& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

} // namespace stochlab::cli
