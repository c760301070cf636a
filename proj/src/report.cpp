#include "stochlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "stochlab/errors.hpp"
#include "stochlab/stable.hpp"

namespace stochlab {

using ordered_json = nlohmann::ordered_json;

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> index_axis(std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i);
    return t;
}

// Volatility stamped by date, for aligning derived series back onto prices.
struct VolLookup {
    const VolatilitySeries& vols;

    std::optional<double> at(const Date& d) const {
        auto it = std::lower_bound(vols.timestamps.begin(), vols.timestamps.end(), d);
        if (it == vols.timestamps.end() || *it != d) return std::nullopt;
        return vols.values[static_cast<std::size_t>(it - vols.timestamps.begin())];
    }
};

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string svg_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

} // namespace

ModelTag parse_model_tag(const std::string& name) {
    if (name == "reaction") return ModelTag::Reaction;
    if (name == "stable") return ModelTag::Stable;
    if (name == "garch") return ModelTag::Garch;
    if (name == "heston") return ModelTag::Heston;
    if (name == "vg") return ModelTag::Vg;
    throw InvalidInput("unknown model '" + name +
                       "' (expected reaction|stable|garch|heston|vg)");
}

const char* to_string(ModelTag tag) {
    switch (tag) {
        case ModelTag::Reaction: return "reaction";
        case ModelTag::Stable: return "stable";
        case ModelTag::Garch: return "garch";
        case ModelTag::Heston: return "heston";
        case ModelTag::Vg: return "vg";
    }
    return "stable";
}

double r_squared(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw InvalidInput("r_squared: length mismatch");
    if (actual.empty()) throw InvalidInput("r_squared: empty series");
    const double mean = mean_of(actual);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
    }
    if (ss_tot == 0.0) {
        throw InvalidInput("r_squared: constant actual series has zero total sum of squares");
    }
    return 1.0 - ss_res / ss_tot;
}

HestonParams fit_heston_quick(const PriceSeries& prices, int vol_window, double annualization) {
    const ReturnSeries returns = log_returns(prices);
    const VolatilitySeries vols = rolling_volatility(returns, vol_window, annualization);
    if (vols.size() < 3) throw InvalidInput("heston fit: too few volatility observations");

    const double dt = 1.0 / annualization;
    std::vector<double> v(vols.size());
    for (std::size_t i = 0; i < vols.size(); ++i) v[i] = vols.values[i] * vols.values[i];
    const double v_bar = mean_of(v);

    // AR(1) regression of dv on v gives the reversion speed and level.
    const std::size_t m = v.size() - 1;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dv = v[i + 1] - v[i];
        sx += v[i];
        sy += dv;
        sxx += v[i] * v[i];
        sxy += v[i] * dv;
    }
    const double denom = static_cast<double>(m) * sxx - sx * sx;
    double slope = 0.0, intercept = 0.0;
    if (denom != 0.0) {
        slope = (static_cast<double>(m) * sxy - sx * sy) / denom;
        intercept = (sy - slope * sx) / static_cast<double>(m);
    }

    HestonParams p;
    p.kappa = std::max(-slope / dt, 0.01);
    p.theta = slope < 0.0 ? std::max(-intercept / slope, 1e-8) : std::max(v_bar, 1e-8);
    double resid_ss = 0.0;
    std::vector<double> resid(m);
    for (std::size_t i = 0; i < m; ++i) {
        resid[i] = (v[i + 1] - v[i]) - (intercept + slope * v[i]);
        resid_ss += resid[i] * resid[i];
    }
    const double resid_var = resid_ss / static_cast<double>(m > 1 ? m - 1 : 1);
    p.xi = std::sqrt(std::max(resid_var / std::max(v_bar * dt, 1e-16), 0.0));
    p.mu = mean_of(returns.values) / dt + 0.5 * v_bar;

    // Correlate return shocks with variance shocks at the volatility dates.
    std::vector<double> dr;
    dr.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto it = std::lower_bound(returns.timestamps.begin(), returns.timestamps.end(),
                                   vols.timestamps[i + 1]);
        if (it != returns.timestamps.end() && *it == vols.timestamps[i + 1]) {
            dr.push_back(returns.values[static_cast<std::size_t>(
                it - returns.timestamps.begin())]);
        } else {
            dr.push_back(0.0);
        }
    }
    const double dr_mean = mean_of(dr);
    double c = 0.0, vr = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        c += (dr[i] - dr_mean) * resid[i];
        vr += (dr[i] - dr_mean) * (dr[i] - dr_mean);
        vv += resid[i] * resid[i];
    }
    p.rho = vr > 0.0 && vv > 0.0 ? std::clamp(c / std::sqrt(vr * vv), -0.95, 0.95) : 0.0;
    p.s0 = prices.prices.back();
    p.v0 = v.back();
    return p;
}

VgParams fit_vg_quick(std::span<const double> returns, double fallback_nu) {
    if (returns.size() < 4) throw InvalidInput("vg fit: need at least 4 returns");
    const double n = static_cast<double>(returns.size());
    const double mean = mean_of(returns);
    double m2 = 0.0, m4 = 0.0;
    for (double r : returns) {
        const double d = r - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    const double excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;

    VgParams p;
    p.theta = mean; // per-step drift; the gamma clock advances one unit per step
    p.nu = excess_kurtosis > 0.0 ? excess_kurtosis / 3.0 : fallback_nu;
    const double sigma2 = m2 - p.nu * p.theta * p.theta;
    p.sigma = std::sqrt(std::max(sigma2, 0.1 * m2));
    return p;
}

namespace {

struct AlignedTrain {
    PriceSeries prices;
    VolatilitySeries vols;
};

// Prices restricted to the dates where the rolling volatility exists.
AlignedTrain align_on_vol(const PriceSeries& prices, const VolatilitySeries& vols,
                          const DateRange& range) {
    AlignedTrain out;
    out.prices.ticker = prices.ticker;
    out.vols.window = vols.window;
    out.vols.annualization = vols.annualization;
    const VolLookup lookup{vols};
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!range.contains(prices.timestamps[i])) continue;
        const auto v = lookup.at(prices.timestamps[i]);
        if (!v) continue;
        out.prices.timestamps.push_back(prices.timestamps[i]);
        out.prices.prices.push_back(prices.prices[i]);
        out.vols.timestamps.push_back(prices.timestamps[i]);
        out.vols.values.push_back(*v);
    }
    if (out.prices.size() < 2) {
        throw InvalidInput("backtest: train slice has fewer than 2 rows with volatility; "
                           "widen the range or shrink the window");
    }
    return out;
}

TimeGrid unit_span_grid(std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = static_cast<double>(n) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return TimeGrid{std::move(t)};
}

} // namespace

BacktestReport backtest(const PriceSeries& data, ModelTag model, const DateRange& train,
                        const DateRange& test, RngSeed seed, const BacktestConfig& cfg) {
    auto [train_p, test_p] = split(data, train, test);

    BacktestReport report;
    report.ticker = data.ticker;
    report.model = model;
    report.train_range = train;
    report.test_range = test;
    report.seed = seed.seed;

    // Each branch fits on the train slice and leaves a re-runnable generator
    // of the simulated track so the optional ensemble band can redraw it.
    std::function<std::vector<double>(RngSeed)> simulate_track;

    try {
        switch (model) {
            case ModelTag::Stable: {
                const ReturnSeries train_r = log_returns(train_p);
                const StableFit fit = fit_stable_mle(train_r, cfg.stable_alpha);
                const ReturnSeries test_r = log_returns(test_p);
                const StableParams params{cfg.stable_alpha, 0.0, fit.theta, fit.sigma};
                const std::size_t n = test_r.size();
                simulate_track = [params, n](RngSeed s) { return stable_sample(n, params, s); };

                report.params = {{"alpha", cfg.stable_alpha},
                                 {"theta", fit.theta},
                                 {"sigma", fit.sigma},
                                 {"loglik", fit.loglik}};
                report.track_label = "log_return";
                report.series = {index_axis(n), test_r.values, simulate_track(seed)};
                break;
            }
            case ModelTag::Vg: {
                const ReturnSeries train_r = log_returns(train_p);
                const VgParams params = fit_vg_quick(train_r.values, cfg.vg_fallback_nu);
                const ReturnSeries test_r = log_returns(test_p);
                const std::size_t n = test_r.size();
                simulate_track = [params, n](RngSeed s) {
                    const SimPath path =
                        simulate_vg(params, TimeGrid::uniform(0.0, static_cast<double>(n), n), s);
                    std::vector<double> sims(n);
                    for (std::size_t i = 0; i < n; ++i) {
                        sims[i] = path.states[i + 1][0] - path.states[i][0];
                    }
                    return sims;
                };

                report.params = {{"theta", params.theta},
                                 {"sigma", params.sigma},
                                 {"nu", params.nu}};
                report.track_label = "log_return";
                report.series = {index_axis(n), test_r.values, simulate_track(seed)};
                break;
            }
            case ModelTag::Garch: {
                const ReturnSeries train_r = log_returns(train_p);
                const GarchFit fit = fit_garch(train_r, cfg.garch_p, cfg.garch_q);
                const ReturnSeries test_r = log_returns(test_p);
                const std::size_t n = test_r.size();
                const GarchParams params = fit.params;
                simulate_track = [params, n](RngSeed s) { return simulate_garch(params, n, s); };

                report.params = {{"omega", params.omega}, {"mean", params.mean}};
                for (int i = 0; i < params.q(); ++i) {
                    report.params.emplace_back("alpha" + std::to_string(i + 1),
                                               params.alphas[static_cast<std::size_t>(i)]);
                }
                for (int j = 0; j < params.p(); ++j) {
                    report.params.emplace_back("beta" + std::to_string(j + 1),
                                               params.betas[static_cast<std::size_t>(j)]);
                }
                report.params.emplace_back("loglik", fit.loglik);
                report.track_label = "log_return";
                report.series = {index_axis(n), test_r.values, simulate_track(seed)};
                break;
            }
            case ModelTag::Heston: {
                HestonParams params =
                    fit_heston_quick(train_p, cfg.vol_window, cfg.annualization);
                const VolatilitySeries vols =
                    rolling_volatility(log_returns(data), cfg.vol_window, cfg.annualization);
                const auto v0 = VolLookup{vols}.at(test_p.timestamps.front());
                if (!v0) {
                    throw InvalidInput("no rolling volatility at the first test date; "
                                       "the train window must supply enough history");
                }
                params.s0 = test_p.prices.front();
                params.v0 = *v0 * *v0;

                const double dt = 1.0 / cfg.annualization;
                const std::size_t steps = test_p.size() - 1;
                const TimeGrid grid =
                    TimeGrid::uniform(0.0, dt * static_cast<double>(steps), steps);
                simulate_track = [params, grid](RngSeed s) {
                    return simulate_heston(params, grid, s).component(0);
                };

                report.params = {{"mu", params.mu},     {"kappa", params.kappa},
                                 {"theta", params.theta}, {"xi", params.xi},
                                 {"rho", params.rho},   {"s0", params.s0},
                                 {"v0", params.v0}};
                report.track_label = "price";
                report.series = {index_axis(test_p.size()), test_p.prices, simulate_track(seed)};
                break;
            }
            case ModelTag::Reaction: {
                const VolatilitySeries vols =
                    rolling_volatility(log_returns(data), cfg.vol_window, cfg.annualization);
                const AlignedTrain aligned = align_on_vol(data, vols, train);
                const CalibrationResult calib =
                    calibrate_reaction_model(aligned.prices, aligned.vols, cfg.reaction_x0);
                const RateConstants k{calib.values[0], calib.values[1], calib.values[2],
                                      calib.values[3]};

                const VolLookup lookup{vols};
                const auto v0 = lookup.at(test_p.timestamps.front());
                if (!v0) {
                    throw InvalidInput("no rolling volatility at the first test date; "
                                       "the train window must supply enough history");
                }
                std::vector<double> actual_vol(test_p.size());
                for (std::size_t i = 0; i < test_p.size(); ++i) {
                    const auto v = lookup.at(test_p.timestamps[i]);
                    if (!v) {
                        throw InvalidInput("missing rolling volatility inside the test slice");
                    }
                    actual_vol[i] = *v;
                }

                const SimPath sim = simulate_deterministic(
                    MarketState{test_p.prices.front(), *v0}, k, unit_span_grid(test_p.size()));
                const auto track = sim.component(0);
                // Noise-free test simulation: every ensemble member coincides.
                simulate_track = [track](RngSeed) { return track; };

                report.params = {{"k1", k.k1}, {"k2", k.k2}, {"k3", k.k3}, {"k4", k.k4}};
                report.track_label = "price";
                report.series = {index_axis(test_p.size()), test_p.prices, track};
                report.aux_label = "volatility";
                report.aux_series =
                    TrackSeries{index_axis(test_p.size()), actual_vol, sim.component(1)};
                report.aux_r_squared =
                    r_squared(report.aux_series->actual, report.aux_series->simulated);
                break;
            }
        }

        if (cfg.ensemble > 1) {
            const std::size_t n = report.series.t.size();
            const auto paths = static_cast<std::size_t>(cfg.ensemble);
            std::vector<double> sum(n, 0.0);
            std::vector<double> sum_sq(n, 0.0);
            for (std::size_t p = 0; p < paths; ++p) {
                const auto track = simulate_track(seed.with_stream(p));
                for (std::size_t i = 0; i < n; ++i) {
                    sum[i] += track[i];
                    sum_sq[i] += track[i] * track[i];
                }
            }
            EnsembleBand band;
            band.paths = paths;
            band.t = report.series.t;
            band.mean.resize(n);
            band.lo.resize(n);
            band.hi.resize(n);
            const double np = static_cast<double>(paths);
            for (std::size_t i = 0; i < n; ++i) {
                band.mean[i] = sum[i] / np;
                const double var =
                    std::max((sum_sq[i] - np * band.mean[i] * band.mean[i]) / (np - 1.0), 0.0);
                const double sd = std::sqrt(var);
                band.lo[i] = band.mean[i] - sd;
                band.hi[i] = band.mean[i] + sd;
            }
            report.ensemble = std::move(band);
        }
    } catch (const InvalidInput& e) {
        throw InvalidInput(std::string("backtest[") + to_string(model) + "]: " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string("backtest[") + to_string(model) + "]: " + e.what());
    }

    report.r_squared = r_squared(report.series.actual, report.series.simulated);
    if (report.r_squared < 0.0) {
        report.footnote = "negative R^2: the seeded simulation explains less variance "
                          "than the test-slice mean";
    }
    return report;
}

namespace {

void emit_csv(const BacktestReport& report, std::ostream& out) {
    out << "t,actual,simulated\n";
    for (std::size_t i = 0; i < report.series.t.size(); ++i) {
        out << format_double(report.series.t[i]) << ',' << format_double(report.series.actual[i])
            << ',' << format_double(report.series.simulated[i]) << '\n';
    }
}

void emit_svg(const BacktestReport& report, std::ostream& out) {
    constexpr double width = 800.0, height = 400.0;
    constexpr double left = 60.0, right = 780.0, top = 30.0, bottom = 360.0;

    const auto& t = report.series.t;
    double lo = report.series.actual.front(), hi = lo;
    for (const auto* track : {&report.series.actual, &report.series.simulated}) {
        for (double y : *track) {
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    }
    if (hi == lo) {
        hi += 1.0;
        lo -= 1.0;
    }
    const double t0 = t.front();
    const double t1 = t.back() == t.front() ? t.front() + 1.0 : t.back();

    auto px = [&](double x) { return left + (x - t0) / (t1 - t0) * (right - left); };
    auto py = [&](double y) { return bottom - (y - lo) / (hi - lo) * (bottom - top); };

    auto polyline = [&](const std::vector<double>& ys, const char* color) {
        out << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < ys.size(); ++i) {
            if (i) out << ' ';
            out << svg_number(px(t[i])) << ',' << svg_number(py(ys[i]));
        }
        out << "\"/>\n";
    };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "  <text x=\"400\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">"
        << xml_escape(report.ticker) << ' ' << to_string(report.model) << "</text>\n";
    out << "  <line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << left - 5 << "\" y=\"" << bottom + 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << svg_number(t0) << "</text>\n";
    out << "  <text x=\"" << right << "\" y=\"" << bottom + 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << svg_number(t1) << "</text>\n";
    out << "  <text x=\"" << left - 8 << "\" y=\"" << bottom
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << svg_number(lo)
        << "</text>\n";
    out << "  <text x=\"" << left - 8 << "\" y=\"" << top + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << svg_number(hi)
        << "</text>\n";
    polyline(report.series.actual, "#1f77b4");
    polyline(report.series.simulated, "#d62728");
    out << "  <line x1=\"640\" y1=\"40\" x2=\"665\" y2=\"40\" stroke=\"#1f77b4\" "
           "stroke-width=\"1.5\"/>\n";
    out << "  <text x=\"670\" y=\"44\" font-family=\"sans-serif\" font-size=\"11\">Actual"
           "</text>\n";
    out << "  <line x1=\"640\" y1=\"58\" x2=\"665\" y2=\"58\" stroke=\"#d62728\" "
           "stroke-width=\"1.5\"/>\n";
    out << "  <text x=\"670\" y=\"62\" font-family=\"sans-serif\" font-size=\"11\">Simulated"
           "</text>\n";
    out << "</svg>\n";
}

} // namespace

void emit_plot(const BacktestReport& report, PlotFormat format, const std::string& path) {
    if (report.series.t.empty()) throw InvalidInput("emit_plot: empty report series");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("emit_plot: cannot write " + path);
    if (format == PlotFormat::Csv) {
        emit_csv(report, out);
    } else {
        emit_svg(report, out);
    }
    if (!out.good()) throw InvalidInput("emit_plot: write failed for " + path);
}

namespace {

ordered_json range_json(const DateRange& r) {
    return ordered_json{{"start", format_date(r.start)}, {"end", format_date(r.end)}};
}

ordered_json track_json(const TrackSeries& s) {
    return ordered_json{{"t", s.t}, {"actual", s.actual}, {"simulated", s.simulated}};
}

} // namespace

std::string backtest_to_json(const BacktestReport& report) {
    ordered_json j;
    j["ticker"] = report.ticker;
    j["model"] = to_string(report.model);
    j["train_range"] = range_json(report.train_range);
    j["test_range"] = range_json(report.test_range);
    j["seed"] = report.seed;
    ordered_json params;
    for (const auto& [name, value] : report.params) params[name] = value;
    j["params"] = params;
    j["track"] = report.track_label;
    j["r_squared"] = report.r_squared;
    if (!report.footnote.empty()) j["footnote"] = report.footnote;
    j["series"] = track_json(report.series);
    if (report.aux_series) {
        j["aux"] = ordered_json{{"track", report.aux_label},
                                {"r_squared", *report.aux_r_squared},
                                {"series", track_json(*report.aux_series)}};
    }
    if (report.ensemble) {
        j["ensemble"] = ordered_json{{"paths", report.ensemble->paths},
                                     {"t", report.ensemble->t},
                                     {"mean", report.ensemble->mean},
                                     {"lo", report.ensemble->lo},
                                     {"hi", report.ensemble->hi}};
    }
    return j.dump(2) + "\n";
}

std::string calibration_to_json(const CalibrationResult& result) {
    ordered_json j;
    j["model"] = result.model;
    ordered_json params;
    for (std::size_t i = 0; i < result.names.size(); ++i) params[result.names[i]] = result.values[i];
    j["params"] = params;
    j["objective"] = result.objective;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    return j.dump(2) + "\n";
}

std::string garch_fit_to_json(const GarchFit& fit) {
    ordered_json j;
    j["model"] = "garch";
    j["orders"] = ordered_json{{"p", fit.params.p()}, {"q", fit.params.q()}};
    j["params"] = ordered_json{{"omega", fit.params.omega},
                               {"alphas", fit.params.alphas},
                               {"betas", fit.params.betas},
                               {"mean", fit.params.mean}};
    j["loglik"] = fit.loglik;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    return j.dump(2) + "\n";
}

std::string equilibrium_to_json(const EquilibriumReport& report) {
    ordered_json j;
    ordered_json points = ordered_json::array();
    for (std::size_t i = 0; i < report.points.size(); ++i) {
        ordered_json pt;
        pt["S"] = report.points[i].S;
        pt["V"] = report.points[i].V;
        pt["jacobian"] = ordered_json::array(
            {ordered_json::array({report.jacobians[i][0][0], report.jacobians[i][0][1]}),
             ordered_json::array({report.jacobians[i][1][0], report.jacobians[i][1][1]})});
        ordered_json eig = ordered_json::array();
        for (const auto& ev : report.eigenvalues[i]) {
            eig.push_back(ordered_json{{"re", ev.real()}, {"im", ev.imag()}});
        }
        pt["eigenvalues"] = eig;
        pt["classification"] = to_string(report.classifications[i]);
        points.push_back(pt);
    }
    j["equilibria"] = points;
    if (!report.note.empty()) j["note"] = report.note;
    return j.dump(2) + "\n";
}

} // namespace stochlab
