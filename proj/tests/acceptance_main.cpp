// Acceptance runner: one numbered criterion per line, PASS or FAIL with the
// failure reason, nonzero exit when anything fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "report_fixture.hpp"
#include "stable_oracle.hpp"
#include "stochlab/calibrate.hpp"
#include "stochlab/cli.hpp"
#include "stochlab/garch.hpp"
#include "stochlab/market_data.hpp"
#include "stochlab/optimize.hpp"
#include "stochlab/reaction.hpp"
#include "stochlab/report.hpp"
#include "stochlab/sde.hpp"
#include "stochlab/stable.hpp"
#include "test_helpers.hpp"

using namespace stochlab;
namespace fs = std::filesystem;

namespace {

struct CheckFailure {
    std::string message;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw CheckFailure{message};
}

void require_close(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s: got %.10g, want %.10g +- %.3g", what.c_str(), got,
                      want, tol);
        throw CheckFailure{buf};
    }
}

class Harness {
public:
    void criterion(int id, const std::string& label, const std::function<void()>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string failure;
        try {
            body();
        } catch (const CheckFailure& f) {
            failure = f.message;
        } catch (const std::exception& e) {
            failure = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (failure.empty()) {
            std::printf("PASS  %2d  %s (%.2f s)\n", id, label.c_str(), secs);
        } else {
            std::printf("FAIL  %2d  %s (%.2f s): %s\n", id, label.c_str(), secs,
                        failure.c_str());
            ++failures_;
        }
        std::fflush(stdout);
    }

    int failures() const { return failures_; }

private:
    int failures_ = 0;
};

double elapsed_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"stochlab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return stochlab::cli::run(static_cast<int>(argv.size()), argv.data());
}

} // namespace

int main() {
    Harness h;
    const auto suite_start = std::chrono::steady_clock::now();

    h.criterion(1, "stable log-density matches the Gaussian and Cauchy closed forms", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const double sigma = 0.7;
        const StableParams gauss{2.0, 0.0, 0.0, sigma};
        for (int i = 0; i < 25; ++i) {
            const double x = -4.2 + 8.4 * i / 24.0;
            const double want =
                std::exp(-x * x / (4.0 * sigma * sigma)) / (2.0 * sigma * std::sqrt(std::numbers::pi));
            require_close(std::exp(stable_logpdf(x, gauss)), want, 1e-6, "gaussian reduction");
        }
        const StableParams cauchy{1.0, 0.0, 0.0, 1.0};
        for (int i = 0; i < 25; ++i) {
            const double x = -8.0 + 16.0 * i / 24.0;
            const double want = 1.0 / (std::numbers::pi * (1.0 + x * x));
            require_close(std::exp(stable_logpdf(x, cauchy)), want, 1e-6, "cauchy reduction");
        }
        require(elapsed_since(t0) < 5.0, "runtime exceeded 5 s");
    });

    h.criterion(2, "stable density at the location equals Gamma(1/a)/(pi a sigma)", [&] {
        for (const double alpha : {1.1, 1.5, 1.9}) {
            const double want = std::tgamma(1.0 / alpha) / (std::numbers::pi * alpha);
            require_close(stable_pdf(0.0, {alpha, 0.0, 0.0, 1.0}), want, 1e-6,
                          "f(0) at alpha " + std::to_string(alpha));
        }
    });

    h.criterion(3, "CMS sampler passes a KS test against the quadrature CDF", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const testutil::StableCdfOracle oracle(1.5);
        const auto draws = stable_sample(100000, {1.5, 0.0, 0.0, 1.0}, {2028, 0});
        const double ks = testutil::ks_statistic(draws, oracle, 0.0, 1.0);
        require(ks < 1.95 / std::sqrt(1e5),
                "KS statistic " + std::to_string(ks) + " >= " +
                    std::to_string(1.95 / std::sqrt(1e5)));
        require(elapsed_since(t0) < 30.0, "runtime exceeded 30 s");
    });

    h.criterion(4, "stable MLE recovers (theta, sigma) across 5 seeds", [&] {
        for (std::uint64_t seed = 301; seed < 306; ++seed) {
            const auto draws = stable_sample(10000, {1.5, 0.0, 0.001, 0.01}, {seed, 0});
            const auto fit = fit_stable_mle(draws, 1.5);
            require_close(fit.theta, 0.001, 0.20 * 0.001,
                          "theta at seed " + std::to_string(seed));
            require_close(fit.sigma, 0.01, 0.10 * 0.01,
                          "sigma at seed " + std::to_string(seed));
        }
    });

    h.criterion(5, "bundled decade fixture refits its generator parameters", [&] {
        const auto loaded = load_csv(testutil::fixture("aapl_like.csv"));
        const auto returns = log_returns(loaded.series);
        const auto fit = fit_stable_mle(returns, 1.5);
        require_close(fit.theta, 0.001179, 0.25 * 0.001179, "theta");
        require_close(fit.sigma, 0.009527, 0.10 * 0.009527, "sigma");
    });

    h.criterion(6, "equilibria: residuals, interior saddle, origin stable node", [&] {
        std::mt19937_64 rng(606);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const auto draw = [&] { return 1.0 - u(rng); }; // (0, 1]
        for (int trial = 0; trial < 100; ++trial) {
            const RateConstants k{draw(), draw(), draw(), draw()};
            const auto eq = equilibria(k); // residual < 1e-12 self-checked inside
            require(eq.points.size() == 2, "expected both equilibria");
            for (const auto& pt : eq.points) {
                const auto d = drift(pt, k);
                require(std::max(std::abs(d.S), std::abs(d.V)) < 1e-12,
                        "drift residual >= 1e-12");
            }
            const auto report = classify(k);
            require(report.classifications[0] == StabilityClass::StableNode,
                    "origin not a stable node");
            const double lo = std::min(-k.k3, -k.k4);
            const double hi = std::max(-k.k3, -k.k4);
            require_close(report.eigenvalues[0][0].real(), lo, 1e-12, "origin eigenvalue 1");
            require_close(report.eigenvalues[0][1].real(), hi, 1e-12, "origin eigenvalue 2");
            require(report.classifications[1] == StabilityClass::Saddle,
                    "interior point not a saddle");
            const double root = std::sqrt(k.k3 * k.k4);
            require_close(report.eigenvalues[1][0].real(), -root, 1e-8, "interior eigenvalue 1");
            require_close(report.eigenvalues[1][1].real(), root, 1e-8, "interior eigenvalue 2");
            require(report.eigenvalues[1][0].imag() == 0.0, "interior eigenvalue not real");
        }
    });

    h.criterion(7, "analytic Jacobian matches central finite differences", [&] {
        std::mt19937_64 rng(707);
        std::uniform_real_distribution<double> u(0.01, 2.0);
        for (int trial = 0; trial < 100; ++trial) {
            const MarketState x{u(rng), u(rng)};
            const RateConstants k{u(rng), u(rng), u(rng), u(rng)};
            const auto analytic = jacobian(x, k);
            const auto step = [](double v) { return 1e-6 * std::max(1.0, std::abs(v)); };
            const double hs = step(x.S);
            const double hv = step(x.V);
            const MarketState sp = drift({x.S + hs, x.V}, k);
            const MarketState sm = drift({x.S - hs, x.V}, k);
            const MarketState vp = drift({x.S, x.V + hv}, k);
            const MarketState vm = drift({x.S, x.V - hv}, k);
            const double fd[2][2] = {{(sp.S - sm.S) / (2 * hs), (vp.S - vm.S) / (2 * hv)},
                                     {(sp.V - sm.V) / (2 * hs), (vp.V - vm.V) / (2 * hv)}};
            for (int r = 0; r < 2; ++r) {
                for (int c = 0; c < 2; ++c) {
                    require(std::abs(analytic[r][c] - fd[r][c]) < 1e-6,
                            "jacobian entry off by more than 1e-6");
                }
            }
        }
    });

    h.criterion(8, "GBM Monte Carlo terminal mean matches s0 exp(mu T)", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto grid = TimeGrid::uniform(0.0, 1.0, 32);
        const std::size_t paths = 100000;
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i = 0; i < paths; ++i) {
            const double s = simulate_gbm({0.05, 0.2, 100.0}, grid, {808, i}).terminal(0);
            sum += s;
            sum_sq += s * s;
        }
        const double mean = sum / paths;
        const double var = (sum_sq - paths * mean * mean) / (paths - 1.0);
        const double se = std::sqrt(var / paths);
        require_close(mean, 100.0 * std::exp(0.05), 3.0 * se, "terminal mean");
        require(elapsed_since(t0) < 10.0, "runtime exceeded 10 s");
    });

    h.criterion(9, "Heston full truncation: nonnegative variance, ergodic mean", [&] {
        HestonParams p;
        p.mu = 0.0;
        p.kappa = 2.0;
        p.theta = 0.04;
        p.xi = 0.3;
        p.rho = -0.5;
        p.s0 = 100.0;
        const auto short_grid = TimeGrid::uniform(0.0, 1.0, 100);
        for (std::uint64_t i = 0; i < 1000; ++i) {
            p.v0 = i % 2 == 0 ? 0.0 : 0.04;
            const auto path = simulate_heston(p, short_grid, {909, i});
            for (const auto& s : path.states) {
                require(s[1] >= 0.0, "negative variance emitted");
            }
        }

        p.v0 = 0.04;
        p.rho = 0.0;
        const auto long_grid = TimeGrid::uniform(0.0, 50.0, 5000);
        double total = 0.0;
        std::size_t count = 0;
        for (std::uint64_t i = 0; i < 16; ++i) {
            const auto path = simulate_heston(p, long_grid, {910, i});
            for (const auto& s : path.states) {
                total += s[1];
                ++count;
            }
        }
        require_close(total / count, 0.04, 0.10 * 0.04, "ergodic mean of v");
    });

    h.criterion(10, "fBm: unit variance at t=1 and independent H=1/2 increments", [&] {
        const auto grid = TimeGrid::uniform(0.0, 1.0, 256);
        for (const double hurst : {0.3, 0.5, 0.7}) {
            const FbmSampler sampler({hurst, 1.0}, grid);
            double sum = 0.0, sum_sq = 0.0;
            for (std::uint64_t i = 0; i < 10000; ++i) {
                const double b1 = sampler.sample({1010, i}).terminal(0);
                sum += b1;
                sum_sq += b1 * b1;
            }
            const double mean = sum / 10000.0;
            const double var = (sum_sq - 10000.0 * mean * mean) / 9999.0;
            require_close(var, 1.0, 0.05, "Var[B_1] at H " + std::to_string(hurst));
        }

        const FbmSampler sampler({0.5, 1.0}, grid);
        double num = 0.0, den = 0.0;
        for (std::uint64_t i = 0; i < 10000; ++i) {
            const auto path = sampler.sample({1011, i});
            for (std::size_t k = 0; k + 2 < grid.size(); ++k) {
                const double d1 = path.states[k + 1][0] - path.states[k][0];
                const double d2 = path.states[k + 2][0] - path.states[k + 1][0];
                num += d1 * d2;
                den += d1 * d1;
            }
        }
        require(std::abs(num / den) <= 0.02, "lag-1 increment autocorrelation beyond 0.02");
    });

    h.criterion(11, "GARCH(1,1): parameter recovery and long-run variance", [&] {
        const GarchParams truth(0.05, {0.1}, {0.85}, 0.0);
        const auto rets = testutil::return_series(simulate_garch(truth, 20000, {1111, 0}));
        const auto fit = fit_garch(rets, 1, 1);
        require_close(fit.params.omega, 0.05, 0.25 * 0.05, "omega");
        require_close(fit.params.alphas[0], 0.10, 0.25 * 0.10, "alpha");
        require_close(fit.params.betas[0], 0.85, 0.25 * 0.85, "beta");

        const auto long_path = simulate_garch(truth, 100000, {1112, 0});
        require_close(testutil::sample_variance(long_path), truth.long_run_variance(),
                      0.10 * truth.long_run_variance(), "long-run variance");
    });

    h.criterion(12, "reaction calibration recovers k* and dominates perturbed probes", [&] {
        const RateConstants k_star{0.1, 0.2, 0.01, 0.05};
        const std::size_t n = 200;
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = double(n) * double(i) / double(n - 1);
        const TimeGrid grid{t};
        const auto path = simulate_deterministic({0.2, 0.08}, k_star, grid, OdeScheme::Euler);
        const auto S = path.component(0);
        const auto V = path.component(1);

        const auto prices = testutil::price_series(S, {2019, 1, 1}, "SYN");
        VolatilitySeries vols;
        vols.timestamps = prices.timestamps;
        vols.values = V;

        const auto result =
            calibrate_reaction_model(prices, vols, {0.11, 0.22, 0.011, 0.055});
        const double truth[4] = {0.1, 0.2, 0.01, 0.05};
        for (int i = 0; i < 4; ++i) {
            require(std::abs(result.values[i] - truth[i]) <= 0.30 * truth[i],
                    "k" + std::to_string(i + 1) + " off by more than 30%");
        }

        // Every corner of k* (1 +- 0.5) must score no better.
        for (int mask = 0; mask < 16; ++mask) {
            RateConstants probe = k_star;
            probe.k1 *= (mask & 1) ? 1.5 : 0.5;
            probe.k2 *= (mask & 2) ? 1.5 : 0.5;
            probe.k3 *= (mask & 4) ? 1.5 : 0.5;
            probe.k4 *= (mask & 8) ? 1.5 : 0.5;
            double probe_obj;
            try {
                probe_obj = -legacy_path_loglik(probe, S, V, grid);
            } catch (const std::exception&) {
                probe_obj = std::numeric_limits<double>::infinity();
            }
            require(result.objective <= probe_obj,
                    "objective loses to a perturbed probe");
        }
    });

    h.criterion(13, "simplex solves Rosenbrock; optimizer traces never increase", [&] {
        Objective rosen;
        rosen.arity = 2;
        rosen.eval = [](const std::vector<double>& x) {
            const double a = 1.0 - x[0];
            const double b = x[1] - x[0] * x[0];
            return a * a + 100.0 * b * b;
        };
        const auto res = simplex_minimize(rosen, {-1.2, 1.0});
        require(res.iterations <= 2000, "needed more than 2000 iterations");
        require(std::abs(res.x[0] - 1.0) < 1e-3 && std::abs(res.x[1] - 1.0) < 1e-3,
                "minimum missed by more than 1e-3");

        Objective bowl;
        bowl.arity = 2;
        bowl.eval = [](const std::vector<double>& x) {
            return 2.0 * (x[0] - 1.0) * (x[0] - 1.0) + 0.5 * (x[1] + 2.0) * (x[1] + 2.0);
        };
        Objective boxed = bowl;
        boxed.bounds = std::vector<std::array<double, 2>>{{-50.0, 50.0}, {-50.0, 50.0}};

        const std::vector<OptimizerResult> runs = {
            res,
            simplex_minimize(bowl, {10.0, 10.0}),
            bounded_descent(boxed, {8.0, 8.0}),
            bounded_descent(boxed, {-40.0, 12.0}),
        };
        for (const auto& run : runs) {
            for (std::size_t i = 1; i < run.trace.size(); ++i) {
                require(run.trace[i] <= run.trace[i - 1], "trace increased");
            }
        }
    });

    h.criterion(14, "R^2 definition: 1.0 / 0.0 / 0.5 exactly", [&] {
        const std::vector<double> actual{1.0, 2.0, 3.0};
        require(r_squared(actual, actual) == 1.0, "perfect fit not exactly 1.0");
        const std::vector<double> mean_only{2.0, 2.0, 2.0};
        require(r_squared(actual, mean_only) == 0.0, "mean model not exactly 0.0");
        const std::vector<double> off{1.0, 2.0, 4.0};
        require(r_squared(actual, off) == 0.5, "SSres/SStot case not exactly 0.5");
    });

    h.criterion(15, "backtest CLI is byte-identical across reruns with one seed", [&] {
        const auto base = testutil::scratch_dir("acceptance_determinism");
        const std::string csv = testutil::fixture("aapl_like.csv");
        for (const char* run : {"a", "b"}) {
            require(run_cli({"--out-dir", (base / run).string(), "--seed", "123", "backtest",
                             "--model", "stable", "--csv", csv, "--ticker", "SYN", "--train",
                             "2012-01-03..2017-12-31", "--test", "2018-01-01..2018-11-06",
                             "--plot", "both"}) == 0,
                    "backtest run failed");
        }
        for (const char* name :
             {"SYN_stable_report.json", "SYN_stable_plot.csv", "SYN_stable_plot.svg"}) {
            const auto a = testutil::read_file((base / "a" / name).string());
            const auto b = testutil::read_file((base / "b" / name).string());
            require(!a.empty(), std::string(name) + " missing");
            require(a == b, std::string(name) + " differs between runs");
        }
    });

    h.criterion(16, "suite budget: everything above ran locally within 300 s", [&] {
        require(elapsed_since(suite_start) < 300.0, "acceptance runner exceeded 300 s");
    });

    std::printf("%d criterion(s) failed\n", h.failures());
    return h.failures() == 0 ? 0 : 1;
}
