#include "stochlab/garch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stochlab/errors.hpp"
#include "stochlab/optimize.hpp"

namespace stochlab {

namespace {

constexpr double kMaxPersistence = 1.0 - 1e-6;

double sample_mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

GarchParams::GarchParams(double omega_, std::vector<double> alphas_, std::vector<double> betas_,
                         double mean_)
    : omega(omega_), alphas(std::move(alphas_)), betas(std::move(betas_)), mean(mean_) {
    if (!(omega > 0.0)) throw InvalidInput("garch: omega must be > 0");
    for (double a : alphas) {
        if (a < 0.0) throw InvalidInput("garch: alpha coefficients must be >= 0");
    }
    for (double b : betas) {
        if (b < 0.0) throw InvalidInput("garch: beta coefficients must be >= 0");
    }
    if (persistence() >= 1.0) {
        throw InvalidInput("garch: sum of alphas and betas must stay below 1 (stationarity)");
    }
}

double GarchParams::persistence() const {
    return std::accumulate(alphas.begin(), alphas.end(), 0.0) +
           std::accumulate(betas.begin(), betas.end(), 0.0);
}

double GarchParams::long_run_variance() const { return omega / (1.0 - persistence()); }

std::vector<double> variance_recursion(const GarchParams& params, const ReturnSeries& returns,
                                       GarchPresample presample) {
    const std::size_t n = returns.size();
    const std::size_t max_lag = static_cast<std::size_t>(std::max(params.p(), params.q()));
    if (n <= max_lag) {
        throw InvalidInput("garch: series length must exceed max(p, q)");
    }

    std::vector<double> a(n);
    for (std::size_t t = 0; t < n; ++t) a[t] = returns.values[t] - params.mean;
    const double seed = presample == GarchPresample::SampleVariance
                            ? sample_variance(a, sample_mean(a))
                            : params.long_run_variance();

    std::vector<double> s2(n);
    for (std::size_t t = 0; t < n; ++t) {
        double v = params.omega;
        for (int i = 1; i <= params.q(); ++i) {
            const double a2 = t >= static_cast<std::size_t>(i)
                                  ? a[t - static_cast<std::size_t>(i)] *
                                        a[t - static_cast<std::size_t>(i)]
                                  : seed;
            v += params.alphas[static_cast<std::size_t>(i - 1)] * a2;
        }
        for (int j = 1; j <= params.p(); ++j) {
            const double prev = t >= static_cast<std::size_t>(j)
                                    ? s2[t - static_cast<std::size_t>(j)]
                                    : seed;
            v += params.betas[static_cast<std::size_t>(j - 1)] * prev;
        }
        s2[t] = v;
    }
    return s2;
}

double garch_loglik(const GarchParams& params, const ReturnSeries& returns,
                    GarchPresample presample) {
    if (returns.size() == 0) throw InvalidInput("garch: empty return series");
    const auto s2 = variance_recursion(params, returns, presample);
    constexpr double log_2pi = 1.8378770664093453;
    double ll = 0.0;
    for (std::size_t t = 0; t < returns.size(); ++t) {
        const double a = returns.values[t] - params.mean;
        ll += -0.5 * (log_2pi + std::log(s2[t]) + a * a / s2[t]);
    }
    return ll;
}

GarchFit fit_garch(const ReturnSeries& returns, int p, int q) {
    if (p < 0 || q < 0 || p + q == 0) throw InvalidInput("garch: need p >= 0, q >= 0, p+q >= 1");
    if (returns.size() < 100) {
        throw InvalidInput("garch fit: need at least 100 returns, got " +
                           std::to_string(returns.size()));
    }

    const double mean = sample_mean(returns.values);
    const double var = sample_variance(returns.values, mean);
    const std::size_t n_coeff = static_cast<std::size_t>(p + q);

    // x = [log omega, persistence logit, softmax logits for the coefficient
    // shares (last share pinned)]: positivity and stationarity hold for every
    // point the optimizer can visit.
    const auto decode = [&, mean](const std::vector<double>& x) {
        const double omega = std::max(std::exp(x[0]), 1e-300);
        const double persistence = kMaxPersistence * logistic(x[1]);
        std::vector<double> w(n_coeff);
        double wsum = 0.0;
        for (std::size_t i = 0; i < n_coeff; ++i) {
            w[i] = std::exp(i + 1 < n_coeff ? x[2 + i] : 0.0);
            wsum += w[i];
        }
        std::vector<double> alphas(w.begin(), w.begin() + q);
        std::vector<double> betas(w.begin() + q, w.end());
        for (double& a : alphas) a = persistence * a / wsum;
        for (double& b : betas) b = persistence * b / wsum;
        return GarchParams(omega, std::move(alphas), std::move(betas), mean);
    };

    Objective obj;
    obj.arity = 1 + n_coeff; // omega, persistence, n_coeff-1 shares
    obj.eval = [&](const std::vector<double>& x) {
        if (!std::isfinite(std::exp(x[0]))) return std::numeric_limits<double>::infinity();
        return -garch_loglik(decode(x), returns);
    };

    // Start at omega = 0.1 var, alpha total 0.1, beta total 0.8 (folded into
    // alpha when p = 0, into beta when q = 0).
    std::vector<double> target(n_coeff);
    for (int i = 0; i < q; ++i) target[static_cast<std::size_t>(i)] = (p > 0 ? 0.1 : 0.9) / q;
    for (int j = 0; j < p; ++j) {
        target[static_cast<std::size_t>(q + j)] = (q > 0 ? 0.8 : 0.9) / p;
    }
    const double total = std::accumulate(target.begin(), target.end(), 0.0);

    std::vector<double> x0(obj.arity, 0.0);
    x0[0] = std::log(0.1 * var);
    const double p0 = total;
    x0[1] = std::log(p0 / kMaxPersistence / (1.0 - p0 / kMaxPersistence));
    for (std::size_t i = 0; i + 1 < n_coeff; ++i) {
        x0[2 + i] = std::log(target[i] / target[n_coeff - 1]);
    }

    const auto res = simplex_minimize(obj, x0);
    GarchFit fit{decode(res.x), -res.f, res.converged, res.iterations};
    return fit;
}

std::vector<double> forecast_variance(const GarchParams& params, std::vector<double> last_a2,
                                      std::vector<double> last_s2, std::size_t horizon) {
    if (horizon < 1) throw InvalidInput("garch forecast: horizon must be >= 1");
    if (last_a2.size() < static_cast<std::size_t>(params.q()) ||
        last_s2.size() < static_cast<std::size_t>(params.p())) {
        throw InvalidInput("garch forecast: state shorter than the model order");
    }
    for (double v : last_a2) {
        if (v < 0.0) throw InvalidInput("garch forecast: squared innovations must be >= 0");
    }
    for (double v : last_s2) {
        if (!(v > 0.0)) throw InvalidInput("garch forecast: variances must be > 0");
    }

    std::vector<double> out;
    out.reserve(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        double v = params.omega;
        for (int i = 1; i <= params.q(); ++i) {
            const std::size_t idx = last_a2.size() - static_cast<std::size_t>(i);
            v += params.alphas[static_cast<std::size_t>(i - 1)] * last_a2[idx];
        }
        for (int j = 1; j <= params.p(); ++j) {
            const std::size_t idx = last_s2.size() - static_cast<std::size_t>(j);
            v += params.betas[static_cast<std::size_t>(j - 1)] * last_s2[idx];
        }
        out.push_back(v);
        last_a2.push_back(v); // E[a^2] = sigma^2 from one step ahead on
        last_s2.push_back(v);
    }
    return out;
}

std::vector<double> simulate_garch(const GarchParams& params, std::size_t n, RngSeed seed) {
    if (n == 0) throw InvalidInput("garch simulate: n must be >= 1");
    Rng rng(seed);
    const std::size_t max_lag = static_cast<std::size_t>(std::max(params.p(), params.q()));
    const double lr = params.long_run_variance();

    std::vector<double> a2(max_lag, lr);
    std::vector<double> s2(max_lag, lr);
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        double v = params.omega;
        for (int i = 1; i <= params.q(); ++i) {
            v += params.alphas[static_cast<std::size_t>(i - 1)] * a2[a2.size() - i];
        }
        for (int j = 1; j <= params.p(); ++j) {
            v += params.betas[static_cast<std::size_t>(j - 1)] * s2[s2.size() - j];
        }
        const double innovation = std::sqrt(v) * rng.normal();
        out[t] = params.mean + innovation;
        a2.push_back(innovation * innovation);
        s2.push_back(v);
    }
    return out;
}

} // namespace stochlab
