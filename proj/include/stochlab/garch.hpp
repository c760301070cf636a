#pragma once

#include <cstddef>
#include <vector>

#include "stochlab/market_data.hpp"
#include "stochlab/rng.hpp"

namespace stochlab {

// GARCH(p, q) coefficients with a constant conditional mean. Construction
// enforces omega > 0, nonnegative coefficients and covariance stationarity
// (sum alpha + sum beta < 1).
struct GarchParams {
    double omega;
    std::vector<double> alphas; // ARCH terms, size q
    std::vector<double> betas;  // GARCH terms, size p
    double mean;

    GarchParams(double omega_, std::vector<double> alphas_, std::vector<double> betas_,
                double mean_ = 0.0);

    int q() const { return static_cast<int>(alphas.size()); }
    int p() const { return static_cast<int>(betas.size()); }
    double persistence() const;
    double long_run_variance() const; // omega / (1 - persistence)
};

// What seeds the pre-sample squared innovations and variances.
enum class GarchPresample { SampleVariance, LongRunVariance };

// Conditional variances sigma_t^2 for every observation; lags reaching before
// the sample use the selected seed value.
std::vector<double> variance_recursion(const GarchParams& params, const ReturnSeries& returns,
                                       GarchPresample presample = GarchPresample::SampleVariance);

// Gaussian log-likelihood sum_t -(log 2pi + log sigma_t^2 + a_t^2/sigma_t^2)/2.
double garch_loglik(const GarchParams& params, const ReturnSeries& returns,
                    GarchPresample presample = GarchPresample::SampleVariance);

struct GarchFit {
    GarchParams params;
    double loglik = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

// Gaussian quasi-MLE via Nelder-Mead on a log/logit reparameterization that
// keeps omega positive and the persistence below 1 - 1e-6. The conditional
// mean is fixed at the sample mean.
GarchFit fit_garch(const ReturnSeries& returns, int p = 1, int q = 1);

// h-step variance forecast with E[a^2] = sigma^2 beyond the first step.
// last_a2 and last_s2 carry the most recent q and p values, newest last.
std::vector<double> forecast_variance(const GarchParams& params, std::vector<double> last_a2,
                                      std::vector<double> last_s2, std::size_t horizon);

// Simulated return path r_t = mean + sigma_t eps_t with Gaussian innovations;
// the recursion starts from the long-run variance.
std::vector<double> simulate_garch(const GarchParams& params, std::size_t n, RngSeed seed);

} // namespace stochlab
