#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stochlab/market_data.hpp"
#include "stochlab/rng.hpp"

namespace stochlab {

// Symmetric alpha-stable law with characteristic function
// exp(i loc t - |scale t|^alpha). Only beta = 0 is supported; skewed laws are
// rejected rather than approximated.
struct StableParams {
    double alpha = 1.5; // stability index in (0, 2]
    double beta = 0.0;
    double loc = 0.0;   // theta
    double scale = 1.0; // sigma > 0
};

// Density by inversion: f(x) = 1/(pi*sigma) * int_0^inf exp(-u^alpha) *
// cos(u (x-loc)/sigma) du, adaptive quadrature in the bulk and the asymptotic
// power-tail series far out. Absolute density error <= 1e-8.
double stable_pdf(double x, const StableParams& p);
double stable_logpdf(double x, const StableParams& p);

// Chambers-Mallows-Stuck draws for the symmetric case.
std::vector<double> stable_sample(std::size_t n, const StableParams& p, RngSeed seed);

double stable_loglik(std::span<const double> xs, const StableParams& p);

struct StableFit {
    double theta = 0.0;
    double sigma = 0.0;
    double loglik = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

// Maximizes the stable log-likelihood over (theta, sigma) at fixed alpha with
// Nelder-Mead from (0.001, 0.001); sigma is optimized on a log scale with a
// 1e-8 floor. Non-convergence is reported through the flag, best-so-far kept.
StableFit fit_stable_mle(const ReturnSeries& returns, double alpha = 1.5);
StableFit fit_stable_mle(std::span<const double> returns, double alpha = 1.5);

} // namespace stochlab
