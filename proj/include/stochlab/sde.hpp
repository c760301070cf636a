#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stochlab/rng.hpp"
#include "stochlab/sim_path.hpp"

namespace stochlab {

// Single-asset GBM. Cross-asset Wiener correlation exists in the multi-asset
// formulation but is out of scope here; every simulator drives one asset.
struct GbmParams {
    double mu = 0.0;    // drift rate, 1/time
    double sigma = 0.0; // volatility, 1/sqrt(time), >= 0
    double s0 = 1.0;    // initial price, > 0
};

struct HestonParams {
    double mu = 0.0;
    double kappa = 1.0; // mean-reversion rate, > 0
    double theta = 0.0; // long-run variance, >= 0
    double xi = 0.0;    // volatility of volatility, >= 0
    double rho = 0.0;   // correlation in [-1, 1]
    double s0 = 1.0;
    double v0 = 0.0;

    // 2*kappa*theta / xi^2; variance stays strictly positive when >= 1.
    double feller_ratio() const;
};

struct FbmParams {
    double hurst = 0.5; // in (0, 1)
    double scale = 1.0; // > 0, multiplies the path
};

struct VgParams {
    double theta = 0.0; // drift of the subordinated motion
    double sigma = 0.0; // volatility, >= 0
    double nu = 0.2;    // variance rate of the gamma clock, > 0
};

using DriftFn = std::function<std::vector<double>(const std::vector<double>&, double)>;
using DiffusionFn =
    std::function<std::vector<std::vector<double>>(const std::vector<double>&, double)>;

// Generic Euler scheme x[k+1] = x[k] + a(x,t) dt + b(x,t) dW with independent
// dW ~ N(0, dt I). The diffusion returns a d x m matrix; m is taken from its
// first evaluation. Throws NumericError with the step index if a state goes
// non-finite.
SimPath euler_maruyama(const DriftFn& drift, const DiffusionFn& diffusion,
                       std::vector<double> x0, const TimeGrid& grid, RngSeed seed,
                       std::vector<std::string> labels = {});

// Exact log-space scheme S[k+1] = S[k] * exp((mu - sigma^2/2) dt + sigma dW);
// every output value is strictly positive.
SimPath simulate_gbm(const GbmParams& p, const TimeGrid& grid, RngSeed seed);

// Full-truncation Euler: the positive part of v drives both drift and
// diffusion, the S increment is correlated with the v increment by rho, and
// the emitted v is never negative. S uses the log scheme.
SimPath simulate_heston(const HestonParams& p, const TimeGrid& grid, RngSeed seed);

// (t^2H + s^2H - |t-s|^2H) / 2
double fbm_covariance(double s, double t, double hurst);

// Exact Gaussian sample through a Cholesky factor of the dense covariance;
// grids longer than max_points are rejected. B(0) = 0.
SimPath sample_fbm(const FbmParams& p, const TimeGrid& grid, RngSeed seed,
                   std::size_t max_points = 2048);

// Factorizes the covariance once and then draws any number of exact paths;
// use this for ensembles instead of repeated sample_fbm calls.
class FbmSampler {
public:
    FbmSampler(const FbmParams& p, const TimeGrid& grid, std::size_t max_points = 2048);

    SimPath sample(RngSeed seed) const;

private:
    FbmParams params_;
    TimeGrid grid_;
    bool has_zero_ = false;
    std::size_t n_ = 0;
    std::vector<double> lower_; // row-major lower-triangular Cholesky factor
};

// Nondecreasing gamma process with E[dG] = dt and Var[dG] = nu dt; G(0) = 0.
SimPath gamma_subordinator(double nu, const TimeGrid& grid, RngSeed seed);

// X(t) = theta G(t) + sigma W(G(t)). Emits both X and its gamma clock G.
SimPath simulate_vg(const VgParams& p, const TimeGrid& grid, RngSeed seed);

} // namespace stochlab
