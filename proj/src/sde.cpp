#include "stochlab/sde.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "stochlab/errors.hpp"

namespace stochlab {

double HestonParams::feller_ratio() const {
    if (xi == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * kappa * theta / (xi * xi);
}

namespace {

void check_finite(const std::vector<double>& x, std::size_t step) {
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw NumericError("euler_maruyama: non-finite state at step " +
                               std::to_string(step));
        }
    }
}

std::vector<std::string> default_labels(std::size_t d) {
    std::vector<std::string> labels(d);
    for (std::size_t i = 0; i < d; ++i) labels[i] = "x" + std::to_string(i + 1);
    return labels;
}

} // namespace

SimPath euler_maruyama(const DriftFn& drift, const DiffusionFn& diffusion,
                       std::vector<double> x0, const TimeGrid& grid, RngSeed seed,
                       std::vector<std::string> labels) {
    const std::size_t d = x0.size();
    if (d == 0) throw InvalidInput("euler_maruyama: empty initial state");
    if (labels.empty()) labels = default_labels(d);
    if (labels.size() != d) throw InvalidInput("euler_maruyama: label count mismatch");

    Rng rng(seed);
    std::vector<std::vector<double>> states;
    states.reserve(grid.size());
    states.push_back(x0);
    check_finite(x0, 0);

    const std::size_t m = diffusion(x0, grid[0]).size() == 0
                              ? 0
                              : diffusion(x0, grid[0]).front().size();
    std::vector<double> dw(m);

    std::vector<double> x = std::move(x0);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double t = grid[k];
        const double dt = grid.dt(k);
        const double sqrt_dt = std::sqrt(dt);
        const auto a = drift(x, t);
        const auto b = diffusion(x, t);
        if (a.size() != d || b.size() != d) {
            throw InvalidInput("euler_maruyama: drift/diffusion dimension mismatch");
        }
        for (double& w : dw) w = sqrt_dt * rng.normal();
        for (std::size_t i = 0; i < d; ++i) {
            if (b[i].size() != m) {
                throw InvalidInput("euler_maruyama: ragged diffusion matrix");
            }
            double noise = 0.0;
            for (std::size_t j = 0; j < m; ++j) noise += b[i][j] * dw[j];
            x[i] += a[i] * dt + noise;
        }
        check_finite(x, k + 1);
        states.push_back(x);
    }
    return SimPath{grid, std::move(states), std::move(labels)};
}

SimPath simulate_gbm(const GbmParams& p, const TimeGrid& grid, RngSeed seed) {
    if (!(p.s0 > 0.0)) throw InvalidInput("gbm: s0 must be > 0");
    if (p.sigma < 0.0) throw InvalidInput("gbm: sigma must be >= 0");

    Rng rng(seed);
    std::vector<std::vector<double>> states;
    states.reserve(grid.size());
    states.push_back({p.s0});
    double log_s = std::log(p.s0);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double dt = grid.dt(k);
        log_s += (p.mu - 0.5 * p.sigma * p.sigma) * dt + p.sigma * std::sqrt(dt) * rng.normal();
        states.push_back({std::exp(log_s)});
    }
    return SimPath{grid, std::move(states), {"S"}};
}

SimPath simulate_heston(const HestonParams& p, const TimeGrid& grid, RngSeed seed) {
    if (!(p.s0 > 0.0)) throw InvalidInput("heston: s0 must be > 0");
    if (!(p.kappa > 0.0)) throw InvalidInput("heston: kappa must be > 0");
    if (p.theta < 0.0 || p.xi < 0.0 || p.v0 < 0.0) {
        throw InvalidInput("heston: theta, xi and v0 must be >= 0");
    }
    if (p.rho < -1.0 || p.rho > 1.0) throw InvalidInput("heston: rho must lie in [-1, 1]");

    Rng rng(seed);
    const double rho_bar = std::sqrt(1.0 - p.rho * p.rho);
    std::vector<std::vector<double>> states;
    states.reserve(grid.size());
    states.push_back({p.s0, p.v0});

    double log_s = std::log(p.s0);
    double v = p.v0; // may dip below zero between steps; only v+ is consumed
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double dt = grid.dt(k);
        const double sqrt_dt = std::sqrt(dt);
        const double v_plus = std::max(v, 0.0);
        const double z_s = rng.normal();
        const double z_perp = rng.normal();
        const double dw_s = sqrt_dt * z_s;
        const double dw_v = sqrt_dt * (p.rho * z_s + rho_bar * z_perp);

        log_s += (p.mu - 0.5 * v_plus) * dt + std::sqrt(v_plus) * dw_s;
        v += p.kappa * (p.theta - v_plus) * dt + p.xi * std::sqrt(v_plus) * dw_v;

        if (!std::isfinite(log_s) || !std::isfinite(v)) {
            throw NumericError("heston: non-finite state at step " + std::to_string(k + 1));
        }
        states.push_back({std::exp(log_s), std::max(v, 0.0)});
    }
    return SimPath{grid, std::move(states), {"S", "v"}};
}

double fbm_covariance(double s, double t, double hurst) {
    if (!(hurst > 0.0) || !(hurst < 1.0)) {
        throw InvalidInput("fbm: hurst index must lie in (0, 1)");
    }
    if (s < 0.0 || t < 0.0) throw InvalidInput("fbm: times must be >= 0");
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

FbmSampler::FbmSampler(const FbmParams& p, const TimeGrid& grid, std::size_t max_points)
    : params_(p), grid_(grid) {
    if (!(p.hurst > 0.0) || !(p.hurst < 1.0)) {
        throw InvalidInput("fbm: hurst index must lie in (0, 1)");
    }
    if (!(p.scale > 0.0)) throw InvalidInput("fbm: scale must be > 0");
    if (grid.size() > max_points) {
        throw InvalidInput("fbm: grid of " + std::to_string(grid.size()) +
                           " points exceeds the dense factorization cap of " +
                           std::to_string(max_points));
    }
    if (grid[0] < 0.0) throw InvalidInput("fbm: grid must start at t >= 0");

    // B(0) = 0 exactly; the covariance is built over the positive grid times.
    has_zero_ = grid[0] == 0.0;
    const std::size_t offset = has_zero_ ? 1 : 0;
    n_ = grid.size() - offset;

    Eigen::MatrixXd cov(n_, n_);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double c = fbm_covariance(grid[i + offset], grid[j + offset], p.hurst);
            cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
            cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
        const double smallest = eig.eigenvalues().minCoeff();
        throw NumericError("fbm: covariance numerically non-positive-definite "
                           "(smallest eigenvalue " +
                           format_double(smallest) + ")");
    }

    const Eigen::MatrixXd lower = llt.matrixL();
    lower_.resize(n_ * (n_ + 1) / 2);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            lower_[idx++] =
                lower(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
}

SimPath FbmSampler::sample(RngSeed seed) const {
    Rng rng(seed);
    std::vector<double> z(n_);
    for (double& v : z) v = rng.normal();

    std::vector<std::vector<double>> states;
    states.reserve(grid_.size());
    if (has_zero_) states.push_back({0.0});
    std::size_t row_start = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        double b = 0.0;
        for (std::size_t j = 0; j <= i; ++j) b += lower_[row_start + j] * z[j];
        states.push_back({params_.scale * b});
        row_start += i + 1;
    }
    return SimPath{grid_, std::move(states), {"B"}};
}

SimPath sample_fbm(const FbmParams& p, const TimeGrid& grid, RngSeed seed,
                   std::size_t max_points) {
    return FbmSampler(p, grid, max_points).sample(seed);
}

SimPath gamma_subordinator(double nu, const TimeGrid& grid, RngSeed seed) {
    if (!(nu > 0.0)) throw InvalidInput("gamma subordinator: nu must be > 0");
    Rng rng(seed);
    std::vector<std::vector<double>> states;
    states.reserve(grid.size());
    double g = 0.0;
    states.push_back({g});
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double dt = grid.dt(k);
        g += rng.gamma(dt / nu, nu);
        states.push_back({g});
    }
    return SimPath{grid, std::move(states), {"G"}};
}

SimPath simulate_vg(const VgParams& p, const TimeGrid& grid, RngSeed seed) {
    if (p.sigma < 0.0) throw InvalidInput("vg: sigma must be >= 0");
    if (!(p.nu > 0.0)) throw InvalidInput("vg: nu must be > 0");

    Rng rng(seed);
    std::vector<std::vector<double>> states;
    states.reserve(grid.size());
    double x = 0.0;
    double g = 0.0;
    states.push_back({x, g});
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double dt = grid.dt(k);
        const double dg = rng.gamma(dt / p.nu, p.nu);
        const double z = rng.normal();
        g += dg;
        x += p.theta * dg + p.sigma * std::sqrt(dg) * z;
        states.push_back({x, g});
    }
    return SimPath{grid, std::move(states), {"X", "G"}};
}

} // namespace stochlab
