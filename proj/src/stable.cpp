#include "stochlab/stable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "quadrature.hpp"
#include "stochlab/errors.hpp"
#include "stochlab/optimize.hpp"

namespace stochlab {

namespace {

constexpr double kPi = std::numbers::pi;
// exp(-u^alpha) < 1e-16 beyond u_max = (16 ln 10)^(1/alpha).
constexpr double kLogCut = 36.84136148790473;

void check_params(const StableParams& p) {
    if (p.beta != 0.0) throw InvalidInput("stable: beta != 0 is unsupported");
    if (!(p.alpha > 0.0) || p.alpha > 2.0) {
        throw InvalidInput("stable: alpha must lie in (0, 2]");
    }
    if (!(p.scale > 0.0)) throw InvalidInput("stable: scale must be > 0");
}

struct SeriesEstimate {
    double value = 0.0;
    double bound = std::numeric_limits<double>::infinity();
};

// Asymptotic power-tail expansion of the standardized density,
// f(z) ~ (1/pi) sum_k (-1)^(k+1) Gamma(alpha k + 1)/k! sin(k pi alpha/2)
// z^-(alpha k + 1). Truncated at the smallest term; the bound is the first
// omitted magnitude. Convergent for alpha < 1, asymptotic above.
SeriesEstimate tail_series(double z, double alpha) {
    const double log_z = std::log(z);
    double sum = 0.0;
    double prev_mag = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 200; ++k) {
        const double mag = std::exp(std::lgamma(alpha * k + 1.0) - std::lgamma(k + 1.0) -
                                    (alpha * k + 1.0) * log_z);
        if (mag > prev_mag) {
            return {sum / kPi, prev_mag / kPi}; // series started diverging
        }
        const double term = (k % 2 == 1 ? 1.0 : -1.0) * std::sin(0.5 * k * kPi * alpha) * mag;
        sum += term;
        if (mag < 1e-17) return {sum / kPi, mag / kPi};
        prev_mag = mag;
    }
    return {sum / kPi, prev_mag / kPi};
}

// Integrates exp(-u^alpha) cos(u z) over [0, u_max]. Panels are aligned with
// the half-periods of the cosine and additionally capped in width so the
// envelope is always easy for a single Kronrod rule.
double inversion_integral(double z, double alpha) {
    const double u_max = std::pow(kLogCut, 1.0 / alpha);
    const auto integrand = [=](double u) { return std::exp(-std::pow(u, alpha)) * std::cos(u * z); };

    const double half_period = z > 0.0 ? kPi / z : std::numeric_limits<double>::infinity();
    if (u_max / half_period > 5e5) {
        throw NumericError("stable: inversion integral too oscillatory (alpha too small "
                           "for this argument)");
    }
    const double width = std::min(half_period, 1.25);

    double total = 0.0;
    double lo = 0.0;
    double edge = std::min(0.5 * half_period, width); // first zero of cos(uz)
    while (lo < u_max) {
        const double hi = std::min(edge, u_max);
        total += detail::integrate_adaptive(integrand, lo, hi, 1e-10);
        // Beyond the envelope cutoff the remainder is below the target.
        if (std::exp(-std::pow(hi, alpha)) * std::max(1.0, std::pow(hi, 1.0 - alpha)) / alpha <
            1e-13) {
            break;
        }
        lo = hi;
        edge += width;
    }
    return total;
}

// Standardized density at z >= 0 (loc 0, scale 1).
double pdf_standardized(double z, double alpha) {
    z = std::abs(z);

    // alpha == 2 is the Gaussian boundary; its far tail underflows the
    // oscillatory integral, so switch to the closed limit there.
    if (alpha >= 2.0 - 1e-12 && z > 12.0) {
        return std::exp(-0.25 * z * z) / (2.0 * std::sqrt(kPi));
    }
    if (z >= 8.0 && alpha < 2.0 - 1e-9) {
        const auto est = tail_series(z, alpha);
        if (est.bound < 1e-12) return std::max(est.value, 0.0);
    }

    const double f = inversion_integral(z, alpha) / kPi;
    if (f > 0.0) return f;

    // Cancellation floor: fall back to the tail expansion (or the Gaussian
    // limit) rather than returning a non-positive density.
    if (alpha < 2.0 - 1e-9) {
        const auto est = tail_series(z, alpha);
        return std::max(est.value, std::numeric_limits<double>::min());
    }
    return std::numeric_limits<double>::min();
}

// Catmull-Rom table of the standardized log-density over |z|, built once per
// fit so the optimizer's inner loop stays off the quadrature (interpolation
// error ~1e-9, far below the optimizer tolerances); the reported likelihood
// is still evaluated exactly.
class LogPdfTable {
public:
    explicit LogPdfTable(double alpha) : alpha_(alpha) {
        fill(fine_, 0.0, kFineH, kFineMax + 3.0 * kFineH);
        fill(coarse_, kCoarseLo, kCoarseH, kCoarseMax + 3.0 * kCoarseH);
    }

    double operator()(double z) const {
        z = std::abs(z);
        if (z <= kFineMax) return eval(fine_, 0.0, kFineH, z, true);
        if (z <= kCoarseMax) return eval(coarse_, kCoarseLo, kCoarseH, z, false);
        const auto est = tail_series(z, alpha_);
        return std::log(std::max(est.value, std::numeric_limits<double>::min()));
    }

private:
    static constexpr double kFineH = 0.01;
    static constexpr double kFineMax = 16.0;
    static constexpr double kCoarseLo = 15.0;
    static constexpr double kCoarseH = 0.05;
    static constexpr double kCoarseMax = 64.0;

    void fill(std::vector<double>& table, double lo, double h, double hi) {
        table.reserve(static_cast<std::size_t>((hi - lo) / h) + 1);
        for (double z = lo; z <= hi; z += h) {
            table.push_back(std::log(pdf_standardized(z, alpha_)));
        }
    }

    static double eval(const std::vector<double>& table, double lo, double h, double z,
                       bool mirrored) {
        const double pos = (z - lo) / h;
        auto i = static_cast<std::size_t>(pos);
        if (i + 2 >= table.size()) i = table.size() - 3;
        const double t = pos - static_cast<double>(i);
        // The density is even, so the fine table mirrors across z = 0.
        const double p0 = i == 0 ? (mirrored ? table[1] : 2.0 * table[0] - table[1])
                                 : table[i - 1];
        const double p1 = table[i];
        const double p2 = table[i + 1];
        const double p3 = table[i + 2];
        const double a = p2 - p0;
        const double b = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
        const double c = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
        return 0.5 * (2.0 * p1 + t * (a + t * (b + t * c)));
    }

    double alpha_;
    std::vector<double> fine_;
    std::vector<double> coarse_;
};

} // namespace

double stable_pdf(double x, const StableParams& p) {
    check_params(p);
    const double z = (x - p.loc) / p.scale;
    return pdf_standardized(z, p.alpha) / p.scale;
}

double stable_logpdf(double x, const StableParams& p) {
    check_params(p);
    const double z = (x - p.loc) / p.scale;
    return std::log(pdf_standardized(z, p.alpha)) - std::log(p.scale);
}

std::vector<double> stable_sample(std::size_t n, const StableParams& p, RngSeed seed) {
    check_params(p);
    Rng rng(seed);
    std::vector<double> out(n);
    const double alpha = p.alpha;
    const double inv_alpha = 1.0 / alpha;
    for (double& x : out) {
        const double u = kPi * (rng.uniform() - 0.5); // uniform on (-pi/2, pi/2)
        const double e = rng.exponential();
        const double s = std::sin(alpha * u) / std::pow(std::cos(u), inv_alpha);
        const double t = std::pow(std::cos(u - alpha * u) / e, (1.0 - alpha) * inv_alpha);
        x = p.loc + p.scale * s * t;
    }
    return out;
}

double stable_loglik(std::span<const double> xs, const StableParams& p) {
    check_params(p);
    double total = 0.0;
    for (double x : xs) total += stable_logpdf(x, p);
    return total;
}

StableFit fit_stable_mle(std::span<const double> returns, double alpha) {
    if (returns.size() < 30) {
        throw InvalidInput("stable fit: need at least 30 returns, got " +
                           std::to_string(returns.size()));
    }
    for (double r : returns) {
        if (!std::isfinite(r)) throw InvalidInput("stable fit: returns must be finite");
    }
    check_params(StableParams{alpha, 0.0, 0.0, 1.0});

    const auto sigma_of = [](double log_sigma) { return std::max(std::exp(log_sigma), 1e-8); };
    const LogPdfTable table(alpha);
    const double n = static_cast<double>(returns.size());

    Objective obj;
    obj.arity = 2;
    obj.eval = [&](const std::vector<double>& x) {
        const double theta = x[0];
        const double sigma = sigma_of(x[1]);
        double ll = -n * std::log(sigma);
        for (double r : returns) ll += table((r - theta) / sigma);
        return -ll;
    };

    const std::vector<double> x0 = {0.001, std::log(0.001)};
    const auto res = simplex_minimize(obj, x0);

    StableFit fit;
    fit.theta = res.x[0];
    fit.sigma = sigma_of(res.x[1]);
    fit.loglik = stable_loglik(returns, StableParams{alpha, 0.0, fit.theta, fit.sigma});
    fit.converged = res.converged;
    fit.iterations = res.iterations;
    return fit;
}

StableFit fit_stable_mle(const ReturnSeries& returns, double alpha) {
    return fit_stable_mle(std::span<const double>(returns.values), alpha);
}

} // namespace stochlab
