#include "stochlab/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stochlab/errors.hpp"

namespace stochlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_start(const Objective& obj, const std::vector<double>& x0) {
    if (obj.arity == 0 || !obj.eval) throw InvalidInput("optimizer: objective not set up");
    if (x0.size() != obj.arity) throw InvalidInput("optimizer: x0 arity mismatch");
    for (double v : x0) {
        if (!std::isfinite(v)) throw InvalidInput("optimizer: x0 must be finite");
    }
    if (obj.bounds) {
        if (obj.bounds->size() != obj.arity) {
            throw InvalidInput("optimizer: bounds arity mismatch");
        }
        for (std::size_t i = 0; i < obj.arity; ++i) {
            const auto& b = (*obj.bounds)[i];
            if (x0[i] < b[0] || x0[i] > b[1]) {
                throw InvalidInput("optimizer: x0 outside bounds at coordinate " +
                                   std::to_string(i));
            }
        }
    }
}

bool in_box(const Objective& obj, const std::vector<double>& x) {
    if (!obj.bounds) return true;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < (*obj.bounds)[i][0] || x[i] > (*obj.bounds)[i][1]) return false;
    }
    return true;
}

double guarded_eval(const Objective& obj, const std::vector<double>& x) {
    if (!in_box(obj, x)) return kInf;
    const double f = obj.eval(x);
    return std::isnan(f) ? kInf : f;
}

} // namespace

OptimizerResult simplex_minimize(const Objective& obj, std::vector<double> x0,
                                 const OptimOptions& opts) {
    check_start(obj, x0);
    const std::size_t n = obj.arity;

    struct Vertex {
        std::vector<double> x;
        double f;
        std::size_t order; // insertion index, ties broken deterministically
    };
    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    std::size_t next_order = 0;
    auto push_vertex = [&](std::vector<double> x) {
        const double f = guarded_eval(obj, x);
        simplex.push_back({std::move(x), f, next_order++});
    };

    push_vertex(x0);
    for (std::size_t i = 0; i < n; ++i) {
        auto x = x0;
        x[i] = x[i] != 0.0 ? 1.05 * x[i] : 0.00025;
        push_vertex(std::move(x));
    }

    auto sort_simplex = [&] {
        std::sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) {
            if (a.f != b.f) return a.f < b.f;
            return a.order < b.order;
        });
    };
    sort_simplex();

    OptimizerResult result;
    result.trace.reserve(opts.max_iter);

    std::size_t iter = 0;
    bool converged = false;
    while (iter < opts.max_iter) {
        const double f_best = simplex.front().f;
        const double f_worst = simplex.back().f;
        const double spread =
            std::isfinite(f_worst) ? f_worst - f_best : std::numeric_limits<double>::max();
        double diameter = 0.0;
        for (std::size_t v = 1; v <= n; ++v) {
            for (std::size_t i = 0; i < n; ++i) {
                diameter = std::max(diameter,
                                    std::abs(simplex[v].x[i] - simplex.front().x[i]));
            }
        }
        // Both the value spread and the geometric size must collapse; either
        // alone can trigger far from the minimum on flat or symmetric spots.
        if (spread < opts.ftol && diameter < opts.xtol) {
            converged = true;
            break;
        }
        ++iter;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v].x[i];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double coeff) {
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = centroid[i] + coeff * (centroid[i] - simplex.back().x[i]);
            }
            return x;
        };
        auto replace_worst = [&](std::vector<double> x, double f) {
            simplex.back() = {std::move(x), f, next_order++};
        };

        auto reflected = blend(1.0);
        const double f_r = guarded_eval(obj, reflected);
        if (f_r < simplex.front().f) {
            auto expanded = blend(2.0);
            const double f_e = guarded_eval(obj, expanded);
            if (f_e < f_r) {
                replace_worst(std::move(expanded), f_e);
            } else {
                replace_worst(std::move(reflected), f_r);
            }
        } else if (f_r < simplex[n - 1].f) {
            replace_worst(std::move(reflected), f_r);
        } else {
            const bool outside = f_r < simplex.back().f;
            auto contracted = blend(outside ? 0.5 : -0.5);
            const double f_c = guarded_eval(obj, contracted);
            if (f_c < (outside ? f_r : simplex.back().f)) {
                replace_worst(std::move(contracted), f_c);
            } else {
                // Shrink everything toward the best vertex.
                for (std::size_t v = 1; v <= n; ++v) {
                    for (std::size_t i = 0; i < n; ++i) {
                        simplex[v].x[i] =
                            simplex.front().x[i] + 0.5 * (simplex[v].x[i] - simplex.front().x[i]);
                    }
                    simplex[v].f = guarded_eval(obj, simplex[v].x);
                    simplex[v].order = next_order++;
                }
            }
        }
        sort_simplex();
        result.trace.push_back(simplex.front().f);
    }

    result.x = simplex.front().x;
    result.f = simplex.front().f;
    result.iterations = iter;
    result.converged = converged;
    return result;
}

OptimizerResult bounded_descent(const Objective& obj, std::vector<double> x0,
                                const OptimOptions& opts) {
    if (!obj.bounds) throw InvalidInput("bounded_descent: bounds are required");
    check_start(obj, x0);
    const std::size_t n = obj.arity;
    const auto& bounds = *obj.bounds;

    auto project = [&](std::vector<double> x) {
        for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], bounds[i][0], bounds[i][1]);
        return x;
    };

    // Central differences with probes clipped to the box so the objective is
    // never queried outside its domain; the divisor is the actual probe span.
    // Probes that land in an infinite (infeasible) region fall back to the
    // finite side.
    auto gradient = [&](const std::vector<double>& x, double f_x) {
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
            auto lo = x;
            auto hi = x;
            hi[i] = std::min(x[i] + h, bounds[i][1]);
            lo[i] = std::max(x[i] - h, bounds[i][0]);
            const double span = hi[i] - lo[i];
            if (span <= 0.0) {
                g[i] = 0.0; // degenerate box face
                continue;
            }
            const double f_hi = guarded_eval(obj, hi);
            const double f_lo = guarded_eval(obj, lo);
            if (std::isfinite(f_hi) && std::isfinite(f_lo)) {
                g[i] = (f_hi - f_lo) / span;
            } else if (std::isfinite(f_hi)) {
                g[i] = hi[i] > x[i] ? (f_hi - f_x) / (hi[i] - x[i]) : 0.0;
            } else if (std::isfinite(f_lo)) {
                g[i] = x[i] > lo[i] ? (f_x - f_lo) / (x[i] - lo[i]) : 0.0;
            } else {
                g[i] = 0.0; // boxed in by infeasibility on both sides
            }
            if (!std::isfinite(g[i])) {
                throw NumericError("bounded_descent: non-finite gradient at coordinate " +
                                   std::to_string(i));
            }
        }
        return g;
    };

    OptimizerResult result;
    result.trace.reserve(opts.max_iter);

    std::vector<double> x = std::move(x0);
    double f = guarded_eval(obj, x);
    if (!std::isfinite(f)) throw NumericError("bounded_descent: objective not finite at x0");

    constexpr double armijo = 1e-4;
    bool converged = false;
    std::size_t iter = 0;
    while (iter < opts.max_iter) {
        ++iter;
        const auto g = gradient(x, f);

        bool accepted = false;
        std::vector<double> x_new;
        double f_new = f;
        double step = 1.0;
        while (step >= 1e-16) {
            std::vector<double> cand(n);
            for (std::size_t i = 0; i < n; ++i) cand[i] = x[i] - step * g[i];
            cand = project(std::move(cand));
            double directional = 0.0;
            for (std::size_t i = 0; i < n; ++i) directional += g[i] * (cand[i] - x[i]);
            const double f_cand = guarded_eval(obj, cand);
            if (f_cand <= f + armijo * directional && f_cand < f) {
                x_new = std::move(cand);
                f_new = f_cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No descent direction left at this resolution: stationary.
            result.trace.push_back(f);
            converged = true;
            break;
        }

        double dx = 0.0;
        for (std::size_t i = 0; i < n; ++i) dx = std::max(dx, std::abs(x_new[i] - x[i]));
        const double df = f - f_new;
        x = std::move(x_new);
        f = f_new;
        result.trace.push_back(f);
        if (dx < opts.xtol || df < opts.ftol * (1.0 + std::abs(f))) {
            converged = true;
            break;
        }
    }

    result.x = std::move(x);
    result.f = f;
    result.iterations = iter;
    result.converged = converged;
    return result;
}

} // namespace stochlab
