#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace stochlab {

// A function to minimize. eval must be total on the box and may return +inf
// for infeasible points.
struct Objective {
    std::size_t arity = 0;
    std::function<double(const std::vector<double>&)> eval;
    std::optional<std::vector<std::array<double, 2>>> bounds; // [lo, hi] per coordinate
};

struct OptimOptions {
    double ftol = 1e-8;
    double xtol = 1e-8;
    std::size_t max_iter = 2000;
};

struct OptimizerResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> trace; // best objective after each iteration, non-increasing
};

// Nelder-Mead with reflect 1, expand 2, contract 1/2, shrink 1/2. The initial
// simplex perturbs each coordinate by 5% (0.00025 absolute for zeros). Stops
// once the f-spread is below ftol and the simplex diameter below xtol, or at
// max_iter.
OptimizerResult simplex_minimize(const Objective& obj, std::vector<double> x0,
                                 const OptimOptions& opts = {});

// Projected gradient descent on a box: central finite-difference gradients
// with step 1e-6 * max(1, |x_i|) (probes clipped to the box) and an Armijo
// backtracking line search. Bounds are required and x0 must lie inside them.
OptimizerResult bounded_descent(const Objective& obj, std::vector<double> x0,
                                const OptimOptions& opts = {});

} // namespace stochlab
