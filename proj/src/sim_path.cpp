#include "stochlab/sim_path.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "stochlab/errors.hpp"

namespace stochlab {

TimeGrid::TimeGrid(std::vector<double> points) : t_(std::move(points)) {
    if (t_.size() < 2) throw InvalidInput("time grid: need at least 2 points");
    for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
        if (!(t_[i] < t_[i + 1])) {
            throw InvalidInput("time grid: points must be strictly increasing");
        }
        if (!std::isfinite(t_[i])) throw InvalidInput("time grid: points must be finite");
    }
    // Flag exact uniform spacing (as produced by uniform()); data-driven grids
    // with float jitter are treated as non-uniform, which is always safe.
    uniform_ = true;
    const double dt0 = t_[1] - t_[0];
    for (std::size_t i = 1; i + 1 < t_.size(); ++i) {
        if (std::abs((t_[i + 1] - t_[i]) - dt0) > 1e-12 * std::max(1.0, std::abs(dt0))) {
            uniform_ = false;
            break;
        }
    }
}

TimeGrid TimeGrid::uniform(double t0, double t1, std::size_t steps) {
    if (steps < 1) throw InvalidInput("time grid: need at least 1 step");
    if (!(t1 > t0)) throw InvalidInput("time grid: t1 must exceed t0");
    std::vector<double> t(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        t[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(steps);
    }
    t.back() = t1;
    return TimeGrid(std::move(t));
}

std::vector<double> SimPath::component(std::size_t dim) const {
    std::vector<double> out(states.size());
    for (std::size_t k = 0; k < states.size(); ++k) out[k] = states[k][dim];
    return out;
}

SimPath make_sim_path(TimeGrid grid, std::vector<std::vector<double>> states,
                      std::vector<std::string> labels) {
    if (states.size() != grid.size()) {
        throw InvalidInput("sim path: one state vector per grid point required");
    }
    for (const auto& s : states) {
        if (s.size() != labels.size()) {
            throw InvalidInput("sim path: state dimension must match label count");
        }
        for (double x : s) {
            if (!std::isfinite(x)) throw NumericError("sim path: non-finite state entry");
        }
    }
    return SimPath{std::move(grid), std::move(states), std::move(labels)};
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string sim_path_to_csv(const SimPath& path) {
    std::string out = "t";
    for (const auto& label : path.labels) {
        out += ',';
        out += label;
    }
    out += '\n';
    for (std::size_t k = 0; k < path.grid.size(); ++k) {
        out += format_double(path.grid[k]);
        for (std::size_t d = 0; d < path.dims(); ++d) {
            out += ',';
            out += format_double(path.states[k][d]);
        }
        out += '\n';
    }
    return out;
}

void write_sim_path_csv(const SimPath& path, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw InvalidInput("cannot write file: " + file);
    out << sim_path_to_csv(path);
}

} // namespace stochlab
