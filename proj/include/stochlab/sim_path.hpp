#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace stochlab {

// Strictly increasing time points. Units are whatever the caller declares
// (years, trading days); only the spacings are consumed downstream.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> points);

    // steps intervals from t0 to t1, i.e. steps + 1 grid points.
    static TimeGrid uniform(double t0, double t1, std::size_t steps);

    const std::vector<double>& points() const { return t_; }
    double operator[](std::size_t i) const { return t_[i]; }
    double front() const { return t_.front(); }
    double back() const { return t_.back(); }
    std::size_t size() const { return t_.size(); }
    std::size_t steps() const { return t_.size() - 1; }
    double dt(std::size_t i) const { return t_[i + 1] - t_[i]; }
    bool uniform_spacing() const { return uniform_; }

private:
    std::vector<double> t_;
    bool uniform_ = false;
};

// A simulated trajectory: one state vector per grid point, labelled per
// dimension. Serializes to CSV with a leading t column.
struct SimPath {
    TimeGrid grid;
    std::vector<std::vector<double>> states; // states[k][dim]
    std::vector<std::string> labels;         // one per dimension

    std::size_t dims() const { return labels.size(); }
    std::vector<double> component(std::size_t dim) const;
    double terminal(std::size_t dim) const { return states.back()[dim]; }
};

SimPath make_sim_path(TimeGrid grid, std::vector<std::vector<double>> states,
                      std::vector<std::string> labels);

std::string sim_path_to_csv(const SimPath& path);
void write_sim_path_csv(const SimPath& path, const std::string& file);

// Full-precision decimal rendering that round-trips through strtod.
std::string format_double(double x);

} // namespace stochlab
