#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace stochlab {

// Seed plus stream id. The same (seed, stream) pair reproduces the same
// draws; ensemble simulations derive one stream per path so path order does
// not matter.
struct RngSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    RngSeed with_stream(std::uint64_t s) const { return {seed, s}; }
};

class Rng {
public:
    explicit Rng(RngSeed s);

    double normal() { return normal_(engine_); }   // N(0, 1)
    double uniform() { return uniform_(engine_); } // [0, 1)
    double exponential() { return exp_(engine_); } // rate 1
    double gamma(double shape, double scale);

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::exponential_distribution<double> exp_{1.0};
};

// n independent Normal(0, dt) draws.
std::vector<double> wiener_increments(std::size_t n, double dt, RngSeed seed);

} // namespace stochlab
