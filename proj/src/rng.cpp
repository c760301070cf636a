#include "stochlab/rng.hpp"

#include <cmath>

#include "stochlab/errors.hpp"

namespace stochlab {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_state(RngSeed s) {
    std::uint64_t x = s.seed;
    std::uint64_t m = splitmix64(x);
    x = m ^ s.stream;
    return splitmix64(x);
}

} // namespace

Rng::Rng(RngSeed s) : engine_(derive_state(s)) {}

double Rng::gamma(double shape, double scale) {
    std::gamma_distribution<double> dist(shape, scale);
    return dist(engine_);
}

std::vector<double> wiener_increments(std::size_t n, double dt, RngSeed seed) {
    if (n < 1) throw InvalidInput("wiener_increments: n must be >= 1");
    if (!(dt > 0.0)) throw InvalidInput("wiener_increments: dt must be > 0");
    Rng rng(seed);
    const double sqrt_dt = std::sqrt(dt);
    std::vector<double> out(n);
    for (double& x : out) x = sqrt_dt * rng.normal();
    return out;
}

} // namespace stochlab
