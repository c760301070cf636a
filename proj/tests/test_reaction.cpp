#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "stochlab/errors.hpp"
#include "stochlab/reaction.hpp"
#include "stochlab/rng.hpp"

using namespace stochlab;

namespace {

// Independent central-difference Jacobian of the drift field.
Matrix2 fd_jacobian(const MarketState& x, const RateConstants& k) {
    const auto step = [](double v) { return 1e-6 * std::max(1.0, std::abs(v)); };
    const double hs = step(x.S);
    const double hv = step(x.V);
    const MarketState sp = drift({x.S + hs, x.V}, k);
    const MarketState sm = drift({x.S - hs, x.V}, k);
    const MarketState vp = drift({x.S, x.V + hv}, k);
    const MarketState vm = drift({x.S, x.V - hv}, k);
    return {{{(sp.S - sm.S) / (2.0 * hs), (vp.S - vm.S) / (2.0 * hv)},
             {(sp.V - sm.V) / (2.0 * hs), (vp.V - vm.V) / (2.0 * hv)}}};
}

} // namespace

TEST_CASE("drift values") {
    const RateConstants k{2.0, 1.0, 1.0, 1.0};
    const MarketState d = drift({1.0, 1.0}, k);
    CHECK(d.S == 1.0); // 2*1*1 - 1*1
    CHECK(d.V == 0.0); // 1*1*1 - 1*1

    const MarketState origin = drift({0.0, 0.0}, k);
    CHECK(origin.S == 0.0);
    CHECK(origin.V == 0.0);

    // Interior equilibrium zeroes the drift for random constants.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const RateConstants kk{u(rng), u(rng), u(rng), u(rng)};
        const MarketState eq{kk.k4 / kk.k2, kk.k3 / kk.k1};
        const MarketState res = drift(eq, kk);
        CHECK(std::abs(res.S) < 1e-12);
        CHECK(std::abs(res.V) < 1e-12);
    }
}

TEST_CASE("linear drift variant from the literal propensity reading") {
    const RateConstants k{1.0, 1.0, 1.0, 1.0};
    const MarketState d = drift({2.0, 3.0}, k, ReactionVariant::Linear);
    CHECK(d.S == 1.0);  // k2 V - k3 S = 3 - 2
    CHECK(d.V == -1.0); // k1 S - k4 V = 2 - 3
}

TEST_CASE("propensities") {
    const RateConstants ones{1.0, 1.0, 1.0, 1.0};
    CHECK(propensities({2.0, 3.0}, ones) == std::array<double, 4>{2.0, 3.0, 2.0, 3.0});
    CHECK(propensities({0.0, 0.0}, ones) == std::array<double, 4>{0.0, 0.0, 0.0, 0.0});

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = propensities({u(rng), u(rng)}, {u(rng), u(rng), u(rng), u(rng)});
        for (double v : a) CHECK(v >= 0.0);
    }
}

TEST_CASE("deterministic simulation holds an equilibrium") {
    const RateConstants k{1.0, 1.0, 1.0, 1.0};
    const auto grid = TimeGrid::uniform(0.0, 10.0, 1000);
    const auto path = simulate_deterministic({1.0, 1.0}, k, grid);
    for (const auto& s : path.states) {
        CHECK(std::abs(s[0] - 1.0) < 1e-9);
        CHECK(std::abs(s[1] - 1.0) < 1e-9);
    }
}

TEST_CASE("deterministic simulation: no decay means nondecreasing species") {
    const RateConstants k{0.5, 0.5, 0.0, 0.0};
    const auto grid = TimeGrid::uniform(0.0, 2.0, 200);
    const auto path = simulate_deterministic({0.1, 0.1}, k, grid);
    for (std::size_t i = 0; i + 1 < path.states.size(); ++i) {
        CHECK(path.states[i + 1][0] >= path.states[i][0]);
        CHECK(path.states[i + 1][1] >= path.states[i][1]);
    }
}

TEST_CASE("rk4 self-consistency under step halving") {
    const RateConstants k{0.8, 0.6, 0.3, 0.4};
    const MarketState x0{0.7, 0.5};
    const auto coarse = simulate_deterministic(x0, k, TimeGrid::uniform(0.0, 1.0, 100));
    const auto fine = simulate_deterministic(x0, k, TimeGrid::uniform(0.0, 1.0, 200));
    CHECK(std::abs(coarse.terminal(0) - fine.terminal(0)) < 1e-6);
    CHECK(std::abs(coarse.terminal(1) - fine.terminal(1)) < 1e-6);
}

TEST_CASE("euler scheme matches a hand-rolled loop") {
    const RateConstants k{0.8, 0.6, 0.3, 0.4};
    const auto grid = TimeGrid::uniform(0.0, 1.0, 10);
    const auto path = simulate_deterministic({0.7, 0.5}, k, grid, OdeScheme::Euler);

    double s = 0.7, v = 0.5;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double dt = grid.dt(i);
        const double ds = k.k1 * s * v - k.k3 * s;
        const double dv = k.k2 * v * s - k.k4 * v;
        s += ds * dt;
        v += dv * dt;
        CHECK(path.states[i + 1][0] == s);
        CHECK(path.states[i + 1][1] == v);
    }
    // And it is not the RK4 answer.
    const auto rk4 = simulate_deterministic({0.7, 0.5}, k, grid, OdeScheme::Rk4);
    CHECK(rk4.terminal(0) != path.terminal(0));
}

TEST_CASE("blow-up reports the step index") {
    const RateConstants k{10.0, 10.0, 0.0, 0.0};
    const auto grid = TimeGrid::uniform(0.0, 100.0, 200);
    CHECK_THROWS_AS(simulate_deterministic({100.0, 100.0}, k, grid), NumericError);
}

TEST_CASE("stochastic simulation with zero noise equals plain Euler exactly") {
    const RateConstants k{0.8, 0.6, 0.3, 0.4};
    const auto grid = TimeGrid::uniform(0.0, 1.0, 50);
    const auto sto = simulate_stochastic({0.7, 0.5}, k, grid, 0.0, {9, 0});
    const auto det = simulate_deterministic({0.7, 0.5}, k, grid, OdeScheme::Euler);
    CHECK(sto.states == det.states);
}

TEST_CASE("stochastic states are clamped at zero") {
    const RateConstants k{0.2, 0.2, 0.8, 0.8};
    const auto grid = TimeGrid::uniform(0.0, 5.0, 500);
    for (std::uint64_t stream = 0; stream < 16; ++stream) {
        const auto path = simulate_stochastic({0.05, 0.05}, k, grid, 1.0, {21, stream});
        for (const auto& s : path.states) {
            CHECK(s[0] >= 0.0);
            CHECK(s[1] >= 0.0);
        }
    }
}

TEST_CASE("small-noise ensemble mean tracks the deterministic path") {
    const RateConstants k{0.6, 0.5, 0.2, 0.3};
    const MarketState x0{0.5, 0.4};
    const auto grid = TimeGrid::uniform(0.0, 1.0, 100);
    const auto det = simulate_deterministic(x0, k, grid, OdeScheme::Euler);

    const std::size_t paths = 4000;
    std::vector<double> terminal_s(paths);
    for (std::size_t i = 0; i < paths; ++i) {
        terminal_s[i] = simulate_stochastic(x0, k, grid, 0.02, {33, i}).terminal(0);
    }
    double m = 0.0;
    for (double v : terminal_s) m += v;
    m /= static_cast<double>(paths);
    double var = 0.0;
    for (double v : terminal_s) var += (v - m) * (v - m);
    var /= static_cast<double>(paths - 1);
    const double se = std::sqrt(var / static_cast<double>(paths));
    CHECK(std::abs(m - det.terminal(0)) < 3.0 * se + 1e-4);
}

TEST_CASE("equilibria: interior point and origin") {
    const auto eq = equilibria({1.0, 1.0, 1.0, 1.0});
    REQUIRE(eq.points.size() == 2);
    CHECK(eq.points[0].S == 0.0);
    CHECK(eq.points[0].V == 0.0);
    CHECK(eq.points[1].S == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eq.points[1].V == doctest::Approx(1.0).epsilon(1e-15));

    const auto table = equilibria({0.1, 0.2, 0.01, 0.05});
    REQUIRE(table.points.size() == 2);
    CHECK(table.points[1].S == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(table.points[1].V == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(table.note.empty());

    const auto degenerate = equilibria({0.0, 0.2, 0.01, 0.05});
    CHECK(degenerate.points.size() == 1);
    CHECK(!degenerate.note.empty());

    CHECK_THROWS_AS(equilibria({-0.1, 0.2, 0.01, 0.05}), InvalidInput);
}

TEST_CASE("jacobian closed forms and finite differences") {
    const RateConstants k{0.7, 0.4, 0.2, 0.9};
    const auto origin = jacobian({0.0, 0.0}, k);
    CHECK(origin[0][0] == -0.2);
    CHECK(origin[0][1] == 0.0);
    CHECK(origin[1][0] == 0.0);
    CHECK(origin[1][1] == -0.9);

    const MarketState interior{k.k4 / k.k2, k.k3 / k.k1};
    const auto j = jacobian(interior, k);
    CHECK(std::abs(j[0][0]) < 1e-15);
    CHECK(std::abs(j[1][1]) < 1e-15);
    CHECK(j[0][1] == doctest::Approx(k.k1 * k.k4 / k.k2).epsilon(1e-14));
    CHECK(j[1][0] == doctest::Approx(k.k2 * k.k3 / k.k1).epsilon(1e-14));

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.01, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const MarketState x{u(rng), u(rng)};
        const RateConstants kk{u(rng), u(rng), u(rng), u(rng)};
        const auto analytic = jacobian(x, kk);
        const auto numeric = fd_jacobian(x, kk);
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                CHECK(std::abs(analytic[r][c] - numeric[r][c]) < 1e-6);
            }
        }
    }
}

TEST_CASE("classification: stable node origin, saddle interior") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const RateConstants k{u(rng), u(rng), u(rng), u(rng)};
        const auto report = classify(k);
        REQUIRE(report.points.size() == 2);
        REQUIRE(report.jacobians.size() == 2);
        REQUIRE(report.eigenvalues.size() == 2);
        REQUIRE(report.classifications.size() == 2);

        CHECK(report.classifications[0] == StabilityClass::StableNode);
        const auto origin_eigs = report.eigenvalues[0];
        const double lo = std::min(-k.k3, -k.k4);
        const double hi = std::max(-k.k3, -k.k4);
        CHECK(origin_eigs[0].real() == doctest::Approx(lo).epsilon(1e-12));
        CHECK(origin_eigs[1].real() == doctest::Approx(hi).epsilon(1e-12));
        CHECK(origin_eigs[0].imag() == 0.0);

        CHECK(report.classifications[1] == StabilityClass::Saddle);
        const double root = std::sqrt(k.k3 * k.k4);
        CHECK(report.eigenvalues[1][0].real() == doctest::Approx(-root).epsilon(1e-8));
        CHECK(report.eigenvalues[1][1].real() == doctest::Approx(root).epsilon(1e-8));
    }
}

TEST_CASE("classification: zero-determinant interior is degenerate") {
    const auto report = classify({1.0, 1.0, 0.0, 1.0});
    REQUIRE(report.points.size() == 2);
    CHECK(report.classifications[1] == StabilityClass::Degenerate);
}

TEST_CASE("stability labels") {
    CHECK(std::string(to_string(StabilityClass::StableNode)) == "stable node");
    CHECK(std::string(to_string(StabilityClass::Saddle)) == "saddle");
    CHECK(std::string(to_string(StabilityClass::Center)) == "center");
}
