#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "stochlab/cli.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"stochlab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return stochlab::cli::run(static_cast<int>(argv.size()), argv.data());
}

} // namespace

TEST_CASE("no arguments prints usage and exits 1") {
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({"backtest", "--nope"}) == 1);
    CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("equilibrium subcommand writes the stability report") {
    const auto dir = testutil::scratch_dir("cli_eq");
    CHECK(run_cli({"--out-dir", dir.string(), "equilibrium", "--k", "0.1,0.2,0.01,0.05"}) == 0);

    const auto parsed =
        nlohmann::json::parse(testutil::read_file((dir / "equilibrium.json").string()));
    REQUIRE(parsed["equilibria"].size() == 2);
    CHECK(parsed["equilibria"][0]["S"] == 0.0);
    CHECK(parsed["equilibria"][0]["V"] == 0.0);
    CHECK(parsed["equilibria"][0]["classification"] == "stable node");
    CHECK(parsed["equilibria"][1]["S"].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(parsed["equilibria"][1]["V"].get<double>() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(parsed["equilibria"][1]["classification"] == "saddle");

    CHECK(run_cli({"equilibrium", "--k", "1,2,3"}) == 2);      // wrong arity
    CHECK(run_cli({"equilibrium", "--k", "a,b,c,d"}) == 2);    // unparseable
    CHECK(run_cli({"equilibrium", "--k", "-1,2,3,4"}) == 2);   // negative rate
}

TEST_CASE("ingest validates and normalizes a CSV") {
    const auto dir = testutil::scratch_dir("cli_ingest");
    CHECK(run_cli({"--out-dir", dir.string(), "ingest", "--csv",
                   testutil::fixture("prices_small.csv"), "--ticker", "DEMO"}) == 0);
    CHECK(fs::exists(dir / "DEMO.csv"));
    const auto meta = nlohmann::json::parse(testutil::read_file((dir / "DEMO_meta.json").string()));
    CHECK(meta["rows"] == 5);
    CHECK(meta["dropped_rows"] == 0);
    CHECK(meta["start"] == "2023-01-02");

    CHECK(run_cli({"--out-dir", dir.string(), "ingest", "--csv", "no_such_file.csv"}) == 2);
}

TEST_CASE("simulate gbm from a params file") {
    const auto dir = testutil::scratch_dir("cli_sim");
    const auto params = testutil::write_file(dir / "gbm.json",
                                             R"({"mu": 0.05, "sigma": 0.2, "s0": 100,
                                                 "t1": 1.0, "steps": 16})");
    CHECK(run_cli({"--out-dir", dir.string(), "--seed", "7", "simulate", "--model", "gbm",
                   "--params", params}) == 0);
    const auto csv = testutil::read_file((dir / "simulate_gbm.csv").string());
    CHECK(csv.rfind("t,S\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 18); // header + 17 points

    // Same seed reproduces, different seed changes the draw.
    CHECK(run_cli({"--out-dir", dir.string(), "--seed", "7", "simulate", "--model", "gbm",
                   "--params", params, "--out", "again.csv"}) == 0);
    CHECK(testutil::read_file((dir / "again.csv").string()) == csv);
    CHECK(run_cli({"--out-dir", dir.string(), "--seed", "8", "simulate", "--model", "gbm",
                   "--params", params, "--out", "other.csv"}) == 0);
    CHECK(testutil::read_file((dir / "other.csv").string()) != csv);

    CHECK(run_cli({"--out-dir", dir.string(), "simulate", "--model", "gbm", "--params",
                   testutil::write_file(dir / "bad.json", R"({"mu": 0.05})")}) == 2);
    CHECK(run_cli({"--out-dir", dir.string(), "simulate", "--model", "warp", "--params",
                   params}) == 2);
}

TEST_CASE("simulate reaction propagates numerical blow-up as exit 3") {
    const auto dir = testutil::scratch_dir("cli_sim_blowup");
    const auto params = testutil::write_file(dir / "reaction.json",
                                             R"({"k1": 9, "k2": 9, "k3": 0, "k4": 0,
                                                 "s0": 50, "v0": 50, "t1": 100,
                                                 "steps": 100})");
    CHECK(run_cli({"--out-dir", dir.string(), "simulate", "--model", "reaction", "--params",
                   params}) == 3);
}

TEST_CASE("calibrate stable on the bundled fixture recovers the generator values") {
    const auto dir = testutil::scratch_dir("cli_cal");
    CHECK(run_cli({"--out-dir", dir.string(), "calibrate", "--model", "stable", "--csv",
                   testutil::fixture("aapl_like.csv"), "--ticker", "SYN"}) == 0);
    const auto parsed =
        nlohmann::json::parse(testutil::read_file((dir / "SYN_stable_calibration.json").string()));
    CHECK(parsed["model"] == "stable");
    CHECK(parsed["converged"] == true);
    const double theta = parsed["params"]["theta"].get<double>();
    const double sigma = parsed["params"]["sigma"].get<double>();
    CHECK(std::abs(theta - 0.001179) < 0.25 * 0.001179);
    CHECK(std::abs(sigma - 0.009527) < 0.10 * 0.009527);
}

TEST_CASE("backtest subcommand writes report and plots") {
    const auto dir = testutil::scratch_dir("cli_bt");
    CHECK(run_cli({"--out-dir", dir.string(), "--seed", "42", "backtest", "--model", "stable",
                   "--csv", testutil::fixture("aapl_like.csv"), "--ticker", "SYN", "--train",
                   "2012-01-03..2017-12-31", "--test", "2018-01-01..2018-11-06", "--plot",
                   "both"}) == 0);
    CHECK(fs::exists(dir / "SYN_stable_report.json"));
    CHECK(fs::exists(dir / "SYN_stable_plot.csv"));
    CHECK(fs::exists(dir / "SYN_stable_plot.svg"));

    const auto report =
        nlohmann::json::parse(testutil::read_file((dir / "SYN_stable_report.json").string()));
    CHECK(report["seed"] == 42);
    CHECK(report["track"] == "log_return");

    // Ensemble flag adds the band file and report section.
    CHECK(run_cli({"--out-dir", dir.string(), "--seed", "42", "backtest", "--model", "stable",
                   "--csv", testutil::fixture("aapl_like.csv"), "--ticker", "SYN", "--train",
                   "2012-01-03..2017-12-31", "--test", "2018-01-01..2018-11-06", "--ensemble",
                   "8"}) == 0);
    CHECK(fs::exists(dir / "SYN_stable_ensemble.csv"));
    const auto banded =
        nlohmann::json::parse(testutil::read_file((dir / "SYN_stable_report.json").string()));
    CHECK(banded["ensemble"]["paths"] == 8);

    // Usage and data errors.
    CHECK(run_cli({"--out-dir", dir.string(), "backtest", "--model", "stable", "--csv",
                   testutil::fixture("aapl_like.csv"), "--train", "2012-01-03..2017-12-31"}) ==
          1); // missing --test
    CHECK(run_cli({"--out-dir", dir.string(), "backtest", "--model", "stable", "--csv",
                   testutil::fixture("aapl_like.csv"), "--train", "2012-01-03..2017-12-31",
                   "--test", "2031-01-01..2031-12-31"}) == 2);
}

TEST_CASE("report subcommand renders stored results") {
    const auto dir = testutil::scratch_dir("cli_report");
    CHECK(run_cli({"--out-dir", dir.string(), "--seed", "42", "backtest", "--model", "stable",
                   "--csv", testutil::fixture("aapl_like.csv"), "--ticker", "SYN", "--train",
                   "2012-01-03..2017-12-31", "--test", "2018-01-01..2018-11-06"}) == 0);
    CHECK(run_cli({"--out-dir", dir.string(), "report"}) == 0);
}

TEST_CASE("config file supplies defaults, flags override") {
    const auto dir = testutil::scratch_dir("cli_config");
    const auto config = testutil::write_file(dir / "lab.conf",
                                             "out-dir=" + (dir / "from_config").string() + "\n" +
                                                 "seed=9\n");
    CHECK(run_cli({"--config", config, "equilibrium", "--k", "1,1,1,1"}) == 0);
    CHECK(fs::exists(dir / "from_config" / "equilibrium.json"));

    CHECK(run_cli({"--config", config, "--out-dir", (dir / "flag_wins").string(), "equilibrium",
                   "--k", "1,1,1,1"}) == 0);
    CHECK(fs::exists(dir / "flag_wins" / "equilibrium.json"));
}

TEST_CASE("fetch downloads a CSV from a local server") {
    const auto dir = testutil::scratch_dir("cli_fetch");
    httplib::Server server;
    server.Get("/prices.csv", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("date,adj_close\n2023-01-02,100\n2023-01-03,101\n", "text/csv");
    });
    server.Get("/broken.csv", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("not,a,price\nfile,at,all\n", "text/csv");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    const std::string base = "http://127.0.0.1:" + std::to_string(port);
    CHECK(run_cli({"--out-dir", dir.string(), "fetch", "--url", base + "/prices.csv", "--out",
                   "got.csv"}) == 0);
    CHECK(testutil::read_file((dir / "got.csv").string()) ==
          "date,adj_close\n2023-01-02,100\n2023-01-03,101\n");

    CHECK(run_cli({"--out-dir", dir.string(), "fetch", "--url", base + "/missing.csv", "--out",
                   "x.csv"}) == 2);
    CHECK(run_cli({"--out-dir", dir.string(), "fetch", "--url", base + "/broken.csv", "--out",
                   "y.csv"}) == 2);
    CHECK(run_cli({"--out-dir", dir.string(), "fetch", "--url", "not-a-url", "--out",
                   "z.csv"}) == 2);

    server.stop();
    server_thread.join();
}
