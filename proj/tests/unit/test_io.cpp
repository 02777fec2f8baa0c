#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "hjbsync/csv.hpp"
#include "hjbsync/errors.hpp"
#include "hjbsync/io.hpp"

using namespace hjbsync;
using io::json;
namespace fs = std::filesystem;

TEST_CASE("doubles survive the text round trip") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> d(-1e6, 1e6);
    for (int n = 0; n < 1000; ++n) {
        const double v = d(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
        CHECK(std::stod(csv::format_double(v)) == v);
    }
    CHECK(csv::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("csv quoting") {
    CHECK(csv::quote("plain") == "plain");
    CHECK(csv::quote("a,b") == "\"a,b\"");
    CHECK(csv::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
    const std::vector<std::string> row{"x", "a,b", "q\"q", ""};
    std::string line = csv::join_row(row);
    CHECK(line.back() == '\n');
    line.pop_back();
    CHECK(csv::split_row(line) == row);
}

TEST_CASE("csv files") {
    const auto dir = fs::temp_directory_path() / "hjbsync_io_tests";
    fs::create_directories(dir);
    const auto p = dir / "t.csv";
    csv::write_file(p, "a,b\n1,2\n3,\"x,y\"\n");
    const auto t = csv::read_file(p);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][1] == "x,y");
    CHECK_THROWS_AS(csv::read_file(dir / "missing.csv"), IoError);
    CHECK_THROWS_AS(csv::write_file(dir / "no" / "such" / "dir.csv", "x"), IoError);
}

TEST_CASE("strict schema") {
    CHECK_NOTHROW(io::parse_single(json::object()));
    CHECK_THROWS_AS(io::parse_single(json{{"netwrok", json::object()}}), ConfigError);
    CHECK_THROWS_AS(io::parse_single(json{{"network", {{"N", 5}}}}), ConfigError);
    CHECK_THROWS_AS(io::parse_single(json{{"network", {{"n", "50"}}}}), ConfigError);
    CHECK_THROWS_AS(io::parse_single(json{{"network", {{"n", -3}}}}), ConfigError);
    CHECK_THROWS_AS(io::parse_single(json{{"network", {{"n", 1}}}}), ConfigError);
    CHECK_THROWS_AS(io::parse_single(json{{"run", {{"h", 0}}}}), ConfigError);
    CHECK_THROWS_AS(io::parse_single(json{{"command", "sweep"}}), ConfigError);
    CHECK_THROWS_AS(io::parse_multilayer(json{{"multilayer", {{"eps", {0.6, -0.1, 0.6}}}}}), ConfigError);
    CHECK_THROWS_AS(io::parse_multilayer(json{{"multilayer", {{"layers", json::array()}}}}), ConfigError);
    CHECK_THROWS_AS(io::parse_sweep(json{{"sweep", {{"seeds", 0}}}}), ConfigError);
    CHECK_THROWS_AS(io::parse_circuit(json{{"components", {{"R99", 1.0}}}}), ConfigError);
    CHECK_THROWS_AS(io::parse_circuit(json{{"components", {{"R6", "27.8q"}}}}), ConfigError);

    const auto d = io::parse_single(
        json{{"network", {{"weights", {{"lambda", {1.0, 2.0, 3.0}}, {"eta", 5.0}}}, {"ic_range", {-2.0, 2.0}}}}});
    CHECK(d.network.weights.lambda == Vec3{1.0, 2.0, 3.0});
    CHECK(d.network.weights.eta == Vec3{5.0, 5.0, 5.0});
    CHECK(d.network.ic_range[2].hi == 2.0);
}

TEST_CASE("documents round trip through json") {
    for (const auto& name : io::preset_names()) {
        CAPTURE(name);
        const json p = io::preset(name);
        const std::string cmd = p.at("command");
        if (cmd == "single") CHECK(io::to_json(io::parse_single(p)) == p);
        if (cmd == "multilayer") CHECK(io::to_json(io::parse_multilayer(p)) == p);
        if (cmd == "sweep") CHECK(io::to_json(io::parse_sweep(p)) == p);
        if (cmd == "circuit-check") CHECK(io::to_json(io::parse_circuit(p)) == p);
    }
    CHECK_THROWS_AS(io::preset("fig99"), ConfigError);
}

TEST_CASE("presets carry the figure settings") {
    CHECK_FALSE(io::parse_single(io::preset("fig2")).network.control_enabled);
    const auto f3 = io::parse_single(io::preset("fig3a"));
    CHECK(f3.network.control_enabled);
    CHECK(f3.network.n == 50);
    CHECK(f3.network.weights.theta()[0] == doctest::Approx(0.1));
    const auto f5 = io::parse_multilayer(io::preset("fig5"));
    CHECK(f5.multilayer.eps == std::array<double, 3>{0, 0, 0});
    const auto f7 = io::parse_multilayer(io::preset("fig7c"));
    CHECK(f7.multilayer.eps[1] == 0.125);
    CHECK(f7.multilayer.weights[0].lambda[0] == 1.9);
    CHECK(f7.multilayer.weights[1].lambda[0] == 0.95);
    CHECK(f7.multilayer.n == 50);
    CHECK(io::parse_multilayer(io::preset("fig9c")).multilayer.n == 3);
    CHECK(io::parse_sweep(io::preset("fig6-grid")).sweep.n == 50);
    CHECK(io::parse_sweep(io::preset("fig8-grid")).sweep.n == 3);
    CHECK(derive_gain(io::parse_circuit(io::preset("fig13b")).components).theta_eff == doctest::Approx(0.5));
    for (const char* name : {"fig2", "fig3a", "fig5", "fig7a", "fig7c", "fig7e", "fig7g", "fig6-grid", "fig8-grid",
                             "fig13a", "fig13b"}) {
        CHECK_NOTHROW(io::preset(name));
    }
}

TEST_CASE("component values") {
    CHECK(io::parse_si_value("27.8k") == doctest::Approx(27.8e3));
    CHECK(io::parse_si_value("10n") == doctest::Approx(10e-9));
    CHECK(io::parse_si_value("2.22e3") == doctest::Approx(2220.0));
    CHECK(io::parse_si_value("1M") == doctest::Approx(1e6));
    CHECK_THROWS_AS(io::parse_si_value("abc"), ConfigError);
    CHECK_THROWS_AS(io::parse_si_value("10kk"), ConfigError);
    CHECK_THROWS_AS(io::parse_si_value(""), ConfigError);
    CircuitComponents cc;
    io::set_component(cc, "R6", 30e3);
    CHECK(cc.r6 == 30e3);
    CHECK_THROWS_AS(io::set_component(cc, "R16", 1.0), ConfigError);
}

TEST_CASE("manifests load as their configuration") {
    const auto dir = fs::temp_directory_path() / "hjbsync_io_tests";
    fs::create_directories(dir);
    const json cfg = io::preset("fig3a");
    io::write_json(dir / "manifest.json", io::manifest("single", cfg, 1, {"error.csv"}, 0.5));
    CHECK(io::load_document(dir / "manifest.json") == cfg);
    io::write_text(dir / "bad.json", "{ not json");
    CHECK_THROWS_AS(io::load_document(dir / "bad.json"), ConfigError);
    CHECK_THROWS_AS(io::load_document(dir / "absent.json"), IoError);
}

TEST_CASE("output tables carry headers") {
    NetworkConfig cfg;
    cfg.n = 2;
    RunOptions opts;
    opts.t_end = 1.0;
    const auto r = run_single(cfg, opts);
    const std::string traj = io::single_trajectory_csv(r);
    CHECK(traj.rfind("t,n1_x1,n1_x2,n1_x3,n2_x1,n2_x2,n2_x3\n", 0) == 0);
    CHECK(io::error_series_csv(r.error).rfind("t,e\n", 0) == 0);
    const auto s = io::single_summary(r);
    CHECK(s.contains("time_to_sync"));
    CHECK(s.contains("cost_J"));
    CHECK(s.contains("L_max"));
    const std::vector<double> phases{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const std::string pc = io::phases_csv(phases, 2);
    CHECK(pc.rfind("layer,node,phase_deg\n1,1,1\n1,2,2\n2,1,3\n", 0) == 0);
}
