#include <doctest.h>

#include <cmath>
#include <set>

#include "hjbsync/errors.hpp"
#include "hjbsync/rk4.hpp"
#include "hjbsync/single_network.hpp"

using namespace hjbsync;

namespace {

std::vector<Vec3> integrate_one(Vec3 s, double h, double t_end, const RosslerParams& p) {
    std::vector<Vec3> y{s};
    Rk4Stepper st(1);
    const auto steps = static_cast<int>(std::llround(t_end / h));
    for (int k = 0; k < steps; ++k) {
        st.step(k * h, h, y, [&](double, const std::vector<Vec3>& in, std::vector<Vec3>& out) {
            out[0] = rossler_field(in[0], p);
        });
    }
    return y;
}

}  // namespace

TEST_CASE("init is reproducible and honours the range") {
    NetworkConfig cfg;
    cfg.seed = 99;
    const auto a = init_network(cfg);
    const auto b = init_network(cfg);
    CHECK(a.nodes == b.nodes);
    CHECK(a.t == 0.0);
    std::set<std::array<double, 3>> distinct;
    for (const auto& s : a.nodes) {
        distinct.insert(s.v);
        for (std::size_t k = 0; k < 3; ++k) CHECK((s[k] >= -1.0 && s[k] <= 1.0));
    }
    CHECK(distinct.size() == 50);

    cfg.ic_range = {Interval{0.5, 0.5}, Interval{-2.0, -2.0}, Interval{1.0, 1.0}};
    const auto c = init_network(cfg);
    for (const auto& s : c.nodes) CHECK(s == Vec3{0.5, -2.0, 1.0});
    CHECK(sync_error(c.nodes) == 0.0);

    cfg.ic_range[0] = Interval{1.0, -1.0};
    CHECK_THROWS_AS(init_network(cfg), ConfigError);
    NetworkConfig one;
    one.n = 1;
    CHECK_THROWS_AS(one.validate(), ConfigError);
}

TEST_CASE("sync error examples") {
    std::vector<OscState> same(5, {1, 2, 3});
    CHECK(sync_error(same) == 0.0);
    std::vector<OscState> two{{1, 0, 0}, {0, 0, 0}};
    CHECK(sync_error(two) == doctest::Approx(1.0));

    NetworkConfig cfg;
    cfg.n = 8;
    auto s = init_network(cfg).nodes;
    // brute-force ordered-pair sum
    double brute = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (i != j) brute += (s[i] - s[j]).norm();
        }
    }
    CHECK(sync_error(s) == doctest::Approx(brute / 8.0).epsilon(1e-13));
    const double e = sync_error(s);
    for (auto& x : s) x *= -2.5;
    CHECK(sync_error(s) == doctest::Approx(2.5 * e).epsilon(1e-13));
}

TEST_CASE("network derivative") {
    NetworkConfig cfg;
    cfg.n = 4;
    NetworkState ns{0.0, std::vector<OscState>(4, {0.2, -0.4, 1.1})};
    const auto d = network_derivative(ns, cfg);
    for (const auto& x : d) CHECK(x == rossler_field({0.2, -0.4, 1.1}, cfg.params));

    cfg.control_enabled = false;
    ns = init_network(cfg);
    const auto free = network_derivative(ns, cfg);
    for (std::size_t i = 0; i < ns.nodes.size(); ++i) CHECK(free[i] == rossler_field(ns.nodes[i], cfg.params));
}

TEST_CASE("two-node network matches a direct two-system integration") {
    NetworkConfig cfg;
    cfg.n = 2;
    cfg.weights = ControlWeights::uniform(1.0, 10.0);
    cfg.seed = 5;
    RunOptions opts;
    opts.t_end = 30.0;
    const auto r = run_single(cfg, opts);

    // master/slave pair written out by hand: each node gets -theta (x_i - x_j)
    const double th = 0.1;
    const RosslerParams p;
    std::vector<Vec3> y = init_network(cfg).nodes;
    Rk4Stepper st(2);
    auto f = [&](const Vec3& s, const Vec3& other) {
        return Vec3{-s[1] - s[2] - th * (s[0] - other[0]), s[0] + p.a * s[1] - th * (s[1] - other[1]),
                    p.b * s[0] + s[2] * (s[0] - p.c) - th * (s[2] - other[2])};
    };
    for (std::size_t k = 0; k < opts.steps(); ++k) {
        st.step(0.0, opts.h, y, [&](double, const std::vector<Vec3>& in, std::vector<Vec3>& out) {
            out[0] = f(in[0], in[1]);
            out[1] = f(in[1], in[0]);
        });
    }
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK((y[i] - r.final_state.nodes[i]).norm() < 1e-9);
    }
}

TEST_CASE("synchronized start stays synchronized") {
    for (bool control : {true, false}) {
        NetworkConfig cfg;
        cfg.n = 6;
        cfg.control_enabled = control;
        cfg.ic_range = {Interval{0.3, 0.3}, Interval{-0.2, -0.2}, Interval{0.1, 0.1}};
        RunOptions opts;
        opts.t_end = 100.0;
        const auto r = run_single(cfg, opts);
        double worst = 0.0;
        for (double e : r.error.e) worst = std::max(worst, e);
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("rk4 converges at fourth order") {
    const RosslerParams p;
    const Vec3 s0{0.5, -0.3, 0.2};
    const double h = 0.1;
    const auto ref = integrate_one(s0, h / 64.0, 1.0, p)[0];
    const double e1 = (integrate_one(s0, h, 1.0, p)[0] - ref).norm();
    const double e2 = (integrate_one(s0, h / 2.0, 1.0, p)[0] - ref).norm();
    const double ratio = e1 / e2;
    CHECK(ratio > 8.0);
    CHECK(ratio < 32.0);
}

TEST_CASE("run is deterministic and samples as configured") {
    NetworkConfig cfg;
    cfg.n = 7;
    RunOptions opts;
    opts.t_end = 10.0;
    opts.sample_every = 5;
    const auto a = run_single(cfg, opts);
    const auto b = run_single(cfg, opts);
    CHECK(a.error.e == b.error.e);
    CHECK(a.final_state.nodes == b.final_state.nodes);
    CHECK(a.sample_times.size() == 201);
    CHECK(a.sample_times.back() == doctest::Approx(10.0));
    CHECK(a.samples.size() == a.sample_times.size());
    opts.keep_states = false;
    CHECK(run_single(cfg, opts).samples.empty());
}

TEST_CASE("time to sync") {
    SyncErrorSeries s{{0, 1, 2, 3, 4}, {5.0, 1e-4, 2e-3, 5e-4, 1e-5}};
    CHECK(time_to_sync(s, 1e-3).value() == doctest::Approx(3.0));
    s.e.back() = 1.0;
    CHECK_FALSE(time_to_sync(s, 1e-3).has_value());

    NetworkConfig cfg;
    cfg.n = 10;
    cfg.weights = ControlWeights::uniform(1.0, 10.0);
    RunOptions opts;
    const auto r = run_single(cfg, opts);
    REQUIRE(r.time_to_sync.has_value());
    CHECK(*r.time_to_sync < 200.0);
}

TEST_CASE("divergence is reported with time and node") {
    NetworkConfig cfg;
    cfg.n = 3;
    cfg.control_enabled = false;
    cfg.params.a = 5.0;
    RunOptions opts;
    opts.t_end = 400.0;
    try {
        run_single(cfg, opts);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.time() > 0.0);
        CHECK(e.node() < 3);
    }
}

TEST_CASE("invalid run options") {
    RunOptions o;
    o.h = 0.0;
    CHECK_THROWS_AS(o.validate(), ConfigError);
    o = RunOptions{};
    o.t_end = -1.0;
    CHECK_THROWS_AS(o.validate(), ConfigError);
}
