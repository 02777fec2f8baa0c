#include <doctest.h>

#include <cmath>
#include <random>

#include "hjbsync/control.hpp"
#include "hjbsync/errors.hpp"
#include "hjbsync/rk4.hpp"
#include "hjbsync/single_network.hpp"

using namespace hjbsync;

TEST_CASE("pair control examples") {
    const auto w = ControlWeights::uniform(1.0, 10.0);
    CHECK(pair_control({0, 0, 0}, w) == Vec3{});
    const Vec3 u = pair_control({2, 2, 2}, w);
    for (std::size_t k = 0; k < 3; ++k) CHECK(u[k] == doctest::Approx(-0.2));
    const Vec3 v = pair_control({1, -1, 0.5}, ControlWeights::uniform(2.0, 10.0));
    CHECK(v[0] == doctest::Approx(-0.2));
    CHECK(v[1] == doctest::Approx(0.2));
    CHECK(v[2] == doctest::Approx(-0.1));
}

TEST_CASE("pair control is odd") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    ControlWeights w;
    w.lambda = {1.0, 2.0, 3.0};
    w.eta = {10.0, 5.0, 7.0};
    for (int n = 0; n < 100; ++n) {
        const Vec3 e{d(gen), d(gen), d(gen)};
        CHECK(pair_control(-e, w) == -pair_control(e, w));
    }
}

TEST_CASE("invalid weights are rejected") {
    CHECK_THROWS_AS(pair_control({1, 1, 1}, ControlWeights::uniform(0.0, 10.0)), ConfigError);
    CHECK_THROWS_AS(pair_control({1, 1, 1}, ControlWeights::uniform(1.0, -1.0)), ConfigError);
    ControlWeights w;
    w.alpha = Vec3{-1.0, 0.0, 0.0};
    CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("node control examples") {
    const auto c = Coupling::uniform({0.1, 0.1, 0.1});
    std::vector<OscState> same(4, {0.3, -1.0, 2.0});
    for (std::size_t i = 0; i < same.size(); ++i) CHECK(node_control(i, same, c) == Vec3{});

    std::vector<OscState> two{{1, 0, 0}, {0, 0, 0}};
    CHECK(node_control(0, two, c)[0] == doctest::Approx(-0.1));
    CHECK(node_control(1, two, c)[0] == doctest::Approx(0.1));

    std::vector<OscState> three{{1, 0, 0}, {0, 0, 0}, {-1, 0, 0}};
    const Vec3 u = node_control(0, three, c);
    CHECK(u[0] == doctest::Approx(-0.3));
    CHECK(u[1] == 0.0);
    CHECK(u[2] == 0.0);
    CHECK_THROWS_AS(node_control(3, three, c), std::out_of_range);
}

TEST_CASE("uniform fast path agrees with the pairwise sum and controls sum to zero") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    std::vector<OscState> s(17);
    for (auto& x : s) x = {d(gen), d(gen), d(gen)};
    const Vec3 theta{0.1, 0.25, 0.05};
    const auto uni = Coupling::uniform(theta);
    const auto tab = Coupling::table(s.size(), std::vector<Vec3>(s.size() * s.size(), theta));
    std::vector<Vec3> fast(s.size()), slow(s.size());
    node_controls(s, uni, fast);
    node_controls(s, tab, slow);
    Vec3 total;
    for (std::size_t i = 0; i < s.size(); ++i) {
        Vec3 brute;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (j != i) brute -= hadamard(theta, s[i] - s[j]);
        }
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(fast[i][k] == doctest::Approx(brute[k]).epsilon(1e-12));
            CHECK(slow[i][k] == doctest::Approx(brute[k]).epsilon(1e-12));
        }
        total += fast[i];
    }
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(total[k]) < 1e-12);
}

TEST_CASE("cost increment examples") {
    ControlWeights w = ControlWeights::uniform(1.0, 10.0);
    w.alpha = Vec3{0.1, 0.1, 0.1};
    const std::vector<PairError> zero(3);
    CHECK(cost_increment(zero, zero, w) == 0.0);

    const std::vector<PairError> e{{1, 0, 0}};
    const std::vector<Vec3> u{{-0.1, 0, 0}};
    CHECK(cost_increment(e, u, w) == doctest::Approx(0.2));

    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::vector<PairError> es(6);
    std::vector<Vec3> us(6);
    for (std::size_t k = 0; k < es.size(); ++k) {
        es[k] = {d(gen), d(gen), d(gen)};
        us[k] = {d(gen), d(gen), d(gen)};
    }
    const double base = cost_increment(es, us, w);
    for (auto& x : es) x *= 2.0;
    for (auto& x : us) x *= 2.0;
    CHECK(cost_increment(es, us, w) == doctest::Approx(4.0 * base));
}

TEST_CASE("network cost rate matches a brute-force pair sum") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    std::vector<OscState> s(9);
    for (auto& x : s) x = {d(gen), d(gen), d(gen)};
    ControlWeights w;
    w.lambda = {1.0, 2.0, 0.5};
    w.eta = {10.0, 10.0, 4.0};
    std::vector<PairError> es;
    std::vector<Vec3> us;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (i == j) continue;
            es.push_back(s[i] - s[j]);
            us.push_back(pair_control(s[i] - s[j], w));
        }
    }
    const double brute = cost_increment(es, us, w);
    CHECK(network_cost_rate(s, w, Coupling::from_weights(w)) == doctest::Approx(brute).epsilon(1e-11));
    CHECK(network_lyapunov_value(s, w) == doctest::Approx(lyapunov_value(es, w)).epsilon(1e-11));
}

TEST_CASE("lyapunov value examples") {
    const auto w = ControlWeights::uniform(1.0, 10.0);
    CHECK(lyapunov_value(std::vector<PairError>(2), w) == 0.0);
    const std::vector<PairError> one{{1, 2, 0}};
    CHECK(lyapunov_value(one, w) == doctest::Approx(5.0));
    const std::vector<PairError> ab{{1, 2, 3}, {-0.5, 0.1, 4}};
    const std::vector<PairError> ba{{-0.5, 0.1, 4}, {1, 2, 3}};
    CHECK(lyapunov_value(ab, w) == doctest::Approx(lyapunov_value(ba, w)).epsilon(1e-15));
}

TEST_CASE("trapezoid accumulator") {
    // integral of t^2 on [0, 1] sampled at 1000 steps; trapezoid error h^2/6
    PerformanceAccumulator acc;
    const int n = 1000;
    const double h = 1.0 / n;
    for (int k = 0; k <= n; ++k) {
        const double t = k * h;
        acc.add_sample(t * t, h);
    }
    CHECK(acc.value() == doctest::Approx(1.0 / 3.0 + h * h / 6.0).epsilon(1e-12));
    CHECK(acc.last_integrand() == doctest::Approx(1.0));
}

TEST_CASE("two controlled nodes: pair lyapunov decays") {
    NetworkConfig cfg;
    cfg.n = 2;
    cfg.weights = ControlWeights::uniform(1.0, 10.0);
    cfg.seed = 42;
    RunOptions opts;
    opts.t_end = 150.0;
    const auto r = run_single(cfg, opts);
    const auto& fin = r.final_state.nodes;
    const std::vector<PairError> e{fin[0] - fin[1]};
    const auto& first = r.samples.front();
    const std::vector<PairError> e0{first[0] - first[1]};
    CHECK(lyapunov_value(e, cfg.weights) < 1e-10 * std::max(1.0, lyapunov_value(e0, cfg.weights)));
}

TEST_CASE("cost integral converges once the network synchronizes") {
    NetworkConfig cfg;
    cfg.n = 10;
    RunOptions a;
    a.t_end = 150.0;
    RunOptions b = a;
    b.t_end = 200.0;
    const auto ra = run_single(cfg, a);
    const auto rb = run_single(cfg, b);
    CHECK(std::isfinite(rb.cost.value()));
    CHECK(rb.cost.value() >= ra.cost.value());
    CHECK(rb.cost.value() - ra.cost.value() < 1e-8 * rb.cost.value());
    CHECK(rb.cost.last_integrand() < 1e-12);
}
