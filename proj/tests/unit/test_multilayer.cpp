#include <doctest.h>

#include <cmath>

#include "hjbsync/errors.hpp"
#include "hjbsync/multilayer.hpp"

using namespace hjbsync;

namespace {

MultilayerConfig reduced(std::size_t n, double eps, double theta_lambda) {
    MultilayerConfig cfg;
    cfg.n = n;
    cfg.eps = {eps, eps, eps};
    for (auto& w : cfg.weights) w = ControlWeights::uniform(theta_lambda, 10.0);
    return cfg;
}

double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

}  // namespace

TEST_CASE("uncoupled layers reproduce single-network runs bit for bit") {
    MultilayerConfig cfg;
    cfg.n = 6;
    for (auto& w : cfg.weights) w = ControlWeights::uniform(1.0, 10.0);
    cfg.weights[1] = ControlWeights::uniform(0.95, 10.0);
    cfg.seed = 17;
    RunOptions opts;
    opts.t_end = 40.0;
    const auto ml = run_multilayer(cfg, opts);
    for (std::size_t l = 0; l < kLayers; ++l) {
        const auto single = run_single(cfg.layer_config(l), opts);
        const auto layer = ml.final_state.layer(l);
        for (std::size_t i = 0; i < cfg.n; ++i) CHECK(layer[i] == single.final_state.nodes[i]);
        CHECK(ml.errors.intra[l] == single.error.e);
    }
}

TEST_CASE("identical layers feel no inter-layer coupling") {
    auto cfg = reduced(4, 0.3, 1.0);
    cfg.eps = {0.6, 0.2, 0.6};
    MultilayerState ms = init_multilayer(cfg);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        ms.nodes[cfg.n + i] = ms.nodes[i];
        ms.nodes[2 * cfg.n + i] = ms.nodes[i];
    }
    const auto d = multilayer_derivative(ms, cfg);
    auto off = cfg;
    off.eps = {0, 0, 0};
    CHECK(d == multilayer_derivative(ms, off));
}

TEST_CASE("equal couplings cancel across layers at one node") {
    auto cfg = reduced(1, 0.45, 1.0);
    cfg.control_enabled = false;
    const MultilayerState ms{0.0, 1, {{1.5, 0.2, 0.1}, {-0.7, 0.3, 0.4}, {0.2, -1.0, 2.0}}};
    const auto with = multilayer_derivative(ms, cfg);
    cfg.eps = {0, 0, 0};
    const auto without = multilayer_derivative(ms, cfg);
    double sum = 0.0;
    for (std::size_t l = 0; l < kLayers; ++l) {
        sum += with[l][0] - without[l][0];
        CHECK(with[l][1] == without[l][1]);
        CHECK(with[l][2] == without[l][2]);
    }
    CHECK(std::abs(sum) < 1e-15);
}

TEST_CASE("combined error examples") {
    MultilayerState same{0.0, 2, {{1, 2, 3}, {4, 5, 6}, {1, 2, 3}, {4, 5, 6}, {1, 2, 3}, {4, 5, 6}}};
    const auto ce = combined_error(same);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(ce.xi[i] == Vec3{});
        CHECK(ce.g[i] == 0.0);
    }
    const MultilayerState ms{0.0, 1, {{3, 0, 0}, {1, 0, 0}, {1, 0, 0}}};
    CHECK(combined_error(ms).xi[0][0] == doctest::Approx(2.0));
    const MultilayerState gs{0.0, 1, {{2, 0, 3}, {1, 0, 1}, {1, 0, 2}}};
    CHECK(combined_error(gs).g[0] == doctest::Approx(6.0 + 1.0 - 4.0));
}

TEST_CASE("combined-error dynamics hold along a trajectory") {
    auto cfg = reduced(10, 0.3, 1.0);
    RunOptions opts;
    opts.t_end = 10.0;
    const auto r = run_multilayer(cfg, opts);
    double worst = 0.0;
    for (std::size_t k = 0; k < r.samples.size(); k += 20) {
        worst = std::max(worst, max_of(combined_error_residual(r.samples[k], cfg, 1e-3)));
    }
    CHECK(worst < 1e-6);

    const MultilayerState zero{0.0, 10, std::vector<OscState>(30)};
    CHECK(max_of(combined_error_residual(zero, cfg)) == 0.0);
}

TEST_CASE("residual exposes coupling on every component") {
    auto cfg = reduced(5, 0.3, 1.0);
    RunOptions opts;
    opts.t_end = 5.0;
    const auto r = run_multilayer(cfg, opts);
    const auto& probe = r.samples.back();
    const double good = max_of(combined_error_residual(probe, cfg));
    auto bad = cfg;
    bad.couple_all_components = true;
    const double wrong = max_of(combined_error_residual(probe, bad));
    CHECK(good < 1e-6);
    CHECK(wrong > 1e3 * good);
    CHECK(wrong > 1e-3);
}

TEST_CASE("reduced-setting preconditions") {
    auto cfg = reduced(3, 0.3, 1.0);
    const auto ms = init_multilayer(cfg);
    auto uneq = cfg;
    uneq.eps[1] = 0.1;
    CHECK_THROWS_AS(combined_error_residual(ms, uneq), ConfigError);
    CHECK_THROWS_AS(stability_monitor(ms, uneq, 1.0), ConfigError);
    auto gains = cfg;
    gains.weights[1] = ControlWeights::uniform(2.0, 10.0);
    CHECK_THROWS_AS(combined_error_residual(ms, gains), ConfigError);
    auto negative = cfg;
    negative.eps[0] = -0.1;
    CHECK_THROWS_AS(negative.validate(), ConfigError);
}

TEST_CASE("stability monitor") {
    auto cfg = reduced(2, 0.6, 1.0);
    const auto ms = init_multilayer(cfg);
    const auto m = stability_monitor(ms, cfg, 1.0);
    CHECK(m.q_diag[0] == doctest::Approx(1.3));
    CHECK(m.q_diag[1] == doctest::Approx(-0.36));
    CHECK(m.q_diag[2] == doctest::Approx(10.75));
    CHECK(m.lambda_min == doctest::Approx(-0.36));
    const auto ce = combined_error(ms);
    for (std::size_t i = 0; i < 2; ++i) {
        const Vec3& xi = ce.xi[i];
        CHECK(m.v[i] == doctest::Approx(0.5 * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] / 0.4)));
        CHECK(m.w[i] == doctest::Approx(0.36 * xi.squared_norm()));
    }
    for (double eps : {0.0, 0.2, 5.0}) {
        for (double L : {0.1, 3.0, 100.0}) {
            auto c = reduced(2, eps, 1.0);
            CHECK(stability_monitor(ms, c, L).lambda_min <= -0.36);
        }
    }
    const MultilayerState zero{0.0, 2, std::vector<OscState>(6)};
    const auto z = stability_monitor(zero, cfg, 1.0);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(z.v[i] == 0.0);
        CHECK(z.w[i] == 0.0);
    }
    CHECK_THROWS_AS(stability_monitor(ms, cfg, 0.0), ConfigError);
}

TEST_CASE("bound estimate") {
    const RosslerParams p;
    // x3 = 0 everywhere makes G vanish while xi1 is nonzero
    const std::vector<MultilayerState> flat{{0.0, 1, {{2, 0, 0}, {1, 0, 0}, {0, 0, 0}}}};
    CHECK(estimate_bound(flat, p) == 0.0);
    const std::vector<MultilayerState> synced{{0.0, 2, std::vector<OscState>(6, {1, 2, 3})}};
    CHECK_THROWS_AS(estimate_bound(synced, p), UndefinedError);
    const std::vector<MultilayerState> one{{0.0, 1, {{1, 0, 2}, {0, 0, 0}, {0, 0, 0}}}};
    // G = 2, xi1 = 1 -> |G / (b xi1)| = 5
    CHECK(estimate_bound(one, p) == doctest::Approx(5.0));
}

TEST_CASE("decoupled layers: intra sync without inter sync") {
    MultilayerConfig cfg;
    cfg.n = 20;
    for (auto& w : cfg.weights) w = ControlWeights::uniform(1.0, 10.0);
    RunOptions opts;
    opts.keep_states = false;
    const auto r = run_multilayer(cfg, opts);
    const std::size_t from = r.errors.t.size() * 3 / 4;
    for (std::size_t k = from; k < r.errors.t.size(); ++k) {
        for (std::size_t l = 0; l < kLayers; ++l) {
            CHECK(r.errors.intra[l][k] < 1e-3);
            CHECK(r.errors.inter[l][k] > 0.1);
        }
    }
}

TEST_CASE("monitor series and bound estimate on a three-cluster run") {
    auto cfg = reduced(3, 0.0, 1.0);
    RunOptions opts;
    opts.t_end = 50.0;
    const auto r = run_multilayer(cfg, opts);
    REQUIRE(r.monitor.has_value());
    REQUIRE(r.bound_estimate.has_value());
    CHECK(std::isfinite(*r.bound_estimate));
    CHECK(*r.bound_estimate > 0.0);
    CHECK(r.monitor->t.size() == r.monitor->v_total.size());
    for (double v : r.monitor->v_total) CHECK(v >= 0.0);

    auto uneq = cfg;
    uneq.eps = {0.6, 0.1, 0.6};
    CHECK_FALSE(run_multilayer(uneq, opts).monitor.has_value());
}

TEST_CASE("all-synchronized run: monitor quantities vanish") {
    auto cfg = reduced(3, 0.6, 3.0);
    RunOptions opts;
    opts.t_end = 200.0;
    const auto r = run_multilayer(cfg, opts, 1.0);
    REQUIRE(r.monitor.has_value());
    CHECK(r.monitor->v_total.back() < 1e-12);
    CHECK(std::isfinite(r.monitor->w_integral));
    // the tail of the w integral no longer moves
    const auto& w = r.monitor->w_total;
    CHECK(std::abs(w.back()) < 1e-12);
}
