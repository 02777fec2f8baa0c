#include "hjbsync/single_network.hpp"

#include <cmath>

#include "hjbsync/errors.hpp"
#include "hjbsync/rk4.hpp"

namespace hjbsync {

void NetworkConfig::validate() const {
    if (n < 2) {
        throw ConfigError("network needs at least 2 nodes");
    }
    params.validate();
    weights.validate();
    validate_ic_range(ic_range);
    if (coupling && !coupling->is_uniform() && coupling->table_size() != n) {
        throw ConfigError("coupling table size does not match node count");
    }
}

Coupling NetworkConfig::effective_coupling() const {
    return coupling ? *coupling : Coupling::from_weights(weights);
}

void RunOptions::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw ConfigError("step size h must be positive");
    }
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw ConfigError("t_end must be positive");
    }
    if (sample_every == 0) {
        throw ConfigError("sample_every must be at least 1");
    }
    if (!(sync_threshold > 0.0)) {
        throw ConfigError("sync threshold must be positive");
    }
}

std::size_t RunOptions::steps() const {
    return static_cast<std::size_t>(std::llround(t_end / h));
}

NetworkState init_network(const NetworkConfig& cfg) {
    cfg.validate();
    return NetworkState{0.0, draw_states(cfg.n, cfg.ic_range, cfg.seed)};
}

void network_rhs(std::span<const OscState> states, const RosslerParams& params,
                 const Coupling* coupling, std::span<Vec3> out) {
    if (coupling != nullptr) {
        node_controls(states, *coupling, out);
        for (std::size_t i = 0; i < states.size(); ++i) {
            out[i] += detail::rossler_rhs(states[i], params);
        }
    } else {
        for (std::size_t i = 0; i < states.size(); ++i) {
            out[i] = detail::rossler_rhs(states[i], params);
        }
    }
}

std::vector<Vec3> network_derivative(const NetworkState& ns, const NetworkConfig& cfg) {
    if (const auto bad = first_non_finite(ns.nodes); bad != ns.nodes.size()) {
        throw DivergenceError(ns.t, bad);
    }
    std::vector<Vec3> out(ns.nodes.size());
    const Coupling coupling = cfg.effective_coupling();
    network_rhs(ns.nodes, cfg.params, cfg.control_enabled ? &coupling : nullptr, out);
    return out;
}

double sync_error(std::span<const OscState> states) {
    const std::size_t n = states.size();
    if (n < 2) {
        throw std::invalid_argument("sync error needs at least 2 nodes");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            sum += (states[i] - states[j]).norm();
        }
    }
    // each unordered pair appears twice in the ordered sum
    return 2.0 * sum / static_cast<double>(n);
}

std::optional<double> time_to_sync(const SyncErrorSeries& series, double threshold) {
    std::optional<double> t_sync;
    for (std::size_t k = 0; k < series.e.size(); ++k) {
        if (series.e[k] < threshold) {
            if (!t_sync) t_sync = series.t[k];
        } else {
            t_sync.reset();
        }
    }
    return t_sync;
}

namespace {

double uncontrolled_cost_rate(std::span<const OscState> states, const ControlWeights& w) {
    // u = 0, so only the state penalty remains
    ControlWeights zero_eta = w;
    zero_eta.alpha = w.state_penalty();
    zero_eta.eta = {0.0, 0.0, 0.0};
    return network_cost_rate(states, zero_eta, Coupling::uniform({0.0, 0.0, 0.0}));
}

}  // namespace

SingleRunResult run_single(const NetworkConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    opts.validate();

    SingleRunResult r;
    NetworkState ns = init_network(cfg);
    const Coupling coupling = cfg.effective_coupling();
    const Coupling* active = cfg.control_enabled ? &coupling : nullptr;
    r.bound = TrajectoryBound(cfg.n);

    auto cost_rate = [&](std::span<const OscState> s) {
        return cfg.control_enabled ? network_cost_rate(s, cfg.weights, coupling)
                                   : uncontrolled_cost_rate(s, cfg.weights);
    };
    auto sample = [&](double t) {
        r.error.t.push_back(t);
        r.error.e.push_back(sync_error(ns.nodes));
        r.sample_times.push_back(t);
        if (opts.keep_states) r.samples.push_back(ns.nodes);
    };

    Rk4Stepper stepper(cfg.n);
    auto rhs = [&](double, const std::vector<Vec3>& y, std::vector<Vec3>& dy) {
        network_rhs(y, cfg.params, active, dy);
    };

    const std::size_t steps = opts.steps();
    r.bound.observe(ns.nodes);
    r.cost.add_sample(cost_rate(ns.nodes), opts.h);
    sample(0.0);
    for (std::size_t step = 1; step <= steps; ++step) {
        stepper.step(ns.t, opts.h, ns.nodes, rhs);
        ns.t = static_cast<double>(step) * opts.h;
        if (const auto bad = first_non_finite(ns.nodes); bad != ns.nodes.size()) {
            throw DivergenceError(ns.t, bad);
        }
        r.bound.observe(ns.nodes);
        r.cost.add_sample(cost_rate(ns.nodes), opts.h);
        if (step % opts.sample_every == 0) sample(ns.t);
    }
    r.time_to_sync = time_to_sync(r.error, opts.sync_threshold);
    r.final_state = std::move(ns);
    return r;
}

}  // namespace hjbsync
