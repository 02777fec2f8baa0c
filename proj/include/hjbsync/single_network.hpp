#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hjbsync/control.hpp"
#include "hjbsync/dynamics.hpp"
#include "hjbsync/rng.hpp"

namespace hjbsync {

struct NetworkConfig {
    std::size_t n = 50;
    RosslerParams params;
    ControlWeights weights;
    // Per-pair gain table; when empty the uniform gain lambda/eta is used.
    std::optional<Coupling> coupling;
    bool control_enabled = true;
    std::uint64_t seed = 1;
    IcRange ic_range = default_ic_range();

    void validate() const;
    [[nodiscard]] Coupling effective_coupling() const;
};

struct NetworkState {
    double t = 0.0;
    std::vector<OscState> nodes;
};

// Integration and sampling controls shared by single and multilayer runs.
struct RunOptions {
    double t_end = 200.0;
    double h = 0.01;
    std::size_t sample_every = 10;
    // Keep sampled node states (needed for trajectory output and phase analysis).
    bool keep_states = true;
    double sync_threshold = 1e-3;

    void validate() const;
    [[nodiscard]] std::size_t steps() const;
};

struct SyncErrorSeries {
    std::vector<double> t;
    std::vector<double> e;
};

struct SingleRunResult {
    std::vector<double> sample_times;
    std::vector<std::vector<OscState>> samples;
    SyncErrorSeries error;
    PerformanceAccumulator cost;
    TrajectoryBound bound;
    std::optional<double> time_to_sync;
    NetworkState final_state;
};

NetworkState init_network(const NetworkConfig& cfg);

// Writes the controlled vector field of every node into out. A null coupling
// means no control. Shared by the single and multilayer integrators.
void network_rhs(std::span<const OscState> states, const RosslerParams& params,
                 const Coupling* coupling, std::span<Vec3> out);

std::vector<Vec3> network_derivative(const NetworkState& ns, const NetworkConfig& cfg);

// (1/N) * sum over ordered pairs i != j of ||x_i - x_j||.
double sync_error(std::span<const OscState> states);

// First sampled time after which e stays below threshold through the end.
std::optional<double> time_to_sync(const SyncErrorSeries& series, double threshold);

SingleRunResult run_single(const NetworkConfig& cfg, const RunOptions& opts);

}  // namespace hjbsync
