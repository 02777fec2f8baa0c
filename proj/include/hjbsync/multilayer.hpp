#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hjbsync/control.hpp"
#include "hjbsync/dynamics.hpp"
#include "hjbsync/rng.hpp"
#include "hjbsync/single_network.hpp"

namespace hjbsync {

inline constexpr std::size_t kLayers = 3;

// Three networks of n nodes each. Node i of every layer is coupled to node i
// of the other two layers through eps_l * (sum of others - 2 * own) on the
// first state component.
struct MultilayerConfig {
    std::size_t n = 50;
    RosslerParams params;
    std::array<ControlWeights, kLayers> weights{};
    std::array<double, kLayers> eps{0.0, 0.0, 0.0};
    std::uint64_t seed = 1;
    IcRange ic_range = default_ic_range();
    bool control_enabled = true;
    // Not part of the reference model: couple all three components.
    bool couple_all_components = false;

    void validate() const;
    // Configuration of one layer viewed as an independent network.
    [[nodiscard]] NetworkConfig layer_config(std::size_t layer) const;
};

// Seed used for the initial conditions of one layer.
std::uint64_t layer_seed(std::uint64_t seed, std::size_t layer);

// All 3n node states, layer-major: X[0..n), Y[n..2n), Z[2n..3n).
struct MultilayerState {
    double t = 0.0;
    std::size_t n = 0;
    std::vector<OscState> nodes;

    [[nodiscard]] std::span<const OscState> layer(std::size_t l) const {
        return std::span<const OscState>(nodes).subspan(l * n, n);
    }
    [[nodiscard]] std::span<OscState> layer(std::size_t l) {
        return std::span<OscState>(nodes).subspan(l * n, n);
    }
};

MultilayerState init_multilayer(const MultilayerConfig& cfg);

// Right-hand side over all 3n nodes; couplings[l] is the intra-layer gain of
// layer l (ignored when control is off).
void multilayer_rhs(std::span<const OscState> nodes, std::size_t n, const MultilayerConfig& cfg,
                    const std::array<Coupling, kLayers>& couplings, std::span<Vec3> out);

std::vector<Vec3> multilayer_derivative(const MultilayerState& ms, const MultilayerConfig& cfg);

// xi_i = x_i + y_i - 2 z_i and G_i = x3 x1 + y3 y1 - 2 z3 z1 per node.
struct CombinedError {
    std::vector<Vec3> xi;
    std::vector<double> g;
};

CombinedError combined_error(const MultilayerState& ms);

enum class DifferenceStencil { ThreePoint, FivePoint };

// Per node, the largest componentwise gap between d(xi)/dt obtained by central
// differencing of the integrated trajectory around ms (step h) and the
// closed-form combined-error dynamics. Requires equal eps and identical
// uniform gains in all layers.
std::vector<double> combined_error_residual(const MultilayerState& ms, const MultilayerConfig& cfg,
                                            double h = 1e-3,
                                            DifferenceStencil stencil = DifferenceStencil::FivePoint);

// Closed-form d(xi)/dt under equal eps and uniform gain theta.
std::vector<Vec3> combined_error_rhs(const MultilayerState& ms, const RosslerParams& p,
                                     const Vec3& theta, double eps);

struct StabilityMonitor {
    std::vector<double> v;           // per-node Lyapunov function
    std::array<double, 3> q_diag{};  // diagonal of Q
    double lambda_min = 0.0;
    std::vector<double> w;           // -lambda_min * ||xi_i||^2
    double bound = 0.0;              // L used for Q
};

StabilityMonitor stability_monitor(const MultilayerState& ms, const MultilayerConfig& cfg, double bound);

// Smallest L with |G / b| <= L |xi1| on every sample where |xi1| > 1e-9.
double estimate_bound(std::span<const MultilayerState> samples, const RosslerParams& p);

// Sync errors sampled along a run: intra per layer and inter for layer pairs
// (1,2), (1,3), (2,3).
struct LayerErrorSeries {
    std::vector<double> t;
    std::array<std::vector<double>, kLayers> intra;
    std::array<std::vector<double>, kLayers> inter;
};

// inter(l, m) = (1/n) sum_i ||S_i^l - S_i^m||
double inter_layer_error(std::span<const OscState> a, std::span<const OscState> b);

void append_layer_errors(const MultilayerState& ms, LayerErrorSeries& series);

struct MonitorSeries {
    std::vector<double> t;
    std::vector<double> v_total;
    std::vector<double> w_total;
    double w_integral = 0.0;
};

struct MultilayerRunResult {
    std::size_t n = 0;
    std::vector<MultilayerState> samples;  // empty unless keep_states
    LayerErrorSeries errors;
    TrajectoryBound bound;
    MultilayerState final_state;
    // Filled only when all eps are equal.
    std::optional<MonitorSeries> monitor;
    std::optional<double> bound_estimate;
};

// monitor_bound: L for Q; when unset it is estimated from the run itself.
MultilayerRunResult run_multilayer(const MultilayerConfig& cfg, const RunOptions& opts,
                                   std::optional<double> monitor_bound = std::nullopt);

}  // namespace hjbsync
