#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hjbsync/multilayer.hpp"

namespace hjbsync {

// Instantaneous phase of one oscillator in degrees, (-180, 180].
struct PhaseSeries {
    std::vector<double> degrees;
    // 0 where the analytic-signal magnitude is below the floor
    std::vector<std::uint8_t> valid;
};

// Analytic signal by zeroing negative-frequency bins; the mean is removed first.
PhaseSeries hilbert_phase(std::span<const double> signal);

// Continuous version of a phase series in degrees.
std::vector<double> unwrap_degrees(std::span<const double> degrees);

// Window-averaged errors. inter is ordered (1,2), (1,3), (2,3).
struct LayerErrors {
    std::array<double, kLayers> intra{};
    std::array<double, kLayers> inter{};
};

// Mean of the sampled errors with t_from <= t <= t_to.
LayerErrors window_average(const LayerErrorSeries& series, double t_from, double t_to);

// Mean over the last `fraction` of the sampled time span.
LayerErrors final_window_average(const LayerErrorSeries& series, double fraction);

// Errors recomputed from stored states, then averaged over [t_from, t_to].
LayerErrors layer_errors(std::span<const MultilayerState> trajectory, double t_from, double t_to);

enum class RegimeLabel : int {
    AllSync = 0,
    Sync13 = 1,
    ChimeraLike = 2,
    ThreeClusters = 3,
    Unclassified = 4,
};

std::string_view to_string(RegimeLabel label);
std::optional<RegimeLabel> regime_from_string(std::string_view name);
std::optional<RegimeLabel> regime_from_code(int code);

RegimeLabel classify_regime(const LayerErrors& errors, double delta = 1e-3);

// Number of groups under single-linkage on circular distance (degrees).
std::size_t cluster_count(std::span<const double> phases_deg, double tolerance_deg = 5.0);

// Phase of x1 for every oscillator (layer-major) at the middle sample of the
// window [t_from, t_to], computed from the x1 series inside the window.
std::vector<double> phase_snapshot(std::span<const MultilayerState> trajectory, double t_from,
                                   double t_to);

}  // namespace hjbsync
