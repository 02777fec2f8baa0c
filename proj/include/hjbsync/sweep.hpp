#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hjbsync/analysis.hpp"
#include "hjbsync/multilayer.hpp"

namespace hjbsync {

struct Axis {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    [[nodiscard]] std::vector<double> values() const;
    void validate(const char* name) const;
};

// Two-parameter grid over the layer-1/3 weight lambda and eps2. Layer 2 and
// eps1/eps3 stay fixed.
struct SweepSpec {
    Axis weight{1.0, 3.0, 0.1};
    Axis eps2{0.0, 0.4, 0.01};
    double eta13 = 10.0;
    double lambda2 = 0.95;
    double eta2 = 10.0;
    double eps1 = 0.6;
    double eps3 = 0.6;
    std::size_t n = 3;
    std::size_t seeds = 3;
    std::uint64_t base_seed = 1;
    RosslerParams params;
    IcRange ic_range = default_ic_range();
    RunOptions run{200.0, 0.01, 10, false, 1e-3};
    double delta = 1e-3;
    double window_fraction = 0.2;

    void validate() const;
    // Multilayer configuration of one grid point (seed filled by the caller).
    [[nodiscard]] MultilayerConfig cell_config(double weight, double eps2) const;
    // Fingerprint of every field that affects results.
    [[nodiscard]] std::uint64_t fingerprint() const;
};

struct SweepCell {
    std::size_t weight_index = 0;
    std::size_t eps2_index = 0;
    double weight = 0.0;
    double eps2 = 0.0;
    RegimeLabel label = RegimeLabel::Unclassified;
    LayerErrors mean_errors;
    bool diverged = false;
};

struct SweepGrid {
    std::vector<double> weights;
    std::vector<double> eps2s;
    // weight-major: index = weight_index * eps2s.size() + eps2_index
    std::vector<SweepCell> cells;

    [[nodiscard]] const SweepCell& at(std::size_t wi, std::size_t ei) const {
        return cells.at(wi * eps2s.size() + ei);
    }
};

std::uint64_t cell_seed(std::uint64_t base, std::size_t wi, std::size_t ei, std::size_t replicate);

// Plurality over labels; a tie for the top count gives Unclassified.
RegimeLabel majority_label(const std::vector<RegimeLabel>& labels);

// One grid point: seeds replicate runs, classified and voted.
SweepCell run_cell(const SweepSpec& spec, std::size_t wi, std::size_t ei);

struct SweepOptions {
    std::size_t workers = 1;
    std::optional<std::filesystem::path> checkpoint;
    std::ostream* progress = nullptr;
};

SweepGrid run_sweep(const SweepSpec& spec, const SweepOptions& opts = {});

// CSV: weight,eps2,regime,intra1,intra2,intra3,inter12,inter13,inter23
void grid_export(const SweepGrid& grid, const std::filesystem::path& path);
std::string grid_to_csv(const SweepGrid& grid);

struct GridRow {
    double weight = 0.0;
    double eps2 = 0.0;
    RegimeLabel label = RegimeLabel::Unclassified;
    LayerErrors errors;
};

std::vector<GridRow> grid_import(const std::filesystem::path& path);

}  // namespace hjbsync
