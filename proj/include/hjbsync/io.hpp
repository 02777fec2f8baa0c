#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hjbsync/analysis.hpp"
#include "hjbsync/circuit.hpp"
#include "hjbsync/multilayer.hpp"
#include "hjbsync/single_network.hpp"
#include "hjbsync/sweep.hpp"

namespace hjbsync::io {

using nlohmann::json;

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kManifestVersion = 1;

// Analysis settings for multilayer runs.
struct AnalysisSettings {
    double delta = 1e-3;
    double window_fraction = 0.2;
    double cluster_tolerance_deg = 5.0;
    std::optional<double> monitor_bound;
};

struct SingleDocument {
    NetworkConfig network;
    RunOptions run;
};

struct MultilayerDocument {
    MultilayerConfig multilayer;
    RunOptions run;
    AnalysisSettings analysis;
};

struct SweepDocument {
    SweepSpec sweep;
};

struct CircuitDocument {
    CircuitComponents components;
    EquivalenceOptions equivalence;
    CircuitRunOptions network;
};

// Strict parsing: unknown keys and wrong types raise ConfigError. Missing keys
// keep their defaults. Each document carries "command" naming its subcommand.
SingleDocument parse_single(const json& doc);
MultilayerDocument parse_multilayer(const json& doc);
SweepDocument parse_sweep(const json& doc);
CircuitDocument parse_circuit(const json& doc);

json to_json(const SingleDocument& d);
json to_json(const MultilayerDocument& d);
json to_json(const SweepDocument& d);
json to_json(const CircuitDocument& d);

// Reads a config document or a manifest (whose "config" member is returned).
json load_document(const std::filesystem::path& path);

// Built-in named configurations; names() lists them.
json preset(std::string_view name);
std::vector<std::string> preset_names();

// Parses values such as "27.8k", "10n", "2.22e3".
double parse_si_value(std::string_view text);
// Sets one component by name (R1..R15, Rin, C1..C3, xi, Up, Un).
void set_component(CircuitComponents& cc, std::string_view name, double value);

// Output writers. Numbers are written with 17 significant digits.
std::string single_trajectory_csv(const SingleRunResult& r);
std::string error_series_csv(const SyncErrorSeries& s);
std::string multilayer_trajectory_csv(const MultilayerRunResult& r);
std::string layer_errors_csv(const LayerErrorSeries& s);
std::string phases_csv(std::span<const double> phases, std::size_t n);

json single_summary(const SingleRunResult& r);

struct MultilayerSummary {
    LayerErrors window_errors;
    RegimeLabel regime = RegimeLabel::Unclassified;
    std::optional<std::size_t> clusters;
    std::vector<double> phases;
    json doc;
};

MultilayerSummary summarize_multilayer(const MultilayerRunResult& r, const MultilayerDocument& d);

json circuit_report(const CircuitDocument& d);

json manifest(std::string_view command, const json& config, std::uint64_t base_seed,
              const std::vector<std::string>& outputs, double wall_seconds);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace hjbsync::io
