#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hjbsync/analysis.hpp"
#include "hjbsync/csv.hpp"
#include "hjbsync/errors.hpp"
#include "hjbsync/io.hpp"

namespace fs = std::filesystem;
using namespace hjbsync;
using io::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kDiverged = 3, kIo = 4 };

struct Common {
    std::string preset;
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> t_end;
    std::optional<double> h;
    std::optional<std::size_t> sample_every;
};

void add_common(CLI::App* app, Common& c, const std::string& default_out) {
    c.out = default_out;
    app->add_option("--preset", c.preset, "Named configuration (see `hjbsync presets`)");
    app->add_option("--config", c.config, "JSON config document or a previous manifest.json");
    app->add_option("--out", c.out, "Output directory")->capture_default_str();
    app->add_option("--seed", c.seed, "Base seed");
    app->add_option("--t-end", c.t_end, "Integration horizon (time units)");
    app->add_option("--step", c.h, "RK4 step h");
    app->add_option("--sample-every", c.sample_every, "Record every k-th step");
}

// preset < config file < flags
json resolve(const Common& c) {
    json doc = json::object();
    if (!c.preset.empty()) doc = io::preset(c.preset);
    if (!c.config.empty()) doc.merge_patch(io::load_document(c.config));
    return doc;
}

void apply_run(const Common& c, RunOptions& run) {
    if (c.t_end) run.t_end = *c.t_end;
    if (c.h) run.h = *c.h;
    if (c.sample_every) run.sample_every = *c.sample_every;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void finish(const fs::path& dir, std::string_view command, const json& config, std::uint64_t seed,
            const std::vector<std::string>& outputs, std::chrono::steady_clock::time_point start) {
    io::write_json(dir / "manifest.json", io::manifest(command, config, seed, outputs, seconds_since(start)));
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

struct SingleFlags {
    Common common;
    bool no_control = false;
    std::optional<std::size_t> n;
    std::optional<double> lambda;
    std::optional<double> eta;
};

int cmd_single(const SingleFlags& f) {
    const auto start = std::chrono::steady_clock::now();
    io::SingleDocument d = io::parse_single(resolve(f.common));
    if (f.no_control) d.network.control_enabled = false;
    if (f.n) d.network.n = *f.n;
    if (f.lambda) d.network.weights.lambda = {*f.lambda, *f.lambda, *f.lambda};
    if (f.eta) d.network.weights.eta = {*f.eta, *f.eta, *f.eta};
    if (f.common.seed) d.network.seed = *f.common.seed;
    apply_run(f.common, d.run);
    d = io::parse_single(io::to_json(d));

    const auto result = run_single(d.network, d.run);
    const fs::path dir = f.common.out;
    make_dir(dir);
    io::write_text(dir / "trajectory.csv", io::single_trajectory_csv(result));
    io::write_text(dir / "error.csv", io::error_series_csv(result.error));
    const json summary = io::single_summary(result);
    io::write_json(dir / "summary.json", summary);
    finish(dir, "single", io::to_json(d), d.network.seed, {"trajectory.csv", "error.csv", "summary.json"}, start);
    std::cout << summary.dump(2) << "\n";
    return kOk;
}

struct MultilayerFlags {
    Common common;
    bool no_control = false;
    std::optional<std::size_t> n;
    std::vector<double> eps;
    std::optional<double> eps2;
    std::optional<double> lambda13;
    std::optional<double> lambda2;
    std::optional<double> eta;
    std::optional<double> delta;
    std::optional<double> monitor_bound;
};

int cmd_multilayer(const MultilayerFlags& f) {
    const auto start = std::chrono::steady_clock::now();
    io::MultilayerDocument d = io::parse_multilayer(resolve(f.common));
    auto& m = d.multilayer;
    if (f.no_control) m.control_enabled = false;
    if (f.n) m.n = *f.n;
    if (!f.eps.empty()) m.eps = {f.eps[0], f.eps[1], f.eps[2]};
    if (f.eps2) m.eps[1] = *f.eps2;
    if (f.lambda13) {
        m.weights[0].lambda = m.weights[2].lambda = {*f.lambda13, *f.lambda13, *f.lambda13};
    }
    if (f.lambda2) m.weights[1].lambda = {*f.lambda2, *f.lambda2, *f.lambda2};
    if (f.eta) {
        for (auto& w : m.weights) w.eta = {*f.eta, *f.eta, *f.eta};
    }
    if (f.common.seed) m.seed = *f.common.seed;
    if (f.delta) d.analysis.delta = *f.delta;
    if (f.monitor_bound) d.analysis.monitor_bound = *f.monitor_bound;
    apply_run(f.common, d.run);
    d.run.keep_states = true;
    d = io::parse_multilayer(io::to_json(d));

    const auto result = run_multilayer(m, d.run, d.analysis.monitor_bound);
    const auto summary = io::summarize_multilayer(result, d);
    const fs::path dir = f.common.out;
    make_dir(dir);
    io::write_text(dir / "trajectory.csv", io::multilayer_trajectory_csv(result));
    io::write_text(dir / "errors.csv", io::layer_errors_csv(result.errors));
    io::write_text(dir / "phases.csv", io::phases_csv(summary.phases, m.n));
    io::write_json(dir / "summary.json", summary.doc);
    finish(dir, "multilayer", io::to_json(d), m.seed,
           {"trajectory.csv", "errors.csv", "phases.csv", "summary.json"}, start);
    std::cout << summary.doc.dump(2) << "\n";
    return kOk;
}

struct SweepFlags {
    Common common;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::string checkpoint;
    std::vector<double> weight_range;
    std::vector<double> eps2_range;
    std::optional<std::size_t> seeds;
    std::optional<std::size_t> n;
};

int cmd_sweep(const SweepFlags& f) {
    const auto start = std::chrono::steady_clock::now();
    io::SweepDocument d = io::parse_sweep(resolve(f.common));
    auto& s = d.sweep;
    if (!f.weight_range.empty()) s.weight = {f.weight_range[0], f.weight_range[1], f.weight_range[2]};
    if (!f.eps2_range.empty()) s.eps2 = {f.eps2_range[0], f.eps2_range[1], f.eps2_range[2]};
    if (f.seeds) s.seeds = *f.seeds;
    if (f.n) s.n = *f.n;
    if (f.common.seed) s.base_seed = *f.common.seed;
    apply_run(f.common, s.run);
    d = io::parse_sweep(io::to_json(d));

    const fs::path dir = f.common.out;
    make_dir(dir);
    SweepOptions opts;
    opts.workers = f.workers;
    opts.progress = &std::cerr;
    opts.checkpoint = f.checkpoint.empty() ? dir / "checkpoint.csv" : fs::path(f.checkpoint);
    const SweepGrid grid = run_sweep(s, opts);
    grid_export(grid, dir / "grid.csv");

    std::array<std::size_t, 5> counts{};
    for (const auto& c : grid.cells) ++counts[static_cast<std::size_t>(c.label)];
    json summary{{"cells", grid.cells.size()}, {"weights", grid.weights.size()}, {"eps2s", grid.eps2s.size()}};
    for (std::size_t k = 0; k < counts.size(); ++k) {
        summary["label_counts"][std::string(to_string(static_cast<RegimeLabel>(k)))] = counts[k];
    }
    io::write_json(dir / "summary.json", summary);
    finish(dir, "sweep", io::to_json(d), s.base_seed, {"grid.csv", "summary.json"}, start);
    std::cout << summary.dump(2) << "\n";
    return kOk;
}

struct CircuitFlags {
    Common common;
    std::string resistor_set;
    std::vector<std::string> components;
    bool no_control = false;
    std::optional<std::size_t> nodes;
    std::optional<bool> clamp;
};

int cmd_circuit(const CircuitFlags& f) {
    const auto start = std::chrono::steady_clock::now();
    io::CircuitDocument d = io::parse_circuit(resolve(f.common));
    if (f.resistor_set == "theta-0.5") {
        const auto half = CircuitComponents::theta_half();
        d.components.r12 = half.r12;
        d.components.r13 = half.r13;
        d.components.r14 = half.r14;
        d.components.r15 = half.r15;
        d.components.r_in = half.r_in;
    } else if (f.resistor_set == "theta-0.2") {
        const CircuitComponents base;
        d.components.r12 = base.r12;
        d.components.r13 = base.r13;
        d.components.r14 = base.r14;
        d.components.r15 = base.r15;
        d.components.r_in = base.r_in;
    }
    for (const auto& spec : f.components) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw ConfigError("--component expects name=value, got '" + spec + "'");
        io::set_component(d.components, spec.substr(0, eq), io::parse_si_value(spec.substr(eq + 1)));
    }
    if (f.clamp) d.components.clamp = *f.clamp;
    if (f.no_control) d.network.controlled = false;
    if (f.nodes) d.network.nodes = *f.nodes;
    if (f.common.seed) d.network.seed = d.equivalence.seed = *f.common.seed;
    if (f.common.t_end) d.network.t_end = *f.common.t_end;
    if (f.common.h) d.network.h = *f.common.h;
    if (f.common.sample_every) d.network.sample_every = *f.common.sample_every;
    d = io::parse_circuit(io::to_json(d));

    const json report = io::circuit_report(d);
    const fs::path dir = f.common.out;
    make_dir(dir);
    io::write_json(dir / "report.json", report);
    finish(dir, "circuit-check", io::to_json(d), d.network.seed, {"report.json"}, start);
    std::cout << report.dump(2) << "\n";
    if (report["gain"]["warning"].is_string()) {
        std::cerr << "warning: " << report["gain"]["warning"].get<std::string>() << "\n";
    }
    return kOk;
}

struct AnalyzeFlags {
    std::string dir;
    std::string out;
    double delta = 1e-3;
    double window_fraction = 0.2;
    double tolerance = 5.0;
};

LayerErrorSeries read_errors(const fs::path& path) {
    const csv::Table t = csv::read_file(path);
    if (t.header.size() != 7 || t.header[0] != "t") throw IoError("not a layer error file: " + path.string());
    LayerErrorSeries s;
    for (const auto& r : t.rows) {
        if (r.size() != 7) throw IoError("malformed row in " + path.string());
        s.t.push_back(std::stod(r[0]));
        for (std::size_t l = 0; l < kLayers; ++l) {
            s.intra[l].push_back(std::stod(r[1 + l]));
            s.inter[l].push_back(std::stod(r[4 + l]));
        }
    }
    return s;
}

std::vector<MultilayerState> read_trajectory(const fs::path& path) {
    const csv::Table t = csv::read_file(path);
    if (t.header.empty() || (t.header.size() - 1) % (3 * kLayers) != 0) {
        throw IoError("not a multilayer trajectory file: " + path.string());
    }
    const std::size_t n = (t.header.size() - 1) / (3 * kLayers);
    std::vector<MultilayerState> out;
    for (const auto& r : t.rows) {
        if (r.size() != t.header.size()) throw IoError("malformed row in " + path.string());
        MultilayerState ms;
        ms.t = std::stod(r[0]);
        ms.n = n;
        for (std::size_t o = 0; o < kLayers * n; ++o) {
            ms.nodes.push_back({std::stod(r[1 + 3 * o]), std::stod(r[2 + 3 * o]), std::stod(r[3 + 3 * o])});
        }
        out.push_back(std::move(ms));
    }
    return out;
}

int cmd_analyze(const AnalyzeFlags& f) {
    const fs::path dir = f.dir;
    LayerErrorSeries errors;
    try {
        errors = read_errors(dir / "errors.csv");
    } catch (const std::logic_error&) {
        throw IoError("malformed number in " + (dir / "errors.csv").string());
    }
    const LayerErrors w = final_window_average(errors, f.window_fraction);
    const RegimeLabel label = classify_regime(w, f.delta);
    json report{{"regime", std::string(to_string(label))},
                {"regime_code", static_cast<int>(label)},
                {"window_errors",
                 {{"intra", {w.intra[0], w.intra[1], w.intra[2]}},
                  {"inter", {{"12", w.inter[0]}, {"13", w.inter[1]}, {"23", w.inter[2]}}}}},
                {"clusters", nullptr}};
    if (fs::exists(dir / "trajectory.csv")) {
        std::vector<MultilayerState> traj;
        try {
            traj = read_trajectory(dir / "trajectory.csv");
        } catch (const std::logic_error&) {
            throw IoError("malformed number in " + (dir / "trajectory.csv").string());
        }
        if (!traj.empty()) {
            const double t1 = traj.back().t;
            const double t0 = t1 - f.window_fraction * (t1 - traj.front().t);
            const auto phases = phase_snapshot(traj, t0, t1);
            report["clusters"] = cluster_count(phases, f.tolerance);
            const fs::path out = f.out.empty() ? dir : fs::path(f.out);
            make_dir(out);
            io::write_text(out / "phases.csv", io::phases_csv(phases, traj.front().n));
        }
    }
    std::cout << report.dump(2) << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for optimally controlled Rossler oscillator networks"};
    app.require_subcommand(1);

    SingleFlags single;
    auto* s = app.add_subcommand("single", "One controlled network");
    add_common(s, single.common, "out/single");
    s->add_flag("--no-control", single.no_control, "Disable the feedback controller");
    s->add_option("--n", single.n, "Number of oscillators");
    s->add_option("--lambda", single.lambda, "Error weight (all components)");
    s->add_option("--eta", single.eta, "Control weight (all components)");

    MultilayerFlags multi;
    auto* m = app.add_subcommand("multilayer", "Three coupled networks");
    add_common(m, multi.common, "out/multilayer");
    m->add_flag("--no-control", multi.no_control, "Disable the intra-layer controllers");
    m->add_option("--n", multi.n, "Oscillators per layer");
    m->add_option("--eps", multi.eps, "Inter-layer couplings eps1 eps2 eps3")->expected(3);
    m->add_option("--eps2", multi.eps2, "Inter-layer coupling of layer 2");
    m->add_option("--lambda13", multi.lambda13, "Error weight of layers 1 and 3");
    m->add_option("--lambda2", multi.lambda2, "Error weight of layer 2");
    m->add_option("--eta", multi.eta, "Control weight of every layer");
    m->add_option("--delta", multi.delta, "Regime threshold");
    m->add_option("--monitor-bound", multi.monitor_bound, "Bound L used by the stability monitor");

    SweepFlags sweep;
    auto* w = app.add_subcommand("sweep", "Grid over the layer 1/3 weight and eps2");
    add_common(w, sweep.common, "out/sweep");
    w->add_option("--workers", sweep.workers, "Worker threads")->capture_default_str();
    w->add_option("--checkpoint", sweep.checkpoint, "Checkpoint file (default <out>/checkpoint.csv)");
    w->add_option("--weight-range", sweep.weight_range, "lo hi step")->expected(3);
    w->add_option("--eps2-range", sweep.eps2_range, "lo hi step")->expected(3);
    w->add_option("--seeds", sweep.seeds, "Replicates per cell");
    w->add_option("--n", sweep.n, "Oscillators per layer");

    CircuitFlags circuit;
    auto* c = app.add_subcommand("circuit-check", "Circuit parameter and equivalence report");
    add_common(c, circuit.common, "out/circuit");
    c->add_option("--resistor-set", circuit.resistor_set, "Controller resistors")
        ->check(CLI::IsMember({"theta-0.2", "theta-0.5"}));
    c->add_option("--component", circuit.components, "Override a component, e.g. R6=27.8k");
    c->add_flag("--no-control", circuit.no_control, "Run the circuit network without controllers");
    c->add_option("--nodes", circuit.nodes, "Nodes in the circuit network");
    c->add_option("--clamp", circuit.clamp, "Clamp voltages to the rails (true/false)");

    AnalyzeFlags analyze;
    auto* a = app.add_subcommand("analyze", "Reclassify a multilayer output directory");
    a->add_option("dir", analyze.dir, "Directory with errors.csv (and trajectory.csv)")->required();
    a->add_option("--out", analyze.out, "Where to write phases.csv (default: dir)");
    a->add_option("--delta", analyze.delta, "Regime threshold")->capture_default_str();
    a->add_option("--window", analyze.window_fraction, "Final window fraction")->capture_default_str();
    a->add_option("--tolerance", analyze.tolerance, "Cluster tolerance in degrees")->capture_default_str();

    auto* p = app.add_subcommand("presets", "List named configurations");
    std::string show;
    p->add_option("--show", show, "Print one preset as a config document");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (s->parsed()) return cmd_single(single);
        if (m->parsed()) return cmd_multilayer(multi);
        if (w->parsed()) return cmd_sweep(sweep);
        if (c->parsed()) return cmd_circuit(circuit);
        if (a->parsed()) return cmd_analyze(analyze);
        if (p->parsed() && !show.empty()) {
            std::cout << io::preset(show).dump(2) << "\n";
            return kOk;
        }
        if (p->parsed()) {
            for (const auto& name : io::preset_names()) {
                std::cout << name << "  " << io::preset(name)["command"].get<std::string>() << "\n";
            }
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const DivergenceError& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return kDiverged;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
