#include "hjbsync/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>

#include "hjbsync/csv.hpp"
#include "hjbsync/errors.hpp"

namespace hjbsync::io {

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view ctx) {
    if (!j.is_object()) {
        throw ConfigError(std::string(ctx) + " must be an object");
    }
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in " + std::string(ctx));
        }
    }
}

template <class T>
void read(const json& j, const char* key, T& out, std::string_view ctx) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(std::string(ctx) + "." + key + " must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0 && !v.is_number_unsigned())) {
            throw ConfigError(std::string(ctx) + "." + key + " must be a nonnegative integer");
        }
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(std::string(ctx) + "." + key + " must be a number");
    }
    out = v.get<T>();
}

Vec3 read_vec3(const json& v, std::string_view what) {
    if (v.is_number()) {
        const double d = v.get<double>();
        return {d, d, d};
    }
    if (v.is_array() && v.size() == 3 && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
        return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    }
    throw ConfigError(std::string(what) + " must be a number or an array of 3 numbers");
}

json vec3_json(const Vec3& v) {
    if (v[0] == v[1] && v[1] == v[2]) return v[0];
    return json::array({v[0], v[1], v[2]});
}

RosslerParams read_params(const json& j) {
    check_keys(j, {"a", "b", "c"}, "params");
    RosslerParams p;
    read(j, "a", p.a, "params");
    read(j, "b", p.b, "params");
    read(j, "c", p.c, "params");
    return p;
}

json params_json(const RosslerParams& p) { return {{"a", p.a}, {"b", p.b}, {"c", p.c}}; }

ControlWeights read_weights(const json& j, std::string_view ctx) {
    check_keys(j, {"lambda", "eta", "alpha"}, ctx);
    ControlWeights w;
    if (j.contains("lambda")) w.lambda = read_vec3(j.at("lambda"), std::string(ctx) + ".lambda");
    if (j.contains("eta")) w.eta = read_vec3(j.at("eta"), std::string(ctx) + ".eta");
    if (j.contains("alpha") && !j.at("alpha").is_null()) {
        w.alpha = read_vec3(j.at("alpha"), std::string(ctx) + ".alpha");
    }
    return w;
}

json weights_json(const ControlWeights& w) {
    json j{{"lambda", vec3_json(w.lambda)}, {"eta", vec3_json(w.eta)}};
    j["alpha"] = w.alpha ? vec3_json(*w.alpha) : json(nullptr);
    return j;
}

IcRange read_ic_range(const json& v) {
    auto interval = [](const json& p) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw ConfigError("ic_range entries must be [lo, hi]");
        }
        return Interval{p[0].get<double>(), p[1].get<double>()};
    };
    if (v.is_array() && v.size() == 2 && v[0].is_number()) {
        const Interval iv = interval(v);
        return {iv, iv, iv};
    }
    if (v.is_array() && v.size() == 3) {
        return {interval(v[0]), interval(v[1]), interval(v[2])};
    }
    throw ConfigError("ic_range must be [lo, hi] or three [lo, hi] pairs");
}

json ic_range_json(const IcRange& r) {
    const bool same = r[0].lo == r[1].lo && r[1].lo == r[2].lo && r[0].hi == r[1].hi && r[1].hi == r[2].hi;
    if (same) return json::array({r[0].lo, r[0].hi});
    json out = json::array();
    for (const auto& iv : r) out.push_back(json::array({iv.lo, iv.hi}));
    return out;
}

RunOptions read_run(const json& j, RunOptions run) {
    check_keys(j, {"t_end", "h", "sample_every", "sync_threshold"}, "run");
    read(j, "t_end", run.t_end, "run");
    read(j, "h", run.h, "run");
    read(j, "sample_every", run.sample_every, "run");
    read(j, "sync_threshold", run.sync_threshold, "run");
    return run;
}

json run_json(const RunOptions& r) {
    return {{"t_end", r.t_end}, {"h", r.h}, {"sample_every", r.sample_every}, {"sync_threshold", r.sync_threshold}};
}

void check_command(const json& doc, std::string_view expected) {
    if (doc.contains("command")) {
        if (!doc.at("command").is_string() || doc.at("command").get<std::string>() != expected) {
            throw ConfigError("document is for command '" + doc.at("command").dump() + "', expected '" +
                              std::string(expected) + "'");
        }
    }
}

Axis read_axis(const json& j, std::string_view ctx, Axis a) {
    check_keys(j, {"lo", "hi", "step"}, ctx);
    read(j, "lo", a.lo, ctx);
    read(j, "hi", a.hi, ctx);
    read(j, "step", a.step, ctx);
    return a;
}

json axis_json(const Axis& a) { return {{"lo", a.lo}, {"hi", a.hi}, {"step", a.step}}; }

}  // namespace

SingleDocument parse_single(const json& doc) {
    check_keys(doc, {"command", "network", "run"}, "document");
    check_command(doc, "single");
    SingleDocument d;
    if (doc.contains("network")) {
        const json& n = doc.at("network");
        check_keys(n, {"n", "params", "weights", "control", "seed", "ic_range"}, "network");
        read(n, "n", d.network.n, "network");
        if (n.contains("params")) d.network.params = read_params(n.at("params"));
        if (n.contains("weights")) d.network.weights = read_weights(n.at("weights"), "network.weights");
        read(n, "control", d.network.control_enabled, "network");
        read(n, "seed", d.network.seed, "network");
        if (n.contains("ic_range")) d.network.ic_range = read_ic_range(n.at("ic_range"));
    }
    if (doc.contains("run")) d.run = read_run(doc.at("run"), d.run);
    d.network.validate();
    d.run.validate();
    return d;
}

json to_json(const SingleDocument& d) {
    return {{"command", "single"},
            {"network",
             {{"n", d.network.n},
              {"params", params_json(d.network.params)},
              {"weights", weights_json(d.network.weights)},
              {"control", d.network.control_enabled},
              {"seed", d.network.seed},
              {"ic_range", ic_range_json(d.network.ic_range)}}},
            {"run", run_json(d.run)}};
}

MultilayerDocument parse_multilayer(const json& doc) {
    check_keys(doc, {"command", "multilayer", "run", "analysis"}, "document");
    check_command(doc, "multilayer");
    MultilayerDocument d;
    auto& m = d.multilayer;
    for (auto& w : m.weights) w = ControlWeights::uniform(1.0, 10.0);
    if (doc.contains("multilayer")) {
        const json& j = doc.at("multilayer");
        check_keys(j, {"n", "params", "layers", "eps", "seed", "ic_range", "control", "couple_all_components"},
                   "multilayer");
        read(j, "n", m.n, "multilayer");
        if (j.contains("params")) m.params = read_params(j.at("params"));
        if (j.contains("layers")) {
            const json& layers = j.at("layers");
            if (!layers.is_array() || layers.size() != kLayers) {
                throw ConfigError("multilayer.layers must list 3 weight objects");
            }
            for (std::size_t l = 0; l < kLayers; ++l) {
                m.weights[l] = read_weights(layers[l], "multilayer.layers[" + std::to_string(l) + "]");
            }
        }
        if (j.contains("eps")) {
            const Vec3 e = read_vec3(j.at("eps"), "multilayer.eps");
            m.eps = {e[0], e[1], e[2]};
        }
        read(j, "seed", m.seed, "multilayer");
        if (j.contains("ic_range")) m.ic_range = read_ic_range(j.at("ic_range"));
        read(j, "control", m.control_enabled, "multilayer");
        read(j, "couple_all_components", m.couple_all_components, "multilayer");
    }
    if (doc.contains("run")) d.run = read_run(doc.at("run"), d.run);
    if (doc.contains("analysis")) {
        const json& a = doc.at("analysis");
        check_keys(a, {"delta", "window_fraction", "cluster_tolerance_deg", "monitor_bound"}, "analysis");
        read(a, "delta", d.analysis.delta, "analysis");
        read(a, "window_fraction", d.analysis.window_fraction, "analysis");
        read(a, "cluster_tolerance_deg", d.analysis.cluster_tolerance_deg, "analysis");
        if (a.contains("monitor_bound") && !a.at("monitor_bound").is_null()) {
            double b = 0.0;
            read(a, "monitor_bound", b, "analysis");
            d.analysis.monitor_bound = b;
        }
    }
    m.validate();
    d.run.validate();
    if (!(d.analysis.delta > 0.0)) throw ConfigError("analysis.delta must be positive");
    if (!(d.analysis.window_fraction > 0.0 && d.analysis.window_fraction <= 1.0)) {
        throw ConfigError("analysis.window_fraction must be in (0, 1]");
    }
    return d;
}

json to_json(const MultilayerDocument& d) {
    const auto& m = d.multilayer;
    json layers = json::array();
    for (const auto& w : m.weights) layers.push_back(weights_json(w));
    json analysis{{"delta", d.analysis.delta},
                  {"window_fraction", d.analysis.window_fraction},
                  {"cluster_tolerance_deg", d.analysis.cluster_tolerance_deg}};
    analysis["monitor_bound"] = d.analysis.monitor_bound ? json(*d.analysis.monitor_bound) : json(nullptr);
    return {{"command", "multilayer"},
            {"multilayer",
             {{"n", m.n},
              {"params", params_json(m.params)},
              {"layers", layers},
              {"eps", json::array({m.eps[0], m.eps[1], m.eps[2]})},
              {"seed", m.seed},
              {"ic_range", ic_range_json(m.ic_range)},
              {"control", m.control_enabled},
              {"couple_all_components", m.couple_all_components}}},
            {"run", run_json(d.run)},
            {"analysis", analysis}};
}

SweepDocument parse_sweep(const json& doc) {
    check_keys(doc, {"command", "sweep", "run"}, "document");
    check_command(doc, "sweep");
    SweepDocument d;
    auto& s = d.sweep;
    if (doc.contains("sweep")) {
        const json& j = doc.at("sweep");
        check_keys(j, {"weight", "eps2", "eta13", "lambda2", "eta2", "eps1", "eps3", "n", "seeds", "base_seed",
                       "params", "ic_range", "delta", "window_fraction"},
                   "sweep");
        if (j.contains("weight")) s.weight = read_axis(j.at("weight"), "sweep.weight", s.weight);
        if (j.contains("eps2")) s.eps2 = read_axis(j.at("eps2"), "sweep.eps2", s.eps2);
        read(j, "eta13", s.eta13, "sweep");
        read(j, "lambda2", s.lambda2, "sweep");
        read(j, "eta2", s.eta2, "sweep");
        read(j, "eps1", s.eps1, "sweep");
        read(j, "eps3", s.eps3, "sweep");
        read(j, "n", s.n, "sweep");
        read(j, "seeds", s.seeds, "sweep");
        read(j, "base_seed", s.base_seed, "sweep");
        if (j.contains("params")) s.params = read_params(j.at("params"));
        if (j.contains("ic_range")) s.ic_range = read_ic_range(j.at("ic_range"));
        read(j, "delta", s.delta, "sweep");
        read(j, "window_fraction", s.window_fraction, "sweep");
    }
    if (doc.contains("run")) s.run = read_run(doc.at("run"), s.run);
    s.run.keep_states = false;
    s.validate();
    return d;
}

json to_json(const SweepDocument& d) {
    const auto& s = d.sweep;
    return {{"command", "sweep"},
            {"sweep",
             {{"weight", axis_json(s.weight)},
              {"eps2", axis_json(s.eps2)},
              {"eta13", s.eta13},
              {"lambda2", s.lambda2},
              {"eta2", s.eta2},
              {"eps1", s.eps1},
              {"eps3", s.eps3},
              {"n", s.n},
              {"seeds", s.seeds},
              {"base_seed", s.base_seed},
              {"params", params_json(s.params)},
              {"ic_range", ic_range_json(s.ic_range)},
              {"delta", s.delta},
              {"window_fraction", s.window_fraction}}},
            {"run", run_json(s.run)}};
}

namespace {

struct ComponentField {
    const char* name;
    double CircuitComponents::*member;
};

constexpr ComponentField kComponentFields[] = {
    {"C1", &CircuitComponents::c1},   {"C2", &CircuitComponents::c2},   {"C3", &CircuitComponents::c3},
    {"R1", &CircuitComponents::r1},   {"R2", &CircuitComponents::r2},   {"R3", &CircuitComponents::r3},
    {"R4", &CircuitComponents::r4},   {"R5", &CircuitComponents::r5},   {"R6", &CircuitComponents::r6},
    {"R7", &CircuitComponents::r7},   {"R8", &CircuitComponents::r8},   {"R9", &CircuitComponents::r9},
    {"R10", &CircuitComponents::r10}, {"R11", &CircuitComponents::r11}, {"R12", &CircuitComponents::r12},
    {"R13", &CircuitComponents::r13}, {"R14", &CircuitComponents::r14}, {"R15", &CircuitComponents::r15},
    {"Rin", &CircuitComponents::r_in}, {"xi", &CircuitComponents::xi},
    {"multiplier_scale", &CircuitComponents::multiplier_scale},
    {"Up", &CircuitComponents::up},   {"Un", &CircuitComponents::un},
};

}  // namespace

double parse_si_value(std::string_view text) {
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s.empty()) throw ConfigError("empty component value");
    double scale = 1.0;
    switch (s.back()) {
        case 'p': scale = 1e-12; break;
        case 'n': scale = 1e-9; break;
        case 'u': scale = 1e-6; break;
        case 'm': scale = 1e-3; break;
        case 'k': scale = 1e3; break;
        case 'M': scale = 1e6; break;
        default: break;
    }
    if (scale != 1.0) s.pop_back();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError("malformed component value '" + std::string(text) + "'");
    }
    if (used != s.size() || !std::isfinite(v)) {
        throw ConfigError("malformed component value '" + std::string(text) + "'");
    }
    return v * scale;
}

void set_component(CircuitComponents& cc, std::string_view name, double value) {
    for (const auto& f : kComponentFields) {
        if (name == f.name) {
            cc.*(f.member) = value;
            return;
        }
    }
    throw ConfigError("unknown circuit component '" + std::string(name) + "'");
}

CircuitDocument parse_circuit(const json& doc) {
    check_keys(doc, {"command", "components", "equivalence", "network"}, "document");
    check_command(doc, "circuit-check");
    CircuitDocument d;
    if (doc.contains("components")) {
        const json& j = doc.at("components");
        if (!j.is_object()) throw ConfigError("components must be an object");
        for (const auto& [key, value] : j.items()) {
            if (key == "clamp") {
                if (!value.is_boolean()) throw ConfigError("components.clamp must be a boolean");
                d.components.clamp = value.get<bool>();
                continue;
            }
            double v = 0.0;
            if (value.is_number()) {
                v = value.get<double>();
            } else if (value.is_string()) {
                v = parse_si_value(value.get<std::string>());
            } else {
                throw ConfigError("component " + key + " must be a number or SI string");
            }
            set_component(d.components, key, v);
        }
    }
    if (doc.contains("equivalence")) {
        const json& j = doc.at("equivalence");
        check_keys(j, {"horizon", "h", "nodes", "controlled", "seed"}, "equivalence");
        read(j, "horizon", d.equivalence.horizon, "equivalence");
        read(j, "h", d.equivalence.h, "equivalence");
        read(j, "nodes", d.equivalence.nodes, "equivalence");
        read(j, "controlled", d.equivalence.controlled, "equivalence");
        read(j, "seed", d.equivalence.seed, "equivalence");
    }
    if (doc.contains("network")) {
        const json& j = doc.at("network");
        check_keys(j, {"nodes", "controlled", "t_end", "h", "sample_every", "seed", "sync_threshold"}, "network");
        read(j, "nodes", d.network.nodes, "network");
        read(j, "controlled", d.network.controlled, "network");
        read(j, "t_end", d.network.t_end, "network");
        read(j, "h", d.network.h, "network");
        read(j, "sample_every", d.network.sample_every, "network");
        read(j, "seed", d.network.seed, "network");
        read(j, "sync_threshold", d.network.sync_threshold, "network");
    }
    d.components.validate();
    return d;
}

json to_json(const CircuitDocument& d) {
    json comps = json::object();
    for (const auto& f : kComponentFields) comps[f.name] = d.components.*(f.member);
    comps["clamp"] = d.components.clamp;
    return {{"command", "circuit-check"},
            {"components", comps},
            {"equivalence",
             {{"horizon", d.equivalence.horizon},
              {"h", d.equivalence.h},
              {"nodes", d.equivalence.nodes},
              {"controlled", d.equivalence.controlled},
              {"seed", d.equivalence.seed}}},
            {"network",
             {{"nodes", d.network.nodes},
              {"controlled", d.network.controlled},
              {"t_end", d.network.t_end},
              {"h", d.network.h},
              {"sample_every", d.network.sample_every},
              {"seed", d.network.seed},
              {"sync_threshold", d.network.sync_threshold}}}};
}

json load_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    if (j.is_object() && j.contains("manifest_version")) {
        if (!j.contains("config")) throw ConfigError("manifest " + path.string() + " has no config");
        return j.at("config");
    }
    return j;
}

namespace {

json single_preset(bool control, double lambda, double eta) {
    SingleDocument d;
    d.network.control_enabled = control;
    d.network.weights = ControlWeights::uniform(lambda, eta);
    return to_json(d);
}

json multilayer_preset(std::size_t n, double eps2, double lambda13) {
    MultilayerDocument d;
    d.multilayer.n = n;
    d.multilayer.eps = {0.6, eps2, 0.6};
    d.multilayer.weights = {ControlWeights::uniform(lambda13, 10.0), ControlWeights::uniform(0.95, 10.0),
                            ControlWeights::uniform(lambda13, 10.0)};
    return to_json(d);
}

json sweep_preset(std::size_t n) {
    SweepDocument d;
    d.sweep.n = n;
    return to_json(d);
}

const std::map<std::string, json, std::less<>>& presets() {
    static const std::map<std::string, json, std::less<>> table = [] {
        std::map<std::string, json, std::less<>> t;
        t["fig2"] = single_preset(false, 1.0, 10.0);
        t["fig3a"] = single_preset(true, 1.0, 10.0);
        t["fig3c-e1"] = single_preset(true, 1.0, 100.0);
        t["fig3c-e2"] = single_preset(true, 1.0, 10.0);
        t["fig3c-e3"] = single_preset(true, 2.0, 10.0);
        {
            MultilayerDocument d;
            for (auto& w : d.multilayer.weights) w = ControlWeights::uniform(1.0, 10.0);
            t["fig5"] = to_json(d);
        }
        t["fig7a"] = multilayer_preset(50, 0.4, 3.0);
        t["fig7c"] = multilayer_preset(50, 0.125, 1.9);
        t["fig7e"] = multilayer_preset(50, 0.11, 1.9);
        t["fig7g"] = multilayer_preset(50, 0.005, 1.0);
        t["fig9a"] = multilayer_preset(3, 0.4, 3.0);
        t["fig9c"] = multilayer_preset(3, 0.115, 2.6);
        t["fig9e"] = multilayer_preset(3, 0.146, 1.5);
        t["fig9g"] = multilayer_preset(3, 0.005, 1.0);
        t["fig6-grid"] = sweep_preset(50);
        t["fig8-grid"] = sweep_preset(3);
        {
            CircuitDocument d;
            t["fig13a"] = to_json(d);
            d.components = CircuitComponents::theta_half();
            t["fig13b"] = to_json(d);
        }
        return t;
    }();
    return table;
}

}  // namespace

json preset(std::string_view name) {
    const auto& t = presets();
    const auto it = t.find(name);
    if (it == t.end()) throw ConfigError("unknown preset '" + std::string(name) + "'");
    return it->second;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [k, _] : presets()) names.push_back(k);
    return names;
}

std::string single_trajectory_csv(const SingleRunResult& r) {
    const std::size_t n = r.samples.empty() ? 0 : r.samples.front().size();
    std::vector<std::string> header{"t"};
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 1; k <= 3; ++k) header.push_back("n" + std::to_string(i + 1) + "_x" + std::to_string(k));
    }
    std::string out = csv::join_row(header);
    std::vector<std::string> row;
    for (std::size_t s = 0; s < r.samples.size(); ++s) {
        row.assign(1, csv::format_double(r.sample_times[s]));
        for (const auto& node : r.samples[s]) {
            for (std::size_t k = 0; k < 3; ++k) row.push_back(csv::format_double(node[k]));
        }
        out += csv::join_row(row);
    }
    return out;
}

std::string error_series_csv(const SyncErrorSeries& s) {
    std::string out = csv::join_row({"t", "e"});
    for (std::size_t k = 0; k < s.t.size(); ++k) {
        out += csv::join_row({csv::format_double(s.t[k]), csv::format_double(s.e[k])});
    }
    return out;
}

std::string multilayer_trajectory_csv(const MultilayerRunResult& r) {
    std::vector<std::string> header{"t"};
    for (std::size_t l = 0; l < kLayers; ++l) {
        for (std::size_t i = 0; i < r.n; ++i) {
            for (int k = 1; k <= 3; ++k) {
                header.push_back("L" + std::to_string(l + 1) + "_n" + std::to_string(i + 1) + "_x" +
                                 std::to_string(k));
            }
        }
    }
    std::string out = csv::join_row(header);
    std::vector<std::string> row;
    for (const auto& s : r.samples) {
        row.assign(1, csv::format_double(s.t));
        for (const auto& node : s.nodes) {
            for (std::size_t k = 0; k < 3; ++k) row.push_back(csv::format_double(node[k]));
        }
        out += csv::join_row(row);
    }
    return out;
}

std::string layer_errors_csv(const LayerErrorSeries& s) {
    std::string out = csv::join_row({"t", "intra1", "intra2", "intra3", "inter12", "inter13", "inter23"});
    for (std::size_t k = 0; k < s.t.size(); ++k) {
        std::vector<std::string> row{csv::format_double(s.t[k])};
        for (std::size_t l = 0; l < kLayers; ++l) row.push_back(csv::format_double(s.intra[l][k]));
        for (std::size_t l = 0; l < kLayers; ++l) row.push_back(csv::format_double(s.inter[l][k]));
        out += csv::join_row(row);
    }
    return out;
}

std::string phases_csv(std::span<const double> phases, std::size_t n) {
    std::string out = csv::join_row({"layer", "node", "phase_deg"});
    for (std::size_t o = 0; o < phases.size(); ++o) {
        out += csv::join_row({std::to_string(o / n + 1), std::to_string(o % n + 1), csv::format_double(phases[o])});
    }
    return out;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json layer_errors_json(const LayerErrors& e) {
    return {{"intra", json::array({e.intra[0], e.intra[1], e.intra[2]})},
            {"inter", {{"12", e.inter[0]}, {"13", e.inter[1]}, {"23", e.inter[2]}}}};
}

}  // namespace

json single_summary(const SingleRunResult& r) {
    return {{"n", r.final_state.nodes.size()},
            {"time_to_sync", optional_number(r.time_to_sync)},
            {"final_error", r.error.e.empty() ? 0.0 : r.error.e.back()},
            {"cost_J", r.cost.value()},
            {"final_cost_rate", r.cost.last_integrand()},
            {"L_max", r.bound.max()},
            {"L_per_node", r.bound.per_node()}};
}

MultilayerSummary summarize_multilayer(const MultilayerRunResult& r, const MultilayerDocument& d) {
    MultilayerSummary s;
    s.window_errors = final_window_average(r.errors, d.analysis.window_fraction);
    s.regime = classify_regime(s.window_errors, d.analysis.delta);
    if (!r.samples.empty()) {
        const double t1 = r.samples.back().t;
        const double t0 = t1 - d.analysis.window_fraction * (t1 - r.samples.front().t);
        try {
            s.phases = phase_snapshot(r.samples, t0, t1);
            s.clusters = cluster_count(s.phases, d.analysis.cluster_tolerance_deg);
        } catch (const std::exception&) {
            s.phases.clear();
        }
    }
    const auto& m = d.multilayer;
    json final_errors = {{"intra", json::array()}, {"inter", json::array()}};
    for (std::size_t l = 0; l < kLayers; ++l) {
        final_errors["intra"].push_back(r.errors.intra[l].back());
        final_errors["inter"].push_back(r.errors.inter[l].back());
    }
    json monitor = nullptr;
    if (r.monitor) {
        const std::optional<double> bound = d.analysis.monitor_bound ? d.analysis.monitor_bound : r.bound_estimate;
        json mj{{"L", optional_number(bound)},
                {"L_source", d.analysis.monitor_bound ? "config" : "estimated"},
                {"final_v_total", r.monitor->v_total.empty() ? 0.0 : r.monitor->v_total.back()},
                {"w_integral", r.monitor->w_integral}};
        if (bound && *bound > 0.0) {
            const double q0 = 3.0 * m.eps[0] - *bound / 2.0;
            const double q1 = -m.params.a;
            const double q2 = m.params.c / m.params.b - *bound / 2.0;
            mj["Q_diag"] = json::array({q0, q1, q2});
            mj["lambda_min_Q"] = std::min({q0, q1, q2});
        } else {
            mj["Q_diag"] = nullptr;
            mj["lambda_min_Q"] = nullptr;
        }
        monitor = mj;
    }
    s.doc = {{"n", r.n},
             {"regime", std::string(to_string(s.regime))},
             {"regime_code", static_cast<int>(s.regime)},
             {"delta", d.analysis.delta},
             {"window_fraction", d.analysis.window_fraction},
             {"window_errors", layer_errors_json(s.window_errors)},
             {"final_errors", final_errors},
             {"clusters", s.clusters ? json(*s.clusters) : json(nullptr)},
             {"L_max", r.bound.max()},
             {"L_estimate", optional_number(r.bound_estimate)},
             {"stability_monitor", monitor}};
    return s;
}

json circuit_report(const CircuitDocument& d) {
    const CircuitParams p = derive_params(d.components);
    const GainReport g = derive_gain(d.components);
    const RosslerParams norm = p.normalized();
    json report;
    report["derived_params"] = {{"a_eff", p.a_eff},
                                {"b_eff", p.b_eff},
                                {"c_eff", p.c_eff},
                                {"a_target", 0.36},
                                {"b_target", 0.4},
                                {"c_target", 4.5},
                                {"a_rel_error", norm.a / 0.36 - 1.0},
                                {"b_rel_error", norm.b / 0.4 - 1.0},
                                {"c_rel_error", norm.c / 4.5 - 1.0},
                                {"unit_coefficients", {{"V2_eq1", p.k_v2}, {"V3_eq1", p.k_v3}, {"V1_eq2", p.k_v1}}},
                                {"product_coefficient", p.k_product},
                                {"rate_scale_per_s", p.rate_scale},
                                {"time_scale_s", p.time_scale}};
    report["gain"] = {{"prefactor", g.prefactor},
                      {"g_forward", g.g_forward},
                      {"g_feedback", g.g_feedback},
                      {"theta_eff", g.theta_eff},
                      {"balanced", g.balanced},
                      {"warning", g.warning ? json(*g.warning) : json(nullptr)}};
    try {
        const EquivalenceReport paper = equivalence_check(d.components, d.equivalence);
        EquivalenceOptions same = d.equivalence;
        same.reference = norm;
        const EquivalenceReport injected = equivalence_check(d.components, same);
        report["equivalence"] = {{"horizon", d.equivalence.horizon},
                                 {"max_rel_deviation_reference_params", paper.max_relative_deviation},
                                 {"max_rel_deviation_identical_params", injected.max_relative_deviation}};
    } catch (const ConfigError& e) {
        report["equivalence"] = {{"skipped", e.what()}};
    }
    const CircuitRun run = run_circuit_network(d.components, d.network);
    report["network"] = {{"nodes", d.network.nodes},
                         {"controlled", d.network.controlled},
                         {"time_to_sync", optional_number(run.time_to_sync)},
                         {"final_error", run.error.e.back()}};
    return report;
}

json manifest(std::string_view command, const json& config, std::uint64_t base_seed,
              const std::vector<std::string>& outputs, double wall_seconds) {
    return {{"manifest_version", kManifestVersion},
            {"tool", "hjbsync"},
            {"version", std::string(kToolVersion)},
            {"command", std::string(command)},
            {"base_seed", base_seed},
            {"config", config},
            {"outputs", outputs},
            {"wall_clock_seconds", wall_seconds}};
}

void write_text(const std::filesystem::path& path, const std::string& text) { csv::write_file(path, text); }

void write_json(const std::filesystem::path& path, const json& j) { csv::write_file(path, j.dump(2) + "\n"); }

}  // namespace hjbsync::io
