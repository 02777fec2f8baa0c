#include "hjbsync/sweep.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "hjbsync/csv.hpp"
#include "hjbsync/errors.hpp"

namespace hjbsync {

std::vector<double> Axis::values() const {
    const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
    std::vector<double> v(count);
    for (std::size_t k = 0; k < count; ++k) {
        v[k] = lo + static_cast<double>(k) * step;
    }
    return v;
}

void Axis::validate(const char* name) const {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
        throw ConfigError(std::string(name) + " axis needs finite lo <= hi");
    }
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw ConfigError(std::string(name) + " axis step must be positive");
    }
}

void SweepSpec::validate() const {
    weight.validate("weight");
    eps2.validate("eps2");
    if (weight.lo <= 0.0) {
        throw ConfigError("weight axis must be positive");
    }
    if (eps2.lo < 0.0 || eps1 < 0.0 || eps3 < 0.0) {
        throw ConfigError("inter-layer couplings must be >= 0");
    }
    if (seeds < 1) {
        throw ConfigError("sweep needs at least one seed per cell");
    }
    if (!(delta > 0.0)) {
        throw ConfigError("delta must be positive");
    }
    if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
        throw ConfigError("window fraction must be in (0, 1]");
    }
    cell_config(weight.lo, eps2.lo).validate();
    run.validate();
}

MultilayerConfig SweepSpec::cell_config(double w, double e2) const {
    MultilayerConfig c;
    c.n = n;
    c.params = params;
    c.weights = {ControlWeights::uniform(w, eta13), ControlWeights::uniform(lambda2, eta2),
                 ControlWeights::uniform(w, eta13)};
    c.eps = {eps1, e2, eps3};
    c.ic_range = ic_range;
    return c;
}

std::uint64_t SweepSpec::fingerprint() const {
    std::uint64_t h = 0;
    auto add = [&h](double v) { h = mix64(h ^ std::bit_cast<std::uint64_t>(v)); };
    for (double v : {weight.lo, weight.hi, weight.step, eps2.lo, eps2.hi, eps2.step, eta13, lambda2,
                     eta2, eps1, eps3, params.a, params.b, params.c, run.t_end, run.h, delta,
                     window_fraction}) {
        add(v);
    }
    for (const auto& iv : ic_range) {
        add(iv.lo);
        add(iv.hi);
    }
    h = mix64(h ^ n);
    h = mix64(h ^ seeds);
    h = mix64(h ^ base_seed);
    h = mix64(h ^ run.sample_every);
    return h;
}

std::uint64_t cell_seed(std::uint64_t base, std::size_t wi, std::size_t ei, std::size_t replicate) {
    return derive_seed(base, {wi, ei, replicate});
}

RegimeLabel majority_label(const std::vector<RegimeLabel>& labels) {
    std::array<std::size_t, 5> votes{};
    for (auto l : labels) ++votes[static_cast<std::size_t>(l)];
    std::size_t best = 0;
    std::size_t best_count = 0;
    bool tie = false;
    for (std::size_t k = 0; k < votes.size(); ++k) {
        if (votes[k] > best_count) {
            best = k;
            best_count = votes[k];
            tie = false;
        } else if (votes[k] == best_count && best_count > 0) {
            tie = true;
        }
    }
    if (best_count == 0 || tie) return RegimeLabel::Unclassified;
    return static_cast<RegimeLabel>(best);
}

SweepCell run_cell(const SweepSpec& spec, std::size_t wi, std::size_t ei) {
    const auto weights = spec.weight.values();
    const auto eps2s = spec.eps2.values();
    SweepCell cell;
    cell.weight_index = wi;
    cell.eps2_index = ei;
    cell.weight = weights.at(wi);
    cell.eps2 = eps2s.at(ei);

    RunOptions run = spec.run;
    run.keep_states = false;
    std::vector<RegimeLabel> labels;
    std::size_t finished = 0;
    for (std::size_t r = 0; r < spec.seeds; ++r) {
        MultilayerConfig cfg = spec.cell_config(cell.weight, cell.eps2);
        cfg.seed = cell_seed(spec.base_seed, wi, ei, r);
        try {
            const auto result = run_multilayer(cfg, run);
            const LayerErrors e = final_window_average(result.errors, spec.window_fraction);
            labels.push_back(classify_regime(e, spec.delta));
            for (std::size_t l = 0; l < kLayers; ++l) {
                cell.mean_errors.intra[l] += e.intra[l];
                cell.mean_errors.inter[l] += e.inter[l];
            }
            ++finished;
        } catch (const DivergenceError&) {
            cell.diverged = true;
            labels.push_back(RegimeLabel::Unclassified);
        }
    }
    const double scale = finished > 0 ? 1.0 / static_cast<double>(finished)
                                       : std::numeric_limits<double>::quiet_NaN();
    for (std::size_t l = 0; l < kLayers; ++l) {
        cell.mean_errors.intra[l] *= scale;
        cell.mean_errors.inter[l] *= scale;
    }
    cell.label = cell.diverged ? RegimeLabel::Unclassified : majority_label(labels);
    return cell;
}

namespace {

std::string checkpoint_header(const SweepSpec& spec) {
    return "# hjbsync-sweep-checkpoint " + std::to_string(spec.fingerprint());
}

std::string checkpoint_line(const SweepCell& c) {
    std::vector<std::string> f{std::to_string(c.weight_index), std::to_string(c.eps2_index),
                               std::to_string(static_cast<int>(c.label)), c.diverged ? "1" : "0"};
    for (double v : c.mean_errors.intra) f.push_back(csv::format_double(v));
    for (double v : c.mean_errors.inter) f.push_back(csv::format_double(v));
    return csv::join_row(f);
}

std::map<std::size_t, SweepCell> load_checkpoint(const std::filesystem::path& path, const SweepSpec& spec,
                                                 const std::vector<double>& weights,
                                                 const std::vector<double>& eps2s) {
    std::map<std::size_t, SweepCell> done;
    std::ifstream in(path);
    if (!in) return done;
    std::string line;
    if (!std::getline(in, line)) return done;
    if (line != checkpoint_header(spec)) {
        throw ConfigError("checkpoint " + path.string() + " belongs to a different sweep specification");
    }
    while (std::getline(in, line)) {
        const auto f = csv::split_row(line);
        // a torn final line from an interrupted write is ignored
        if (f.size() != 10) continue;
        try {
            SweepCell c;
            c.weight_index = std::stoul(f[0]);
            c.eps2_index = std::stoul(f[1]);
            if (c.weight_index >= weights.size() || c.eps2_index >= eps2s.size()) continue;
            const auto label = regime_from_code(std::stoi(f[2]));
            if (!label) continue;
            c.label = *label;
            c.diverged = f[3] == "1";
            for (std::size_t l = 0; l < kLayers; ++l) {
                c.mean_errors.intra[l] = std::stod(f[4 + l]);
                c.mean_errors.inter[l] = std::stod(f[7 + l]);
            }
            c.weight = weights[c.weight_index];
            c.eps2 = eps2s[c.eps2_index];
            done[c.weight_index * eps2s.size() + c.eps2_index] = c;
        } catch (const std::exception&) {
            continue;
        }
    }
    return done;
}

}  // namespace

SweepGrid run_sweep(const SweepSpec& spec, const SweepOptions& opts) {
    spec.validate();
    SweepGrid grid;
    grid.weights = spec.weight.values();
    grid.eps2s = spec.eps2.values();
    const std::size_t total = grid.weights.size() * grid.eps2s.size();
    grid.cells.resize(total);

    std::vector<char> have(total, 0);
    std::ofstream checkpoint;
    if (opts.checkpoint) {
        const auto done = load_checkpoint(*opts.checkpoint, spec, grid.weights, grid.eps2s);
        for (const auto& [idx, cell] : done) {
            grid.cells[idx] = cell;
            have[idx] = 1;
        }
        const bool fresh = !std::filesystem::exists(*opts.checkpoint) || done.empty();
        // an interrupted writer may have left a partial last line; start on a fresh one
        bool torn_tail = false;
        if (!fresh) {
            std::ifstream tail(*opts.checkpoint, std::ios::binary | std::ios::ate);
            if (tail && tail.tellg() > 0) {
                tail.seekg(-1, std::ios::end);
                torn_tail = tail.get() != '\n';
            }
        }
        checkpoint.open(*opts.checkpoint, fresh ? std::ios::trunc : std::ios::app);
        if (!checkpoint) {
            throw IoError("cannot open checkpoint " + opts.checkpoint->string());
        }
        if (fresh) checkpoint << checkpoint_header(spec) << '\n' << std::flush;
        if (torn_tail) checkpoint << '\n' << std::flush;
    }

    std::vector<std::size_t> todo;
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (!have[idx]) todo.push_back(idx);
    }

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> completed{total - todo.size()};
    std::mutex out_mutex;
    std::exception_ptr failure;

    auto worker = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= todo.size()) return;
            const std::size_t idx = todo[k];
            SweepCell cell;
            try {
                cell = run_cell(spec, idx / grid.eps2s.size(), idx % grid.eps2s.size());
            } catch (...) {
                std::lock_guard lock(out_mutex);
                if (!failure) failure = std::current_exception();
                next.store(todo.size());
                return;
            }
            grid.cells[idx] = cell;
            const std::size_t count = ++completed;
            std::lock_guard lock(out_mutex);
            if (checkpoint.is_open()) checkpoint << checkpoint_line(cell) << std::flush;
            if (opts.progress != nullptr) {
                *opts.progress << "[sweep] " << count << "/" << total << " cells\n" << std::flush;
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(opts.workers, todo.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return grid;
}

std::string grid_to_csv(const SweepGrid& grid) {
    std::string out = csv::join_row(
        {"weight", "eps2", "regime", "intra1", "intra2", "intra3", "inter12", "inter13", "inter23"});
    for (const auto& c : grid.cells) {
        std::vector<std::string> f{csv::format_double(c.weight), csv::format_double(c.eps2),
                                   std::to_string(static_cast<int>(c.label))};
        for (double v : c.mean_errors.intra) f.push_back(csv::format_double(v));
        for (double v : c.mean_errors.inter) f.push_back(csv::format_double(v));
        out += csv::join_row(f);
    }
    return out;
}

void grid_export(const SweepGrid& grid, const std::filesystem::path& path) {
    csv::write_file(path, grid_to_csv(grid));
}

std::vector<GridRow> grid_import(const std::filesystem::path& path) {
    const csv::Table t = csv::read_file(path);
    if (t.header.size() != 9 || t.header[0] != "weight" || t.header[2] != "regime") {
        throw IoError("not a sweep grid file: " + path.string());
    }
    std::vector<GridRow> rows;
    for (const auto& r : t.rows) {
        if (r.size() != 9) throw IoError("malformed grid row in " + path.string());
        GridRow g;
        try {
            g.weight = std::stod(r[0]);
            g.eps2 = std::stod(r[1]);
            const auto label = regime_from_code(std::stoi(r[2]));
            if (!label) throw IoError("unknown regime code in " + path.string());
            g.label = *label;
            for (std::size_t l = 0; l < kLayers; ++l) {
                g.errors.intra[l] = std::stod(r[3 + l]);
                g.errors.inter[l] = std::stod(r[6 + l]);
            }
        } catch (const std::logic_error&) {
            throw IoError("malformed number in " + path.string());
        }
        rows.push_back(g);
    }
    return rows;
}

}  // namespace hjbsync
