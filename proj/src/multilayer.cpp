#include "hjbsync/multilayer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hjbsync/errors.hpp"
#include "hjbsync/rk4.hpp"

namespace hjbsync {

void MultilayerConfig::validate() const {
    if (n < 1) {
        throw ConfigError("each layer needs at least 1 node");
    }
    params.validate();
    for (const auto& w : weights) {
        w.validate();
    }
    for (double e : eps) {
        if (!(e >= 0.0) || !std::isfinite(e)) {
            throw ConfigError("inter-layer coupling eps must be finite and >= 0");
        }
    }
    validate_ic_range(ic_range);
}

NetworkConfig MultilayerConfig::layer_config(std::size_t layer) const {
    NetworkConfig c;
    c.n = n;
    c.params = params;
    c.weights = weights.at(layer);
    c.control_enabled = control_enabled;
    c.seed = layer_seed(seed, layer);
    c.ic_range = ic_range;
    return c;
}

std::uint64_t layer_seed(std::uint64_t seed, std::size_t layer) {
    return derive_seed(seed, {0x6c61796572ULL, layer});
}

MultilayerState init_multilayer(const MultilayerConfig& cfg) {
    cfg.validate();
    MultilayerState ms;
    ms.n = cfg.n;
    ms.nodes.reserve(kLayers * cfg.n);
    for (std::size_t l = 0; l < kLayers; ++l) {
        const auto layer = draw_states(cfg.n, cfg.ic_range, layer_seed(cfg.seed, l));
        ms.nodes.insert(ms.nodes.end(), layer.begin(), layer.end());
    }
    return ms;
}

namespace {

std::array<Coupling, kLayers> layer_couplings(const MultilayerConfig& cfg) {
    return {Coupling::from_weights(cfg.weights[0]), Coupling::from_weights(cfg.weights[1]),
            Coupling::from_weights(cfg.weights[2])};
}

}  // namespace

void multilayer_rhs(std::span<const OscState> nodes, std::size_t n, const MultilayerConfig& cfg,
                    const std::array<Coupling, kLayers>& couplings, std::span<Vec3> out) {
    for (std::size_t l = 0; l < kLayers; ++l) {
        network_rhs(nodes.subspan(l * n, n), cfg.params,
                    cfg.control_enabled ? &couplings[l] : nullptr, out.subspan(l * n, n));
    }
    const std::size_t components = cfg.couple_all_components ? 3 : 1;
    for (std::size_t l = 0; l < kLayers; ++l) {
        const double eps = cfg.eps[l];
        if (eps == 0.0) continue;
        const std::size_t m1 = ((l + 1) % kLayers) * n;
        const std::size_t m2 = ((l + 2) % kLayers) * n;
        for (std::size_t i = 0; i < n; ++i) {
            const OscState& own = nodes[l * n + i];
            for (std::size_t k = 0; k < components; ++k) {
                out[l * n + i][k] += eps * (nodes[m1 + i][k] + nodes[m2 + i][k] - 2.0 * own[k]);
            }
        }
    }
}

std::vector<Vec3> multilayer_derivative(const MultilayerState& ms, const MultilayerConfig& cfg) {
    cfg.validate();
    if (ms.nodes.size() != kLayers * ms.n || ms.n != cfg.n) {
        throw ConfigError("multilayer state size does not match configuration");
    }
    if (const auto bad = first_non_finite(ms.nodes); bad != ms.nodes.size()) {
        throw DivergenceError(ms.t, bad);
    }
    std::vector<Vec3> out(ms.nodes.size());
    multilayer_rhs(ms.nodes, ms.n, cfg, layer_couplings(cfg), out);
    return out;
}

CombinedError combined_error(const MultilayerState& ms) {
    CombinedError ce;
    ce.xi.resize(ms.n);
    ce.g.resize(ms.n);
    const auto x = ms.layer(0);
    const auto y = ms.layer(1);
    const auto z = ms.layer(2);
    for (std::size_t i = 0; i < ms.n; ++i) {
        ce.xi[i] = x[i] + y[i] - 2.0 * z[i];
        ce.g[i] = x[i][2] * x[i][0] + y[i][2] * y[i][0] - 2.0 * z[i][2] * z[i][0];
    }
    return ce;
}

namespace {

// The combined-error reduction assumes one eps and one gain shared by all layers.
void require_reduced_setting(const MultilayerConfig& cfg) {
    if (cfg.eps[0] != cfg.eps[1] || cfg.eps[1] != cfg.eps[2]) {
        throw ConfigError("combined-error analysis requires eps1 = eps2 = eps3");
    }
    const Vec3 theta = cfg.weights[0].theta();
    if (cfg.weights[1].theta() != theta || cfg.weights[2].theta() != theta) {
        throw ConfigError("combined-error analysis requires identical gains in all layers");
    }
}

}  // namespace

std::vector<Vec3> combined_error_rhs(const MultilayerState& ms, const RosslerParams& p,
                                     const Vec3& theta, double eps) {
    const CombinedError ce = combined_error(ms);
    const std::size_t n = ms.n;
    Vec3 total;
    for (const auto& xi : ce.xi) total += xi;
    const double nd = static_cast<double>(n);
    std::vector<Vec3> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& xi = ce.xi[i];
        const Vec3 diffusion = hadamard(theta, nd * xi - total);
        out[i] = {
            -xi[1] - xi[2] - diffusion[0] - 3.0 * eps * xi[0],
            xi[0] + p.a * xi[1] - diffusion[1],
            p.b * xi[0] - p.c * xi[2] - diffusion[2] + ce.g[i],
        };
    }
    return out;
}

std::vector<double> combined_error_residual(const MultilayerState& ms, const MultilayerConfig& cfg,
                                            double h, DifferenceStencil stencil) {
    cfg.validate();
    require_reduced_setting(cfg);
    if (!(h > 0.0)) {
        throw ConfigError("difference step must be positive");
    }
    const auto couplings = layer_couplings(cfg);
    auto rhs = [&](double, const std::vector<Vec3>& y, std::vector<Vec3>& dy) {
        multilayer_rhs(y, ms.n, cfg, couplings, dy);
    };
    Rk4Stepper stepper(ms.nodes.size());
    // xi at t + offset * h for offsets reached by repeated +-h steps
    auto xi_at = [&](int offset) {
        MultilayerState s = ms;
        const double step = offset > 0 ? h : -h;
        for (int k = 0; k < std::abs(offset); ++k) {
            stepper.step(s.t, step, s.nodes, rhs);
            s.t += step;
        }
        return combined_error(s).xi;
    };

    std::vector<Vec3> fd(ms.n);
    if (stencil == DifferenceStencil::ThreePoint) {
        const auto fwd = xi_at(1);
        const auto bwd = xi_at(-1);
        for (std::size_t i = 0; i < ms.n; ++i) fd[i] = (1.0 / (2.0 * h)) * (fwd[i] - bwd[i]);
    } else {
        const auto p1 = xi_at(1);
        const auto p2 = xi_at(2);
        const auto m1 = xi_at(-1);
        const auto m2 = xi_at(-2);
        for (std::size_t i = 0; i < ms.n; ++i) {
            fd[i] = (1.0 / (12.0 * h)) * (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i]));
        }
    }

    const auto exact = combined_error_rhs(ms, cfg.params, cfg.weights[0].theta(), cfg.eps[0]);
    std::vector<double> residual(ms.n);
    for (std::size_t i = 0; i < ms.n; ++i) {
        const Vec3 d = fd[i] - exact[i];
        residual[i] = std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
    }
    return residual;
}

namespace {

std::array<double, 3> q_diagonal(const RosslerParams& p, double eps, double bound) {
    return {3.0 * eps - bound / 2.0, -p.a, p.c / p.b - bound / 2.0};
}

}  // namespace

StabilityMonitor stability_monitor(const MultilayerState& ms, const MultilayerConfig& cfg,
                                   double bound) {
    if (cfg.eps[0] != cfg.eps[1] || cfg.eps[1] != cfg.eps[2]) {
        throw ConfigError("stability monitor requires eps1 = eps2 = eps3");
    }
    if (!(bound > 0.0) || !std::isfinite(bound)) {
        throw ConfigError("bound L must be positive and finite");
    }
    StabilityMonitor m;
    m.bound = bound;
    m.q_diag = q_diagonal(cfg.params, cfg.eps[0], bound);
    m.lambda_min = *std::min_element(m.q_diag.begin(), m.q_diag.end());
    const CombinedError ce = combined_error(ms);
    m.v.resize(ms.n);
    m.w.resize(ms.n);
    for (std::size_t i = 0; i < ms.n; ++i) {
        const Vec3& xi = ce.xi[i];
        m.v[i] = 0.5 * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] / cfg.params.b);
        m.w[i] = -m.lambda_min * xi.squared_norm();
    }
    return m;
}

namespace {

constexpr double kXiFloor = 1e-9;

// Returns the updated running maximum; valid is set when a sample qualified.
double fold_bound(const MultilayerState& ms, const RosslerParams& p, double current, bool& valid) {
    const CombinedError ce = combined_error(ms);
    for (std::size_t i = 0; i < ms.n; ++i) {
        const double x1 = ce.xi[i][0];
        if (std::abs(x1) > kXiFloor) {
            current = std::max(current, std::abs(ce.g[i] / (p.b * x1)));
            valid = true;
        }
    }
    return current;
}

}  // namespace

double estimate_bound(std::span<const MultilayerState> samples, const RosslerParams& p) {
    bool valid = false;
    double bound = 0.0;
    for (const auto& s : samples) {
        bound = fold_bound(s, p, bound, valid);
    }
    if (!valid) {
        throw UndefinedError("no samples with |xi1| above floor; L is undefined");
    }
    return bound;
}

double inter_layer_error(std::span<const OscState> a, std::span<const OscState> b) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("layers must be nonempty and equal in size");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += (a[i] - b[i]).norm();
    }
    return sum / static_cast<double>(a.size());
}

namespace {

double intra_error(std::span<const OscState> layer) {
    return layer.size() < 2 ? 0.0 : sync_error(layer);
}

}  // namespace

void append_layer_errors(const MultilayerState& ms, LayerErrorSeries& series) {
    series.t.push_back(ms.t);
    for (std::size_t l = 0; l < kLayers; ++l) {
        series.intra[l].push_back(intra_error(ms.layer(l)));
    }
    series.inter[0].push_back(inter_layer_error(ms.layer(0), ms.layer(1)));
    series.inter[1].push_back(inter_layer_error(ms.layer(0), ms.layer(2)));
    series.inter[2].push_back(inter_layer_error(ms.layer(1), ms.layer(2)));
}

MultilayerRunResult run_multilayer(const MultilayerConfig& cfg, const RunOptions& opts,
                                   std::optional<double> monitor_bound) {
    cfg.validate();
    opts.validate();

    MultilayerRunResult r;
    r.n = cfg.n;
    MultilayerState ms = init_multilayer(cfg);
    r.bound = TrajectoryBound(ms.nodes.size());
    const auto couplings = layer_couplings(cfg);
    const bool equal_eps = cfg.eps[0] == cfg.eps[1] && cfg.eps[1] == cfg.eps[2];

    std::vector<double> xi_sq_total;
    MonitorSeries mon;
    bool bound_valid = false;
    double bound = 0.0;

    auto sample = [&] {
        append_layer_errors(ms, r.errors);
        if (opts.keep_states) r.samples.push_back(ms);
        bound = fold_bound(ms, cfg.params, bound, bound_valid);
        if (equal_eps) {
            const CombinedError ce = combined_error(ms);
            double v = 0.0;
            double sq = 0.0;
            for (const auto& xi : ce.xi) {
                v += 0.5 * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] / cfg.params.b);
                sq += xi.squared_norm();
            }
            mon.t.push_back(ms.t);
            mon.v_total.push_back(v);
            xi_sq_total.push_back(sq);
        }
    };

    Rk4Stepper stepper(ms.nodes.size());
    auto rhs = [&](double, const std::vector<Vec3>& y, std::vector<Vec3>& dy) {
        multilayer_rhs(y, cfg.n, cfg, couplings, dy);
    };

    const std::size_t steps = opts.steps();
    r.bound.observe(ms.nodes);
    sample();
    for (std::size_t step = 1; step <= steps; ++step) {
        stepper.step(ms.t, opts.h, ms.nodes, rhs);
        ms.t = static_cast<double>(step) * opts.h;
        if (const auto bad = first_non_finite(ms.nodes); bad != ms.nodes.size()) {
            throw DivergenceError(ms.t, bad);
        }
        r.bound.observe(ms.nodes);
        if (step % opts.sample_every == 0) sample();
    }

    if (bound_valid) r.bound_estimate = bound;
    if (equal_eps) {
        const std::optional<double> l = monitor_bound ? monitor_bound : r.bound_estimate;
        if (l && *l > 0.0) {
            const auto q = q_diagonal(cfg.params, cfg.eps[0], *l);
            const double lambda_min = *std::min_element(q.begin(), q.end());
            for (std::size_t k = 0; k < xi_sq_total.size(); ++k) {
                mon.w_total.push_back(-lambda_min * xi_sq_total[k]);
                if (k > 0) {
                    mon.w_integral +=
                        0.5 * (mon.t[k] - mon.t[k - 1]) * (mon.w_total[k] + mon.w_total[k - 1]);
                }
            }
        }
        r.monitor = std::move(mon);
    }
    r.final_state = std::move(ms);
    return r;
}

}  // namespace hjbsync
