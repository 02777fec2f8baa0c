#include "hjbsync/circuit.hpp"

#include <algorithm>
#include <cmath>

#include "hjbsync/control.hpp"
#include "hjbsync/errors.hpp"
#include "hjbsync/rk4.hpp"

namespace hjbsync {

void CircuitComponents::validate() const {
    for (double v : {c1, c2, c3, r1, r2, r3, r4, r5, r6, r7, r8, r9, r10, r11, r12, r14, r15, r_in,
                     xi, multiplier_scale, up}) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError("circuit component values must be positive and finite");
        }
    }
    // R13 = 0 disconnects the controller and is allowed.
    if (!(r13 >= 0.0) || !std::isfinite(r13)) {
        throw ConfigError("R13 must be nonnegative and finite");
    }
    if (!(un < 0.0) || !std::isfinite(un)) {
        throw ConfigError("negative rail must be below zero");
    }
}

CircuitComponents CircuitComponents::theta_half() {
    CircuitComponents cc;
    cc.r12 = 20e3;
    cc.r13 = 10e3;
    cc.r14 = 20e3;
    cc.r15 = 10e3;
    cc.r_in = 10e3;
    return cc;
}

RosslerParams CircuitParams::normalized() const {
    return {a_eff * time_scale, b_eff * time_scale, c_eff * time_scale};
}

CircuitParams derive_params(const CircuitComponents& cc) {
    cc.validate();
    CircuitParams p;
    p.a_eff = cc.r8 / (cc.xi * cc.c2 * cc.r6 * cc.r7);
    p.b_eff = cc.r4 / (cc.xi * cc.c3 * cc.r3 * cc.r9);
    p.c_eff = 1.0 / (cc.xi * cc.c3 * cc.r10);
    p.k_v2 = 1.0 / (cc.xi * cc.c1 * cc.r2);
    p.k_v3 = 1.0 / (cc.xi * cc.c1 * cc.r1);
    p.k_v1 = cc.r4 / (cc.xi * cc.c2 * cc.r3 * cc.r5);
    p.k_product = cc.r4 / (cc.xi * cc.c3 * cc.r3 * cc.r11) / cc.multiplier_scale;
    p.rate_scale = p.k_v2;
    p.time_scale = 1.0 / p.rate_scale;
    return p;
}

GainReport derive_gain(const CircuitComponents& cc) {
    cc.validate();
    GainReport g;
    g.prefactor = 1.0 / (cc.xi * cc.r_in * cc.c1);
    g.g_forward = (cc.r15 / cc.r12) * ((cc.r12 + cc.r13) / (cc.r14 + cc.r15));
    g.g_feedback = cc.r13 / cc.r12;
    g.theta_eff = g.g_feedback * g.prefactor;
    g.balanced = std::abs(g.g_forward - g.g_feedback) <= 1e-9;
    if (!g.balanced) {
        g.warning = "unbalanced controller bridge (forward gain " + std::to_string(g.g_forward) +
                    " != feedback gain " + std::to_string(g.g_feedback) +
                    "): controller is not purely diffusive";
    }
    return g;
}

namespace {

Vec3 clamp_to_rails(const Vec3& v, const CircuitComponents& cc) {
    return {std::clamp(v[0], cc.un, cc.up), std::clamp(v[1], cc.un, cc.up),
            std::clamp(v[2], cc.un, cc.up)};
}

Vec3 cell_rhs(const CircuitState& v_in, const CircuitComponents& cc, const Vec3& chi) {
    const Vec3 v = cc.clamp ? clamp_to_rails(v_in, cc) : v_in;
    const double product = v[0] / cc.multiplier_scale;
    return {
        (1.0 / (cc.xi * cc.c1)) * (-v[1] / cc.r2 - v[2] / cc.r1) + chi[0],
        (1.0 / (cc.xi * cc.c2)) * ((cc.r4 / (cc.r3 * cc.r5)) * v[0] + (cc.r8 / (cc.r6 * cc.r7)) * v[1]) +
            chi[1],
        (1.0 / (cc.xi * cc.c3)) *
                ((cc.r4 / (cc.r3 * cc.r9)) * v[0] + v[2] * ((cc.r4 / (cc.r3 * cc.r11)) * product - 1.0 / cc.r10)) +
            chi[2],
    };
}

}  // namespace

Vec3 circuit_derivative(const CircuitState& v, const CircuitComponents& cc, const Vec3& chi) {
    if (!v.finite() || !chi.finite()) {
        throw InvalidStateError("circuit voltages and inputs must be finite");
    }
    return cell_rhs(v, cc, chi);
}

void circuit_controls(std::span<const CircuitState> v, const CircuitComponents& cc,
                      std::span<Vec3> out) {
    const GainReport g = derive_gain(cc);
    const double fwd = g.prefactor * g.g_forward;
    const double fb = g.prefactor * g.g_feedback;
    for (std::size_t j = 0; j < v.size(); ++j) {
        Vec3 chi;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (k != j) chi += fwd * v[k] - fb * v[j];
        }
        out[j] = chi;
    }
}

namespace {

// Circuit network integrated in seconds; states clamped after each step if enabled.
class CircuitIntegrator {
public:
    CircuitIntegrator(const CircuitComponents& cc, std::size_t nodes, bool controlled)
        : cc_(cc), controlled_(controlled), stepper_(nodes), chi_(nodes) {}

    void step(double t, double h_seconds, std::vector<Vec3>& v) {
        stepper_.step(t, h_seconds, v, [this](double, const std::vector<Vec3>& y, std::vector<Vec3>& dy) {
            if (controlled_) {
                circuit_controls(y, cc_, chi_);
            }
            for (std::size_t i = 0; i < y.size(); ++i) {
                dy[i] = cell_rhs(y[i], cc_, controlled_ ? chi_[i] : Vec3{});
            }
        });
        if (cc_.clamp) {
            for (auto& s : v) s = clamp_to_rails(s, cc_);
        }
    }

private:
    const CircuitComponents& cc_;
    bool controlled_;
    Rk4Stepper stepper_;
    std::vector<Vec3> chi_;
};

std::vector<Vec3> scaled(std::span<const Vec3> v, double s) {
    std::vector<Vec3> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = s * v[i];
    return out;
}

}  // namespace

CircuitRun run_circuit_network(const CircuitComponents& cc, const CircuitRunOptions& opts) {
    cc.validate();
    if (opts.nodes < 2) throw ConfigError("circuit network needs at least 2 nodes");
    RunOptions ro{opts.t_end, opts.h, opts.sample_every, true, opts.sync_threshold};
    ro.validate();

    const CircuitParams p = derive_params(cc);
    const double h_s = opts.h * p.time_scale;
    std::vector<Vec3> v = scaled(draw_states(opts.nodes, opts.ic_range, opts.seed), cc.xi);
    CircuitIntegrator integ(cc, opts.nodes, opts.controlled);

    CircuitRun run;
    auto sample = [&](std::size_t step) {
        const double t_dimless = static_cast<double>(step) * opts.h;
        run.t.push_back(t_dimless * p.time_scale);
        run.states.push_back(v);
        run.error.t.push_back(t_dimless);
        run.error.e.push_back(sync_error(scaled(v, 1.0 / cc.xi)));
    };
    sample(0);
    const std::size_t steps = ro.steps();
    for (std::size_t step = 1; step <= steps; ++step) {
        integ.step(static_cast<double>(step - 1) * h_s, h_s, v);
        if (const auto bad = first_non_finite(v); bad != v.size()) {
            throw DivergenceError(static_cast<double>(step) * opts.h, bad);
        }
        if (step % opts.sample_every == 0) sample(step);
    }
    run.time_to_sync = time_to_sync(run.error, opts.sync_threshold);
    return run;
}

EquivalenceReport equivalence_check(const CircuitComponents& cc, const EquivalenceOptions& opts) {
    cc.validate();
    if (!(opts.h > 0.0) || !(opts.horizon > 0.0)) {
        throw ConfigError("equivalence check needs positive h and horizon");
    }
    if (opts.nodes < 1 || (opts.controlled && opts.nodes < 2)) {
        throw ConfigError("equivalence check needs >= 1 node (>= 2 when controlled)");
    }
    EquivalenceReport report;
    report.derived = derive_params(cc);
    const RosslerParams derived = report.derived.normalized();
    const RosslerParams target{0.36, 0.4, 4.5};
    for (auto [got, want] : {std::pair{derived.a, target.a}, {derived.b, target.b}, {derived.c, target.c}}) {
        if (std::abs(got - want) > 0.01 * std::abs(want)) {
            throw ConfigError("derived circuit parameters are more than 1% from (0.36, 0.4, 4.5)");
        }
    }
    const RosslerParams ref = opts.reference.value_or(target);
    const double theta = opts.reference_theta.value_or(derive_gain(cc).theta_eff * report.derived.time_scale);

    const auto x0 = draw_states(opts.nodes, opts.ic_range, opts.seed);
    std::vector<Vec3> x = x0;
    std::vector<Vec3> v = scaled(x0, cc.xi);
    const Coupling coupling = Coupling::uniform({theta, theta, theta});
    Rk4Stepper stepper(opts.nodes);
    auto rhs = [&](double, const std::vector<Vec3>& y, std::vector<Vec3>& dy) {
        network_rhs(y, ref, opts.controlled ? &coupling : nullptr, dy);
    };
    CircuitIntegrator integ(cc, opts.nodes, opts.controlled);
    const double h_s = opts.h * report.derived.time_scale;

    const auto steps = static_cast<std::size_t>(std::llround(opts.horizon / opts.h));
    double max_dev = 0.0;
    double max_norm = 0.0;
    double last_dev = 0.0;
    auto compare = [&] {
        double dev = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            dev = std::max(dev, ((1.0 / cc.xi) * v[i] - x[i]).norm());
            max_norm = std::max(max_norm, x[i].norm());
        }
        max_dev = std::max(max_dev, dev);
        last_dev = dev;
    };
    compare();
    for (std::size_t step = 1; step <= steps; ++step) {
        stepper.step(static_cast<double>(step - 1) * opts.h, opts.h, x, rhs);
        integ.step(static_cast<double>(step - 1) * h_s, h_s, v);
        if (first_non_finite(x) != x.size() || first_non_finite(v) != v.size()) {
            throw DivergenceError(static_cast<double>(step) * opts.h, 0);
        }
        compare();
    }
    report.max_relative_deviation = max_dev / max_norm;
    report.final_relative_deviation = last_dev / max_norm;
    return report;
}

}  // namespace hjbsync
