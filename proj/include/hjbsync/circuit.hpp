#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hjbsync/dynamics.hpp"
#include "hjbsync/single_network.hpp"

namespace hjbsync {

// Component values of one oscillator cell and its controller bridge.
// Units: farads, ohms, volts.
struct CircuitComponents {
    double c1 = 10e-9;
    double c2 = 10e-9;
    double c3 = 10e-9;
    double r1 = 10e3;
    double r2 = 10e3;
    double r3 = 10e3;
    double r4 = 10e3;
    double r5 = 10e3;
    double r6 = 27.8e3;
    double r7 = 10e3;
    double r8 = 10e3;
    double r9 = 25e3;
    double r10 = 2.22e3;
    double r11 = 10e3;
    // controller bridge; defaults give theta = 0.2
    double r12 = 50e3;
    double r13 = 10e3;
    double r14 = 50e3;
    double r15 = 10e3;
    double r_in = 10e3;
    double xi = 1e4;  // V = xi * X
    // The multiplier output is V1*V3 / multiplier_scale. Equal to xi, this makes
    // V = xi X an exact change of variables; 1 reproduces the bare product.
    double multiplier_scale = 1e4;
    double up = 15.0;
    double un = -15.0;
    bool clamp = false;

    void validate() const;
    // Controller resistor set for the lambda = 5, eta = 10 build (theta = 0.5).
    static CircuitComponents theta_half();
};

struct CircuitParams {
    double a_eff = 0.0;
    double b_eff = 0.0;
    double c_eff = 0.0;
    // coefficients of the remaining terms (1/s): -V2 and -V3 in eq. 1, V1 in eq. 2
    double k_v2 = 0.0;
    double k_v3 = 0.0;
    double k_v1 = 0.0;
    // coefficient of V1*V3 in eq. 3 after the multiplier scale (1/(V s))
    double k_product = 0.0;
    double rate_scale = 0.0;  // 1/(xi C1 R2), 1/s
    double time_scale = 0.0;  // seconds per dimensionless time unit

    // a, b, c per dimensionless time unit.
    [[nodiscard]] RosslerParams normalized() const;
};

CircuitParams derive_params(const CircuitComponents& cc);

struct GainReport {
    double prefactor = 0.0;    // 1/(xi Rin C1)
    double g_forward = 0.0;    // (R15/R12)(R12+R13)/(R14+R15)
    double g_feedback = 0.0;   // R13/R12
    double theta_eff = 0.0;    // g_feedback * prefactor
    bool balanced = false;     // g_forward == g_feedback within 1e-9
    std::optional<std::string> warning;
};

GainReport derive_gain(const CircuitComponents& cc);

using CircuitState = Vec3;  // (Vx1, Vx2, Vx3) in volts

// dV/dt in volts per second for one cell with controller input chi.
Vec3 circuit_derivative(const CircuitState& v, const CircuitComponents& cc, const Vec3& chi);

// chi_j = sum_{k != j} prefactor (g_fwd V_k - g_fb V_j), per component.
void circuit_controls(std::span<const CircuitState> v, const CircuitComponents& cc,
                      std::span<Vec3> out);

struct CircuitRun {
    std::vector<double> t;         // seconds
    std::vector<std::vector<CircuitState>> states;
    SyncErrorSeries error;         // on V / xi, dimensionless
    std::optional<double> time_to_sync;  // dimensionless time units
};

struct CircuitRunOptions {
    std::size_t nodes = 3;
    bool controlled = true;
    double t_end = 200.0;  // dimensionless units; converted with time_scale
    double h = 0.01;
    std::size_t sample_every = 10;
    std::uint64_t seed = 1;
    IcRange ic_range = default_ic_range();  // X0, so V0 = xi X0
    double sync_threshold = 1e-3;
};

CircuitRun run_circuit_network(const CircuitComponents& cc, const CircuitRunOptions& opts);

struct EquivalenceOptions {
    double horizon = 10.0;  // dimensionless time units
    double h = 0.001;
    std::size_t nodes = 1;
    bool controlled = false;
    std::uint64_t seed = 1;
    IcRange ic_range = default_ic_range();
    // Dimensionless model parameters; unset means (0.36, 0.4, 4.5).
    std::optional<RosslerParams> reference;
    // Gain used on the dimensionless side; unset means theta_eff * time_scale.
    std::optional<double> reference_theta;
};

struct EquivalenceReport {
    // max_t ||V/xi - X|| / max_t ||X||
    double max_relative_deviation = 0.0;
    double final_relative_deviation = 0.0;
    CircuitParams derived;
};

EquivalenceReport equivalence_check(const CircuitComponents& cc, const EquivalenceOptions& opts = {});

}  // namespace hjbsync
