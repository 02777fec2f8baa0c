#include "hjbsync/control.hpp"

#include <cmath>
#include <string>

#include "hjbsync/errors.hpp"

namespace hjbsync {

ControlWeights ControlWeights::uniform(double lambda, double eta) {
    ControlWeights w;
    w.lambda = {lambda, lambda, lambda};
    w.eta = {eta, eta, eta};
    return w;
}

Vec3 ControlWeights::theta() const {
    return {lambda[0] / eta[0], lambda[1] / eta[1], lambda[2] / eta[2]};
}

Vec3 ControlWeights::state_penalty() const { return alpha ? *alpha : theta(); }

void ControlWeights::validate() const {
    for (std::size_t k = 0; k < 3; ++k) {
        if (!(lambda[k] > 0.0) || !std::isfinite(lambda[k])) {
            throw ConfigError("lambda must be positive and finite (component " +
                              std::to_string(k + 1) + ")");
        }
        if (!(eta[k] > 0.0) || !std::isfinite(eta[k])) {
            throw ConfigError("eta must be positive and finite (component " +
                              std::to_string(k + 1) + ")");
        }
        if (alpha && (!((*alpha)[k] >= 0.0) || !std::isfinite((*alpha)[k]))) {
            throw ConfigError("alpha must be nonnegative and finite");
        }
    }
}

Coupling Coupling::uniform(const Vec3& theta) {
    if (!theta.finite()) {
        throw ConfigError("coupling gain must be finite");
    }
    Coupling c;
    c.uniform_ = theta;
    return c;
}

Coupling Coupling::table(std::size_t n, std::vector<Vec3> gains) {
    if (n == 0 || gains.size() != n * n) {
        throw ConfigError("coupling table must be n*n entries");
    }
    for (const auto& g : gains) {
        if (!g.finite()) {
            throw ConfigError("coupling gain must be finite");
        }
    }
    Coupling c;
    c.n_ = n;
    c.table_ = std::move(gains);
    return c;
}

Vec3 Coupling::gain(std::size_t i, std::size_t j) const {
    if (table_.empty()) {
        return uniform_;
    }
    return table_.at(i * n_ + j);
}

Vec3 pair_control(const PairError& e, const ControlWeights& w) {
    w.validate();
    return -hadamard(w.theta(), e);
}

Vec3 node_control(std::size_t i, std::span<const OscState> states, const Coupling& coupling) {
    if (i >= states.size()) {
        throw std::out_of_range("node index " + std::to_string(i) + " out of range");
    }
    Vec3 u;
    for (std::size_t j = 0; j < states.size(); ++j) {
        if (j != i) {
            u -= hadamard(coupling.gain(i, j), states[i] - states[j]);
        }
    }
    return u;
}

void node_controls(std::span<const OscState> states, const Coupling& coupling,
                   std::span<Vec3> out) {
    const std::size_t n = states.size();
    if (!coupling.is_uniform()) {
        if (coupling.table_size() != n) {
            throw ConfigError("coupling table size does not match node count");
        }
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = node_control(i, states, coupling);
        }
        return;
    }
    // sum_j (x_i - x_j) = n x_i - sum_j x_j
    Vec3 total;
    for (const auto& s : states) {
        total += s;
    }
    const Vec3& theta = coupling.uniform_gain();
    const double nd = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = -hadamard(theta, nd * states[i] - total);
    }
}

double cost_increment(std::span<const PairError> errors, std::span<const Vec3> controls,
                      const ControlWeights& w) {
    w.validate();
    if (errors.size() != controls.size()) {
        throw std::invalid_argument("errors and controls differ in length");
    }
    const Vec3 alpha = w.state_penalty();
    double omega = 0.0;
    for (std::size_t p = 0; p < errors.size(); ++p) {
        for (std::size_t k = 0; k < 3; ++k) {
            omega += alpha[k] * errors[p][k] * errors[p][k] +
                     w.eta[k] * controls[p][k] * controls[p][k];
        }
    }
    return omega;
}

namespace {

// sum over ordered pairs i != j of (x_i^k - x_j^k)^2, per component, computed
// as 2n * sum (x_i - mean)^2 so it stays nonnegative.
Vec3 ordered_pair_square_sums(std::span<const OscState> states) {
    const double n = static_cast<double>(states.size());
    Vec3 mean;
    for (const auto& s : states) {
        mean += s;
    }
    mean *= 1.0 / n;
    Vec3 acc;
    for (const auto& s : states) {
        const Vec3 d = s - mean;
        acc += hadamard(d, d);
    }
    return (2.0 * n) * acc;
}

}  // namespace

double network_cost_rate(std::span<const OscState> states, const ControlWeights& w,
                         const Coupling& coupling) {
    const Vec3 alpha = w.state_penalty();
    if (coupling.is_uniform()) {
        const Vec3 sq = ordered_pair_square_sums(states);
        const Vec3& theta = coupling.uniform_gain();
        double omega = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            omega += (alpha[k] + w.eta[k] * theta[k] * theta[k]) * sq[k];
        }
        return omega;
    }
    double omega = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t j = 0; j < states.size(); ++j) {
            if (i == j) continue;
            const Vec3 e = states[i] - states[j];
            const Vec3 theta = coupling.gain(i, j);
            for (std::size_t k = 0; k < 3; ++k) {
                const double u = theta[k] * e[k];
                omega += alpha[k] * e[k] * e[k] + w.eta[k] * u * u;
            }
        }
    }
    return omega;
}

double lyapunov_value(std::span<const PairError> errors, const ControlWeights& w) {
    double v = 0.0;
    for (const auto& e : errors) {
        for (std::size_t k = 0; k < 3; ++k) {
            v += w.lambda[k] * e[k] * e[k];
        }
    }
    return v;
}

double network_lyapunov_value(std::span<const OscState> states, const ControlWeights& w) {
    const Vec3 sq = ordered_pair_square_sums(states);
    return w.lambda[0] * sq[0] + w.lambda[1] * sq[1] + w.lambda[2] * sq[2];
}

void PerformanceAccumulator::add_sample(double omega, double h) {
    if (started_) {
        j_ += 0.5 * h * (last_ + omega);
    }
    last_ = omega;
    started_ = true;
}

}  // namespace hjbsync
