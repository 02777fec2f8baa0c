#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hjbsync/vec3.hpp"

namespace hjbsync {

// Weights of the quadratic cost, one entry per state component.
//
// The feedback gain is theta = lambda / eta. The state penalty alpha defaults
// to lambda / eta as well; a stated relation alpha = -lambda/eta would make the
// cost indefinite, so only its magnitude is used unless alpha is set.
struct ControlWeights {
    Vec3 lambda{1.0, 1.0, 1.0};
    Vec3 eta{10.0, 10.0, 10.0};
    std::optional<Vec3> alpha;

    static ControlWeights uniform(double lambda, double eta);

    [[nodiscard]] Vec3 theta() const;
    [[nodiscard]] Vec3 state_penalty() const;
    void validate() const;
};

// Per-pair feedback gains. Either one gain vector shared by all pairs or a
// dense n x n table (diagonal ignored).
class Coupling {
public:
    static Coupling uniform(const Vec3& theta);
    static Coupling from_weights(const ControlWeights& w) { return uniform(w.theta()); }
    static Coupling table(std::size_t n, std::vector<Vec3> gains);

    [[nodiscard]] bool is_uniform() const { return table_.empty(); }
    [[nodiscard]] const Vec3& uniform_gain() const { return uniform_; }
    [[nodiscard]] Vec3 gain(std::size_t i, std::size_t j) const;
    [[nodiscard]] std::size_t table_size() const { return n_; }

private:
    Vec3 uniform_{0.1, 0.1, 0.1};
    std::size_t n_ = 0;
    std::vector<Vec3> table_;
};

// u_ij = -theta * e_ij, componentwise.
Vec3 pair_control(const PairError& e, const ControlWeights& w);

// u_i = -sum_{j != i} theta_ij (x_i - x_j).
Vec3 node_control(std::size_t i, std::span<const OscState> states, const Coupling& coupling);

// Fills out[i] = node_control(i, ...) for every node; O(n) for uniform gains.
void node_controls(std::span<const OscState> states, const Coupling& coupling,
                   std::span<Vec3> out);

// Omega = sum_k sum_pairs (alpha e^2 + eta u^2) over the supplied pairs.
double cost_increment(std::span<const PairError> errors, std::span<const Vec3> controls,
                      const ControlWeights& w);

// Omega over all ordered pairs of a network under the pairwise optimal control.
double network_cost_rate(std::span<const OscState> states, const ControlWeights& w,
                         const Coupling& coupling);

// V = sum_pairs sum_k lambda e^2.
double lyapunov_value(std::span<const PairError> errors, const ControlWeights& w);

// V over all ordered pairs of a network.
double network_lyapunov_value(std::span<const OscState> states, const ControlWeights& w);

// Trapezoid-rule integral of Omega over a run.
class PerformanceAccumulator {
public:
    void add_sample(double omega, double h);

    [[nodiscard]] double value() const { return j_; }
    [[nodiscard]] double last_integrand() const { return last_; }

private:
    double j_ = 0.0;
    double last_ = 0.0;
    bool started_ = false;
};

}  // namespace hjbsync
