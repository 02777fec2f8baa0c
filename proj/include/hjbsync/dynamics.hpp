#pragma once

#include <span>
#include <vector>

#include "hjbsync/vec3.hpp"

namespace hjbsync {

// Constants of the Rössler node. The third equation uses b*x1 (not the
// classical constant b); the error dynamics below depend on that form.
struct RosslerParams {
    double a = 0.36;
    double b = 0.4;
    double c = 4.5;

    void validate() const;
};

namespace detail {

// Unchecked field for integrator inner loops; callers detect divergence per step.
inline Vec3 rossler_rhs(const OscState& s, const RosslerParams& p) {
    return {-s[1] - s[2], s[0] + p.a * s[1], p.b * s[0] + s[2] * (s[0] - p.c)};
}

}  // namespace detail

// x' = (-x2 - x3, x1 + a x2, b x1 + x3 (x1 - c))
Vec3 rossler_field(const OscState& s, const RosslerParams& p);

// Rössler field plus one control component per equation (input matrix = I).
Vec3 controlled_field(const OscState& s, const RosslerParams& p, const Vec3& u);

// Time derivative of e_ij = X_i - X_j written in terms of e and X_j only.
Vec3 error_field(const PairError& e, const OscState& xj, const RosslerParams& p,
                 const Vec3& u_pair);

// Running bound on ||X_i|| per node and over the whole network.
class TrajectoryBound {
public:
    TrajectoryBound() = default;
    explicit TrajectoryBound(std::size_t nodes) : per_node_(nodes, 0.0) {}

    void observe(std::span<const OscState> states);

    [[nodiscard]] const std::vector<double>& per_node() const { return per_node_; }
    [[nodiscard]] double max() const { return max_; }

private:
    std::vector<double> per_node_;
    double max_ = 0.0;
};

}  // namespace hjbsync
