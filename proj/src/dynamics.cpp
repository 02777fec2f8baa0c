#include "hjbsync/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "hjbsync/errors.hpp"

namespace hjbsync {

void RosslerParams::validate() const {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
        throw ConfigError("Rossler parameters must be finite");
    }
}

namespace {

void require_finite(const Vec3& v, const char* what) {
    if (!v.finite()) {
        throw InvalidStateError(std::string(what) + " is not finite");
    }
}

}  // namespace

Vec3 rossler_field(const OscState& s, const RosslerParams& p) {
    require_finite(s, "state");
    return detail::rossler_rhs(s, p);
}

Vec3 controlled_field(const OscState& s, const RosslerParams& p, const Vec3& u) {
    require_finite(u, "control");
    return rossler_field(s, p) + u;
}

Vec3 error_field(const PairError& e, const OscState& xj, const RosslerParams& p,
                 const Vec3& u_pair) {
    require_finite(e, "pair error");
    require_finite(xj, "state");
    require_finite(u_pair, "control");
    return {
        -e[1] - e[2] + u_pair[0],
        e[0] + p.a * e[1] + u_pair[1],
        p.b * e[0] + xj[0] * e[2] + xj[2] * e[0] + e[0] * e[2] - p.c * e[2] + u_pair[2],
    };
}

void TrajectoryBound::observe(std::span<const OscState> states) {
    if (per_node_.size() < states.size()) {
        per_node_.resize(states.size(), 0.0);
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
        per_node_[i] = std::max(per_node_[i], states[i].norm());
        max_ = std::max(max_, per_node_[i]);
    }
}

}  // namespace hjbsync
