#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hjbsync/vec3.hpp"

namespace hjbsync {

// Classic fixed-step fourth-order Runge-Kutta over a flat vector of Vec3.
// Stage buffers are kept between steps; one stepper per run.
class Rk4Stepper {
public:
    explicit Rk4Stepper(std::size_t size) : k1_(size), k2_(size), k3_(size), k4_(size), tmp_(size) {}

    // deriv(t, const std::vector<Vec3>& y, std::vector<Vec3>& dydt)
    template <class Deriv>
    void step(double t, double h, std::vector<Vec3>& y, Deriv&& deriv) {
        const std::size_t n = y.size();
        const double half = 0.5 * h;
        deriv(t, y, k1_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + half * k1_[i];
        deriv(t + half, tmp_, k2_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + half * k2_[i];
        deriv(t + half, tmp_, k3_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * k3_[i];
        deriv(t + h, tmp_, k4_);
        const double sixth = h / 6.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += sixth * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        }
    }

private:
    std::vector<Vec3> k1_, k2_, k3_, k4_, tmp_;
};

// Index of the first non-finite entry, or size() if all finite.
inline std::size_t first_non_finite(std::span<const Vec3> y) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!y[i].finite()) return i;
    }
    return y.size();
}

}  // namespace hjbsync
