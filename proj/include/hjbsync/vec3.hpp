#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace hjbsync {

// Three-component value type shared by node states, pair errors and controls.
struct Vec3 {
    std::array<double, 3> v{0.0, 0.0, 0.0};

    constexpr Vec3() = default;
    constexpr Vec3(double a, double b, double c) : v{a, b, c} {}

    constexpr double& operator[](std::size_t k) { return v[k]; }
    constexpr double operator[](std::size_t k) const { return v[k]; }

    constexpr Vec3& operator+=(const Vec3& o) {
        v[0] += o.v[0];
        v[1] += o.v[1];
        v[2] += o.v[2];
        return *this;
    }
    constexpr Vec3& operator-=(const Vec3& o) {
        v[0] -= o.v[0];
        v[1] -= o.v[1];
        v[2] -= o.v[2];
        return *this;
    }
    constexpr Vec3& operator*=(double s) {
        v[0] *= s;
        v[1] *= s;
        v[2] *= s;
        return *this;
    }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.v[0], -a.v[1], -a.v[2]}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

    [[nodiscard]] double norm() const { return std::sqrt(squared_norm()); }
    [[nodiscard]] constexpr double squared_norm() const {
        return v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    }
    [[nodiscard]] bool finite() const {
        return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
    }
};

// Componentwise product.
constexpr Vec3 hadamard(const Vec3& a, const Vec3& b) {
    return {a[0] * b[0], a[1] * b[1], a[2] * b[2]};
}

// Node state (x1, x2, x3).
using OscState = Vec3;
// Error between an ordered pair of nodes, e_ij = X_i - X_j.
using PairError = Vec3;

}  // namespace hjbsync
