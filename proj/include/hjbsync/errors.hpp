#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hjbsync {

// Invalid configuration or parameter values. CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A state or input vector contained NaN or infinity.
class InvalidStateError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A run produced a non-finite state. Carries where it happened. CLI exit code 3.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(double t, std::size_t node)
        : std::runtime_error("non-finite state at t=" + std::to_string(t) +
                             ", node " + std::to_string(node)),
          time_(t),
          node_(node) {}

    [[nodiscard]] double time() const noexcept { return time_; }
    [[nodiscard]] std::size_t node() const noexcept { return node_; }

private:
    double time_;
    std::size_t node_;
};

// File read/write failure. CLI exit code 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An analysis quantity has no defined value on the given input.
class UndefinedError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace hjbsync
