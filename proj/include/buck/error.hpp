#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace buck {

/// Invalid parameter, configuration value or input shape.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite plant state or controller signal during a run.
class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, double last_valid_time_s)
        : std::runtime_error(what + " (last valid t = " + std::to_string(last_valid_time_s) + " s)"),
          last_valid_time_s_(last_valid_time_s) {}

    double last_valid_time_s() const noexcept { return last_valid_time_s_; }

private:
    double last_valid_time_s_;
};

/// Training cost or gradient became non-finite.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t epoch)
        : std::runtime_error(what + " at epoch " + std::to_string(epoch)), epoch_(epoch) {}

    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

}  // namespace buck
