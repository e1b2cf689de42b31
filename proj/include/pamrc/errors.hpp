#pragma once

#include <stdexcept>
#include <string>

namespace pamrc {

// Bad or inconsistent configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Simulation left its validity envelope (CLI exit code 3).
struct SimulationBlowup : std::runtime_error {
    explicit SimulationBlowup(const std::string& what) : std::runtime_error(what) {}
};

// Linear algebra / estimation failure (CLI exit code 4).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pamrc
