#pragma once

#include <stdexcept>
#include <string>

namespace modlat {

// Bad or inconsistent user input (config files, CLI arguments). CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine failed to converge or lost accuracy. CLI exit code 3.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// A physics precondition is violated (valid config, invalid regime). CLI exit code 4.
struct PhysicsError : std::runtime_error {
  explicit PhysicsError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace modlat
