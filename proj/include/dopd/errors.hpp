#pragma once

#include <stdexcept>
#include <string>

namespace dopd {

// Bad or inconsistent run configuration (unknown key, missing key, invalid value).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A runtime assumption of the method failed (e.g. a B-round graph window is not
// strongly connected). Runs abort with a diagnostic rather than produce garbage.
class AssumptionError : public std::runtime_error {
 public:
  explicit AssumptionError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem / output failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dopd
