#pragma once

#include <stdexcept>
#include <string>

namespace fedsim {

/// Raised for invalid user-supplied configuration; maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an internal cross-check fails; maps to CLI exit code 2.
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fedsim
