#pragma once

#include <stdexcept>
#include <string>

namespace senav {

/// Invalid run configuration (bad key, bad value, violated invariant).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// The filter state left the trust region (estimate no longer meaningful).
struct divergence_error : std::runtime_error {
  explicit divergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// File access or malformed data file.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace senav
