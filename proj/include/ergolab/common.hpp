#pragma once

#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ergolab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Raised when a configuration or input fails validation. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical guard trips: integrator divergence, separated-set
/// grid too coarse, and similar. Maps to CLI exit code 3.
class NumericalGuard : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Execution policy for ensemble kernels. `serial` is the reference path;
/// `parallel` distributes members over OpenMP threads and must produce
/// bit-identical results.
enum class Exec { serial, parallel };

/// Number of OpenMP workers the parallel kernels will use.
int worker_count();

/// Overrides the worker count (0 restores the ERGOLAB_WORKERS / OpenMP default).
void set_worker_count(int workers);

}  // namespace ergolab
