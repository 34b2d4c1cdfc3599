#pragma once

#include <cstdint>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/torus.hpp"

namespace ergolab {

struct ExponentCheckpoint {
  std::int64_t n = 0;
  double lambda_c = 0.0;          ///< (1/n) * accumulated fiber log-derivative
  double log_derivative_sum = 0.0;
  std::vector<double> spectrum;   ///< empty unless requested
};

struct ExponentTrace {
  TorusPoint3 start;
  std::vector<ExponentCheckpoint> checkpoints;
};

/// Finite-time center exponents along the orbit of `start`. The fiber circle
/// is exactly invariant for the compactified and control variants, so
/// ||Df^n|E^c|| is the product of per-step fiber derivatives.
ExponentTrace center_exponent_trace(const SystemSpec& spec, const TorusPoint3& start,
                                    std::int64_t n_max, std::vector<std::int64_t> checkpoints);

/// Final lambda_c after n steps for `members` uniformly random starts on T^3,
/// start i drawn from StreamRng(master_seed, i, "exponent-start").
std::vector<double> center_exponent_ensemble(const SystemSpec& spec, std::int64_t members,
                                             std::uint64_t master_seed, std::int64_t n,
                                             Exec exec = Exec::parallel);

/// Time-averaged log |R_ii| of the orthogonalized tangent iteration started
/// from `frame` (columns, 1 to 3 of them), re-orthogonalized every step by
/// modified Gram-Schmidt. The first `burn_in` steps align the frame and are
/// not averaged. Rates are returned in frame order (not sorted).
std::vector<double> tangent_growth_rates(const SystemSpec& spec, const TorusPoint3& start,
                                         std::int64_t n, const std::vector<std::array<double, 3>>& frame,
                                         std::int64_t burn_in);

/// Lyapunov spectrum sorted descending (2 exponents for anosov2d, else 3).
/// Throws std::invalid_argument for n_max < 100. burn_in < 0 selects
/// min(n_max / 10, 1000).
std::vector<double> spectrum_trace(const SystemSpec& spec, const TorusPoint3& start,
                                   std::int64_t n_max, std::int64_t burn_in = -1);

struct SplittingDiagnostic {
  std::int64_t samples = 0;
  double log_expansion = 0.0;       ///< log |lambda_u| of the base
  double max_abs_log_fiber = 0.0;   ///< max over samples of |log fiber derivative|
  double unstable_margin = 0.0;     ///< min of log lambda_u - log fiber derivative
  double stable_margin = 0.0;       ///< min of log fiber derivative + log lambda_u
  double worst_margin = 0.0;
  /// log lambda_u - 2 pi c sup|phi|: sample-free lower bound on the margin.
  double bound_margin = 0.0;
  double mean_cone_angle = 0.0;     ///< tilt of Df (e_u, 0) out of the horizontal, radians
  double max_cone_angle = 0.0;
  bool dominated = false;           ///< three-way domination holds on the sample at N = 1
};

SplittingDiagnostic domination_diagnostic(const SystemSpec& spec, std::int64_t sample_size,
                                          std::uint64_t seed = 1);

}  // namespace ergolab
