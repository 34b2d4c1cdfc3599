#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/stats.hpp"
#include "ergolab/torus.hpp"

namespace ergolab {

/// Exact value of sigma for the default cocycle over [[3,1],[2,1]]: the
/// frequencies (1,0), (2,0) are never mapped onto each other by (A^T)^k for
/// k != 0, so only the lag-0 term 1/2 + (sqrt 2)^2 / 2 survives.
inline constexpr double kDefaultSigma = 1.5;

/// S_j phi(x) for j = 0..n (S_0 = 0), using spec.matrix and spec.phi.
struct BirkhoffTrace {
  TorusPoint2 start;
  std::vector<double> sums;

  std::int64_t length() const { return static_cast<std::int64_t>(sums.size()) - 1; }
};

BirkhoffTrace birkhoff_trace(const SystemSpec& spec, const TorusPoint2& x, std::int64_t n);

struct SigmaEstimate {
  std::int64_t sample_size = 0;
  int lag_max = 0;
  std::vector<double> correlations;    ///< C(k) = int phi . phi o A^k dm, k = 0..lag_max
  std::vector<double> partial_sums;    ///< C(0) + 2 sum_{1<=k<=L} C(k), L = 0..lag_max
  std::vector<double> partial_stderr;  ///< Monte-Carlo standard error of each partial sum
  double value = 0.0;                  ///< partial_sums.back()
  double standard_error = 0.0;
};

/// Green-Kubo estimate from `sample_size` uniform points (member i uses
/// StreamRng(seed, i, "green-kubo")). Throws std::invalid_argument if lag_max < 1.
SigmaEstimate estimate_sigma_green_kubo(const SystemSpec& spec, int lag_max,
                                        std::int64_t sample_size, std::uint64_t seed,
                                        Exec exec = Exec::parallel);

struct VarianceEstimate {
  std::int64_t n = 0;
  std::int64_t ensemble = 0;
  double value = 0.0;
  double standard_error = 0.0;
  std::vector<double> scaled_sums;  ///< S_n / sqrt(n) per member
};

/// Ensemble variance of S_n / sqrt(n). Throws std::invalid_argument if n < 1000.
VarianceEstimate estimate_sigma_variance(const SystemSpec& spec, std::int64_t n,
                                         std::int64_t ensemble, std::uint64_t seed,
                                         Exec exec = Exec::parallel);

/// X_n(t) = (1/sqrt(sigma n)) int_0^{nt} phi(A^[s] x) ds on t = i / grid.
struct CltPath {
  std::vector<double> t;
  std::vector<double> values;
};

/// Throws std::invalid_argument if sigma <= 0.
CltPath sample_clt_path(const SystemSpec& spec, const TorusPoint2& x, std::int64_t n, int grid,
                        double sigma);

/// `count` paths from uniform starts (member i: StreamRng(seed, i, "clt-start")).
std::vector<CltPath> sample_clt_paths(const SystemSpec& spec, std::int64_t n, int grid, double sigma,
                                      std::int64_t count, std::uint64_t seed,
                                      Exec exec = Exec::parallel);

/// Reference generator: rescaled Gaussian random walks with `steps` steps.
std::vector<CltPath> gaussian_walk_paths(std::int64_t count, std::int64_t steps, int grid,
                                         std::uint64_t seed);

struct WienerReport {
  std::size_t paths = 0;
  KsResult ks;                        ///< X_n(1) against N(0,1)
  double variance_slope = 0.0;        ///< fit of Var X_n(t) against t
  double variance_intercept = 0.0;
  double variance_r_squared = 0.0;
  double half_increment_correlation = 0.0;  ///< corr(X(1) - X(1/2), X(1/2))
  std::vector<std::vector<double>> increment_correlation;  ///< blocks x blocks
  double max_offdiagonal_correlation = 0.0;
};

/// Throws std::invalid_argument with fewer than 500 paths or a grid not
/// divisible by `blocks`.
WienerReport wiener_tests(std::span<const CltPath> paths, int blocks = 4);

/// Occupation counts #G_n(x) = #{0 <= j < n : S_j phi(x) >= sqrt(sigma n)}
/// at n = 2^k, k = 0..max_k, computed in one streaming pass.
struct OccupationScan {
  std::vector<std::int64_t> n;
  std::vector<std::int64_t> count;
  double rho = 0.1;
  bool hit = false;  ///< some checkpoint has count >= (1 - rho) n
  int first_hit_k = -1;
};

OccupationScan occupation_scan(const SystemSpec& spec, const TorusPoint2& x, int max_k,
                               double sigma, double rho);

/// Monte-Carlo probability that a Gaussian walk of `steps` steps spends at
/// least a (1 - rho) fraction of its time above sqrt(steps): the Brownian
/// reference rate of the occupation event at one scale.
double brownian_occupation_probability(double rho, std::int64_t paths, std::int64_t steps,
                                       std::uint64_t seed, Exec exec = Exec::parallel);

}  // namespace ergolab
