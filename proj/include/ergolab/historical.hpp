#pragma once

#include <cstdint>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/measures.hpp"
#include "ergolab/torus.hpp"

namespace ergolab {

/// Checkpoints ceil(ratio^k) for k = 0, 1, ... up to n_max, deduplicated,
/// with n_max appended.
std::vector<std::int64_t> geometric_schedule(std::int64_t n_max, double ratio = 1.3);

struct OscillationRow {
  std::int64_t n = 0;
  double d1 = 0.0;    ///< distance to nu1 = m x delta_0
  double d2 = 0.0;    ///< distance to nu2 = m x delta_1/2
  double dseg = 0.0;  ///< distance to the segment [nu1, nu2]
  double weight_nu1 = 0.0;  ///< lambda of the closest segment point
  double min_d1 = 0.0;
  double min_d2 = 0.0;
  double base_to_volume = 0.0;  ///< base marginal against Lebesgue on T^2
};

struct OscillationLog {
  TorusPoint3 start;
  double reference_gap = 0.0;  ///< d(nu1, nu2) in the same family
  std::vector<OscillationRow> rows;
  std::vector<MeasureVector> snapshots;  ///< empirical vector per row (when kept)
};

/// Iterates one orbit of a compactified3d or morse_smale_control system and
/// records distances of its empirical measure at each checkpoint. Memory is
/// O(family size) plus the snapshots.
OscillationLog scan_orbit(const SystemSpec& spec, const TorusPoint3& start, std::int64_t n_max,
                          std::vector<std::int64_t> schedule, FamilyPtr family,
                          bool keep_snapshots = true);
OscillationLog scan_orbit(const SystemSpec& spec, const TorusPoint3& start, std::int64_t n_max);

/// Oscillation amplitude of d1 over the final half of the checkpoints:
/// max - min, which bounds every pairwise |d1(n) - d1(n')| there.
/// Throws std::invalid_argument with fewer than 10 checkpoints.
double nonconvergence_score(const OscillationLog& log);

/// Generic start for seed i (StreamRng(seed, i, "historical-start")), with
/// the fiber coordinate drawn away from the invariant circles.
TorusPoint3 historical_start(std::uint64_t seed, std::int64_t member);

/// Independent scans of `members` generic starts.
std::vector<OscillationLog> scan_ensemble(const SystemSpec& spec, std::int64_t members,
                                          std::uint64_t seed, std::int64_t n_max,
                                          bool keep_snapshots, Exec exec = Exec::parallel);

}  // namespace ergolab
