#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/stats.hpp"
#include "ergolab/torus.hpp"

namespace ergolab {

using PhasePoint = std::array<double, 3>;

/// Euclidean torus distance on the first `dimension` coordinates.
double phase_distance(const PhasePoint& a, const PhasePoint& b, int dimension);

/// A one-parameter disc u in [0, length] in phase space together with the
/// map that moves it. `expansion` bounds the per-step stretching of the disc
/// and sets the default scan resolution.
struct Disc {
  int dimension = 2;
  double length = 0.0;
  double expansion = 1.0;
  std::function<PhasePoint(double)> embed;
  std::function<PhasePoint(const PhasePoint&)> map;
};

/// Segment of the given length along the unit unstable eigenvector,
/// centered on `anchor` (fiber coordinate held at anchor.t).
Disc unstable_segment(const SystemSpec& spec, const TorusPoint3& anchor, double length);

/// Segment along x1 under the identity map of T^2.
Disc identity_segment(const TorusPoint2& anchor, double length);

/// Points are (n, rho)-separated when some iterate 0 <= k < max(n, 1) puts
/// them more than rho apart.
struct SeparatedSet {
  int n = 0;
  double rho = 0.0;
  double resolution = 0.0;
  std::int64_t probes = 0;
  std::vector<double> parameters;  ///< admitted points, increasing

  std::size_t cardinality() const { return parameters.size(); }
};

/// Scan step rho * expansion^-(max(n,1)-1) / refinement.
double default_resolution(const Disc& disc, int n, double rho, double refinement = 64.0);

/// Greedy maximal (n, rho)-separated set over the probe grid u_j = j *
/// resolution: a probe is admitted when it is separated from every admitted
/// point, so every probe ends within rho of the set. Throws NumericalGuard
/// when two grid neighbours are both admitted (the grid is too coarse).
/// The parallel path only precomputes probe orbits; admission stays in grid
/// order, so both paths return identical sets.
SeparatedSet max_separated_set(const Disc& disc, int n, double rho, double resolution,
                               Exec exec = Exec::parallel);
SeparatedSet max_separated_set(const Disc& disc, int n, double rho, Exec exec = Exec::parallel);

struct EntropyEstimate {
  std::vector<int> n;
  std::vector<std::int64_t> cardinality;
  LinearFit fit;        ///< log cardinality against n
  double value = 0.0;   ///< fit.slope, nats per step
};

/// Growth rate of maximal separated sets on the disc. Needs at least four
/// increasing n.
EntropyEstimate u_entropy_estimate(const Disc& disc, double rho, std::vector<int> n_list,
                                   Exec exec = Exec::parallel);

/// Length of the connected (n, rho)-Bowen ball around parameter `center`
/// within the disc, found by outward doubling and bisection.
double bowen_ball_volume(const Disc& disc, double center, int n, double rho);

/// Defaults for the unstable-segment entropy experiments.
struct EntropySettings {
  TorusPoint3 anchor{{0.3183098861837907, 0.5772156649015329}, 0.0};
  double segment_length = 1e-3;
  double rho = 0.02;
  std::vector<int> n_list{7, 8, 9, 10, 11, 12};
  std::int64_t orbit_length = 100'000;
  std::int64_t burn_in = 100;
};

struct GibbsResidual {
  EntropyEstimate entropy;
  double jacobian_integral = 0.0;  ///< orbit average of log |det Df|E^uu|
  double residual = 0.0;           ///< entropy - jacobian_integral
};

/// Orbit average of log |det Df| restricted to the subspace spanned by the
/// iterated `frame`, after `burn_in` alignment steps.
double jacobian_average(const SystemSpec& spec, const TorusPoint3& start,
                        const std::vector<std::array<double, 3>>& frame, std::int64_t n,
                        std::int64_t burn_in);

GibbsResidual gibbs_residual(const SystemSpec& spec, const EntropySettings& settings,
                             Exec exec = Exec::parallel);

enum class PesinSubspace : std::uint8_t { unstable, full, unstable_fiber };

std::string to_string(PesinSubspace f);
PesinSubspace pesin_subspace_from_string(const std::string& name);

struct PesinReport {
  PesinSubspace subspace = PesinSubspace::unstable;
  double entropy = 0.0;            ///< unstable-segment growth rate, a lower proxy for h
  double jacobian_integral = 0.0;  ///< orbit average of log |det Df|F|
  double margin = 0.0;             ///< entropy - jacobian_integral
};

/// The orbit starts at settings.anchor, so anchor.t = 0 samples the circle
/// carrying m x delta_0.
PesinReport pesin_check(const SystemSpec& spec, PesinSubspace subspace,
                        const EntropySettings& settings, Exec exec = Exec::parallel);

}  // namespace ergolab
