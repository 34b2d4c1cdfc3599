#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/measures.hpp"
#include "ergolab/stats.hpp"
#include "ergolab/torus.hpp"

namespace ergolab {

enum class Sampling : std::uint8_t { grid, uniform_random, unstable_segment };

std::string to_string(Sampling s);
Sampling sampling_from_string(const std::string& name);

/// Initial conditions of an ensemble. Grid members are cell centers of a
/// box split into `count` equal cells (count must be a perfect square in 2D,
/// a perfect cube in 3D); uniform members come from StreamRng(seed, i,
/// "ensemble-member"); segment members are evenly spaced along the unit
/// unstable eigenvector through `anchor`, centered on it.
struct EnsembleSpec {
  Sampling sampling = Sampling::grid;
  std::int64_t count = 1'000'000;
  std::array<double, 3> lower{0.0, 0.0, 0.0};
  std::array<double, 3> upper{1.0, 1.0, 1.0};
  TorusPoint3 anchor{};
  double length = 0.1;
  std::uint64_t seed = 1;

  /// Throws ConfigError when the spec cannot produce `count` members.
  void validate(int dimension) const;
  TorusPoint3 member(const SystemSpec& system, std::int64_t i) const;
};

/// Closed interval I(phi) of admissible limit averages.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double distance(double v) const { return v < lower ? lower - v : (v > upper ? v - upper : 0.0); }
};

/// anosov2d: {integral of psi dm}. compactified3d: the range of psi against
/// the segment between the two invariant-circle measures. Throws ConfigError
/// for other variants (the caller must supply I(psi)).
Interval target_interval(const SystemSpec& spec, const Observable& psi);

struct DeviationCurve {
  double epsilon = 0.0;
  Interval target;
  std::vector<std::int64_t> n;
  std::vector<std::int64_t> deviant;
  std::int64_t total = 0;
  std::vector<double> fraction;
  /// Decay fit over the n with at least `min_count` deviant members; empty
  /// when fewer than two such n exist ("below resolution").
  std::optional<RateFit> fit;
};

/// Deviant fractions for several epsilons at once. Every epsilon shares the
/// same orbits, so fractions are exactly monotone in epsilon.
std::vector<DeviationCurve> deviant_fractions(const SystemSpec& spec, const EnsembleSpec& ensemble,
                                              const Observable& psi, const Interval& target,
                                              std::vector<double> epsilons,
                                              std::vector<std::int64_t> n_list,
                                              Exec exec = Exec::parallel, std::int64_t min_count = 10);

DeviationCurve deviant_fraction(const SystemSpec& spec, const EnsembleSpec& ensemble,
                                const Observable& psi, const Interval& target, double epsilon,
                                std::vector<std::int64_t> n_list, Exec exec = Exec::parallel);

struct ConvergenceCurve {
  double eta = 0.0;
  std::vector<std::int64_t> n;
  std::vector<std::int64_t> convergent;
  std::int64_t total = 0;
  std::vector<double> fraction;
};

/// Fraction of members whose n-step empirical measure lies within eta of
/// `target` in the weak-* distance over target's family.
ConvergenceCurve convergent_fraction(const SystemSpec& spec, const EnsembleSpec& ensemble,
                                     const MeasureVector& target, double eta,
                                     std::vector<std::int64_t> n_list, Exec exec = Exec::parallel);

}  // namespace ergolab
