#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ergolab/stats.hpp"
#include "ergolab/torus.hpp"

namespace ergolab {

struct TestFunction {
  std::array<int, 3> k{};  ///< unused trailing entries are 0 in dimension 2
  TrigKind kind = TrigKind::cos;
  friend bool operator==(const TestFunction&, const TestFunction&) = default;
};

/// Truncated family of trigonometric test functions trig(2 pi k.x).
///
/// Index 0 is the constant 1. The remaining functions are cos then sin of one
/// representative k of each pair {k, -k} (first nonzero entry positive), for
/// all 0 < |k|_inf <= max_norm, ordered by |k|_inf and then
/// lexicographically. The family therefore has exactly (2 max_norm + 1)^dim
/// members, each with sup-norm 1, and weight 2^-n at index n.
class TestFamily {
 public:
  TestFamily(int dimension, int max_norm);

  /// Shared instance per (dimension, max_norm).
  static std::shared_ptr<const TestFamily> get(int dimension, int max_norm);

  int dimension() const { return dimension_; }
  int max_norm() const { return max_norm_; }
  std::size_t size() const { return functions_.size(); }
  const std::vector<TestFunction>& functions() const { return functions_; }
  /// e.g. "T3M2".
  std::string id() const;
  static double weight(std::size_t n);
  /// Index of the function with this (canonical) frequency and kind.
  std::size_t index_of(std::array<int, 3> k, TrigKind kind) const;

  /// Writes all function values at a point (`coords` has `dimension()` entries).
  void evaluate(std::span<const double> coords, std::span<double> out) const;
  double evaluate_one(std::size_t n, std::span<const double> coords) const;

  friend bool operator==(const TestFamily& a, const TestFamily& b) {
    return a.dimension_ == b.dimension_ && a.max_norm_ == b.max_norm_;
  }

 private:
  int dimension_;
  int max_norm_;
  std::vector<TestFunction> functions_;
  std::vector<std::array<int, 3>> frequencies_;  ///< canonical frequencies, in order
};

using FamilyPtr = std::shared_ptr<const TestFamily>;

/// A probability measure represented by its integrals against a TestFamily.
class MeasureVector {
 public:
  MeasureVector(FamilyPtr family, std::vector<double> integrals);

  const TestFamily& family() const { return *family_; }
  const FamilyPtr& family_ptr() const { return family_; }
  std::span<const double> integrals() const { return integrals_; }
  double operator[](std::size_t n) const { return integrals_[n]; }
  std::size_t size() const { return integrals_.size(); }

  static MeasureVector dirac(FamilyPtr family, std::span<const double> coords);
  static MeasureVector dirac(FamilyPtr family, const TorusPoint2& p);
  static MeasureVector dirac(FamilyPtr family, const TorusPoint3& p);

  /// "<family id>,<integral 0>,<integral 1>,..." with round-trip precision.
  std::string to_csv_row() const;

 private:
  FamilyPtr family_;
  std::vector<double> integrals_;
};

/// lambda * a + (1 - lambda) * b.
MeasureVector mix(const MeasureVector& a, const MeasureVector& b, double lambda);

/// sum_n |mu_n - nu_n| / 2^n. Throws std::invalid_argument on family mismatch.
double weak_star_distance(const MeasureVector& mu, const MeasureVector& nu);

/// Upper bound of weak_star_distance over the family: sum_n 2 * 2^-n.
double weak_star_diameter(const TestFamily& family);

enum class ReferenceMeasure { nu1, nu2, volume };

/// Closed-form integrals against nu1 = m x delta_0, nu2 = m x delta_{1/2} or
/// Lebesgue measure.
MeasureVector reference_measure(FamilyPtr family, ReferenceMeasure which);

struct SegmentDistance {
  double distance = 0.0;
  double lambda = 0.0;  ///< minimizer: closest point is lambda a + (1 - lambda) b
};

/// min over lambda in [0,1] of d(mu, lambda a + (1 - lambda) b), by ternary
/// search on the convex objective.
SegmentDistance distance_to_segment(const MeasureVector& mu, const MeasureVector& a,
                                    const MeasureVector& b);

/// Projects a 3D measure vector onto the base T^2 (the l = 0 functions).
MeasureVector base_marginal(const MeasureVector& mu);

/// Running empirical measure (1/n) sum delta_{p_i} with compensated sums.
/// Single owner; partial accumulators over disjoint orbit pieces merge.
class EmpiricalAccumulator {
 public:
  explicit EmpiricalAccumulator(FamilyPtr family);

  void add(std::span<const double> coords);
  void add(const TorusPoint2& p);
  void add(const TorusPoint3& p);
  void merge(const EmpiricalAccumulator& other);

  std::int64_t count() const { return count_; }
  const TestFamily& family() const { return *family_; }
  /// Throws std::logic_error when nothing has been accumulated.
  MeasureVector finalize() const;

 private:
  FamilyPtr family_;
  std::int64_t count_ = 0;
  std::vector<KahanSum> sums_;
  std::vector<double> scratch_;
};

}  // namespace ergolab
