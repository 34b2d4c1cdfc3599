#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/common.hpp"

namespace ergolab {

/// Reduces to [0,1). Values within 1e-15 of 1 reduce to 0.
double wrap01(double v);

/// Signed distance to the nearest integer, in [-1/2, 1/2).
double torus_delta(double d);

struct TorusPoint2 {
  double x1 = 0.0;
  double x2 = 0.0;

  static TorusPoint2 wrapped(double a, double b) { return {wrap01(a), wrap01(b)}; }
};

struct TorusPoint3 {
  TorusPoint2 base;
  double t = 0.0;

  static TorusPoint3 wrapped(double a, double b, double c) {
    return {TorusPoint2::wrapped(a, b), wrap01(c)};
  }
};

double torus_distance(const TorusPoint2& p, const TorusPoint2& q);
double torus_distance(const TorusPoint3& p, const TorusPoint3& q);

using Vec2 = std::array<double, 2>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Hyperbolic integer matrix with determinant +-1, acting on T^2.
class AnosovMatrix {
 public:
  /// [[3,1],[2,1]]: two fixed points, so the skew-translation hypotheses hold.
  AnosovMatrix() : AnosovMatrix(3, 1, 2, 1) {}
  /// Throws ConfigError unless |det| = 1 and |trace| > 2.
  AnosovMatrix(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d);

  std::int64_t a() const { return a_; }
  std::int64_t b() const { return b_; }
  std::int64_t c() const { return c_; }
  std::int64_t d() const { return d_; }
  std::int64_t trace() const { return a_ + d_; }
  std::int64_t det() const { return a_ * d_ - b_ * c_; }

  /// Eigenvalue with |lambda| > 1.
  double unstable_eigenvalue() const { return lambda_u_; }
  double stable_eigenvalue() const { return lambda_s_; }
  Vec2 unstable_direction() const { return e_u_; }
  Vec2 stable_direction() const { return e_s_; }
  /// log of the spectral radius: the expansion rate along E^u.
  double log_expansion() const { return std::log(std::abs(lambda_u_)); }

  TorusPoint2 apply(const TorusPoint2& p) const;
  TorusPoint2 apply_inverse(const TorusPoint2& p) const;
  Vec2 apply_linear(const Vec2& v) const;

  friend bool operator==(const AnosovMatrix&, const AnosovMatrix&) = default;

 private:
  std::int64_t a_, b_, c_, d_;
  double lambda_u_ = 0.0, lambda_s_ = 0.0;
  Vec2 e_u_{}, e_s_{};
};

/// Fixed point with exact rational coordinates (num1/den, num2/den).
struct RationalPoint2 {
  std::int64_t num1 = 0;
  std::int64_t num2 = 0;
  std::int64_t den = 1;
  TorusPoint2 to_point() const {
    return {static_cast<double>(num1) / den, static_cast<double>(num2) / den};
  }
  friend bool operator==(const RationalPoint2&, const RationalPoint2&) = default;
};

TorusPoint2 apply_anosov(const AnosovMatrix& m, const TorusPoint2& p);

/// All solutions of (A - I)x in Z^2 on the torus, sorted lexicographically.
/// Generated as the subgroup (A - I)^{-1} Z^2 / Z^2 from its two generators.
std::vector<RationalPoint2> fixed_points_exact(const AnosovMatrix& m);
std::vector<TorusPoint2> fixed_points(const AnosovMatrix& m);

enum class TrigKind : std::uint8_t { cos, sin };

/// Exact coefficient a + b*sqrt(2) with rational a, b; enables the symbolic
/// rational-independence check of the default observable.
struct SurdCoefficient {
  std::int64_t a_num = 0, a_den = 1;
  std::int64_t b_num = 0, b_den = 1;
  double value() const;
  friend bool operator==(const SurdCoefficient&, const SurdCoefficient&) = default;
};

struct ObservableTerm {
  std::array<int, 3> k{};  ///< (base frequency k1, k2, fiber frequency l)
  TrigKind kind = TrigKind::cos;
  double coeff = 0.0;
  std::optional<SurdCoefficient> exact;
  friend bool operator==(const ObservableTerm&, const ObservableTerm&) = default;
};

/// Trigonometric polynomial sum coeff * trig(2 pi k.(x,t)) plus a constant.
///
/// The cocycle phi of the skew translation is an Observable with no
/// constant, no fiber frequencies and no (0,0) base frequency, which forces
/// a zero Lebesgue mean; see validate_cocycle().
class Observable {
 public:
  Observable() = default;
  explicit Observable(std::vector<ObservableTerm> terms, double constant = 0.0);

  /// cos(2 pi x1) + sqrt(2) cos(4 pi x1).
  static Observable default_phi();
  static Observable fiber_cos();   ///< cos(2 pi t)
  static Observable single(std::array<int, 3> k, TrigKind kind, double coeff = 1.0);

  double operator()(const TorusPoint2& p) const;
  double operator()(const TorusPoint3& p) const;
  /// Gradient with respect to the base coordinates (fiber frequencies must be 0).
  Vec2 base_gradient(const TorusPoint2& p) const;

  /// Upper bound on sup |phi|: sum of |coeff| plus |constant|.
  double sup_bound() const;
  bool depends_on_fiber() const;
  const std::vector<ObservableTerm>& terms() const { return terms_; }
  double constant() const { return constant_; }

  /// Throws ConfigError unless this is a valid cocycle (see class comment).
  void validate_cocycle() const;

  friend bool operator==(const Observable&, const Observable&) = default;

 private:
  std::vector<ObservableTerm> terms_;
  double constant_ = 0.0;
};

double eval_phi(const Observable& phi, const TorusPoint2& p);

/// X(t) = c sin(2 pi t) on the circle.
struct CircleField {
  double amplitude = 0.05;

  double value(double t) const;
  double derivative(double t) const;
  friend bool operator==(const CircleField&, const CircleField&) = default;
};

/// Time-s flow of X applied to t0, from tan(pi Phi_s(t)) = tan(pi t) e^{2 pi c s}
/// on (0,1/2) and the odd symmetry on (1/2,1).
double flow_circle(const CircleField& field, double s, double t0);

/// d Phi_s(t0) / d t0, always positive.
double fiber_derivative(const CircleField& field, double s, double t0);

/// log cosh evaluated without overflow.
double log_cosh(double x);

enum class Variant : std::uint8_t { anosov2d, skew_unbounded, compactified3d, morse_smale_control };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct SystemSpec {
  Variant variant = Variant::compactified3d;
  AnosovMatrix matrix;
  Observable phi = Observable::default_phi();
  CircleField field;
  /// Fiber rate kappa of the Morse-Smale control: fiber map is the time-1 map
  /// of -kappa sin(2 pi t), so log r'(0) = -2 pi kappa.
  double control_rate = 0.15;

  static SystemSpec default2d();
  static SystemSpec default3d();
  static SystemSpec control();
  static SystemSpec skew();
  /// default2d / default3d / control / skew.
  static SystemSpec preset(const std::string& name);

  int dimension() const { return variant == Variant::anosov2d ? 2 : 3; }
  /// log of the fiber derivative at the attracting circle t = 0 of the control system.
  double control_log_derivative() const { return -kTwoPi * control_rate; }

  /// Throws ConfigError on invalid parameters or when phi fails the
  /// rational-independence check required for the skew variants.
  void validate() const;

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

struct IndependenceCheck {
  bool independent = false;
  bool symbolic = false;  ///< decided exactly in Q(sqrt 2)
  RationalPoint2 p, q;
  double phi_p = 0.0, phi_q = 0.0;
  std::string detail;
};

/// Looks for two fixed points p, q with phi(p), phi(q) rationally
/// independent. Exact when all coefficients are SurdCoefficients and the
/// fixed points have denominators dividing 4; otherwise searches integer
/// relations m phi(p) + n phi(q) = 0 with |m|, |n| <= max_height.
IndependenceCheck check_rational_independence(const AnosovMatrix& m, const Observable& phi,
                                              int max_height = 2000);

/// compactified3d: (Ax, -Phi_{phi(x)}(t) mod 1). morse_smale_control: (Ax, r(t)).
TorusPoint3 apply_system(const SystemSpec& spec, const TorusPoint3& p);
TorusPoint3 apply_system_inverse(const SystemSpec& spec, const TorusPoint3& p);

/// Point of the skew translation on T^2 x R.
struct SkewPoint {
  TorusPoint2 base;
  double t = 0.0;
};

/// g(x, t) = (Ax, t + phi(x)).
SkewPoint apply_skew(const SystemSpec& spec, const SkewPoint& p);
SkewPoint apply_skew_inverse(const SystemSpec& spec, const SkewPoint& p);

/// Tangent map at p (upper-left 2x2 block only for anosov2d).
Mat3 tangent_map(const SystemSpec& spec, const TorusPoint3& p);

/// Fiber position in the conjugacy chart t = sheet * Phi_s(1/4) (mod 1), or
/// on one of the invariant circles.
struct FiberState {
  enum class Kind : std::uint8_t { chart, at_zero, at_half };
  Kind kind = Kind::chart;
  double s = 0.0;
  int sheet = 1;
};

/// Chart coordinate of a fiber point for a field of amplitude c.
FiberState fiber_state_from_t(double c, double t);
double fiber_t(double c, const FiberState& f);

/// Streaming orbit of any variant. The compactified and control variants
/// iterate the fiber in the conjugacy chart, which is exact for the skew
/// structure and does not collapse onto the invariant circles in floating
/// point the way direct iteration does.
class SystemOrbit {
 public:
  SystemOrbit(const SystemSpec& spec, const TorusPoint3& start);
  SystemOrbit(const SystemSpec& spec, const TorusPoint2& start)
      : SystemOrbit(spec, TorusPoint3{start, 0.0}) {}

  void step();

  const TorusPoint2& base() const { return x_; }
  /// Fiber coordinate in [0,1) (skew_unbounded: the real fiber reduced mod 1).
  double fiber() const;
  TorusPoint3 point() const { return {x_, fiber()}; }
  /// Real fiber coordinate of skew_unbounded.
  double skew_fiber() const { return fiber_.s; }
  const FiberState& fiber_state() const { return fiber_; }
  std::int64_t steps() const { return steps_; }

  /// log |d t_{n+1} / d t_n| for the step most recently taken.
  double last_log_fiber_derivative() const { return last_log_derivative_; }
  /// Tangent map at the current point, computed from chart quantities.
  Mat3 tangent() const;

 private:
  const SystemSpec* spec_;
  TorusPoint2 x_;
  FiberState fiber_;
  double rate_ = 0.0;  ///< 2 pi times the chart amplitude
  std::int64_t steps_ = 0;
  double last_log_derivative_ = 0.0;
};

}  // namespace ergolab
