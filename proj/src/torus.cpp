#include "ergolab/torus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

namespace ergolab {

double wrap01(double v) {
  double r = v - std::floor(v);
  if (r >= 1.0 - 1e-15) r = 0.0;
  return r;
}

double torus_delta(double d) { return d - std::round(d); }

double torus_distance(const TorusPoint2& p, const TorusPoint2& q) {
  return std::hypot(torus_delta(p.x1 - q.x1), torus_delta(p.x2 - q.x2));
}

double torus_distance(const TorusPoint3& p, const TorusPoint3& q) {
  const double d1 = torus_delta(p.base.x1 - q.base.x1);
  const double d2 = torus_delta(p.base.x2 - q.base.x2);
  const double d3 = torus_delta(p.t - q.t);
  return std::sqrt(d1 * d1 + d2 * d2 + d3 * d3);
}

// ---------------------------------------------------------------- AnosovMatrix

namespace {

Vec2 eigenvector(std::int64_t a, std::int64_t b, double lambda) {
  Vec2 v{static_cast<double>(b), lambda - static_cast<double>(a)};
  const double n = std::hypot(v[0], v[1]);
  v = {v[0] / n, v[1] / n};
  if (v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0)) v = {-v[0], -v[1]};
  return v;
}

}  // namespace

AnosovMatrix::AnosovMatrix(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d)
    : a_(a), b_(b), c_(c), d_(d) {
  if (std::abs(det()) != 1) {
    throw ConfigError("matrix determinant must be +-1, got " + std::to_string(det()));
  }
  if (std::abs(trace()) <= 2) {
    throw ConfigError("matrix is not hyperbolic: |trace| = " + std::to_string(std::abs(trace())) +
                      " <= 2");
  }
  const double tr = static_cast<double>(trace());
  const double disc = std::sqrt(tr * tr - 4.0 * static_cast<double>(det()));
  lambda_u_ = 0.5 * (tr + std::copysign(disc, tr));
  lambda_s_ = static_cast<double>(det()) / lambda_u_;
  e_u_ = eigenvector(a_, b_, lambda_u_);
  e_s_ = eigenvector(a_, b_, lambda_s_);
}

TorusPoint2 AnosovMatrix::apply(const TorusPoint2& p) const {
  return TorusPoint2::wrapped(static_cast<double>(a_) * p.x1 + static_cast<double>(b_) * p.x2,
                              static_cast<double>(c_) * p.x1 + static_cast<double>(d_) * p.x2);
}

TorusPoint2 AnosovMatrix::apply_inverse(const TorusPoint2& p) const {
  const auto s = static_cast<double>(det());
  return TorusPoint2::wrapped(s * (static_cast<double>(d_) * p.x1 - static_cast<double>(b_) * p.x2),
                              s * (static_cast<double>(a_) * p.x2 - static_cast<double>(c_) * p.x1));
}

Vec2 AnosovMatrix::apply_linear(const Vec2& v) const {
  return {static_cast<double>(a_) * v[0] + static_cast<double>(b_) * v[1],
          static_cast<double>(c_) * v[0] + static_cast<double>(d_) * v[1]};
}

TorusPoint2 apply_anosov(const AnosovMatrix& m, const TorusPoint2& p) { return m.apply(p); }

std::vector<RationalPoint2> fixed_points_exact(const AnosovMatrix& m) {
  const std::int64_t m11 = m.a() - 1, m12 = m.b(), m21 = m.c(), m22 = m.d() - 1;
  const std::int64_t det = m11 * m22 - m12 * m21;
  const std::int64_t n = std::abs(det);
  const std::int64_t sign = det > 0 ? 1 : -1;
  auto mod = [n](std::int64_t v) { return ((v % n) + n) % n; };
  // Columns of adj(M) / det, as numerators over n.
  const std::pair<std::int64_t, std::int64_t> gens[2] = {
      {mod(sign * m22), mod(-sign * m21)},
      {mod(-sign * m12), mod(sign * m11)},
  };
  std::set<std::pair<std::int64_t, std::int64_t>> seen{{0, 0}};
  std::vector<std::pair<std::int64_t, std::int64_t>> frontier{{0, 0}};
  while (!frontier.empty()) {
    const auto cur = frontier.back();
    frontier.pop_back();
    for (const auto& g : gens) {
      const std::pair<std::int64_t, std::int64_t> next{mod(cur.first + g.first),
                                                       mod(cur.second + g.second)};
      if (seen.insert(next).second) frontier.push_back(next);
    }
  }
  std::vector<RationalPoint2> out;
  out.reserve(seen.size());
  for (const auto& [u, v] : seen) {
    const std::int64_t g = std::gcd(std::gcd(u, v), n);
    out.push_back({u / g, v / g, n / g});
  }
  std::sort(out.begin(), out.end(), [](const RationalPoint2& p, const RationalPoint2& q) {
    // Lexicographic by value, compared exactly by cross-multiplication.
    const auto l1 = p.num1 * q.den, r1 = q.num1 * p.den;
    if (l1 != r1) return l1 < r1;
    return p.num2 * q.den < q.num2 * p.den;
  });
  return out;
}

std::vector<TorusPoint2> fixed_points(const AnosovMatrix& m) {
  std::vector<TorusPoint2> out;
  for (const auto& r : fixed_points_exact(m)) out.push_back(r.to_point());
  return out;
}

// ------------------------------------------------------------------ Observable

double SurdCoefficient::value() const {
  return static_cast<double>(a_num) / static_cast<double>(a_den) +
         std::sqrt(2.0) * static_cast<double>(b_num) / static_cast<double>(b_den);
}

Observable::Observable(std::vector<ObservableTerm> terms, double constant)
    : terms_(std::move(terms)), constant_(constant) {
  for (auto& t : terms_) {
    if (t.exact) t.coeff = t.exact->value();
  }
}

Observable Observable::default_phi() {
  return Observable({
      {{1, 0, 0}, TrigKind::cos, 1.0, SurdCoefficient{1, 1, 0, 1}},
      {{2, 0, 0}, TrigKind::cos, std::sqrt(2.0), SurdCoefficient{0, 1, 1, 1}},
  });
}

Observable Observable::fiber_cos() { return single({0, 0, 1}, TrigKind::cos); }

Observable Observable::single(std::array<int, 3> k, TrigKind kind, double coeff) {
  return Observable({{k, kind, coeff, std::nullopt}});
}

namespace {

double trig_term(const ObservableTerm& term, double phase) {
  const double theta = kTwoPi * (phase - std::round(phase));
  return term.kind == TrigKind::cos ? std::cos(theta) : std::sin(theta);
}

}  // namespace

double Observable::operator()(const TorusPoint2& p) const {
  return (*this)(TorusPoint3{p, 0.0});
}

double Observable::operator()(const TorusPoint3& p) const {
  double sum = constant_;
  for (const auto& term : terms_) {
    const double phase = term.k[0] * p.base.x1 + term.k[1] * p.base.x2 + term.k[2] * p.t;
    sum += term.coeff * trig_term(term, phase);
  }
  return sum;
}

Vec2 Observable::base_gradient(const TorusPoint2& p) const {
  Vec2 g{0.0, 0.0};
  for (const auto& term : terms_) {
    double phase = term.k[0] * p.x1 + term.k[1] * p.x2;
    const double theta = kTwoPi * (phase - std::round(phase));
    const double dtrig = term.kind == TrigKind::cos ? -std::sin(theta) : std::cos(theta);
    g[0] += term.coeff * kTwoPi * term.k[0] * dtrig;
    g[1] += term.coeff * kTwoPi * term.k[1] * dtrig;
  }
  return g;
}

double Observable::sup_bound() const {
  double s = std::abs(constant_);
  for (const auto& t : terms_) s += std::abs(t.coeff);
  return s;
}

bool Observable::depends_on_fiber() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.k[2] != 0; });
}

void Observable::validate_cocycle() const {
  if (terms_.empty()) throw ConfigError("phi: observable has no terms");
  if (constant_ != 0.0) throw ConfigError("phi: constant term breaks the zero-mean condition");
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    const std::string where = "phi[" + std::to_string(i) + "]";
    if (t.k[2] != 0) throw ConfigError(where + ": cocycle cannot depend on the fiber");
    if (t.k[0] == 0 && t.k[1] == 0) throw ConfigError(where + ": frequency (0,0) is not allowed");
    if (!std::isfinite(t.coeff)) throw ConfigError(where + ": coefficient is not finite");
  }
}

double eval_phi(const Observable& phi, const TorusPoint2& p) { return phi(p); }

// ----------------------------------------------------------------- CircleField

double CircleField::value(double t) const { return amplitude * std::sin(kTwoPi * t); }
double CircleField::derivative(double t) const {
  return kTwoPi * amplitude * std::cos(kTwoPi * t);
}

namespace {

// Flow on (0,1/2), where tan(pi t) evolves by e^{2 pi c s}.
double flow_lower_half(double c, double s, double u) {
  return std::atan(std::tan(std::numbers::pi * u) * std::exp(kTwoPi * c * s)) / std::numbers::pi;
}

}  // namespace

double flow_circle(const CircleField& field, double s, double t0) {
  const double t = wrap01(t0);
  if (t == 0.0 || t == 0.5 || field.amplitude * s == 0.0) return t;
  if (t < 0.5) return flow_lower_half(field.amplitude, s, t);
  return wrap01(1.0 - flow_lower_half(field.amplitude, s, 1.0 - t));
}

double fiber_derivative(const CircleField& field, double s, double t0) {
  const double t = wrap01(t0);
  const double a = kTwoPi * field.amplitude * s;
  if (a == 0.0) return 1.0;
  if (t == 0.0) return std::exp(a);
  if (t == 0.5) return std::exp(-a);
  // 1 / (cos^2(pi t) e^{-a} + sin^2(pi t) e^{a}), combined in the log domain.
  const double lc = 2.0 * std::log(std::abs(std::cos(std::numbers::pi * t))) - a;
  const double ls = 2.0 * std::log(std::abs(std::sin(std::numbers::pi * t))) + a;
  const double hi = std::max(lc, ls);
  return std::exp(-(hi + std::log(std::exp(lc - hi) + std::exp(ls - hi))));
}

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::numbers::ln2;
}

namespace {

// log cosh(a) - log cosh(b) without cancellation in the large-argument terms.
double log_cosh_diff(double a, double b) {
  const double aa = std::abs(a), ab = std::abs(b);
  return (aa - ab) + std::log1p(std::exp(-2.0 * aa)) - std::log1p(std::exp(-2.0 * ab));
}

}  // namespace

// ------------------------------------------------------------------ SystemSpec

std::string to_string(Variant v) {
  switch (v) {
    case Variant::anosov2d: return "anosov2d";
    case Variant::skew_unbounded: return "skew_unbounded";
    case Variant::compactified3d: return "compactified3d";
    case Variant::morse_smale_control: return "morse_smale_control";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name) {
  if (name == "anosov2d") return Variant::anosov2d;
  if (name == "skew_unbounded") return Variant::skew_unbounded;
  if (name == "compactified3d") return Variant::compactified3d;
  if (name == "morse_smale_control") return Variant::morse_smale_control;
  throw ConfigError("unknown system variant '" + name + "'");
}

SystemSpec SystemSpec::default2d() {
  SystemSpec s;
  s.variant = Variant::anosov2d;
  return s;
}

SystemSpec SystemSpec::default3d() { return SystemSpec{}; }

SystemSpec SystemSpec::control() {
  SystemSpec s;
  s.variant = Variant::morse_smale_control;
  return s;
}

SystemSpec SystemSpec::skew() {
  SystemSpec s;
  s.variant = Variant::skew_unbounded;
  return s;
}

SystemSpec SystemSpec::preset(const std::string& name) {
  if (name == "default2d" || name == "anosov2d") return default2d();
  if (name == "default3d" || name == "compactified3d") return default3d();
  if (name == "control" || name == "morse_smale_control") return control();
  if (name == "skew" || name == "skew_unbounded") return skew();
  throw ConfigError("unknown system preset '" + name + "'");
}

void SystemSpec::validate() const {
  phi.validate_cocycle();
  if (variant == Variant::compactified3d && !(field.amplitude > 0.0)) {
    throw ConfigError("field.amplitude must be positive");
  }
  if (variant == Variant::morse_smale_control && !(control_rate > 0.0)) {
    throw ConfigError("control_rate must be positive");
  }
  if (variant == Variant::skew_unbounded || variant == Variant::compactified3d) {
    const auto check = check_rational_independence(matrix, phi);
    if (!check.independent) {
      throw ConfigError("phi values at fixed points are not rationally independent: " +
                        check.detail);
    }
  }
}

// ----------------------------------------------------- rational independence

namespace {

struct Rational {
  std::int64_t num = 0, den = 1;

  static Rational make(std::int64_t n, std::int64_t d) {
    if (d < 0) n = -n, d = -d;
    const std::int64_t g = std::gcd(n, d);
    return g == 0 ? Rational{0, 1} : Rational{n / g, d / g};
  }
  friend Rational operator+(Rational x, Rational y) {
    return make(x.num * y.den + y.num * x.den, x.den * y.den);
  }
  friend Rational operator*(Rational x, Rational y) { return make(x.num * y.num, x.den * y.den); }
  friend Rational operator-(Rational x, Rational y) { return x + Rational{-y.num, y.den}; }
  bool is_zero() const { return num == 0; }
};

// Value of trig(2 pi r) for r with 4r integral.
Rational exact_trig(TrigKind kind, std::int64_t quarter) {
  static constexpr int cos_table[4] = {1, 0, -1, 0};
  static constexpr int sin_table[4] = {0, 1, 0, -1};
  const auto q = static_cast<std::size_t>(((quarter % 4) + 4) % 4);
  return {kind == TrigKind::cos ? cos_table[q] : sin_table[q], 1};
}

}  // namespace

IndependenceCheck check_rational_independence(const AnosovMatrix& m, const Observable& phi,
                                              int max_height) {
  IndependenceCheck out;
  const auto fps = fixed_points_exact(m);
  if (fps.size() < 2) {
    out.detail = "matrix has fewer than two fixed points";
    return out;
  }
  const bool symbolic =
      std::all_of(phi.terms().begin(), phi.terms().end(),
                  [](const auto& t) { return t.exact.has_value() && t.k[2] == 0; }) &&
      phi.constant() == 0.0 &&
      std::all_of(fps.begin(), fps.end(), [](const auto& p) { return 4 % p.den == 0; });

  if (symbolic) {
    // phi(p) = A + B sqrt(2) with A, B rational.
    std::vector<std::pair<Rational, Rational>> values;
    for (const auto& p : fps) {
      Rational a, b;
      for (const auto& t : phi.terms()) {
        const std::int64_t quarter = (t.k[0] * p.num1 + t.k[1] * p.num2) * (4 / p.den);
        const Rational v = exact_trig(t.kind, quarter);
        a = a + Rational::make(t.exact->a_num, t.exact->a_den) * v;
        b = b + Rational::make(t.exact->b_num, t.exact->b_den) * v;
      }
      values.emplace_back(a, b);
    }
    for (std::size_t i = 0; i < fps.size(); ++i) {
      for (std::size_t j = i + 1; j < fps.size(); ++j) {
        const Rational det =
            values[i].first * values[j].second - values[j].first * values[i].second;
        if (!det.is_zero()) {
          out = {true, true, fps[i], fps[j], phi(fps[i].to_point()), phi(fps[j].to_point()),
                 "independent over Q (exact in Q(sqrt 2))"};
          return out;
        }
      }
    }
    out.symbolic = true;
    out.detail = "every pair of fixed-point values is Q-linearly dependent (exact)";
    return out;
  }

  for (std::size_t i = 0; i < fps.size(); ++i) {
    for (std::size_t j = i + 1; j < fps.size(); ++j) {
      const double alpha = phi(fps[i].to_point());
      const double beta = phi(fps[j].to_point());
      bool dependent = std::abs(alpha) < 1e-12 || std::abs(beta) < 1e-12;
      for (int n = 1; n <= max_height && !dependent; ++n) {
        const double m_real = -n * beta / alpha;
        const double mr = std::round(m_real);
        if (std::abs(mr) > max_height || mr == 0.0) continue;
        const double residual = std::abs(mr * alpha + n * beta);
        if (residual <= 1e-9 * (std::abs(mr * alpha) + std::abs(n * beta))) dependent = true;
      }
      if (!dependent) {
        out = {true, false, fps[i], fps[j], alpha, beta,
               "no integer relation with height <= " + std::to_string(max_height)};
        return out;
      }
    }
  }
  out.detail = "integer relation found for every pair of fixed points (numerical)";
  return out;
}

// -------------------------------------------------------------- system maps

TorusPoint3 apply_system(const SystemSpec& spec, const TorusPoint3& p) {
  const TorusPoint2 x = spec.matrix.apply(p.base);
  switch (spec.variant) {
    case Variant::compactified3d:
      return {x, wrap01(-flow_circle(spec.field, spec.phi(p.base), p.t))};
    case Variant::morse_smale_control:
      return {x, flow_circle(CircleField{spec.control_rate}, -1.0, p.t)};
    case Variant::skew_unbounded:
      return {x, wrap01(p.t + spec.phi(p.base))};
    case Variant::anosov2d:
      return {x, p.t};
  }
  return p;
}

TorusPoint3 apply_system_inverse(const SystemSpec& spec, const TorusPoint3& p) {
  const TorusPoint2 x = spec.matrix.apply_inverse(p.base);
  switch (spec.variant) {
    case Variant::compactified3d:
      return {x, flow_circle(spec.field, -spec.phi(x), wrap01(-p.t))};
    case Variant::morse_smale_control:
      return {x, flow_circle(CircleField{spec.control_rate}, 1.0, p.t)};
    case Variant::skew_unbounded:
      return {x, wrap01(p.t - spec.phi(x))};
    case Variant::anosov2d:
      return {x, p.t};
  }
  return p;
}

SkewPoint apply_skew(const SystemSpec& spec, const SkewPoint& p) {
  return {spec.matrix.apply(p.base), p.t + spec.phi(p.base)};
}

SkewPoint apply_skew_inverse(const SystemSpec& spec, const SkewPoint& p) {
  const TorusPoint2 x = spec.matrix.apply_inverse(p.base);
  return {x, p.t - spec.phi(x)};
}

namespace {

Mat3 base_block(const AnosovMatrix& m) {
  Mat3 j{};
  j[0] = {static_cast<double>(m.a()), static_cast<double>(m.b()), 0.0};
  j[1] = {static_cast<double>(m.c()), static_cast<double>(m.d()), 0.0};
  j[2] = {0.0, 0.0, 1.0};
  return j;
}

}  // namespace

Mat3 tangent_map(const SystemSpec& spec, const TorusPoint3& p) {
  Mat3 j = base_block(spec.matrix);
  switch (spec.variant) {
    case Variant::compactified3d: {
      const double s = spec.phi(p.base);
      const Vec2 g = spec.phi.base_gradient(p.base);
      const double field_after = spec.field.value(flow_circle(spec.field, s, p.t));
      j[2] = {-field_after * g[0], -field_after * g[1], -fiber_derivative(spec.field, s, p.t)};
      break;
    }
    case Variant::morse_smale_control:
      j[2] = {0.0, 0.0, fiber_derivative(CircleField{spec.control_rate}, -1.0, p.t)};
      break;
    case Variant::skew_unbounded: {
      const Vec2 g = spec.phi.base_gradient(p.base);
      j[2] = {g[0], g[1], 1.0};
      break;
    }
    case Variant::anosov2d:
      break;
  }
  return j;
}

// ----------------------------------------------------------------- chart orbit

FiberState fiber_state_from_t(double c, double t) {
  t = wrap01(t);
  if (t == 0.0) return {FiberState::Kind::at_zero, 0.0, 1};
  if (t == 0.5) return {FiberState::Kind::at_half, 0.0, 1};
  const int sheet = t < 0.5 ? 1 : -1;
  const double u = t < 0.5 ? t : 1.0 - t;
  return {FiberState::Kind::chart, std::log(std::tan(std::numbers::pi * u)) / (kTwoPi * c), sheet};
}

double fiber_t(double c, const FiberState& f) {
  switch (f.kind) {
    case FiberState::Kind::at_zero: return 0.0;
    case FiberState::Kind::at_half: return 0.5;
    case FiberState::Kind::chart: break;
  }
  const double u = std::atan(std::exp(kTwoPi * c * f.s)) / std::numbers::pi;
  return f.sheet > 0 ? u : wrap01(1.0 - u);
}

SystemOrbit::SystemOrbit(const SystemSpec& spec, const TorusPoint3& start)
    : spec_(&spec), x_(TorusPoint2::wrapped(start.base.x1, start.base.x2)) {
  switch (spec.variant) {
    case Variant::compactified3d:
      rate_ = kTwoPi * spec.field.amplitude;
      fiber_ = fiber_state_from_t(spec.field.amplitude, start.t);
      break;
    case Variant::morse_smale_control:
      rate_ = kTwoPi * spec.control_rate;
      fiber_ = fiber_state_from_t(spec.control_rate, start.t);
      break;
    case Variant::skew_unbounded:
      fiber_.s = start.t;
      break;
    case Variant::anosov2d:
      break;
  }
}

void SystemOrbit::step() {
  using Kind = FiberState::Kind;
  switch (spec_->variant) {
    case Variant::anosov2d:
      last_log_derivative_ = 0.0;
      break;
    case Variant::skew_unbounded:
      fiber_.s += spec_->phi(x_);
      last_log_derivative_ = 0.0;
      break;
    case Variant::compactified3d: {
      const double phi = spec_->phi(x_);
      switch (fiber_.kind) {
        case Kind::chart:
          last_log_derivative_ = log_cosh_diff(rate_ * fiber_.s, rate_ * (fiber_.s + phi));
          fiber_.s += phi;
          fiber_.sheet = -fiber_.sheet;
          break;
        case Kind::at_zero: last_log_derivative_ = rate_ * phi; break;
        case Kind::at_half: last_log_derivative_ = -rate_ * phi; break;
      }
      break;
    }
    case Variant::morse_smale_control:
      switch (fiber_.kind) {
        case Kind::chart:
          last_log_derivative_ = log_cosh_diff(rate_ * fiber_.s, rate_ * (fiber_.s - 1.0));
          fiber_.s -= 1.0;
          break;
        case Kind::at_zero: last_log_derivative_ = -rate_; break;
        case Kind::at_half: last_log_derivative_ = rate_; break;
      }
      break;
  }
  x_ = spec_->matrix.apply(x_);
  ++steps_;
}

double SystemOrbit::fiber() const {
  switch (spec_->variant) {
    case Variant::anosov2d: return 0.0;
    case Variant::skew_unbounded: return wrap01(fiber_.s);
    case Variant::compactified3d: return fiber_t(spec_->field.amplitude, fiber_);
    case Variant::morse_smale_control: return fiber_t(spec_->control_rate, fiber_);
  }
  return 0.0;
}

Mat3 SystemOrbit::tangent() const {
  using Kind = FiberState::Kind;
  Mat3 j = base_block(spec_->matrix);
  switch (spec_->variant) {
    case Variant::anosov2d:
      break;
    case Variant::skew_unbounded: {
      const Vec2 g = spec_->phi.base_gradient(x_);
      j[2] = {g[0], g[1], 1.0};
      break;
    }
    case Variant::compactified3d: {
      const double phi = spec_->phi(x_);
      if (fiber_.kind == Kind::chart) {
        const Vec2 g = spec_->phi.base_gradient(x_);
        const double after = rate_ * (fiber_.s + phi);
        const double field_after =
            fiber_.sheet * spec_->field.amplitude * std::exp(-log_cosh(after));
        j[2] = {-field_after * g[0], -field_after * g[1],
                -std::exp(log_cosh_diff(rate_ * fiber_.s, after))};
      } else {
        const double sign = fiber_.kind == Kind::at_zero ? 1.0 : -1.0;
        j[2] = {0.0, 0.0, -std::exp(sign * rate_ * phi)};
      }
      break;
    }
    case Variant::morse_smale_control:
      if (fiber_.kind == Kind::chart) {
        j[2] = {0.0, 0.0, std::exp(log_cosh_diff(rate_ * fiber_.s, rate_ * (fiber_.s - 1.0)))};
      } else {
        j[2] = {0.0, 0.0, std::exp(fiber_.kind == Kind::at_zero ? -rate_ : rate_)};
      }
      break;
  }
  return j;
}

}  // namespace ergolab
