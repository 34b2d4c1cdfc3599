#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "ergolab/rng.hpp"
#include "ergolab/serialize.hpp"
#include "ergolab/torus.hpp"

using namespace ergolab;

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

// Lattice solutions of (A - I)x in Z^2 on the grid with denominator |det(A - I)|.
std::set<std::pair<std::int64_t, std::int64_t>> brute_fixed_points(std::int64_t a, std::int64_t b, std::int64_t c,
                                                                   std::int64_t d) {
  const std::int64_t D = std::abs((a - 1) * (d - 1) - b * c);
  std::set<std::pair<std::int64_t, std::int64_t>> out;
  for (std::int64_t i = 0; i < D; ++i) {
    for (std::int64_t j = 0; j < D; ++j) {
      if (((a - 1) * i + b * j) % D == 0 && (c * i + (d - 1) * j) % D == 0) out.insert({i, j});
    }
  }
  return out;
}

std::set<std::pair<std::int64_t, std::int64_t>> scaled(const std::vector<RationalPoint2>& pts, std::int64_t D) {
  std::set<std::pair<std::int64_t, std::int64_t>> out;
  for (const auto& p : pts) out.insert({p.num1 * (D / p.den), p.num2 * (D / p.den)});
  return out;
}

double rk4_circle(double c, double s, double t0, double h) {
  auto f = [c](double t) { return c * std::sin(2.0 * kPi * t); };
  const auto steps = static_cast<int>(std::llround(s / h));
  double t = t0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(t), k2 = f(t + 0.5 * h * k1), k3 = f(t + 0.5 * h * k2), k4 = f(t + h * k3);
    t += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
  }
  return t;
}

double circle_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 1.0);
  return std::min(d, 1.0 - d);
}

double default_phi(double x1) { return std::cos(2 * kPi * x1) + kSqrt2 * std::cos(4 * kPi * x1); }

}  // namespace

TEST_CASE("wrap01 reduces into [0,1) and snaps values next to 1") {
  CHECK(wrap01(1.25) == doctest::Approx(0.25));
  CHECK(wrap01(-0.25) == doctest::Approx(0.75));
  CHECK(wrap01(1.0) == 0.0);
  CHECK(wrap01(1.0 - 1e-16) == 0.0);
  CHECK(wrap01(-1e-17) == 0.0);
  CHECK(torus_delta(0.9) == doctest::Approx(-0.1));
}

TEST_CASE("apply_anosov integer-matrix examples") {
  const AnosovMatrix m;
  const auto p0 = apply_anosov(m, {0.0, 0.0});
  CHECK(p0.x1 == 0.0);
  CHECK(p0.x2 == 0.0);
  const auto p1 = apply_anosov(m, {0.5, 0.0});  // (3/2, 1) mod 1
  CHECK(p1.x1 == 0.5);
  CHECK(p1.x2 == 0.0);
  const auto p2 = apply_anosov(m, {0.25, 0.5});  // (1.25, 1.0) mod 1
  CHECK(p2.x1 == 0.25);
  CHECK(p2.x2 == 0.0);
}

TEST_CASE("apply_anosov and its inverse stay in [0,1) and round-trip") {
  const AnosovMatrix m;
  StreamRng rng(3, 0, "test-anosov");
  for (int i = 0; i < 10000; ++i) {
    const TorusPoint2 p{rng.uniform(), rng.uniform()};
    const auto q = m.apply(p);
    REQUIRE(q.x1 >= 0.0);
    REQUIRE(q.x1 < 1.0);
    REQUIRE(q.x2 >= 0.0);
    REQUIRE(q.x2 < 1.0);
    REQUIRE(torus_distance(m.apply_inverse(q), p) < 1e-12);
  }
}

TEST_CASE("AnosovMatrix derived fields match the characteristic polynomial") {
  const AnosovMatrix m;
  CHECK(m.unstable_eigenvalue() == doctest::Approx(2.0 + std::sqrt(3.0)).epsilon(1e-12));
  CHECK(m.stable_eigenvalue() == doctest::Approx(2.0 - std::sqrt(3.0)).epsilon(1e-12));
  CHECK(m.log_expansion() == doctest::Approx(std::log(2.0 + std::sqrt(3.0))).epsilon(1e-12));
  for (const auto& [v, lam] : {std::pair{m.unstable_direction(), m.unstable_eigenvalue()},
                               std::pair{m.stable_direction(), m.stable_eigenvalue()}}) {
    const auto w = m.apply_linear(v);
    CHECK(std::hypot(v[0], v[1]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(w[0] - lam * v[0]) < 1e-12);
    CHECK(std::abs(w[1] - lam * v[1]) < 1e-12);
  }
  CHECK_THROWS_AS(AnosovMatrix(2, 1, 1, 2), ConfigError);  // det 3
  CHECK_THROWS_AS(AnosovMatrix(1, 1, 0, 1), ConfigError);  // parabolic
}

TEST_CASE("fixed points agree with the brute-force lattice scan") {
  SUBCASE("spec examples") {
    CHECK(fixed_points_exact(AnosovMatrix(3, 1, 2, 1)) ==
          std::vector<RationalPoint2>{{0, 0, 1}, {1, 0, 2}});
    CHECK(fixed_points(AnosovMatrix(2, 1, 1, 1)).size() == 1);
    CHECK(fixed_points(AnosovMatrix(5, 3, 3, 2)).size() == 5);
  }
  SUBCASE("random hyperbolic matrices with small entries") {
    StreamRng rng(5, 0, "test-fixed-points");
    int tested = 0;
    while (tested < 10) {
      const auto draw = [&] { return static_cast<std::int64_t>(rng() % 13) - 6; };
      const std::int64_t a = draw(), b = draw(), c = draw(), d = draw();
      const std::int64_t det = a * d - b * c;
      if (std::abs(det) != 1 || std::abs(a + d) <= 2) continue;
      const auto brute = brute_fixed_points(a, b, c, d);
      const std::int64_t D = std::abs((a - 1) * (d - 1) - b * c);
      const auto found = fixed_points_exact(AnosovMatrix(a, b, c, d));
      CHECK(static_cast<std::int64_t>(brute.size()) == D);
      CHECK(scaled(found, D) == brute);
      ++tested;
    }
  }
}

TEST_CASE("default phi values at the fixed points") {
  const auto phi = Observable::default_phi();
  CHECK(eval_phi(phi, {0.0, 0.0}) == doctest::Approx(1.0 + kSqrt2));
  CHECK(eval_phi(phi, {0.5, 0.0}) == doctest::Approx(-1.0 + kSqrt2));
  const auto check = check_rational_independence(AnosovMatrix(), phi);
  CHECK(check.independent);
  CHECK(check.symbolic);
}

TEST_CASE("observables without a constant frequency have zero Lebesgue mean") {
  const Observable psi({{{1, 0, 0}, TrigKind::cos, 1.0, std::nullopt},
                        {{1, 2, 0}, TrigKind::sin, 0.7, std::nullopt},
                        {{0, 3, 0}, TrigKind::cos, -1.3, std::nullopt}});
  StreamRng rng(7, 0, "test-zero-mean");
  const int n = 1'000'000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = psi(TorusPoint2{rng.uniform(), rng.uniform()});
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double stderr_ = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean) < 3.0 * stderr_);
}

TEST_CASE("observables are 1-periodic in each coordinate") {
  const auto phi = Observable::default_phi();
  StreamRng rng(8, 0, "test-periodic");
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    REQUIRE(phi(TorusPoint2{a, b}) == doctest::Approx(default_phi(a)).epsilon(1e-12));
    REQUIRE(phi(TorusPoint3{{a, b}, 0.3}) == doctest::Approx(phi(TorusPoint3{TorusPoint2::wrapped(a + 1, b - 2), 0.3})));
  }
}

TEST_CASE("cocycle validation rejects constants and fiber terms") {
  CHECK_THROWS_AS(Observable({}, 1.0).validate_cocycle(), ConfigError);
  CHECK_THROWS_AS(Observable::fiber_cos().validate_cocycle(), ConfigError);
  CHECK_NOTHROW(Observable::default_phi().validate_cocycle());
  auto spec = SystemSpec::default3d();
  spec.phi = Observable::single({1, 0, 0}, TrigKind::cos);  // phi(p) = 1, phi(q) = -1
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("circle field pointwise invariants") {
  const CircleField X{0.05};
  CHECK(X.value(0.0) == 0.0);
  CHECK(std::abs(X.value(0.5)) < 1e-15);
  StreamRng rng(9, 0, "test-field");
  for (int i = 0; i < 1000; ++i) {
    const double t = rng.uniform();
    if (t > 0.0 && t < 0.5) REQUIRE(X.value(t) > 0.0);
    REQUIRE(X.value(-t) == doctest::Approx(-X.value(t)));
    REQUIRE(X.value(t + 1.0) == doctest::Approx(X.value(t)));
  }
}

TEST_CASE("flow_circle closed form") {
  const CircleField X{0.05};
  for (double s : {-3.0, 0.0, 0.7, 10.0}) CHECK(flow_circle(X, s, 0.0) == 0.0);
  for (double t0 : {0.1, 0.3, 0.75}) CHECK(flow_circle(X, 0.0, t0) == doctest::Approx(t0).epsilon(1e-15));
  const double v = flow_circle(X, 1.0, 0.25);
  CHECK(v > 0.25);
  CHECK(v < 0.5);
  CHECK(std::abs(v - rk4_circle(0.05, 1.0, 0.25, 1e-4)) < 1e-8);
  CHECK(std::abs(flow_circle(X, 2.5, 0.8) - rk4_circle(0.05, 2.5, 0.8, 1e-4)) < 1e-8);
  CHECK(std::abs(flow_circle(X, -1.5, 0.4) - rk4_circle(0.05, -1.5, 0.4, -1e-4)) < 1e-8);
}

TEST_CASE("fiber_derivative at the zeros and against finite differences") {
  const CircleField X{0.05};
  const double s = 0.7;
  CHECK(fiber_derivative(X, s, 0.0) == doctest::Approx(std::exp(2 * kPi * 0.05 * s)).epsilon(1e-14));
  CHECK(fiber_derivative(X, s, 0.5) == doctest::Approx(std::exp(-2 * kPi * 0.05 * s)).epsilon(1e-14));
  const double h = 1e-6;
  const double fd = (flow_circle(X, s, 0.3 + h) - flow_circle(X, s, 0.3 - h)) / (2 * h);
  CHECK(std::abs(fiber_derivative(X, s, 0.3) - fd) < 1e-6);
  StreamRng rng(10, 0, "test-fiber-derivative");
  for (int i = 0; i < 1000; ++i) REQUIRE(fiber_derivative(X, rng.uniform(-5, 5), rng.uniform()) > 0.0);
}

TEST_CASE("flow law and chain rule on a grid") {
  const CircleField X{0.05};
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) {
      const double s1 = -5.0 + i, s2 = -5.0 + j;
      for (int k = 0; k < 100; ++k) {
        const double t0 = k / 100.0;
        const double mid = flow_circle(X, s2, t0);
        REQUIRE(circle_gap(flow_circle(X, s1 + s2, t0), flow_circle(X, s1, mid)) < 1e-9);
        REQUIRE(std::abs(fiber_derivative(X, s1 + s2, t0) - fiber_derivative(X, s1, mid) * fiber_derivative(X, s2, t0)) <
                1e-8);
      }
    }
  }
}

TEST_CASE("apply_system fixed point, inverse and control fiber") {
  const auto spec = SystemSpec::default3d();
  const auto f0 = apply_system(spec, {{0.0, 0.0}, 0.0});
  CHECK(f0.base.x1 == 0.0);
  CHECK(f0.base.x2 == 0.0);
  CHECK(f0.t == 0.0);
  StreamRng rng(12, 0, "test-apply-system");
  const auto control = SystemSpec::control();
  for (int i = 0; i < 10000; ++i) {
    const TorusPoint3 p{{rng.uniform(), rng.uniform()}, rng.uniform()};
    REQUIRE(torus_distance(apply_system_inverse(spec, apply_system(spec, p)), p) < 1e-10);
    REQUIRE(torus_distance(apply_system_inverse(control, apply_system(control, p)), p) < 1e-10);
  }
  const double at_zero = tangent_map(control, {{0.1, 0.2}, 0.0})[2][2];
  for (int i = 0; i < 100; ++i) {
    REQUIRE(tangent_map(control, {{rng.uniform(), rng.uniform()}, 0.0})[2][2] == at_zero);
  }
  CHECK(std::log(at_zero) == doctest::Approx(control.control_log_derivative()).epsilon(1e-12));
}

TEST_CASE("tangent map matches finite differences of apply_system") {
  const auto spec = SystemSpec::default3d();
  StreamRng rng(13, 0, "test-tangent");
  const double h = 1e-7;
  for (int i = 0; i < 100; ++i) {
    const TorusPoint3 p{{0.1 + 0.8 * rng.uniform(), 0.1 + 0.8 * rng.uniform()}, 0.1 + 0.8 * rng.uniform()};
    const Mat3 J = tangent_map(spec, p);
    for (int col = 0; col < 3; ++col) {
      std::array<double, 3> lo{p.base.x1, p.base.x2, p.t}, hi = lo;
      lo[col] -= h;
      hi[col] += h;
      const auto a = apply_system(spec, {{lo[0], lo[1]}, lo[2]});
      const auto b = apply_system(spec, {{hi[0], hi[1]}, hi[2]});
      const double d[3] = {torus_delta(b.base.x1 - a.base.x1), torus_delta(b.base.x2 - a.base.x2), torus_delta(b.t - a.t)};
      for (int row = 0; row < 3; ++row) REQUIRE(std::abs(d[row] / (2 * h) - J[row][col]) < 1e-5);
    }
  }
}

TEST_CASE("Anosov map preserves Lebesgue measure (chi-square on 32x32 cells)") {
  const AnosovMatrix m;
  StreamRng rng(14, 0, "test-lebesgue");
  const int n = 1'000'000, cells = 32;
  std::vector<int> counts(cells * cells, 0);
  for (int i = 0; i < n; ++i) {
    const auto q = m.apply({rng.uniform(), rng.uniform()});
    ++counts[static_cast<int>(q.x1 * cells) * cells + static_cast<int>(q.x2 * cells)];
  }
  const double expected = static_cast<double>(n) / (cells * cells);
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(cells * cells - 1);
  CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 0.001);
}

TEST_CASE("skew translation sums phi along the base orbit") {
  const auto spec = SystemSpec::skew();
  SkewPoint p{{0.0, 0.0}, 0.0};
  for (int n = 1; n <= 50; ++n) {
    p = apply_skew(spec, p);
    REQUIRE(p.t == doctest::Approx(n * (1.0 + kSqrt2)).epsilon(1e-12));
  }
  StreamRng rng(15, 0, "test-skew");
  for (int trial = 0; trial < 100; ++trial) {
    const TorusPoint2 x{rng.uniform(), rng.uniform()};
    SkewPoint q{x, 0.0};
    double x1 = x.x1, x2 = x.x2, sum = 0.0;
    for (int n = 0; n < 20; ++n) {
      sum += default_phi(x1);
      const double y1 = 3 * x1 + x2, y2 = 2 * x1 + x2;
      x1 = y1 - std::floor(y1);
      x2 = y2 - std::floor(y2);
      q = apply_skew(spec, q);
    }
    REQUIRE(q.t == doctest::Approx(sum).epsilon(1e-9));
    const SkewPoint r{{rng.uniform(), rng.uniform()}, rng.uniform(-10, 10)};
    const auto back = apply_skew_inverse(spec, apply_skew(spec, r));
    REQUIRE(torus_distance(back.base, r.base) < 1e-12);
    REQUIRE(std::abs(back.t - r.t) < 1e-12);
  }
}

TEST_CASE("chart orbit agrees with direct iteration on short orbits") {
  StreamRng rng(16, 0, "test-chart");
  for (const auto& spec : {SystemSpec::default3d(), SystemSpec::control()}) {
    for (int trial = 0; trial < 100; ++trial) {
      TorusPoint3 p{{rng.uniform(), rng.uniform()}, rng.uniform()};
      SystemOrbit orbit(spec, p);
      for (int n = 0; n < 15; ++n) {
        p = apply_system(spec, p);
        orbit.step();
        REQUIRE(torus_distance(orbit.point(), p) < 1e-9);
      }
    }
  }
}

TEST_CASE("system specs round-trip through JSON") {
  for (const auto* name : {"default2d", "default3d", "control", "skew"}) {
    const auto spec = SystemSpec::preset(name);
    CHECK(system_from_json(to_json(spec), "$") == spec);
    CHECK(system_from_json(Json(name), "$") == spec);
  }
  CHECK_THROWS_AS(system_from_json(Json("nope"), "$.system"), ConfigError);
}
