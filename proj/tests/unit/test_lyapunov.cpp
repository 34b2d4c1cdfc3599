#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ergolab/lyapunov.hpp"
#include "ergolab/rng.hpp"

using namespace ergolab;

namespace {

constexpr double kPi = std::numbers::pi;
const double kLogLambda = std::log(2.0 + std::sqrt(3.0));

double default_phi(double x1) { return std::cos(2 * kPi * x1) + std::sqrt(2.0) * std::cos(4 * kPi * x1); }

}  // namespace

TEST_CASE("lambda_c is the accumulated log-derivative over n") {
  const auto spec = SystemSpec::default3d();
  const auto trace = center_exponent_trace(spec, {{0.2, 0.3}, 0.4}, 5000, {10, 100, 1000, 5000});
  REQUIRE(trace.checkpoints.size() == 4);
  for (const auto& cp : trace.checkpoints) CHECK(cp.lambda_c == cp.log_derivative_sum / static_cast<double>(cp.n));
}

TEST_CASE("start on the repelling circle follows the base Birkhoff average") {
  // On t = 1/2 the fiber derivative is exp(-2 pi c phi(x_n)) at every step.
  const auto spec = SystemSpec::default3d();
  const double c = spec.field.amplitude;
  double x1 = 0.31, x2 = 0.77, sum = 0.0;
  const std::int64_t n = 2000;
  for (std::int64_t i = 0; i < n; ++i) {
    sum += default_phi(x1);
    const double y1 = 3 * x1 + x2, y2 = 2 * x1 + x2;
    x1 = y1 - std::floor(y1);
    x2 = y2 - std::floor(y2);
  }
  const auto trace = center_exponent_trace(spec, {{0.31, 0.77}, 0.5}, n, {n});
  CHECK(trace.checkpoints.back().lambda_c == doctest::Approx(-2 * kPi * c * sum / n).epsilon(1e-8));
  const auto long_trace = center_exponent_trace(spec, {{0.31, 0.77}, 0.5}, 1'000'000, {1'000'000});
  CHECK(std::abs(long_trace.checkpoints.back().lambda_c) < 0.01);
}

TEST_CASE("control system exponent converges to log r'(0)") {
  const auto spec = SystemSpec::control();
  for (double t : {0.1, 0.3, 0.45, 0.7, 0.95}) {
    const auto trace = center_exponent_trace(spec, {{0.6, 0.2}, t}, 100000, {100000});
    CHECK(trace.checkpoints.back().lambda_c == doctest::Approx(spec.control_log_derivative()).epsilon(1e-3));
    CHECK(trace.checkpoints.back().lambda_c < 0.0);
  }
}

TEST_CASE("random compactified starts have small center exponents at n = 1e6") {
  const auto values = center_exponent_ensemble(SystemSpec::default3d(), 4, 99, 1'000'000);
  for (double v : values) CHECK(std::abs(v) < 0.01);
}

TEST_CASE("accumulated log-derivative telescopes against finite differences") {
  const auto spec = SystemSpec::default3d();
  StreamRng rng(21, 0, "test-telescoping");
  for (int trial = 0; trial < 20; ++trial) {
    const TorusPoint3 start{{rng.uniform(), rng.uniform()}, 0.05 + 0.4 * rng.uniform()};
    const int n = 1 + static_cast<int>(rng() % 30);
    const double h = 1e-7;
    auto fiber_after = [&](double t) {
      TorusPoint3 p{start.base, t};
      for (int i = 0; i < n; ++i) p = apply_system(spec, p);
      return p.t;
    };
    const double fd = torus_delta(fiber_after(start.t + h) - fiber_after(start.t - h)) / (2 * h);
    const auto trace = center_exponent_trace(spec, start, n, {n});
    REQUIRE(std::abs(trace.checkpoints.back().log_derivative_sum - std::log(std::abs(fd))) < 1e-5);
  }
}

TEST_CASE("spectrum of the linear Anosov map") {
  const auto spectrum = spectrum_trace(SystemSpec::default2d(), {{0.1, 0.2}, 0.0}, 10000);
  REQUIRE(spectrum.size() == 2);
  CHECK(std::abs(spectrum[0] - kLogLambda) < 1e-9);
  CHECK(std::abs(spectrum[1] + kLogLambda) < 1e-9);
  CHECK(std::abs(spectrum[0] + spectrum[1]) < 1e-8);
  CHECK_THROWS_AS(spectrum_trace(SystemSpec::default2d(), {}, 99), std::invalid_argument);
}

TEST_CASE("compactified spectrum: middle exponent matches the center trace") {
  const auto spec = SystemSpec::default3d();
  const TorusPoint3 start{{0.123, 0.456}, 0.3};
  const std::int64_t n = 2'000'000;
  const auto spectrum = spectrum_trace(spec, start, n, 0);
  const double center = center_exponent_trace(spec, start, n, {n}).checkpoints.back().lambda_c;
  REQUIRE(spectrum.size() == 3);
  CHECK(spectrum[0] > spectrum[1]);
  CHECK(spectrum[1] > spectrum[2]);
  CHECK(std::abs(spectrum[1] - center) < 1e-6);
  // det Df = det A times the fiber derivative, and det A = 1.
  CHECK(std::abs(spectrum[0] + spectrum[1] + spectrum[2] - center) < 1e-12);
}

TEST_CASE("domination diagnostic") {
  SUBCASE("c = 0 decouples into A x Id") {
    auto spec = SystemSpec::default3d();
    spec.field.amplitude = 0.0;
    const auto d = domination_diagnostic(spec, 500);
    CHECK(d.unstable_margin == doctest::Approx(kLogLambda).epsilon(1e-12));
    CHECK(d.stable_margin == doctest::Approx(kLogLambda).epsilon(1e-12));
    CHECK(d.dominated);
  }
  SUBCASE("default amplitude keeps a positive margin") {
    const auto spec = SystemSpec::default3d();
    const auto d = domination_diagnostic(spec, 2000);
    const double bound = 2 * kPi * 0.05 * (1 + std::sqrt(2.0));
    CHECK(d.bound_margin == doctest::Approx(kLogLambda - bound).epsilon(1e-12));
    CHECK(d.max_abs_log_fiber <= bound + 1e-12);
    CHECK(d.worst_margin > 0.0);
    CHECK(d.dominated);
  }
  SUBCASE("c = 1 leaves the partially hyperbolic regime") {
    auto spec = SystemSpec::default3d();
    spec.field.amplitude = 1.0;
    const auto d = domination_diagnostic(spec, 2000);
    CHECK(d.bound_margin < 0.0);
    CHECK(d.worst_margin < 0.0);
    CHECK_FALSE(d.dominated);
  }
}
