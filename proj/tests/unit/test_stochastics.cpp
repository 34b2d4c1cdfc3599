#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "ergolab/rng.hpp"
#include "ergolab/stats.hpp"
#include "ergolab/stochastics.hpp"

using namespace ergolab;

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

double default_phi(double x1) { return std::cos(2 * kPi * x1) + kSqrt2 * std::cos(4 * kPi * x1); }

SystemSpec with_phi(Observable phi) {
  auto spec = SystemSpec::default2d();
  spec.phi = std::move(phi);
  return spec;
}

// psi o A - psi for psi = cos(2 pi x1), A = [[3,1],[2,1]].
Observable coboundary() {
  return Observable({{{3, 1, 0}, TrigKind::cos, 1.0, std::nullopt}, {{1, 0, 0}, TrigKind::cos, -1.0, std::nullopt}});
}

// Sum over lags |k| <= max_lag of the correlations of a cosine polynomial
// under the dual action k -> A^T k: cos terms pair with coefficient 1/2 when
// (A^T)^k maps one frequency onto plus or minus another.
double fourier_pairing_sigma(const std::vector<std::pair<std::array<std::int64_t, 2>, double>>& terms, int max_lag) {
  auto dual = [](std::array<std::int64_t, 2> k) { return std::array<std::int64_t, 2>{3 * k[0] + 2 * k[1], k[0] + k[1]}; };
  double sigma = 0.0;
  for (const auto& [ki, ai] : terms) {
    std::array<std::int64_t, 2> image = ki;
    for (int lag = 0; lag <= max_lag; ++lag) {
      for (const auto& [kj, aj] : terms) {
        const bool same = image == kj;
        const bool opposite = image[0] == -kj[0] && image[1] == -kj[1];
        if (same || opposite) sigma += (lag == 0 ? 1.0 : 2.0) * 0.5 * ai * aj;
      }
      image = dual(image);
    }
  }
  return sigma;
}

}  // namespace

TEST_CASE("Birkhoff sums at the fixed points and along orbits") {
  const auto spec = SystemSpec::default2d();
  const auto at_zero = birkhoff_trace(spec, {0.0, 0.0}, 100);
  const auto at_half = birkhoff_trace(spec, {0.5, 0.0}, 100);
  CHECK(at_zero.sums[0] == 0.0);
  for (int n = 1; n <= 100; ++n) {
    CHECK(at_zero.sums[n] == doctest::Approx(n * (1 + kSqrt2)).epsilon(1e-12));
    CHECK(at_half.sums[n] == doctest::Approx(n * (kSqrt2 - 1)).epsilon(1e-12));
  }
  const auto trace = birkhoff_trace(spec, {0.3, 0.9}, 50);
  double x1 = 0.3, x2 = 0.9;
  for (int j = 0; j < 50; ++j) {
    REQUIRE(trace.sums[j + 1] - trace.sums[j] == doctest::Approx(default_phi(x1)).epsilon(1e-9));
    const double y1 = 3 * x1 + x2, y2 = 2 * x1 + x2;
    x1 = y1 - std::floor(y1);
    x2 = y2 - std::floor(y2);
  }
}

TEST_CASE("Birkhoff averages of random starts are small at n = 1e4") {
  const auto spec = SystemSpec::default2d();
  int small = 0;
  const int trials = 300;
  for (int i = 0; i < trials; ++i) {
    StreamRng rng(31, static_cast<std::uint64_t>(i), "test-birkhoff");
    const auto t = birkhoff_trace(spec, {rng.uniform(), rng.uniform()}, 10000);
    small += std::abs(t.sums.back()) / 10000.0 < 0.05;
  }
  CHECK(small >= 0.99 * trials);
}

TEST_CASE("Fourier pairing gives sigma = 3/2 for the default cocycle") {
  const double exact = fourier_pairing_sigma({{{1, 0}, 1.0}, {{2, 0}, kSqrt2}}, 20);
  CHECK(exact == doctest::Approx(kDefaultSigma).epsilon(1e-15));
  CHECK(fourier_pairing_sigma({{{3, 1}, 1.0}, {{1, 0}, -1.0}}, 20) == doctest::Approx(0.0));
}

TEST_CASE("Green-Kubo estimate") {
  const auto spec = SystemSpec::default2d();
  const auto gk = estimate_sigma_green_kubo(spec, 10, 400000, 7);
  REQUIRE(gk.correlations.size() == 11);
  REQUIRE(gk.partial_sums.size() == 11);
  CHECK(std::abs(gk.correlations[0] - 1.5) < 3 * gk.partial_stderr[0]);
  for (std::size_t k = 1; k < gk.correlations.size(); ++k) CHECK(std::abs(gk.correlations[k]) < 0.02);
  CHECK(std::abs(gk.value - 1.5) < 0.1);
  CHECK(gk.value == gk.partial_sums.back());

  const auto single = estimate_sigma_green_kubo(with_phi(Observable::single({1, 0, 0}, TrigKind::cos)), 3, 200000, 7);
  CHECK(std::abs(single.correlations[0] - 0.5) < 3 * single.partial_stderr[0]);

  const auto half = estimate_sigma_green_kubo(spec, 5, 100000, 8);
  const auto full = estimate_sigma_green_kubo(spec, 5, 200000, 8);
  CHECK(half.standard_error / full.standard_error == doctest::Approx(std::sqrt(2.0)).epsilon(0.15));

  CHECK_THROWS_AS(estimate_sigma_green_kubo(spec, 0, 1000, 1), std::invalid_argument);
}

TEST_CASE("coboundaries have vanishing sigma") {
  const auto spec = with_phi(coboundary());
  const auto gk = estimate_sigma_green_kubo(spec, 5, 200000, 3);
  CHECK(std::abs(gk.correlations[0] - 1.0) < 0.02);
  CHECK(std::abs(gk.correlations[1] + 0.5) < 0.02);
  CHECK(std::abs(gk.value) < 5 * gk.standard_error + 0.01);
  const auto ve = estimate_sigma_variance(spec, 1000, 2000, 3);
  CHECK(ve.value < 0.01);
}

TEST_CASE("direct variance estimator") {
  const auto spec = SystemSpec::default2d();
  const auto short_run = estimate_sigma_variance(spec, 1000, 4000, 4);
  const auto long_run = estimate_sigma_variance(spec, 4000, 4000, 5);
  CHECK(std::abs(short_run.value - 1.5) < 4 * short_run.standard_error);
  CHECK(std::abs(long_run.value - 1.5) < 4 * long_run.standard_error);
  CHECK(std::abs(short_run.value - long_run.value) <
        3 * std::hypot(short_run.standard_error, long_run.standard_error));
  CHECK(long_run.scaled_sums.size() == 4000);
  CHECK_THROWS_AS(estimate_sigma_variance(spec, 999, 10, 1), std::invalid_argument);
}

TEST_CASE("CLT paths resolve the integral exactly from partial sums") {
  const auto spec = SystemSpec::default2d();
  const TorusPoint2 x{0.41, 0.17};
  const std::int64_t n = 1000;
  const int grid = 7;
  const auto path = sample_clt_path(spec, x, n, grid, 1.5);
  const auto trace = birkhoff_trace(spec, x, n);
  REQUIRE(path.values.size() == grid + 1);
  CHECK(path.values[0] == 0.0);
  double y1 = x.x1, y2 = x.x2;
  std::vector<double> phi_along;
  for (std::int64_t j = 0; j <= n; ++j) {
    phi_along.push_back(default_phi(y1));
    const double a = 3 * y1 + y2, b = 2 * y1 + y2;
    y1 = a - std::floor(a);
    y2 = b - std::floor(b);
  }
  for (int g = 1; g <= grid; ++g) {
    const double s = static_cast<double>(n) * g / grid;
    const auto whole = static_cast<std::int64_t>(std::floor(s));
    const double integral = trace.sums[whole] + (s - whole) * (whole < n ? phi_along[whole] : 0.0);
    CHECK(path.values[g] == doctest::Approx(integral / std::sqrt(1.5 * n)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(sample_clt_path(spec, x, n, grid, 0.0), std::invalid_argument);
}

TEST_CASE("CLT ensemble variance and independent increments") {
  const auto paths = sample_clt_paths(SystemSpec::default2d(), 10000, 100, kDefaultSigma, 1000, 11);
  std::vector<double> end;
  for (const auto& p : paths) end.push_back(p.values.back());
  CHECK(std::abs(variance(end) - 1.0) < 0.1);
  const auto report = wiener_tests(paths);
  // Increments are uncorrelated exactly; the sample correlation has stderr 1/sqrt(paths).
  CHECK(std::abs(report.half_increment_correlation) < 3.0 / std::sqrt(static_cast<double>(paths.size())));
  CHECK(std::abs(report.variance_slope - 1.0) < 0.1);
}

TEST_CASE("Wiener tests on the Gaussian reference generator") {
  std::vector<double> p_values;
  for (std::uint64_t r = 0; r < 40; ++r) {
    const auto paths = gaussian_walk_paths(600, 400, 40, 1000 + r);
    const auto report = wiener_tests(paths, 4);
    p_values.push_back(report.ks.p_value);
    REQUIRE(report.increment_correlation.size() == 4);
  }
  // Under the null the p-values are uniform.
  CHECK(ks_test_uniform(p_values).p_value > 0.001);
}

TEST_CASE("Wiener tests reject the degenerate fixed-point path") {
  const auto path = sample_clt_path(SystemSpec::default2d(), {0.0, 0.0}, 1000, 100, kDefaultSigma);
  const std::vector<CltPath> paths(500, path);
  const auto report = wiener_tests(paths);
  CHECK(report.ks.p_value < 0.01);
  CHECK(std::abs(report.variance_slope - 1.0) > 0.1);
  CHECK_THROWS_AS(wiener_tests(std::vector<CltPath>(499, path)), std::invalid_argument);
  CHECK_THROWS_AS(wiener_tests(paths, 3), std::invalid_argument);
}

TEST_CASE("occupation scan counts the high set of the Birkhoff trace") {
  const auto spec = SystemSpec::default2d();
  const TorusPoint2 x{0.77, 0.05};
  const int max_k = 12;
  const auto scan = occupation_scan(spec, x, max_k, kDefaultSigma, 0.1);
  const auto trace = birkhoff_trace(spec, x, std::int64_t{1} << max_k);
  REQUIRE(scan.n.size() == max_k + 1);
  bool hit = false;
  for (int k = 0; k <= max_k; ++k) {
    const std::int64_t n = std::int64_t{1} << k;
    std::int64_t count = 0;
    for (std::int64_t j = 0; j < n; ++j) count += trace.sums[j] >= std::sqrt(kDefaultSigma * n);
    CHECK(scan.n[k] == n);
    CHECK(scan.count[k] == count);
    hit = hit || count >= 0.9 * n;
  }
  CHECK(scan.hit == hit);
  const auto at_fixed = occupation_scan(spec, {0.0, 0.0}, 10, kDefaultSigma, 0.1);
  CHECK(at_fixed.hit);
  const double p = brownian_occupation_probability(0.1, 2000, 200, 3);
  CHECK(p >= 0.0);
  CHECK(p < 0.2);
  CHECK(brownian_occupation_probability(0.1, 2000, 200, 3, Exec::serial) == p);
}

TEST_CASE("serial and parallel estimators agree bit for bit") {
  const auto spec = SystemSpec::default2d();
  set_worker_count(4);
  const auto a = estimate_sigma_green_kubo(spec, 4, 20000, 5, Exec::serial);
  const auto b = estimate_sigma_green_kubo(spec, 4, 20000, 5, Exec::parallel);
  CHECK(a.partial_sums == b.partial_sums);
  CHECK(a.partial_stderr == b.partial_stderr);
  const auto v1 = estimate_sigma_variance(spec, 1000, 300, 5, Exec::serial);
  const auto v2 = estimate_sigma_variance(spec, 1000, 300, 5, Exec::parallel);
  CHECK(v1.scaled_sums == v2.scaled_sums);
  CHECK(v1.value == v2.value);
  const auto p1 = sample_clt_paths(spec, 500, 10, 1.5, 50, 5, Exec::serial);
  const auto p2 = sample_clt_paths(spec, 500, 10, 1.5, 50, 5, Exec::parallel);
  for (std::size_t i = 0; i < p1.size(); ++i) REQUIRE(p1[i].values == p2[i].values);
  set_worker_count(0);
}
