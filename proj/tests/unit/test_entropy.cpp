#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ergolab/entropy.hpp"
#include "ergolab/parallel.hpp"

using namespace ergolab;

namespace {

const double kLogLambda = std::log(2.0 + std::sqrt(3.0));
const TorusPoint3 kAnchor{{0.3183098861837907, 0.5772156649015329}, 0.0};

double torus_gap(const PhasePoint& a, const PhasePoint& b, int dimension) {
  double sum = 0.0;
  for (int i = 0; i < dimension; ++i) {
    double d = std::abs(a[i] - b[i]);
    d -= std::floor(d);
    d = std::min(d, 1.0 - d);
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::vector<PhasePoint> orbit(const Disc& disc, double u, int n) {
  std::vector<PhasePoint> out{disc.embed(u)};
  for (int k = 1; k < std::max(n, 1); ++k) out.push_back(disc.map(out.back()));
  return out;
}

double bowen_gap(const std::vector<PhasePoint>& a, const std::vector<PhasePoint>& b, int dimension) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, torus_gap(a[k], b[k], dimension));
  return worst;
}

EntropySettings quick_settings() {
  EntropySettings s;
  s.n_list = {7, 8, 9, 10};
  s.orbit_length = 10000;
  return s;
}

}  // namespace

TEST_CASE("n = 0 packs the segment statically") {
  const auto disc = unstable_segment(SystemSpec::default2d(), kAnchor, 0.1);
  const auto set = max_separated_set(disc, 0, 0.01);
  CHECK(std::abs(static_cast<double>(set.cardinality()) - 0.1 / 0.01) <= 1.0);
}

TEST_CASE("separated sets are pairwise separated and maximal") {
  const auto disc = unstable_segment(SystemSpec::default2d(), kAnchor, 0.05);
  const int n = 3;
  const double rho = 0.01;
  const auto set = max_separated_set(disc, n, rho);
  REQUIRE(set.cardinality() > 10);
  CHECK(std::is_sorted(set.parameters.begin(), set.parameters.end()));
  std::vector<std::vector<PhasePoint>> admitted;
  for (double u : set.parameters) admitted.push_back(orbit(disc, u, n));
  for (std::size_t i = 0; i < admitted.size(); ++i)
    for (std::size_t j = i + 1; j < admitted.size(); ++j) REQUIRE(bowen_gap(admitted[i], admitted[j], 2) > rho);
  std::int64_t uncovered = 0;
  for (std::int64_t j = 0; j < set.probes; ++j) {
    const auto probe = orbit(disc, static_cast<double>(j) * set.resolution, n);
    bool near = false;
    for (const auto& a : admitted) {
      if (bowen_gap(probe, a, 2) <= rho) {
        near = true;
        break;
      }
    }
    uncovered += !near;
  }
  CHECK(uncovered == 0);
  CHECK(set.probes == static_cast<std::int64_t>(std::floor(0.05 / set.resolution)) + 1);
}

TEST_CASE("cardinality is monotone in rho and n") {
  const auto disc = unstable_segment(SystemSpec::default2d(), kAnchor, 0.01);
  for (int n : {2, 4, 6}) {
    const auto fine = max_separated_set(disc, n, 0.01);
    const auto coarse = max_separated_set(disc, n, 0.02);
    const auto longer = max_separated_set(disc, n + 1, 0.01);
    CHECK(coarse.cardinality() <= fine.cardinality());
    CHECK(2 * coarse.cardinality() + 2 >= fine.cardinality());
    CHECK(longer.cardinality() >= fine.cardinality());
  }
}

TEST_CASE("cardinality grows by the unstable eigenvalue") {
  const auto disc = unstable_segment(SystemSpec::default2d(), kAnchor, 1e-3);
  const auto a = max_separated_set(disc, 10, 0.02);
  const auto b = max_separated_set(disc, 11, 0.02);
  const double ratio = static_cast<double>(b.cardinality()) / static_cast<double>(a.cardinality());
  CHECK(ratio == doctest::Approx(2.0 + std::sqrt(3.0)).epsilon(0.1));
}

TEST_CASE("entropy estimates") {
  const auto anosov = u_entropy_estimate(unstable_segment(SystemSpec::default2d(), kAnchor, 1e-3), 0.02, {7, 8, 9, 10});
  CHECK(anosov.value == doctest::Approx(kLogLambda).epsilon(0.1));
  CHECK(anosov.value == anosov.fit.slope);
  const auto identity = u_entropy_estimate(identity_segment({0.2, 0.4}, 0.1), 0.01, {1, 2, 3, 4});
  CHECK(identity.value == doctest::Approx(0.0));
  for (auto c : identity.cardinality) CHECK(c == identity.cardinality.front());
  const auto control = u_entropy_estimate(unstable_segment(SystemSpec::control(), kAnchor, 1e-3), 0.02, {7, 8, 9, 10});
  CHECK(control.cardinality == anosov.cardinality);
  CHECK_THROWS_AS(u_entropy_estimate(identity_segment({0.2, 0.4}, 0.1), 0.01, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("coarse probe grids are rejected") {
  const auto disc = unstable_segment(SystemSpec::default2d(), kAnchor, 0.05);
  CHECK_THROWS_AS(max_separated_set(disc, 4, 0.01, 0.01), NumericalGuard);
}

TEST_CASE("serial and parallel separated sets coincide") {
  const auto disc = unstable_segment(SystemSpec::default3d(), {{0.1, 0.7}, 0.25}, 2e-3);
  set_worker_count(4);
  const auto a = max_separated_set(disc, 6, 0.02, Exec::serial);
  const auto b = max_separated_set(disc, 6, 0.02, Exec::parallel);
  set_worker_count(0);
  CHECK(a.parameters == b.parameters);
}

TEST_CASE("Bowen balls") {
  const auto wide = unstable_segment(SystemSpec::default2d(), kAnchor, 0.1);
  CHECK(bowen_ball_volume(wide, 0.05, 0, 0.02) == doctest::Approx(0.04).epsilon(1e-6));
  CHECK(bowen_ball_volume(wide, 0.01, 0, 0.02) == doctest::Approx(0.03).epsilon(1e-6));
  const auto disc = unstable_segment(SystemSpec::default2d(), kAnchor, 1e-3);
  CHECK(bowen_ball_volume(disc, 5e-4, 0, 0.02) == doctest::Approx(1e-3).epsilon(1e-6));
  for (int n = 4; n < 9; ++n) {
    const double ratio = bowen_ball_volume(disc, 5e-4, n + 1, 0.02) / bowen_ball_volume(disc, 5e-4, n, 0.02);
    CHECK(ratio == doctest::Approx(1.0 / (2.0 + std::sqrt(3.0))).epsilon(0.05));
  }
  for (int n = 4; n <= 9; ++n) {
    const double packing = bowen_ball_volume(disc, 5e-4, n, 0.02) *
                           static_cast<double>(max_separated_set(disc, n, 0.02).cardinality()) / 1e-3;
    CHECK(packing >= 0.2);
    CHECK(packing <= 5.0);
  }
}

TEST_CASE("Jacobian averages") {
  const auto spec = SystemSpec::default2d();
  const auto u = spec.matrix.unstable_direction();
  CHECK(jacobian_average(spec, kAnchor, {{u[0], u[1], 0.0}}, 1000, 10) == doctest::Approx(kLogLambda).epsilon(1e-9));
  CHECK(std::abs(jacobian_average(spec, kAnchor, {{1, 0, 0}, {0, 1, 0}}, 1000, 10)) < 1e-9);
}

TEST_CASE("Gibbs residual and the Ruelle side") {
  const auto settings = quick_settings();
  for (const auto& spec : {SystemSpec::default2d(), SystemSpec::default3d()}) {
    const auto g = gibbs_residual(spec, settings);
    CHECK(g.jacobian_integral == doctest::Approx(kLogLambda).epsilon(1e-6));
    CHECK(g.residual == doctest::Approx(g.entropy.value - g.jacobian_integral));
    CHECK(std::abs(g.residual) < 0.15);
    CHECK(g.residual <= 0.05);
  }
}

TEST_CASE("Pesin check") {
  const auto settings = quick_settings();
  const auto unstable = pesin_check(SystemSpec::default2d(), PesinSubspace::unstable, settings);
  CHECK(unstable.jacobian_integral == doctest::Approx(kLogLambda).epsilon(1e-6));
  CHECK(std::abs(unstable.margin) < 0.15);
  const auto full = pesin_check(SystemSpec::default2d(), PesinSubspace::full, settings);
  CHECK(std::abs(full.jacobian_integral) < 1e-9);
  CHECK(full.margin == doctest::Approx(full.entropy));
  CHECK(full.margin >= 0.0);
  const auto control_spec = SystemSpec::control();
  const auto control = pesin_check(control_spec, PesinSubspace::unstable_fiber, settings);
  CHECK(control.jacobian_integral == doctest::Approx(kLogLambda + control_spec.control_log_derivative()).epsilon(1e-3));
  CHECK(control.margin > 0.0);
  CHECK(control.margin == doctest::Approx(-control_spec.control_log_derivative()).epsilon(0.15));
  CHECK(pesin_subspace_from_string(to_string(PesinSubspace::unstable_fiber)) == PesinSubspace::unstable_fiber);
}
