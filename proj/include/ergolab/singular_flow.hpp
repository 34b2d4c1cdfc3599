#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/stats.hpp"

namespace ergolab {

using FlowState = std::array<double, 3>;

enum class FlowMethod : std::uint8_t { rk4, rk45 };

std::string to_string(FlowMethod m);
FlowMethod flow_method_from_string(const std::string& name);

/// Lorenz field with the classical chaotic parameters.
struct FlowSpec {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
  double h = 1e-3;             ///< fixed step (rk4) or initial step (rk45)
  FlowMethod method = FlowMethod::rk4;
  double tolerance = 1e-10;    ///< rk45 absolute and relative tolerance
  double divergence_radius = 1e3;

  /// Throws ConfigError on non-positive step, tolerance or radius.
  void validate() const;
  FlowState field(const FlowState& x) const;
};

enum class FlowObservable : std::uint8_t { x, y, z, norm2, one };

std::string to_string(FlowObservable psi);
FlowObservable flow_observable_from_string(const std::string& name);
double evaluate(FlowObservable psi, const FlowState& x);

/// Streaming single-trajectory integrator. Throws NumericalGuard once |x|
/// exceeds the divergence radius.
class FlowIntegrator {
 public:
  FlowIntegrator(const FlowSpec& spec, const FlowState& start);

  /// Integrates to time() + dt and calls visit(t0, x0, t1, x1) for every
  /// internal step. rk4 uses round(dt / h) steps of size dt / round(dt / h).
  template <class Visit>
  void advance(double dt, Visit&& visit);
  void advance(double dt) {
    advance(dt, [](double, const FlowState&, double, const FlowState&) {});
  }

  const FlowState& state() const { return x_; }
  double time() const { return t_; }
  std::int64_t steps() const { return steps_; }

 private:
  void rk4_step(double h);
  /// One accepted adaptive step no longer than `limit`; returns its length.
  double rk45_step(double limit);
  void guard() const;

  FlowSpec spec_;
  FlowState x_;
  double t_ = 0.0;
  double dt_adaptive_;
  std::int64_t steps_ = 0;
};

struct TrajectorySample {
  double t = 0.0;
  FlowState x{};
};

/// Samples every `stride` internal steps (and the final state).
std::vector<TrajectorySample> integrate(const FlowSpec& spec, const FlowState& start, double T,
                                        std::int64_t stride = 1000);

struct FlowAverage {
  FlowObservable observable = FlowObservable::z;
  double T = 0.0;
  double value = 0.0;  ///< (1/T) * trapezoid integral of psi along the orbit
  std::vector<double> checkpoint_t;
  std::vector<double> checkpoint_value;
  std::vector<double> checkpoint_integral;
};

FlowAverage flow_average(const FlowSpec& spec, const FlowState& start, FlowObservable psi, double T,
                         std::vector<double> checkpoints = {});

/// Long-run reference value of the integral of psi against the SRB
/// measure, with a batch-means standard error.
struct FlowBaseline {
  double value = 0.0;
  double standard_error = 0.0;
  double T = 0.0;
  int batches = 0;
};

FlowBaseline flow_baseline(const FlowSpec& spec, const FlowState& start, FlowObservable psi,
                           double T = 1e5, int batches = 50, double burn_in = 100.0);

/// Uniform starts in a box around the attractor, member i drawn from
/// StreamRng(seed, i, "flow-start").
struct FlowEnsemble {
  std::int64_t count = 10'000;
  FlowState lower{-20.0, -25.0, 5.0};
  FlowState upper{20.0, 25.0, 45.0};
  std::uint64_t seed = 1;

  FlowState member(std::int64_t i) const;
};

struct FlowDeviationCurve {
  double epsilon = 0.0;
  double reference = 0.0;
  double reference_stderr = 0.0;
  /// Set when epsilon is within 5 baseline standard errors: the fit then
  /// treats a noisy baseline as exact.
  bool baseline_flag = false;
  std::vector<double> T;
  std::vector<std::int64_t> deviant;
  std::int64_t total = 0;
  std::vector<double> fraction;
  std::optional<RateFit> fit;  ///< decay in T over entries with >= 10 deviant members
};

FlowDeviationCurve flow_deviation(const FlowSpec& spec, const FlowEnsemble& ensemble, FlowObservable psi,
                                  double epsilon, std::vector<double> T_list, const FlowBaseline& baseline,
                                  Exec exec = Exec::parallel);

/// |x_h(T) - x_{h/2}(T)| / |x_{h/2}(T) - x_{h/4}(T)| for rk4: about 16 for a
/// fourth-order method.
double rk4_order_ratio(const FlowSpec& spec, const FlowState& start, double T, double h);

/// rk4_order_ratio over `segments` starts spaced `spacing` apart along one
/// orbit after `burn_in`. Chaotic amplification makes single ratios noisy,
/// so the median summarizes them.
struct OrderSurvey {
  std::vector<double> ratios;
  double median = 0.0;
};

OrderSurvey rk4_order_survey(const FlowSpec& spec, const FlowState& start, int segments, double T,
                             double h, double spacing = 37.0, double burn_in = 50.0);

template <class Visit>
void FlowIntegrator::advance(double dt, Visit&& visit) {
  if (!(dt >= 0.0)) throw std::invalid_argument("FlowIntegrator::advance: dt must be non-negative");
  if (spec_.method == FlowMethod::rk4) {
    const auto n = static_cast<std::int64_t>(std::llround(dt / spec_.h));
    if (n == 0) return;
    const double h = dt / static_cast<double>(n);
    const double t0 = t_;
    for (std::int64_t i = 0; i < n; ++i) {
      const FlowState before = x_;
      const double tb = t0 + static_cast<double>(i) * h;
      rk4_step(h);
      t_ = t0 + static_cast<double>(i + 1) * h;
      visit(tb, before, t_, x_);
    }
    t_ = t0 + dt;
    return;
  }
  const double target = t_ + dt;
  while (target - t_ > 1e-12 * std::max(1.0, std::abs(target))) {
    const FlowState before = x_;
    const double tb = t_;
    const double taken = rk45_step(target - t_);
    t_ = tb + taken;
    visit(tb, before, t_, x_);
  }
  t_ = target;
}

}  // namespace ergolab
