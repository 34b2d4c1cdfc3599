#include "ergolab/singular_flow.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

namespace odeint = boost::numeric::odeint;

std::string to_string(FlowMethod m) { return m == FlowMethod::rk4 ? "rk4" : "rk45"; }

FlowMethod flow_method_from_string(const std::string& name) {
  if (name == "rk4") return FlowMethod::rk4;
  if (name == "rk45" || name == "rk45-adaptive") return FlowMethod::rk45;
  throw ConfigError("unknown integrator '" + name + "' (expected rk4 or rk45)");
}

void FlowSpec::validate() const {
  if (!(h > 0.0)) throw ConfigError("flow.h must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("flow.tolerance must be positive");
  if (!(divergence_radius > 0.0)) throw ConfigError("flow.divergence_radius must be positive");
  if (!std::isfinite(sigma) || !std::isfinite(rho) || !std::isfinite(beta)) {
    throw ConfigError("flow parameters must be finite");
  }
}

FlowState FlowSpec::field(const FlowState& x) const {
  return {sigma * (x[1] - x[0]), x[0] * (rho - x[2]) - x[1], x[0] * x[1] - beta * x[2]};
}

std::string to_string(FlowObservable psi) {
  switch (psi) {
    case FlowObservable::x: return "x";
    case FlowObservable::y: return "y";
    case FlowObservable::z: return "z";
    case FlowObservable::norm2: return "norm2";
    case FlowObservable::one: return "one";
  }
  return "z";
}

FlowObservable flow_observable_from_string(const std::string& name) {
  if (name == "x") return FlowObservable::x;
  if (name == "y") return FlowObservable::y;
  if (name == "z") return FlowObservable::z;
  if (name == "norm2") return FlowObservable::norm2;
  if (name == "one") return FlowObservable::one;
  throw ConfigError("unknown flow observable '" + name + "' (expected x, y, z, norm2, one)");
}

double evaluate(FlowObservable psi, const FlowState& x) {
  switch (psi) {
    case FlowObservable::x: return x[0];
    case FlowObservable::y: return x[1];
    case FlowObservable::z: return x[2];
    case FlowObservable::norm2: return x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    case FlowObservable::one: return 1.0;
  }
  return 0.0;
}

FlowIntegrator::FlowIntegrator(const FlowSpec& spec, const FlowState& start)
    : spec_(spec), x_(start), dt_adaptive_(spec.h) {
  spec_.validate();
  for (double v : start) {
    if (!std::isfinite(v)) throw ConfigError("flow start must be finite");
  }
  guard();
}

void FlowIntegrator::guard() const {
  const double r2 = x_[0] * x_[0] + x_[1] * x_[1] + x_[2] * x_[2];
  if (!(r2 <= spec_.divergence_radius * spec_.divergence_radius)) {
    throw NumericalGuard("flow diverged: |x| exceeded " + std::to_string(spec_.divergence_radius) +
                         " at t = " + std::to_string(t_));
  }
}

void FlowIntegrator::rk4_step(double h) {
  odeint::runge_kutta4<FlowState> stepper;
  const FlowSpec& spec = spec_;
  stepper.do_step([&spec](const FlowState& x, FlowState& dxdt, double) { dxdt = spec.field(x); }, x_, t_, h);
  ++steps_;
  guard();
}

double FlowIntegrator::rk45_step(double limit) {
  auto stepper = odeint::make_controlled(spec_.tolerance, spec_.tolerance, odeint::runge_kutta_dopri5<FlowState>());
  const FlowSpec& spec = spec_;
  auto system = [&spec](const FlowState& x, FlowState& dxdt, double) { dxdt = spec.field(x); };
  double t = t_;
  for (int attempt = 0; attempt < 200; ++attempt) {
    double dt = std::min(dt_adaptive_, limit);
    const bool clipped = dt < dt_adaptive_;
    const double before = t;
    if (stepper.try_step(system, x_, t, dt) == odeint::success) {
      // try_step proposes the next step size in dt; keep the unclipped one.
      if (!clipped || dt > dt_adaptive_) dt_adaptive_ = dt;
      ++steps_;
      guard();
      return t - before;
    }
    dt_adaptive_ = dt;
  }
  throw NumericalGuard("rk45 step size control failed to converge");
}

std::vector<TrajectorySample> integrate(const FlowSpec& spec, const FlowState& start, double T,
                                        std::int64_t stride) {
  if (stride < 1) throw std::invalid_argument("integrate: stride must be >= 1");
  FlowIntegrator flow(spec, start);
  std::vector<TrajectorySample> out{{0.0, start}};
  std::int64_t count = 0;
  flow.advance(T, [&](double, const FlowState&, double t1, const FlowState& x1) {
    if (++count % stride == 0) out.push_back({t1, x1});
  });
  if (out.back().t != flow.time()) out.push_back({flow.time(), flow.state()});
  return out;
}

FlowAverage flow_average(const FlowSpec& spec, const FlowState& start, FlowObservable psi, double T,
                         std::vector<double> checkpoints) {
  if (!(T > 0.0)) throw std::invalid_argument("flow_average: T must be positive");
  std::sort(checkpoints.begin(), checkpoints.end());
  std::erase_if(checkpoints, [T](double c) { return !(c > 0.0) || c >= T; });
  checkpoints.push_back(T);
  FlowAverage avg;
  avg.observable = psi;
  avg.T = T;
  FlowIntegrator flow(spec, start);
  KahanSum integral;
  for (double c : checkpoints) {
    flow.advance(c - flow.time(), [&](double t0, const FlowState& x0, double t1, const FlowState& x1) {
      integral.add(0.5 * (t1 - t0) * (evaluate(psi, x0) + evaluate(psi, x1)));
    });
    avg.checkpoint_t.push_back(c);
    avg.checkpoint_integral.push_back(integral.value());
    avg.checkpoint_value.push_back(integral.value() / c);
  }
  avg.value = avg.checkpoint_value.back();
  return avg;
}

FlowBaseline flow_baseline(const FlowSpec& spec, const FlowState& start, FlowObservable psi, double T,
                           int batches, double burn_in) {
  if (batches < 2) throw std::invalid_argument("flow_baseline: need at least two batches");
  FlowIntegrator flow(spec, start);
  flow.advance(burn_in);
  const double width = T / batches;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    KahanSum integral;
    flow.advance(width, [&](double t0, const FlowState& x0, double t1, const FlowState& x1) {
      integral.add(0.5 * (t1 - t0) * (evaluate(psi, x0) + evaluate(psi, x1)));
    });
    means.push_back(integral.value() / width);
  }
  FlowBaseline out;
  out.T = T;
  out.batches = batches;
  out.value = mean(means);
  out.standard_error = std::sqrt(variance(means) / batches);
  return out;
}

FlowState FlowEnsemble::member(std::int64_t i) const {
  StreamRng rng(seed, static_cast<std::uint64_t>(i), "flow-start");
  FlowState x{};
  for (std::size_t j = 0; j < 3; ++j) x[j] = rng.uniform(lower[j], upper[j]);
  return x;
}

FlowDeviationCurve flow_deviation(const FlowSpec& spec, const FlowEnsemble& ensemble, FlowObservable psi,
                                  double epsilon, std::vector<double> T_list, const FlowBaseline& baseline,
                                  Exec exec) {
  std::sort(T_list.begin(), T_list.end());
  T_list.erase(std::unique(T_list.begin(), T_list.end()), T_list.end());
  if (T_list.empty() || !(T_list.front() > 0.0)) throw ConfigError("T_list must be non-empty and positive");
  if (ensemble.count < 1) throw ConfigError("flow ensemble count must be positive");
  spec.validate();
  const std::size_t nt = T_list.size();
  std::vector<std::uint8_t> deviant(static_cast<std::size_t>(ensemble.count) * nt, 0);
  for_each_member(exec, ensemble.count, [&](std::int64_t i) {
    FlowIntegrator flow(spec, ensemble.member(i));
    KahanSum integral;
    for (std::size_t j = 0; j < nt; ++j) {
      flow.advance(T_list[j] - flow.time(), [&](double t0, const FlowState& x0, double t1, const FlowState& x1) {
        integral.add(0.5 * (t1 - t0) * (evaluate(psi, x0) + evaluate(psi, x1)));
      });
      if (std::abs(integral.value() / T_list[j] - baseline.value) >= epsilon) {
        deviant[static_cast<std::size_t>(i) * nt + j] = 1;
      }
    }
  });
  FlowDeviationCurve curve;
  curve.epsilon = epsilon;
  curve.reference = baseline.value;
  curve.reference_stderr = baseline.standard_error;
  curve.baseline_flag = epsilon <= 5.0 * baseline.standard_error;
  curve.T = T_list;
  curve.total = ensemble.count;
  curve.deviant.assign(nt, 0);
  for (std::size_t k = 0; k < deviant.size(); ++k) curve.deviant[k % nt] += deviant[k];
  std::vector<double> fit_t, fit_f;
  for (std::size_t j = 0; j < nt; ++j) {
    const double f = static_cast<double>(curve.deviant[j]) / static_cast<double>(curve.total);
    curve.fraction.push_back(f);
    if (curve.deviant[j] >= 10) {
      fit_t.push_back(T_list[j]);
      fit_f.push_back(f);
    }
  }
  if (fit_t.size() >= 2) curve.fit = fit_decay_rate(fit_t, fit_f);
  return curve;
}

double rk4_order_ratio(const FlowSpec& spec, const FlowState& start, double T, double h) {
  auto endpoint = [&](double step) {
    FlowSpec s = spec;
    s.method = FlowMethod::rk4;
    s.h = step;
    FlowIntegrator flow(s, start);
    flow.advance(T);
    return flow.state();
  };
  const FlowState a = endpoint(h);
  const FlowState b = endpoint(h / 2);
  const FlowState c = endpoint(h / 4);
  auto dist = [](const FlowState& p, const FlowState& q) {
    return std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) + (p[2] - q[2]) * (p[2] - q[2]));
  };
  return dist(a, b) / dist(b, c);
}

OrderSurvey rk4_order_survey(const FlowSpec& spec, const FlowState& start, int segments, double T,
                             double h, double spacing, double burn_in) {
  if (segments < 1) throw std::invalid_argument("rk4_order_survey: need at least one segment");
  FlowIntegrator walker(spec, start);
  walker.advance(burn_in);
  OrderSurvey survey;
  for (int i = 0; i < segments; ++i) {
    survey.ratios.push_back(rk4_order_ratio(spec, walker.state(), T, h));
    walker.advance(spacing);
  }
  std::vector<double> sorted = survey.ratios;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  survey.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return survey;
}

}  // namespace ergolab
