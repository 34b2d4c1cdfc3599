#include "ergolab/deviations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

std::string to_string(Sampling s) {
  switch (s) {
    case Sampling::grid: return "grid";
    case Sampling::uniform_random: return "uniform_random";
    case Sampling::unstable_segment: return "unstable_segment";
  }
  return "grid";
}

Sampling sampling_from_string(const std::string& name) {
  if (name == "grid") return Sampling::grid;
  if (name == "uniform_random" || name == "uniform") return Sampling::uniform_random;
  if (name == "unstable_segment" || name == "segment") return Sampling::unstable_segment;
  throw ConfigError("unknown sampling '" + name + "' (expected grid, uniform_random, unstable_segment)");
}

namespace {

std::int64_t integer_root(std::int64_t count, int dim) {
  auto r = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(count), 1.0 / dim)));
  for (std::int64_t c = std::max<std::int64_t>(1, r - 1); c <= r + 1; ++c) {
    std::int64_t p = 1;
    for (int i = 0; i < dim; ++i) p *= c;
    if (p == count) return c;
  }
  return -1;
}

}  // namespace

void EnsembleSpec::validate(int dimension) const {
  if (count < 1) throw ConfigError("ensemble.count must be positive");
  if (sampling == Sampling::grid && integer_root(count, dimension) < 0) {
    throw ConfigError("ensemble.count must be a perfect " +
                      std::string(dimension == 2 ? "square" : "cube") + " for grid sampling");
  }
  for (int i = 0; i < 3; ++i) {
    if (!(lower[i] < upper[i])) throw ConfigError("ensemble box must have lower < upper");
  }
  if (sampling == Sampling::unstable_segment && !(length > 0.0)) {
    throw ConfigError("ensemble.length must be positive");
  }
}

TorusPoint3 EnsembleSpec::member(const SystemSpec& system, std::int64_t i) const {
  const int dim = system.dimension();
  switch (sampling) {
    case Sampling::grid: {
      const std::int64_t side = integer_root(count, dim);
      std::array<double, 3> c{0.0, 0.0, 0.0};
      std::int64_t rest = i;
      for (int j = dim - 1; j >= 0; --j) {
        const auto cell = static_cast<double>(rest % side);
        rest /= side;
        c[j] = lower[j] + (upper[j] - lower[j]) * (cell + 0.5) / static_cast<double>(side);
      }
      return TorusPoint3::wrapped(c[0], c[1], dim == 3 ? c[2] : 0.0);
    }
    case Sampling::uniform_random: {
      StreamRng rng(seed, static_cast<std::uint64_t>(i), "ensemble-member");
      const double a = rng.uniform(lower[0], upper[0]);
      const double b = rng.uniform(lower[1], upper[1]);
      const double c = dim == 3 ? rng.uniform(lower[2], upper[2]) : 0.0;
      return TorusPoint3::wrapped(a, b, c);
    }
    case Sampling::unstable_segment: {
      const auto e = system.matrix.unstable_direction();
      const double u = ((static_cast<double>(i) + 0.5) / static_cast<double>(count) - 0.5) * length;
      return TorusPoint3::wrapped(anchor.base.x1 + u * e[0], anchor.base.x2 + u * e[1], anchor.t);
    }
  }
  return {};
}

Interval target_interval(const SystemSpec& spec, const Observable& psi) {
  if (spec.variant == Variant::anosov2d) {
    if (psi.depends_on_fiber()) throw ConfigError("target_interval: anosov2d observable has a fiber frequency");
    return {psi.constant(), psi.constant()};
  }
  if (spec.variant != Variant::compactified3d) {
    throw ConfigError("target_interval: I(psi) is only known for anosov2d and compactified3d; "
                      "supply the target interval explicitly");
  }
  // Against m x delta_tau only the pure-fiber terms survive.
  auto against = [&](double tau) {
    double v = psi.constant();
    for (const auto& term : psi.terms()) {
      if (term.k[0] != 0 || term.k[1] != 0) continue;
      const double theta = kTwoPi * term.k[2] * tau;
      v += term.coeff * (term.kind == TrigKind::cos ? std::cos(theta) : std::sin(theta));
    }
    return v;
  };
  const double a = against(0.0);
  const double b = against(0.5);
  return {std::min(a, b), std::max(a, b)};
}

namespace {

std::vector<std::int64_t> normalized_schedule(std::vector<std::int64_t> n_list) {
  std::sort(n_list.begin(), n_list.end());
  n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
  if (n_list.empty() || n_list.front() < 1) throw ConfigError("n_list must be non-empty with n >= 1");
  return n_list;
}

}  // namespace

std::vector<DeviationCurve> deviant_fractions(const SystemSpec& spec, const EnsembleSpec& ensemble,
                                              const Observable& psi, const Interval& target,
                                              std::vector<double> epsilons,
                                              std::vector<std::int64_t> n_list, Exec exec,
                                              std::int64_t min_count) {
  n_list = normalized_schedule(std::move(n_list));
  ensemble.validate(spec.dimension());
  if (epsilons.empty()) throw ConfigError("at least one epsilon is required");
  const std::size_t ne = epsilons.size();
  const std::size_t nn = n_list.size();
  const bool fiber = spec.dimension() == 3;

  using Counts = std::vector<std::int64_t>;  // [eps * nn + n]
  auto parts = map_blocks<Counts>(exec, ensemble.count, 1024, [&](std::int64_t begin, std::int64_t end) {
    Counts counts(ne * nn, 0);
    for (std::int64_t i = begin; i < end; ++i) {
      SystemOrbit orbit(spec, ensemble.member(spec, i));
      KahanSum sum;
      std::size_t next = 0;
      for (std::int64_t step = 1; next < nn; ++step) {
        sum.add(fiber ? psi(orbit.point()) : psi(orbit.base()));
        orbit.step();
        if (step == n_list[next]) {
          const double d = target.distance(sum.value() / static_cast<double>(step));
          for (std::size_t e = 0; e < ne; ++e) {
            if (d >= epsilons[e]) ++counts[e * nn + next];
          }
          ++next;
        }
      }
    }
    return counts;
  });

  std::vector<DeviationCurve> curves(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    DeviationCurve& c = curves[e];
    c.epsilon = epsilons[e];
    c.target = target;
    c.n = n_list;
    c.total = ensemble.count;
    c.deviant.assign(nn, 0);
    for (const auto& part : parts) {
      for (std::size_t j = 0; j < nn; ++j) c.deviant[j] += part[e * nn + j];
    }
    std::vector<double> fit_n, fit_f;
    for (std::size_t j = 0; j < nn; ++j) {
      const double f = static_cast<double>(c.deviant[j]) / static_cast<double>(c.total);
      c.fraction.push_back(f);
      if (c.deviant[j] >= min_count) {
        fit_n.push_back(static_cast<double>(n_list[j]));
        fit_f.push_back(f);
      }
    }
    if (fit_n.size() >= 2) c.fit = fit_decay_rate(fit_n, fit_f);
  }
  return curves;
}

DeviationCurve deviant_fraction(const SystemSpec& spec, const EnsembleSpec& ensemble,
                                const Observable& psi, const Interval& target, double epsilon,
                                std::vector<std::int64_t> n_list, Exec exec) {
  return deviant_fractions(spec, ensemble, psi, target, {epsilon}, std::move(n_list), exec).front();
}

ConvergenceCurve convergent_fraction(const SystemSpec& spec, const EnsembleSpec& ensemble,
                                     const MeasureVector& target, double eta,
                                     std::vector<std::int64_t> n_list, Exec exec) {
  n_list = normalized_schedule(std::move(n_list));
  ensemble.validate(spec.dimension());
  if (target.family().dimension() != spec.dimension()) {
    throw ConfigError("convergent_fraction: target family dimension does not match the system");
  }
  const std::size_t nn = n_list.size();
  const FamilyPtr family = target.family_ptr();
  std::vector<std::uint8_t> hits(static_cast<std::size_t>(ensemble.count) * nn, 0);
  for_each_member(exec, ensemble.count, [&](std::int64_t i) {
    SystemOrbit orbit(spec, ensemble.member(spec, i));
    EmpiricalAccumulator acc(family);
    std::size_t next = 0;
    for (std::int64_t step = 1; next < nn; ++step) {
      if (spec.dimension() == 3) {
        acc.add(orbit.point());
      } else {
        acc.add(orbit.base());
      }
      orbit.step();
      if (step == n_list[next]) {
        if (weak_star_distance(acc.finalize(), target) < eta) {
          hits[static_cast<std::size_t>(i) * nn + next] = 1;
        }
        ++next;
      }
    }
  });
  ConvergenceCurve curve;
  curve.eta = eta;
  curve.n = n_list;
  curve.total = ensemble.count;
  curve.convergent.assign(nn, 0);
  for (std::size_t i = 0; i < hits.size(); ++i) curve.convergent[i % nn] += hits[i];
  for (auto c : curve.convergent) curve.fraction.push_back(static_cast<double>(c) / static_cast<double>(curve.total));
  return curve;
}

}  // namespace ergolab
