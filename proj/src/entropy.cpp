#include "ergolab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ergolab/lyapunov.hpp"
#include "ergolab/parallel.hpp"

namespace ergolab {

double phase_distance(const PhasePoint& a, const PhasePoint& b, int dimension) {
  double s = 0.0;
  for (int i = 0; i < dimension; ++i) {
    const double d = torus_delta(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]);
    s += d * d;
  }
  return std::sqrt(s);
}

Disc unstable_segment(const SystemSpec& spec, const TorusPoint3& anchor, double length) {
  if (!(length > 0.0)) throw ConfigError("segment length must be positive");
  const auto e = spec.matrix.unstable_direction();
  Disc disc;
  disc.dimension = spec.dimension();
  disc.length = length;
  disc.expansion = std::abs(spec.matrix.unstable_eigenvalue());
  disc.embed = [anchor, e, length](double u) {
    const double v = u - 0.5 * length;
    return PhasePoint{wrap01(anchor.base.x1 + v * e[0]), wrap01(anchor.base.x2 + v * e[1]), anchor.t};
  };
  if (spec.variant == Variant::anosov2d || spec.variant == Variant::skew_unbounded) {
    const AnosovMatrix m = spec.matrix;
    disc.map = [m](const PhasePoint& p) {
      const TorusPoint2 q = m.apply({p[0], p[1]});
      return PhasePoint{q.x1, q.x2, 0.0};
    };
  } else {
    disc.map = [spec](const PhasePoint& p) {
      const TorusPoint3 q = apply_system(spec, {{p[0], p[1]}, p[2]});
      return PhasePoint{q.base.x1, q.base.x2, q.t};
    };
  }
  return disc;
}

Disc identity_segment(const TorusPoint2& anchor, double length) {
  Disc disc;
  disc.dimension = 2;
  disc.length = length;
  disc.expansion = 1.0;
  disc.embed = [anchor](double u) { return PhasePoint{wrap01(anchor.x1 + u), anchor.x2, 0.0}; };
  disc.map = [](const PhasePoint& p) { return p; };
  return disc;
}

double default_resolution(const Disc& disc, int n, double rho, double refinement) {
  const int steps = std::max(n, 1) - 1;
  return rho * std::pow(std::max(disc.expansion, 1.0), -steps) / refinement;
}

namespace {

int iterate_count(int n) { return std::max(n, 1); }

void fill_orbit(const Disc& disc, double u, int k, PhasePoint* out) {
  out[0] = disc.embed(u);
  for (int i = 1; i < k; ++i) out[i] = disc.map(out[i - 1]);
}

/// Uniform cell grid on the base torus with cells no smaller than rho.
class CellIndex {
 public:
  explicit CellIndex(double rho)
      : side_(static_cast<int>(std::clamp(std::floor(1.0 / rho), 1.0, 1024.0))),
        cells_(static_cast<std::size_t>(side_) * static_cast<std::size_t>(side_)) {}

  void insert(const PhasePoint& p, std::uint32_t id) { cells_[cell(p[0], p[1])].push_back(id); }

  template <class Visit>
  bool any_near(const PhasePoint& p, Visit&& visit) const {
    const int cx = coord(p[0]);
    const int cy = coord(p[1]);
    const int reach = side_ >= 3 ? 1 : 0;
    for (int dx = -reach; dx <= reach; ++dx) {
      for (int dy = -reach; dy <= reach; ++dy) {
        const int x = (cx + dx + side_) % side_;
        const int y = (cy + dy + side_) % side_;
        for (std::uint32_t id : cells_[static_cast<std::size_t>(x) * side_ + y]) {
          if (visit(id)) return true;
        }
      }
    }
    return false;
  }

 private:
  int coord(double v) const { return std::min(side_ - 1, static_cast<int>(v * side_)); }
  std::size_t cell(double a, double b) const {
    return static_cast<std::size_t>(coord(a)) * side_ + static_cast<std::size_t>(coord(b));
  }

  int side_;
  std::vector<std::vector<std::uint32_t>> cells_;
};

}  // namespace

SeparatedSet max_separated_set(const Disc& disc, int n, double rho, double resolution, Exec exec) {
  if (n < 0) throw std::invalid_argument("max_separated_set: n must be >= 0");
  if (!(rho > 0.0) || !(resolution > 0.0)) {
    throw std::invalid_argument("max_separated_set: rho and resolution must be positive");
  }
  const int k = iterate_count(n);
  const auto probes = static_cast<std::int64_t>(std::floor(disc.length / resolution)) + 1;
  if (probes > 2'000'000'000LL) throw NumericalGuard("max_separated_set: probe grid too large");

  SeparatedSet result;
  result.n = n;
  result.rho = rho;
  result.resolution = resolution;
  result.probes = probes;

  CellIndex index(rho);
  std::vector<PhasePoint> admitted;  // k points per admitted parameter
  std::int64_t last_admitted = -2;
  constexpr std::int64_t kBlock = 16384;
  std::vector<PhasePoint> block(static_cast<std::size_t>(kBlock * k));

  for (std::int64_t start = 0; start < probes; start += kBlock) {
    const std::int64_t count = std::min(kBlock, probes - start);
    for_each_member(exec, count, [&](std::int64_t i) {
      fill_orbit(disc, static_cast<double>(start + i) * resolution, k, &block[static_cast<std::size_t>(i * k)]);
    });
    for (std::int64_t i = 0; i < count; ++i) {
      const PhasePoint* orbit = &block[static_cast<std::size_t>(i * k)];
      const bool close = index.any_near(orbit[k - 1], [&](std::uint32_t id) {
        const PhasePoint* other = &admitted[static_cast<std::size_t>(id) * k];
        for (int s = k - 1; s >= 0; --s) {
          if (phase_distance(orbit[s], other[s], disc.dimension) > rho) return false;
        }
        return true;
      });
      if (close) continue;
      const std::int64_t j = start + i;
      if (j == last_admitted + 1) {
        throw NumericalGuard("max_separated_set: admitted points at the grid floor; use a finer resolution");
      }
      last_admitted = j;
      index.insert(orbit[k - 1], static_cast<std::uint32_t>(result.parameters.size()));
      result.parameters.push_back(static_cast<double>(j) * resolution);
      admitted.insert(admitted.end(), orbit, orbit + k);
    }
  }
  return result;
}

SeparatedSet max_separated_set(const Disc& disc, int n, double rho, Exec exec) {
  return max_separated_set(disc, n, rho, default_resolution(disc, n, rho), exec);
}

EntropyEstimate u_entropy_estimate(const Disc& disc, double rho, std::vector<int> n_list, Exec exec) {
  if (n_list.size() < 4 || !std::is_sorted(n_list.begin(), n_list.end()) ||
      std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end()) {
    throw std::invalid_argument("u_entropy_estimate: need at least four increasing n");
  }
  EntropyEstimate est;
  est.n = n_list;
  std::vector<double> xs, ys;
  for (int n : n_list) {
    const auto set = max_separated_set(disc, n, rho, exec);
    est.cardinality.push_back(static_cast<std::int64_t>(set.cardinality()));
    xs.push_back(n);
    ys.push_back(std::log(static_cast<double>(set.cardinality())));
  }
  est.fit = linear_fit(xs, ys);
  est.value = est.fit.slope;
  return est;
}

double bowen_ball_volume(const Disc& disc, double center, int n, double rho) {
  if (center < 0.0 || center > disc.length) throw std::invalid_argument("bowen_ball_volume: center off the disc");
  const int k = iterate_count(n);
  std::vector<PhasePoint> ref(static_cast<std::size_t>(k)), probe(static_cast<std::size_t>(k));
  fill_orbit(disc, center, k, ref.data());
  auto inside = [&](double u) {
    fill_orbit(disc, u, k, probe.data());
    for (int s = 0; s < k; ++s) {
      if (phase_distance(probe[static_cast<std::size_t>(s)], ref[static_cast<std::size_t>(s)], disc.dimension) > rho) {
        return false;
      }
    }
    return true;
  };
  auto extent = [&](double direction, double room) {
    double in = 0.0;
    double step = std::min(rho, room) * 1e-18;
    double out = -1.0;
    while (true) {
      if (step >= room) {
        if (inside(center + direction * room)) return room;
        out = room;
        break;
      }
      if (!inside(center + direction * step)) {
        out = step;
        break;
      }
      in = step;
      step *= 2.0;
    }
    for (int i = 0; i < 100 && out - in > 1e-15 * out; ++i) {
      const double mid = 0.5 * (in + out);
      (inside(center + direction * mid) ? in : out) = mid;
    }
    return in;
  };
  double right = disc.length - center > 0.0 ? extent(1.0, disc.length - center) : 0.0;
  double left = center > 0.0 ? extent(-1.0, center) : 0.0;
  return left + right;
}

double jacobian_average(const SystemSpec& spec, const TorusPoint3& start,
                        const std::vector<std::array<double, 3>>& frame, std::int64_t n,
                        std::int64_t burn_in) {
  const auto rates = tangent_growth_rates(spec, start, n, frame, burn_in);
  double s = 0.0;
  for (double r : rates) s += r;
  return s;
}

namespace {

std::array<double, 3> unstable_vector(const SystemSpec& spec) {
  const auto e = spec.matrix.unstable_direction();
  return {e[0], e[1], 0.0};
}

}  // namespace

GibbsResidual gibbs_residual(const SystemSpec& spec, const EntropySettings& settings, Exec exec) {
  GibbsResidual out;
  const Disc disc = unstable_segment(spec, settings.anchor, settings.segment_length);
  out.entropy = u_entropy_estimate(disc, settings.rho, settings.n_list, exec);
  out.jacobian_integral = jacobian_average(spec, settings.anchor, {unstable_vector(spec)},
                                           settings.orbit_length, settings.burn_in);
  out.residual = out.entropy.value - out.jacobian_integral;
  return out;
}

std::string to_string(PesinSubspace f) {
  switch (f) {
    case PesinSubspace::unstable: return "unstable";
    case PesinSubspace::full: return "full";
    case PesinSubspace::unstable_fiber: return "unstable_fiber";
  }
  return "unstable";
}

PesinSubspace pesin_subspace_from_string(const std::string& name) {
  if (name == "unstable") return PesinSubspace::unstable;
  if (name == "full") return PesinSubspace::full;
  if (name == "unstable_fiber") return PesinSubspace::unstable_fiber;
  throw ConfigError("unknown subspace '" + name + "' (expected unstable, full, unstable_fiber)");
}

PesinReport pesin_check(const SystemSpec& spec, PesinSubspace subspace, const EntropySettings& settings,
                        Exec exec) {
  std::vector<std::array<double, 3>> frame{unstable_vector(spec)};
  switch (subspace) {
    case PesinSubspace::unstable:
      break;
    case PesinSubspace::full: {
      frame.clear();
      for (int i = 0; i < spec.dimension(); ++i) {
        std::array<double, 3> e{0.0, 0.0, 0.0};
        e[static_cast<std::size_t>(i)] = 1.0;
        frame.push_back(e);
      }
      break;
    }
    case PesinSubspace::unstable_fiber:
      if (spec.dimension() != 3) throw ConfigError("pesin_check: unstable_fiber needs a 3D system");
      frame.push_back({0.0, 0.0, 1.0});
      break;
  }
  PesinReport report;
  report.subspace = subspace;
  const Disc disc = unstable_segment(spec, settings.anchor, settings.segment_length);
  report.entropy = u_entropy_estimate(disc, settings.rho, settings.n_list, exec).value;
  report.jacobian_integral = jacobian_average(spec, settings.anchor, frame, settings.orbit_length, settings.burn_in);
  report.margin = report.entropy - report.jacobian_integral;
  return report;
}

}  // namespace ergolab
