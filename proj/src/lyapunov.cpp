#include "ergolab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"
#include "ergolab/stats.hpp"

namespace ergolab {

ExponentTrace center_exponent_trace(const SystemSpec& spec, const TorusPoint3& start,
                                    std::int64_t n_max, std::vector<std::int64_t> checkpoints) {
  if (spec.variant != Variant::compactified3d && spec.variant != Variant::morse_smale_control) {
    throw std::invalid_argument("center_exponent_trace: needs compactified3d or morse_smale_control");
  }
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  std::erase_if(checkpoints, [n_max](std::int64_t n) { return n <= 0 || n > n_max; });
  if (checkpoints.empty() || checkpoints.back() != n_max) checkpoints.push_back(n_max);

  ExponentTrace trace{start, {}};
  SystemOrbit orbit(spec, start);
  KahanSum sum;
  std::size_t next = 0;
  for (std::int64_t i = 1; i <= n_max; ++i) {
    orbit.step();
    sum.add(orbit.last_log_fiber_derivative());
    if (i == checkpoints[next]) {
      trace.checkpoints.push_back({i, sum.value() / static_cast<double>(i), sum.value(), {}});
      ++next;
    }
  }
  return trace;
}

std::vector<double> center_exponent_ensemble(const SystemSpec& spec, std::int64_t members,
                                             std::uint64_t master_seed, std::int64_t n, Exec exec) {
  std::vector<double> out(static_cast<std::size_t>(members));
  for_each_member(exec, members, [&](std::int64_t i) {
    StreamRng rng(master_seed, static_cast<std::uint64_t>(i), "exponent-start");
    const TorusPoint3 start{{rng.uniform(), rng.uniform()}, rng.uniform()};
    SystemOrbit orbit(spec, start);
    KahanSum sum;
    for (std::int64_t k = 0; k < n; ++k) {
      orbit.step();
      sum.add(orbit.last_log_fiber_derivative());
    }
    out[static_cast<std::size_t>(i)] = sum.value() / static_cast<double>(n);
  });
  return out;
}

namespace {

using Vec3 = std::array<double, 3>;

Vec3 mat_vec(const Mat3& m, const Vec3& v, int dim) {
  Vec3 out{0.0, 0.0, 0.0};
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) out[r] += m[r][c] * v[c];
  }
  return out;
}

double dot(const Vec3& a, const Vec3& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> tangent_growth_rates(const SystemSpec& spec, const TorusPoint3& start,
                                         std::int64_t n, const std::vector<Vec3>& frame,
                                         std::int64_t burn_in) {
  const int dim = spec.dimension();
  const std::size_t k = frame.size();
  if (k == 0 || k > static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("tangent_growth_rates: frame must have 1..dim columns");
  }
  std::vector<Vec3> q = frame;
  std::vector<KahanSum> sums(k);
  SystemOrbit orbit(spec, start);
  for (std::int64_t step = 0; step < burn_in + n; ++step) {
    const Mat3 jac = orbit.tangent();
    for (auto& col : q) col = mat_vec(jac, col, dim);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double proj = dot(q[i], q[j], dim);
        for (int r = 0; r < dim; ++r) q[i][r] -= proj * q[j][r];
      }
      const double norm = std::sqrt(dot(q[i], q[i], dim));
      if (step >= burn_in) sums[i].add(std::log(norm));
      for (int r = 0; r < dim; ++r) q[i][r] /= norm;
    }
    orbit.step();
  }
  std::vector<double> rates(k);
  for (std::size_t i = 0; i < k; ++i) rates[i] = sums[i].value() / static_cast<double>(n);
  return rates;
}

std::vector<double> spectrum_trace(const SystemSpec& spec, const TorusPoint3& start,
                                   std::int64_t n_max, std::int64_t burn_in) {
  if (n_max < 100) throw std::invalid_argument("spectrum_trace: n_max must be >= 100");
  if (burn_in < 0) burn_in = std::min<std::int64_t>(n_max / 10, 1000);
  std::vector<Vec3> frame;
  for (int i = 0; i < spec.dimension(); ++i) {
    Vec3 e{0.0, 0.0, 0.0};
    e[static_cast<std::size_t>(i)] = 1.0;
    frame.push_back(e);
  }
  auto rates = tangent_growth_rates(spec, start, n_max, frame, burn_in);
  std::sort(rates.begin(), rates.end(), std::greater<>());
  return rates;
}

SplittingDiagnostic domination_diagnostic(const SystemSpec& spec, std::int64_t sample_size,
                                          std::uint64_t seed) {
  if (spec.variant != Variant::compactified3d && spec.variant != Variant::morse_smale_control) {
    throw std::invalid_argument("domination_diagnostic: needs a 3D partially hyperbolic variant");
  }
  SplittingDiagnostic diag;
  diag.samples = sample_size;
  diag.log_expansion = spec.matrix.log_expansion();
  const double fiber_bound = spec.variant == Variant::compactified3d
                                 ? kTwoPi * spec.field.amplitude * spec.phi.sup_bound()
                                 : kTwoPi * spec.control_rate;
  diag.bound_margin = diag.log_expansion - fiber_bound;
  diag.unstable_margin = diag.stable_margin = INFINITY;
  const auto eu = spec.matrix.unstable_direction();
  KahanSum angle_sum;
  for (std::int64_t i = 0; i < sample_size; ++i) {
    StreamRng rng(seed, static_cast<std::uint64_t>(i), "domination-sample");
    const TorusPoint3 p{{rng.uniform(), rng.uniform()}, rng.uniform()};
    const Mat3 jac = tangent_map(spec, p);
    const double ell = std::log(std::abs(jac[2][2]));
    diag.max_abs_log_fiber = std::max(diag.max_abs_log_fiber, std::abs(ell));
    diag.unstable_margin = std::min(diag.unstable_margin, diag.log_expansion - ell);
    diag.stable_margin = std::min(diag.stable_margin, ell + diag.log_expansion);
    const Vec3 w = mat_vec(jac, {eu[0], eu[1], 0.0}, 3);
    const double angle = std::atan2(std::abs(w[2]), std::hypot(w[0], w[1]));
    angle_sum.add(angle);
    diag.max_cone_angle = std::max(diag.max_cone_angle, angle);
  }
  diag.worst_margin = std::min(diag.unstable_margin, diag.stable_margin);
  diag.mean_cone_angle = sample_size > 0 ? angle_sum.value() / static_cast<double>(sample_size) : 0.0;
  diag.dominated = diag.worst_margin > 0.0;
  return diag;
}

}  // namespace ergolab
