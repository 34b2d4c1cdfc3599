#include "ergolab/stochastics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

BirkhoffTrace birkhoff_trace(const SystemSpec& spec, const TorusPoint2& x, std::int64_t n) {
  BirkhoffTrace trace{x, {}};
  trace.sums.resize(static_cast<std::size_t>(n + 1));
  TorusPoint2 p = x;
  double s = 0.0;
  trace.sums[0] = 0.0;
  for (std::int64_t j = 0; j < n; ++j) {
    s += spec.phi(p);
    trace.sums[static_cast<std::size_t>(j + 1)] = s;
    p = spec.matrix.apply(p);
  }
  return trace;
}

namespace {

struct MomentSums {
  std::vector<KahanSum> first;
  std::vector<KahanSum> second;
  std::vector<KahanSum> corr;
};

}  // namespace

SigmaEstimate estimate_sigma_green_kubo(const SystemSpec& spec, int lag_max,
                                        std::int64_t sample_size, std::uint64_t seed, Exec exec) {
  if (lag_max < 1) throw std::invalid_argument("estimate_sigma_green_kubo: lag_max must be >= 1");
  if (sample_size < 2) throw std::invalid_argument("estimate_sigma_green_kubo: need >= 2 samples");
  const auto lags = static_cast<std::size_t>(lag_max) + 1;
  auto parts = map_blocks<MomentSums>(exec, sample_size, 256, [&](std::int64_t begin, std::int64_t end) {
    MomentSums m{std::vector<KahanSum>(lags), std::vector<KahanSum>(lags), std::vector<KahanSum>(lags)};
    std::vector<double> values(lags);
    for (std::int64_t i = begin; i < end; ++i) {
      StreamRng rng(seed, static_cast<std::uint64_t>(i), "green-kubo");
      TorusPoint2 p{rng.uniform(), rng.uniform()};
      for (std::size_t k = 0; k < lags; ++k) {
        values[k] = spec.phi(p);
        p = spec.matrix.apply(p);
      }
      // Y(L) = phi_0 (phi_0 + 2 sum_{k<=L} phi_k) has mean equal to partial sum L.
      double y = values[0] * values[0];
      for (std::size_t k = 0; k < lags; ++k) {
        if (k > 0) y += 2.0 * values[0] * values[k];
        m.first[k].add(y);
        m.second[k].add(y * y);
        m.corr[k].add(values[0] * values[k]);
      }
    }
    return m;
  });
  std::vector<KahanSum> first(lags), second(lags), corr(lags);
  for (const auto& part : parts) {
    for (std::size_t k = 0; k < lags; ++k) {
      first[k].merge(part.first[k]);
      second[k].merge(part.second[k]);
      corr[k].merge(part.corr[k]);
    }
  }
  SigmaEstimate est;
  est.sample_size = sample_size;
  est.lag_max = lag_max;
  const auto n = static_cast<double>(sample_size);
  for (std::size_t k = 0; k < lags; ++k) {
    const double mean_y = first[k].value() / n;
    const double var_y = std::max(0.0, (second[k].value() / n - mean_y * mean_y) * n / (n - 1.0));
    est.correlations.push_back(corr[k].value() / n);
    est.partial_sums.push_back(mean_y);
    est.partial_stderr.push_back(std::sqrt(var_y / n));
  }
  est.value = est.partial_sums.back();
  est.standard_error = est.partial_stderr.back();
  return est;
}

VarianceEstimate estimate_sigma_variance(const SystemSpec& spec, std::int64_t n, std::int64_t ensemble,
                                         std::uint64_t seed, Exec exec) {
  if (n < 1000) throw std::invalid_argument("estimate_sigma_variance: n must be >= 1000");
  if (ensemble < 2) throw std::invalid_argument("estimate_sigma_variance: ensemble must be >= 2");
  VarianceEstimate est;
  est.n = n;
  est.ensemble = ensemble;
  est.scaled_sums.resize(static_cast<std::size_t>(ensemble));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for_each_member(exec, ensemble, [&](std::int64_t i) {
    StreamRng rng(seed, static_cast<std::uint64_t>(i), "variance-start");
    TorusPoint2 p{rng.uniform(), rng.uniform()};
    double s = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
      s += spec.phi(p);
      p = spec.matrix.apply(p);
    }
    est.scaled_sums[static_cast<std::size_t>(i)] = s * scale;
  });
  // The zero mean is known exactly, so the variance is the raw second moment.
  KahanSum m2, m4;
  for (double z : est.scaled_sums) {
    m2.add(z * z);
    m4.add(z * z * z * z);
  }
  const auto en = static_cast<double>(ensemble);
  est.value = m2.value() / en;
  est.standard_error = std::sqrt(std::max(0.0, m4.value() / en - est.value * est.value) / en);
  return est;
}

CltPath sample_clt_path(const SystemSpec& spec, const TorusPoint2& x, std::int64_t n, int grid,
                        double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sample_clt_path: sigma must be positive");
  if (grid < 1 || n < 1) throw std::invalid_argument("sample_clt_path: need grid >= 1 and n >= 1");
  const BirkhoffTrace trace = birkhoff_trace(spec, x, n);
  const double norm = 1.0 / std::sqrt(sigma * static_cast<double>(n));
  CltPath path;
  path.t.resize(static_cast<std::size_t>(grid) + 1);
  path.values.resize(static_cast<std::size_t>(grid) + 1);
  for (int i = 0; i <= grid; ++i) {
    const double t = static_cast<double>(i) / grid;
    // The integrand is constant on [j, j+1), so the integral is S_m plus a fraction of phi_m.
    const double s = static_cast<double>(n) * t;
    auto m = static_cast<std::int64_t>(std::floor(s));
    if (m > n) m = n;
    double integral = trace.sums[static_cast<std::size_t>(m)];
    if (m < n) {
      const double phi_m = trace.sums[static_cast<std::size_t>(m + 1)] - trace.sums[static_cast<std::size_t>(m)];
      integral += (s - static_cast<double>(m)) * phi_m;
    }
    path.t[static_cast<std::size_t>(i)] = t;
    path.values[static_cast<std::size_t>(i)] = integral * norm;
  }
  return path;
}

std::vector<CltPath> sample_clt_paths(const SystemSpec& spec, std::int64_t n, int grid, double sigma,
                                      std::int64_t count, std::uint64_t seed, Exec exec) {
  std::vector<CltPath> paths(static_cast<std::size_t>(count));
  for_each_member(exec, count, [&](std::int64_t i) {
    StreamRng rng(seed, static_cast<std::uint64_t>(i), "clt-start");
    const TorusPoint2 x{rng.uniform(), rng.uniform()};
    paths[static_cast<std::size_t>(i)] = sample_clt_path(spec, x, n, grid, sigma);
  });
  return paths;
}

std::vector<CltPath> gaussian_walk_paths(std::int64_t count, std::int64_t steps, int grid,
                                         std::uint64_t seed) {
  std::vector<CltPath> paths(static_cast<std::size_t>(count));
  const double norm = 1.0 / std::sqrt(static_cast<double>(steps));
  for (std::int64_t i = 0; i < count; ++i) {
    StreamRng rng(seed, static_cast<std::uint64_t>(i), "gaussian-walk");
    std::vector<double> walk(static_cast<std::size_t>(steps) + 1, 0.0);
    for (std::int64_t j = 0; j < steps; ++j) {
      walk[static_cast<std::size_t>(j + 1)] = walk[static_cast<std::size_t>(j)] + rng.normal();
    }
    CltPath& path = paths[static_cast<std::size_t>(i)];
    for (int g = 0; g <= grid; ++g) {
      const double t = static_cast<double>(g) / grid;
      const double s = t * static_cast<double>(steps);
      auto m = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(s)), steps);
      double v = walk[static_cast<std::size_t>(m)];
      if (m < steps) v += (s - static_cast<double>(m)) * (walk[static_cast<std::size_t>(m + 1)] - walk[static_cast<std::size_t>(m)]);
      path.t.push_back(t);
      path.values.push_back(v * norm);
    }
  }
  return paths;
}

WienerReport wiener_tests(std::span<const CltPath> paths, int blocks) {
  if (paths.size() < 500) throw std::invalid_argument("wiener_tests: need at least 500 paths");
  const std::size_t points = paths.front().values.size();
  const int grid = static_cast<int>(points) - 1;
  if (blocks < 2 || grid % blocks != 0 || grid % 2 != 0) {
    throw std::invalid_argument("wiener_tests: grid must be divisible by 2 and by the block count");
  }
  for (const auto& p : paths) {
    if (p.values.size() != points) throw std::invalid_argument("wiener_tests: ragged paths");
  }
  WienerReport report;
  report.paths = paths.size();

  std::vector<double> endpoint, half, second_half;
  for (const auto& p : paths) {
    endpoint.push_back(p.values.back());
    half.push_back(p.values[static_cast<std::size_t>(grid / 2)]);
    second_half.push_back(p.values.back() - p.values[static_cast<std::size_t>(grid / 2)]);
  }
  report.ks = ks_test_normal(endpoint);
  report.half_increment_correlation = correlation(second_half, half);

  std::vector<double> ts, vars;
  std::vector<double> column(paths.size());
  for (std::size_t g = 1; g < points; ++g) {
    for (std::size_t i = 0; i < paths.size(); ++i) column[i] = paths[i].values[g];
    ts.push_back(paths.front().t[g]);
    vars.push_back(variance(column));
  }
  const LinearFit fit = linear_fit(ts, vars);
  report.variance_slope = fit.slope;
  report.variance_intercept = fit.intercept;
  report.variance_r_squared = fit.r_squared;

  const int width = grid / blocks;
  std::vector<std::vector<double>> increments(static_cast<std::size_t>(blocks));
  for (int b = 0; b < blocks; ++b) {
    for (const auto& p : paths) {
      increments[static_cast<std::size_t>(b)].push_back(p.values[static_cast<std::size_t>((b + 1) * width)] -
                                                        p.values[static_cast<std::size_t>(b * width)]);
    }
  }
  report.increment_correlation.assign(static_cast<std::size_t>(blocks),
                                      std::vector<double>(static_cast<std::size_t>(blocks), 1.0));
  for (std::size_t a = 0; a < increments.size(); ++a) {
    for (std::size_t b = a + 1; b < increments.size(); ++b) {
      const double r = correlation(increments[a], increments[b]);
      report.increment_correlation[a][b] = report.increment_correlation[b][a] = r;
      report.max_offdiagonal_correlation = std::max(report.max_offdiagonal_correlation, std::abs(r));
    }
  }
  return report;
}

OccupationScan occupation_scan(const SystemSpec& spec, const TorusPoint2& x, int max_k, double sigma,
                               double rho) {
  if (max_k < 0 || max_k > 40) throw std::invalid_argument("occupation_scan: max_k must be in [0, 40]");
  if (!(sigma > 0.0)) throw std::invalid_argument("occupation_scan: sigma must be positive");
  OccupationScan scan;
  scan.rho = rho;
  std::vector<double> threshold;
  for (int k = 0; k <= max_k; ++k) {
    const std::int64_t n = std::int64_t{1} << k;
    scan.n.push_back(n);
    threshold.push_back(std::sqrt(sigma * static_cast<double>(n)));
  }
  scan.count.assign(scan.n.size(), 0);
  const std::int64_t total = scan.n.back();
  TorusPoint2 p = x;
  double s = 0.0;  // S_j
  int first_k = 0;  // smallest k with 2^k > j
  for (std::int64_t j = 0; j < total; ++j) {
    while (scan.n[static_cast<std::size_t>(first_k)] <= j) ++first_k;
    // Thresholds increase with k: count until the first one S_j misses.
    for (int k = first_k; k <= max_k && s >= threshold[static_cast<std::size_t>(k)]; ++k) {
      ++scan.count[static_cast<std::size_t>(k)];
    }
    s += spec.phi(p);
    p = spec.matrix.apply(p);
  }
  for (int k = 0; k <= max_k; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (static_cast<double>(scan.count[i]) >= (1.0 - rho) * static_cast<double>(scan.n[i])) {
      scan.hit = true;
      if (scan.first_hit_k < 0) scan.first_hit_k = k;
    }
  }
  return scan;
}

double brownian_occupation_probability(double rho, std::int64_t paths, std::int64_t steps,
                                       std::uint64_t seed, Exec exec) {
  std::vector<int> hit(static_cast<std::size_t>(paths), 0);
  const double level = std::sqrt(static_cast<double>(steps));
  for_each_member(exec, paths, [&](std::int64_t i) {
    StreamRng rng(seed, static_cast<std::uint64_t>(i), "brownian-occupation");
    double w = 0.0;
    std::int64_t above = 0;
    for (std::int64_t j = 0; j < steps; ++j) {
      if (w >= level) ++above;
      w += rng.normal();
    }
    hit[static_cast<std::size_t>(i)] =
        static_cast<double>(above) >= (1.0 - rho) * static_cast<double>(steps) ? 1 : 0;
  });
  std::int64_t total = 0;
  for (int h : hit) total += h;
  return static_cast<double>(total) / static_cast<double>(paths);
}

}  // namespace ergolab
