#include "ergolab/historical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

std::vector<std::int64_t> geometric_schedule(std::int64_t n_max, double ratio) {
  if (n_max < 1) throw ConfigError("schedule is empty: n_max must be >= 1");
  if (!(ratio > 1.0)) throw ConfigError("schedule ratio must exceed 1");
  std::vector<std::int64_t> out;
  for (int k = 0;; ++k) {
    const double v = std::ceil(std::pow(ratio, k) - 1e-9);
    if (v > static_cast<double>(n_max)) break;
    const auto n = static_cast<std::int64_t>(v);
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  if (out.back() != n_max) out.push_back(n_max);
  return out;
}

OscillationLog scan_orbit(const SystemSpec& spec, const TorusPoint3& start, std::int64_t n_max,
                          std::vector<std::int64_t> schedule, FamilyPtr family, bool keep_snapshots) {
  if (spec.variant != Variant::compactified3d && spec.variant != Variant::morse_smale_control) {
    throw ConfigError("scan_orbit needs a compactified3d or morse_smale_control system");
  }
  if (!family || family->dimension() != 3) throw std::invalid_argument("scan_orbit: needs a 3D family");
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
  std::erase_if(schedule, [n_max](std::int64_t n) { return n < 1 || n > n_max; });
  if (schedule.empty()) throw ConfigError("schedule is empty");

  const MeasureVector nu1 = reference_measure(family, ReferenceMeasure::nu1);
  const MeasureVector nu2 = reference_measure(family, ReferenceMeasure::nu2);
  const FamilyPtr base_family = TestFamily::get(2, family->max_norm());
  const MeasureVector volume2 = reference_measure(base_family, ReferenceMeasure::volume);

  OscillationLog log;
  log.start = start;
  log.reference_gap = weak_star_distance(nu1, nu2);
  SystemOrbit orbit(spec, start);
  EmpiricalAccumulator acc(family);
  double min_d1 = INFINITY;
  double min_d2 = INFINITY;
  std::size_t next = 0;
  for (std::int64_t step = 1; next < schedule.size(); ++step) {
    acc.add(orbit.point());
    orbit.step();
    if (step != schedule[next]) continue;
    ++next;
    const MeasureVector mu = acc.finalize();
    OscillationRow row;
    row.n = step;
    row.d1 = weak_star_distance(mu, nu1);
    row.d2 = weak_star_distance(mu, nu2);
    const SegmentDistance seg = distance_to_segment(mu, nu1, nu2);
    row.dseg = seg.distance;
    row.weight_nu1 = seg.lambda;
    min_d1 = std::min(min_d1, row.d1);
    min_d2 = std::min(min_d2, row.d2);
    row.min_d1 = min_d1;
    row.min_d2 = min_d2;
    row.base_to_volume = weak_star_distance(base_marginal(mu), volume2);
    log.rows.push_back(row);
    if (keep_snapshots) log.snapshots.push_back(mu);
  }
  return log;
}

OscillationLog scan_orbit(const SystemSpec& spec, const TorusPoint3& start, std::int64_t n_max) {
  return scan_orbit(spec, start, n_max, geometric_schedule(n_max), TestFamily::get(3, 2), true);
}

double nonconvergence_score(const OscillationLog& log) {
  const std::size_t count = log.rows.size();
  if (count < 10) throw std::invalid_argument("nonconvergence_score: needs at least 10 checkpoints");
  double lo = INFINITY;
  double hi = -INFINITY;
  for (std::size_t i = count / 2; i < count; ++i) {
    lo = std::min(lo, log.rows[i].d1);
    hi = std::max(hi, log.rows[i].d1);
  }
  return hi - lo;
}

TorusPoint3 historical_start(std::uint64_t seed, std::int64_t member) {
  StreamRng rng(seed, static_cast<std::uint64_t>(member), "historical-start");
  const double x1 = rng.uniform();
  const double x2 = rng.uniform();
  // Keep t at least 0.05 from the invariant circles.
  double t = rng.uniform(0.05, 0.45);
  if (rng.uniform() < 0.5) t += 0.5;
  return {{x1, x2}, t};
}

std::vector<OscillationLog> scan_ensemble(const SystemSpec& spec, std::int64_t members,
                                          std::uint64_t seed, std::int64_t n_max,
                                          bool keep_snapshots, Exec exec) {
  const auto schedule = geometric_schedule(n_max);
  const FamilyPtr family = TestFamily::get(3, 2);
  std::vector<OscillationLog> logs(static_cast<std::size_t>(members));
  for_each_member(exec, members, [&](std::int64_t i) {
    logs[static_cast<std::size_t>(i)] =
        scan_orbit(spec, historical_start(seed, i), n_max, schedule, family, keep_snapshots);
  });
  return logs;
}

}  // namespace ergolab
