#include "ergolab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "ergolab/csv.hpp"

namespace ergolab {

namespace {

int sup_norm(const std::array<int, 3>& k) {
  return std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
}

bool is_canonical(const std::array<int, 3>& k) {
  for (int v : k) {
    if (v != 0) return v > 0;
  }
  return false;
}

}  // namespace

TestFamily::TestFamily(int dimension, int max_norm) : dimension_(dimension), max_norm_(max_norm) {
  if (dimension != 2 && dimension != 3) throw std::invalid_argument("TestFamily: dimension must be 2 or 3");
  if (max_norm < 1) throw std::invalid_argument("TestFamily: max_norm must be >= 1");
  const int m = max_norm;
  const int m3 = dimension == 3 ? m : 0;
  for (int a = -m; a <= m; ++a) {
    for (int b = -m; b <= m; ++b) {
      for (int c = -m3; c <= m3; ++c) {
        const std::array<int, 3> k{a, b, c};
        if (is_canonical(k)) frequencies_.push_back(k);
      }
    }
  }
  std::stable_sort(frequencies_.begin(), frequencies_.end(),
                   [](const auto& p, const auto& q) {
                     const int np = sup_norm(p), nq = sup_norm(q);
                     if (np != nq) return np < nq;
                     return p < q;
                   });
  functions_.push_back({{0, 0, 0}, TrigKind::cos});
  for (const auto& k : frequencies_) {
    functions_.push_back({k, TrigKind::cos});
    functions_.push_back({k, TrigKind::sin});
  }
}

std::shared_ptr<const TestFamily> TestFamily::get(int dimension, int max_norm) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const TestFamily>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dimension, max_norm}];
  if (!slot) slot = std::make_shared<const TestFamily>(dimension, max_norm);
  return slot;
}

std::string TestFamily::id() const {
  return "T" + std::to_string(dimension_) + "M" + std::to_string(max_norm_);
}

double TestFamily::weight(std::size_t n) { return std::ldexp(1.0, -static_cast<int>(n)); }

std::size_t TestFamily::index_of(std::array<int, 3> k, TrigKind kind) const {
  for (std::size_t i = 0; i < functions_.size(); ++i) {
    if (functions_[i].k == k && functions_[i].kind == kind) return i;
  }
  throw std::out_of_range("TestFamily::index_of: function not in family " + id());
}

void TestFamily::evaluate(std::span<const double> coords, std::span<double> out) const {
  // powers[j][m] = exp(2 pi i m x_j), m = 0..max_norm.
  constexpr int kMaxNorm = 16;
  if (max_norm_ > kMaxNorm) throw std::invalid_argument("TestFamily: max_norm too large");
  std::complex<double> powers[3][kMaxNorm + 1];
  for (int j = 0; j < dimension_; ++j) {
    const double x = coords[static_cast<std::size_t>(j)];
    const double theta = kTwoPi * (x - std::round(x));
    const std::complex<double> e1{std::cos(theta), std::sin(theta)};
    powers[j][0] = 1.0;
    for (int m = 1; m <= max_norm_; ++m) powers[j][m] = powers[j][m - 1] * e1;
  }
  auto power = [&](int j, int m) {
    return m >= 0 ? powers[j][m] : std::conj(powers[j][-m]);
  };
  out[0] = 1.0;
  std::size_t idx = 1;
  for (const auto& k : frequencies_) {
    std::complex<double> z = power(0, k[0]) * power(1, k[1]);
    if (dimension_ == 3) z *= power(2, k[2]);
    out[idx++] = z.real();
    out[idx++] = z.imag();
  }
}

double TestFamily::evaluate_one(std::size_t n, std::span<const double> coords) const {
  const auto& f = functions_.at(n);
  double phase = 0.0;
  for (int j = 0; j < dimension_; ++j) phase += f.k[static_cast<std::size_t>(j)] * coords[static_cast<std::size_t>(j)];
  const double theta = kTwoPi * (phase - std::round(phase));
  return f.kind == TrigKind::cos ? std::cos(theta) : std::sin(theta);
}

// --------------------------------------------------------------- MeasureVector

MeasureVector::MeasureVector(FamilyPtr family, std::vector<double> integrals)
    : family_(std::move(family)), integrals_(std::move(integrals)) {
  if (!family_ || integrals_.size() != family_->size()) {
    throw std::invalid_argument("MeasureVector: integral count does not match family");
  }
}

MeasureVector MeasureVector::dirac(FamilyPtr family, std::span<const double> coords) {
  std::vector<double> v(family->size());
  family->evaluate(coords, v);
  return {std::move(family), std::move(v)};
}

MeasureVector MeasureVector::dirac(FamilyPtr family, const TorusPoint2& p) {
  const double c[3] = {p.x1, p.x2, 0.0};
  return dirac(std::move(family), std::span<const double>(c, 3));
}

MeasureVector MeasureVector::dirac(FamilyPtr family, const TorusPoint3& p) {
  const double c[3] = {p.base.x1, p.base.x2, p.t};
  return dirac(std::move(family), std::span<const double>(c, 3));
}

std::string MeasureVector::to_csv_row() const {
  std::string row = family_->id();
  for (double v : integrals_) {
    row += ',';
    row += format_double(v);
  }
  return row;
}

namespace {

void require_same_family(const MeasureVector& a, const MeasureVector& b) {
  if (!(a.family() == b.family())) {
    throw std::invalid_argument("measure vectors over different families: " + a.family().id() +
                                " vs " + b.family().id());
  }
}

}  // namespace

MeasureVector mix(const MeasureVector& a, const MeasureVector& b, double lambda) {
  require_same_family(a, b);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = lambda * a[i] + (1.0 - lambda) * b[i];
  return {a.family_ptr(), std::move(v)};
}

double weak_star_distance(const MeasureVector& mu, const MeasureVector& nu) {
  require_same_family(mu, nu);
  double d = 0.0;
  for (std::size_t n = 0; n < mu.size(); ++n) d += std::abs(mu[n] - nu[n]) * TestFamily::weight(n);
  return d;
}

double weak_star_diameter(const TestFamily& family) {
  double d = 0.0;
  for (std::size_t n = 0; n < family.size(); ++n) d += 2.0 * TestFamily::weight(n);
  return d;
}

MeasureVector reference_measure(FamilyPtr family, ReferenceMeasure which) {
  std::vector<double> v(family->size(), 0.0);
  v[0] = 1.0;
  if (which != ReferenceMeasure::volume) {
    if (family->dimension() != 3) {
      throw std::invalid_argument("reference_measure: nu1/nu2 need a 3D family");
    }
    const double tau = which == ReferenceMeasure::nu1 ? 0.0 : 0.5;
    const auto& fns = family->functions();
    for (std::size_t n = 1; n < fns.size(); ++n) {
      const auto& f = fns[n];
      if (f.k[0] != 0 || f.k[1] != 0) continue;
      const double theta = kTwoPi * f.k[2] * tau;
      v[n] = f.kind == TrigKind::cos ? std::cos(theta) : 0.0;  // sin(pi l) = 0 exactly
    }
  }
  return {std::move(family), std::move(v)};
}

SegmentDistance distance_to_segment(const MeasureVector& mu, const MeasureVector& a,
                                    const MeasureVector& b) {
  require_same_family(mu, a);
  require_same_family(mu, b);
  auto objective = [&](double lambda) {
    double d = 0.0;
    for (std::size_t n = 0; n < mu.size(); ++n) {
      d += std::abs(mu[n] - (lambda * a[n] + (1.0 - lambda) * b[n])) * TestFamily::weight(n);
    }
    return d;
  };
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-9) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (objective(m1) <= objective(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  SegmentDistance best{objective(0.5 * (lo + hi)), 0.5 * (lo + hi)};
  for (double end : {0.0, 1.0}) {
    const double d = objective(end);
    if (d < best.distance) best = {d, end};
  }
  return best;
}

MeasureVector base_marginal(const MeasureVector& mu) {
  const auto& fam = mu.family();
  if (fam.dimension() != 3) throw std::invalid_argument("base_marginal: need a 3D measure");
  auto base = TestFamily::get(2, fam.max_norm());
  std::vector<double> v(base->size());
  for (std::size_t n = 0; n < base->size(); ++n) {
    const auto& f = base->functions()[n];
    v[n] = mu[fam.index_of({f.k[0], f.k[1], 0}, f.kind)];
  }
  return {std::move(base), std::move(v)};
}

// ------------------------------------------------------- EmpiricalAccumulator

EmpiricalAccumulator::EmpiricalAccumulator(FamilyPtr family)
    : family_(std::move(family)), sums_(family_->size()), scratch_(family_->size()) {}

void EmpiricalAccumulator::add(std::span<const double> coords) {
  family_->evaluate(coords, scratch_);
  for (std::size_t n = 0; n < scratch_.size(); ++n) sums_[n].add(scratch_[n]);
  ++count_;
}

void EmpiricalAccumulator::add(const TorusPoint2& p) {
  const double c[3] = {p.x1, p.x2, 0.0};
  add(std::span<const double>(c, 3));
}

void EmpiricalAccumulator::add(const TorusPoint3& p) {
  const double c[3] = {p.base.x1, p.base.x2, p.t};
  add(std::span<const double>(c, 3));
}

void EmpiricalAccumulator::merge(const EmpiricalAccumulator& other) {
  if (!(*family_ == *other.family_)) throw std::invalid_argument("merge: family mismatch");
  for (std::size_t n = 0; n < sums_.size(); ++n) sums_[n].merge(other.sums_[n]);
  count_ += other.count_;
}

MeasureVector EmpiricalAccumulator::finalize() const {
  if (count_ == 0) throw std::logic_error("EmpiricalAccumulator: no points accumulated");
  std::vector<double> v(sums_.size());
  const auto n = static_cast<double>(count_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = sums_[i].value() / n;
  v[0] = 1.0;
  return {family_, std::move(v)};
}

}  // namespace ergolab
