#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ergolab {

/// Kahan-compensated running sum.
class KahanSum {
 public:
  void add(double value) {
    const double y = value - compensation_;
    const double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }
  /// Merges another partial sum (used when reducing per-member accumulators).
  void merge(const KahanSum& other) {
    add(other.sum_);
    add(-other.compensation_);
  }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Least-squares line y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double covariance = 0.0;  ///< cov(intercept, slope)
  std::size_t points = 0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Exponential-decay fit log(fraction) = log a - b n. `slope` is b (decay
/// rate, positive for decay) and `log_prefactor` is log a.
struct RateFit {
  double slope = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  double log_prefactor_stderr = 0.0;
  double covariance = 0.0;
  std::size_t points = 0;
};

RateFit fit_decay_rate(std::span<const double> n, std::span<const double> fraction);

double mean(std::span<const double> values);
/// Unbiased sample variance.
double variance(std::span<const double> values);
double correlation(std::span<const double> a, std::span<const double> b);

double normal_cdf(double x);

/// P(K > lambda) for the Kolmogorov limiting distribution.
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF (Stephens'
/// finite-n correction of the asymptotic distribution).
template <class Cdf>
KsResult ks_test(std::vector<double> sample, Cdf&& cdf);

KsResult ks_test_normal(std::span<const double> sample);
KsResult ks_test_uniform(std::span<const double> sample);

}  // namespace ergolab

#include <algorithm>
#include <cmath>

namespace ergolab {

template <class Cdf>
KsResult ks_test(std::vector<double> sample, Cdf&& cdf) {
  KsResult out;
  const auto n = sample.size();
  if (n == 0) return out;
  std::sort(sample.begin(), sample.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double sn = std::sqrt(static_cast<double>(n));
  out.statistic = d;
  out.p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
  return out;
}

}  // namespace ergolab
