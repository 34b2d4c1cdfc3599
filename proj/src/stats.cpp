#include "ergolab/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace ergolab {

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
  LinearFit fit;
  const std::size_t n = x.size();
  fit.points = n;
  if (n < 2) return fit;
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (n > 2) {
    const double s2 = sse / static_cast<double>(n - 2);
    fit.slope_stderr = std::sqrt(s2 / sxx);
    fit.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    fit.covariance = -mx * s2 / sxx;
  }
  return fit;
}

RateFit fit_decay_rate(std::span<const double> n, std::span<const double> fraction) {
  std::vector<double> logs(fraction.size());
  for (std::size_t i = 0; i < fraction.size(); ++i) logs[i] = std::log(fraction[i]);
  const LinearFit lf = linear_fit(n, logs);
  RateFit out;
  out.slope = -lf.slope;
  out.log_prefactor = lf.intercept;
  out.r_squared = lf.r_squared;
  out.slope_stderr = lf.slope_stderr;
  out.log_prefactor_stderr = lf.intercept_stderr;
  out.covariance = -lf.covariance;
  out.points = lf.points;
  return out;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  KahanSum s;
  for (double v : values) s.add(v);
  return s.value() / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean(values);
  KahanSum s;
  for (double v : values) s.add((v - m) * (v - m));
  return s.value() / static_cast<double>(n - 1);
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("correlation: size mismatch");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_normal(std::span<const double> sample) {
  return ks_test(std::vector<double>(sample.begin(), sample.end()), normal_cdf);
}

KsResult ks_test_uniform(std::span<const double> sample) {
  return ks_test(std::vector<double>(sample.begin(), sample.end()),
                 [](double x) { return std::clamp(x, 0.0, 1.0); });
}

}  // namespace ergolab
