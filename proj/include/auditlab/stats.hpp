#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace auditlab::stats {

inline double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

inline double norm_log_pdf(double z) {
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// log Phi(z), accurate in the far left tail where Phi underflows.
inline double log_norm_cdf(double z) {
  if (z > -30.0) {
    if (z > 5.0) return std::log1p(-norm_cdf(-z));
    return std::log(norm_cdf(z));
  }
  const double z2 = z * z;
  // Mills-ratio asymptotic series.
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return norm_log_pdf(z) - std::log(-z) + std::log(series);
}

// phi(z) / Phi(z): derivative of log Phi.
inline double inv_mills(double z) {
  if (z > -30.0) return norm_pdf(z) / norm_cdf(z);
  return std::exp(norm_log_pdf(z) - log_norm_cdf(z));
}

inline double norm_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

inline double chi2_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), x));
}

// Two-sided normal p-value of a t/z statistic.
inline double two_sided_p(double t) { return std::erfc(std::abs(t) / std::numbers::sqrt2); }

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

inline double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

inline double correlation(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Pearson goodness-of-fit statistic for observed counts vs expected shares.
inline double chi_square_stat(std::span<const double> observed, std::span<const double> shares) {
  double total = 0.0;
  for (double o : observed) total += o;
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * shares[i];
    if (e > 0.0) stat += (observed[i] - e) * (observed[i] - e) / e;
  }
  return stat;
}

}  // namespace auditlab::stats
