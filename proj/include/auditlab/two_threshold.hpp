#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auditlab/error.hpp"
#include "auditlab/fit_result.hpp"
#include "auditlab/optimize.hpp"
#include "auditlab/probit.hpp"
#include "auditlab/stats.hpp"

namespace auditlab {

// Interval rule: t = 1 iff c1' < X b + gamma G + exp(omega G) eps < c2'.
// theta = [c1, s, b_1..b_p, gamma, omega] with c2 = c1 + exp(s); there is no
// intercept because the thresholds absorb it.

namespace detail {

struct IntervalTerms {
  double lo, hi, sd, prob, comp;
};

inline IntervalTerms interval_terms(const Eigen::VectorXd& theta, const BinaryData& d, Eigen::Index i) {
  const auto p = d.p();
  const double c1 = theta(0), c2 = theta(0) + std::exp(theta(1));
  const double mu = linear_index(0.0, d.X, i, theta, 2) + d.g(i) * theta(p + 2);
  IntervalTerms r{};
  r.sd = std::exp(theta(p + 3) * d.g(i));
  r.lo = (c1 - mu) / r.sd;
  r.hi = (c2 - mu) / r.sd;
  r.prob = r.lo > 0.0 ? stats::norm_cdf(-r.lo) - stats::norm_cdf(-r.hi) : stats::norm_cdf(r.hi) - stats::norm_cdf(r.lo);
  r.comp = stats::norm_cdf(r.lo) + stats::norm_cdf(-r.hi);
  constexpr double floor = std::numeric_limits<double>::min();
  r.prob = std::max(r.prob, floor);
  r.comp = std::max(r.comp, floor);
  return r;
}

}  // namespace detail

inline double two_threshold_loglik(const Eigen::VectorXd& theta, const BinaryData& d) {
  if (theta.size() != d.p() + 4) fail(ErrorKind::domain, "two-threshold: parameter vector has the wrong length");
  double ll = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const auto r = detail::interval_terms(theta, d, i);
    ll += d.weight(i) * std::log(d.t(i) == 1.0 ? r.prob : r.comp);
  }
  return ll;
}

inline Eigen::MatrixXd two_threshold_scores(const Eigen::VectorXd& theta, const BinaryData& d) {
  const auto p = d.p();
  const double gap = std::exp(theta(1));
  Eigen::MatrixXd s(d.n(), p + 4);
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const auto r = detail::interval_terms(theta, d, i);
    const double w = d.t(i) == 1.0 ? 1.0 / r.prob : -1.0 / r.comp;
    const double f_lo = stats::norm_pdf(r.lo), f_hi = stats::norm_pdf(r.hi);
    const double dp_c1 = -f_lo / r.sd, dp_c2 = f_hi / r.sd;
    const double dp_mu = (f_lo - f_hi) / r.sd;
    s(i, 0) = w * (dp_c1 + dp_c2);
    s(i, 1) = w * dp_c2 * gap;
    for (Eigen::Index k = 0; k < p; ++k) s(i, k + 2) = w * dp_mu * d.X(i, k);
    s(i, p + 2) = w * dp_mu * d.g(i);
    s(i, p + 3) = w * d.g(i) * (f_lo * r.lo - f_hi * r.hi);
  }
  return s;
}

struct TwoThresholdResult {
  FitResult fit;  // terms: c1, log_gap, X names, gamma_combined, omega
  double c1 = 0.0, c2 = 0.0;
  double c1_se = 0.0, c2_se = 0.0;
  Eigen::VectorXd beta;
  double gamma = 0.0, omega = 0.0;
  bool flat_upper = false;  // upper threshold unidentified: every fitted upper-tail mass < 1e-4
  int starts_converged = 0;
};

inline TwoThresholdResult fit_two_threshold(const BinaryData& input, const OptimOptions& opt = {}) {
  input.validate();
  if (input.t.sum() == 0.0) fail(ErrorKind::domain, "degenerate outcome: no opens in the data");
  const BinaryData d = input.cluster.empty() ? compress(input) : input;
  const auto p = d.p();
  const double n = d.total_weight();

  // Single-threshold fit seeds the lower threshold, slopes and scale. It is
  // misspecified here and can be flat in omega; plain probit starts then do.
  double c0 = 0.0, gamma0 = 0.0, omega_het = 0.0;
  Eigen::VectorXd beta0;
  try {
    const auto het = fit_het_probit(d, opt);
    c0 = het.c_prime;
    beta0 = het.beta;
    gamma0 = het.gamma;
    omega_het = het.omega;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::numeric) throw;
    Eigen::MatrixXd xg(d.n(), p + 1);
    xg << d.X, d.g;
    auto names = d.x_names;
    names.push_back(d.g_name);
    const auto plain = fit_probit(xg, d.t, names, {}, {}, d.w);
    c0 = -plain.coef(0);
    beta0 = plain.coef.segment(1, p);
    gamma0 = plain.coef(p + 1);
  }
  const Objective f = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
    grad = -detail::weighted_sum(two_threshold_scores(th, d), d) / n;
    return -two_threshold_loglik(th, d) / n;
  };

  OptimResult best;
  best.f = std::numeric_limits<double>::infinity();
  std::string diag;
  int converged = 0;
  for (double omega0 : {omega_het, 0.0}) {
    for (double log_gap0 : {0.0, 1.0, 2.0}) {
      Eigen::VectorXd start(p + 4);
      start << c0, log_gap0, beta0, gamma0, omega0;
      auto res = bfgs_minimize(f, start, opt);
      diag += " start (log_gap=" + csv::format_double(log_gap0) + ", omega=" + csv::format_double(omega0) +
              "): loglik " + csv::format_double(-res.f * n) + " (" + res.message + ");";
      if (!res.converged) continue;
      ++converged;
      if (res.f < best.f) best = std::move(res);
    }
  }
  if (!best.converged) fail(ErrorKind::numeric, "two-threshold fit did not converge;" + diag);
  // The likelihood is invariant to (c1, c2, b, gamma) -> (-c2, -c1, -b, -gamma);
  // report the orientation in which the quality signals raise the index on net.
  if (best.x.segment(2, p).sum() < 0.0) {
    const double c2 = best.x(0) + std::exp(best.x(1));
    best.x(0) = -c2;
    best.x.segment(2, p + 1) *= -1.0;
  }

  TwoThresholdResult r;
  r.starts_converged = converged;
  auto& fit = r.fit;
  fit.names = {"c1", "log_gap"};
  fit.names.insert(fit.names.end(), d.x_names.begin(), d.x_names.end());
  fit.names.push_back("gamma_combined");
  fit.names.push_back("omega");
  fit.coef = best.x;
  fit.n_obs = static_cast<std::size_t>(std::llround(n));
  fit.log_likelihood = -best.f * n;
  for (double v : best.trace) fit.trace.push_back(-v * n);
  const Eigen::MatrixXd h = numerical_hessian(f, best.x) * n;
  fit.vcov = detail::mle_sandwich(h, two_threshold_scores(best.x, d), d.cluster, d.w);
  fit.se_kind = d.cluster.empty() ? SeKind::robust : SeKind::cluster;
  fit.se_label = d.cluster.empty() ? "robust" : "cluster(" + d.cluster_key + ")";

  const double gap = std::exp(best.x(1));
  r.c1 = best.x(0);
  r.c2 = r.c1 + gap;
  r.c1_se = fit.se(0);
  r.c2_se = std::sqrt(std::max(0.0, fit.vcov(0, 0) + gap * gap * fit.vcov(1, 1) + 2.0 * gap * fit.vcov(0, 1)));
  r.beta = best.x.segment(2, p);
  r.gamma = best.x(p + 2);
  r.omega = best.x(p + 3);
  r.flat_upper = true;
  for (Eigen::Index i = 0; i < d.n() && r.flat_upper; ++i)
    r.flat_upper = stats::norm_cdf(-detail::interval_terms(best.x, d, i).hi) < 1e-4;
  return r;
}

inline TwoThresholdResult fit_two_threshold(const Panel& panel, const std::string& group_column,
                                            const OptimOptions& opt = {}) {
  return fit_two_threshold(binary_data(panel, group_column), opt);
}

}  // namespace auditlab
