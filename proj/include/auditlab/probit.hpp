#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auditlab/error.hpp"
#include "auditlab/fit_result.hpp"
#include "auditlab/ols.hpp"
#include "auditlab/optimize.hpp"
#include "auditlab/panel.hpp"
#include "auditlab/stats.hpp"

namespace auditlab {

// Binary outcome t, regressors X (no intercept column) and a binary group g.
struct BinaryData {
  Eigen::VectorXd t;
  Eigen::MatrixXd X;
  Eigen::VectorXd g;
  std::vector<std::string> x_names;
  std::string g_name = "G";
  std::vector<std::int64_t> cluster;  // empty: observations are independent
  std::string cluster_key;
  Eigen::VectorXd w;  // frequency weights; empty means one per row

  Eigen::Index n() const { return t.size(); }
  Eigen::Index p() const { return X.cols(); }
  double weight(Eigen::Index i) const { return w.size() ? w(i) : 1.0; }
  double total_weight() const { return w.size() ? w.sum() : static_cast<double>(t.size()); }

  void validate() const {
    if (X.rows() != t.size() || g.size() != t.size()) fail(ErrorKind::domain, "binary data: length mismatch");
    if (!cluster.empty() && cluster.size() != static_cast<std::size_t>(t.size()))
      fail(ErrorKind::domain, "binary data: one cluster id per row required");
    if (w.size() && (w.size() != t.size() || w.minCoeff() < 0.0))
      fail(ErrorKind::domain, "binary data: one non-negative weight per row required");
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      if (t(i) != 0.0 && t(i) != 1.0) fail(ErrorKind::domain, "outcome must be binary (0/1)");
      if (g(i) != 0.0 && g(i) != 1.0) fail(ErrorKind::domain, "group column " + g_name + " must be binary (0/1)");
    }
  }
};

/// Splits a panel into outcome, group column and the remaining regressors.
inline BinaryData binary_data(const Panel& panel, const std::string& group_column) {
  BinaryData d;
  const auto gi = panel.index_of(group_column);
  const auto n = static_cast<Eigen::Index>(panel.n_rows());
  d.t = Eigen::Map<const Eigen::VectorXd>(panel.outcome.data(), n);
  d.g = panel.X.col(static_cast<Eigen::Index>(gi));
  d.g_name = group_column;
  d.X.resize(n, panel.X.cols() - 1);
  Eigen::Index c = 0;
  for (Eigen::Index k = 0; k < panel.X.cols(); ++k) {
    if (static_cast<std::size_t>(k) == gi) continue;
    d.X.col(c++) = panel.X.col(k);
    d.x_names.push_back(panel.names[static_cast<std::size_t>(k)]);
  }
  d.cluster = panel.cluster;
  d.cluster_key = panel.cluster_key;
  d.validate();
  return d;
}

/// Collapses identical (t, g, x) rows into weighted rows. Only valid without
/// cluster ids; row order follows the sorted row values, so it is deterministic.
inline BinaryData compress(const BinaryData& d) {
  if (!d.cluster.empty()) fail(ErrorKind::domain, "compress: clustered data cannot be collapsed");
  std::map<std::vector<double>, double> counts;
  std::vector<double> key(static_cast<std::size_t>(d.p() + 2));
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    key[0] = d.t(i);
    key[1] = d.g(i);
    for (Eigen::Index k = 0; k < d.p(); ++k) key[static_cast<std::size_t>(k + 2)] = d.X(i, k);
    counts[key] += d.weight(i);
  }
  BinaryData c;
  c.x_names = d.x_names;
  c.g_name = d.g_name;
  const auto m = static_cast<Eigen::Index>(counts.size());
  c.t.resize(m);
  c.g.resize(m);
  c.w.resize(m);
  c.X.resize(m, d.p());
  Eigen::Index r = 0;
  for (const auto& [k, cnt] : counts) {
    c.t(r) = k[0];
    c.g(r) = k[1];
    for (Eigen::Index j = 0; j < d.p(); ++j) c.X(r, j) = k[static_cast<std::size_t>(j + 2)];
    c.w(r) = cnt;
    ++r;
  }
  return c;
}

namespace detail {

// Linear index a + sum_k X(i,k) * theta(off + k), accumulated left to right so
// that nested models evaluate bit-identically.
inline double linear_index(double a, const Eigen::MatrixXd& X, Eigen::Index i, const Eigen::VectorXd& theta,
                           Eigen::Index off) {
  double s = a;
  for (Eigen::Index k = 0; k < X.cols(); ++k) s += X(i, k) * theta(off + k);
  return s;
}

inline double binary_term(double t, double z) { return t == 1.0 ? stats::log_norm_cdf(z) : stats::log_norm_cdf(-z); }

inline double binary_dz(double t, double z) { return t == 1.0 ? stats::inv_mills(z) : -stats::inv_mills(-z); }

// Cluster (or observation-level) sandwich around the inverse Hessian of -loglik.
// Rows carry frequency weights `w` (empty: unit weights).
inline Eigen::MatrixXd mle_sandwich(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd& scores,
                                    const std::vector<std::int64_t>& cluster, const Eigen::VectorXd& w = {}) {
  const Eigen::MatrixXd bread = hessian.inverse();
  Eigen::MatrixXd meat;
  double groups = w.size() ? w.sum() : static_cast<double>(scores.rows());
  if (cluster.empty()) {
    meat = w.size() ? Eigen::MatrixXd(scores.transpose() * w.asDiagonal() * scores)
                    : Eigen::MatrixXd(scores.transpose() * scores);
  } else {
    std::size_t n_groups = 0;
    const auto codes = group_codes(cluster, cluster.size(), n_groups);
    if (n_groups < 2) fail(ErrorKind::domain, "cluster-robust inference undefined with a single cluster");
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_groups), scores.cols());
    for (Eigen::Index r = 0; r < scores.rows(); ++r)
      sums.row(static_cast<Eigen::Index>(codes[r])) += (w.size() ? w(r) : 1.0) * scores.row(r);
    meat = sums.transpose() * sums;
    groups = static_cast<double>(n_groups);
  }
  return sandwich(bread, meat, groups / (groups - 1.0));
}

inline void require_both_outcomes(const Eigen::VectorXd& t) {
  const double opens = t.sum();
  if (opens == 0.0 || opens == static_cast<double>(t.size()))
    fail(ErrorKind::domain, "degenerate outcome: all observations are " + std::string(opens == 0.0 ? "0" : "1"));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Plain probit, theta = [a, b_1..b_p], Pr(t=1) = Phi(a + X b).

inline double probit_loglik(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X, const Eigen::VectorXd& t,
                            const Eigen::VectorXd& w = {}) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double term = detail::binary_term(t(i), detail::linear_index(theta(0), X, i, theta, 1));
    ll += w.size() ? w(i) * term : term;
  }
  return ll;
}

inline Eigen::MatrixXd probit_scores(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X, const Eigen::VectorXd& t) {
  Eigen::MatrixXd s(t.size(), theta.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double d = detail::binary_dz(t(i), detail::linear_index(theta(0), X, i, theta, 1));
    s(i, 0) = d;
    for (Eigen::Index k = 0; k < X.cols(); ++k) s(i, k + 1) = d * X(i, k);
  }
  return s;
}

/// Probit of t on [1, X]; robust or clustered sandwich vcov. `w` holds
/// optional frequency weights.
inline FitResult fit_probit(const Eigen::MatrixXd& X, const Eigen::VectorXd& t, const std::vector<std::string>& names,
                            const std::vector<std::int64_t>& cluster = {}, const std::string& cluster_key = {},
                            const Eigen::VectorXd& w = {}) {
  detail::require_both_outcomes(t);
  const double n = w.size() ? w.sum() : static_cast<double>(t.size());
  const Objective f = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
    const Eigen::MatrixXd s = probit_scores(th, X, t);
    grad = -(w.size() ? Eigen::VectorXd(s.transpose() * w) : Eigen::VectorXd(s.colwise().sum().transpose())) / n;
    return -probit_loglik(th, X, t, w) / n;
  };
  const auto opt = bfgs_minimize(f, Eigen::VectorXd::Zero(X.cols() + 1));
  if (!opt.converged)
    fail(ErrorKind::numeric, "probit did not converge (" + opt.message + "), loglik " + csv::format_double(-opt.f * n));
  FitResult r;
  r.names = {"(intercept)"};
  r.names.insert(r.names.end(), names.begin(), names.end());
  r.coef = opt.x;
  r.n_obs = static_cast<std::size_t>(std::llround(n));
  r.log_likelihood = -opt.f * n;
  for (double v : opt.trace) r.trace.push_back(-v * n);
  const Eigen::MatrixXd h = numerical_hessian(f, opt.x) * n;
  r.vcov = detail::mle_sandwich(h, probit_scores(opt.x, X, t), cluster, w);
  r.se_kind = cluster.empty() ? SeKind::robust : SeKind::cluster;
  r.se_label = cluster.empty() ? "robust" : "cluster(" + cluster_key + ")";
  return r;
}

// ---------------------------------------------------------------------------
// Heteroskedastic probit, theta = [a, b_1..b_p, gamma, omega] with a = -c':
//   z = (a + X b + gamma G) / exp(omega G).

inline double het_probit_z(const Eigen::VectorXd& theta, const BinaryData& d, Eigen::Index i) {
  const auto p = d.p();
  const double index = detail::linear_index(theta(0), d.X, i, theta, 1) + d.g(i) * theta(p + 1);
  return index / std::exp(theta(p + 2) * d.g(i));
}

inline double het_probit_loglik(const Eigen::VectorXd& theta, const BinaryData& d) {
  if (theta.size() != d.p() + 3) fail(ErrorKind::domain, "het probit: parameter vector has the wrong length");
  double ll = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double term = detail::binary_term(d.t(i), het_probit_z(theta, d, i));
    ll += d.w.size() ? d.w(i) * term : term;
  }
  return ll;
}

/// Per-row gradient of the log-likelihood (unweighted), n x (p+3).
inline Eigen::MatrixXd het_probit_scores(const Eigen::VectorXd& theta, const BinaryData& d) {
  const auto p = d.p();
  Eigen::MatrixXd s(d.n(), p + 3);
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double g = d.g(i);
    const double inv_sd = std::exp(-theta(p + 2) * g);
    const double z = het_probit_z(theta, d, i);
    const double dz = detail::binary_dz(d.t(i), z);
    s(i, 0) = dz * inv_sd;
    for (Eigen::Index k = 0; k < p; ++k) s(i, k + 1) = dz * d.X(i, k) * inv_sd;
    s(i, p + 1) = dz * g * inv_sd;
    s(i, p + 2) = -dz * g * z;
  }
  return s;
}

namespace detail {

inline Eigen::VectorXd weighted_sum(const Eigen::MatrixXd& scores, const BinaryData& d) {
  return d.w.size() ? Eigen::VectorXd(scores.transpose() * d.w) : Eigen::VectorXd(scores.colwise().sum().transpose());
}

}  // namespace detail

inline Eigen::VectorXd het_probit_gradient(const Eigen::VectorXd& theta, const BinaryData& d) {
  return detail::weighted_sum(het_probit_scores(theta, d), d);
}

/// Pr(t=1) at covariates x and a (possibly fractional) group value g.
inline double het_probit_probability(const Eigen::VectorXd& theta, const Eigen::VectorXd& x, double g) {
  const auto p = x.size();
  double index = theta(0);
  for (Eigen::Index k = 0; k < p; ++k) index += x(k) * theta(k + 1);
  index += g * theta(p + 1);
  return stats::norm_cdf(index / std::exp(theta(p + 2) * g));
}

struct Marginals {
  double total = 0.0;
  double level = 0.0;
  double variance = 0.0;
};

// d/dG Phi(z(G)) with G continuous, split into the shift through gamma and the
// scale change through omega.
inline Marginals het_probit_marginals(const Eigen::VectorXd& theta, const Eigen::VectorXd& x_mean, double g_mean) {
  const auto p = x_mean.size();
  const double gamma = theta(p + 1), omega = theta(p + 2);
  const double sd = std::exp(omega * g_mean);
  double index = theta(0);
  for (Eigen::Index k = 0; k < p; ++k) index += x_mean(k) * theta(k + 1);
  index += g_mean * gamma;
  const double z = index / sd;
  const double dens = stats::norm_pdf(z);
  Marginals m;
  m.level = dens * gamma / sd;
  m.variance = -dens * z * omega;
  m.total = dens * (gamma / sd - omega * z);
  return m;
}

struct RatioTest {
  double stat = 0.0;
  double p_value = 1.0;
};

struct HetProbitResult {
  FitResult fit;  // terms: neg_threshold, X names, gamma_combined, omega
  double c_prime = 0.0;
  Eigen::VectorXd beta;
  double gamma = 0.0;  // taste and mean-belief shift combined
  double omega = 0.0;
  double sigma_ratio = 1.0;
  double sigma_ratio_se = 0.0;
  RatioTest wald;  // exp(omega) = 1, delta method
  RatioTest lr;    // against the homoskedastic probit
  Marginals marginals;
  int iterations = 0;

  double gamma_se() const { return fit.se(fit.names.size() - 2); }
};

namespace detail {

inline void require_identification(const BinaryData& d) {
  detail::require_both_outcomes(d.t);
  for (int grp = 0; grp <= 1; ++grp) {
    Eigen::Index rows = 0;
    double t_sum = 0.0;
    bool varies = false;
    std::vector<double> first(static_cast<std::size_t>(d.p()), std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      if (d.g(i) != grp) continue;
      ++rows;
      t_sum += d.t(i);
      for (Eigen::Index k = 0; k < d.p(); ++k) {
        auto& f = first[static_cast<std::size_t>(k)];
        if (std::isnan(f)) f = d.X(i, k);
        else if (d.X(i, k) != f) varies = true;
      }
    }
    const std::string label = d.g_name + "=" + std::to_string(grp);
    if (rows == 0) fail(ErrorKind::domain, "het probit: no observations with " + label);
    if (t_sum == 0.0 || t_sum == static_cast<double>(rows))
      fail(ErrorKind::domain, "het probit: outcome constant within " + label);
    if (!varies)
      fail(ErrorKind::domain, "identification: regressors constant within " + label +
                                  "; the variance ratio needs a quality shifter that varies");
  }
}

}  // namespace detail

/// Unclustered data are collapsed to weighted unique rows first, which leaves
/// the likelihood unchanged.
inline HetProbitResult fit_het_probit(const BinaryData& input, const OptimOptions& opt = {}) {
  input.validate();
  const BinaryData d = input.cluster.empty() ? compress(input) : input;
  detail::require_identification(d);
  const auto p = d.p();
  const double n = d.total_weight();

  // Homoskedastic start: probit on [X, G].
  Eigen::MatrixXd xg(d.n(), p + 1);
  xg << d.X, d.g;
  auto names = d.x_names;
  names.push_back(d.g_name);
  const FitResult plain = fit_probit(xg, d.t, names, {}, {}, d.w);

  const Objective f = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
    grad = -het_probit_gradient(th, d) / n;
    return -het_probit_loglik(th, d) / n;
  };
  OptimResult best;
  best.f = std::numeric_limits<double>::infinity();
  std::string diag;
  for (double omega0 : {-0.5, 0.0, 0.5}) {
    Eigen::VectorXd start(p + 3);
    start << plain.coef, omega0;
    auto res = bfgs_minimize(f, start, opt);
    diag += " start omega=" + csv::format_double(omega0) + ": loglik " + csv::format_double(-res.f * n) + " (" +
            res.message + ");";
    if (res.converged && res.f < best.f) best = std::move(res);
  }
  if (!best.converged) fail(ErrorKind::numeric, "het probit did not converge;" + diag);

  HetProbitResult r;
  auto& fit = r.fit;
  fit.names = {"neg_threshold"};
  fit.names.insert(fit.names.end(), d.x_names.begin(), d.x_names.end());
  fit.names.push_back("gamma_combined");
  fit.names.push_back("omega");
  fit.coef = best.x;
  fit.n_obs = static_cast<std::size_t>(std::llround(n));
  fit.log_likelihood = -best.f * n;
  for (double v : best.trace) fit.trace.push_back(-v * n);
  const Eigen::MatrixXd h = numerical_hessian(f, best.x) * n;
  fit.vcov = detail::mle_sandwich(h, het_probit_scores(best.x, d), d.cluster, d.w);
  fit.se_kind = d.cluster.empty() ? SeKind::robust : SeKind::cluster;
  fit.se_label = d.cluster.empty() ? "robust" : "cluster(" + d.cluster_key + ")";

  r.c_prime = -best.x(0);
  r.beta = best.x.segment(1, p);
  r.gamma = best.x(p + 1);
  r.omega = best.x(p + 2);
  r.sigma_ratio = std::exp(r.omega);
  r.sigma_ratio_se = r.sigma_ratio * fit.se(static_cast<std::size_t>(p + 2));
  r.iterations = best.iterations;
  if (r.sigma_ratio_se > 0.0) {
    r.wald.stat = std::pow((r.sigma_ratio - 1.0) / r.sigma_ratio_se, 2);
    r.wald.p_value = stats::chi2_sf(r.wald.stat, 1.0);
  }
  r.lr.stat = std::max(0.0, 2.0 * (*fit.log_likelihood - *plain.log_likelihood));
  r.lr.p_value = stats::chi2_sf(r.lr.stat, 1.0);
  const Eigen::VectorXd wts = d.w.size() ? d.w : Eigen::VectorXd::Ones(d.n());
  r.marginals = het_probit_marginals(best.x, d.X.transpose() * wts / n, d.g.dot(wts) / n);
  return r;
}

inline HetProbitResult fit_het_probit(const Panel& panel, const std::string& group_column, const OptimOptions& opt = {}) {
  return fit_het_probit(binary_data(panel, group_column), opt);
}

}  // namespace auditlab
