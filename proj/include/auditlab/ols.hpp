#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auditlab/error.hpp"
#include "auditlab/fit_result.hpp"
#include "auditlab/panel.hpp"

namespace auditlab {

// Dense 0..G-1 codes for arbitrary ids, in ascending id order. An empty id
// vector means a single group.
inline std::vector<std::size_t> group_codes(const std::vector<std::int64_t>& ids, std::size_t n, std::size_t& n_groups) {
  std::vector<std::size_t> codes(n, 0);
  if (ids.empty()) {
    n_groups = n ? 1 : 0;
    return codes;
  }
  std::map<std::int64_t, std::size_t> index;
  for (auto id : ids) index.emplace(id, 0);
  std::size_t next = 0;
  for (auto& [id, code] : index) code = next++;
  for (std::size_t i = 0; i < n; ++i) codes[i] = index.at(ids[i]);
  n_groups = next;
  return codes;
}

inline void demean_within(Eigen::Ref<Eigen::MatrixXd> m, const std::vector<std::size_t>& codes, std::size_t n_groups) {
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_groups), m.cols());
  std::vector<double> counts(n_groups, 0.0);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    sums.row(static_cast<Eigen::Index>(codes[r])) += m.row(r);
    counts[codes[r]] += 1.0;
  }
  for (std::size_t g = 0; g < n_groups; ++g) sums.row(static_cast<Eigen::Index>(g)) /= counts[g];
  for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) -= sums.row(static_cast<Eigen::Index>(codes[r]));
}

// Returns the names of columns that add nothing to the span of earlier columns.
inline std::vector<std::string> collinear_columns(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                                                  double tol = 1e-10) {
  std::vector<std::string> bad;
  Eigen::MatrixXd kept(X.rows(), 0);
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double norm = X.col(c).norm();
    if (norm == 0.0) {
      bad.push_back(names[static_cast<std::size_t>(c)]);
      continue;
    }
    Eigen::MatrixXd trial(X.rows(), kept.cols() + 1);
    trial << kept, X.col(c) / norm;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
    qr.setThreshold(tol);
    if (qr.rank() < trial.cols()) {
      bad.push_back(names[static_cast<std::size_t>(c)]);
    } else {
      kept = std::move(trial);
    }
  }
  return bad;
}

inline Eigen::MatrixXd sandwich(const Eigen::MatrixXd& bread, const Eigen::MatrixXd& meat, double scale) {
  Eigen::MatrixXd v = scale * bread * meat * bread;
  return 0.5 * (v + v.transpose());
}

// k_extra: parameters absorbed outside X (fixed effects), counted in the
// degrees-of-freedom correction.
inline Eigen::MatrixXd classical_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& e, std::size_t k_extra) {
  const double n = static_cast<double>(X.rows());
  const double k = static_cast<double>(X.cols() + k_extra);
  if (n <= k) fail(ErrorKind::numeric, "no residual degrees of freedom");
  const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  Eigen::MatrixXd v = (e.squaredNorm() / (n - k)) * bread;
  return 0.5 * (v + v.transpose());
}

/// HC1 heteroskedasticity-consistent covariance.
inline Eigen::MatrixXd robust_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& e, std::size_t k_extra) {
  const double n = static_cast<double>(X.rows());
  const double k = static_cast<double>(X.cols() + k_extra);
  if (n <= k) fail(ErrorKind::numeric, "no residual degrees of freedom");
  const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  const Eigen::MatrixXd scores = X.array().colwise() * e.array();
  return sandwich(bread, scores.transpose() * scores, n / (n - k));
}

/// Cluster-robust covariance with the G/(G-1) * (n-1)/(n-k) correction.
inline Eigen::MatrixXd cluster_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& e,
                                    const std::vector<std::int64_t>& clusters, std::size_t k_extra) {
  const double n = static_cast<double>(X.rows());
  const double k = static_cast<double>(X.cols() + k_extra);
  if (clusters.size() != static_cast<std::size_t>(X.rows())) fail(ErrorKind::domain, "one cluster id per row required");
  std::size_t n_clusters = 0;
  const auto codes = group_codes(clusters, clusters.size(), n_clusters);
  if (n_clusters < 2) fail(ErrorKind::domain, "cluster-robust inference undefined with a single cluster");
  if (n <= k) fail(ErrorKind::numeric, "no residual degrees of freedom");
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_clusters), X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) sums.row(static_cast<Eigen::Index>(codes[r])) += e(r) * X.row(r);
  const double g = static_cast<double>(n_clusters);
  const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  return sandwich(bread, sums.transpose() * sums, g / (g - 1.0) * (n - 1.0) / (n - k));
}

enum class VcovKind { automatic, none, classical, robust, cluster };

struct OlsResult : FitResult {
  Eigen::VectorXd residuals;  // within residuals, equal to dummy-variable OLS residuals
};

/// Within-transformed least squares; the fixed effect is absorbed by demeaning.
/// Without a fixed-effect key the whole panel is one group (an intercept).
/// `automatic` picks cluster vcov when the panel has cluster ids, else HC1.
inline OlsResult fit_fe_ols(const Panel& panel, VcovKind vcov = VcovKind::automatic) {
  const auto n = static_cast<Eigen::Index>(panel.n_rows());
  if (n == 0 || panel.X.cols() == 0) fail(ErrorKind::domain, "fit_fe_ols: empty panel or no regressors");
  std::size_t n_groups = 0;
  const auto codes = group_codes(panel.fe_group, panel.n_rows(), n_groups);

  Eigen::MatrixXd X = panel.X;
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(panel.outcome.data(), n);
  const double y_mean = y.mean();
  const double tss = (y.array() - y_mean).square().sum();
  demean_within(X, codes, n_groups);
  demean_within(y, codes, n_groups);

  if (const auto bad = collinear_columns(X, panel.names); !bad.empty()) {
    std::string list;
    for (const auto& b : bad) list += (list.empty() ? "" : ", ") + b;
    fail(ErrorKind::numeric, "rank-deficient design after demeaning; collinear columns: " + list);
  }

  OlsResult r;
  r.names = panel.names;
  r.coef = X.colPivHouseholderQr().solve(y);
  r.residuals = y - X * r.coef;
  r.n_obs = panel.n_rows();
  r.n_groups_absorbed = n_groups;
  r.r_squared = tss > 0.0 ? 1.0 - r.residuals.squaredNorm() / tss : 1.0;

  if (vcov == VcovKind::automatic) vcov = panel.cluster.empty() ? VcovKind::robust : VcovKind::cluster;
  switch (vcov) {
    case VcovKind::automatic:
    case VcovKind::none: break;
    case VcovKind::classical:
      r.vcov = classical_vcov(X, r.residuals, n_groups);
      r.se_kind = SeKind::classical;
      r.se_label = "classical";
      break;
    case VcovKind::robust:
      r.vcov = robust_vcov(X, r.residuals, n_groups);
      r.se_kind = SeKind::robust;
      r.se_label = "robust";
      break;
    case VcovKind::cluster:
      if (panel.cluster.empty()) fail(ErrorKind::config, "cluster vcov requested but the panel has no cluster key");
      r.vcov = cluster_vcov(X, r.residuals, panel.cluster, n_groups);
      r.se_kind = SeKind::cluster;
      r.se_label = "cluster(" + panel.cluster_key + ")";
      break;
  }
  return r;
}

}  // namespace auditlab
