#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "auditlab/csv.hpp"
#include "auditlab/error.hpp"
#include "auditlab/stats.hpp"

namespace auditlab {

enum class SeKind { none, classical, robust, cluster, bootstrap };

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::MatrixXd vcov;
  SeKind se_kind = SeKind::none;
  std::string se_label;  // "robust", "cluster(investor_id)", "bootstrap(1000)"
  std::size_t n_obs = 0;
  std::size_t n_groups_absorbed = 0;
  std::optional<double> r_squared;
  std::optional<double> log_likelihood;
  bool converged = true;
  std::vector<double> trace;  // objective per iteration, MLE only

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    fail(ErrorKind::config, "fit has no term '" + name + "'");
  }
  bool has(const std::string& name) const {
    for (const auto& n : names)
      if (n == name) return true;
    return false;
  }
  double estimate(const std::string& name) const { return coef(static_cast<Eigen::Index>(index_of(name))); }
  double se(std::size_t i) const {
    if (vcov.size() == 0) return std::numeric_limits<double>::quiet_NaN();
    const auto k = static_cast<Eigen::Index>(i);
    return std::sqrt(std::max(0.0, vcov(k, k)));
  }
  double se(const std::string& name) const { return se(index_of(name)); }
};

/// (sum of numerator coefficients) / denominator coefficient.
inline double ivy_scaled_ratio(const std::vector<double>& numerator, double denominator) {
  if (std::abs(denominator) < 1e-12) fail(ErrorKind::domain, "ivy-scaled ratio: denominator coefficient is zero");
  double num = 0.0;
  for (double v : numerator) num += v;
  return num / denominator;
}

inline double ivy_scaled_ratio(const FitResult& fit, const std::vector<std::string>& numerator_terms,
                               const std::string& denominator_term) {
  std::vector<double> num;
  for (const auto& t : numerator_terms) num.push_back(fit.estimate(t));
  return ivy_scaled_ratio(num, fit.estimate(denominator_term));
}

inline void write_fit_csv(std::ostream& out, const FitResult& fit) {
  csv::Writer w(out);
  w.row({"term", "estimate", "se", "t", "p"});
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    const double b = fit.coef(static_cast<Eigen::Index>(i));
    const double s = fit.se(i);
    const double t = s > 0.0 ? b / s : std::numeric_limits<double>::quiet_NaN();
    w.row({fit.names[i], csv::format_double(b), csv::format_double(s), csv::format_double(t),
           csv::format_double(std::isnan(t) ? t : stats::two_sided_p(t))});
  }
}

inline void write_fit_meta(std::ostream& out, const FitResult& fit,
                           const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  out << "se_kind = " << fit.se_label << '\n' << "n = " << fit.n_obs << '\n';
  if (fit.n_groups_absorbed) out << "groups_absorbed = " << fit.n_groups_absorbed << '\n';
  if (fit.r_squared) out << "r_squared = " << csv::format_double(*fit.r_squared) << '\n';
  if (fit.log_likelihood) out << "loglik = " << csv::format_double(*fit.log_likelihood) << '\n';
  out << "converged = " << (fit.converged ? "true" : "false") << '\n';
  for (const auto& [k, v] : extra) out << k << " = " << v << '\n';
  if (!fit.trace.empty()) {
    out << "trace =";
    for (std::size_t i = 0; i < fit.trace.size(); ++i) out << (i ? "," : " ") << csv::format_double(fit.trace[i]);
    out << '\n';
  }
}

}  // namespace auditlab
