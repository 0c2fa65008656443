#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auditlab/error.hpp"
#include "auditlab/fit_result.hpp"
#include "auditlab/ols.hpp"
#include "auditlab/panel.hpp"
#include "auditlab/parallel.hpp"
#include "auditlab/records.hpp"
#include "auditlab/rng.hpp"
#include "auditlab/stats.hpp"

namespace auditlab {

// Long-format evaluation data for the slope-classification estimators. A NaN
// answer marks a skipped question.
struct LooData {
  std::vector<std::int64_t> investor;
  std::vector<double> x;
  std::array<std::vector<double>, kQuestions> y;

  std::size_t n() const { return investor.size(); }
};

inline LooData loo_data(const std::vector<EvaluationRecord>& records, const std::string& treatment) {
  LooData d;
  for (auto& c : d.y) c.reserve(records.size());
  for (const auto& r : records) {
    const auto it = r.treatments.find(treatment);
    if (it == r.treatments.end()) fail(ErrorKind::config, "unknown treatment column '" + treatment + "'");
    d.investor.push_back(r.investor_id);
    d.x.push_back(it->second);
    for (int k = 0; k < kQuestions; ++k) d.y[k].push_back(r.q[k] ? *r.q[k] : std::numeric_limits<double>::quiet_NaN());
  }
  return d;
}

namespace detail {

inline std::map<std::int64_t, std::vector<std::size_t>> rows_by_investor(const std::vector<std::int64_t>& investor) {
  std::map<std::int64_t, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < investor.size(); ++i) rows[investor[i]].push_back(i);
  return rows;
}

// Within-investor slope of y on x over `rows` except `skip`; NaN when fewer
// than two usable rows or no variation in x remains.
inline double slope_excluding(const std::vector<std::size_t>& rows, std::size_t skip, const std::vector<double>& x,
                              const std::vector<double>& y) {
  double sx = 0.0, sy = 0.0, m = 0.0;
  for (auto r : rows) {
    if (r == skip || std::isnan(y[r]) || std::isnan(x[r])) continue;
    sx += x[r];
    sy += y[r];
    m += 1.0;
  }
  if (m < 2.0) return std::numeric_limits<double>::quiet_NaN();
  const double xb = sx / m, yb = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (auto r : rows) {
    if (r == skip || std::isnan(y[r]) || std::isnan(x[r])) continue;
    sxx += (x[r] - xb) * (x[r] - xb);
    sxy += (x[r] - xb) * (y[r] - yb);
  }
  if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

inline int classify(double slope) {
  if (std::isnan(slope) || slope == 0.0) return 0;
  return slope < 0.0 ? -1 : 1;
}

}  // namespace detail

struct LooSlopes {
  std::vector<double> slope;  // NaN where undefined
  std::vector<int> group;     // -1 anti, +1 pro, 0 dropped
  std::size_t n_undefined = 0;
  std::size_t n_zero = 0;
};

/// Leave-one-out slope for every row: the row's own (x, y) never enters its
/// slope, so the classification is independent of its error.
inline LooSlopes loo_slopes(const LooData& d, int question) {
  if (question < 1 || question > kQuestions) fail(ErrorKind::config, "question index must lie in 1..5");
  const auto& y = d.y[question - 1];
  LooSlopes out;
  out.slope.assign(d.n(), std::numeric_limits<double>::quiet_NaN());
  out.group.assign(d.n(), 0);
  for (const auto& [id, rows] : detail::rows_by_investor(d.investor))
    for (auto j : rows) out.slope[j] = detail::slope_excluding(rows, j, d.x, y);
  for (std::size_t i = 0; i < d.n(); ++i) {
    out.group[i] = detail::classify(out.slope[i]);
    if (std::isnan(out.slope[i])) ++out.n_undefined;
    else if (out.slope[i] == 0.0) ++out.n_zero;
  }
  return out;
}

inline LooSlopes loo_slopes(const std::vector<EvaluationRecord>& records, int question, const std::string& treatment) {
  return loo_slopes(loo_data(records, treatment), question);
}

/// Full-sample slope per investor, every row of an investor sharing it.
inline LooSlopes full_sample_slopes(const LooData& d, int question) {
  if (question < 1 || question > kQuestions) fail(ErrorKind::config, "question index must lie in 1..5");
  const auto& y = d.y[question - 1];
  LooSlopes out;
  out.slope.assign(d.n(), std::numeric_limits<double>::quiet_NaN());
  out.group.assign(d.n(), 0);
  constexpr auto none = std::numeric_limits<std::size_t>::max();
  for (const auto& [id, rows] : detail::rows_by_investor(d.investor)) {
    const double s = detail::slope_excluding(rows, none, d.x, y);
    for (auto j : rows) out.slope[j] = s;
  }
  for (std::size_t i = 0; i < d.n(); ++i) {
    out.group[i] = detail::classify(out.slope[i]);
    if (std::isnan(out.slope[i])) ++out.n_undefined;
    else if (out.slope[i] == 0.0) ++out.n_zero;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pooled second stage: y = g1 1(anti) x + g2 1(pro) x + alpha_i + e.

inline constexpr const char* kAntiTerm = "anti_x";
inline constexpr const char* kProTerm = "pro_x";

namespace detail {

// Builds the second-stage panel on classified rows with an observed outcome.
// A group whose term has no within-investor variation is left out, so its
// coefficient is absent rather than zero.
inline std::optional<Panel> pooled_panel(const std::vector<std::int64_t>& investor, const std::vector<double>& x,
                                         const std::vector<double>& y, const std::vector<int>& group) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (group[i] != 0 && !std::isnan(y[i]) && !std::isnan(x[i])) rows.push_back(i);
  if (rows.empty()) return std::nullopt;
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd terms(n, 2);
  Panel p;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = rows[static_cast<std::size_t>(r)];
    terms(r, 0) = group[i] < 0 ? x[i] : 0.0;
    terms(r, 1) = group[i] > 0 ? x[i] : 0.0;
    p.outcome.push_back(y[i]);
    p.fe_group.push_back(investor[i]);
    p.cluster.push_back(investor[i]);
  }
  std::size_t n_groups = 0;
  const auto codes = group_codes(p.fe_group, p.fe_group.size(), n_groups);
  Eigen::MatrixXd demeaned = terms;
  demean_within(demeaned, codes, n_groups);
  std::vector<Eigen::Index> keep;
  if (demeaned.col(0).squaredNorm() > 1e-12 * std::max(1.0, terms.col(0).squaredNorm())) {
    keep.push_back(0);
    p.names.push_back(kAntiTerm);
  }
  if (demeaned.col(1).squaredNorm() > 1e-12 * std::max(1.0, terms.col(1).squaredNorm())) {
    keep.push_back(1);
    p.names.push_back(kProTerm);
  }
  if (keep.empty()) return std::nullopt;
  p.X.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) p.X.col(static_cast<Eigen::Index>(c)) = terms.col(keep[c]);
  p.outcome_name = "y";
  p.fe_key = "investor_id";
  p.cluster_key = "investor_id";
  return p;
}

struct GroupEstimates {
  std::optional<double> anti, pro;
};

inline GroupEstimates pooled_estimates(const std::vector<std::int64_t>& investor, const std::vector<double>& x,
                                       const std::vector<double>& y, const std::vector<int>& group) {
  GroupEstimates g;
  const auto panel = pooled_panel(investor, x, y, group);
  if (!panel) return g;
  const auto fit = fit_fe_ols(*panel, VcovKind::none);
  if (fit.has(kAntiTerm)) g.anti = fit.estimate(kAntiTerm);
  if (fit.has(kProTerm)) g.pro = fit.estimate(kProTerm);
  return g;
}

inline double share_of(const std::vector<int>& group, int value) {
  if (group.empty()) return 0.0;
  std::size_t c = 0;
  for (int g : group) c += g == value;
  return static_cast<double>(c) / static_cast<double>(group.size());
}

inline std::optional<double> sd_of(const std::vector<std::optional<double>>& v) {
  std::vector<double> vals;
  for (const auto& x : v)
    if (x) vals.push_back(*x);
  if (vals.size() < 2) return std::nullopt;
  return stats::sample_sd(vals);
}

}  // namespace detail

struct LooOutcomeFit {
  int question = 1;
  std::optional<double> gamma_anti, gamma_pro;
  std::optional<double> se_anti, se_pro;  // bootstrap
};

struct LooOptions {
  int classify_on = 3;
  std::vector<int> outcomes = {1, 2, 3, 4};
  int bootstrap = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct LooResult {
  LooSlopes slopes;
  double share_anti = 0.0, share_pro = 0.0, share_dropped = 0.0;
  std::optional<double> share_anti_se, share_pro_se;
  std::vector<LooOutcomeFit> fits;
  int bootstrap = 0;
  std::uint64_t seed = 0;
  std::size_t n_investors = 0;

  const LooOutcomeFit& fit_for(int question) const {
    for (const auto& f : fits)
      if (f.question == question) return f;
    fail(ErrorKind::config, "no pooled fit for q" + std::to_string(question));
  }
};

/// Leave-one-out classification on `classify_on`, pooled fixed-effects fits for
/// each outcome, and bootstrap SEs from resampling whole investors.
inline LooResult loo_pooled_fit(const LooData& d, const LooOptions& opt = {}) {
  for (int q : opt.outcomes)
    if (q < 1 || q > kQuestions) fail(ErrorKind::config, "question index must lie in 1..5");
  if (opt.bootstrap < 0) fail(ErrorKind::config, "bootstrap replicates must be non-negative");
  LooResult r;
  r.slopes = loo_slopes(d, opt.classify_on);
  r.bootstrap = opt.bootstrap;
  r.seed = opt.seed;
  r.share_anti = detail::share_of(r.slopes.group, -1);
  r.share_pro = detail::share_of(r.slopes.group, 1);
  r.share_dropped = detail::share_of(r.slopes.group, 0);
  for (int q : opt.outcomes) {
    LooOutcomeFit f;
    f.question = q;
    const auto est = detail::pooled_estimates(d.investor, d.x, d.y[q - 1], r.slopes.group);
    f.gamma_anti = est.anti;
    f.gamma_pro = est.pro;
    r.fits.push_back(f);
  }

  const auto by_investor = detail::rows_by_investor(d.investor);
  std::vector<const std::vector<std::size_t>*> blocks;
  for (const auto& [id, rows] : by_investor) blocks.push_back(&rows);
  r.n_investors = blocks.size();
  if (opt.bootstrap == 0 || blocks.empty()) return r;

  // Slopes depend only on an investor's own rows, so resampled investors keep
  // their classification; duplicates enter as distinct investors.
  const auto reps = static_cast<std::size_t>(opt.bootstrap);
  const auto n_out = opt.outcomes.size();
  std::vector<std::optional<double>> share_anti(reps), share_pro(reps);
  std::vector<std::vector<std::optional<double>>> anti(n_out, std::vector<std::optional<double>>(reps));
  auto pro = anti;
  const auto base_seed = derive_seed(opt.seed, streams::bootstrap);
  parallel_for(reps, opt.threads, [&](std::size_t b) {
    Rng rng(derive_seed(base_seed, b));
    std::uniform_int_distribution<std::size_t> pick(0, blocks.size() - 1);
    std::vector<std::int64_t> inv;
    std::vector<double> x;
    std::vector<int> grp;
    std::vector<std::size_t> src;
    for (std::size_t draw = 0; draw < blocks.size(); ++draw) {
      for (auto row : *blocks[pick(rng)]) {
        inv.push_back(static_cast<std::int64_t>(draw));
        x.push_back(d.x[row]);
        grp.push_back(r.slopes.group[row]);
        src.push_back(row);
      }
    }
    share_anti[b] = detail::share_of(grp, -1);
    share_pro[b] = detail::share_of(grp, 1);
    std::vector<double> y(src.size());
    for (std::size_t k = 0; k < n_out; ++k) {
      const auto& col = d.y[opt.outcomes[k] - 1];
      for (std::size_t i = 0; i < src.size(); ++i) y[i] = col[src[i]];
      const auto est = detail::pooled_estimates(inv, x, y, grp);
      anti[k][b] = est.anti;
      pro[k][b] = est.pro;
    }
  });
  r.share_anti_se = detail::sd_of(share_anti);
  r.share_pro_se = detail::sd_of(share_pro);
  for (std::size_t k = 0; k < n_out; ++k) {
    if (r.fits[k].gamma_anti) r.fits[k].se_anti = detail::sd_of(anti[k]);
    if (r.fits[k].gamma_pro) r.fits[k].se_pro = detail::sd_of(pro[k]);
  }
  return r;
}

inline LooResult loo_pooled_fit(const std::vector<EvaluationRecord>& records, const std::string& treatment,
                                const LooOptions& opt = {}) {
  return loo_pooled_fit(loo_data(records, treatment), opt);
}

/// Flattens a LooResult into fit.csv rows ("q1:anti_x", ...) with a diagonal
/// bootstrap covariance.
inline FitResult to_fit_result(const LooResult& r, std::size_t n_obs) {
  FitResult f;
  std::vector<double> est, var;
  auto add = [&](const std::string& name, const std::optional<double>& b, const std::optional<double>& se) {
    if (!b) return;
    f.names.push_back(name);
    est.push_back(*b);
    var.push_back(se ? *se * *se : std::numeric_limits<double>::quiet_NaN());
  };
  for (const auto& fit : r.fits) {
    const auto q = "q" + std::to_string(fit.question) + ":";
    add(q + kAntiTerm, fit.gamma_anti, fit.se_anti);
    add(q + kProTerm, fit.gamma_pro, fit.se_pro);
  }
  add("share_anti", r.share_anti, r.share_anti_se);
  add("share_pro", r.share_pro, r.share_pro_se);
  f.coef = Eigen::Map<Eigen::VectorXd>(est.data(), static_cast<Eigen::Index>(est.size()));
  f.vcov = Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(var.data(), static_cast<Eigen::Index>(var.size()))).asDiagonal();
  f.se_kind = SeKind::bootstrap;
  f.se_label = "bootstrap(" + std::to_string(r.bootstrap) + ")";
  f.n_obs = n_obs;
  f.n_groups_absorbed = r.n_investors;
  return f;
}

/// Same second stage, but rows are classified by the full-sample investor slope
/// (including the row itself). Cluster-robust SEs by investor.
inline FitResult naive_split_fit(const LooData& d, int classify_on, int outcome) {
  if (outcome < 1 || outcome > kQuestions) fail(ErrorKind::config, "question index must lie in 1..5");
  const auto slopes = full_sample_slopes(d, classify_on);
  const auto panel = detail::pooled_panel(d.investor, d.x, d.y[outcome - 1], slopes.group);
  if (!panel) fail(ErrorKind::domain, "naive split: no classified rows with an observed outcome");
  return fit_fe_ols(*panel, VcovKind::cluster);
}

inline FitResult naive_split_fit(const std::vector<EvaluationRecord>& records, const std::string& treatment,
                                 int classify_on, int outcome) {
  return naive_split_fit(loo_data(records, treatment), classify_on, outcome);
}

}  // namespace auditlab
