#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "auditlab/csv.hpp"
#include "auditlab/error.hpp"
#include "auditlab/ols.hpp"
#include "auditlab/panel.hpp"

namespace auditlab {

struct CurvePoint {
  double x = 0.0;
  double coef = 0.0;  // Pr(Y > x | G=1) - Pr(Y > x | G=0)
  std::optional<double> ci_low, ci_high;
};

struct CurveResult {
  std::vector<CurvePoint> points;
  std::vector<double> crossings;
};

inline std::vector<double> unit_grid(double lo, double hi, double step = 1.0) {
  if (!(step > 0.0) || hi < lo) fail(ErrorKind::domain, "bad grid");
  std::vector<double> g;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

/// Sign changes of coef between neighbouring grid points, located by linear
/// interpolation. Exact zeros are bridged to the next non-zero point.
inline std::vector<double> find_crossings(const std::vector<CurvePoint>& pts) {
  std::vector<double> out;
  const CurvePoint* prev = nullptr;
  for (const auto& p : pts) {
    if (p.coef == 0.0) continue;
    if (prev && prev->coef * p.coef < 0.0)
      out.push_back(prev->x + (p.x - prev->x) * prev->coef / (prev->coef - p.coef));
    prev = &p;
  }
  return out;
}

/// Pointwise regression of 1(Y > x) on [1, G] with HC1 SEs and 95% intervals.
inline CurveResult cdf_difference_curve(std::span<const double> y, std::span<const double> g,
                                        const std::vector<double>& grid, double z_crit = 1.959963984540054) {
  if (y.size() != g.size()) fail(ErrorKind::domain, "curve: outcome and group lengths differ");
  if (y.empty()) fail(ErrorKind::domain, "curve: empty sample");
  bool has0 = false, has1 = false;
  for (double v : g) {
    if (v != 0.0 && v != 1.0) fail(ErrorKind::domain, "curve: group column must be binary (0/1)");
    (v == 1.0 ? has1 : has0) = true;
  }
  if (!has0 || !has1) fail(ErrorKind::domain, "curve: both groups must be present");

  Panel p;
  p.names = {"G"};
  p.X = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
  p.outcome.resize(y.size());
  CurveResult r;
  for (double x : grid) {
    std::size_t above = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      p.outcome[i] = y[i] > x ? 1.0 : 0.0;
      above += y[i] > x;
    }
    CurvePoint pt;
    pt.x = x;
    if (above == 0 || above == y.size()) {
      pt.coef = 0.0;  // degenerate indicator: no interval
    } else {
      const auto fit = fit_fe_ols(p, VcovKind::robust);
      pt.coef = fit.coef(0);
      const double se = fit.se(0);
      pt.ci_low = pt.coef - z_crit * se;
      pt.ci_high = pt.coef + z_crit * se;
    }
    r.points.push_back(pt);
  }
  r.crossings = find_crossings(r.points);
  return r;
}

inline CurveResult cdf_difference_curve(const Panel& panel, const std::string& group_column,
                                        const std::vector<double>& grid) {
  const Eigen::VectorXd g = panel.column(group_column);
  return cdf_difference_curve(panel.outcome, std::span<const double>(g.data(), static_cast<std::size_t>(g.size())), grid);
}

inline void write_curve_csv(std::ostream& out, const CurveResult& c) {
  csv::Writer w(out);
  w.row({"x", "coef", "ci_low", "ci_high"});
  for (const auto& p : c.points)
    w.row({csv::format_double(p.x), csv::format_double(p.coef), p.ci_low ? csv::format_double(*p.ci_low) : "",
           p.ci_high ? csv::format_double(*p.ci_high) : ""});
}

}  // namespace auditlab
