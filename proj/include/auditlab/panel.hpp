#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auditlab/csv.hpp"
#include "auditlab/design.hpp"
#include "auditlab/error.hpp"
#include "auditlab/events.hpp"
#include "auditlab/kvconfig.hpp"
#include "auditlab/records.hpp"

namespace auditlab {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Column-major table of doubles; NaN marks a missing value.
class Frame {
 public:
  std::size_t n_rows() const { return cols_.empty() ? 0 : cols_.front().size(); }
  const std::vector<std::string>& names() const { return names_; }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<double>& col(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) fail(ErrorKind::config, "unknown column '" + name + "'");
    return cols_[it->second];
  }

  void add(const std::string& name, std::vector<double> values) {
    if (!cols_.empty() && values.size() != n_rows())
      fail(ErrorKind::domain, "column '" + name + "' has " + std::to_string(values.size()) + " rows, expected " +
                                  std::to_string(n_rows()));
    if (const auto it = index_.find(name); it != index_.end()) {
      cols_[it->second] = std::move(values);
      return;
    }
    index_[name] = cols_.size();
    names_.push_back(name);
    cols_.push_back(std::move(values));
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> cols_;
  std::map<std::string, std::size_t> index_;
};

inline Frame to_frame(const std::vector<EvaluationRecord>& records) {
  Frame f;
  const auto n = records.size();
  std::vector<double> inv(n), prof(n), ord(n), half(n), resp(n);
  std::array<std::vector<double>, kQuestions> q;
  for (auto& c : q) c.resize(n);
  std::map<std::string, std::vector<double>> treat;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = records[i];
    inv[i] = static_cast<double>(r.investor_id);
    prof[i] = static_cast<double>(r.profile_id);
    ord[i] = r.order_index;
    half[i] = r.second_half ? 1.0 : 0.0;
    resp[i] = r.response_seconds;
    for (int k = 0; k < kQuestions; ++k) q[k][i] = r.q[k] ? *r.q[k] : kMissing;
    for (const auto& [name, v] : r.treatments) {
      auto& c = treat[name];
      if (c.empty()) c.assign(n, kMissing);
      c[i] = v;
    }
  }
  f.add("investor_id", std::move(inv));
  f.add("profile_id", std::move(prof));
  f.add("order_index", std::move(ord));
  f.add("second_half", std::move(half));
  for (int k = 0; k < kQuestions; ++k) f.add("q" + std::to_string(k + 1), std::move(q[k]));
  f.add("response_seconds", std::move(resp));
  for (auto& [name, c] : treat) f.add(name, std::move(c));
  return f;
}

// One row per scheduled email; emails absent from `outcomes` count as unopened
// with zero staying time.
inline Frame email_frame(const std::vector<EmailTreatment>& emails, const std::map<std::int64_t, EmailOutcome>& outcomes) {
  Frame f;
  const auto n = emails.size();
  std::vector<double> id(n), inv(n), fund(n), idea(n), fem(n), asi(n), ivy(n), adv(n), day(n), pure(n);
  std::vector<double> opened(n), staying(n), count(n), clicked(n), replied(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = emails[i];
    id[i] = static_cast<double>(e.email_id);
    inv[i] = static_cast<double>(e.investor_id);
    fund[i] = static_cast<double>(e.fund_id);
    idea[i] = static_cast<double>(e.idea_id);
    fem[i] = e.cell.female;
    asi[i] = e.cell.asian;
    ivy[i] = e.cell.ivy;
    adv[i] = e.cell.advantage;
    day[i] = e.send_day;
    pure[i] = e.ivy_variant == IvyVariant::pure;
    const auto it = outcomes.find(e.email_id);
    const EmailOutcome o = it == outcomes.end() ? EmailOutcome{} : it->second;
    opened[i] = o.opened;
    staying[i] = o.staying_seconds;
    count[i] = o.open_count;
    clicked[i] = o.clicked;
    replied[i] = o.replied;
  }
  f.add("email_id", std::move(id));
  f.add("investor_id", std::move(inv));
  f.add("fund_id", std::move(fund));
  f.add("idea", std::move(idea));
  f.add("female", std::move(fem));
  f.add("asian", std::move(asi));
  f.add("ivy", std::move(ivy));
  f.add("advantage", std::move(adv));
  f.add("send_day", std::move(day));
  f.add("pure_ivy", std::move(pure));
  f.add("opened", std::move(opened));
  f.add("staying_seconds", std::move(staying));
  f.add("open_count", std::move(count));
  f.add("clicked", std::move(clicked));
  f.add("replied", std::move(replied));
  return f;
}

// Numeric CSV to Frame; empty cells become missing.
inline Frame to_frame(const csv::Table& t) {
  Frame f;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    std::vector<double> col;
    col.reserve(t.rows.size());
    for (const auto& r : t.rows) col.push_back(r[c].empty() ? kMissing : parse_double(r[c], t.header[c]));
    f.add(t.header[c], std::move(col));
  }
  return f;
}

/// Caps values above the nearest-rank p-th percentile at that percentile.
inline std::vector<double> winsorize(std::span<const double> values, double percentile = 95.0) {
  if (values.empty()) fail(ErrorKind::domain, "winsorize: empty input");
  if (!(percentile > 0.0 && percentile < 100.0)) fail(ErrorKind::domain, "winsorize: percentile must lie in (0,100)");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  const double cap = sorted[rank - 1];
  std::vector<double> out(values.begin(), values.end());
  for (auto& v : out) v = std::min(v, cap);
  return out;
}

// ---------------------------------------------------------------------------
// Panel construction.

struct Filter {
  enum class Op { ge, gt, le, lt, eq, ne };
  std::string column;
  Op op = Op::ge;
  double value = 0.0;

  bool keep(double x) const {
    switch (op) {
      case Op::ge: return x >= value;
      case Op::gt: return x > value;
      case Op::le: return x <= value;
      case Op::lt: return x < value;
      case Op::eq: return x == value;
      case Op::ne: return x != value;
    }
    return false;
  }

  // "q3 >= 50"
  static Filter parse(const std::string& text) {
    static const std::pair<const char*, Op> ops[] = {{">=", Op::ge}, {"<=", Op::le}, {"==", Op::eq},
                                                     {"!=", Op::ne}, {">", Op::gt},  {"<", Op::lt}};
    for (const auto& [sym, op] : ops) {
      const auto pos = text.find(sym);
      if (pos == std::string::npos) continue;
      Filter f;
      f.column = std::string(trim(std::string_view(text).substr(0, pos)));
      f.op = op;
      f.value = parse_double(std::string_view(text).substr(pos + std::string_view(sym).size()), "filter");
      if (f.column.empty()) break;
      return f;
    }
    fail(ErrorKind::config, "bad filter '" + text + "' (expected: column op value)");
  }
};

// Terms: "x" (main effect), "a:b" (product of columns), "x^2" (square).
struct PanelSpec {
  std::string outcome;
  std::vector<std::string> terms;
  std::string fe_key;       // empty: no absorbed fixed effect
  std::string cluster_key;  // empty: no clustering
  std::vector<Filter> filters;
  std::optional<double> winsorize_outcome;  // percentile

  std::string echo() const {
    std::string s = "outcome=" + outcome + "; terms=";
    for (std::size_t i = 0; i < terms.size(); ++i) s += (i ? "," : "") + terms[i];
    s += "; fe=" + fe_key + "; cluster=" + cluster_key + "; filter=";
    for (std::size_t i = 0; i < filters.size(); ++i) {
      static const char* sym[] = {">=", ">", "<=", "<", "==", "!="};
      s += (i ? "&" : "") + filters[i].column + sym[static_cast<int>(filters[i].op)] + csv::format_double(filters[i].value);
    }
    if (winsorize_outcome) s += "; winsorize=" + csv::format_double(*winsorize_outcome);
    return s;
  }

  // Reads `<prefix>.outcome`, `.terms` (comma list), `.fe`, `.cluster`,
  // `.filter` (';' list), `.winsorize`.
  static PanelSpec from_config(const KvConfig& cfg, const std::string& prefix) {
    PanelSpec s;
    s.outcome = cfg.raw(prefix + ".outcome");
    s.terms = cfg.get_list(prefix + ".terms", ',');
    s.fe_key = cfg.get_string(prefix + ".fe", "");
    s.cluster_key = cfg.get_string(prefix + ".cluster", "");
    for (const auto& f : cfg.get_list(prefix + ".filter", ';')) s.filters.push_back(Filter::parse(f));
    if (cfg.has(prefix + ".winsorize")) s.winsorize_outcome = cfg.get_double(prefix + ".winsorize", 95.0);
    return s;
  }
};

struct DropCounts {
  std::size_t input_rows = 0;
  std::size_t filter_dropped = 0;
  std::size_t missing_dropped = 0;
};

struct Panel {
  std::string outcome_name;
  std::vector<double> outcome;
  std::vector<std::string> names;
  Eigen::MatrixXd X;                  // n x p, no intercept column
  std::vector<std::int64_t> fe_group; // empty when no fixed effect
  std::vector<std::int64_t> cluster;  // empty when not clustered
  std::string fe_key, cluster_key;
  DropCounts drops;
  std::string spec_echo;

  std::size_t n_rows() const { return outcome.size(); }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    fail(ErrorKind::config, "panel has no column '" + name + "'");
  }
  Eigen::VectorXd column(const std::string& name) const { return X.col(static_cast<Eigen::Index>(index_of(name))); }
};

namespace detail {

inline std::vector<std::string> term_factors(const std::string& term) {
  if (term.size() > 2 && term.ends_with("^2")) {
    const auto base = term.substr(0, term.size() - 2);
    return {base, base};
  }
  return split(term, ':');
}

}  // namespace detail

inline Panel build_panel(const Frame& frame, const PanelSpec& spec) {
  if (spec.outcome.empty()) fail(ErrorKind::config, "panel spec: missing outcome");
  // Resolve every referenced column up front so unknown names fail early.
  const auto& y = frame.col(spec.outcome);
  std::vector<std::vector<const std::vector<double>*>> factors;
  for (const auto& term : spec.terms) {
    std::vector<const std::vector<double>*> fs;
    for (const auto& name : detail::term_factors(term)) fs.push_back(&frame.col(name));
    factors.push_back(std::move(fs));
  }
  const std::vector<double>* fe = spec.fe_key.empty() ? nullptr : &frame.col(spec.fe_key);
  const std::vector<double>* cl = spec.cluster_key.empty() ? nullptr : &frame.col(spec.cluster_key);
  std::vector<const std::vector<double>*> filter_cols;
  for (const auto& f : spec.filters) filter_cols.push_back(&frame.col(f.column));

  Panel panel;
  panel.outcome_name = spec.outcome;
  panel.names = spec.terms;
  panel.fe_key = spec.fe_key;
  panel.cluster_key = spec.cluster_key;
  panel.spec_echo = spec.echo();
  panel.drops.input_rows = frame.n_rows();

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < frame.n_rows(); ++i) {
    bool pass = true;
    for (std::size_t f = 0; f < spec.filters.size() && pass; ++f) {
      const double v = (*filter_cols[f])[i];
      pass = !std::isnan(v) && spec.filters[f].keep(v);
    }
    if (!pass) {
      ++panel.drops.filter_dropped;
      continue;
    }
    bool complete = !std::isnan(y[i]);
    for (const auto& fs : factors)
      for (const auto* c : fs) complete = complete && !std::isnan((*c)[i]);
    if (fe) complete = complete && !std::isnan((*fe)[i]);
    if (cl) complete = complete && !std::isnan((*cl)[i]);
    if (!complete) {
      ++panel.drops.missing_dropped;
      continue;
    }
    rows.push_back(i);
  }
  if (rows.empty()) fail(ErrorKind::domain, "panel is empty after filtering (" + spec.echo() + ")");

  const auto n = static_cast<Eigen::Index>(rows.size());
  panel.X.resize(n, static_cast<Eigen::Index>(spec.terms.size()));
  panel.outcome.resize(rows.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = rows[static_cast<std::size_t>(r)];
    panel.outcome[static_cast<std::size_t>(r)] = y[i];
    for (std::size_t t = 0; t < factors.size(); ++t) {
      double v = 1.0;
      for (const auto* c : factors[t]) v *= (*c)[i];
      panel.X(r, static_cast<Eigen::Index>(t)) = v;
    }
    if (fe) panel.fe_group.push_back(static_cast<std::int64_t>((*fe)[i]));
    if (cl) panel.cluster.push_back(static_cast<std::int64_t>((*cl)[i]));
  }
  if (spec.winsorize_outcome) panel.outcome = winsorize(panel.outcome, *spec.winsorize_outcome);
  return panel;
}

inline void write_panel_csv(std::ostream& out, const Panel& p) {
  csv::Writer w(out);
  std::vector<std::string> header = {p.outcome_name};
  for (const auto& n : p.names) header.push_back(n);
  if (!p.fe_group.empty()) header.push_back("fe:" + p.fe_key);
  if (!p.cluster.empty()) header.push_back("cluster:" + p.cluster_key);
  w.row(header);
  for (std::size_t i = 0; i < p.n_rows(); ++i) {
    std::vector<std::string> row = {csv::format_double(p.outcome[i])};
    for (Eigen::Index c = 0; c < p.X.cols(); ++c) row.push_back(csv::format_double(p.X(static_cast<Eigen::Index>(i), c)));
    if (!p.fe_group.empty()) row.push_back(std::to_string(p.fe_group[i]));
    if (!p.cluster.empty()) row.push_back(std::to_string(p.cluster[i]));
    w.row(row);
  }
}

inline void write_panel_meta(std::ostream& out, const Panel& p) {
  out << "input_rows = " << p.drops.input_rows << '\n'
      << "filter_dropped = " << p.drops.filter_dropped << '\n'
      << "missing_dropped = " << p.drops.missing_dropped << '\n'
      << "n_rows = " << p.n_rows() << '\n'
      << "spec = " << p.spec_echo << '\n';
}

// Inverse of write_panel_csv: first column is the outcome, "fe:" / "cluster:"
// prefixed columns carry group ids.
inline Panel read_panel_csv(const csv::Table& t) {
  Panel p;
  if (t.header.empty()) fail(ErrorKind::data, "panel.csv: empty header");
  p.outcome_name = t.header[0];
  std::vector<std::size_t> term_cols;
  std::optional<std::size_t> fe_col, cl_col;
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    const auto& h = t.header[c];
    if (h.starts_with("fe:")) {
      fe_col = c;
      p.fe_key = h.substr(3);
    } else if (h.starts_with("cluster:")) {
      cl_col = c;
      p.cluster_key = h.substr(8);
    } else {
      term_cols.push_back(c);
      p.names.push_back(h);
    }
  }
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  p.X.resize(n, static_cast<Eigen::Index>(term_cols.size()));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = t.rows[static_cast<std::size_t>(r)];
    p.outcome.push_back(parse_double(row[0], p.outcome_name));
    for (std::size_t k = 0; k < term_cols.size(); ++k)
      p.X(r, static_cast<Eigen::Index>(k)) = parse_double(row[term_cols[k]], p.names[k]);
    if (fe_col) p.fe_group.push_back(parse_int(row[*fe_col], "fe"));
    if (cl_col) p.cluster.push_back(parse_int(row[*cl_col], "cluster"));
  }
  p.drops.input_rows = t.rows.size();
  return p;
}

}  // namespace auditlab
