#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "auditlab/csv.hpp"
#include "auditlab/design.hpp"
#include "auditlab/error.hpp"

namespace auditlab {

inline constexpr int kQuestions = 5;

// Q1 quality, Q2 collaboration, Q3 contact, Q4 investment (tenths of the
// relative investment, 0..20), Q5 risk.
inline constexpr std::array<double, kQuestions> kQuestionUpper = {100.0, 100.0, 100.0, 20.0, 100.0};

struct EvaluationRecord {
  std::int64_t investor_id = 0;
  std::int64_t profile_id = 0;
  int order_index = 1;
  bool second_half = false;
  std::array<std::optional<double>, kQuestions> q;
  double response_seconds = 0.0;
  std::map<std::string, double> treatments;  // coded profile attributes
  std::map<std::string, double> truth;       // hidden DGP slopes, e.g. "female.q1"
};

// Numeric coding of a profile, one column per analysis variable.
inline std::map<std::string, double> code_profile(const StartupProfile& p, int benchmark_year = 2020) {
  const auto flag = [](bool b) { return b ? 1.0 : 0.0; };
  double existing = 3.0;
  if (p.existing_investors == "0") existing = 0.0;
  if (p.existing_investors == "1") existing = 1.0;
  if (p.existing_investors == "2") existing = 2.0;
  return {
      {"female", flag(p.gender == Gender::female)},
      {"asian", flag(p.race == Race::asian)},
      {"age", static_cast<double>(p.age)},
      {"young", flag(p.young)},
      {"top_school", flag(p.top_school)},
      {"serial_founder", flag(p.serial_founder)},
      {"n_founders", static_cast<double>(p.n_founders())},
      {"company_age", static_cast<double>(benchmark_year - p.founding_year)},
      {"n_advantages", static_cast<double>(p.n_advantages())},
      {"positive_traction", flag(p.traction.positive)},
      {"monthly_revenue", p.traction.monthly_revenue},
      {"growth_rate", p.traction.growth_rate},
      {"b2b", flag(p.category == "B2B")},
      {"domestic", flag(p.market == "domestic")},
      {"us_location", flag(p.location == "US")},
      {"mission_ipo", flag(p.mission == "profit_ipo")},
      {"mission_esg", flag(p.mission == "profit_esg")},
      {"existing_investors", existing},
  };
}

inline void write_evaluations_csv(std::ostream& out, const std::vector<EvaluationRecord>& records) {
  csv::Writer w(out);
  std::vector<std::string> header = {"investor_id", "profile_id", "order_index", "second_half",
                                     "q1",          "q2",         "q3",          "q4",
                                     "q5",          "response_seconds"};
  std::vector<std::string> treat_cols, truth_cols;
  if (!records.empty()) {
    for (const auto& [k, v] : records.front().treatments) treat_cols.push_back(k);
    for (const auto& [k, v] : records.front().truth) truth_cols.push_back(k);
  }
  for (const auto& c : treat_cols) header.push_back(c);
  for (const auto& c : truth_cols) header.push_back("truth." + c);
  w.row(header);
  for (const auto& r : records) {
    std::vector<std::string> row = {std::to_string(r.investor_id), std::to_string(r.profile_id),
                                    std::to_string(r.order_index), r.second_half ? "1" : "0"};
    for (const auto& q : r.q) row.push_back(q ? csv::format_double(*q) : "");
    row.push_back(csv::format_double(r.response_seconds));
    for (const auto& c : treat_cols) row.push_back(csv::format_double(r.treatments.at(c)));
    for (const auto& c : truth_cols) row.push_back(csv::format_double(r.truth.at(c)));
    w.row(row);
  }
}

inline std::vector<EvaluationRecord> read_evaluations_csv(const csv::Table& t) {
  const auto c_inv = t.column("investor_id"), c_prof = t.column("profile_id"), c_ord = t.column("order_index");
  const auto c_half = t.column("second_half"), c_resp = t.column("response_seconds");
  std::array<std::size_t, kQuestions> c_q{};
  for (int k = 0; k < kQuestions; ++k) c_q[k] = t.column("q" + std::to_string(k + 1));
  std::vector<EvaluationRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    EvaluationRecord r;
    r.investor_id = parse_int(row[c_inv], "investor_id");
    r.profile_id = parse_int(row[c_prof], "profile_id");
    r.order_index = static_cast<int>(parse_int(row[c_ord], "order_index"));
    r.second_half = row[c_half] == "1";
    for (int k = 0; k < kQuestions; ++k)
      if (!row[c_q[k]].empty()) r.q[k] = parse_double(row[c_q[k]], "q");
    r.response_seconds = parse_double(row[c_resp], "response_seconds");
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      const auto& name = t.header[c];
      if (c == c_inv || c == c_prof || c == c_ord || c == c_half || c == c_resp) continue;
      if (name.size() == 2 && name[0] == 'q') continue;
      if (name.starts_with("truth.")) {
        r.truth[name.substr(6)] = parse_double(row[c], name);
      } else {
        r.treatments[name] = row[c].empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(row[c], name);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace auditlab
