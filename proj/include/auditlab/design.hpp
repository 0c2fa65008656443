#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "auditlab/catalog.hpp"
#include "auditlab/csv.hpp"
#include "auditlab/error.hpp"
#include "auditlab/names.hpp"
#include "auditlab/rng.hpp"

namespace auditlab {

/// Approximate founder age from graduation year (graduates assumed to be 23).
inline int approx_age(int graduation_year, int benchmark_year = 2020) {
  if (graduation_year > benchmark_year)
    fail(ErrorKind::domain, "graduation year " + std::to_string(graduation_year) + " is after benchmark year " +
                                std::to_string(benchmark_year));
  return benchmark_year - graduation_year + 23;
}

struct Founder {
  std::string name;
  int graduation_year = 0;
  int age = 0;
  std::string school;
};

struct Traction {
  bool positive = false;
  double monthly_revenue = 0.0;  // dollars / month
  double growth_rate = 0.0;      // fraction per month
};

struct StartupProfile {
  std::int64_t profile_id = 0;
  std::int64_t investor_id = -1;  // session owner, -1 when unassigned
  std::vector<Founder> founders;  // 1 or 2, same gender / race / age group
  Gender gender = Gender::male;
  Race race = Race::white;
  bool young = true;
  int graduation_year = 0;  // lead founder
  int age = 0;              // lead founder
  bool top_school = false;
  bool serial_founder = false;
  int founding_year = 2016;
  std::vector<std::string> advantages;
  Traction traction;
  std::string category;
  std::string employees;
  std::string market;
  std::string mission;
  std::string location;
  std::string existing_investors;
  int order_index = 1;
  bool second_half = false;

  int n_founders() const { return static_cast<int>(founders.size()); }
  int n_advantages() const { return static_cast<int>(advantages.size()); }
};

// Draws every component independently from the catalog weights. Founder names
// are drawn without replacement against `used_names`.
inline StartupProfile generate_profile(Rng& rng, const ComponentCatalog& catalog, int order_index,
                                       std::set<std::string>& used_names, int session_size = 16) {
  if (order_index < 1 || order_index > session_size)
    fail(ErrorKind::domain, "order_index " + std::to_string(order_index) + " outside 1.." + std::to_string(session_size));
  StartupProfile p;
  p.profile_id = order_index;
  p.order_index = order_index;
  p.second_half = order_index > session_size / 2;

  const auto& team = catalog.team.levels[catalog.team.draw(rng)];
  p.gender = team.ends_with("_female") ? Gender::female : Gender::male;
  p.race = team.starts_with("asian") ? Race::asian : Race::white;
  const int n_founders = catalog.founders.levels[catalog.founders.draw(rng)] == "single" ? 1 : 2;
  p.young = catalog.age_group.levels[catalog.age_group.draw(rng)] == "young";
  p.top_school = catalog.education.levels[catalog.education.draw(rng)] == "top";
  const auto& range = p.young ? catalog.graduation_young : catalog.graduation_old;
  const auto& schools = p.top_school ? catalog.top_schools : catalog.common_schools;
  std::uniform_int_distribution<int> grad(range.lo, range.hi);
  std::uniform_int_distribution<std::size_t> school(0, schools.size() - 1);
  for (int f = 0; f < n_founders; ++f) {
    Founder founder;
    founder.name = draw_full_name(rng, catalog.names, p.gender, p.race, used_names);
    founder.graduation_year = grad(rng);
    founder.age = approx_age(founder.graduation_year, catalog.benchmark_year);
    founder.school = schools[school(rng)];
    p.founders.push_back(std::move(founder));
  }
  p.graduation_year = p.founders.front().graduation_year;
  p.age = p.founders.front().age;

  p.serial_founder = catalog.serial_founder.levels[catalog.serial_founder.draw(rng)] == "serial";
  p.founding_year = static_cast<int>(parse_int(catalog.founding_year.levels[catalog.founding_year.draw(rng)], "founding_year"));
  const auto n_adv = static_cast<std::size_t>(parse_int(catalog.n_advantages.levels[catalog.n_advantages.draw(rng)], "n_advantages"));
  std::vector<std::string> adv = catalog.advantages;
  std::shuffle(adv.begin(), adv.end(), rng);
  adv.resize(n_adv);
  p.advantages = std::move(adv);

  p.traction.positive = catalog.traction.levels[catalog.traction.draw(rng)] == "positive";
  if (p.traction.positive) {
    std::uniform_real_distribution<double> revenue(catalog.monthly_revenue.lo, catalog.monthly_revenue.hi);
    std::uniform_real_distribution<double> growth(catalog.growth_rate.lo, catalog.growth_rate.hi);
    p.traction.monthly_revenue = std::round(revenue(rng));
    p.traction.growth_rate = std::round(growth(rng) * 1000.0) / 1000.0;
  }
  p.category = catalog.category.levels[catalog.category.draw(rng)];
  p.employees = catalog.employees.levels[catalog.employees.draw(rng)];
  p.market = catalog.market.levels[catalog.market.draw(rng)];
  p.mission = catalog.mission.levels[catalog.mission.draw(rng)];
  p.location = catalog.location.levels[catalog.location.draw(rng)];
  p.existing_investors = catalog.existing_investors.levels[catalog.existing_investors.draw(rng)];
  return p;
}

/// One evaluation session: J profiles shown in order, with a break after J/2.
inline std::vector<StartupProfile> generate_session(Rng& rng, const ComponentCatalog& catalog, int n_profiles = 16,
                                                    std::int64_t investor_id = -1) {
  if (n_profiles <= 0) fail(ErrorKind::domain, "generate_session: number of profiles must be positive");
  if (n_profiles % 2 != 0) fail(ErrorKind::domain, "generate_session: number of profiles must be even");
  std::set<std::string> used;
  std::vector<StartupProfile> session;
  session.reserve(static_cast<std::size_t>(n_profiles));
  for (int j = 1; j <= n_profiles; ++j) {
    auto p = generate_profile(rng, catalog, j, used, n_profiles);
    p.investor_id = investor_id;
    p.profile_id = investor_id >= 0 ? investor_id * n_profiles + j : j;
    session.push_back(std::move(p));
  }
  return session;
}

// ---------------------------------------------------------------------------
// Correspondence-test email design.

struct Investor {
  std::int64_t investor_id = 0;
  std::int64_t fund_id = 0;
  bool female = false;
  bool asian = false;
  bool us = true;
};

struct Cell {
  bool female = false;
  bool asian = false;
  bool ivy = false;
  bool advantage = false;

  static Cell from_index(int index) {
    return Cell{(index & 8) != 0, (index & 4) != 0, (index & 2) != 0, (index & 1) != 0};
  }
  int index() const { return (female ? 8 : 0) | (asian ? 4 : 0) | (ivy ? 2 : 0) | (advantage ? 1 : 0); }
  friend bool operator==(const Cell&, const Cell&) = default;
};

inline constexpr int kCellCount = 16;

enum class IvyVariant { pure, mixed };
inline const char* to_string(IvyVariant v) { return v == IvyVariant::pure ? "pure" : "mixed"; }

struct EmailTreatment {
  std::int64_t email_id = 0;
  std::int64_t idea_id = 0;
  std::int64_t investor_id = 0;
  std::int64_t fund_id = 0;
  Cell cell;
  IvyVariant ivy_variant = IvyVariant::pure;
  std::string sender;
  int send_day = 0;
};

struct CampaignSchedule {
  std::vector<EmailTreatment> emails;
  int min_gap_days = 14;
};

struct AssignOptions {
  int max_per_investor = 5;
  // Current email counts; investors at max_per_investor are skipped and the
  // least-loaded investor of each fund is preferred.
  const std::map<std::int64_t, int>* load = nullptr;
  IvyVariant ivy_variant = IvyVariant::pure;
  std::int64_t first_email_id = 0;
};

// Picks at most one investor per fund for the idea, then deals the 16 cells
// as a random balanced permutation (counts differ by at most one).
inline std::vector<EmailTreatment> assign_cells(Rng& rng, std::vector<Investor> investors, std::int64_t idea_id,
                                                const NameLists& names, std::set<std::string>& used_names,
                                                const AssignOptions& opts = {}) {
  std::sort(investors.begin(), investors.end(), [](const Investor& a, const Investor& b) {
    return a.fund_id != b.fund_id ? a.fund_id < b.fund_id : a.investor_id < b.investor_id;
  });
  const auto load_of = [&](std::int64_t id) {
    if (!opts.load) return 0;
    const auto it = opts.load->find(id);
    return it == opts.load->end() ? 0 : it->second;
  };

  std::vector<Investor> chosen;
  for (std::size_t i = 0; i < investors.size();) {
    std::size_t j = i;
    while (j < investors.size() && investors[j].fund_id == investors[i].fund_id) ++j;
    std::vector<const Investor*> eligible;
    int best = opts.max_per_investor;
    for (std::size_t k = i; k < j; ++k) {
      const int l = load_of(investors[k].investor_id);
      if (l >= opts.max_per_investor) continue;
      if (l < best) {
        best = l;
        eligible.clear();
      }
      if (l == best) eligible.push_back(&investors[k]);
    }
    if (!eligible.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
      chosen.push_back(*eligible[pick(rng)]);
    }
    i = j;
  }
  if (chosen.size() < static_cast<std::size_t>(kCellCount))
    fail(ErrorKind::domain, "insufficient funds for factorial balance: idea " + std::to_string(idea_id) + " reaches " +
                                std::to_string(chosen.size()) + " funds, need at least 16");

  const std::size_t n = chosen.size();
  std::vector<int> cells;
  cells.reserve(n);
  for (std::size_t r = 0; r < n / kCellCount; ++r)
    for (int c = 0; c < kCellCount; ++c) cells.push_back(c);
  std::vector<int> extra(kCellCount);
  std::iota(extra.begin(), extra.end(), 0);
  std::shuffle(extra.begin(), extra.end(), rng);
  for (std::size_t r = 0; r < n % kCellCount; ++r) cells.push_back(extra[r]);
  std::shuffle(cells.begin(), cells.end(), rng);

  // One sender identity per (idea, cell).
  std::array<std::string, kCellCount> senders;
  for (int c = 0; c < kCellCount; ++c) {
    const auto cell = Cell::from_index(c);
    senders[c] = draw_full_name(rng, names, cell.female ? Gender::female : Gender::male,
                                cell.asian ? Race::asian : Race::white, used_names);
  }

  std::vector<EmailTreatment> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    EmailTreatment e;
    e.email_id = opts.first_email_id + static_cast<std::int64_t>(k);
    e.idea_id = idea_id;
    e.investor_id = chosen[k].investor_id;
    e.fund_id = chosen[k].fund_id;
    e.cell = Cell::from_index(cells[k]);
    e.ivy_variant = opts.ivy_variant;
    e.sender = senders[cells[k]];
    out.push_back(std::move(e));
  }
  return out;
}

struct CampaignOptions {
  int n_ideas = 8;
  int max_per_investor = 5;
  double mixed_ivy_share = 0.25;  // share of ideas using a mixed Ivy subject line
};

// Assigns every idea in turn, balancing investor load toward 3-5 emails each.
inline std::vector<EmailTreatment> plan_campaign(Rng& rng, const std::vector<Investor>& investors,
                                                 const NameLists& names, const CampaignOptions& opts = {}) {
  std::map<std::int64_t, int> load;
  std::set<std::string> used;
  std::vector<EmailTreatment> all;
  std::bernoulli_distribution mixed(opts.mixed_ivy_share);
  for (int idea = 0; idea < opts.n_ideas; ++idea) {
    AssignOptions a;
    a.max_per_investor = opts.max_per_investor;
    a.load = &load;
    a.ivy_variant = mixed(rng) ? IvyVariant::mixed : IvyVariant::pure;
    a.first_email_id = static_cast<std::int64_t>(all.size());
    auto batch = assign_cells(rng, investors, idea, names, used, a);
    for (const auto& e : batch) ++load[e.investor_id];
    all.insert(all.end(), batch.begin(), batch.end());
  }
  return all;
}

// Greedy earliest-feasible send days: each investor's emails go out in idea
// order, min_gap_days apart, starting at day 0. window_days > 0 bounds the
// campaign to days [0, window_days).
inline CampaignSchedule schedule_campaign(std::vector<EmailTreatment> assignments, int min_gap_days = 14,
                                          int window_days = 0) {
  if (min_gap_days < 0) fail(ErrorKind::domain, "schedule_campaign: min_gap_days must be non-negative");
  std::map<std::int64_t, std::vector<std::size_t>> by_investor;
  for (std::size_t k = 0; k < assignments.size(); ++k) by_investor[assignments[k].investor_id].push_back(k);
  std::vector<std::int64_t> violating;
  for (auto& [investor, idx] : by_investor) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& ea = assignments[a];
      const auto& eb = assignments[b];
      return ea.idea_id != eb.idea_id ? ea.idea_id < eb.idea_id : ea.email_id < eb.email_id;
    });
    for (std::size_t r = 0; r < idx.size(); ++r) assignments[idx[r]].send_day = static_cast<int>(r) * min_gap_days;
    if (window_days > 0 && assignments[idx.back()].send_day >= window_days) violating.push_back(investor);
  }
  if (!violating.empty()) {
    std::string list;
    for (auto id : violating) list += (list.empty() ? "" : ",") + std::to_string(id);
    fail(ErrorKind::domain, "schedule infeasible within " + std::to_string(window_days) + " days for investors " + list);
  }
  std::stable_sort(assignments.begin(), assignments.end(), [](const EmailTreatment& a, const EmailTreatment& b) {
    return a.send_day != b.send_day ? a.send_day < b.send_day : a.email_id < b.email_id;
  });
  return CampaignSchedule{std::move(assignments), min_gap_days};
}

// Re-verifies schedule constraints from scratch; returns human-readable violations.
inline std::vector<std::string> check_schedule(const CampaignSchedule& schedule) {
  std::vector<std::string> problems;
  std::set<std::pair<std::int64_t, std::int64_t>> idea_fund;
  std::set<std::int64_t> email_ids;
  std::map<std::int64_t, std::vector<int>> days;
  for (const auto& e : schedule.emails) {
    if (!email_ids.insert(e.email_id).second) problems.push_back("duplicate email_id " + std::to_string(e.email_id));
    if (!idea_fund.insert({e.idea_id, e.fund_id}).second)
      problems.push_back("idea " + std::to_string(e.idea_id) + " sent twice to fund " + std::to_string(e.fund_id));
    if (e.cell.index() < 0 || e.cell.index() >= kCellCount) problems.push_back("invalid cell");
    days[e.investor_id].push_back(e.send_day);
  }
  for (auto& [investor, d] : days) {
    std::sort(d.begin(), d.end());
    for (std::size_t k = 1; k < d.size(); ++k)
      if (d[k] - d[k - 1] < schedule.min_gap_days)
        problems.push_back("investor " + std::to_string(investor) + " has sends " + std::to_string(d[k - 1]) + " and " +
                           std::to_string(d[k]) + " closer than " + std::to_string(schedule.min_gap_days) + " days");
  }
  return problems;
}

// Per-idea cell counts; balance requires max - min <= 1 within every idea.
inline std::map<std::int64_t, std::array<int, kCellCount>> cell_counts(const std::vector<EmailTreatment>& emails) {
  std::map<std::int64_t, std::array<int, kCellCount>> counts;
  for (const auto& e : emails) {
    auto [it, inserted] = counts.try_emplace(e.idea_id);
    if (inserted) it->second.fill(0);
    ++it->second[static_cast<std::size_t>(e.cell.index())];
  }
  return counts;
}

// ---------------------------------------------------------------------------
// CSV output.

inline std::vector<std::string> profile_csv_header() {
  return {"profile_id",  "investor_id",    "order_index",   "second_half",  "gender",         "race",
          "female",      "asian",          "n_founders",    "founder_names", "graduation_year", "age",
          "young",       "education_tier", "top_school",    "schools",      "serial_founder", "founding_year",
          "n_advantages", "advantages",    "positive_traction", "monthly_revenue", "growth_rate", "category",
          "employees",   "market",         "mission",       "location",     "existing_investors",
          "founder_graduation_years"};
}

inline void write_profiles_csv(std::ostream& out, const std::vector<StartupProfile>& profiles) {
  csv::Writer w(out);
  w.row(profile_csv_header());
  for (const auto& p : profiles) {
    std::string names, schools, adv, years;
    for (const auto& f : p.founders) {
      names += (names.empty() ? "" : ";") + f.name;
      schools += (schools.empty() ? "" : ";") + f.school;
      years += (years.empty() ? "" : ";") + std::to_string(f.graduation_year);
    }
    for (const auto& a : p.advantages) adv += (adv.empty() ? "" : ";") + a;
    w.row({std::to_string(p.profile_id), std::to_string(p.investor_id), std::to_string(p.order_index),
           p.second_half ? "1" : "0", to_string(p.gender), to_string(p.race), p.gender == Gender::female ? "1" : "0",
           p.race == Race::asian ? "1" : "0", std::to_string(p.n_founders()), names, std::to_string(p.graduation_year),
           std::to_string(p.age), p.young ? "1" : "0", p.top_school ? "top" : "common", p.top_school ? "1" : "0", schools,
           p.serial_founder ? "1" : "0", std::to_string(p.founding_year), std::to_string(p.n_advantages()), adv,
           p.traction.positive ? "1" : "0", csv::format_double(p.traction.monthly_revenue),
           csv::format_double(p.traction.growth_rate), p.category, p.employees, p.market, p.mission, p.location,
           p.existing_investors, years});
  }
}

inline std::vector<StartupProfile> read_profiles_csv(const csv::Table& t, int benchmark_year = 2020) {
  std::map<std::string, std::size_t> col;
  for (const auto& h : profile_csv_header()) col[h] = t.column(h);
  std::vector<StartupProfile> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    const auto get = [&](const char* name) -> const std::string& { return r[col.at(name)]; };
    StartupProfile p;
    p.profile_id = parse_int(get("profile_id"), "profile_id");
    p.investor_id = parse_int(get("investor_id"), "investor_id");
    p.order_index = static_cast<int>(parse_int(get("order_index"), "order_index"));
    p.second_half = get("second_half") == "1";
    p.gender = get("female") == "1" ? Gender::female : Gender::male;
    p.race = get("asian") == "1" ? Race::asian : Race::white;
    p.young = get("young") == "1";
    p.top_school = get("top_school") == "1";
    const auto names = split(get("founder_names"), ';');
    const auto schools = split(get("schools"), ';');
    const auto years = split(get("founder_graduation_years"), ';');
    if (names.size() != schools.size() || names.size() != years.size())
      fail(ErrorKind::data, "profiles.csv: founder lists disagree for profile " + get("profile_id"));
    for (std::size_t f = 0; f < names.size(); ++f) {
      Founder founder;
      founder.name = names[f];
      founder.school = schools[f];
      founder.graduation_year = static_cast<int>(parse_int(years[f], "graduation year"));
      founder.age = approx_age(founder.graduation_year, benchmark_year);
      p.founders.push_back(std::move(founder));
    }
    p.graduation_year = static_cast<int>(parse_int(get("graduation_year"), "graduation_year"));
    p.age = static_cast<int>(parse_int(get("age"), "age"));
    p.serial_founder = get("serial_founder") == "1";
    p.founding_year = static_cast<int>(parse_int(get("founding_year"), "founding_year"));
    if (!get("advantages").empty()) p.advantages = split(get("advantages"), ';');
    p.traction.positive = get("positive_traction") == "1";
    p.traction.monthly_revenue = parse_double(get("monthly_revenue"), "monthly_revenue");
    p.traction.growth_rate = parse_double(get("growth_rate"), "growth_rate");
    p.category = get("category");
    p.employees = get("employees");
    p.market = get("market");
    p.mission = get("mission");
    p.location = get("location");
    p.existing_investors = get("existing_investors");
    out.push_back(std::move(p));
  }
  return out;
}

inline void write_schedule_csv(std::ostream& out, const CampaignSchedule& schedule) {
  csv::Writer w(out);
  w.row({"email_id", "investor_id", "fund_id", "idea", "female", "asian", "ivy", "advantage", "send_day", "ivy_variant",
         "sender"});
  for (const auto& e : schedule.emails)
    w.row({std::to_string(e.email_id), std::to_string(e.investor_id), std::to_string(e.fund_id),
           std::to_string(e.idea_id), e.cell.female ? "1" : "0", e.cell.asian ? "1" : "0", e.cell.ivy ? "1" : "0",
           e.cell.advantage ? "1" : "0", std::to_string(e.send_day), to_string(e.ivy_variant), e.sender});
}

inline CampaignSchedule read_schedule_csv(const csv::Table& t, int min_gap_days = 14) {
  const auto c_id = t.column("email_id"), c_inv = t.column("investor_id"), c_fund = t.column("fund_id");
  const auto c_idea = t.column("idea"), c_f = t.column("female"), c_a = t.column("asian"), c_i = t.column("ivy");
  const auto c_adv = t.column("advantage"), c_day = t.column("send_day");
  const bool has_variant = t.has_column("ivy_variant"), has_sender = t.has_column("sender");
  CampaignSchedule s;
  s.min_gap_days = min_gap_days;
  for (const auto& r : t.rows) {
    EmailTreatment e;
    e.email_id = parse_int(r[c_id], "email_id");
    e.investor_id = parse_int(r[c_inv], "investor_id");
    e.fund_id = parse_int(r[c_fund], "fund_id");
    e.idea_id = parse_int(r[c_idea], "idea");
    e.cell = Cell{r[c_f] == "1", r[c_a] == "1", r[c_i] == "1", r[c_adv] == "1"};
    e.send_day = static_cast<int>(parse_int(r[c_day], "send_day"));
    if (has_variant) e.ivy_variant = r[t.column("ivy_variant")] == "mixed" ? IvyVariant::mixed : IvyVariant::pure;
    if (has_sender) e.sender = r[t.column("sender")];
    s.emails.push_back(std::move(e));
  }
  return s;
}

inline void write_investors_csv(std::ostream& out, const std::vector<Investor>& investors) {
  csv::Writer w(out);
  w.row({"investor_id", "fund_id", "female", "asian", "us"});
  for (const auto& i : investors)
    w.row({std::to_string(i.investor_id), std::to_string(i.fund_id), i.female ? "1" : "0", i.asian ? "1" : "0",
           i.us ? "1" : "0"});
}

inline std::vector<Investor> read_investors_csv(const csv::Table& t) {
  const auto c_id = t.column("investor_id"), c_fund = t.column("fund_id"), c_f = t.column("female");
  const auto c_a = t.column("asian"), c_us = t.column("us");
  std::vector<Investor> out;
  for (const auto& r : t.rows)
    out.push_back(Investor{parse_int(r[c_id], "investor_id"), parse_int(r[c_fund], "fund_id"), r[c_f] == "1",
                           r[c_a] == "1", r[c_us] == "1"});
  return out;
}

// Synthetic investor roster: `investors_per_fund` investors share each fund.
inline std::vector<Investor> generate_investors(Rng& rng, int n_investors, int investors_per_fund = 1,
                                                double female_share = 0.2, double asian_share = 0.2,
                                                double us_share = 0.7) {
  if (n_investors <= 0 || investors_per_fund <= 0) fail(ErrorKind::domain, "generate_investors: counts must be positive");
  std::bernoulli_distribution fem(female_share), asi(asian_share), us(us_share);
  std::vector<Investor> out;
  out.reserve(static_cast<std::size_t>(n_investors));
  for (int i = 0; i < n_investors; ++i) {
    Investor inv;
    inv.investor_id = i;
    inv.fund_id = i / investors_per_fund;
    inv.female = fem(rng);
    inv.asian = asi(rng);
    inv.us = us(rng);
    out.push_back(inv);
  }
  return out;
}

}  // namespace auditlab
