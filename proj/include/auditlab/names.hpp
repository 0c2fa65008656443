#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "auditlab/csv.hpp"
#include "auditlab/error.hpp"
#include "auditlab/kvconfig.hpp"
#include "auditlab/rng.hpp"

namespace auditlab {

enum class Gender { female, male };
enum class Race { asian, white };
enum class NameKind { first, last };

inline const char* to_string(Gender g) { return g == Gender::female ? "F" : "M"; }
inline const char* to_string(Race r) { return r == Race::asian ? "Asian" : "White"; }

struct NameEntry {
  std::string text;
  NameKind kind = NameKind::first;
  std::uint64_t count_female = 0;
  std::uint64_t count_male = 0;
  std::map<std::string, std::uint64_t> count_by_race;  // "asian", "white", "other"

  std::uint64_t total_count() const {
    if (kind == NameKind::first) return count_female + count_male;
    std::uint64_t total = 0;
    for (const auto& [race, n] : count_by_race) total += n;
    return total;
  }
  std::uint64_t race_count(const std::string& race) const {
    const auto it = count_by_race.find(race);
    return it == count_by_race.end() ? 0 : it->second;
  }
};

// Order in which the frequency-difference filter and the FNI cutoffs run.
enum class NameFilterOrder { filter_then_cutoff, cutoff_then_filter, filter_only, cutoff_only };

struct NamePool {
  std::vector<NameEntry> entries;
  double gender_cutoff_high = 99.0;
  double gender_cutoff_low = 3.0;
  double race_share_cutoff = 0.85;
  std::uint64_t ambiguity_count_threshold = 200'000;
  std::size_t top_list_size = 1'000;
  std::size_t pool_size = 100;
  // Birth totals behind Pr(name | gender); supplied with each input file.
  std::uint64_t total_female_births = 0;
  std::uint64_t total_male_births = 0;
  NameFilterOrder order = NameFilterOrder::filter_then_cutoff;

  void validate() const {
    if (!(gender_cutoff_low < gender_cutoff_high))
      fail(ErrorKind::config, "name pool: gender_cutoff_low must be below gender_cutoff_high");
    if (gender_cutoff_low < 0 || gender_cutoff_high > 100)
      fail(ErrorKind::config, "name pool: gender cutoffs must lie in [0,100]");
    if (race_share_cutoff < 0 || race_share_cutoff > 1)
      fail(ErrorKind::config, "name pool: race_share_cutoff must lie in [0,1]");
    for (const auto& e : entries)
      if (e.total_count() == 0) fail(ErrorKind::data, "name '" + e.text + "' has no positive count");
  }
};

// 100 * p_a / (p_a + p_b) with p_g = count_g / total_g.
inline double name_index(std::uint64_t count_a, std::uint64_t count_b, std::uint64_t total_a, std::uint64_t total_b) {
  if (total_a == 0 || total_b == 0) fail(ErrorKind::domain, "name index: totals must be positive");
  if (count_a == 0 && count_b == 0) fail(ErrorKind::domain, "name unobserved");
  const double pa = static_cast<double>(count_a) / static_cast<double>(total_a);
  const double pb = static_cast<double>(count_b) / static_cast<double>(total_b);
  return 100.0 * pa / (pa + pb);
}

/// Female name index (FNI) in [0, 100].
inline double gender_index(std::uint64_t count_female, std::uint64_t count_male, std::uint64_t total_female_births,
                           std::uint64_t total_male_births) {
  return name_index(count_female, count_male, total_female_births, total_male_births);
}

/// Two-way race index (target race vs. everyone else), e.g. WNI or ANI.
inline double race_index(std::uint64_t count_race, std::uint64_t count_other, std::uint64_t total_race,
                         std::uint64_t total_other) {
  return name_index(count_race, count_other, total_race, total_other);
}

struct FirstNameSplit {
  std::vector<std::string> female;
  std::vector<std::string> male;
  std::vector<std::string> rejected;
};

namespace detail {

inline std::set<std::string> top_names(const std::vector<const NameEntry*>& names, bool female, std::size_t limit) {
  std::vector<const NameEntry*> ranked;
  for (const auto* e : names)
    if ((female ? e->count_female : e->count_male) > 0) ranked.push_back(e);
  std::stable_sort(ranked.begin(), ranked.end(), [female](const NameEntry* a, const NameEntry* b) {
    const auto ca = female ? a->count_female : a->count_male;
    const auto cb = female ? b->count_female : b->count_male;
    return ca != cb ? ca > cb : a->text < b->text;
  });
  if (ranked.size() > limit) ranked.resize(limit);
  std::set<std::string> out;
  for (const auto* e : ranked) out.insert(e->text);
  return out;
}

inline std::uint64_t abs_diff(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : b - a; }

}  // namespace detail

/// True when a name sits in both top lists with a frequency gap below the threshold.
inline bool is_ambiguous(const NameEntry& e, bool in_female_top, bool in_male_top, std::uint64_t threshold) {
  return in_female_top && in_male_top && detail::abs_diff(e.count_female, e.count_male) < threshold;
}

// Splits first names into female / male pools. The frequency-difference rule
// drops names that are common for both genders; the optional FNI cutoffs keep
// only names with FNI > high (female) or FNI < low (male). Accepted names are
// ranked by frequency and truncated to pool.pool_size per gender.
inline FirstNameSplit filter_first_names(const NamePool& pool) {
  std::vector<const NameEntry*> candidates;
  for (const auto& e : pool.entries)
    if (e.kind == NameKind::first) candidates.push_back(&e);
  if (candidates.empty()) fail(ErrorKind::domain, "filter_first_names: empty name pool");
  pool.validate();

  FirstNameSplit split;
  std::set<std::string> rejected;

  const auto apply_frequency_rule = [&](std::vector<const NameEntry*>& names) {
    const auto top_f = detail::top_names(names, true, pool.top_list_size);
    const auto top_m = detail::top_names(names, false, pool.top_list_size);
    std::vector<const NameEntry*> kept;
    for (const auto* e : names) {
      if (is_ambiguous(*e, top_f.count(e->text) != 0, top_m.count(e->text) != 0, pool.ambiguity_count_threshold) ||
          e->count_female == e->count_male) {
        rejected.insert(e->text);
      } else {
        kept.push_back(e);
      }
    }
    names = std::move(kept);
  };
  const auto apply_cutoffs = [&](std::vector<const NameEntry*>& names) {
    std::vector<const NameEntry*> kept;
    for (const auto* e : names) {
      const double fni = gender_index(e->count_female, e->count_male, pool.total_female_births, pool.total_male_births);
      if (fni > pool.gender_cutoff_high || fni < pool.gender_cutoff_low)
        kept.push_back(e);
      else
        rejected.insert(e->text);
    }
    names = std::move(kept);
  };

  switch (pool.order) {
    case NameFilterOrder::filter_then_cutoff:
      apply_frequency_rule(candidates);
      apply_cutoffs(candidates);
      break;
    case NameFilterOrder::cutoff_then_filter:
      apply_cutoffs(candidates);
      apply_frequency_rule(candidates);
      break;
    case NameFilterOrder::filter_only:
      apply_frequency_rule(candidates);
      break;
    case NameFilterOrder::cutoff_only:
      apply_cutoffs(candidates);
      break;
  }

  std::vector<const NameEntry*> female, male;
  for (const auto* e : candidates) (e->count_female > e->count_male ? female : male).push_back(e);
  const auto rank = [](std::vector<const NameEntry*>& v, bool by_female, std::size_t limit) {
    std::stable_sort(v.begin(), v.end(), [by_female](const NameEntry* a, const NameEntry* b) {
      const auto ca = by_female ? a->count_female : a->count_male;
      const auto cb = by_female ? b->count_female : b->count_male;
      return ca != cb ? ca > cb : a->text < b->text;
    });
    if (v.size() > limit) v.resize(limit);
  };
  rank(female, true, pool.pool_size);
  rank(male, false, pool.pool_size);
  for (const auto* e : female) split.female.push_back(e->text);
  for (const auto* e : male) split.male.push_back(e->text);
  split.rejected.assign(rejected.begin(), rejected.end());
  return split;
}

// Surnames whose share for `race` exceeds race_share_cutoff, most common first.
inline std::vector<std::string> select_last_names(const NamePool& pool, Race race, std::size_t limit) {
  const std::string key = race == Race::asian ? "asian" : "white";
  std::vector<const NameEntry*> picked;
  for (const auto& e : pool.entries) {
    if (e.kind != NameKind::last || e.total_count() == 0) continue;
    const double share = static_cast<double>(e.race_count(key)) / static_cast<double>(e.total_count());
    if (share > pool.race_share_cutoff) picked.push_back(&e);
  }
  std::stable_sort(picked.begin(), picked.end(), [](const NameEntry* a, const NameEntry* b) {
    return a->total_count() != b->total_count() ? a->total_count() > b->total_count() : a->text < b->text;
  });
  if (picked.size() > limit) picked.resize(limit);
  std::vector<std::string> out;
  for (const auto* e : picked) out.push_back(e->text);
  return out;
}

// Reads `name,kind,count_female,count_male,count_asian,count_white,count_other`.
inline std::vector<NameEntry> read_name_csv(const csv::Table& table) {
  const auto c_name = table.column("name"), c_kind = table.column("kind");
  const auto c_f = table.column("count_female"), c_m = table.column("count_male");
  const auto c_a = table.column("count_asian"), c_w = table.column("count_white"), c_o = table.column("count_other");
  std::vector<NameEntry> out;
  for (const auto& row : table.rows) {
    NameEntry e;
    e.text = row[c_name];
    if (row[c_kind] == "first")
      e.kind = NameKind::first;
    else if (row[c_kind] == "last")
      e.kind = NameKind::last;
    else
      fail(ErrorKind::data, "name '" + e.text + "': kind must be 'first' or 'last'");
    const auto count = [&](std::size_t col) -> std::uint64_t {
      if (row[col].empty()) return 0;
      const auto v = parse_int(row[col], "name count");
      if (v < 0) fail(ErrorKind::data, "name '" + e.text + "': negative count");
      return static_cast<std::uint64_t>(v);
    };
    e.count_female = count(c_f);
    e.count_male = count(c_m);
    e.count_by_race["asian"] = count(c_a);
    e.count_by_race["white"] = count(c_w);
    e.count_by_race["other"] = count(c_o);
    if (e.total_count() == 0) fail(ErrorKind::data, "name '" + e.text + "' has no positive count");
    out.push_back(std::move(e));
  }
  return out;
}

// First-name pools per gender and surname pools per race.
struct NameLists {
  std::vector<std::string> female_first;
  std::vector<std::string> male_first;
  std::vector<std::string> asian_last;
  std::vector<std::string> white_last;

  const std::vector<std::string>& first(Gender g) const { return g == Gender::female ? female_first : male_first; }
  const std::vector<std::string>& last(Race r) const { return r == Race::asian ? asian_last : white_last; }
};

/// Draws an unused first/last combination for the cell uniformly, without replacement.
inline std::string draw_full_name(Rng& rng, const NameLists& lists, Gender gender, Race race,
                                  std::set<std::string>& used) {
  const auto& firsts = lists.first(gender);
  const auto& lasts = lists.last(race);
  // Rejection sampling is uniform over unused pairs; enumerate only when it keeps missing.
  if (!firsts.empty() && !lasts.empty()) {
    std::uniform_int_distribution<std::size_t> pf(0, firsts.size() - 1), pl(0, lasts.size() - 1);
    for (int attempt = 0; attempt < 64; ++attempt) {
      auto full = firsts[pf(rng)] + " " + lasts[pl(rng)];
      if (used.insert(full).second) return full;
    }
  }
  std::vector<std::string> available;
  for (const auto& f : firsts)
    for (const auto& l : lasts) {
      auto full = f + " " + l;
      if (!used.count(full)) available.push_back(std::move(full));
    }
  if (available.empty())
    fail(ErrorKind::domain, std::string("name pool exhausted for ") + to_string(gender) + "/" + to_string(race));
  std::uniform_int_distribution<std::size_t> pick(0, available.size() - 1);
  auto chosen = available[pick(rng)];
  used.insert(chosen);
  return chosen;
}

}  // namespace auditlab
