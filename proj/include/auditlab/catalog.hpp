#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "auditlab/default_catalog.hpp"
#include "auditlab/error.hpp"
#include "auditlab/kvconfig.hpp"
#include "auditlab/names.hpp"
#include "auditlab/rng.hpp"

namespace auditlab {

struct Categorical {
  std::vector<std::string> levels;
  std::vector<double> weights;

  std::size_t draw(Rng& rng) const {
    std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
    return dist(rng);
  }
  std::size_t index_of(const std::string& level) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (levels[i] == level) return i;
    fail(ErrorKind::config, "unknown level '" + level + "'");
  }
};

template <class T>
struct Range {
  T lo{};
  T hi{};
};

// Randomization spec for every startup profile component.
struct ComponentCatalog {
  int benchmark_year = 2020;
  Categorical team;  // white_female, asian_female, white_male, asian_male
  Categorical founders;
  Categorical age_group;
  Range<int> graduation_young;
  Range<int> graduation_old;
  Categorical education;
  Categorical serial_founder;
  Categorical founding_year;
  Categorical n_advantages;
  Categorical traction;
  Range<double> monthly_revenue;
  Range<double> growth_rate;
  Categorical category;
  Categorical employees;
  Categorical market;
  Categorical mission;
  Categorical location;
  Categorical existing_investors;
  std::vector<std::string> top_schools;
  std::vector<std::string> common_schools;
  std::vector<std::string> advantages;
  NameLists names;

  // (component name, distribution) for every categorical component.
  std::vector<std::pair<std::string, const Categorical*>> categoricals() const {
    return {{"team", &team},
            {"founders", &founders},
            {"age_group", &age_group},
            {"education", &education},
            {"serial_founder", &serial_founder},
            {"founding_year", &founding_year},
            {"n_advantages", &n_advantages},
            {"traction", &traction},
            {"category", &category},
            {"employees", &employees},
            {"market", &market},
            {"mission", &mission},
            {"location", &location},
            {"existing_investors", &existing_investors}};
  }

  void validate() const {
    for (const auto& [name, cat] : categoricals()) {
      if (cat->levels.empty()) fail(ErrorKind::config, "catalog: component '" + name + "' has no levels");
      double sum = 0.0;
      for (double w : cat->weights) {
        if (!(w >= 0.0)) fail(ErrorKind::config, "catalog: negative weight in '" + name + "'");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        fail(ErrorKind::config, "catalog: weights of '" + name + "' sum to " + std::to_string(sum) + ", expected 1");
    }
    const auto check_range = [](const auto& r, const char* name) {
      if (!(r.lo < r.hi)) fail(ErrorKind::config, std::string("catalog: degenerate range '") + name + "'");
    };
    check_range(graduation_young, "graduation_year.young");
    check_range(graduation_old, "graduation_year.old");
    check_range(monthly_revenue, "monthly_revenue");
    check_range(growth_rate, "growth_rate");
    if (graduation_young.hi > benchmark_year || graduation_old.hi > benchmark_year)
      fail(ErrorKind::config, "catalog: graduation years after benchmark_year");
    if (top_schools.empty() || common_schools.empty()) fail(ErrorKind::config, "catalog: empty school list");
    int max_adv = 0;
    for (const auto& level : n_advantages.levels) max_adv = std::max<int>(max_adv, static_cast<int>(parse_int(level, "n_advantages")));
    if (static_cast<std::size_t>(max_adv) > advantages.size())
      fail(ErrorKind::config, "catalog: fewer advantages listed than n_advantages requires");
    if (names.female_first.empty() || names.male_first.empty() || names.asian_last.empty() || names.white_last.empty())
      fail(ErrorKind::config, "catalog: every name list must be non-empty");
    for (const auto& level : team.levels)
      if (level != "white_female" && level != "asian_female" && level != "white_male" && level != "asian_male")
        fail(ErrorKind::config, "catalog: unknown team level '" + level + "'");
  }

  static Categorical parse_categorical(const KvConfig& cfg, const std::string& key) {
    Categorical cat;
    for (const auto& item : split(cfg.raw(key), ',')) {
      const auto colon = item.rfind(':');
      if (colon == std::string::npos) fail(ErrorKind::config, key + ": expected level:weight, got '" + item + "'");
      cat.levels.emplace_back(trim(std::string_view(item).substr(0, colon)));
      cat.weights.push_back(parse_double(std::string_view(item).substr(colon + 1), key));
    }
    return cat;
  }

  template <class T>
  static Range<T> parse_range(const KvConfig& cfg, const std::string& key) {
    const auto& text = cfg.raw(key);
    const auto dots = text.find("..");
    if (dots == std::string::npos) fail(ErrorKind::config, key + ": expected lo..hi");
    Range<T> r;
    if constexpr (std::is_integral_v<T>) {
      r.lo = static_cast<T>(parse_int(std::string_view(text).substr(0, dots), key));
      r.hi = static_cast<T>(parse_int(std::string_view(text).substr(dots + 2), key));
    } else {
      r.lo = parse_double(std::string_view(text).substr(0, dots), key);
      r.hi = parse_double(std::string_view(text).substr(dots + 2), key);
    }
    return r;
  }

  // Every key is required; merge user overrides onto the defaults first.
  static ComponentCatalog from_config(const KvConfig& cfg) {
    ComponentCatalog c;
    if (cfg.has("catalog.version") && cfg.get_int("catalog.version", 1) != 1)
      fail(ErrorKind::config, "catalog: unsupported catalog.version");
    c.benchmark_year = static_cast<int>(cfg.get_int("benchmark_year", 2020));
    c.team = parse_categorical(cfg, "team");
    c.founders = parse_categorical(cfg, "founders");
    c.age_group = parse_categorical(cfg, "age_group");
    c.graduation_young = parse_range<int>(cfg, "graduation_year.young");
    c.graduation_old = parse_range<int>(cfg, "graduation_year.old");
    c.education = parse_categorical(cfg, "education");
    c.serial_founder = parse_categorical(cfg, "serial_founder");
    c.founding_year = parse_categorical(cfg, "founding_year");
    c.n_advantages = parse_categorical(cfg, "n_advantages");
    c.traction = parse_categorical(cfg, "traction");
    c.monthly_revenue = parse_range<double>(cfg, "monthly_revenue");
    c.growth_rate = parse_range<double>(cfg, "growth_rate");
    c.category = parse_categorical(cfg, "category");
    c.employees = parse_categorical(cfg, "employees");
    c.market = parse_categorical(cfg, "market");
    c.mission = parse_categorical(cfg, "mission");
    c.location = parse_categorical(cfg, "location");
    c.existing_investors = parse_categorical(cfg, "existing_investors");
    c.top_schools = cfg.get_list("schools.top");
    c.common_schools = cfg.get_list("schools.common");
    c.advantages = cfg.get_list("advantages");
    c.names.female_first = cfg.get_list("names.first.female");
    c.names.male_first = cfg.get_list("names.first.male");
    c.names.asian_last = cfg.get_list("names.last.asian");
    c.names.white_last = cfg.get_list("names.last.white");
    c.validate();
    return c;
  }

  static KvConfig default_config() { return KvConfig::parse(kDefaultCatalogText, "<default catalog>"); }

  static ComponentCatalog defaults() { return from_config(default_config()); }

  // Loads a catalog file; keys it omits keep their default values.
  static ComponentCatalog load(const std::string& path) {
    auto cfg = default_config();
    cfg.merge(KvConfig::load(path));
    return from_config(cfg);
  }
};

}  // namespace auditlab
