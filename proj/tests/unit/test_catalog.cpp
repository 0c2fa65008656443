#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "auditlab/auditlab.hpp"

using namespace auditlab;

namespace {

NameEntry first(const std::string& text, std::uint64_t f, std::uint64_t m) {
  NameEntry e;
  e.text = text;
  e.kind = NameKind::first;
  e.count_female = f;
  e.count_male = m;
  return e;
}

NamePool pool_of(std::vector<NameEntry> entries, NameFilterOrder order = NameFilterOrder::filter_only) {
  NamePool p;
  p.entries = std::move(entries);
  p.total_female_births = 1'000'000;
  p.total_male_births = 1'000'000;
  p.order = order;
  return p;
}

}  // namespace

TEST(GenderIndex, Examples) {
  EXPECT_DOUBLE_EQ(gender_index(100, 0, 1'000'000, 1'000'000), 100.0);
  EXPECT_DOUBLE_EQ(gender_index(500, 500, 1'000'000, 1'000'000), 50.0);
  EXPECT_DOUBLE_EQ(gender_index(990, 10, 1'000'000, 1'000'000), 99.0);
}

TEST(GenderIndex, Complementarity) {
  for (auto [f, m, tf, tm] : {std::tuple{7ULL, 3ULL, 100ULL, 300ULL}, {1ULL, 999ULL, 5ULL, 7ULL}, {12ULL, 12ULL, 9ULL, 4ULL}})
    EXPECT_DOUBLE_EQ(gender_index(f, m, tf, tm) + gender_index(m, f, tm, tf), 100.0);
}

TEST(GenderIndex, UnobservedNameIsDomainError) {
  try {
    gender_index(0, 0, 10, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
    EXPECT_NE(std::string(e.what()).find("name unobserved"), std::string::npos);
  }
}

TEST(RaceIndex, Examples) {
  EXPECT_DOUBLE_EQ(race_index(50, 0, 100'000, 1'000'000), 100.0);
  EXPECT_DOUBLE_EQ(race_index(85, 15, 1'000'000, 1'000'000), 85.0);
  EXPECT_DOUBLE_EQ(race_index(0, 40, 100'000, 1'000'000), 0.0);
}

TEST(FilterFirstNames, FrequencyRuleExamples) {
  // Both names sit in both top lists, so the frequency-difference rule applies.
  const auto split = filter_first_names(pool_of({first("Alice", 1'000'000, 50'000), first("Robin", 300'000, 250'000)}));
  EXPECT_EQ(split.female, std::vector<std::string>{"Alice"});
  EXPECT_TRUE(split.male.empty());
  EXPECT_EQ(split.rejected, std::vector<std::string>{"Robin"});
}

TEST(FilterFirstNames, SingleMaleName) {
  const auto split = filter_first_names(pool_of({first("Bob", 0, 5'000)}, NameFilterOrder::filter_then_cutoff));
  EXPECT_TRUE(split.female.empty());
  EXPECT_EQ(split.male, std::vector<std::string>{"Bob"});
  EXPECT_TRUE(split.rejected.empty());
}

TEST(FilterFirstNames, EmptyPoolFails) { EXPECT_THROW(filter_first_names(NamePool{}), Error); }

TEST(FilterFirstNames, DefaultOrderAlsoAppliesCutoffs) {
  // FNI of (1,000,000, 50,000) is 95.2, short of the 99 cutoff.
  const auto split = filter_first_names(pool_of({first("Alice", 1'000'000, 50'000), first("Zoe", 990'000, 10)},
                                                NameFilterOrder::filter_then_cutoff));
  EXPECT_EQ(split.female, std::vector<std::string>{"Zoe"});
  EXPECT_EQ(split.rejected, std::vector<std::string>{"Alice"});
}

TEST(FilterFirstNames, OutputsDisjointAndRejectionsJustified) {
  Rng rng(11);
  std::uniform_int_distribution<std::uint64_t> count(0, 2'000'000);
  std::vector<NameEntry> entries;
  for (int i = 0; i < 300; ++i) {
    auto e = first("n" + std::to_string(i), count(rng), count(rng));
    if (e.count_female + e.count_male == 0) e.count_female = 1;
    entries.push_back(e);
  }
  auto pool = pool_of(entries);
  pool.top_list_size = 200;
  pool.pool_size = 1000;
  const auto split = filter_first_names(pool);
  std::set<std::string> f(split.female.begin(), split.female.end()), m(split.male.begin(), split.male.end()),
      r(split.rejected.begin(), split.rejected.end());
  for (const auto& n : f) EXPECT_FALSE(m.count(n) || r.count(n));
  for (const auto& n : m) EXPECT_FALSE(r.count(n));
  EXPECT_EQ(f.size() + m.size() + r.size(), entries.size());

  // Re-check every rejection against the rule from scratch.
  std::vector<const NameEntry*> ptrs;
  for (const auto& e : pool.entries) ptrs.push_back(&e);
  const auto top_f = detail::top_names(ptrs, true, pool.top_list_size);
  const auto top_m = detail::top_names(ptrs, false, pool.top_list_size);
  for (const auto& e : pool.entries) {
    if (!r.count(e.text)) continue;
    EXPECT_TRUE(is_ambiguous(e, top_f.count(e.text) != 0, top_m.count(e.text) != 0, pool.ambiguity_count_threshold) ||
                e.count_female == e.count_male)
        << e.text;
  }
}

TEST(FilterFirstNames, PoolSizeTruncatesByFrequency) {
  std::vector<NameEntry> entries;
  for (int i = 1; i <= 5; ++i) entries.push_back(first("f" + std::to_string(i), static_cast<std::uint64_t>(i) * 1000, 0));
  auto pool = pool_of(entries);
  pool.pool_size = 2;
  EXPECT_EQ(filter_first_names(pool).female, (std::vector<std::string>{"f5", "f4"}));
}

TEST(DrawFullName, ForcedSingleCombination) {
  NameLists lists{{"Ann"}, {"Bob"}, {"Chen"}, {"Smith"}};
  std::set<std::string> used;
  Rng rng(1);
  EXPECT_EQ(draw_full_name(rng, lists, Gender::female, Race::asian, used), "Ann Chen");
  EXPECT_EQ(used.count("Ann Chen"), 1u);
}

TEST(DrawFullName, WithoutReplacementUntilExhausted) {
  NameLists lists{{"Ann", "Amy", "Ava"}, {"Bob"}, {"Chen", "Wang"}, {"Smith"}};
  std::set<std::string> used;
  Rng rng(5);
  std::set<std::string> seen;
  for (int i = 0; i < 6; ++i) EXPECT_TRUE(seen.insert(draw_full_name(rng, lists, Gender::female, Race::asian, used)).second);
  try {
    draw_full_name(rng, lists, Gender::female, Race::asian, used);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("name pool exhausted"), std::string::npos);
  }
}

TEST(DrawFullName, DeterministicUnderSeed) {
  const auto cat = ComponentCatalog::defaults();
  std::set<std::string> u1, u2;
  Rng a(99), b(99);
  EXPECT_EQ(draw_full_name(a, cat.names, Gender::male, Race::white, u1),
            draw_full_name(b, cat.names, Gender::male, Race::white, u2));
}

TEST(DrawFullName, UniformOverUnusedPairs) {
  NameLists lists{{"A", "B"}, {"M"}, {"X", "Y"}, {"W"}};
  std::map<std::string, int> hits;
  Rng rng(3);
  for (int rep = 0; rep < 8000; ++rep) {
    std::set<std::string> used = {"A X"};
    ++hits[draw_full_name(rng, lists, Gender::female, Race::asian, used)];
  }
  ASSERT_EQ(hits.size(), 3u);
  for (const auto& [name, n] : hits) EXPECT_NEAR(n / 8000.0, 1.0 / 3.0, 0.03) << name;
}

TEST(ReadNameCsv, ParsesHeaderFormat) {
  const auto t = csv::read_text(
      "name,kind,count_female,count_male,count_asian,count_white,count_other\n"
      "Mary,first,900,3,,,\nLee,last,,,70,20,10\n");
  const auto entries = read_name_csv(t);
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].count_female, 900u);
  EXPECT_EQ(entries[1].kind, NameKind::last);
  EXPECT_EQ(entries[1].race_count("asian"), 70u);
  NamePool pool;
  pool.entries = entries;
  EXPECT_EQ(select_last_names(pool, Race::asian, 10), std::vector<std::string>{});
  pool.race_share_cutoff = 0.6;
  EXPECT_EQ(select_last_names(pool, Race::asian, 10), std::vector<std::string>{"Lee"});
}

TEST(ReadNameCsv, RejectsAllZeroCounts) {
  EXPECT_THROW(read_name_csv(csv::read_text("name,kind,count_female,count_male,count_asian,count_white,count_other\n"
                                            "Nobody,first,0,0,0,0,0\n")),
               Error);
}

TEST(Catalog, DefaultsValidateAndWeightsSumToOne) {
  const auto cat = ComponentCatalog::defaults();
  for (const auto& [name, c] : cat.categoricals()) {
    double s = 0;
    for (double w : c->weights) s += w;
    EXPECT_NEAR(s, 1.0, 1e-12) << name;
  }
  EXPECT_EQ(cat.graduation_old.lo, 1980);
  EXPECT_EQ(cat.graduation_young.hi, 2019);
  EXPECT_DOUBLE_EQ(cat.monthly_revenue.lo, 5000.0);
  EXPECT_DOUBLE_EQ(cat.growth_rate.hi, 0.60);
}

TEST(Catalog, EmbeddedCopyMatchesDataFile) {
  std::ifstream in(std::string(AUDITLAB_DATA_DIR) + "/catalog.conf", std::ios::binary);
  ASSERT_TRUE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), std::string(kDefaultCatalogText));
}

TEST(Catalog, BadWeightsRejected) {
  auto cfg = ComponentCatalog::default_config();
  cfg.set("founders", "single:0.7,two:0.7");
  try {
    ComponentCatalog::from_config(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
  cfg = ComponentCatalog::default_config();
  cfg.set("monthly_revenue", "5000..5000");
  EXPECT_THROW(ComponentCatalog::from_config(cfg), Error);
}
