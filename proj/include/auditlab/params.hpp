#pragma once

#include <array>
#include <string>
#include <vector>

#include "auditlab/default_params.hpp"
#include "auditlab/demos.hpp"
#include "auditlab/design.hpp"
#include "auditlab/error.hpp"
#include "auditlab/events.hpp"
#include "auditlab/kvconfig.hpp"
#include "auditlab/records.hpp"
#include "auditlab/simulate.hpp"

namespace auditlab {

inline KvConfig default_params() { return KvConfig::parse(kDefaultParamsText, "<default parameters>"); }

// Keys that may appear in a user config without a default entry.
inline bool is_open_key(const std::string& key) {
  static const char* prefixes[] = {"panel.", "eval.slopes.", "eval.second_half_interaction."};
  for (const char* p : prefixes)
    if (key.starts_with(p)) return true;
  return key == "callback.upper_threshold";
}

/// Rejects keys that are neither defaults nor open-ended families, so that a
/// misspelled override does not silently fall back to the default.
inline void check_known_keys(const KvConfig& user, const KvConfig& defaults, const std::string& origin) {
  for (const auto& [key, value] : user.values())
    if (!defaults.has(key) && !is_open_key(key)) fail(ErrorKind::config, origin + ": unknown key '" + key + "'");
}

inline std::array<double, kQuestions> per_question(const KvConfig& cfg, const std::string& key) {
  const auto items = cfg.get_list(key);
  if (items.size() != static_cast<std::size_t>(kQuestions))
    fail(ErrorKind::config, key + ": expected " + std::to_string(kQuestions) + " '|'-separated values");
  std::array<double, kQuestions> out{};
  for (int k = 0; k < kQuestions; ++k) out[k] = parse_double(items[k], key);
  return out;
}

inline std::vector<int> int_list(const KvConfig& cfg, const std::string& key) {
  std::vector<int> out;
  for (const auto& s : cfg.get_list(key)) out.push_back(static_cast<int>(parse_int(s, key)));
  return out;
}

struct DesignParams {
  int n_investors = 200;
  int n_profiles = 16;
  int campaign_investors = 2000;
  int investors_per_fund = 2;
  double investor_female_share = 0.2, investor_asian_share = 0.2, investor_us_share = 0.7;
  CampaignOptions campaign;
  int min_gap_days = 14;
  int window_days = 0;
};

inline DesignParams design_params(const KvConfig& cfg) {
  DesignParams d;
  d.n_investors = static_cast<int>(cfg.get_int("design.n_investors", d.n_investors));
  d.n_profiles = static_cast<int>(cfg.get_int("design.n_profiles", d.n_profiles));
  d.campaign_investors = static_cast<int>(cfg.get_int("design.campaign_investors", d.campaign_investors));
  d.investors_per_fund = static_cast<int>(cfg.get_int("design.investors_per_fund", d.investors_per_fund));
  d.investor_female_share = cfg.get_double("design.investor_female_share", d.investor_female_share);
  d.investor_asian_share = cfg.get_double("design.investor_asian_share", d.investor_asian_share);
  d.investor_us_share = cfg.get_double("design.investor_us_share", d.investor_us_share);
  d.campaign.n_ideas = static_cast<int>(cfg.get_int("design.n_ideas", d.campaign.n_ideas));
  d.campaign.max_per_investor = static_cast<int>(cfg.get_int("design.max_per_investor", d.campaign.max_per_investor));
  d.campaign.mixed_ivy_share = cfg.get_double("design.mixed_ivy_share", d.campaign.mixed_ivy_share);
  d.min_gap_days = static_cast<int>(cfg.get_int("design.min_gap_days", d.min_gap_days));
  d.window_days = static_cast<int>(cfg.get_int("design.window_days", d.window_days));
  if (d.n_investors <= 0 || d.campaign_investors <= 0 || d.investors_per_fund <= 0 || d.campaign.n_ideas <= 0)
    fail(ErrorKind::config, "design: investor, fund and idea counts must be positive");
  if (d.n_profiles <= 0 || d.n_profiles % 2 != 0) fail(ErrorKind::config, "design.n_profiles must be a positive even number");
  if (d.min_gap_days < 0) fail(ErrorKind::config, "design.min_gap_days must be non-negative");
  for (double s : {d.investor_female_share, d.investor_asian_share, d.investor_us_share, d.campaign.mixed_ivy_share})
    if (s < 0.0 || s > 1.0) fail(ErrorKind::config, "design: shares must lie in [0,1]");
  return d;
}

inline EvalDgpParams eval_params(const KvConfig& cfg) {
  EvalDgpParams p;
  const auto base = per_question(cfg, "eval.base"), alpha = per_question(cfg, "eval.alpha");
  const auto eta = per_question(cfg, "eval.eta"), noise = per_question(cfg, "eval.noise");
  const auto skip = per_question(cfg, "eval.skip");
  for (int k = 0; k < kQuestions; ++k) p.questions[k] = QuestionDgp{base[k], alpha[k], eta[k], noise[k], skip[k]};
  for (const auto& entry : cfg.get_list("eval.error_corr")) {
    const auto parts = split(entry, ':');
    if (parts.size() != 3) fail(ErrorKind::config, "eval.error_corr: expected qi:qj:r entries, got '" + entry + "'");
    const auto i = parse_int(parts[0], "eval.error_corr") - 1, j = parse_int(parts[1], "eval.error_corr") - 1;
    if (i < 0 || j < 0 || i >= kQuestions || j >= kQuestions || i == j)
      fail(ErrorKind::config, "eval.error_corr: question indices must be distinct and in 1..5");
    p.error_corr(i, j) = p.error_corr(j, i) = parse_double(parts[2], "eval.error_corr");
  }
  p.second_half_shift = per_question(cfg, "eval.second_half_shift");
  p.response_median_seconds = cfg.get_double("eval.response_median_seconds", p.response_median_seconds);
  p.response_log_sd = cfg.get_double("eval.response_log_sd", p.response_log_sd);
  p.exact_shares = cfg.get_bool("eval.exact_shares", p.exact_shares);
  for (const auto& name : cfg.get_list("eval.slopes")) {
    SlopeMixture m;
    const auto prefix = "eval.slopes." + name;
    m.share_anti = cfg.get_double(prefix + ".share_anti", 0.0);
    m.effect_anti = per_question(cfg, prefix + ".anti");
    m.effect_pro = per_question(cfg, prefix + ".pro");
    p.slopes[name] = m;
  }
  for (const auto& [key, value] : cfg.values())
    if (key.starts_with("eval.second_half_interaction."))
      p.second_half_interaction[key.substr(std::string("eval.second_half_interaction.").size())] = per_question(cfg, key);
  p.validate();
  return p;
}

inline CallbackDgpParams callback_params(const KvConfig& cfg) {
  CallbackDgpParams p;
  const auto group = cfg.get_string("callback.group", "female");
  if (group != "female" && group != "asian") fail(ErrorKind::config, "callback.group must be female or asian");
  p.group = group == "female" ? GroupBit::female : GroupBit::asian;
  p.threshold = cfg.get_double("callback.threshold", p.threshold);
  if (cfg.has("callback.upper_threshold")) p.upper_threshold = cfg.get_double("callback.upper_threshold", 0.0);
  p.quality_level = cfg.get_double("callback.quality_level", p.quality_level);
  p.beta_ivy = cfg.get_double("callback.beta_ivy", p.beta_ivy);
  p.beta_advantage = cfg.get_double("callback.beta_advantage", p.beta_advantage);
  p.beta_other_bit = cfg.get_double("callback.beta_other_bit", p.beta_other_bit);
  p.gamma = cfg.get_double("callback.gamma", p.gamma);
  p.omega = cfg.get_double("callback.omega", p.omega);
  p.sigma_fund = cfg.get_double("callback.sigma_fund", p.sigma_fund);
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorKind::config, std::string("callback: ") + e.what());
  }
  return p;
}

inline TimingParams timing_params(const KvConfig& cfg) {
  TimingParams t;
  t.download_rate_bytes_per_s = cfg.get_double("events.download_rate", t.download_rate_bytes_per_s);
  t.read_median_seconds = cfg.get_double("events.read_median_seconds", t.read_median_seconds);
  t.read_log_sd = cfg.get_double("events.read_log_sd", t.read_log_sd);
  t.open_delay_mean_hours = cfg.get_double("events.open_delay_mean_hours", t.open_delay_mean_hours);
  t.click_prob = cfg.get_double("events.click_prob", t.click_prob);
  t.reply_prob = cfg.get_double("events.reply_prob", t.reply_prob);
  t.reopen_prob = cfg.get_double("events.reopen_prob", t.reopen_prob);
  if (cfg.has("events.campaign_start")) {
    try {
      t.campaign_start = parse_iso8601(cfg.raw("events.campaign_start"));
    } catch (const Error& e) {
      fail(ErrorKind::config, std::string("events.campaign_start: ") + e.what());
    }
  }
  if (!(t.download_rate_bytes_per_s > 0.0) || !(t.read_median_seconds > 0.0) || t.read_log_sd < 0.0 ||
      !(t.open_delay_mean_hours > 0.0))
    fail(ErrorKind::config, "events: rates, medians and delays must be positive");
  for (double pr : {t.click_prob, t.reply_prob, t.reopen_prob})
    if (pr < 0.0 || pr >= 1.0) fail(ErrorKind::config, "events: probabilities must lie in [0,1)");
  return t;
}

inline DonationParams donation_params(const KvConfig& cfg) {
  DonationParams p;
  p.base = cfg.get_double("donation.base", p.base);
  p.female_founder = cfg.get_double("donation.female_founder", p.female_founder);
  p.asian_founder = cfg.get_double("donation.asian_founder", p.asian_founder);
  p.female_x_asian_founder = cfg.get_double("donation.female_x_asian_founder", p.female_x_asian_founder);
  p.female_founder_x_female_investor =
      cfg.get_double("donation.female_founder_x_female_investor", p.female_founder_x_female_investor);
  p.asian_founder_x_asian_investor =
      cfg.get_double("donation.asian_founder_x_asian_investor", p.asian_founder_x_asian_investor);
  p.female_investor = cfg.get_double("donation.female_investor", p.female_investor);
  p.asian_investor = cfg.get_double("donation.asian_investor", p.asian_investor);
  p.noise_sd = cfg.get_double("donation.noise_sd", p.noise_sd);
  if (p.noise_sd < 0.0) fail(ErrorKind::config, "donation.noise_sd must be non-negative");
  return p;
}

inline HeckmanDemoParams heckman_params(const KvConfig& cfg) {
  HeckmanDemoParams p;
  p.replications = static_cast<int>(cfg.get_int("demo.heckman.replications", p.replications));
  p.n = static_cast<int>(cfg.get_int("demo.heckman.n", p.n));
  p.sigma_male_over_female = cfg.get_double("demo.heckman.sigma_ratio", p.sigma_male_over_female);
  p.low_level = cfg.get_double("demo.heckman.low_level", p.low_level);
  p.high_level = cfg.get_double("demo.heckman.high_level", p.high_level);
  p.beta_ivy = cfg.get_double("demo.heckman.beta_ivy", p.beta_ivy);
  p.beta_advantage = cfg.get_double("demo.heckman.beta_advantage", p.beta_advantage);
  return p;
}

inline LooDemoParams loo_demo_params(const KvConfig& cfg) {
  LooDemoParams p;
  p.replications = static_cast<int>(cfg.get_int("demo.loo.replications", p.replications));
  p.investors = static_cast<int>(cfg.get_int("demo.loo.investors", p.investors));
  p.profiles = static_cast<int>(cfg.get_int("demo.loo.profiles", p.profiles));
  if (cfg.has("demo.loo.j_sweep")) p.j_sweep = int_list(cfg, "demo.loo.j_sweep");
  p.error_corr = cfg.get_double("demo.loo.error_corr", p.error_corr);
  p.classify_on = static_cast<int>(cfg.get_int("demo.loo.classify_on", p.classify_on));
  p.outcome = static_cast<int>(cfg.get_int("demo.loo.outcome", p.outcome));
  for (int q : {p.classify_on, p.outcome})
    if (q < 1 || q > kQuestions) fail(ErrorKind::config, "demo.loo: question indices must lie in 1..5");
  if (p.classify_on == p.outcome) fail(ErrorKind::config, "demo.loo: classify_on and outcome must differ");
  return p;
}

}  // namespace auditlab
