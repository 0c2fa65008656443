#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auditlab/design.hpp"
#include "auditlab/error.hpp"
#include "auditlab/records.hpp"
#include "auditlab/rng.hpp"
#include "auditlab/stats.hpp"

namespace auditlab {

// ---------------------------------------------------------------------------
// Evaluation DGP:  Y_ij^(k) = base_k + alpha_i + X_ij beta_i^(k) + eta_i^(k) + v_ij^(k)

struct QuestionDgp {
  double base = 50.0;
  double alpha_scale = 10.0;  // sd of the investor effect alpha_i
  double eta_scale = 0.0;     // sd of eta_i^(k)
  double noise_scale = 15.0;  // sd of v_ij^(k)
  double skip_prob = 0.0;     // probability the answer is missing
};

// Investor-level slopes for one treated characteristic: a share of
// investors is "anti" (effect_anti) and the rest "pro" (effect_pro).
struct SlopeMixture {
  double share_anti = 0.0;
  std::array<double, kQuestions> effect_anti{};
  std::array<double, kQuestions> effect_pro{};
};

struct EvalDgpParams {
  std::array<QuestionDgp, kQuestions> questions = [] {
    std::array<QuestionDgp, kQuestions> q{};
    q[3] = QuestionDgp{10.0, 2.0, 0.0, 3.0, 0.0};
    return q;
  }();
  Eigen::Matrix<double, kQuestions, kQuestions> error_corr = Eigen::Matrix<double, kQuestions, kQuestions>::Identity();
  std::map<std::string, SlopeMixture> slopes;
  std::array<double, kQuestions> second_half_shift{};
  // treatment name -> extra slope in the second half of the session
  std::map<std::string, std::array<double, kQuestions>> second_half_interaction;
  double response_median_seconds = 30.0;
  double response_log_sd = 0.8;
  // Assign exactly round(share_anti * I) anti investors instead of
  // independent Bernoulli draws.
  bool exact_shares = true;

  void validate() const {
    const auto& c = error_corr;
    for (int k = 0; k < kQuestions; ++k)
      if (std::abs(c(k, k) - 1.0) > 1e-12) fail(ErrorKind::config, "error_corr must have a unit diagonal");
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12) fail(ErrorKind::config, "error_corr must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, kQuestions, kQuestions>> es(c);
    if (es.eigenvalues().minCoeff() < -1e-10) fail(ErrorKind::config, "error_corr is not positive semi-definite");
    for (const auto& [name, m] : slopes)
      if (m.share_anti < 0.0 || m.share_anti > 1.0) fail(ErrorKind::config, "share_anti of '" + name + "' outside [0,1]");
    for (const auto& q : questions)
      if (q.alpha_scale < 0 || q.eta_scale < 0 || q.noise_scale < 0 || q.skip_prob < 0 || q.skip_prob > 1)
        fail(ErrorKind::config, "question DGP scales must be non-negative");
  }

  // Symmetric square root of the correlation matrix (works for singular PSD).
  Eigen::Matrix<double, kQuestions, kQuestions> corr_factor() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, kQuestions, kQuestions>> es(error_corr);
    const Eigen::Matrix<double, kQuestions, 1> d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal();
  }
};

struct EvaluationSession {
  std::int64_t investor_id = 0;
  std::vector<StartupProfile> profiles;
};

// Simulates every answer in every session. True per-investor slopes are
// attached to each record's `truth` map and play no part in the observables
// beyond the structural equation.
inline std::vector<EvaluationRecord> simulate_evaluations(Rng& rng, const std::vector<EvaluationSession>& sessions,
                                                          const EvalDgpParams& params, int benchmark_year = 2020) {
  params.validate();
  const auto L = params.corr_factor();
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Investor types: for each characteristic, a set of anti investors.
  std::vector<std::int64_t> investor_ids;
  for (const auto& s : sessions) investor_ids.push_back(s.investor_id);
  std::map<std::string, std::set<std::int64_t>> anti;
  for (const auto& [name, mix] : params.slopes) {
    auto& set = anti[name];
    if (params.exact_shares) {
      auto ids = investor_ids;
      std::shuffle(ids.begin(), ids.end(), rng);
      const auto n_anti = static_cast<std::size_t>(std::llround(mix.share_anti * static_cast<double>(ids.size())));
      set.insert(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min(n_anti, ids.size())));
    } else {
      std::bernoulli_distribution coin(mix.share_anti);
      for (auto id : investor_ids)
        if (coin(rng)) set.insert(id);
    }
  }

  std::vector<EvaluationRecord> out;
  for (const auto& session : sessions) {
    const double alpha = gauss(rng);
    Eigen::Matrix<double, kQuestions, 1> z;
    for (int k = 0; k < kQuestions; ++k) z(k) = gauss(rng);
    const Eigen::Matrix<double, kQuestions, 1> eta = L * z;

    std::map<std::string, std::array<double, kQuestions>> beta;
    for (const auto& [name, mix] : params.slopes)
      beta[name] = anti[name].count(session.investor_id) ? mix.effect_anti : mix.effect_pro;

    for (const auto& profile : session.profiles) {
      EvaluationRecord r;
      r.investor_id = session.investor_id;
      r.profile_id = profile.profile_id;
      r.order_index = profile.order_index;
      r.second_half = profile.second_half;
      r.treatments = code_profile(profile, benchmark_year);
      Eigen::Matrix<double, kQuestions, 1> zv;
      for (int k = 0; k < kQuestions; ++k) zv(k) = gauss(rng);
      const Eigen::Matrix<double, kQuestions, 1> v = L * zv;
      for (int k = 0; k < kQuestions; ++k) {
        const auto& qd = params.questions[k];
        double y = qd.base + qd.alpha_scale * alpha + qd.eta_scale * eta(k) + qd.noise_scale * v(k);
        for (const auto& [name, b] : beta) y += b[k] * r.treatments.at(name);
        if (r.second_half) {
          y += params.second_half_shift[k];
          for (const auto& [name, shift] : params.second_half_interaction) y += shift[k] * r.treatments.at(name);
        }
        y = std::clamp(y, 0.0, kQuestionUpper[k]);
        const bool skipped = unif(rng) < qd.skip_prob;
        if (!skipped) r.q[k] = y;
      }
      r.response_seconds = params.response_median_seconds * std::exp(params.response_log_sd * gauss(rng));
      for (const auto& [name, b] : beta)
        for (int k = 0; k < kQuestions; ++k) r.truth[name + ".q" + std::to_string(k + 1)] = b[k];
      out.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Callback DGP: open iff quality + beta'X + gamma G + F + sd_G * z > threshold,
// with sd_G = exp(omega * G) and F a normal fund effect shared within a fund.

enum class GroupBit { female, asian };

struct CallbackDgpParams {
  double threshold = 1.0;  // c'
  std::optional<double> upper_threshold;  // c2', two-threshold variant
  double quality_level = 1.0;  // beta_1' X^{I*} for the baseline email
  double beta_ivy = 0.5;
  double beta_advantage = 0.3;
  double beta_other_bit = 0.0;  // the non-group identity bit (asian when G = female)
  double gamma = 0.0;
  double omega = 0.0;
  double sigma_fund = 0.0;
  GroupBit group = GroupBit::female;

  void validate() const {
    if (!(sigma_fund >= 0.0)) fail(ErrorKind::config, "sigma_fund must be non-negative");
    if (upper_threshold && !(*upper_threshold > threshold))
      fail(ErrorKind::domain, "upper threshold must exceed the lower threshold");
  }
  bool group_of(const Cell& c) const { return group == GroupBit::female ? c.female : c.asian; }
  double index_of(const Cell& c) const {
    const bool other = group == GroupBit::female ? c.asian : c.female;
    return quality_level + beta_ivy * (c.ivy ? 1.0 : 0.0) + beta_advantage * (c.advantage ? 1.0 : 0.0) +
           beta_other_bit * (other ? 1.0 : 0.0) + gamma * (group_of(c) ? 1.0 : 0.0);
  }
  double total_sd(const Cell& c) const {
    const double s = std::exp(omega * (group_of(c) ? 1.0 : 0.0));
    return std::sqrt(s * s + sigma_fund * sigma_fund);
  }
};

/// Closed-form Pr(open | cell) for the single-threshold model.
inline double open_probability(const CallbackDgpParams& p, const Cell& c) {
  return stats::norm_cdf((p.index_of(c) - p.threshold) / p.total_sd(c));
}

/// Closed-form Pr(c1' < latent < c2' | cell).
inline double interval_probability(const CallbackDgpParams& p, const Cell& c) {
  const double s = p.total_sd(c);
  const double m = p.index_of(c);
  const double hi = (*p.upper_threshold - m) / s, lo = (p.threshold - m) / s;
  if (lo > 0.0) return stats::norm_cdf(-lo) - stats::norm_cdf(-hi);
  return stats::norm_cdf(hi) - stats::norm_cdf(lo);
}

namespace detail {

inline std::vector<double> latent_draws(Rng& rng, std::span<const EmailTreatment> emails, const CallbackDgpParams& p) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::map<std::int64_t, double> fund_effect;
  for (const auto& e : emails) fund_effect.emplace(e.fund_id, 0.0);
  for (auto& [fund, f] : fund_effect) f = p.sigma_fund > 0.0 ? p.sigma_fund * gauss(rng) : 0.0;
  std::vector<double> latent;
  latent.reserve(emails.size());
  for (const auto& e : emails) {
    const double sd = std::exp(p.omega * (p.group_of(e.cell) ? 1.0 : 0.0));
    latent.push_back(p.index_of(e.cell) + fund_effect.at(e.fund_id) + sd * gauss(rng));
  }
  return latent;
}

}  // namespace detail

inline std::vector<bool> simulate_callbacks(Rng& rng, std::span<const EmailTreatment> emails,
                                            const CallbackDgpParams& params) {
  params.validate();
  const auto latent = detail::latent_draws(rng, emails, params);
  std::vector<bool> opens(latent.size());
  for (std::size_t i = 0; i < latent.size(); ++i) opens[i] = latent[i] > params.threshold;
  return opens;
}

inline std::vector<bool> simulate_two_threshold_callbacks(Rng& rng, std::span<const EmailTreatment> emails,
                                                          const CallbackDgpParams& params) {
  if (!params.upper_threshold) fail(ErrorKind::domain, "two-threshold callbacks need an upper threshold");
  params.validate();
  const auto latent = detail::latent_draws(rng, emails, params);
  std::vector<bool> opens(latent.size());
  for (std::size_t i = 0; i < latent.size(); ++i)
    opens[i] = latent[i] > params.threshold && latent[i] < *params.upper_threshold;
  return opens;
}

// Emails with uniformly random cells, each to a distinct fund; convenient for
// Monte Carlo work that does not need a full campaign.
inline std::vector<EmailTreatment> random_emails(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<int> cell(0, kCellCount - 1);
  std::vector<EmailTreatment> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].email_id = static_cast<std::int64_t>(i);
    out[i].investor_id = static_cast<std::int64_t>(i);
    out[i].fund_id = static_cast<std::int64_t>(i);
    out[i].cell = Cell::from_index(cell(rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dictator-game donations, censored to [0, 15] dollars.

struct DonationParams {
  double base = 11.10;
  double female_founder = 0.0;
  double asian_founder = 0.0;
  double female_x_asian_founder = 0.0;
  double female_founder_x_female_investor = 0.0;
  double asian_founder_x_asian_investor = 0.0;
  double female_investor = 0.0;
  double asian_investor = 0.0;
  double noise_sd = 4.0;
  double max_donation = 15.0;
};

inline std::vector<double> simulate_donations(Rng& rng, std::span<const Investor> investors,
                                              std::span<const Cell> displayed, const DonationParams& p) {
  if (investors.size() != displayed.size())
    fail(ErrorKind::domain, "simulate_donations: one displayed founder per investor required");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> out;
  out.reserve(investors.size());
  for (std::size_t i = 0; i < investors.size(); ++i) {
    const double ff = displayed[i].female ? 1.0 : 0.0, af = displayed[i].asian ? 1.0 : 0.0;
    const double fi = investors[i].female ? 1.0 : 0.0, ai = investors[i].asian ? 1.0 : 0.0;
    const double mean = p.base + p.female_founder * ff + p.asian_founder * af + p.female_x_asian_founder * ff * af +
                        p.female_founder_x_female_investor * ff * fi + p.asian_founder_x_asian_investor * af * ai +
                        p.female_investor * fi + p.asian_investor * ai;
    const double noise = p.noise_sd > 0.0 ? p.noise_sd * gauss(rng) : 0.0;
    out.push_back(std::clamp(mean + noise, 0.0, p.max_donation));
  }
  return out;
}

}  // namespace auditlab
