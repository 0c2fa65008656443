#include <gtest/gtest.h>

#include <cmath>

#include "auditlab/auditlab.hpp"

using namespace auditlab;

namespace {

std::vector<EvaluationSession> sessions(Rng& rng, int investors, int profiles = 16) {
  const auto cat = ComponentCatalog::defaults();
  std::vector<EvaluationSession> out;
  for (int i = 0; i < investors; ++i) out.push_back({i, generate_session(rng, cat, profiles, i)});
  return out;
}

EvalDgpParams quiet_dgp() {
  EvalDgpParams p;
  for (auto& q : p.questions) q = QuestionDgp{50.0, 10.0, 0.0, 0.0, 0.0};
  return p;
}

double open_rate(const std::vector<bool>& opens, const std::vector<EmailTreatment>& emails, int cell) {
  double n = 0, k = 0;
  for (std::size_t i = 0; i < emails.size(); ++i)
    if (emails[i].cell.index() == cell) {
      n += 1;
      k += opens[i];
    }
  return k / n;
}

}  // namespace

TEST(SimulateEvaluations, NoiselessNullEqualsInvestorEffect) {
  Rng rng(1);
  const auto s = sessions(rng, 5);
  const auto rec = simulate_evaluations(rng, s, quiet_dgp());
  std::map<std::int64_t, double> first;
  for (const auto& r : rec)
    for (int k = 0; k < kQuestions; ++k) {
      ASSERT_TRUE(r.q[k]);
      if (k == 0) {
        auto [it, inserted] = first.emplace(r.investor_id, *r.q[0]);
        EXPECT_DOUBLE_EQ(*r.q[0], it->second);
      }
    }
}

TEST(SimulateEvaluations, RatingsClippedToScale) {
  Rng rng(2);
  auto p = quiet_dgp();
  for (auto& q : p.questions) q.noise_scale = 80.0;
  for (const auto& r : simulate_evaluations(rng, sessions(rng, 20), p))
    for (int k = 0; k < kQuestions; ++k) {
      EXPECT_GE(*r.q[k], 0.0);
      EXPECT_LE(*r.q[k], kQuestionUpper[k]);
    }
}

TEST(SimulateEvaluations, AllAntiRecoversPooledEffect) {
  Rng rng(3);
  auto p = quiet_dgp();
  for (auto& q : p.questions) q.noise_scale = 5.0;
  SlopeMixture m;
  m.share_anti = 1.0;
  m.effect_anti = {-16.4, 0, 0, 0, 0};
  p.slopes["female"] = m;
  const auto rec = simulate_evaluations(rng, sessions(rng, 300), p);
  PanelSpec spec;
  spec.outcome = "q1";
  spec.terms = {"female"};
  spec.fe_key = "investor_id";
  spec.cluster_key = "investor_id";
  const auto fit = fit_fe_ols(build_panel(to_frame(rec), spec));
  EXPECT_NEAR(fit.estimate("female"), -16.4, 4 * fit.se("female"));
  EXPECT_NEAR(rec.front().truth.at("female.q1"), -16.4, 0.0);
}

TEST(SimulateEvaluations, CrossQuestionCorrelation) {
  Rng rng(4);
  EvalDgpParams p;
  for (auto& q : p.questions) q = QuestionDgp{50.0, 0.0, 0.0, 1.0, 0.0};
  p.error_corr(0, 2) = p.error_corr(2, 0) = 0.8;
  const auto rec = simulate_evaluations(rng, sessions(rng, 625), p);  // 10,000 rows
  std::vector<double> a, b;
  for (const auto& r : rec) {
    a.push_back(*r.q[0]);
    b.push_back(*r.q[2]);
  }
  EXPECT_NEAR(stats::correlation(a, b), 0.8, 0.03);
}

TEST(SimulateEvaluations, IdentityCorrelationGivesUncorrelatedResiduals) {
  Rng rng(5);
  EvalDgpParams p;
  for (auto& q : p.questions) q = QuestionDgp{50.0, 0.0, 0.0, 1.0, 0.0};
  const auto rec = simulate_evaluations(rng, sessions(rng, 625), p);
  std::vector<double> a, b;
  for (const auto& r : rec) {
    a.push_back(*r.q[0]);
    b.push_back(*r.q[4]);
  }
  EXPECT_LT(std::abs(stats::correlation(a, b)), 0.02);
}

TEST(SimulateEvaluations, TruthDoesNotFeedObservables) {
  Rng r1(6), r2(6);
  auto p = quiet_dgp();
  SlopeMixture m;
  m.share_anti = 0.5;
  m.effect_anti = {-5, -5, -5, -1, 0};
  m.effect_pro = {5, 5, 5, 1, 0};
  p.slopes["female"] = m;
  const auto s = sessions(r1, 10);
  (void)sessions(r2, 10);
  auto a = simulate_evaluations(r1, s, p);
  auto b = simulate_evaluations(r2, s, p);
  ASSERT_TRUE(b.front().truth.count("female.q1"));
  for (auto& r : a) r.truth.clear();
  for (auto& r : b) r.truth.clear();
  std::ostringstream sa, sb;
  write_evaluations_csv(sa, a);
  write_evaluations_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(SimulateEvaluations, InvalidCorrelationRejected) {
  Rng rng(7);
  EvalDgpParams p;
  p.error_corr(0, 1) = p.error_corr(1, 0) = 1.0;
  p.error_corr(0, 2) = p.error_corr(2, 0) = -1.0;
  p.error_corr(1, 2) = p.error_corr(2, 1) = 1.0;
  EXPECT_THROW(simulate_evaluations(rng, sessions(rng, 1), p), Error);
}

TEST(OpenProbability, ClosedFormExamples) {
  CallbackDgpParams p;
  p.threshold = 0.0;
  p.quality_level = 0.0;
  p.beta_ivy = p.beta_advantage = 0.0;
  EXPECT_DOUBLE_EQ(open_probability(p, Cell{}), 0.5);

  p.threshold = 1.0;
  p.quality_level = 1.0;
  p.gamma = 0.5;
  p.omega = std::log(0.5);
  Cell female{true, false, false, false};
  EXPECT_NEAR(open_probability(p, female), 0.841344746, 1e-8);

  CallbackDgpParams h;
  h.threshold = 0.0;
  h.quality_level = 1.0;
  h.beta_ivy = h.beta_advantage = 0.0;
  h.omega = -std::log(1.5);  // male sd 1.5 relative to female sd 1 after rescaling
  const double pf = open_probability(h, female), pm = open_probability(h, Cell{});
  EXPECT_GT(pf, pm);
}

TEST(SimulateCallbacks, EmpiricalRateMatchesClosedForm) {
  Rng rng(8);
  CallbackDgpParams p;
  p.threshold = 1.0;
  p.quality_level = 0.8;
  p.gamma = 0.2;
  p.omega = -0.3;
  p.sigma_fund = 0.4;
  const auto emails = random_emails(rng, 100000 * 16 / 4);
  const auto opens = simulate_callbacks(rng, emails, p);
  for (int c : {0, 5, 8, 15}) {
    const double pr = open_probability(p, Cell::from_index(c));
    double n = 0;
    for (const auto& e : emails) n += e.cell.index() == c;
    EXPECT_LT(std::abs(open_rate(opens, emails, c) - pr), 3.0 * std::sqrt(pr * (1 - pr) / n)) << c;
  }
}

TEST(SimulateCallbacks, FundEffectSharedWithinFund) {
  Rng rng(9);
  CallbackDgpParams p;
  p.sigma_fund = 50.0;  // fund effect dominates
  std::vector<EmailTreatment> emails(2000);
  for (std::size_t i = 0; i < emails.size(); ++i) {
    emails[i].email_id = static_cast<std::int64_t>(i);
    emails[i].fund_id = static_cast<std::int64_t>(i / 2);
  }
  const auto opens = simulate_callbacks(rng, emails, p);
  int agree = 0;
  for (std::size_t i = 0; i < emails.size(); i += 2) agree += opens[i] == opens[i + 1];
  EXPECT_GT(agree, 950);
}

TEST(TwoThresholdCallbacks, IntervalMass) {
  CallbackDgpParams p;
  p.quality_level = 0.0;
  p.beta_ivy = p.beta_advantage = 0.0;
  p.threshold = -1.0;
  p.upper_threshold = 1.0;
  EXPECT_NEAR(interval_probability(p, Cell{}), 0.682689492, 1e-8);
  p.threshold = -40.0;
  p.upper_threshold = 40.0;
  EXPECT_NEAR(interval_probability(p, Cell{}), 1.0, 1e-12);
  p.quality_level = 1e3;
  EXPECT_LT(interval_probability(p, Cell{}), 1e-12);
  // Very negative lower threshold reduces to the single-threshold tail at c2.
  CallbackDgpParams q;
  q.quality_level = 0.3;
  q.threshold = -50.0;
  q.upper_threshold = 0.7;
  EXPECT_NEAR(interval_probability(q, Cell{}), stats::norm_cdf(0.7 - q.index_of(Cell{})), 1e-12);
}

TEST(TwoThresholdCallbacks, RejectsInvertedThresholds) {
  Rng rng(1);
  CallbackDgpParams p;
  p.threshold = 1.0;
  p.upper_threshold = 0.5;
  const auto emails = random_emails(rng, 10);
  EXPECT_THROW(simulate_two_threshold_callbacks(rng, emails, p), Error);
}

TEST(TwoThresholdCallbacks, EmpiricalRate) {
  Rng rng(10);
  CallbackDgpParams p;
  p.threshold = -0.5;
  p.upper_threshold = 2.5;
  const auto emails = random_emails(rng, 64000);
  const auto opens = simulate_two_threshold_callbacks(rng, emails, p);
  const double pr = interval_probability(p, Cell::from_index(3));
  double n = 0;
  for (const auto& e : emails) n += e.cell.index() == 3;
  EXPECT_LT(std::abs(open_rate(opens, emails, 3) - pr), 3.0 * std::sqrt(pr * (1 - pr) / n));
}

TEST(EmitEventLog, TwentySecondsIs200KB) { EXPECT_EQ(bytes_for_seconds(20.0, 10240.0), 204800); }

TEST(EmitEventLog, UnopenedEmitsOnlySent) {
  Rng rng(11);
  const auto emails = random_emails(rng, 50);
  const auto out = emit_event_log(rng, emails, std::vector<bool>(50, false), TimingParams{});
  ASSERT_EQ(out.log.events.size(), 50u);
  for (const auto& e : out.log.events) EXPECT_EQ(e.kind, EventKind::sent);
}

TEST(EmitEventLog, NoClicksWhenProbabilityZero) {
  Rng rng(12);
  TimingParams t;
  t.click_prob = 0.0;
  const auto emails = random_emails(rng, 5000);
  const auto out = emit_event_log(rng, emails, std::vector<bool>(5000, true), t);
  for (const auto& e : out.log.events) EXPECT_NE(e.kind, EventKind::click);
}

TEST(EmitEventLog, PerEmailOrdering) {
  Rng rng(13);
  TimingParams t;
  t.reopen_prob = 0.4;
  t.click_prob = 0.5;
  t.reply_prob = 0.5;
  const auto emails = random_emails(rng, 2000);
  std::vector<bool> opens(2000);
  for (std::size_t i = 0; i < opens.size(); ++i) opens[i] = i % 3 != 0;
  const auto out = emit_event_log(rng, emails, opens, t);
  std::map<std::int64_t, std::vector<EmailEvent>> by;
  for (const auto& e : out.log.events) by[e.email_id].push_back(e);
  for (const auto& [id, evs] : by) {
    EXPECT_EQ(evs.front().kind, EventKind::sent);
    bool fetched = false;
    for (std::size_t k = 1; k < evs.size(); ++k) {
      EXPECT_LE(evs[k - 1].t, evs[k].t);
      if (evs[k].kind == EventKind::pixel_fetch) fetched = true;
      if (evs[k].kind != EventKind::pixel_fetch) EXPECT_TRUE(fetched);
    }
  }
}

TEST(SimulateDonations, MeanAtBase) {
  Rng rng(14);
  std::vector<Investor> inv(20000);
  std::vector<Cell> shown(20000);
  DonationParams p;
  p.noise_sd = 1.0;  // keeps censoring at 15 from moving the mean
  const auto d = simulate_donations(rng, inv, shown, p);
  EXPECT_NEAR(stats::mean(d), 11.1, 0.05);
  for (double v : d) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 15.0);
  }
}

TEST(SimulateDonations, CensoredAtFifteen) {
  Rng rng(15);
  DonationParams p;
  p.base = 20.0;
  p.noise_sd = 0.0;
  std::vector<Investor> inv(10);
  std::vector<Cell> shown(10);
  for (double v : simulate_donations(rng, inv, shown, p)) EXPECT_EQ(v, 15.0);
}

TEST(SimulateDonations, InjectedInteractionRecovered) {
  Rng rng(16);
  DonationParams p;
  p.base = 3.0;
  p.female_founder_x_female_investor = 10.31;
  p.noise_sd = 1.0;  // keeps the 13.31 cell clear of the $15 cap
  constexpr int n = 20000;
  std::vector<Investor> inv(n);
  std::vector<Cell> shown(n);
  std::bernoulli_distribution coin(0.5);
  Frame f;
  std::vector<double> ff(n), fi(n), ffi(n);
  for (int i = 0; i < n; ++i) {
    inv[i].female = coin(rng);
    shown[i].female = coin(rng);
    ff[i] = shown[i].female;
    fi[i] = inv[i].female;
    ffi[i] = ff[i] * fi[i];
  }
  f.add("donation", simulate_donations(rng, inv, shown, p));
  f.add("ff", ff);
  f.add("fi", fi);
  PanelSpec spec;
  spec.outcome = "donation";
  spec.terms = {"ff", "fi", "ff:fi"};
  const auto fit = fit_fe_ols(build_panel(f, spec));
  EXPECT_NEAR(fit.estimate("ff:fi"), 10.31, 4 * fit.se("ff:fi"));
}
