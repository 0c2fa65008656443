#include <gtest/gtest.h>

#include <cmath>

#include "auditlab/auditlab.hpp"

using namespace auditlab;

namespace {

// Latent y* = b x + 0.5 ivy + gamma G + exp(omega G) e, open iff y* > c.
// `levels` > 0 draws x from that many discrete points instead of N(0, 1).
BinaryData shifter_dgp(std::uint64_t seed, int n, double c, double gamma, double omega, int levels = 0) {
  Rng rng(derive_seed(seed, 1));
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> lvl(0, std::max(levels - 1, 0));
  BinaryData d;
  d.t.resize(n);
  d.g.resize(n);
  d.X.resize(n, 2);
  d.x_names = {"quality", "ivy"};
  for (int i = 0; i < n; ++i) {
    const double g = coin(rng), iv = coin(rng);
    const double x = levels > 0 ? -1.0 + 2.0 * lvl(rng) / (levels - 1) : z(rng);
    const double latent = x + 0.5 * iv + gamma * g + std::exp(omega * g) * z(rng);
    d.t(i) = latent > c;
    d.g(i) = g;
    d.X(i, 0) = x;
    d.X(i, 1) = iv;
  }
  return d;
}

Eigen::VectorXd random_theta(Rng& rng, int p) {
  std::normal_distribution<double> z(0.0, 0.5);
  Eigen::VectorXd th(p + 3);
  for (Eigen::Index k = 0; k < th.size(); ++k) th(k) = z(rng);
  return th;
}

BinaryData small_data(Rng& rng, int n) {
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.5);
  BinaryData d;
  d.t.resize(n);
  d.g.resize(n);
  d.X.resize(n, 2);
  d.x_names = {"a", "b"};
  for (int i = 0; i < n; ++i) {
    d.X(i, 0) = z(rng);
    d.X(i, 1) = z(rng);
    d.g(i) = coin(rng);
    d.t(i) = coin(rng);
  }
  return d;
}

}  // namespace

TEST(HetProbitLoglik, ReducesToProbitWhenOmegaIsZero) {
  Rng rng(3);
  const auto d = small_data(rng, 300);
  Eigen::VectorXd th = random_theta(rng, 2);
  th(4) = 0.0;
  Eigen::MatrixXd xg(d.n(), 3);
  xg << d.X, d.g;
  EXPECT_EQ(het_probit_loglik(th, d), probit_loglik(th.head(4), xg, d.t));
}

TEST(HetProbitLoglik, SingleObservationAtZeroIndex) {
  BinaryData d;
  d.t = Eigen::VectorXd::Ones(1);
  d.g = Eigen::VectorXd::Zero(1);
  d.X = Eigen::MatrixXd::Zero(1, 1);
  EXPECT_NEAR(het_probit_loglik(Eigen::VectorXd::Zero(4), d), std::log(0.5), 1e-15);
}

TEST(HetProbitLoglik, MatchesDirectFormula) {
  Rng rng(5);
  const auto d = small_data(rng, 10);
  const Eigen::VectorXd th = random_theta(rng, 2);
  double expect = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double idx = th(0) + d.X(i, 0) * th(1) + d.X(i, 1) * th(2) + d.g(i) * th(3);
    const double z = idx / std::exp(th(4) * d.g(i));
    const double p = 0.5 * std::erfc(-z / std::sqrt(2.0));
    expect += d.t(i) == 1.0 ? std::log(p) : std::log(1.0 - p);
  }
  EXPECT_NEAR(het_probit_loglik(th, d), expect, 1e-10);
}

TEST(HetProbitLoglik, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  const auto d = small_data(rng, 200);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd th = random_theta(rng, 2);
    const Eigen::VectorXd g = het_probit_gradient(th, d);
    for (Eigen::Index k = 0; k < th.size(); ++k) {
      const double h = 1e-6;
      Eigen::VectorXd up = th, dn = th;
      up(k) += h;
      dn(k) -= h;
      const double fd = (het_probit_loglik(up, d) - het_probit_loglik(dn, d)) / (2 * h);
      EXPECT_LT(std::abs(fd - g(k)), 1e-5 * std::max(1.0, std::abs(g(k)))) << "rep " << rep << " k " << k;
    }
  }
}

TEST(HetProbitMarginals, Decomposition) {
  Rng rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd th = random_theta(rng, 2);
    Eigen::VectorXd xm(2);
    xm << 0.2, -0.4;
    const double gm = 0.3;
    const auto m = het_probit_marginals(th, xm, gm);
    EXPECT_NEAR(m.level + m.variance, m.total, 1e-14);
    const double h = 1e-5;
    const double fd = (het_probit_probability(th, xm, gm + h) - het_probit_probability(th, xm, gm - h)) / (2 * h);
    EXPECT_NEAR(m.total, fd, 1e-6);
  }
}

TEST(HetProbitMarginals, DegenerateCases) {
  Eigen::VectorXd th(4);
  Eigen::VectorXd xm = Eigen::VectorXd::Constant(1, 0.5);
  th << 0.1, 0.7, 0.4, 0.0;  // omega = 0: level effect only
  auto m = het_probit_marginals(th, xm, 0.5);
  EXPECT_EQ(m.variance, 0.0);
  EXPECT_DOUBLE_EQ(m.level, m.total);
  th << 0.1, 0.7, 0.0, -0.3;  // gamma = 0: variance effect only
  m = het_probit_marginals(th, xm, 0.5);
  EXPECT_EQ(m.level, 0.0);
  EXPECT_DOUBLE_EQ(m.variance, m.total);
}

TEST(HetProbitFit, RecoversShiftAndVarianceRatio) {
  const auto d = shifter_dgp(1, 50000, 0.2, 0.3, std::log(0.8));
  const auto r = fit_het_probit(d);
  EXPECT_NEAR(r.gamma, 0.3, 0.05);
  EXPECT_NEAR(r.sigma_ratio, 0.8, 0.05);
  EXPECT_NEAR(r.c_prime, 0.2, 0.05);
  EXPECT_NEAR(r.beta(0), 1.0, 0.05);
  EXPECT_NEAR(r.beta(1), 0.5, 0.05);
  EXPECT_GT(r.sigma_ratio_se, 0.0);
  EXPECT_LT(r.wald.p_value, 0.05);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.fit.vcov);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
  EXPECT_LT((r.fit.vcov - r.fit.vcov.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HetProbitFit, WaldTestHasNominalSizeUnderTheNull) {
  constexpr int reps = 200;
  int reject = 0;
  for (int s = 0; s < reps; ++s) {
    const auto r = fit_het_probit(shifter_dgp(1000 + s, 4000, 0.2, 0.3, 0.0, 9));
    reject += r.wald.p_value < 0.05;
  }
  const double rate = static_cast<double>(reject) / reps;
  // Binomial(200, .05) has sd ~.015.
  EXPECT_GT(rate, 0.015);
  EXPECT_LT(rate, 0.095);
}

TEST(HetProbitFit, ConstantRegressorsAreNotIdentified) {
  auto d = shifter_dgp(2, 2000, 0.2, 0.3, 0.0);
  d.X.setConstant(1.0);
  try {
    fit_het_probit(d);
    FAIL() << "expected an identification error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
    EXPECT_NE(std::string(e.what()).find("identification"), std::string::npos);
  }
}

TEST(HetProbitFit, NonBinaryGroupRejected) {
  auto d = shifter_dgp(2, 500, 0.2, 0.3, 0.0);
  d.g(0) = 0.5;
  EXPECT_THROW(fit_het_probit(d), Error);
}

TEST(HetProbitFit, CompressionLeavesLikelihoodUnchanged) {
  const auto d = shifter_dgp(4, 3000, 0.2, 0.3, -0.2, 5);
  const auto c = compress(d);
  EXPECT_LT(c.n(), d.n());
  EXPECT_DOUBLE_EQ(c.total_weight(), static_cast<double>(d.n()));
  Rng rng(8);
  const Eigen::VectorXd th = random_theta(rng, 2);
  EXPECT_NEAR(het_probit_loglik(th, c), het_probit_loglik(th, d), 1e-8);
}

namespace {

BinaryData two_threshold_sample(std::uint64_t seed, int n, std::optional<double> upper) {
  Rng rng(derive_seed(seed, 2));
  CallbackDgpParams p;
  p.threshold = -0.5;
  p.upper_threshold = upper;
  p.quality_level = 0.0;
  p.beta_ivy = 1.0;
  p.beta_advantage = 0.5;
  p.beta_other_bit = 0.3;
  p.gamma = 0.2;
  p.omega = std::log(0.8);
  const auto emails = random_emails(rng, static_cast<std::size_t>(n));
  const auto opens = upper ? simulate_two_threshold_callbacks(rng, emails, p) : simulate_callbacks(rng, emails, p);
  BinaryData d;
  d.t.resize(n);
  d.g.resize(n);
  d.X.resize(n, 3);
  d.x_names = {"ivy", "advantage", "asian"};
  for (int i = 0; i < n; ++i) {
    const auto& c = emails[static_cast<std::size_t>(i)].cell;
    d.t(i) = opens[static_cast<std::size_t>(i)];
    d.g(i) = c.female;
    d.X(i, 0) = c.ivy;
    d.X(i, 1) = c.advantage;
    d.X(i, 2) = c.asian;
  }
  return d;
}

}  // namespace

TEST(TwoThreshold, RecoversBothThresholds) {
  const auto r = fit_two_threshold(two_threshold_sample(42, 100000, 2.5));
  EXPECT_NEAR(r.c1, -0.5, 0.1);
  EXPECT_NEAR(r.c2, 2.5, 0.1);
  EXPECT_NEAR(r.gamma, 0.2, 0.1);
  EXPECT_FALSE(r.flat_upper);
  EXPECT_GT(r.starts_converged, 0);
}

TEST(TwoThreshold, NestsTheSingleThresholdModel) {
  const auto d = two_threshold_sample(43, 50000, std::nullopt);
  const auto one = fit_het_probit(d);
  const auto two = fit_two_threshold(d);
  EXPECT_GT(two.c2, two.c1 + 3.0);
  EXPECT_LT(std::abs(two.c1 - one.c_prime), 2.0 * two.c1_se + 1e-3);
  EXPECT_NEAR(two.gamma, one.gamma, 2.0 * one.gamma_se() + 1e-3);
}

TEST(TwoThreshold, NoOpensIsDegenerate) {
  auto d = two_threshold_sample(44, 500, 2.5);
  d.t.setZero();
  try {
    fit_two_threshold(d);
    FAIL() << "expected a degenerate-outcome error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no opens"), std::string::npos);
  }
}
