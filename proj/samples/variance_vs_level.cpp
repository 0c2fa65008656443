// Simulates a callback experiment where the two groups face the same
// threshold but one has noisier unobservables, then compares a plain probit
// with the heteroskedastic probit on the same data.
#include <cmath>
#include <cstdio>
#include <random>

#include "auditlab/auditlab.hpp"

int main() {
  using namespace auditlab;
  constexpr Eigen::Index n = 20000;
  constexpr double threshold = 1.0, sigma_ratio = 1.5;

  Rng rng(derive_seed(2024, 1));
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.5);

  BinaryData d;
  d.t.resize(n);
  d.g.resize(n);
  d.X.resize(n, 1);
  d.x_names = {"quality"};
  d.g_name = "female";
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = z(rng);
    const double g = coin(rng) ? 1.0 : 0.0;
    const double sd = g == 1.0 ? 1.0 : sigma_ratio;  // men are the noisier group
    d.X(i, 0) = x;
    d.g(i) = g;
    d.t(i) = 0.5 * x + sd * z(rng) > threshold ? 1.0 : 0.0;
  }

  Eigen::MatrixXd xg(n, 2);
  xg << d.X, d.g;
  const auto naive = fit_probit(xg, d.t, {"quality", "female"});
  const auto het = fit_het_probit(d);

  std::printf("naive probit   female = %+.3f (se %.3f)\n", naive.estimate("female"), naive.se("female"));
  std::printf("het probit     gamma  = %+.3f (se %.3f)\n", het.gamma, het.gamma_se());
  std::printf("               sd(female)/sd(male) = %.3f, truth %.3f\n", het.sigma_ratio, 1.0 / sigma_ratio);
  return 0;
}
