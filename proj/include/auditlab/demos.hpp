#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auditlab/catalog.hpp"
#include "auditlab/design.hpp"
#include "auditlab/loo.hpp"
#include "auditlab/parallel.hpp"
#include "auditlab/probit.hpp"
#include "auditlab/rng.hpp"
#include "auditlab/simulate.hpp"
#include "auditlab/stats.hpp"

namespace auditlab {

// ---------------------------------------------------------------------------
// Variance-confounding demo: no taste shift (gamma = 0) but men's unobservables
// are more dispersed. A naive probit then reports a group effect whose sign
// follows the observable quality level; the heteroskedastic probit does not.

struct HeckmanDemoParams {
  int replications = 100;
  int n = 10'000;                     // emails per replication
  double sigma_male_over_female = 1.5;
  double low_level = -1.0;            // quality index relative to the threshold
  double high_level = 1.0;
  double beta_ivy = 0.5;
  double beta_advantage = 0.3;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct HeckmanReplication {
  double naive_coef = 0.0, naive_t = 0.0;
  double het_gamma = 0.0, het_se = 0.0;
  double het_sigma_ratio = 0.0;
  bool het_covers = false;
};

struct HeckmanCase {
  std::string label;
  double level = 0.0;
  int predicted_sign = 0;
  std::vector<HeckmanReplication> reps;

  int naive_significant_as_predicted() const {
    int c = 0;
    for (const auto& r : reps) c += std::abs(r.naive_t) > 2.0 && r.naive_coef * predicted_sign > 0.0;
    return c;
  }
  int het_covered() const {
    int c = 0;
    for (const auto& r : reps) c += r.het_covers;
    return c;
  }
  double mean_naive() const {
    double s = 0.0;
    for (const auto& r : reps) s += r.naive_coef;
    return reps.empty() ? 0.0 : s / static_cast<double>(reps.size());
  }
  double mean_het_gamma() const {
    double s = 0.0;
    for (const auto& r : reps) s += r.het_gamma;
    return reps.empty() ? 0.0 : s / static_cast<double>(reps.size());
  }
};

struct HeckmanDemoResult {
  HeckmanDemoParams params;
  HeckmanCase low, high;
};

/// Callback data for one replication: regressors ivy, advantage, asian; group female.
inline BinaryData heckman_sample(Rng& rng, const CallbackDgpParams& dgp, int n) {
  const auto emails = random_emails(rng, static_cast<std::size_t>(n));
  const auto opens = simulate_callbacks(rng, emails, dgp);
  BinaryData d;
  d.t.resize(n);
  d.g.resize(n);
  d.X.resize(n, 3);
  d.x_names = {"ivy", "advantage", "asian"};
  d.g_name = "female";
  for (int i = 0; i < n; ++i) {
    const auto& c = emails[static_cast<std::size_t>(i)].cell;
    d.t(i) = opens[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    d.g(i) = c.female;
    d.X(i, 0) = c.ivy;
    d.X(i, 1) = c.advantage;
    d.X(i, 2) = c.asian;
  }
  return d;
}

inline HeckmanDemoResult run_heckman_demo(const HeckmanDemoParams& params) {
  if (params.replications <= 0 || params.n <= 0) fail(ErrorKind::config, "heckman demo: counts must be positive");
  if (!(params.sigma_male_over_female > 0.0)) fail(ErrorKind::config, "heckman demo: sigma ratio must be positive");
  HeckmanDemoResult out;
  out.params = params;
  out.low = {"low quality (case I)", params.low_level, -1, {}};
  out.high = {"high quality (case II)", params.high_level, +1, {}};
  const auto base = derive_seed(params.seed, streams::montecarlo);
  int case_index = 0;
  for (auto* c : {&out.low, &out.high}) {
    CallbackDgpParams dgp;
    dgp.threshold = 0.0;
    dgp.quality_level = c->level;
    dgp.beta_ivy = params.beta_ivy;
    dgp.beta_advantage = params.beta_advantage;
    dgp.gamma = 0.0;
    dgp.omega = -std::log(params.sigma_male_over_female);  // female sd relative to male
    c->reps.resize(static_cast<std::size_t>(params.replications));
    const auto case_seed = derive_seed(base, static_cast<std::uint64_t>(case_index++));
    parallel_for(c->reps.size(), params.threads, [&](std::size_t r) {
      Rng rng(derive_seed(case_seed, r));
      const auto d = heckman_sample(rng, dgp, params.n);
      const auto cd = compress(d);
      Eigen::MatrixXd xg(cd.n(), 4);
      xg << cd.X, cd.g;
      const auto naive = fit_probit(xg, cd.t, {"ivy", "advantage", "asian", "female"}, {}, {}, cd.w);
      const auto het = fit_het_probit(cd);
      auto& rep = c->reps[r];
      rep.naive_coef = naive.coef(4);
      rep.naive_t = naive.coef(4) / naive.se(4);
      rep.het_gamma = het.gamma;
      rep.het_se = het.gamma_se();
      rep.het_sigma_ratio = het.sigma_ratio;
      rep.het_covers = std::abs(het.gamma) <= 1.959963984540054 * rep.het_se;
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generated-regressor demo: no true slope heterogeneity, but the classifying
// question's errors correlate with the outcome's. Classifying on the full
// sample slope then manufactures opposite-signed group effects.

struct LooDemoParams {
  int replications = 100;
  int investors = 200;
  int profiles = 16;
  std::vector<int> j_sweep = {8, 16, 64};
  double error_corr = 0.8;
  int classify_on = 3;
  int outcome = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct LooDemoReplication {
  double naive_anti = std::numeric_limits<double>::quiet_NaN(), naive_pro = naive_anti;
  double loo_anti = naive_anti, loo_pro = naive_anti;
  double loo_se_anti = naive_anti, loo_se_pro = naive_anti;  // cluster-robust
  bool naive_significant = false;  // either naive coefficient with |t| > 1.96
  bool loo_covers = false;         // both LOO 95% intervals contain 0
};

struct LooSweepPoint {
  int profiles = 0;
  double mean_anti = 0.0, mean_pro = 0.0;  // sample averages of the LOO estimates
  double bias() const { return 0.5 * (std::abs(mean_anti) + std::abs(mean_pro)); }
};

struct LooDemoResult {
  LooDemoParams params;
  std::vector<LooDemoReplication> reps;  // at params.profiles
  std::vector<LooSweepPoint> sweep;

  static double mean_abs(const std::vector<LooDemoReplication>& reps, bool naive) {
    double s = 0.0;
    int c = 0;
    for (const auto& r : reps)
      for (double v : naive ? std::array{r.naive_anti, r.naive_pro} : std::array{r.loo_anti, r.loo_pro})
        if (!std::isnan(v)) {
          s += std::abs(v);
          ++c;
        }
    return c ? s / c : std::numeric_limits<double>::quiet_NaN();
  }
  double mean_abs_naive() const { return mean_abs(reps, true); }
  double mean_abs_loo() const { return mean_abs(reps, false); }
  int naive_significant() const {
    int c = 0;
    for (const auto& r : reps) c += r.naive_significant;
    return c;
  }
  int loo_covers() const {
    int c = 0;
    for (const auto& r : reps) c += r.loo_covers;
    return c;
  }
};

inline EvalDgpParams null_effect_dgp(double error_corr, int classify_on, int outcome) {
  EvalDgpParams p;
  p.error_corr(classify_on - 1, outcome - 1) = error_corr;
  p.error_corr(outcome - 1, classify_on - 1) = error_corr;
  return p;
}

inline std::vector<EvaluationSession> random_sessions(Rng& rng, const ComponentCatalog& catalog, int investors,
                                                      int profiles) {
  std::vector<EvaluationSession> sessions;
  for (int i = 0; i < investors; ++i)
    sessions.push_back({i, generate_session(rng, catalog, profiles, i)});
  return sessions;
}

inline LooDemoReplication loo_demo_replication(Rng& rng, const ComponentCatalog& catalog, const LooDemoParams& p,
                                               int profiles) {
  const auto dgp = null_effect_dgp(p.error_corr, p.classify_on, p.outcome);
  const auto records = simulate_evaluations(rng, random_sessions(rng, catalog, p.investors, profiles), dgp,
                                            catalog.benchmark_year);
  const auto data = loo_data(records, "female");
  LooDemoReplication rep;

  const auto naive = naive_split_fit(data, p.classify_on, p.outcome);
  bool any_sig = false;
  if (naive.has(kAntiTerm)) {
    rep.naive_anti = naive.estimate(kAntiTerm);
    any_sig = any_sig || std::abs(rep.naive_anti / naive.se(kAntiTerm)) > 1.96;
  }
  if (naive.has(kProTerm)) {
    rep.naive_pro = naive.estimate(kProTerm);
    any_sig = any_sig || std::abs(rep.naive_pro / naive.se(kProTerm)) > 1.96;
  }
  rep.naive_significant = any_sig;

  const auto slopes = loo_slopes(data, p.classify_on);
  const auto panel = detail::pooled_panel(data.investor, data.x, data.y[p.outcome - 1], slopes.group);
  bool covers = true;
  if (panel) {
    const auto fit = fit_fe_ols(*panel, VcovKind::cluster);
    if (fit.has(kAntiTerm)) {
      rep.loo_anti = fit.estimate(kAntiTerm);
      rep.loo_se_anti = fit.se(kAntiTerm);
      covers = covers && std::abs(rep.loo_anti) <= 1.959963984540054 * rep.loo_se_anti;
    }
    if (fit.has(kProTerm)) {
      rep.loo_pro = fit.estimate(kProTerm);
      rep.loo_se_pro = fit.se(kProTerm);
      covers = covers && std::abs(rep.loo_pro) <= 1.959963984540054 * rep.loo_se_pro;
    }
  }
  rep.loo_covers = covers;
  return rep;
}

inline LooDemoResult run_loo_demo(const LooDemoParams& params, const ComponentCatalog& catalog) {
  if (params.replications <= 0 || params.investors <= 1) fail(ErrorKind::config, "loo demo: counts must be positive");
  LooDemoResult out;
  out.params = params;
  const auto base = derive_seed(params.seed, streams::montecarlo);

  auto run = [&](int profiles, std::uint64_t stream) {
    std::vector<LooDemoReplication> reps(static_cast<std::size_t>(params.replications));
    const auto s = derive_seed(base, stream);
    parallel_for(reps.size(), params.threads, [&](std::size_t r) {
      Rng rng(derive_seed(s, r));
      reps[r] = loo_demo_replication(rng, catalog, params, profiles);
    });
    return reps;
  };

  out.reps = run(params.profiles, 0);
  for (std::size_t k = 0; k < params.j_sweep.size(); ++k) {
    const int j = params.j_sweep[k];
    const auto reps = j == params.profiles ? out.reps : run(j, 1 + k);
    LooSweepPoint pt;
    pt.profiles = j;
    int na = 0, np = 0;
    for (const auto& r : reps) {
      if (!std::isnan(r.loo_anti)) {
        pt.mean_anti += r.loo_anti;
        ++na;
      }
      if (!std::isnan(r.loo_pro)) {
        pt.mean_pro += r.loo_pro;
        ++np;
      }
    }
    if (na) pt.mean_anti /= na;
    if (np) pt.mean_pro /= np;
    out.sweep.push_back(pt);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text and CSV reports.

inline void write_heckman_report(std::ostream& out, const HeckmanDemoResult& r) {
  const auto& p = r.params;
  out << "Variance-confounding demo (naive probit vs heteroskedastic probit)\n"
      << "replications per case: " << p.replications << ", emails per replication: " << p.n
      << ", seed: " << p.seed << "\n"
      << "true group shift gamma = 0, sd(male)/sd(female) = " << csv::format_double(p.sigma_male_over_female) << "\n\n";
  for (const auto* c : {&r.low, &r.high}) {
    out << c->label << ", quality level " << csv::format_double(c->level) << "\n"
        << "  naive probit female coefficient, mean: " << csv::format_double(c->mean_naive()) << "\n"
        << "  naive |t| > 2 with predicted sign (" << (c->predicted_sign < 0 ? "negative" : "positive")
        << "): " << c->naive_significant_as_predicted() << " / " << c->reps.size() << "\n"
        << "  het probit gamma, mean: " << csv::format_double(c->mean_het_gamma()) << "\n"
        << "  het probit 95% CI covers 0: " << c->het_covered() << " / " << c->reps.size() << "\n\n";
  }
}

inline void write_heckman_csv(std::ostream& out, const HeckmanDemoResult& r) {
  csv::Writer w(out);
  w.row({"case", "replication", "naive_coef", "naive_t", "het_gamma", "het_se", "het_sigma_ratio", "het_covers"});
  for (const auto* c : {&r.low, &r.high})
    for (std::size_t i = 0; i < c->reps.size(); ++i) {
      const auto& x = c->reps[i];
      w.row({c->predicted_sign < 0 ? "low" : "high", std::to_string(i), csv::format_double(x.naive_coef),
             csv::format_double(x.naive_t), csv::format_double(x.het_gamma), csv::format_double(x.het_se),
             csv::format_double(x.het_sigma_ratio), x.het_covers ? "1" : "0"});
    }
}

inline void write_loo_demo_report(std::ostream& out, const LooDemoResult& r) {
  const auto& p = r.params;
  out << "Generated-regressor demo (full-sample split vs leave-one-out)\n"
      << "replications: " << p.replications << ", investors: " << p.investors << ", profiles: " << p.profiles
      << ", seed: " << p.seed << "\n"
      << "true within-investor effects 0, error correlation q" << p.classify_on << "/q" << p.outcome << " = "
      << csv::format_double(p.error_corr) << "\n\n"
      << "mean |naive estimate|: " << csv::format_double(r.mean_abs_naive()) << "\n"
      << "mean |LOO estimate|:   " << csv::format_double(r.mean_abs_loo()) << "\n"
      << "naive significant at 5%: " << r.naive_significant() << " / " << r.reps.size() << "\n"
      << "LOO 95% CIs cover 0: " << r.loo_covers() << " / " << r.reps.size() << "\n\n"
      << "LOO bias by profiles per investor (mean of |average estimate| over the two groups)\n";
  for (const auto& s : r.sweep) out << "  J = " << s.profiles << ": " << csv::format_double(s.bias()) << "\n";
}

inline void write_loo_demo_csv(std::ostream& out, const LooDemoResult& r) {
  csv::Writer w(out);
  w.row({"replication", "naive_anti", "naive_pro", "loo_anti", "loo_pro", "loo_se_anti", "loo_se_pro"});
  for (std::size_t i = 0; i < r.reps.size(); ++i) {
    const auto& x = r.reps[i];
    w.row({std::to_string(i), csv::format_double(x.naive_anti), csv::format_double(x.naive_pro),
           csv::format_double(x.loo_anti), csv::format_double(x.loo_pro), csv::format_double(x.loo_se_anti),
           csv::format_double(x.loo_se_pro)});
  }
}

}  // namespace auditlab
