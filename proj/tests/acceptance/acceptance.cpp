// Acceptance checks. With no arguments every criterion runs; otherwise only the
// listed criterion numbers. One PASS/FAIL line per criterion; exit 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "auditlab/auditlab.hpp"
#include "auditlab/pipeline.hpp"

using namespace auditlab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1. Heteroskedastic probit recovery.
Verdict hetprobit_recovery() {
  Rng rng(derive_seed(1, 1));
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.5);
  constexpr int n = 50000;
  const double gamma = 0.3, omega = std::log(0.8), threshold = 0.2;
  BinaryData d;
  d.t.resize(n);
  d.g.resize(n);
  d.X.resize(n, 2);
  d.x_names = {"quality", "ivy"};
  for (int i = 0; i < n; ++i) {
    const double g = coin(rng), x = z(rng), ivy = coin(rng);
    const double latent = x + 0.5 * ivy + gamma * g + std::exp(omega * g) * z(rng);
    d.t(i) = latent > threshold;
    d.g(i) = g;
    d.X(i, 0) = x;
    d.X(i, 1) = ivy;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = fit_het_probit(d);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(r.gamma - gamma) <= 0.05 && std::abs(r.sigma_ratio - 0.8) <= 0.05 && secs < 10.0;
  return {ok, "gamma " + fmt(r.gamma) + " (0.3), sigma ratio " + fmt(r.sigma_ratio) + " (0.8), " + fmt(secs, 3) + " s"};
}

// 2. Heckman critique cases.
Verdict heckman_demo() {
  HeckmanDemoParams p = heckman_params(default_params());
  p.seed = 7;
  p.threads = workers();
  const auto r = run_heckman_demo(p);
  const int n = p.replications;
  const int lo_sig = r.low.naive_significant_as_predicted(), hi_sig = r.high.naive_significant_as_predicted();
  const int lo_cov = r.low.het_covered(), hi_cov = r.high.het_covered();
  const bool ok = lo_sig >= 0.8 * n && hi_sig >= 0.8 * n && lo_cov >= 0.9 * n && hi_cov >= 0.9 * n;
  return {ok, "naive significant as predicted " + std::to_string(lo_sig) + "/" + std::to_string(hi_sig) +
                  ", het CI covers 0 " + std::to_string(lo_cov) + "/" + std::to_string(hi_cov) + " of " +
                  std::to_string(n)};
}

// 3. Generated-regressor demo.
Verdict loo_demo() {
  LooDemoParams p = loo_demo_params(default_params());
  p.seed = 7;
  p.threads = workers();
  const auto r = run_loo_demo(p, ComponentCatalog::defaults());
  const double naive = r.mean_abs_naive(), loo = r.mean_abs_loo();
  bool monotone = r.sweep.size() >= 2;
  std::string biases;
  for (std::size_t i = 0; i < r.sweep.size(); ++i) {
    biases += (i ? " > " : "") + fmt(r.sweep[i].bias(), 3) + " (J=" + std::to_string(r.sweep[i].profiles) + ")";
    if (i && !(r.sweep[i].bias() < r.sweep[i - 1].bias())) monotone = false;
  }
  const bool ok = naive > 5.0 * loo && monotone;
  return {ok, "mean |naive| " + fmt(naive) + ", mean |LOO| " + fmt(loo) + ", ratio " + fmt(naive / loo, 3) +
                  "; LOO bias " + biases};
}

// 4. LOO mixture recovery on the default evaluation DGP.
Verdict loo_mixture() {
  const auto cfg = default_params();
  const auto cat = ComponentCatalog::defaults();
  const auto dp = design_params(cfg);
  const auto eval = eval_params(cfg);
  Rng rng(derive_seed(4, streams::evaluations));
  const auto sessions = random_sessions(rng, cat, dp.n_investors, dp.n_profiles);
  const auto records = simulate_evaluations(rng, sessions, eval, cat.benchmark_year);
  LooOptions opt;
  opt.classify_on = 3;
  opt.outcomes = {1};
  opt.bootstrap = 1000;
  opt.seed = 4;
  opt.threads = workers();
  const auto r = loo_pooled_fit(records, "female", opt);
  const auto& f = r.fit_for(1);
  const auto& mix = eval.slopes.at("female");
  const double anti = mix.effect_anti[0], pro = mix.effect_pro[0], share = mix.share_anti;
  if (!f.gamma_anti || !f.gamma_pro || !f.se_anti || !f.se_pro || !r.share_anti_se || !r.share_pro_se)
    return {false, "a group is missing from the pooled fit"};
  const double z = 1.959963984540054;
  const bool ok = std::abs(*f.gamma_anti - anti) <= z * *f.se_anti && std::abs(*f.gamma_pro - pro) <= z * *f.se_pro &&
                  std::abs(r.share_anti - share) <= z * *r.share_anti_se &&
                  std::abs(r.share_pro - (1.0 - share)) <= z * *r.share_pro_se &&
                  std::abs(r.share_anti - share) <= 0.05 && std::abs(r.share_pro - (1.0 - share)) <= 0.05;
  return {ok, "anti " + fmt(*f.gamma_anti) + " +- " + fmt(*f.se_anti, 3) + " (" + fmt(anti) + "), pro " +
                  fmt(*f.gamma_pro) + " +- " + fmt(*f.se_pro, 3) + " (" + fmt(pro) + "), share anti " +
                  fmt(r.share_anti) + " +- " + fmt(*r.share_anti_se, 3) + " (" + fmt(share) + ")"};
}

// 5. Within transform vs explicit dummy-variable OLS.
Verdict ols_oracle() {
  Rng rng(5);
  std::normal_distribution<double> z;
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const int groups = std::uniform_int_distribution<int>(2, 20)(rng);
    const int p = std::uniform_int_distribution<int>(1, 5)(rng);
    const int n = groups * std::uniform_int_distribution<int>(3, 12)(rng);
    Panel panel;
    panel.X.resize(n, p);
    panel.outcome.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < p; ++k) panel.names.push_back("x" + std::to_string(k));
    for (int i = 0; i < n; ++i) {
      const int g = i % groups;
      panel.fe_group.push_back(g);
      double y = z(rng) * 3.0 + g;
      for (int k = 0; k < p; ++k) {
        panel.X(i, k) = z(rng) + 0.5 * g;
        y += (k - 1.5) * panel.X(i, k);
      }
      panel.outcome[static_cast<std::size_t>(i)] = y;
    }
    const auto fit = fit_fe_ols(panel, VcovKind::classical);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, p + groups);
    D.leftCols(p) = panel.X;
    for (int i = 0; i < n; ++i) D(i, p + panel.fe_group[static_cast<std::size_t>(i)]) = 1.0;
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(panel.outcome.data(), n);
    const Eigen::VectorXd b = D.colPivHouseholderQr().solve(y);
    worst = std::max(worst, (fit.coef - b.head(p)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, "max |difference| over 100 instances " + fmt(worst, 3)};
}

// 6. Analytic gradient and marginal decomposition.
Verdict gradient_check() {
  Rng rng(6);
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.5);
  constexpr int n = 500;
  BinaryData d;
  d.t.resize(n);
  d.g.resize(n);
  d.X.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) d.X(i, k) = z(rng);
    d.g(i) = coin(rng);
    d.t(i) = coin(rng);
  }
  double worst_grad = 0.0, worst_marg = 0.0;
  for (int point = 0; point < 20; ++point) {
    Eigen::VectorXd th(6);
    for (Eigen::Index k = 0; k < th.size(); ++k) th(k) = 0.5 * z(rng);
    const Eigen::VectorXd g = het_probit_gradient(th, d);
    for (Eigen::Index k = 0; k < th.size(); ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(th(k)));
      Eigen::VectorXd up = th, dn = th;
      up(k) += h;
      dn(k) -= h;
      const double fd = (het_probit_loglik(up, d) - het_probit_loglik(dn, d)) / (2.0 * h);
      worst_grad = std::max(worst_grad, std::abs(fd - g(k)) / std::max(1.0, std::abs(g(k))));
    }
    const Eigen::VectorXd xm = d.X.colwise().mean();
    const double gm = d.g.mean();
    const auto m = het_probit_marginals(th, xm, gm);
    const double h = 1e-5;
    const double fd = (het_probit_probability(th, xm, gm + h) - het_probit_probability(th, xm, gm - h)) / (2.0 * h);
    worst_marg = std::max(worst_marg, std::abs(m.level + m.variance - fd));
  }
  return {worst_grad < 1e-5 && worst_marg < 1e-6,
          "max relative gradient error " + fmt(worst_grad, 3) + ", max |level + variance - FD total| " +
              fmt(worst_marg, 3)};
}

// 7. Tracking fixture.
Verdict tracking_fixture() {
  const EmailEventLog log{{{1, EventKind::sent, 0, 0},
                           {1, EventKind::pixel_fetch, 0, 3600},
                           {1, EventKind::bytes_progress, 204800, 3620}}};
  const auto out = parse_events(log, 10240.0);
  const auto& e = out.at(1);
  return {e.opened && e.staying_seconds == 20.0, "staying time " + fmt(e.staying_seconds, 17) + " s"};
}

// 8. Ivy-scaled ratio fixture.
Verdict ivy_fixture() {
  const double r = ivy_scaled_ratio({2.73, -6.59}, 8.78);
  const double rounded = std::round(r * 100.0) / 100.0;
  return {rounded == -0.44, "(2.73 + -6.59) / 8.78 = " + fmt(r) + " -> " + fmt(rounded, 2)};
}

// 9. Randomization balance.
Verdict randomization_balance() {
  const auto cat = ComponentCatalog::defaults();
  Rng rng(derive_seed(9, streams::campaign));
  const auto investors = generate_investors(rng, 4000, 2);
  CampaignOptions opts;
  opts.n_ideas = 8;
  const auto schedule = schedule_campaign(plan_campaign(rng, investors, cat.names, opts), 14);
  std::string detail = std::to_string(schedule.emails.size()) + " emails";
  bool ok = schedule.emails.size() == 16000;
  int worst_spread = 0;
  std::array<int, kCellCount> total{};
  for (const auto& [idea, counts] : cell_counts(schedule.emails)) {
    worst_spread = std::max(worst_spread, *std::max_element(counts.begin(), counts.end()) -
                                              *std::min_element(counts.begin(), counts.end()));
    for (int c = 0; c < kCellCount; ++c) total[c] += counts[c];
  }
  ok = ok && worst_spread <= 1;
  const auto [lo, hi] = std::minmax_element(total.begin(), total.end());
  detail += ", per-idea cell spread " + std::to_string(worst_spread) + ", pooled cells " + std::to_string(*lo) + ".." +
            std::to_string(*hi);
  const auto problems = check_schedule(schedule);
  ok = ok && problems.empty();
  detail += ", schedule violations " + std::to_string(problems.size());

  // Profile component marginals over 16,000 generated profiles.
  std::map<std::string, std::vector<double>> counts;
  std::map<std::string, const Categorical*> comps;
  for (const auto& [name, c] : cat.categoricals()) {
    counts[name].assign(c->levels.size(), 0.0);
    comps[name] = c;
  }
  const auto bump = [&](const std::string& comp, const std::string& level) {
    counts[comp][comps.at(comp)->index_of(level)] += 1.0;
  };
  Rng prng(derive_seed(9, streams::profiles));
  for (int s = 0; s < 1000; ++s)
    for (const auto& p : generate_session(prng, cat, 16, s)) {
      bump("team", std::string(p.race == Race::asian ? "asian" : "white") +
                       (p.gender == Gender::female ? "_female" : "_male"));
      bump("founders", p.n_founders() == 1 ? "single" : "two");
      bump("education", p.top_school ? "top" : "common");
      bump("founding_year", std::to_string(p.founding_year));
      bump("n_advantages", std::to_string(p.n_advantages()));
      bump("traction", p.traction.positive ? "positive" : "none");
      bump("category", p.category);
      bump("location", p.location);
      bump("mission", p.mission);
      bump("employees", p.employees);
    }
  double min_p = 1.0;
  std::string worst;
  for (const auto& [name, obs] : counts) {
    const double stat = stats::chi_square_stat(obs, comps.at(name)->weights);
    const double p = stats::chi2_sf(stat, static_cast<double>(obs.size() - 1));
    if (p < min_p) {
      min_p = p;
      worst = name;
    }
  }
  ok = ok && min_p > 0.001;
  detail += ", smallest marginal chi-square p " + fmt(min_p, 3) + " (" + worst + ")";
  return {ok, detail};
}

// 10. Crossing detection: equal medians at 25, different spreads.
Verdict crossing_detection() {
  Rng rng(10);
  std::normal_distribution<double> z;
  std::vector<double> y, g;
  for (int grp = 0; grp <= 1; ++grp)
    for (int i = 0; i < 5000; ++i) {
      y.push_back(std::clamp(25.0 + (grp ? 16.0 : 8.0) * z(rng), 0.0, 100.0));
      g.push_back(grp);
    }
  const auto c = cdf_difference_curve(y, g, unit_grid(0, 100));
  if (c.crossings.empty()) return {false, "no crossing detected"};
  double nearest = c.crossings.front();
  for (double x : c.crossings)
    if (std::abs(x - 25.0) < std::abs(nearest - 25.0)) nearest = x;
  std::string all;
  for (double x : c.crossings) all += (all.empty() ? "" : ", ") + fmt(x, 4);
  return {std::abs(nearest - 25.0) <= 5.0, "crossings at " + all};
}

// 11. Byte-identical pipeline output across runs and thread counts.
Verdict determinism() {
  const auto base = fs::temp_directory_path() / "auditlab_acceptance_determinism";
  fs::remove_all(base);
  const auto run = [&](const std::string& name, unsigned threads) {
    RunConfig rc;
    rc.command = "pipeline";
    rc.seed = 2024;
    rc.out = base / name;
    rc.threads = threads;
    run_pipeline(rc);
    return checksum_tree(rc.out);
  };
  const auto a = run("a", 1), b = run("b", 1), c = run("c", 8);
  const auto ma = read_file_bytes(base / "a" / "manifest.json");
  const bool ok = !a.empty() && a == b && a == c && ma == read_file_bytes(base / "b" / "manifest.json") &&
                  ma == read_file_bytes(base / "c" / "manifest.json");
  std::string diff;
  for (const auto& [rel, sha] : a)
    if (!c.count(rel) || c.at(rel) != sha || !b.count(rel) || b.at(rel) != sha) diff += " " + rel;
  fs::remove_all(base);
  return {ok, std::to_string(a.size()) + " files compared across 2 runs and threads {1, 8}" +
                  (diff.empty() ? "" : "; differing:" + diff)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"heteroskedastic probit recovery", hetprobit_recovery},
      {"Heckman critique demo", heckman_demo},
      {"generated-regressor demo", loo_demo},
      {"LOO mixture recovery", loo_mixture},
      {"FE-OLS dummy-variable oracle", ols_oracle},
      {"gradient and marginal decomposition check", gradient_check},
      {"tracking staying-time fixture", tracking_fixture},
      {"Ivy-scaled ratio fixture", ivy_fixture},
      {"randomization balance", randomization_balance},
      {"crossing detection", crossing_detection},
      {"pipeline determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << v.detail << " ("
              << fmt(seconds_since(t0), 3) << " s)" << std::endl;
  }
  return failures ? 1 : 0;
}
