#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "auditlab/auditlab.hpp"
#include "auditlab/demos.hpp"
#include "auditlab/params.hpp"

namespace auditlab {

inline constexpr const char* kToolName = "auditlab";
inline constexpr const char* kToolVersion = "0.1.0";

namespace fs = std::filesystem;

struct RunConfig {
  std::string command;     // design | simulate | ingest | fit | demo | report | pipeline | verify
  std::string subcommand;  // fit kind or demo kind
  std::optional<std::uint64_t> seed;
  fs::path out = "out";
  std::optional<fs::path> in;  // inputs; defaults to `out`
  std::optional<fs::path> config_path;
  std::optional<fs::path> catalog_path;
  std::vector<std::pair<std::string, std::string>> overrides;  // --set key=value and flag shorthands
  unsigned threads = 0;                                        // 0: hardware concurrency
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::data, "sha256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::data, "cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Files are written under a staging directory and moved into place only when
// the whole command succeeds; a failed command leaves no partial outputs.
class Stage {
 public:
  Stage(fs::path out, std::string name) : out_(std::move(out)) {
    std::replace(name.begin(), name.end(), ' ', '_');
    staging_ = out_ / (".staging-" + name);
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  Stage(const Stage&) = delete;
  Stage& operator=(const Stage&) = delete;
  ~Stage() {
    std::error_code ec;
    if (!committed_) fs::remove_all(staging_, ec);
  }

  void write(const std::string& rel, const std::function<void(std::ostream&)>& body) {
    const auto path = staging_ / rel;
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::data, "cannot write '" + (out_ / rel).string() + "'");
    body(f);
    f.close();
    if (!f) fail(ErrorKind::data, "write failed for '" + (out_ / rel).string() + "'");
    files_.insert(rel);
  }

  void commit() {
    for (const auto& rel : files_) {
      const auto dst = out_ / rel;
      fs::create_directories(dst.parent_path());
      fs::rename(staging_ / rel, dst);
    }
    fs::remove_all(staging_);
    committed_ = true;
  }

  const std::set<std::string>& files() const { return files_; }

 private:
  fs::path out_, staging_;
  std::set<std::string> files_;
  bool committed_ = false;
};

// ---------------------------------------------------------------------------
// Manifest: per-stage seed and config hash, plus a checksum for every file.

inline std::map<std::string, std::string> checksum_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root).generic_string();
    if (rel == "manifest.json" || rel.starts_with(".staging-")) continue;
    out[rel] = sha256_hex(read_file_bytes(entry.path()));
  }
  return out;
}

inline void write_manifest(const fs::path& out, const std::string& stage, std::optional<std::uint64_t> seed,
                           const std::string& config_sha) {
  nlohmann::json stages = nlohmann::json::object();
  const auto path = out / "manifest.json";
  if (fs::exists(path)) {
    try {
      const auto old = nlohmann::json::parse(read_file_bytes(path));
      if (old.contains("stages") && old["stages"].is_object()) stages = old["stages"];
    } catch (const nlohmann::json::exception&) {
      // A corrupt manifest is rebuilt from scratch.
    }
  }
  stages[stage] = {{"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)}, {"config_sha256", config_sha}};

  nlohmann::ordered_json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["stages"] = stages;  // nlohmann::json objects iterate in sorted key order
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  for (const auto& [rel, sha] : checksum_tree(out)) files[rel] = sha;
  m["files"] = files;
  const auto tmp = out / ".manifest.json.tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    f << m.dump(2) << '\n';
    if (!f) fail(ErrorKind::data, "cannot write manifest in '" + out.string() + "'");
  }
  fs::rename(tmp, path);
}

/// Re-hashes every file listed in out/manifest.json; returns a description of
/// each mismatch or missing file (empty when the manifest verifies).
inline std::vector<std::string> verify_manifest(const fs::path& out) {
  const auto path = out / "manifest.json";
  if (!fs::exists(path)) fail(ErrorKind::data, "no manifest.json in '" + out.string() + "'");
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, std::string("manifest.json: ") + e.what());
  }
  std::vector<std::string> problems;
  for (const auto& [rel, sha] : m.at("files").items()) {
    const auto p = out / rel;
    if (!fs::exists(p)) {
      problems.push_back("missing " + rel);
      continue;
    }
    if (sha256_hex(read_file_bytes(p)) != sha.get<std::string>()) problems.push_back("checksum mismatch " + rel);
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Command context.

class Pipeline {
 public:
  explicit Pipeline(RunConfig rc) : rc_(std::move(rc)) {
    params_ = default_params();
    const auto defaults = params_;
    if (rc_.config_path) {
      if (!fs::exists(*rc_.config_path))
        fail(ErrorKind::config, "--config: file not found: '" + rc_.config_path->string() + "'");
      const auto user = KvConfig::load(rc_.config_path->string());
      check_known_keys(user, defaults, "--config " + rc_.config_path->string());
      params_.merge(user);
    }
    KvConfig sets;
    for (const auto& [k, v] : rc_.overrides) sets.set(k, v);
    check_known_keys(sets, defaults, "--set");
    params_.merge(sets);
    if (rc_.catalog_path && !fs::exists(*rc_.catalog_path))
      fail(ErrorKind::config, "--catalog: file not found: '" + rc_.catalog_path->string() + "'");
    threads_ = rc_.threads ? rc_.threads : std::max(1u, std::thread::hardware_concurrency());
    in_ = rc_.in.value_or(rc_.out);
  }

  const KvConfig& params() const { return params_; }
  std::string config_sha() const { return sha256_hex(params_.canonical()); }

  void run() {
    const auto& c = rc_.command;
    if (c == "design") return staged("design", true, [&](Stage& s) { design(s); });
    if (c == "simulate") return simulate_command();
    if (c == "ingest") return staged("ingest", false, [&](Stage& s) { ingest(s); });
    if (c == "fit") return fit_command(rc_.subcommand);
    if (c == "demo") return demo_command(rc_.subcommand);
    if (c == "report") return staged("report", false, [&](Stage& s) { report(s); });
    if (c == "pipeline") return pipeline();
    if (c == "verify") return verify();
    fail(ErrorKind::config, "unknown command '" + c + "'");
  }

 private:
  RunConfig rc_;
  KvConfig params_;
  unsigned threads_ = 1;
  fs::path in_;

  std::uint64_t seed_for(const std::string& what) const {
    if (!rc_.seed) fail(ErrorKind::config, "--seed is required for " + what);
    return *rc_.seed;
  }

  template <class Body>
  void staged(const std::string& name, bool stochastic, Body body) {
    if (stochastic) seed_for(name);
    fs::create_directories(rc_.out);
    {
      Stage s(rc_.out, name);
      body(s);
      s.commit();
    }
    write_manifest(rc_.out, name, stochastic ? rc_.seed : std::nullopt, config_sha());
  }

  fs::path input(const std::string& rel) const {
    auto p = in_ / rel;
    if (fs::exists(p)) return p;
    // Outputs of an earlier stage in the same run land in `out`.
    if (fs::exists(rc_.out / rel)) return rc_.out / rel;
    fail(ErrorKind::data, "missing input '" + p.string() + "'");
  }

  ComponentCatalog catalog() const {
    return rc_.catalog_path ? ComponentCatalog::load(rc_.catalog_path->string()) : ComponentCatalog::defaults();
  }

  // ---- design -------------------------------------------------------------

  void design(Stage& s) {
    const auto seed = seed_for("design");
    const auto cat = catalog();
    const auto dp = design_params(params_);

    std::vector<std::vector<StartupProfile>> sessions(static_cast<std::size_t>(dp.n_investors));
    const auto profile_seed = derive_seed(seed, streams::profiles);
    parallel_for(sessions.size(), threads_, [&](std::size_t i) {
      Rng rng(derive_seed(profile_seed, i));
      sessions[i] = generate_session(rng, cat, dp.n_profiles, static_cast<std::int64_t>(i));
    });
    std::vector<StartupProfile> profiles;
    for (auto& sess : sessions) std::move(sess.begin(), sess.end(), std::back_inserter(profiles));

    auto inv_rng = make_stream(seed, streams::investors);
    const auto investors = generate_investors(inv_rng, dp.campaign_investors, dp.investors_per_fund,
                                              dp.investor_female_share, dp.investor_asian_share, dp.investor_us_share);
    auto camp_rng = make_stream(seed, streams::campaign);
    const auto schedule = schedule_campaign(plan_campaign(camp_rng, investors, cat.names, dp.campaign),
                                            dp.min_gap_days, dp.window_days);
    if (const auto problems = check_schedule(schedule); !problems.empty())
      fail(ErrorKind::numeric, "generated schedule violates its constraints: " + problems.front());

    s.write("profiles.csv", [&](std::ostream& o) { write_profiles_csv(o, profiles); });
    s.write("investors.csv", [&](std::ostream& o) { write_investors_csv(o, investors); });
    s.write("schedule.csv", [&](std::ostream& o) { write_schedule_csv(o, schedule); });
  }

  // ---- simulate -----------------------------------------------------------

  void simulate_command() {
    seed_for("simulate");
    const bool have_design = fs::exists(in_ / "profiles.csv") || fs::exists(rc_.out / "profiles.csv");
    if (!have_design) {
      if (rc_.in && *rc_.in != rc_.out)
        fail(ErrorKind::data, "missing input '" + (in_ / "profiles.csv").string() + "'");
      staged("design", true, [&](Stage& s) { design(s); });
    }
    staged("simulate", true, [&](Stage& s) { simulate(s); });
  }

  void simulate(Stage& s) {
    const auto seed = seed_for("simulate");
    const auto cat = catalog();
    const auto dp = design_params(params_);
    const auto profiles = read_profiles_csv(csv::read_file(input("profiles.csv").string()), cat.benchmark_year);
    const auto schedule = read_schedule_csv(csv::read_file(input("schedule.csv").string()), dp.min_gap_days);

    std::map<std::int64_t, EvaluationSession> by_investor;
    for (const auto& p : profiles) {
      auto& sess = by_investor[p.investor_id];
      sess.investor_id = p.investor_id;
      sess.profiles.push_back(p);
    }
    std::vector<EvaluationSession> sessions;
    for (auto& [id, sess] : by_investor) {
      std::sort(sess.profiles.begin(), sess.profiles.end(),
                [](const StartupProfile& a, const StartupProfile& b) { return a.order_index < b.order_index; });
      sessions.push_back(std::move(sess));
    }
    const auto eval = eval_params(params_);
    auto eval_rng = make_stream(seed, streams::evaluations);
    const auto records = simulate_evaluations(eval_rng, sessions, eval, cat.benchmark_year);

    const auto cb = callback_params(params_);
    auto cb_rng = make_stream(seed, streams::callbacks);
    const auto opens = cb.upper_threshold ? simulate_two_threshold_callbacks(cb_rng, schedule.emails, cb)
                                          : simulate_callbacks(cb_rng, schedule.emails, cb);
    const auto timing = timing_params(params_);
    auto ev_rng = make_stream(seed, streams::events);
    const auto emitted = emit_event_log(ev_rng, schedule.emails, opens, timing);

    // Dictator game: every evaluation participant sees one random founder.
    auto don_rng = make_stream(seed, streams::donations);
    std::bernoulli_distribution fem(dp.investor_female_share), asi(dp.investor_asian_share), coin(0.5);
    std::vector<Investor> participants;
    std::vector<Cell> shown;
    for (const auto& sess : sessions) {
      Investor inv;
      inv.investor_id = sess.investor_id;
      inv.fund_id = sess.investor_id;
      inv.female = fem(don_rng);
      inv.asian = asi(don_rng);
      participants.push_back(inv);
      Cell c;
      c.female = coin(don_rng);
      c.asian = coin(don_rng);
      shown.push_back(c);
    }
    const auto donations = simulate_donations(don_rng, participants, shown, donation_params(params_));

    s.write("evaluations.csv", [&](std::ostream& o) { write_evaluations_csv(o, records); });
    s.write("events.jsonl", [&](std::ostream& o) { write_event_log_jsonl(o, emitted.log); });
    s.write("donations.csv", [&](std::ostream& o) {
      csv::Writer w(o);
      w.row({"investor_id", "female_investor", "asian_investor", "female_founder", "asian_founder", "donation"});
      for (std::size_t i = 0; i < participants.size(); ++i)
        w.row({std::to_string(participants[i].investor_id), participants[i].female ? "1" : "0",
               participants[i].asian ? "1" : "0", shown[i].female ? "1" : "0", shown[i].asian ? "1" : "0",
               csv::format_double(donations[i])});
    });
    s.write("truth.csv", [&](std::ostream& o) { write_truth(o, records, opens, emitted); });
  }

  void write_truth(std::ostream& o, const std::vector<EvaluationRecord>& records, const std::vector<bool>& opens,
                   const EmittedLog& emitted) const {
    csv::Writer w(o);
    w.row({"parameter", "value"});
    for (const auto& [k, v] : params_.values())
      if (k.starts_with("eval.") || k.starts_with("callback.") || k.starts_with("events.") || k.starts_with("donation."))
        w.row({k, v});
    // Realized investor types, one row per (investor, slope).
    std::map<std::string, std::pair<std::size_t, std::size_t>> anti_counts;  // name -> (anti, total)
    std::set<std::int64_t> seen;
    for (const auto& r : records) {
      if (!seen.insert(r.investor_id).second) continue;
      for (const auto& [key, beta] : r.truth) {
        w.row({"investor." + std::to_string(r.investor_id) + "." + key, csv::format_double(beta)});
        if (!key.ends_with(".q1")) continue;
        const auto name = key.substr(0, key.size() - 3);
        const auto& mix = eval_params(params_).slopes.at(name);
        auto& c = anti_counts[name];
        c.first += beta == mix.effect_anti[0] && mix.effect_anti[0] != mix.effect_pro[0];
        ++c.second;
      }
    }
    for (const auto& [name, c] : anti_counts)
      w.row({"realized." + name + ".share_anti",
             csv::format_double(static_cast<double>(c.first) / static_cast<double>(c.second))});
    std::size_t n_open = 0;
    for (bool b : opens) n_open += b;
    w.row({"realized.open_rate", csv::format_double(opens.empty() ? 0.0 : static_cast<double>(n_open) /
                                                                              static_cast<double>(opens.size()))});
    std::size_t clicks = 0, replies = 0;
    for (const auto& [id, t] : emitted.truth) {
      clicks += t.clicked;
      replies += t.replied;
    }
    w.row({"realized.clicks", std::to_string(clicks)});
    w.row({"realized.replies", std::to_string(replies)});
  }

  // ---- ingest -------------------------------------------------------------

  static std::string panel_csv(const std::string& name) {
    return name == "eval" ? "panel.csv" : name + "_panel.csv";
  }
  static std::string panel_meta(const std::string& name) {
    return name == "eval" ? "panel.meta" : name + "_panel.meta";
  }

  std::vector<std::string> panel_names() const {
    std::set<std::string> names;
    for (const auto& [k, v] : params_.values()) {
      if (!k.starts_with("panel.") || !k.ends_with(".outcome")) continue;
      names.insert(k.substr(6, k.size() - 6 - 8));
    }
    return {names.begin(), names.end()};
  }

  std::vector<EvaluationRecord> coded_records(const ComponentCatalog& cat) const {
    const auto profiles = read_profiles_csv(csv::read_file(input("profiles.csv").string()), cat.benchmark_year);
    std::map<std::int64_t, const StartupProfile*> by_id;
    for (const auto& p : profiles) by_id[p.profile_id] = &p;
    auto records = read_evaluations_csv(csv::read_file(input("evaluations.csv").string()));
    // Treatment columns are recoded from the profile attributes, which are
    // the authoritative record of what each investor saw.
    for (auto& r : records) {
      const auto it = by_id.find(r.profile_id);
      if (it == by_id.end()) fail(ErrorKind::data, "evaluation refers to unknown profile_id " + std::to_string(r.profile_id));
      r.treatments = code_profile(*it->second, cat.benchmark_year);
    }
    return records;
  }

  void ingest(Stage& s) {
    const auto cat = catalog();
    const auto dp = design_params(params_);
    const auto timing = timing_params(params_);
    const auto records = coded_records(cat);
    const auto schedule = read_schedule_csv(csv::read_file(input("schedule.csv").string()), dp.min_gap_days);
    std::ifstream ev(input("events.jsonl"), std::ios::binary);
    const auto outcomes = parse_events(read_event_log_jsonl(ev), timing.download_rate_bytes_per_s);

    std::map<std::string, Frame> frames;
    frames["eval"] = to_frame(records);
    frames["email"] = email_frame(schedule.emails, outcomes);
    const double wins = params_.get_double("panel.email.winsorize_staying", 0.0);
    if (wins > 0.0) frames["email"].add("staying_seconds", winsorize(frames["email"].col("staying_seconds"), wins));
    frames["donation"] = to_frame(csv::read_file(input("donations.csv").string()));

    for (const auto& name : panel_names()) {
      const auto source = params_.get_string("panel." + name + ".source", name);
      const auto it = frames.find(source);
      if (it == frames.end())
        fail(ErrorKind::config, "panel." + name + ".source: unknown source '" + source + "' (eval, email, donation)");
      const auto panel = build_panel(it->second, PanelSpec::from_config(params_, "panel." + name));
      s.write(panel_csv(name), [&](std::ostream& o) { write_panel_csv(o, panel); });
      s.write(panel_meta(name), [&](std::ostream& o) {
        o << "panel = " << name << '\n' << "source = " << source << '\n';
        write_panel_meta(o, panel);
      });
    }
    s.write("email_outcomes.csv", [&](std::ostream& o) {
      csv::Writer w(o);
      w.row({"email_id", "opened", "staying_seconds", "open_count", "clicked", "replied"});
      for (const auto& e : schedule.emails) {
        const auto it = outcomes.find(e.email_id);
        const EmailOutcome oc = it == outcomes.end() ? EmailOutcome{} : it->second;
        w.row({std::to_string(e.email_id), oc.opened ? "1" : "0", csv::format_double(oc.staying_seconds),
               std::to_string(oc.open_count), oc.clicked ? "1" : "0", oc.replied ? "1" : "0"});
      }
    });
  }

  // ---- fit ----------------------------------------------------------------

  Panel load_panel(const std::string& name) const {
    return read_panel_csv(csv::read_file(input(panel_csv(name)).string()));
  }

  static std::vector<std::pair<std::string, std::string>> ratio_extras(const FitResult& fit) {
    std::vector<std::pair<std::string, std::string>> extra;
    if (!fit.has("ivy") || std::abs(fit.estimate("ivy")) < 1e-12) return extra;
    for (const auto& t : fit.names)
      if (t != "ivy") extra.emplace_back("ivy_scaled." + t, csv::format_double(ivy_scaled_ratio(fit, {t}, "ivy")));
    return extra;
  }

  void fit_command(const std::string& kind) {
    static const std::set<std::string> kinds = {"ols", "hetprobit", "two-threshold", "loo", "curve"};
    if (!kinds.count(kind))
      fail(ErrorKind::config, "fit: unknown estimator '" + kind + "' (ols, hetprobit, two-threshold, loo, curve)");
    staged("fit " + kind, kind == "loo", [&](Stage& s) { fit(s, kind); });
  }

  void fit(Stage& s, const std::string& kind) {
    const auto dir = "fit/" + kind + "/";
    if (kind == "ols") {
      for (const auto& name : params_.get_list("fit.ols.panels")) {
        const auto panel = load_panel(name);
        const auto r = fit_fe_ols(panel);
        auto extra = ratio_extras(r);
        extra.insert(extra.begin(), {"panel", name});
        s.write(dir + name + "/fit.csv", [&](std::ostream& o) { write_fit_csv(o, r); });
        s.write(dir + name + "/fit.meta", [&](std::ostream& o) { write_fit_meta(o, r, extra); });
      }
    } else if (kind == "hetprobit") {
      const auto name = params_.get_string("fit.hetprobit.panel", "email");
      const auto r = fit_het_probit(load_panel(name), params_.get_string("fit.hetprobit.group", "female"));
      const auto f = csv::format_double;
      s.write(dir + "fit.csv", [&](std::ostream& o) { write_fit_csv(o, r.fit); });
      s.write(dir + "fit.meta", [&](std::ostream& o) {
        write_fit_meta(o, r.fit,
                       {{"panel", name},
                        {"c_prime", f(r.c_prime)},
                        {"sigma_ratio", f(r.sigma_ratio)},
                        {"sigma_ratio_se", f(r.sigma_ratio_se)},
                        {"wald_sigma_ratio_eq_1", f(r.wald.stat)},
                        {"wald_p", f(r.wald.p_value)},
                        {"lr_vs_probit", f(r.lr.stat)},
                        {"lr_p", f(r.lr.p_value)},
                        {"marginal_total", f(r.marginals.total)},
                        {"marginal_level", f(r.marginals.level)},
                        {"marginal_variance", f(r.marginals.variance)},
                        {"iterations", std::to_string(r.iterations)}});
      });
    } else if (kind == "two-threshold") {
      const auto name = params_.get_string("fit.two_threshold.panel", "email");
      const auto r = fit_two_threshold(load_panel(name), params_.get_string("fit.two_threshold.group", "female"));
      const auto f = csv::format_double;
      s.write(dir + "fit.csv", [&](std::ostream& o) { write_fit_csv(o, r.fit); });
      s.write(dir + "fit.meta", [&](std::ostream& o) {
        write_fit_meta(o, r.fit,
                       {{"panel", name},
                        {"c1", f(r.c1)},
                        {"c2", f(r.c2)},
                        {"c1_se", f(r.c1_se)},
                        {"c2_se", f(r.c2_se)},
                        {"flat_upper_warning", r.flat_upper ? "true" : "false"},
                        {"starts_converged", std::to_string(r.starts_converged)}});
      });
    } else if (kind == "loo") {
      const auto cat = catalog();
      const auto records = coded_records(cat);
      LooOptions opt;
      opt.classify_on = static_cast<int>(params_.get_int("fit.loo.classify_on", opt.classify_on));
      opt.outcomes = int_list(params_, "fit.loo.outcomes");
      opt.bootstrap = static_cast<int>(params_.get_int("fit.loo.bootstrap", opt.bootstrap));
      opt.seed = seed_for("fit loo");
      opt.threads = threads_;
      if (opt.classify_on < 1 || opt.classify_on > kQuestions)
        fail(ErrorKind::config, "fit.loo.classify_on must lie in 1..5");
      const auto treatment = params_.get_string("fit.loo.treatment", "female");
      const auto r = loo_pooled_fit(records, treatment, opt);
      const auto fit = to_fit_result(r, records.size());
      s.write(dir + "fit.csv", [&](std::ostream& o) { write_fit_csv(o, fit); });
      s.write(dir + "fit.meta", [&](std::ostream& o) {
        write_fit_meta(o, fit,
                       {{"treatment", treatment},
                        {"classify_on", "q" + std::to_string(opt.classify_on)},
                        {"share_dropped", csv::format_double(r.share_dropped)},
                        {"rows_undefined_slope", std::to_string(r.slopes.n_undefined)},
                        {"rows_zero_slope", std::to_string(r.slopes.n_zero)},
                        {"bootstrap_seed", std::to_string(opt.seed)}});
      });
    } else {
      const auto cat = catalog();
      PanelSpec spec;
      spec.outcome = params_.get_string("fit.curve.outcome", "q3");
      const auto group = params_.get_string("fit.curve.group", "female");
      spec.terms = {group};
      const auto panel = build_panel(to_frame(coded_records(cat)), spec);
      const auto grid = unit_grid(params_.get_double("fit.curve.grid_lo", 0.0),
                                  params_.get_double("fit.curve.grid_hi", 100.0),
                                  params_.get_double("fit.curve.grid_step", 1.0));
      const auto curve = cdf_difference_curve(panel, group, grid);
      s.write(dir + "curve.csv", [&](std::ostream& o) { write_curve_csv(o, curve); });
      s.write(dir + "curve.meta", [&](std::ostream& o) {
        o << "outcome = " << spec.outcome << '\n' << "group = " << group << '\n' << "n = " << panel.n_rows() << '\n'
          << "se_kind = robust\n" << "crossings =";
        for (std::size_t i = 0; i < curve.crossings.size(); ++i)
          o << (i ? "," : " ") << csv::format_double(curve.crossings[i]);
        o << '\n';
      });
    }
  }

  // ---- demo ---------------------------------------------------------------

  void demo_command(const std::string& kind) {
    const std::string k = kind.empty() ? "all" : kind;
    if (k != "all" && k != "heckman" && k != "loo")
      fail(ErrorKind::config, "demo: unknown demonstration '" + kind + "' (heckman, loo)");
    staged("demo " + k, true, [&](Stage& s) { demo(s, k); });
  }

  void demo(Stage& s, const std::string& kind) {
    const auto seed = seed_for("demo");
    std::ostringstream report;
    if (kind == "all" || kind == "heckman") {
      auto p = heckman_params(params_);
      p.seed = seed;
      p.threads = threads_;
      const auto r = run_heckman_demo(p);
      write_heckman_report(report, r);
      s.write("demo/heckman.csv", [&](std::ostream& o) { write_heckman_csv(o, r); });
    }
    if (kind == "all" || kind == "loo") {
      auto p = loo_demo_params(params_);
      p.seed = seed;
      p.threads = threads_;
      const auto r = run_loo_demo(p, catalog());
      write_loo_demo_report(report, r);
      s.write("demo/loo.csv", [&](std::ostream& o) { write_loo_demo_csv(o, r); });
    }
    s.write("demo/" + kind + ".txt", [&](std::ostream& o) { o << report.str(); });
  }

  // ---- report -------------------------------------------------------------

  static void table(std::ostream& o, const csv::Table& t) {
    std::vector<std::size_t> width(t.header.size());
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      width[c] = t.header[c].size();
      for (const auto& r : t.rows) width[c] = std::max(width[c], r[c].size());
    }
    const auto line = [&](const std::vector<std::string>& cells) {
      o << "  ";
      for (std::size_t c = 0; c < cells.size(); ++c)
        o << cells[c] << std::string(width[c] - cells[c].size() + (c + 1 < cells.size() ? 2 : 0), ' ');
      o << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
  }

  void report(Stage& s) {
    std::vector<fs::path> metas, fits;
    const auto collect = [&](const fs::path& root) {
      if (!fs::exists(root)) return;
      for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), in_).generic_string();
        if (rel.starts_with(".staging-")) continue;
        const auto name = e.path().filename().string();
        if (name.ends_with("panel.meta")) metas.push_back(e.path());
        if (name == "fit.meta" || name == "curve.meta") fits.push_back(e.path());
      }
    };
    for (const auto& e : fs::directory_iterator(in_))
      if (e.is_regular_file() && e.path().filename().string().ends_with("panel.meta")) metas.push_back(e.path());
    collect(in_ / "fit");
    std::sort(metas.begin(), metas.end());
    std::sort(fits.begin(), fits.end());
    if (metas.empty() && fits.empty()) fail(ErrorKind::data, "report: no panels or fits found in '" + in_.string() + "'");

    s.write("report.txt", [&](std::ostream& o) {
      o << kToolName << " " << kToolVersion << " report\n\n";
      if (!metas.empty()) o << "Panels\n";
      for (const auto& m : metas) {
        o << "- " << m.filename().string() << '\n';
        std::istringstream in(read_file_bytes(m));
        for (std::string l; std::getline(in, l);) o << "    " << l << '\n';
      }
      for (const auto& m : fits) {
        const auto dir = m.parent_path();
        o << "\nFit " << fs::relative(dir, in_ / "fit").generic_string() << '\n';
        const auto data = dir / (m.filename() == "curve.meta" ? "curve.csv" : "fit.csv");
        if (m.filename() == "curve.meta") {
          std::istringstream in(read_file_bytes(m));
          for (std::string l; std::getline(in, l);) o << "  " << l << '\n';
          continue;  // the curve itself is a data file for plotting
        }
        if (fs::exists(data)) table(o, csv::read_file(data.string()));
        std::istringstream in(read_file_bytes(m));
        for (std::string l; std::getline(in, l);)
          if (!l.starts_with("trace")) o << "  " << l << '\n';
      }
    });
  }

  // ---- pipeline -----------------------------------------------------------

  void pipeline() {
    seed_for("pipeline");
    in_ = rc_.out;
    staged("design", true, [&](Stage& s) { design(s); });
    staged("simulate", true, [&](Stage& s) { simulate(s); });
    staged("ingest", false, [&](Stage& s) { ingest(s); });
    for (const auto& kind : params_.get_list("pipeline.fits")) fit_command(kind);
    staged("report", false, [&](Stage& s) { report(s); });
  }

  void verify() {
    const auto problems = verify_manifest(rc_.out);
    if (!problems.empty()) {
      std::string all;
      for (const auto& p : problems) all += (all.empty() ? "" : "; ") + p;
      fail(ErrorKind::data, "manifest verification failed: " + all);
    }
  }
};

inline void run_pipeline(const RunConfig& rc) { Pipeline(rc).run(); }

}  // namespace auditlab
