#pragma once

// Default run parameters. Kept byte-identical to data/defaults.conf (checked by
// the config unit tests).

namespace auditlab {

inline constexpr const char* kDefaultParamsText = R"DEFAULTS(# Default parameters for every stage. Values here are what a run uses unless
# overridden by --config or --set. Lists use '|'; per-question lists hold
# q1|q2|q3|q4|q5 (q4 is in tenths of the relative investment, 0..20).
defaults.version = 1

# Evaluation sessions and the email campaign.
design.n_investors = 200
design.n_profiles = 16
design.campaign_investors = 2000
design.investors_per_fund = 2
design.investor_female_share = 0.2
design.investor_asian_share = 0.2
design.investor_us_share = 0.7
design.n_ideas = 8
design.max_per_investor = 5
design.mixed_ivy_share = 0.25
design.min_gap_days = 14
design.window_days = 0

# Evaluation DGP: Y = base + alpha_i + X beta_i + eta_i + v, clipped to the scale.
eval.base = 50|50|50|10|50
eval.alpha = 10|10|10|2|10
eval.eta = 0|0|0|0|0
eval.noise = 5|5|5|1|5
eval.skip = 0|0.02|0|0.02|0
# Error correlations as qi:qj:r entries.
eval.error_corr = 1:3:0.5
eval.second_half_shift = -2|-2|-2|0|0
eval.response_median_seconds = 30
eval.response_log_sd = 0.8
eval.exact_shares = true
# Slope mixtures: a share of investors is anti, the rest pro.
eval.slopes = female
eval.slopes.female.share_anti = 0.42
eval.slopes.female.anti = -16.40|-16.40|-16.40|-3.28|0
eval.slopes.female.pro = 7.93|7.93|7.93|1.59|0

# Callback (email open) DGP, single threshold unless upper_threshold is set.
callback.group = female
callback.threshold = 1.0
callback.quality_level = 0.8
callback.beta_ivy = 0.5
callback.beta_advantage = 0.3
callback.beta_other_bit = 0
callback.gamma = 0.1
callback.omega = -0.2
callback.sigma_fund = 0.3

# Tracking-pixel event emission.
events.download_rate = 10240
events.read_median_seconds = 10.33
events.read_log_sd = 1.0
events.open_delay_mean_hours = 18
events.click_prob = 0.05
events.reply_prob = 0.02
events.reopen_prob = 0
events.campaign_start = 2020-03-02T09:00:00Z

# Dictator-game donations in dollars, censored to [0, 15].
donation.base = 11.10
donation.female_founder = 0
donation.asian_founder = 0
donation.female_x_asian_founder = 0
donation.female_founder_x_female_investor = 0
donation.asian_founder_x_asian_investor = 0
donation.female_investor = 0
donation.asian_investor = 0
donation.noise_sd = 4

# Analysis panels built by `ingest`.
panel.eval.outcome = q1
panel.eval.terms = female,asian,second_half,female:second_half
panel.eval.fe = investor_id
panel.eval.cluster = investor_id
panel.email.outcome = opened
panel.email.terms = female,asian,ivy,advantage
panel.email.cluster = investor_id
panel.email.winsorize_staying = 0
panel.donation.outcome = donation
panel.donation.terms = female_founder,asian_founder,female_founder:female_investor,asian_founder:asian_investor,female_investor,asian_investor
panel.donation.cluster = investor_id

# Estimators.
fit.ols.panels = eval|email|donation
fit.hetprobit.panel = email
fit.hetprobit.group = female
fit.two_threshold.panel = email
fit.two_threshold.group = female
fit.loo.treatment = female
fit.loo.classify_on = 3
fit.loo.outcomes = 1|2|3|4
fit.loo.bootstrap = 1000
fit.curve.outcome = q3
fit.curve.group = female
fit.curve.grid_lo = 0
fit.curve.grid_hi = 100
fit.curve.grid_step = 1

# Canned demonstrations.
demo.heckman.replications = 100
demo.heckman.n = 10000
demo.heckman.sigma_ratio = 1.5
demo.heckman.low_level = -1
demo.heckman.high_level = 1
demo.heckman.beta_ivy = 0.5
demo.heckman.beta_advantage = 0.3
demo.loo.replications = 100
demo.loo.investors = 200
demo.loo.profiles = 16
demo.loo.j_sweep = 8|16|64
demo.loo.error_corr = 0.8
demo.loo.classify_on = 3
demo.loo.outcome = 1

# Stages run by `pipeline`.
pipeline.fits = ols|hetprobit|loo|curve
)DEFAULTS";

}  // namespace auditlab
