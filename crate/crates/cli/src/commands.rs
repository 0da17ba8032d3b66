//! One function per subcommand; each returns in-memory artifacts.

use std::f64::consts::PI;
use std::path::Path;

use coexist_core::numerics::{fit_power_law, q_inverse};
use coexist_core::propagation::{attenuation, AntennaPattern, PathLossModel};
use coexist_core::protection_multi::{
    binomial_interval, exceedance, mean_and_variance, optimize_beta, outage_probability, protected_area_m2,
    sample_aggregate, sample_aggregate_hybrid, solve_main_side, solve_optimal_profile,
    solve_radar_blind, AggregateModel, BetaSearch, DeploymentField, PolicyExport, ProtectionProfile, SamplerOptions,
    SharingPolicy,
};
use coexist_core::protection_single::{
    inr_vs_performance_drop, max_tolerable_interference, protection_distance, single_user_policy,
    InterferenceBudget, SecondaryUser,
};
use coexist_core::radar::{
    max_range, noise_power_w, snr_required_albersheim, snr_required_noncoherent, RadarSystem, RocPoint,
};
use coexist_core::units::{db_to_linear, linear_to_db, watts_to_dbm};
use coexist_core::wifi::{average_throughput, throughput_vs_time, InterferenceMode, LinkScenario, McsTable};
use serde_json::{json, Value};

use crate::config::{Config, LinkPolicy, McMethod, PathLossConfig, PolicyKind};
use crate::error::{CliError, CliResult};
use crate::output::{Artifacts, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Detect,
    Imax,
    ProtectSingle,
    ProtectMulti,
    Throughput,
    ValidateMc,
    FitPathloss,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Detect => "detect",
            Command::Imax => "imax",
            Command::ProtectSingle => "protect-single",
            Command::ProtectMulti => "protect-multi",
            Command::Throughput => "throughput",
            Command::ValidateMc => "validate-mc",
            Command::FitPathloss => "fit-pathloss",
        }
    }
}

/// Resolved view of the config with lazy access to each section.
struct Ctx<'a> {
    cfg: &'a Config,
    base: &'a Path,
    command: &'static str,
}

impl Ctx<'_> {
    fn missing(&self, section: &'static str) -> CliError {
        CliError::MissingSection {
            command: self.command,
            section,
        }
    }

    fn radar(&self) -> CliResult<(RadarSystem, AntennaPattern)> {
        let r = self.cfg.radar.as_ref().ok_or_else(|| self.missing("radar"))?;
        Ok((r.resolve()?, r.pattern()?))
    }

    fn roc(&self) -> CliResult<(RocPoint, RocPoint)> {
        self.cfg.roc.as_ref().ok_or_else(|| self.missing("roc"))?.resolve()
    }

    fn su(&self) -> CliResult<SecondaryUser> {
        self.cfg.su.as_ref().ok_or_else(|| self.missing("su"))?.resolve()
    }

    fn pathloss(&self) -> CliResult<PathLossModel> {
        self.cfg
            .pathloss
            .as_ref()
            .ok_or_else(|| self.missing("pathloss"))?
            .resolve(self.base)
    }

    fn field(&self) -> CliResult<DeploymentField> {
        self.cfg.field.as_ref().ok_or_else(|| self.missing("field"))?.resolve()
    }

    /// Baseline operating SNR and the SNR required at the degraded point (linear).
    fn snr_pair(&self) -> CliResult<(f64, f64)> {
        let (base, degraded) = self.roc()?;
        let roc = self.cfg.roc.as_ref().expect("checked above");
        let baseline = match roc.baseline_snr_db {
            Some(db) => db_to_linear(db),
            None => snr_required_albersheim(&base)?,
        };
        Ok((baseline, snr_required_albersheim(&degraded)?))
    }

    fn budget(&self, radar: &RadarSystem) -> CliResult<InterferenceBudget> {
        let (baseline, required) = self.snr_pair()?;
        Ok(max_tolerable_interference(radar, baseline, required)?)
    }
}

pub fn run(command: Command, cfg: &Config, base: &Path, policy_override: Option<PolicyKind>) -> CliResult<Artifacts> {
    let ctx = Ctx {
        cfg,
        base,
        command: command.name(),
    };
    let (results, tables) = match command {
        Command::Detect => detect(&ctx)?,
        Command::Imax => imax(&ctx)?,
        Command::ProtectSingle => protect_single(&ctx)?,
        Command::ProtectMulti => protect_multi(&ctx, policy_override.unwrap_or(cfg.policy.kind))?,
        Command::Throughput => throughput(&ctx)?,
        Command::ValidateMc => validate_mc(&ctx, policy_override.unwrap_or(cfg.policy.kind))?,
        Command::FitPathloss => fit_pathloss(&ctx)?,
    };
    let mut resolved = serde_json::to_value(cfg).expect("config serialises");
    if let (Some(kind), Value::Object(map)) = (policy_override, &mut resolved) {
        if let Some(Value::Object(p)) = map.get_mut("policy") {
            p.insert("kind".into(), serde_json::to_value(kind).expect("serialises"));
        }
    }
    let summary = json!({
        "command": command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.mc.seed,
        "config": resolved,
        "results": results,
    });
    Ok(Artifacts { summary, tables })
}

type Produced = (Value, Vec<Table>);

fn detect(ctx: &Ctx) -> CliResult<Produced> {
    let (radar, _) = ctx.radar()?;
    let (base, degraded) = ctx.roc()?;
    let rcs = ctx.cfg.roc.as_ref().expect("checked").target_rcs_m2;
    let m = radar.integrated_pulses().round().max(1.0) as u32;
    let point = |roc: &RocPoint| -> CliResult<Value> {
        Ok(json!({
            "pd": roc.pd,
            "pfa": roc.pfa,
            "snr_required_db": linear_to_db(snr_required_albersheim(roc)?),
            "snr_per_pulse_db": snr_required_noncoherent(roc, m)?,
            "max_range_m": max_range(&radar, roc, rcs)?,
        }))
    };
    let results = json!({
        "noise_power_w": noise_power_w(&radar),
        "noise_power_dbm": watts_to_dbm(noise_power_w(&radar)),
        "integrated_pulses": radar.integrated_pulses(),
        "duty_cycle": radar.duty_cycle(),
        "target_rcs_m2": rcs,
        "baseline": point(&base)?,
        "degraded": point(&degraded)?,
    });
    let mut t = Table::new(
        "detect",
        &["pd", "pfa", "snr_required_db", "snr_per_pulse_db", "max_range_m"],
    );
    for pd in ctx.cfg.sweeps.pd.points("sweeps.pd")? {
        let roc = RocPoint::new(pd, base.pfa)?;
        t.push(vec![
            pd.into(),
            base.pfa.into(),
            linear_to_db(snr_required_albersheim(&roc)?).into(),
            snr_required_noncoherent(&roc, m)?.into(),
            max_range(&radar, &roc, rcs)?.into(),
        ]);
    }
    Ok((results, vec![t]))
}

fn imax(ctx: &Ctx) -> CliResult<Produced> {
    let (radar, _) = ctx.radar()?;
    let (base, _) = ctx.roc()?;
    let (baseline, required) = ctx.snr_pair()?;
    let b = max_tolerable_interference(&radar, baseline, required)?;
    let noise_dbm = watts_to_dbm(noise_power_w(&radar));
    let results = json!({
        "baseline_snr_db": linear_to_db(baseline),
        "required_snr_db": linear_to_db(required),
        "noise_power_dbm": noise_dbm,
        "inr_db": b.inr_db,
        "i_max_w": b.i_max_w,
        "i_max_dbm": watts_to_dbm(b.i_max_w),
        "admits_interference": b.admits_interference(),
    });
    let drops = ctx.cfg.sweeps.pd_drop.points("sweeps.pd_drop")?;
    let mut t = Table::new("imax", &["pd_drop", "inr_db", "i_max_dbm"]);
    for (drop, inr_db) in inr_vs_performance_drop(&radar, baseline, base.pd, base.pfa, &drops)? {
        t.push(vec![drop.into(), inr_db.into(), (inr_db + noise_dbm).into()]);
    }
    Ok((results, vec![t]))
}

fn protect_single(ctx: &Ctx) -> CliResult<Produced> {
    let (radar, pattern) = ctx.radar()?;
    let su = ctx.su()?;
    let model = ctx.pathloss()?;
    let budget = ctx.budget(&radar)?;
    let bw = radar.if_bandwidth_hz;
    let d = |theta: f64| protection_distance(&su, &pattern, &model, &budget, theta, bw);
    let mut t = Table::new("protect_single", &["theta_deg", "gain_dbi", "distance_m"]);
    for theta in ctx.cfg.sweeps.theta_deg.points("sweeps.theta_deg")? {
        t.push(vec![theta.into(), pattern.gain_dbi(theta)?.into(), d(theta)?.into()]);
    }
    let mut results = json!({
        "fdr": su.fdr(bw)?,
        "fdr_db": linear_to_db(su.fdr(bw)?),
        "i_max_w": budget.i_max_w,
        "inr_db": budget.inr_db,
        "three_db_beamwidth_deg": pattern.three_db_beamwidth_deg(),
        "boresight_distance_m": d(0.0)?,
        "side_lobe_distance_m": d(180.0)?,
    });
    if model.power_law_params().is_some() && budget.admits_interference() {
        let policy = single_user_policy(&su, &pattern, &model, &budget, bw)?;
        results["policy"] = serde_json::to_value(&policy).expect("serialises");
    }
    Ok((results, vec![t]))
}

fn aggregate_model(ctx: &Ctx) -> CliResult<(RadarSystem, AggregateModel, InterferenceBudget)> {
    let (radar, pattern) = ctx.radar()?;
    let su = ctx.su()?;
    let model = ctx.pathloss()?;
    let field = ctx.field()?;
    let budget = ctx.budget(&radar)?;
    let m = AggregateModel::new(field, &su, pattern, &model, su.fdr(radar.if_bandwidth_hz)?)?;
    Ok((radar, m, budget))
}

fn lobe_width_rad(ctx: &Ctx, pattern: &AntennaPattern) -> f64 {
    ctx.cfg
        .policy
        .lobe_width_deg
        .unwrap_or(2.0 * pattern.theta_r_deg)
        .to_radians()
}

/// Solve the requested policy; main-side returns its β search when β is free.
fn solve(ctx: &Ctx, kind: PolicyKind, m: &AggregateModel, i_max: f64) -> CliResult<(SharingPolicy, Option<BetaSearch>)> {
    Ok(match kind {
        PolicyKind::Optimal => (solve_optimal_profile(m, i_max)?, None),
        PolicyKind::RadarBlind => (solve_radar_blind(m, i_max)?, None),
        PolicyKind::MainSide => {
            let w = lobe_width_rad(ctx, &m.pattern);
            match ctx.cfg.policy.beta {
                Some(beta) => (solve_main_side(m, i_max, beta, w)?, None),
                None => {
                    let grid = ctx.cfg.policy.beta_grid.points("policy.beta_grid")?;
                    let s = optimize_beta(m, i_max, w, &grid)?;
                    (s.policy.clone(), Some(s))
                }
            }
        }
    })
}

fn extent(policy: &SharingPolicy, pattern: &AntennaPattern) -> (f64, f64) {
    let p = policy.profile(pattern);
    (p.min_distance_on(0.0, 2.0 * PI), p.max_distance_m())
}

fn protect_multi(ctx: &Ctx, kind: PolicyKind) -> CliResult<Produced> {
    let (_, m, budget) = aggregate_model(ctx)?;
    if !budget.admits_interference() {
        return Err(CliError::Compute(coexist_core::Error::Domain {
            op: "protect-multi",
            detail: "baseline SNR leaves no interference budget".into(),
        }));
    }
    let i_max = budget.i_max_w;
    let (policy, search) = solve(ctx, kind, &m, i_max)?;
    let export = PolicyExport::new(&policy, &m, ctx.cfg.policy.n_azimuths);
    let stats = m.campbell_stats(&policy.profile(&m.pattern));
    let (d_min, d_max) = extent(&policy, &m.pattern);

    let mut profile = Table::new("profile", &["theta_deg", "distance_m"]);
    for p in &export.profile {
        profile.push(vec![p.theta_deg.into(), p.distance_m.into()]);
    }
    let mut tables = vec![profile];
    if let Some(s) = &search {
        let mut t = Table::new("beta_search", &["beta", "area_m2"]);
        for &(beta, area) in &s.curve {
            t.push(vec![beta.into(), area.into()]);
        }
        tables.push(t);
    }
    if let Some(grid) = &ctx.cfg.sweeps.density_per_m2 {
        let mut t = Table::new("density_sweep", &["density_per_m2", "d_min_m", "d_max_m", "area_m2"]);
        for density in grid.points("sweeps.density_per_m2")? {
            let mut mk = m.clone();
            mk.field.density_per_m2 = density;
            let (p, _) = solve(ctx, kind, &mk, i_max)?;
            let (lo, hi) = extent(&p, &mk.pattern);
            t.push(vec![density.into(), lo.into(), hi.into(), protected_area_m2(&p, &mk).into()]);
        }
        tables.push(t);
    }
    let mut export_json = serde_json::to_value(&export).expect("serialises");
    if let Value::Object(map) = &mut export_json {
        map.remove("profile");
    }
    let results = json!({
        "i_max_w": i_max,
        "i_max_dbm": watts_to_dbm(i_max),
        "fdr": m.fdr,
        "policy": export_json,
        "d_min_m": d_min,
        "d_max_m": d_max,
        "area_m2": export.area_m2,
        "area_km2": export.area_m2 / 1e6,
        "mean_interference_w": stats.mean_w,
        "std_dev_interference_w": stats.std_dev_w(),
        "outage_probability": outage_probability(&stats, i_max),
    });
    Ok((results, tables))
}

fn throughput(ctx: &Ctx) -> CliResult<Produced> {
    let (radar, pattern) = ctx.radar()?;
    let su = ctx.su()?;
    let model = ctx.pathloss()?;
    let lc = ctx.cfg.link.as_ref().ok_or_else(|| ctx.missing("link"))?;
    let link = lc.resolve(&su)?;
    let table = McsTable::ieee80211n_20mhz();
    let policy = match lc.policy {
        LinkPolicy::None => None,
        LinkPolicy::SingleUser => {
            let budget = ctx.budget(&radar)?;
            Some(single_user_policy(&su, &pattern, &model, &budget, radar.if_bandwidth_hz)?)
        }
    };
    let scenario = |mode| LinkScenario {
        link: &link,
        radar: &radar,
        pattern: &pattern,
        model: &model,
        table: &table,
        mode,
    };
    let (peak, avg) = (scenario(InterferenceMode::Peak), scenario(InterferenceMode::Averaged));

    let distances = ctx.cfg.sweeps.distance_m.points("sweeps.distance_m")?;
    let mut sweep = Table::new("throughput", &["distance_m", "peak_mbps", "averaged_mbps"]);
    let mut zero_reach = [0.0f64; 2];
    let mut still_zero = [true; 2];
    for &d in &distances {
        let rates = [
            average_throughput(&peak, policy.as_ref(), d, lc.time_steps)?,
            average_throughput(&avg, policy.as_ref(), d, lc.time_steps)?,
        ];
        for k in 0..2 {
            still_zero[k] &= rates[k] == 0.0;
            if still_zero[k] {
                zero_reach[k] = d;
            }
        }
        sweep.push(vec![d.into(), rates[0].into(), rates[1].into()]);
    }
    let mut tables = vec![sweep];
    if let Some(d) = lc.trace_distance_m {
        let tp = throughput_vs_time(&peak, policy.as_ref(), d, lc.time_steps)?;
        let ta = throughput_vs_time(&avg, policy.as_ref(), d, lc.time_steps)?;
        let mut t = Table::new(
            "trace",
            &[
                "time_s",
                "azimuth_deg",
                "permitted",
                "peak_sinr_db",
                "peak_mbps",
                "averaged_sinr_db",
                "averaged_mbps",
            ],
        );
        for (p, a) in tp.iter().zip(&ta) {
            t.push(vec![
                p.time_s.into(),
                p.azimuth_deg.into(),
                p.permitted.into(),
                p.sinr_db.into(),
                p.rate_mbps.into(),
                a.sinr_db.into(),
                a.rate_mbps.into(),
            ]);
        }
        tables.push(t);
    }
    let mut results = json!({
        "link_snr_db": link.snr_db(),
        "averaged_to_peak_db": linear_to_db(radar.duty_cycle()),
        "peak_rate_mbps": table.peak_rate_mbps(),
        "policy": lc.policy,
        "peak_zero_rate_until_m": zero_reach[0],
        "averaged_zero_rate_until_m": zero_reach[1],
    });
    if let Some(p) = &policy {
        results["protection_boundary_m"] = json!(p.distance_m(&pattern, PI));
        results["sharing_policy"] = serde_json::to_value(p).expect("serialises");
    }
    Ok((results, tables))
}

fn validate_mc(ctx: &Ctx, kind: PolicyKind) -> CliResult<Produced> {
    let (_, m, budget) = aggregate_model(ctx)?;
    let i_max = budget.i_max_w;
    let (policy, _) = solve(ctx, kind, &m, i_max)?;
    let profile = policy.profile(&m.pattern);
    let mc = &ctx.cfg.mc;
    let opts = SamplerOptions::new(mc.samples, mc.seed);
    let analytic = m.campbell_stats(&profile);

    let (values, method_info, reference) = match mc.method {
        McMethod::Hybrid => {
            let h = sample_aggregate_hybrid(&m, &profile, mc.strong_fraction, &opts)?;
            let info = json!({
                "method": "hybrid",
                "strong_fraction": mc.strong_fraction,
                "threshold_w": h.threshold_w,
                "expected_strong_points": h.expected_strong_points,
            });
            (h.values, info, analytic)
        }
        McMethod::Direct => {
            let r_out = mc.outer_radius_factor * profile.max_distance_m();
            let xs = sample_aggregate(&m, &profile, r_out, &opts)?;
            let info = json!({ "method": "direct", "outer_radius_m": r_out });
            (xs, info, m.campbell_stats_truncated(&profile, r_out))
        }
    };
    let (mean, var) = mean_and_variance(&values);
    let p_analytic = outage_probability(&analytic, i_max);
    let p_emp = exceedance(&values, i_max);
    let (lo, hi) = binomial_interval(p_analytic, values.len(), 2.576);
    let results = json!({
        "policy": serde_json::to_value(&policy).expect("serialises"),
        "i_max_w": i_max,
        "samples": values.len(),
        "sampler": method_info,
        "analytic_mean_w": reference.mean_w,
        "empirical_mean_w": mean,
        "mean_relative_error": (mean - reference.mean_w) / reference.mean_w,
        "analytic_variance_w2": reference.variance_w2,
        "empirical_variance_w2": var,
        "variance_relative_error": (var - reference.variance_w2) / reference.variance_w2,
        "analytic_outage": p_analytic,
        "empirical_outage": p_emp,
        "outage_ci99": [lo, hi],
        "outage_within_ci99": p_emp >= lo && p_emp <= hi,
    });

    let mut sorted = values;
    sorted.sort_by(f64::total_cmp);
    let mut t = Table::new("mc_quantiles", &["probability", "empirical_w", "gaussian_w"]);
    for p in [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.8, 0.9, 0.95, 0.99] {
        let idx = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
        let gauss = analytic.mean_w + analytic.std_dev_w() * q_inverse(1.0 - p)?;
        t.push(vec![p.into(), sorted[idx].into(), gauss.into()]);
    }
    Ok((results, vec![t]))
}

fn fit_pathloss(ctx: &Ctx) -> CliResult<Produced> {
    let cfg = ctx.cfg.pathloss.as_ref().ok_or_else(|| ctx.missing("pathloss"))?;
    let PathLossConfig::Tabulated { fit_range_m, .. } = cfg else {
        return Err(CliError::invalid("pathloss.model", "fit-pathloss needs a tabulated model"));
    };
    let PathLossModel::Tabulated(table) = ctx.pathloss()? else {
        unreachable!("tabulated config resolves to a tabulated model")
    };
    let [lo, hi] = fit_range_m.unwrap_or([0.0, f64::INFINITY]);
    let used: Vec<(f64, f64)> = table
        .points()
        .iter()
        .copied()
        .filter(|&(d, _)| d >= lo && d <= hi)
        .collect();
    let (k0, alpha) = fit_power_law(&used)?;
    let fitted = PathLossModel::power_law(k0, alpha)?;
    let mut t = Table::new(
        "fit",
        &["distance_m", "attenuation_db", "fitted_db", "residual_db", "in_fit_range"],
    );
    let mut sq = 0.0;
    for &(d, l) in table.points() {
        let (a, f) = (linear_to_db(l), linear_to_db(attenuation(&fitted, d)));
        let inside = d >= lo && d <= hi;
        if inside {
            sq += (a - f).powi(2);
        }
        t.push(vec![d.into(), a.into(), f.into(), (a - f).into(), Cell::Bool(inside)]);
    }
    let results = json!({
        "k0": k0,
        "k0_db": linear_to_db(k0),
        "alpha": alpha,
        "points_used": used.len(),
        "rms_residual_db": (sq / used.len() as f64).sqrt(),
    });
    Ok((results, vec![t]))
}
