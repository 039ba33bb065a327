//! The subcommands. Each writes its report to `out` (normally stdout) and
//! any data files under the configured output directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use ostat_core::chaos::{dtv_bound, rho_t, sigma_t, variance_u, BoundIngredients, UStatSpec};
use ostat_core::limits::{beta_numeric, limit_params, BetaProvenance, LimitLaw};
use ostat_core::models::{ModelSpec, RunParams};
use ostat_core::stats::{calibrated_ks_threshold, interval_count_test, ks_distance, tv_distance_counts, CountTestReport};
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, Manifest};
use crate::runner::{fan_out, pair_count, replication_stream, run_replications, ReplicationRecord};

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

fn fmt_f(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("ostat-out"))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `(γ, β, τ)` and where `β` comes from.
pub fn constants(cfg: &ExperimentConfig, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let spec = cfg.validate()?;
    let law = limit_params(&spec, &cfg.numeric_options())?;
    writeln!(out, "model\td\tgamma\tbeta\ttau\tprovenance\tstd_error")?;
    let (prov, se) = match law.provenance {
        BetaProvenance::ClosedForm => ("closed_form", String::from("-")),
        BetaProvenance::Numeric { std_error, .. } => ("numeric", format!("{std_error:.3e}")),
    };
    writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}\t{}", spec.name(), spec.dim(), law.gamma, law.beta, law.tau, prov, se)?;
    Ok(Outcome::Pass)
}

fn csv_header(m_max: usize) -> Vec<String> {
    let mut h: Vec<String> =
        ["t", "replication", "input_size", "n_values", "empty", "skipped_degenerate", "unconverged"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    h.extend((1..=m_max).map(|m| format!("f{m}")));
    h.push("values".into());
    h
}

fn csv_row(r: &ReplicationRecord) -> Vec<String> {
    let mut row = vec![
        fmt_f(r.t),
        r.replication.to_string(),
        r.input_size.to_string(),
        r.values.len().to_string(),
        (r.values.is_empty() as u8).to_string(),
        r.diagnostics.skipped_degenerate.to_string(),
        r.diagnostics.unconverged.to_string(),
    ];
    row.extend(r.order_stats.iter().map(|x| fmt_f(*x)));
    row.push(r.values.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(";"));
    row
}

fn params(cfg: &ExperimentConfig, t: f64) -> RunParams {
    RunParams { strategy: cfg.strategy, ..RunParams::new(t, cfg.x_max, cfg.m_max()) }
}

/// Writes `simulate.csv` (one row per replication) and `manifest.json`.
pub fn simulate(cfg: &ExperimentConfig, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let spec = cfg.validate()?;
    let dir = out_dir(cfg);
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(csv_header(cfg.m_max()))?;
    for (ti, &t) in cfg.t.iter().enumerate() {
        for r in run_replications(&spec, &params(cfg, t), cfg.seed, ti, cfg.reps, cfg.threads)? {
            w.write_record(csv_row(&r))?;
        }
    }
    let csv_path = dir.join("simulate.csv");
    write_text(&csv_path, std::str::from_utf8(&w.into_inner()?)?)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        model: spec,
        files: vec!["simulate.csv".into()],
        config: cfg.clone(),
    };
    write_text(&dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)?;
    writeln!(out, "wrote {}", csv_path.display())?;
    Ok(Outcome::Pass)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderStatCheck {
    pub m: usize,
    pub n: usize,
    pub censored: usize,
    pub ks: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalCheck {
    pub a: f64,
    pub b: f64,
    pub mean_pass: bool,
    pub void_pass: bool,
    pub multi_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub model: String,
    pub t: f64,
    pub reps: usize,
    pub gamma: f64,
    pub beta: f64,
    pub tau: f64,
    pub x_grid: Vec<f64>,
    pub order_stats: Vec<OrderStatCheck>,
    pub intervals: Option<CountTestReport>,
    pub interval_checks: Vec<IntervalCheck>,
    pub pass: bool,
}

/// KS of each `F^{(m)}` against the limit law with calibrated thresholds,
/// and interval counts over the x grid (from 100 replications on).
pub fn verify_records(
    cfg: &ExperimentConfig,
    spec: &ModelSpec,
    law: &LimitLaw,
    t: f64,
    t_index: usize,
    records: &[ReplicationRecord],
) -> anyhow::Result<VerifyReport> {
    let mut checks = Vec::new();
    for &m in &cfg.m {
        let sample: Vec<f64> = records.iter().map(|r| r.order_stats[m - 1]).collect();
        let rep = ks_distance(&sample, |x| law.cdf(m, x))?;
        let stream = replication_stream(cfg.seed, t_index, m as u64).derive(0xCA1B);
        let threshold = calibrated_ks_threshold(law, m, sample.len(), cfg.ks_level, cfg.calibration_reps, stream)?;
        checks.push(OrderStatCheck {
            m,
            n: rep.n,
            censored: rep.censored,
            ks: rep.statistic,
            threshold,
            pass: rep.statistic <= threshold,
        });
    }
    let (intervals, interval_checks) = if records.len() >= 100 && !cfg.x_grid.is_empty() {
        let mut edges = vec![0.0];
        edges.extend(&cfg.x_grid);
        let iv: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
        let runs: Vec<Vec<f64>> = records.iter().map(|r| r.values.clone()).collect();
        let rep = interval_count_test(&runs, &iv, law)?;
        let ic = rep
            .intervals
            .iter()
            .map(|r| IntervalCheck {
                a: r.a,
                b: r.b,
                mean_pass: (r.mean - r.nu).abs() <= 3.0 * r.mean_se,
                void_pass: (r.void_prob - r.void_target).abs() <= 0.03,
                multi_pass: (r.multi_prob - r.multi_target).abs() <= 0.03,
            })
            .collect();
        (Some(rep), ic)
    } else {
        (None, Vec::new())
    };
    let pass = checks.iter().all(|c| c.pass)
        && interval_checks.iter().all(|c| c.mean_pass && c.void_pass && c.multi_pass);
    Ok(VerifyReport {
        model: spec.name().into(),
        t,
        reps: records.len(),
        gamma: law.gamma,
        beta: law.beta,
        tau: law.tau,
        x_grid: cfg.x_grid.clone(),
        order_stats: checks,
        intervals,
        interval_checks,
        pass,
    })
}

/// Simulates inline and checks against the limit law; JSON report.
pub fn verify(cfg: &ExperimentConfig, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let spec = cfg.validate()?;
    if cfg.reps < 2 {
        return Err(ConfigError(format!("verify needs at least 2 replications, got {}", cfg.reps)).into());
    }
    let law = limit_params(&spec, &cfg.numeric_options())?;
    let mut reports = Vec::new();
    for (ti, &t) in cfg.t.iter().enumerate() {
        let records = run_replications(&spec, &params(cfg, t), cfg.seed, ti, cfg.reps, cfg.threads)?;
        reports.push(verify_records(cfg, &spec, &law, t, ti, &records)?);
    }
    let text = serde_json::to_string_pretty(&reports)?;
    if let Some(dir) = &cfg.out {
        write_text(&dir.join("verify.json"), &text)?;
    }
    writeln!(out, "{text}")?;
    Ok(if reports.iter().all(|r| r.pass) { Outcome::Pass } else { Outcome::Fail })
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceRow {
    pub t: f64,
    pub s: f64,
    pub sigma_t: f64,
    pub rho_t: f64,
    pub variance_u: f64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub empirical_tv: f64,
    pub dtv_bound: f64,
}

/// One row of the variance table.
pub fn variance_row(cfg: &ExperimentConfig, spec: &ModelSpec, t: f64, s: f64, t_index: usize) -> anyhow::Result<VarianceRow> {
    let u = UStatSpec::new(spec.clone(), s)?;
    let sig = sigma_t(&u, t)?;
    let rho = rho_t(&u, t)?;
    let var = variance_u(&u, t)?;
    let counts = fan_out(cfg.reps, cfg.threads, |rep| pair_count(spec, t, s, replication_stream(cfg.seed, t_index, rep)))?
        .into_iter()
        .collect::<anyhow::Result<Vec<u64>>>()?;
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / n;
    let emp_var = if counts.len() > 1 {
        counts.iter().map(|c| (*c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let (tv, bound) = if sig > 0.0 {
        let mut hist = vec![0u64; counts.iter().copied().max().unwrap_or(0) as usize + 1];
        for c in &counts {
            hist[*c as usize] += 1;
        }
        let ing = BoundIngredients { sigma_t: sig, rho_t: rho, sigma: sig };
        (tv_distance_counts(&hist, sig)?, dtv_bound(&ing, cfg.ck)?)
    } else {
        (0.0, 0.0)
    };
    Ok(VarianceRow {
        t,
        s,
        sigma_t: sig,
        rho_t: rho,
        variance_u: var,
        empirical_mean: mean,
        empirical_variance: emp_var,
        empirical_tv: tv,
        dtv_bound: bound,
    })
}

/// σ_t, ρ_t, Var U, empirical moments and TV over all `(t, s)`; CSV.
pub fn variance(cfg: &ExperimentConfig, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let spec = cfg.validate()?;
    if cfg.s.is_empty() {
        return Err(ConfigError("variance needs at least one s value".into()).into());
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for (ti, &t) in cfg.t.iter().enumerate() {
        for &s in &cfg.s {
            w.serialize(variance_row(cfg, &spec, t, s, ti)?)?;
        }
    }
    let text = String::from_utf8(w.into_inner()?)?;
    if let Some(dir) = &cfg.out {
        write_text(&dir.join("variance.csv"), &text)?;
    }
    write!(out, "{text}")?;
    Ok(Outcome::Pass)
}

/// Numeric `β` with its randomized-QMC standard error; JSON.
pub fn beta_integrate(cfg: &ExperimentConfig, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let spec = cfg.validate()?;
    let est = beta_numeric(&spec, &cfg.numeric_options())?;
    let report = serde_json::json!({
        "model": spec.name(),
        "d": spec.dim(),
        "parametrization": cfg.parametrization,
        "points": cfg.points,
        "randomizations": cfg.randomizations,
        "beta": est.estimate,
        "std_error": est.std_error,
        "diverging": est.diverging,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(Outcome::Pass)
}
