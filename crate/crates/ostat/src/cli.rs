//! Command-line surface. Flags override values from `--config`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ostat_core::limits::Parametrization;

use crate::commands::{self, Outcome};
use crate::config::{ExperimentConfig, WindowKind};

#[derive(Debug, Parser)]
#[command(name = "ostat", version, about = "Simulate and verify order statistics of Poisson k-tuple functionals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print (gamma, beta, tau) of the limit law.
    Constants(Overrides),
    /// Write rescaled values and order statistics per replication (CSV + manifest).
    Simulate(Overrides),
    /// Simulate and test against the limit law; exit status 1 on failure.
    Verify(Overrides),
    /// Mean, variance and Poisson-approximation bound of the pair-count U-statistic.
    Variance(Overrides),
    /// Numeric beta for point or hyperplane simplices.
    BetaIntegrate(Overrides),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML config file, or a manifest.json from a previous run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// proximity_flats | intersecting_flats | sphere_polytope | gilbert | point_simplices | hyperplane_simplices [default: gilbert]
    #[arg(long)]
    pub model: Option<String>,
    /// Ambient dimension [default: 2].
    #[arg(long)]
    pub d: Option<usize>,
    /// Flat dimension [default: 1 for proximity, d-1 for intersecting].
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of intersecting flats [default: 2].
    #[arg(long)]
    pub ell: Option<usize>,
    /// Intrinsic volume index of the intersection [default: 1].
    #[arg(long)]
    pub j: Option<usize>,
    /// Unit box or unit ball [default: box].
    #[arg(long, value_enum)]
    pub window: Option<WindowKind>,
    /// Intensities, comma separated [default: 100].
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Replications per intensity [default: 1000].
    #[arg(long)]
    pub reps: Option<usize>,
    /// Master seed [default: 1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Order statistics to check, comma separated [default: 1].
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Right ends of the count intervals, ascending [default: 0.4,0.8,1.2].
    #[arg(long = "x-grid", value_delimiter = ',')]
    pub x_grid: Option<Vec<f64>>,
    /// Rescaled cutoff for collected values [default: 2].
    #[arg(long = "x-max")]
    pub x_max: Option<f64>,
    /// Raw thresholds for `variance`, comma separated [default: 0.05].
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<f64>>,
    /// Output directory [default: ostat-out for simulate].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Poisson-approximation constant C_k [default: 10].
    #[arg(long)]
    pub ck: Option<f64>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub threads: Option<usize>,
    /// QMC points per randomization for numeric beta [default: 16384].
    #[arg(long)]
    pub points: Option<usize>,
    /// QMC randomizations for numeric beta [default: 16].
    #[arg(long)]
    pub randomizations: Option<usize>,
    /// crofton | anchored [default: anchored].
    #[arg(long, value_parser = parse_parametrization)]
    pub parametrization: Option<Parametrization>,
}

fn parse_parametrization(s: &str) -> Result<Parametrization, String> {
    match s {
        "crofton" => Ok(Parametrization::Crofton),
        "anchored" => Ok(Parametrization::Anchored),
        _ => Err(format!("expected crofton or anchored, got '{s}'")),
    }
}

impl Overrides {
    /// The config file (or defaults) with flags applied on top.
    pub fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { c.$f = v.clone(); } )* };
        }
        set!(model, d, window, t, reps, seed, m, x_grid, x_max, s, ck, points, randomizations, parametrization);
        if self.k.is_some() {
            c.k = self.k;
        }
        if self.ell.is_some() {
            c.ell = self.ell;
        }
        if self.j.is_some() {
            c.j = self.j;
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        Ok(c)
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Constants(o) => commands::constants(&o.resolve()?, out),
        Command::Simulate(o) => commands::simulate(&o.resolve()?, out),
        Command::Verify(o) => commands::verify(&o.resolve()?, out),
        Command::Variance(o) => commands::variance(&o.resolve()?, out),
        Command::BetaIntegrate(o) => commands::beta_integrate(&o.resolve()?, out),
    }
}
