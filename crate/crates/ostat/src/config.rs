//! Experiment configuration: a TOML file, flag overrides, and the manifest
//! echo written next to simulation output.

use std::path::{Path, PathBuf};

use anyhow::Context;
use ostat_core::geometry::ConvexBody;
use ostat_core::limits::{NumericOptions, Parametrization};
use ostat_core::models::{parse_model_name, DeltaRule, ModelSpec};
use ostat_core::orderstats::EnumerationStrategy;
use ostat_core::sampling::SeededStream;
use serde::{Deserialize, Serialize};

/// A configuration problem; the CLI exits with status 2 on these.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// Unit cube `[0, 1]^d`.
    Box,
    /// Unit ball centred at the origin.
    Ball,
}

/// Everything an experiment needs. Field names double as TOML keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: String,
    pub d: usize,
    /// Flat dimension (proximity: 1, intersecting: `d - 1` by default).
    pub k: Option<usize>,
    /// Number of intersecting flats (default 2).
    pub ell: Option<usize>,
    /// Intrinsic-volume index of the intersection (default 1).
    pub j: Option<usize>,
    pub window: WindowKind,
    /// Gilbert threshold `δ_t = c t^{-e}`; `e` defaults to `1/d`.
    pub delta_coefficient: f64,
    pub delta_exponent: Option<f64>,
    pub t: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub m: Vec<usize>,
    pub x_grid: Vec<f64>,
    pub x_max: f64,
    pub strategy: Option<EnumerationStrategy>,
    /// Raw thresholds `s` for the `variance` subcommand.
    pub s: Vec<f64>,
    /// Poisson-approximation constant `C_k`.
    pub ck: f64,
    /// Samples of the exact limit law used to calibrate KS thresholds.
    pub calibration_reps: usize,
    /// Quantile of the calibrated KS statistic used as threshold.
    pub ks_level: f64,
    pub points: usize,
    pub randomizations: usize,
    pub parametrization: Parametrization,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: "gilbert".into(),
            d: 2,
            k: None,
            ell: None,
            j: None,
            window: WindowKind::Box,
            delta_coefficient: 1.0,
            delta_exponent: None,
            t: vec![100.0],
            reps: 1000,
            seed: 1,
            m: vec![1],
            x_grid: vec![0.4, 0.8, 1.2],
            x_max: 2.0,
            strategy: None,
            s: vec![0.05],
            ck: 10.0,
            calibration_reps: 1000,
            ks_level: 0.99,
            points: 1 << 14,
            randomizations: 16,
            parametrization: Parametrization::Anchored,
            threads: None,
            out: None,
        }
    }
}

/// The manifest written by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub model: ModelSpec,
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

impl ExperimentConfig {
    /// Reads a TOML config, or the `config` echo of a JSON manifest.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg = if path.extension().is_some_and(|e| e == "json") {
            let m: Manifest = serde_json::from_str(&text)
                .map_err(|e| bad(format!("{}: not a manifest: {e}", path.display())))?;
            m.config
        } else {
            toml::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?
        };
        Ok(cfg)
    }

    pub fn window_body(&self) -> anyhow::Result<ConvexBody> {
        let w = match self.window {
            WindowKind::Box => ConvexBody::unit_cube(self.d),
            WindowKind::Ball => ConvexBody::unit_ball(self.d),
        };
        w.map_err(|e| bad(e.to_string()))
    }

    pub fn spec(&self) -> anyhow::Result<ModelSpec> {
        let name = parse_model_name(&self.model).ok_or_else(|| bad(format!("unknown model '{}'", self.model)))?;
        let d = self.d;
        let spec = match name {
            "proximity_flats" => ModelSpec::ProximityFlats { k: self.k.unwrap_or(1), window: self.window_body()? },
            "intersecting_flats" => ModelSpec::IntersectingFlats {
                d,
                k: self.k.unwrap_or(d.saturating_sub(1)),
                ell: self.ell.unwrap_or(2),
                j: self.j.unwrap_or(1),
            },
            "sphere_polytope" => ModelSpec::SpherePolytope { d },
            "gilbert" => ModelSpec::Gilbert {
                window: self.window_body()?,
                delta: DeltaRule {
                    coefficient: self.delta_coefficient,
                    exponent: self.delta_exponent.unwrap_or(1.0 / d.max(1) as f64),
                },
            },
            "point_simplices" => ModelSpec::PointSimplices { window: self.window_body()? },
            _ => ModelSpec::HyperplaneSimplices { window: self.window_body()? },
        };
        spec.validate().map_err(|e| bad(e.to_string()))?;
        Ok(spec)
    }

    pub fn numeric_options(&self) -> NumericOptions {
        NumericOptions {
            points: self.points,
            randomizations: self.randomizations,
            stream: SeededStream::new(self.seed, 0).derive(0xBE7A),
            parametrization: self.parametrization,
        }
    }

    pub fn m_max(&self) -> usize {
        self.m.iter().copied().max().unwrap_or(1)
    }

    /// Checks the invariants and returns the model.
    pub fn validate(&self) -> anyhow::Result<ModelSpec> {
        if self.reps == 0 {
            return Err(bad("reps must be at least 1"));
        }
        if self.t.is_empty() || self.t.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(bad("t values must be positive and finite"));
        }
        if self.m.is_empty() || self.m.contains(&0) {
            return Err(bad("m values must be at least 1"));
        }
        if self.x_grid.iter().any(|x| !(*x > 0.0)) || self.x_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("x grid must be positive and strictly increasing"));
        }
        if !(self.x_max > 0.0) || self.x_grid.last().is_some_and(|x| *x > self.x_max) {
            return Err(bad("x_max must be positive and at least the largest grid point"));
        }
        if self.s.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(bad("s values must be finite and nonnegative"));
        }
        if !(self.ck > 0.0) {
            return Err(bad("ck must be positive"));
        }
        if !(0.0..1.0).contains(&self.ks_level) || self.calibration_reps == 0 {
            return Err(bad("ks_level must lie in [0, 1) and calibration_reps be positive"));
        }
        if let Some(EnumerationStrategy::GridPrune { cell }) = self.strategy {
            if !(cell > 0.0) {
                return Err(bad("grid cell must be positive"));
            }
        }
        self.spec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = ExperimentConfig::default();
        assert_eq!(c.validate().unwrap().name(), "gilbert");
    }

    #[test]
    fn toml_overrides() {
        let c: ExperimentConfig = toml::from_str(
            "model = \"sphere-polytope\"\nd = 3\nt = [50.0, 100.0]\nm = [1, 2]\nstrategy = { kind = \"brute_force\" }\n",
        )
        .unwrap();
        assert_eq!(c.spec().unwrap(), ModelSpec::SpherePolytope { d: 3 });
        assert_eq!(c.t, vec![50.0, 100.0]);
        assert_eq!(c.strategy, Some(EnumerationStrategy::BruteForce));
        assert!(toml::from_str::<ExperimentConfig>("bogus = 1").is_err());
    }

    #[test]
    fn invariants() {
        let mut c = ExperimentConfig { reps: 0, ..Default::default() };
        assert!(c.validate().is_err());
        c.reps = 5;
        c.x_grid = vec![1.0, 0.5];
        assert!(c.validate().is_err());
        c.x_grid = vec![0.5, 3.0];
        assert!(c.validate().is_err());
        c.x_max = 3.0;
        assert!(c.validate().is_ok());
        c.model = "nope".into();
        assert!(c.validate().unwrap_err().downcast_ref::<ConfigError>().is_some());
    }

    #[test]
    fn model_defaults() {
        let c = ExperimentConfig { model: "intersecting_flats".into(), d: 3, ..Default::default() };
        assert_eq!(c.spec().unwrap(), ModelSpec::IntersectingFlats { d: 3, k: 2, ell: 2, j: 1 });
        let c = ExperimentConfig { model: "proximity_flats".into(), d: 3, window: WindowKind::Ball, ..Default::default() };
        assert!(matches!(c.spec().unwrap(), ModelSpec::ProximityFlats { k: 1, .. }));
    }
}
