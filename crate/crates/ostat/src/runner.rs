//! Replication fan-out. Each replication draws from its own substream, so
//! results do not depend on the number of worker threads; they are
//! collected in replication order.

use ostat_core::linalg::dist;
use ostat_core::models::{run_model, sample_model, ModelSpec, RunDiagnostics, RunParams, Sample};
use ostat_core::orderstats::{enumerate_below, EnumerationStrategy, Metric};
use ostat_core::sampling::SeededStream;
use rayon::prelude::*;
use serde::Serialize;

/// The part of one replication that is kept after the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationRecord {
    pub t: f64,
    pub replication: u64,
    /// Number of Poisson inputs (points or flats).
    pub input_size: usize,
    /// Rescaled values up to `x_max`, ascending.
    pub values: Vec<f64>,
    /// Rescaled `F^{(m)}`, `m = 1..=m_max`, `∞` when missing.
    pub order_stats: Vec<f64>,
    pub diagnostics: RunDiagnostics,
}

/// Substream of replication `rep` at the `t_index`-th intensity.
pub fn replication_stream(seed: u64, t_index: usize, rep: u64) -> SeededStream {
    SeededStream::new(seed, rep).derive(t_index as u64)
}

/// Runs `f(0..n)` on the given number of threads (all cores when `None`),
/// preserving order.
pub fn fan_out<T: Send, F: Fn(u64) -> T + Sync + Send>(n: usize, threads: Option<usize>, f: F) -> anyhow::Result<Vec<T>> {
    let run = || (0..n as u64).into_par_iter().map(&f).collect::<Vec<T>>();
    match threads {
        Some(k) => Ok(rayon::ThreadPoolBuilder::new().num_threads(k).build()?.install(run)),
        None => Ok(run()),
    }
}

pub fn run_replications(
    spec: &ModelSpec,
    params: &RunParams,
    seed: u64,
    t_index: usize,
    reps: usize,
    threads: Option<usize>,
) -> anyhow::Result<Vec<ReplicationRecord>> {
    let out = fan_out(reps, threads, |rep| {
        run_model(spec, params, replication_stream(seed, t_index, rep)).map(|r| ReplicationRecord {
            t: params.t,
            replication: rep,
            input_size: r.sample.len(),
            values: r.rescaled,
            order_stats: r.order_stats,
            diagnostics: r.diagnostics,
        })
    })?;
    Ok(out.into_iter().collect::<Result<Vec<_>, _>>()?)
}

/// Number of point pairs at distance at most `s` (the U-statistic of the
/// chaos analysis) in one replication of a point model.
pub fn pair_count(spec: &ModelSpec, t: f64, s: f64, stream: SeededStream) -> anyhow::Result<u64> {
    let mut rng = stream.rng();
    let Sample::Points(pts) = sample_model(spec, t, &mut rng)? else {
        anyhow::bail!("pair counts need a point model, got {}", spec.name());
    };
    if s <= 0.0 {
        return Ok(0);
    }
    let f = Metric(|p: &[&Vec<f64>]| Some(dist(p[0], p[1])));
    Ok(enumerate_below(&pts, 2, &f, s, EnumerationStrategy::GridPrune { cell: s })?.len() as u64)
}
