//! Randomized quasi-Monte Carlo: Sobol points with random digital shifts,
//! replicate-based standard errors, and maps from the unit cube to the
//! sphere.

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;

use libm::{cos, sin, sqrt};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::numeric::normal_quantile;
use crate::sampling::SeededStream;

/// (degree, polynomial coefficients, initial direction numbers) for Sobol
/// dimensions 2..=16 (Joe and Kuo, new-joe-kuo-6.21201).
const JOE_KUO: [(u32, u32, &[u32]); 15] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
];

/// Number of coordinates driven by Sobol points; further coordinates are
/// pseudo-random.
pub const SOBOL_DIMS: usize = JOE_KUO.len() + 1;

const BITS: usize = 32;

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = 1 << (BITS - 1 - i);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim - 1];
    let s = s as usize;
    for i in 0..s.min(BITS) {
        v[i] = m[i] << (BITS - 1 - i);
    }
    for i in s..BITS {
        let mut x = v[i - s] ^ (v[i - s] >> s);
        for k in 1..s {
            if (a >> (s - 1 - k)) & 1 == 1 {
                x ^= v[i - k];
            }
        }
        v[i] = x;
    }
    v
}

/// Sobol sequence with a random digital shift, padded with pseudo-random
/// coordinates beyond [`SOBOL_DIMS`].
#[derive(Debug, Clone)]
pub struct ShiftedSobol {
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    shift: Vec<u32>,
    index: u64,
    pad: usize,
    rng: ChaCha8Rng,
}

impl ShiftedSobol {
    pub fn new(dim: usize, stream: SeededStream) -> Self {
        let sobol = dim.min(SOBOL_DIMS);
        let mut rng = stream.rng();
        let shift = (0..sobol).map(|_| rng.random::<u32>()).collect();
        ShiftedSobol {
            directions: (0..sobol).map(direction_numbers).collect(),
            state: vec![0; sobol],
            shift,
            index: 0,
            pad: dim - sobol,
            rng,
        }
    }

    /// Writes the next point of `(0, 1)^dim` into `out`.
    pub fn next_into(&mut self, out: &mut [f64]) {
        if self.index > 0 {
            let c = (self.index - 1).trailing_ones() as usize;
            for (x, v) in self.state.iter_mut().zip(&self.directions) {
                *x ^= v[c.min(BITS - 1)];
            }
        }
        self.index += 1;
        let scale = 1.0 / (1u64 << BITS) as f64;
        for (o, (x, s)) in out.iter_mut().zip(self.state.iter().zip(&self.shift)) {
            *o = ((x ^ s) as f64 + 0.5) * scale;
        }
        for o in out.iter_mut().skip(self.state.len()).take(self.pad) {
            *o = self.rng.random::<f64>();
        }
    }
}

/// How replicate estimates are combined into the point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Aggregate {
    Mean,
    /// Median of the means of four equal groups of replicates.
    MedianOfMeans,
}

/// Randomized QMC estimate with its replicate spread.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RqmcEstimate {
    pub estimate: f64,
    /// Standard deviation of the replicates over `sqrt(replicates)`.
    pub std_error: f64,
    pub replicates: Vec<f64>,
    /// The first and second halves of the point sets disagree by more than
    /// four standard errors.
    pub diverging: bool,
}

/// Integrates `f` over `(0,1)^dim` with `randomizations` shifted Sobol sets
/// of `points` points each.
pub fn rqmc_integrate<F: FnMut(&[f64]) -> f64>(
    dim: usize,
    points: usize,
    randomizations: usize,
    stream: SeededStream,
    aggregate: Aggregate,
    mut f: F,
) -> RqmcEstimate {
    let half = points / 2;
    let mut reps = Vec::with_capacity(randomizations);
    let mut diffs = Vec::with_capacity(randomizations);
    let mut u = vec![0.0; dim];
    for r in 0..randomizations {
        let mut seq = ShiftedSobol::new(dim, SeededStream::new(stream.seed, stream.index.wrapping_add(r as u64)));
        let (mut first, mut second) = (0.0, 0.0);
        for i in 0..points {
            seq.next_into(&mut u);
            let v = f(&u);
            if i < half {
                first += v;
            } else {
                second += v;
            }
        }
        reps.push((first + second) / points as f64);
        if half > 0 && points > half {
            diffs.push(first / half as f64 - second / (points - half) as f64);
        }
    }
    let (mean, se) = mean_se(&reps);
    let estimate = match aggregate {
        Aggregate::Mean => mean,
        Aggregate::MedianOfMeans => median_of_means(&reps, 4),
    };
    let diverging = if diffs.len() >= 2 {
        let (dm, dse) = mean_se(&diffs);
        libm::fabs(dm) > 4.0 * dse + 1e-12 * libm::fabs(mean)
    } else {
        false
    };
    RqmcEstimate { estimate, std_error: se, replicates: reps, diverging }
}

fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, sqrt(var / n))
}

fn median_of_means(x: &[f64], groups: usize) -> f64 {
    let groups = groups.min(x.len()).max(1);
    let size = x.len() / groups;
    let mut means: Vec<f64> = (0..groups)
        .map(|g| x[g * size..(g + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    if groups % 2 == 1 {
        means[groups / 2]
    } else {
        0.5 * (means[groups / 2 - 1] + means[groups / 2])
    }
}

/// Number of unit-cube coordinates [`direction_from_unit`] consumes.
pub fn direction_dims(d: usize) -> usize {
    match d {
        1 => 1,
        2 => 1,
        3 => 2,
        _ => d,
    }
}

/// Maps `direction_dims(d)` uniforms to a uniform point of `S^{d-1}`.
pub fn direction_from_unit(u: &[f64], d: usize) -> Vec<f64> {
    match d {
        1 => vec![if u[0] < 0.5 { -1.0 } else { 1.0 }],
        2 => {
            let a = 2.0 * PI * u[0];
            vec![cos(a), sin(a)]
        }
        3 => {
            // Archimedes: the height of a uniform point on S^2 is uniform
            let z = 2.0 * u[0] - 1.0;
            let r = sqrt((1.0 - z * z).max(0.0));
            let a = 2.0 * PI * u[1];
            vec![r * cos(a), r * sin(a), z]
        }
        _ => {
            let g: Vec<f64> = u[..d].iter().map(|p| normal_quantile(*p)).collect();
            let n = linalg::norm(&g);
            g.into_iter().map(|x| x / n).collect()
        }
    }
}
