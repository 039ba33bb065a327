//! Reproducible samplers for Poisson points in a window, on the unit sphere,
//! and for stationary isotropic Poisson flats hitting a window.
//!
//! Every sampler takes an explicit RNG. [`SeededStream::rng`] hands out a
//! ChaCha8 generator keyed by the master seed with the replication index as
//! its stream id, so replication `i` sees the same draws no matter which
//! worker runs it or in what order.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::geometry::{crofton_constant, ConvexBody, Flat, Hyperplane};
use crate::linalg::{self, axpy, dot};
use crate::numeric::kappa;
use crate::Result;

/// A (master seed, replication) pair identifying one independent substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeededStream {
    pub seed: u64,
    pub index: u64,
}

impl SeededStream {
    pub fn new(seed: u64, index: u64) -> Self {
        SeededStream { seed, index }
    }

    /// 128-bit key; injective in `(seed, index)`.
    pub fn key(&self) -> u128 {
        (self.seed as u128) << 64 | self.index as u128
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.index);
        rng
    }

    /// A stream for an auxiliary purpose (calibration, integration, ...)
    /// that never collides with the replication streams of `seed`.
    pub fn derive(&self, purpose: u64) -> SeededStream {
        let mixed = self.seed ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
        SeededStream { seed: mixed, index: self.index }
    }
}

/// Substream `replication` of `seed`.
pub fn split_stream(seed: u64, replication: u64) -> SeededStream {
    SeededStream::new(seed, replication)
}

/// Where a point sample lives.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleWindow {
    Body(ConvexBody),
    /// The unit sphere `S^{d-1}` in `R^d`.
    Sphere { d: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSample {
    pub points: Vec<Vec<f64>>,
    pub t: f64,
    pub window: SampleWindow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatSample {
    pub flats: Vec<Flat>,
    pub k: usize,
    pub t: f64,
    pub window: ConvexBody,
}

/// Poisson variate with the given mean; zero for a nonpositive mean.
pub fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    match Poisson::new(mean) {
        Ok(p) => p.sample(rng) as u64,
        Err(_) => 0,
    }
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform point on `S^{d-1}` by normalizing a Gaussian vector.
pub fn uniform_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
        let n = linalg::norm(&v);
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point in the ball of radius `r` around the origin of `R^d`,
/// by rejection from the bounding cube.
pub fn uniform_in_ball<R: Rng + ?Sized>(d: usize, r: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        if dot(&v, &v) <= 1.0 {
            return v.into_iter().map(|x| x * r).collect();
        }
    }
}

/// Uniform point in the window.
pub fn uniform_in_body<R: Rng + ?Sized>(w: &ConvexBody, rng: &mut R) -> Vec<f64> {
    match w {
        ConvexBody::Ball { center, radius } => {
            let mut p = uniform_in_ball(center.len(), *radius, rng);
            axpy(1.0, center, &mut p);
            p
        }
        ConvexBody::Cuboid { lower, upper } => lower
            .iter()
            .zip(upper)
            .map(|(l, u)| l + (u - l) * rng.random::<f64>())
            .collect(),
    }
}

/// Poisson process of intensity `t` restricted to `W`.
pub fn sample_points_in_body<R: Rng + ?Sized>(t: f64, w: &ConvexBody, rng: &mut R) -> PointSample {
    let n = poisson_count(t * w.volume(), rng);
    let points = (0..n).map(|_| uniform_in_body(w, rng)).collect();
    PointSample { points, t, window: SampleWindow::Body(w.clone()) }
}

/// Poisson process on `S^{d-1}` whose intensity measure is `t` times surface measure.
pub fn sample_points_on_sphere<R: Rng + ?Sized>(t: f64, d: usize, rng: &mut R) -> PointSample {
    let n = poisson_count(t * d as f64 * kappa(d), rng);
    let points = (0..n).map(|_| uniform_direction(d, rng)).collect();
    PointSample { points, t, window: SampleWindow::Sphere { d } }
}

/// Mean number of isotropic `k`-flats of intensity `t` hitting `W`.
pub fn flat_hit_mean(t: f64, k: usize, w: &ConvexBody) -> Result<f64> {
    let d = w.dim();
    Ok(t * crofton_constant(d, 0, k)? * w.intrinsic_volume(d - k))
}

/// One isotropic flat conditioned to hit `W`: uniform direction space and a
/// translation uniform on the projection of `W` to the orthogonal complement.
pub fn random_flat_hitting<R: Rng + ?Sized>(k: usize, w: &ConvexBody, rng: &mut R) -> Flat {
    let d = w.dim();
    let center = w.center();
    let r = w.circumradius();
    loop {
        let frame = if k == 0 {
            Vec::new()
        } else {
            let gauss: Vec<Vec<f64>> =
                (0..k).map(|_| (0..d).map(|_| standard_normal(rng)).collect()).collect();
            match linalg::orthonormalize(&gauss, 1e-8) {
                Some(f) => f,
                None => continue,
            }
        };
        let normals = linalg::complement(&frame, d);
        let z = uniform_in_ball(d - k, r, rng);
        let mut base = alloc::vec![0.0; d];
        for (n, zi) in normals.iter().zip(&z) {
            axpy(dot(&center, n) + zi, n, &mut base);
        }
        let flat = Flat::from_parts_unchecked(base, frame);
        if matches!(w, ConvexBody::Ball { .. }) || flat.hits(w) {
            return flat;
        }
    }
}

/// Stationary isotropic Poisson `k`-flat process of intensity `t`, restricted
/// to the flats hitting `W`.
pub fn sample_isotropic_flats<R: Rng + ?Sized>(
    t: f64,
    k: usize,
    w: &ConvexBody,
    rng: &mut R,
) -> Result<FlatSample> {
    if k >= w.dim() {
        return Err(crate::error::domain!("flat dimension {k} must be below {}", w.dim()));
    }
    let n = poisson_count(flat_hit_mean(t, k, w)?, rng);
    let flats = (0..n).map(|_| random_flat_hitting(k, w, rng)).collect();
    Ok(FlatSample { flats, k, t, window: w.clone() })
}

/// One isotropic hyperplane conditioned to hit `W`.
pub fn random_hyperplane_hitting<R: Rng + ?Sized>(w: &ConvexBody, rng: &mut R) -> Hyperplane {
    let d = w.dim();
    let center = w.center();
    let r = w.circumradius();
    loop {
        let u = uniform_direction(d, rng);
        let c = dot(&u, &center);
        let p = c + r * rng.random_range(-1.0..1.0);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        if p <= w.support(&u) && -p <= w.support(&neg) {
            return Hyperplane { normal: u, offset: p };
        }
    }
}

/// Isotropic Poisson hyperplanes of intensity `t` hitting `W`.
pub fn sample_hyperplanes<R: Rng + ?Sized>(t: f64, w: &ConvexBody, rng: &mut R) -> Result<Vec<Hyperplane>> {
    let n = poisson_count(flat_hit_mean(t, w.dim() - 1, w)?, rng);
    Ok((0..n).map(|_| random_hyperplane_hitting(w, rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    #[test]
    fn stream_identity_and_separation() {
        let a: u64 = split_stream(7, 0).rng().random();
        let b: u64 = split_stream(7, 0).rng().random();
        let c: u64 = split_stream(7, 1).rng().random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(split_stream(7, 1).key(), split_stream(8, 1).key());
    }

    #[test]
    fn flat_hit_means() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        assert_relative_eq!(flat_hit_mean(10.0, 1, &ball).unwrap(), 10.0 * PI, max_relative = 1e-14);
        let sq = ConvexBody::unit_cube(2).unwrap();
        assert_relative_eq!(flat_hit_mean(50.0, 1, &sq).unwrap(), 200.0 / PI, max_relative = 1e-14);
    }

    #[test]
    fn sphere_points_have_unit_norm() {
        let mut rng = split_stream(1, 0).rng();
        let s = sample_points_on_sphere(5.0, 3, &mut rng);
        assert!(!s.points.is_empty());
        for p in &s.points {
            assert!((linalg::norm(p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_flats_hit_window() {
        let mut rng = split_stream(2, 0).rng();
        for w in [ConvexBody::unit_cube(3).unwrap(), ConvexBody::unit_ball(3).unwrap()] {
            for k in 0..3 {
                let s = sample_isotropic_flats(20.0, k, &w, &mut rng).unwrap();
                for f in &s.flats {
                    assert!(f.hits(&w));
                    assert_eq!(f.dim(), k);
                }
            }
        }
    }

    #[test]
    fn points_stay_inside() {
        let mut rng = split_stream(3, 0).rng();
        let w = ConvexBody::ball(alloc::vec![0.5, -1.0], 0.3).unwrap();
        let s = sample_points_in_body(200.0, &w, &mut rng);
        assert!(s.points.iter().all(|p| w.contains(p, 0.0)));
    }
}
