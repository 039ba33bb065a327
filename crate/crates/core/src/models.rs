//! The six geometric models: what is sampled, the tuple functional, and the
//! scaling exponent. [`run_model`] turns a model into one replication of
//! sorted values and order statistics.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use core::cell::Cell;

use libm::pow;
use rand::Rng;

use crate::error::domain;
use crate::geometry::{
    dist_within_window, flat_ball_intersection, intersect_flats, segment_distance, simplex_volume,
    ConvexBody, Flat, Hyperplane, RANK_TOL,
};
use crate::linalg;
use crate::numeric::{binomial, kappa};
use crate::orderstats::{enumerate_below, order_statistics, EnumerationStrategy, Metric, Plain};
use crate::sampling::{self, SeededStream};
use crate::{Error, Result};

/// Gilbert edge threshold `δ_t = coefficient · t^{-exponent}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeltaRule {
    pub coefficient: f64,
    pub exponent: f64,
}

impl DeltaRule {
    /// `δ_t = t^{-1/d}`.
    pub fn default_for(d: usize) -> Self {
        DeltaRule { coefficient: 1.0, exponent: 1.0 / d as f64 }
    }

    pub fn delta(&self, t: f64) -> f64 {
        self.coefficient * pow(t, -self.exponent)
    }
}

/// One of the six models.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "model", rename_all = "snake_case"))]
pub enum ModelSpec {
    /// Distances within `W` between isotropic Poisson `k`-flats, `2k < d`.
    ProximityFlats { k: usize, window: ConvexBody },
    /// `V_j` of `ℓ`-fold intersections of isotropic `k`-flats inside the unit ball.
    IntersectingFlats { d: usize, k: usize, ell: usize, j: usize },
    /// Chord lengths between Poisson points on `S^{d-1}`.
    SpherePolytope { d: usize },
    /// Edge lengths of the Gilbert graph in `W`.
    Gilbert { window: ConvexBody, delta: DeltaRule },
    /// Volumes of simplices spanned by `d + 1` Poisson points in `W`.
    PointSimplices { window: ConvexBody },
    /// Volumes of simplices cut out by `d + 1` isotropic Poisson hyperplanes, inside `W`.
    HyperplaneSimplices { window: ConvexBody },
}

impl ModelSpec {
    pub fn gilbert(window: ConvexBody) -> Self {
        let delta = DeltaRule::default_for(window.dim());
        ModelSpec::Gilbert { window, delta }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::ProximityFlats { .. } => "proximity_flats",
            ModelSpec::IntersectingFlats { .. } => "intersecting_flats",
            ModelSpec::SpherePolytope { .. } => "sphere_polytope",
            ModelSpec::Gilbert { .. } => "gilbert",
            ModelSpec::PointSimplices { .. } => "point_simplices",
            ModelSpec::HyperplaneSimplices { .. } => "hyperplane_simplices",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::IntersectingFlats { d, .. } | ModelSpec::SpherePolytope { d } => *d,
            ModelSpec::ProximityFlats { window, .. }
            | ModelSpec::Gilbert { window, .. }
            | ModelSpec::PointSimplices { window }
            | ModelSpec::HyperplaneSimplices { window } => window.dim(),
        }
    }

    /// The observation window; `None` for the sphere. The intersecting
    /// flats model always uses the unit ball.
    pub fn window(&self) -> Option<ConvexBody> {
        match self {
            ModelSpec::IntersectingFlats { d, .. } => Some(ConvexBody::Ball { center: vec![0.0; *d], radius: 1.0 }),
            ModelSpec::SpherePolytope { .. } => None,
            ModelSpec::ProximityFlats { window, .. }
            | ModelSpec::Gilbert { window, .. }
            | ModelSpec::PointSimplices { window }
            | ModelSpec::HyperplaneSimplices { window } => Some(window.clone()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.window() {
            w.validate()?;
        }
        let d = self.dim();
        if d == 0 || d > crate::geometry::MAX_DIM {
            return Err(domain!("dimension {d} outside 1..={}", crate::geometry::MAX_DIM));
        }
        match *self {
            ModelSpec::ProximityFlats { k, .. } => {
                if 2 * k >= d {
                    return Err(domain!("proximity model needs k < d/2, got k={k} d={d}"));
                }
            }
            ModelSpec::IntersectingFlats { k, ell, j, .. } => {
                if k >= d || 2 * k < d {
                    return Err(domain!("intersecting model needs d/2 <= k < d, got k={k} d={d}"));
                }
                if ell == 0 || ell * (d - k) > d {
                    return Err(domain!("need 1 <= ell and ell(d-k) <= d, got ell={ell}"));
                }
                if j == 0 || j > d - ell * (d - k) {
                    return Err(domain!("need 1 <= j <= d - ell(d-k) = {}, got j={j}", d - ell * (d - k)));
                }
            }
            ModelSpec::SpherePolytope { .. } => {
                if d < 2 {
                    return Err(domain!("sphere model needs d >= 2"));
                }
            }
            ModelSpec::Gilbert { delta, .. } => {
                if !(delta.coefficient > 0.0) || !(delta.exponent < 2.0 / d as f64) {
                    return Err(domain!(
                        "Gilbert threshold rule needs coefficient > 0 and exponent < 2/d = {}",
                        2.0 / d as f64
                    ));
                }
            }
            ModelSpec::PointSimplices { .. } => {}
            ModelSpec::HyperplaneSimplices { .. } => {
                if d < 2 {
                    return Err(domain!("hyperplane simplices need d >= 2"));
                }
            }
        }
        Ok(())
    }

    /// Size of the tuples the functional takes.
    pub fn arity(&self) -> usize {
        match self {
            ModelSpec::IntersectingFlats { ell, .. } => *ell,
            ModelSpec::PointSimplices { .. } | ModelSpec::HyperplaneSimplices { .. } => self.dim() + 1,
            _ => 2,
        }
    }

    /// Scaling exponent `γ` of `t^γ ξ_t`.
    pub fn gamma(&self) -> f64 {
        let d = self.dim() as f64;
        match *self {
            ModelSpec::ProximityFlats { k, .. } => 2.0 / (d - 2.0 * k as f64),
            ModelSpec::IntersectingFlats { ell, j, .. } => (j * ell) as f64 / 2.0,
            ModelSpec::SpherePolytope { .. } => 2.0 / (d - 1.0),
            ModelSpec::Gilbert { .. } => 2.0 / d,
            ModelSpec::PointSimplices { .. } => d + 1.0,
            ModelSpec::HyperplaneSimplices { .. } => d * (d + 1.0),
        }
    }

    /// Whether the functional dominates the pairwise distance, which makes
    /// grid pruning exact.
    pub fn metric_compatible(&self) -> bool {
        matches!(self, ModelSpec::Gilbert { .. } | ModelSpec::SpherePolytope { .. })
    }

    /// Largest admissible raw value at intensity `t` for rescaled cutoff `x_max`.
    pub fn threshold(&self, t: f64, x_max: f64) -> f64 {
        let s = x_max * pow(t, -self.gamma());
        match self {
            ModelSpec::Gilbert { delta, .. } => s.min(delta.delta(t)),
            _ => s,
        }
    }
}

/// Raw Poisson input of one replication.
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Points(Vec<Vec<f64>>),
    Flats(Vec<Flat>),
    Hyperplanes(Vec<Hyperplane>),
}

impl Sample {
    pub fn len(&self) -> usize {
        match self {
            Sample::Points(p) => p.len(),
            Sample::Flats(f) => f.len(),
            Sample::Hyperplanes(h) => h.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Skips and convergence failures seen while evaluating tuples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunDiagnostics {
    /// Tuples skipped as degenerate (parallel hyperplanes and the like).
    pub skipped_degenerate: u64,
    /// Distance evaluations that hit the projection iteration cap.
    pub unconverged: u64,
}

/// One replication of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub t: f64,
    pub gamma: f64,
    /// Raw cutoff `x_max t^{-γ}` (capped by `δ_t` for the Gilbert model).
    pub threshold: f64,
    pub sample: Sample,
    /// Admissible values below the threshold, ascending.
    pub values: Vec<f64>,
    /// `values · t^γ`.
    pub rescaled: Vec<f64>,
    /// Rescaled `F^{(m)}` for `m = 1..=m_max`; `∞` when fewer values exist.
    pub order_stats: Vec<f64>,
    pub diagnostics: RunDiagnostics,
}

/// Per-replication settings for [`run_model`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub t: f64,
    /// Rescaled cutoff; values above `x_max t^{-γ}` are not collected.
    pub x_max: f64,
    pub m_max: usize,
    /// `None` picks grid pruning for metric-compatible models and brute force otherwise.
    pub strategy: Option<EnumerationStrategy>,
}

impl RunParams {
    pub fn new(t: f64, x_max: f64, m_max: usize) -> Self {
        RunParams { t, x_max, m_max, strategy: None }
    }
}

/// Distance within `W` of two flats hitting it.
pub fn f_proximity(e: &Flat, f: &Flat, w: &ConvexBody) -> Result<f64> {
    Ok(dist_within_window(e, f, w, 1e-10)?.value)
}

/// `V_j(E_1 ∩ ... ∩ E_ℓ ∩ B^d)`; `None` when the intersection misses the
/// ball, is degenerate, or has `V_j = 0`.
pub fn f_intersecting(flats: &[&Flat], j: usize) -> Option<f64> {
    let owned: Vec<Flat> = flats.iter().map(|f| (*f).clone()).collect();
    let flat = intersect_flats(&owned)?;
    let d = flat.ambient_dim();
    let ball = ConvexBody::Ball { center: vec![0.0; d], radius: 1.0 };
    let sec = flat_ball_intersection(&flat, &ball).ok()??;
    if sec.dim < j {
        return None;
    }
    let v = binomial(sec.dim, j) * kappa(sec.dim) / kappa(sec.dim - j) * pow(sec.radius, j as f64);
    (v > 0.0).then_some(v)
}

/// [`f_intersecting`] for two hyperplanes, in closed form.
pub fn f_intersecting_hyperplane_pair(h1: &Hyperplane, h2: &Hyperplane, j: usize) -> Option<f64> {
    let d = h1.dim();
    let c = linalg::dot(&h1.normal, &h2.normal);
    let s2 = 1.0 - c * c;
    if s2 <= RANK_TOL * RANK_TOL {
        return None;
    }
    let (p1, p2) = (h1.offset, h2.offset);
    // squared distance from the origin to the (d-2)-flat H1 ∩ H2
    let r2 = (p1 * p1 - 2.0 * c * p1 * p2 + p2 * p2) / s2;
    if r2 >= 1.0 {
        return None;
    }
    let m = d - 2;
    if m < j {
        return None;
    }
    let v = binomial(m, j) * kappa(m) / kappa(m - j) * pow(1.0 - r2, j as f64 / 2.0);
    (v > 0.0).then_some(v)
}

pub fn f_sphere_chord(y1: &[f64], y2: &[f64]) -> f64 {
    linalg::dist(y1, y2)
}

/// Edge length when the points are joined in the Gilbert graph.
pub fn f_gilbert(y1: &[f64], y2: &[f64], delta: f64) -> Option<f64> {
    let r = linalg::dist(y1, y2);
    (r <= delta).then_some(r)
}

pub fn f_point_simplex<P: AsRef<[f64]>>(vertices: &[P]) -> Result<f64> {
    simplex_volume(vertices)
}

/// Outcome of [`f_hyperplane_simplex`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimplexOutcome {
    Volume(f64),
    /// Some vertex lies outside the window.
    Outside,
    /// Some `d` of the hyperplanes have no unique common point, or the
    /// simplex has zero volume.
    Degenerate,
}

/// Simplex cut out by `d + 1` hyperplanes, admissible when it lies in `W`.
pub fn f_hyperplane_simplex(hs: &[&Hyperplane], w: &ConvexBody) -> SimplexOutcome {
    let d = w.dim();
    if hs.len() != d + 1 {
        return SimplexOutcome::Degenerate;
    }
    let mut vertices: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    for skip in 0..=d {
        let mut a = Vec::with_capacity(d * d);
        let mut b = Vec::with_capacity(d);
        for (i, h) in hs.iter().enumerate() {
            if i != skip {
                a.extend_from_slice(&h.normal);
                b.push(h.offset);
            }
        }
        let Some(v) = linalg::solve(a, b, d, RANK_TOL) else {
            return SimplexOutcome::Degenerate;
        };
        if !w.contains(&v, 1e-12) {
            return SimplexOutcome::Outside;
        }
        vertices.push(v);
    }
    match simplex_volume(&vertices) {
        Ok(v) if v > 0.0 => SimplexOutcome::Volume(v),
        _ => SimplexOutcome::Degenerate,
    }
}

/// Draws the model's Poisson input at intensity `t`.
pub fn sample_model<R: Rng + ?Sized>(spec: &ModelSpec, t: f64, rng: &mut R) -> Result<Sample> {
    spec.validate()?;
    Ok(match spec {
        ModelSpec::ProximityFlats { k, window } => {
            Sample::Flats(sampling::sample_isotropic_flats(t, *k, window, rng)?.flats)
        }
        ModelSpec::IntersectingFlats { d, k, .. } => {
            let ball = spec.window().unwrap();
            if *k + 1 == *d {
                Sample::Hyperplanes(sampling::sample_hyperplanes(t, &ball, rng)?)
            } else {
                Sample::Flats(sampling::sample_isotropic_flats(t, *k, &ball, rng)?.flats)
            }
        }
        ModelSpec::SpherePolytope { d } => Sample::Points(sampling::sample_points_on_sphere(t, *d, rng).points),
        ModelSpec::Gilbert { window, .. } | ModelSpec::PointSimplices { window } => {
            Sample::Points(sampling::sample_points_in_body(t, window, rng).points)
        }
        ModelSpec::HyperplaneSimplices { window } => Sample::Hyperplanes(sampling::sample_hyperplanes(t, window, rng)?),
    })
}

/// Samples the model and collects one replication.
pub fn run_model(spec: &ModelSpec, params: &RunParams, stream: SeededStream) -> Result<SimulationRun> {
    let mut rng = stream.rng();
    let sample = sample_model(spec, params.t, &mut rng)?;
    run_on_sample(spec, params, sample)
}

fn wrong_sample(spec: &ModelSpec) -> Error {
    Error::Precondition(alloc::format!("sample kind does not match model {}", spec.name()))
}

/// A flat together with its chord through the window.
struct ClippedFlat {
    flat: Flat,
    segment: Option<(Vec<f64>, Vec<f64>)>,
}

/// Collects values, rescaled values and order statistics from a given sample.
pub fn run_on_sample(spec: &ModelSpec, params: &RunParams, sample: Sample) -> Result<SimulationRun> {
    spec.validate()?;
    if !(params.t > 0.0) || !(params.x_max > 0.0) {
        return Err(domain!("t and x_max must be positive"));
    }
    let gamma = spec.gamma();
    let threshold = spec.threshold(params.t, params.x_max);
    let strategy = params.strategy.unwrap_or(if spec.metric_compatible() {
        EnumerationStrategy::GridPrune { cell: threshold }
    } else {
        EnumerationStrategy::BruteForce
    });
    let k = spec.arity();
    let skipped = Cell::new(0u64);
    let unconverged = Cell::new(0u64);
    let values = match (spec, &sample) {
        (ModelSpec::ProximityFlats { window, .. }, Sample::Flats(flats)) => {
            let items: Vec<ClippedFlat> = flats
                .iter()
                .map(|f| ClippedFlat { flat: f.clone(), segment: f.clip_low_dim(window) })
                .collect();
            let f = Plain(|t: &[&ClippedFlat]| {
                if let (Some((a0, a1)), Some((b0, b1))) = (&t[0].segment, &t[1].segment) {
                    return Some(segment_distance(a0, a1, b0, b1));
                }
                match dist_within_window(&t[0].flat, &t[1].flat, window, 1e-10) {
                    Ok(r) => {
                        if !r.converged {
                            unconverged.set(unconverged.get() + 1);
                        }
                        Some(r.value)
                    }
                    Err(_) => {
                        skipped.set(skipped.get() + 1);
                        None
                    }
                }
            });
            enumerate_below(&items, k, &f, threshold, strategy)?
        }
        (ModelSpec::IntersectingFlats { ell, j, .. }, Sample::Hyperplanes(hs)) if *ell == 2 => {
            let f = Plain(|t: &[&Hyperplane]| f_intersecting_hyperplane_pair(t[0], t[1], *j));
            enumerate_below(hs, k, &f, threshold, strategy)?
        }
        (ModelSpec::IntersectingFlats { j, .. }, Sample::Hyperplanes(hs)) => {
            let flats: Vec<Flat> = hs.iter().map(Hyperplane::to_flat).collect();
            let f = Plain(|t: &[&Flat]| f_intersecting(t, *j));
            enumerate_below(&flats, k, &f, threshold, strategy)?
        }
        (ModelSpec::IntersectingFlats { j, .. }, Sample::Flats(flats)) => {
            let f = Plain(|t: &[&Flat]| f_intersecting(t, *j));
            enumerate_below(flats, k, &f, threshold, strategy)?
        }
        (ModelSpec::SpherePolytope { .. }, Sample::Points(pts)) => {
            let f = Metric(|t: &[&Vec<f64>]| Some(f_sphere_chord(t[0], t[1])));
            enumerate_below(pts, k, &f, threshold, strategy)?
        }
        (ModelSpec::Gilbert { delta, .. }, Sample::Points(pts)) => {
            let dt = delta.delta(params.t);
            let f = Metric(|t: &[&Vec<f64>]| f_gilbert(t[0], t[1], dt));
            enumerate_below(pts, k, &f, threshold, strategy)?
        }
        (ModelSpec::PointSimplices { .. }, Sample::Points(pts)) => {
            let f = Plain(|t: &[&Vec<f64>]| simplex_volume(t).ok());
            enumerate_below(pts, k, &f, threshold, strategy)?
        }
        (ModelSpec::HyperplaneSimplices { window }, Sample::Hyperplanes(hs)) => {
            let f = Plain(|t: &[&Hyperplane]| match f_hyperplane_simplex(t, window) {
                SimplexOutcome::Volume(v) => Some(v),
                SimplexOutcome::Outside => None,
                SimplexOutcome::Degenerate => {
                    skipped.set(skipped.get() + 1);
                    None
                }
            });
            enumerate_below(hs, k, &f, threshold, strategy)?
        }
        _ => return Err(wrong_sample(spec)),
    };
    let scale = pow(params.t, gamma);
    let rescaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
    let order_stats = order_statistics(&rescaled, params.m_max);
    Ok(SimulationRun {
        t: params.t,
        gamma,
        threshold,
        sample,
        values,
        rescaled,
        order_stats,
        diagnostics: RunDiagnostics { skipped_degenerate: skipped.get(), unconverged: unconverged.get() },
    })
}

/// Parses a model name as used on the command line.
pub fn parse_model_name(name: &str) -> Option<&'static str> {
    const NAMES: [&str; 6] = [
        "proximity_flats",
        "intersecting_flats",
        "sphere_polytope",
        "gilbert",
        "point_simplices",
        "hyperplane_simplices",
    ];
    let norm: String = name.chars().map(|c| if c == '-' { '_' } else { c }).collect();
    NAMES.iter().copied().find(|n| *n == norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn plane(n: [f64; 3], p: f64) -> Flat {
        Hyperplane::new(n.to_vec(), p).unwrap().to_flat()
    }

    #[test]
    fn intersecting_examples() {
        let a = plane([0.0, 0.0, 1.0], 0.0);
        let b = plane([0.0, 1.0, 0.0], 0.0);
        assert_relative_eq!(f_intersecting(&[&a, &b], 1).unwrap(), 2.0, max_relative = 1e-14);
        let a = plane([0.0, 0.0, 1.0], 0.6);
        let b = plane([0.0, 1.0, 0.0], 0.6);
        assert_relative_eq!(f_intersecting(&[&a, &b], 1).unwrap(), 2.0 * 0.28f64.sqrt(), max_relative = 1e-12);
        let a = plane([0.0, 0.0, 1.0], 2.0);
        let b = plane([0.0, 1.0, 0.0], 0.0);
        assert!(f_intersecting(&[&a, &b], 1).is_none());
    }

    #[test]
    fn hyperplane_pair_fast_path_matches_general_path() {
        let mut rng = sampling::split_stream(5, 0).rng();
        let ball = ConvexBody::unit_ball(3).unwrap();
        for _ in 0..500 {
            let h1 = sampling::random_hyperplane_hitting(&ball, &mut rng);
            let h2 = sampling::random_hyperplane_hitting(&ball, &mut rng);
            let fast = f_intersecting_hyperplane_pair(&h1, &h2, 1);
            let slow = f_intersecting(&[&h1.to_flat(), &h2.to_flat()], 1);
            match (fast, slow) {
                (Some(a), Some(b)) => assert_relative_eq!(a, b, max_relative = 1e-9),
                (a, b) => assert_eq!(a.is_some(), b.is_some()),
            }
        }
    }

    #[test]
    fn chords_and_edges() {
        assert_eq!(f_sphere_chord(&[1.0, 0.0], &[-1.0, 0.0]), 2.0);
        assert_relative_eq!(f_sphere_chord(&[1.0, 0.0], &[0.0, 1.0]), 2f64.sqrt());
        assert_eq!(f_sphere_chord(&[0.0, 1.0], &[0.0, 1.0]), 0.0);
        assert_relative_eq!(f_gilbert(&[0.0], &[0.05], 0.1).unwrap(), 0.05);
        assert!(f_gilbert(&[0.0], &[0.2], 0.1).is_none());
        assert_eq!(f_gilbert(&[0.3], &[0.3], 0.1), Some(0.0));
    }

    #[test]
    fn hyperplane_simplex_examples() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let h = [
            Hyperplane::new(vec![1.0, 0.0], 0.0).unwrap(),
            Hyperplane::new(vec![0.0, 1.0], 0.0).unwrap(),
            Hyperplane::new(vec![s, s], s).unwrap(),
        ];
        let refs: Vec<&Hyperplane> = h.iter().collect();
        let sq = ConvexBody::unit_cube(2).unwrap();
        match f_hyperplane_simplex(&refs, &sq) {
            SimplexOutcome::Volume(v) => assert_relative_eq!(v, 0.5, max_relative = 1e-12),
            other => panic!("{other:?}"),
        }
        let small = ConvexBody::ball(vec![0.0, 0.0], 0.3).unwrap();
        assert_eq!(f_hyperplane_simplex(&refs, &small), SimplexOutcome::Outside);
        let par = [h[0].clone(), Hyperplane::new(vec![1.0, 0.0], 0.5).unwrap(), h[2].clone()];
        let refs: Vec<&Hyperplane> = par.iter().collect();
        assert_eq!(f_hyperplane_simplex(&refs, &sq), SimplexOutcome::Degenerate);
    }

    #[test]
    fn hyperplane_simplex_scales_with_offset() {
        // moving the last hyperplane to distance δ from the common point of the
        // others scales the volume by δ^d
        let mut rng = sampling::split_stream(6, 0).rng();
        let big = ConvexBody::ball(vec![0.0, 0.0, 0.0], 1e6).unwrap();
        for _ in 0..50 {
            let hs: Vec<Hyperplane> = (0..3)
                .map(|_| Hyperplane { normal: sampling::uniform_direction(3, &mut rng), offset: 0.0 })
                .collect();
            let u = sampling::uniform_direction(3, &mut rng);
            let vol = |delta: f64| {
                let mut all = hs.clone();
                all.push(Hyperplane { normal: u.clone(), offset: delta });
                let refs: Vec<&Hyperplane> = all.iter().collect();
                match f_hyperplane_simplex(&refs, &big) {
                    SimplexOutcome::Volume(v) => v,
                    other => panic!("{other:?}"),
                }
            };
            assert_relative_eq!(vol(0.37), pow(0.37, 3.0) * vol(1.0), max_relative = 1e-8);
        }
    }

    #[test]
    fn forced_gilbert_sample() {
        let w = ConvexBody::unit_cube(1).unwrap();
        let spec = ModelSpec::Gilbert { window: w, delta: DeltaRule { coefficient: 0.5, exponent: 0.0 } };
        let sample = Sample::Points(vec![vec![0.1], vec![0.2], vec![0.5]]);
        let run = run_on_sample(&spec, &RunParams::new(1.0, 1.0, 4), sample).unwrap();
        assert_eq!(run.values.len(), 3);
        for (v, want) in run.values.iter().zip([0.1, 0.3, 0.4]) {
            assert_relative_eq!(*v, want, max_relative = 1e-12);
        }
        assert_eq!(run.order_stats[3], f64::INFINITY);
    }

    #[test]
    fn empty_sample() {
        let spec = ModelSpec::gilbert(ConvexBody::unit_cube(2).unwrap());
        let run = run_on_sample(&spec, &RunParams::new(10.0, 1.0, 1), Sample::Points(vec![])).unwrap();
        assert!(run.values.is_empty());
        assert_eq!(run.order_stats, vec![f64::INFINITY]);
    }

    #[test]
    fn forced_triangles() {
        let spec = ModelSpec::PointSimplices { window: ConvexBody::unit_cube(2).unwrap() };
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let run = run_on_sample(&spec, &RunParams::new(1.0, 10.0, 4), Sample::Points(pts)).unwrap();
        assert_eq!(run.values, vec![0.5; 4]);
    }

    #[test]
    fn validation() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        assert!(ModelSpec::ProximityFlats { k: 1, window: ball.clone() }.validate().is_ok());
        assert!(ModelSpec::ProximityFlats { k: 2, window: ball.clone() }.validate().is_err());
        assert!(ModelSpec::IntersectingFlats { d: 3, k: 2, ell: 2, j: 1 }.validate().is_ok());
        assert!(ModelSpec::IntersectingFlats { d: 3, k: 2, ell: 2, j: 2 }.validate().is_err());
        assert!(ModelSpec::IntersectingFlats { d: 3, k: 1, ell: 1, j: 1 }.validate().is_err());
        let bad = ModelSpec::Gilbert { window: ball, delta: DeltaRule { coefficient: 1.0, exponent: 0.7 } };
        assert!(bad.validate().is_err());
        assert!(ModelSpec::SpherePolytope { d: 1 }.validate().is_err());
    }

    #[test]
    fn gammas_and_arities() {
        let sq = ConvexBody::unit_cube(2).unwrap();
        assert_eq!(ModelSpec::gilbert(sq.clone()).gamma(), 1.0);
        assert_eq!(ModelSpec::PointSimplices { window: sq.clone() }.gamma(), 3.0);
        assert_eq!(ModelSpec::HyperplaneSimplices { window: sq.clone() }.gamma(), 6.0);
        assert_eq!(ModelSpec::HyperplaneSimplices { window: sq }.arity(), 3);
        assert_eq!(ModelSpec::SpherePolytope { d: 3 }.gamma(), 1.0);
        assert_eq!(ModelSpec::IntersectingFlats { d: 3, k: 2, ell: 2, j: 1 }.gamma(), 1.0);
        let ball = ConvexBody::unit_ball(3).unwrap();
        assert_eq!(ModelSpec::ProximityFlats { k: 1, window: ball }.gamma(), 2.0);
    }
}
