//! Convex and integral geometry primitives: ball constants, intrinsic volumes,
//! affine flats, their intersections, and distances between flats measured
//! inside a window.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, pow, sqrt};

use crate::error::domain;
use crate::linalg::{self, axpy, dot, norm};
use crate::numeric::{binomial, factorial, kappa};
use crate::{Error, Result};

/// Largest ambient dimension supported by windows and models.
pub const MAX_DIM: usize = 10;

/// Tolerance for orthonormality checks on frames and normals.
pub const FRAME_TOL: f64 = 1e-12;

/// Singular-value tolerance below which stacked flat constraints count as
/// rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Observation window: a Euclidean ball or an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ConvexBody {
    Ball { center: Vec<f64>, radius: f64 },
    #[cfg_attr(feature = "serde", serde(rename = "box"))]
    Cuboid { lower: Vec<f64>, upper: Vec<f64> },
}

impl ConvexBody {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let b = ConvexBody::Ball { center, radius };
        b.validate()?;
        Ok(b)
    }

    pub fn unit_ball(d: usize) -> Result<Self> {
        Self::ball(vec![0.0; d], 1.0)
    }

    pub fn cuboid(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = ConvexBody::Cuboid { lower, upper };
        b.validate()?;
        Ok(b)
    }

    /// `[0, 1]^d`.
    pub fn unit_cube(d: usize) -> Result<Self> {
        Self::cuboid(vec![0.0; d], vec![1.0; d])
    }

    /// Checks the invariants that the public constructors enforce. Useful
    /// after deserialization.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || d > MAX_DIM {
            return Err(domain!("window dimension {d} outside 1..={MAX_DIM}"));
        }
        match self {
            ConvexBody::Ball { center, radius } => {
                if !(*radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
                    return Err(domain!("ball needs a finite center and positive radius"));
                }
            }
            ConvexBody::Cuboid { lower, upper } => {
                if lower.len() != upper.len() {
                    return Err(domain!("box corners have different dimensions"));
                }
                if lower.iter().zip(upper).any(|(l, u)| !(u - l > 0.0 && (u - l).is_finite())) {
                    return Err(domain!("box side lengths must be positive and finite"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { center, .. } => center.len(),
            ConvexBody::Cuboid { lower, .. } => lower.len(),
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            ConvexBody::Ball { center, .. } => center.clone(),
            ConvexBody::Cuboid { lower, upper } => {
                lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect()
            }
        }
    }

    /// Radius of the smallest ball around [`ConvexBody::center`] containing the body.
    pub fn circumradius(&self) -> f64 {
        match self {
            ConvexBody::Ball { radius, .. } => *radius,
            ConvexBody::Cuboid { lower, upper } => 0.5 * linalg::dist(lower, upper),
        }
    }

    pub fn volume(&self) -> f64 {
        self.intrinsic_volume(self.dim())
    }

    /// `V_j(W)` for `0 <= j <= d`; zero above the dimension.
    pub fn intrinsic_volume(&self, j: usize) -> f64 {
        let d = self.dim();
        if j > d {
            return 0.0;
        }
        match self {
            ConvexBody::Ball { radius, .. } => ball_iv(d, j, *radius),
            ConvexBody::Cuboid { lower, upper } => {
                let sides: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
                elementary_symmetric(&sides)[j]
            }
        }
    }

    /// `(V_0, ..., V_d)`.
    pub fn intrinsic_volumes(&self) -> Vec<f64> {
        (0..=self.dim()).map(|j| self.intrinsic_volume(j)).collect()
    }

    pub fn contains(&self, y: &[f64], eps: f64) -> bool {
        match self {
            ConvexBody::Ball { center, radius } => linalg::dist(y, center) <= radius + eps,
            ConvexBody::Cuboid { lower, upper } => y
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - eps && *v <= u + eps),
        }
    }

    /// Nearest point of the body.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        let mut out = y.to_vec();
        self.project_in_place(&mut out);
        out
    }

    pub(crate) fn project_in_place(&self, y: &mut [f64]) {
        match self {
            ConvexBody::Ball { center, radius } => {
                let r = linalg::dist(y, center);
                if r > *radius {
                    let f = radius / r;
                    for (v, c) in y.iter_mut().zip(center) {
                        *v = c + (*v - c) * f;
                    }
                }
            }
            ConvexBody::Cuboid { lower, upper } => {
                for ((v, l), u) in y.iter_mut().zip(lower).zip(upper) {
                    *v = v.clamp(*l, *u);
                }
            }
        }
    }

    /// Support function `max_{x in W} <u, x>`.
    pub fn support(&self, u: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball { center, radius } => dot(center, u) + radius * norm(u),
            ConvexBody::Cuboid { lower, upper } => u
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(ui, (l, h))| (ui * l).max(ui * h))
                .sum(),
        }
    }

    /// Inner parallel body `{x : B(x, s) ⊂ W}`; `None` once it is empty.
    pub fn inner_parallel(&self, s: f64) -> Option<ConvexBody> {
        match self {
            ConvexBody::Ball { center, radius } => (*radius > s).then(|| ConvexBody::Ball {
                center: center.clone(),
                radius: radius - s,
            }),
            ConvexBody::Cuboid { lower, upper } => {
                if lower.iter().zip(upper).any(|(l, u)| u - l <= 2.0 * s) {
                    return None;
                }
                Some(ConvexBody::Cuboid {
                    lower: lower.iter().map(|l| l + s).collect(),
                    upper: upper.iter().map(|u| u - s).collect(),
                })
            }
        }
    }

    /// `V_{d-1}(W ∩ H)` for a hyperplane `H`.
    pub fn section_volume(&self, h: &Hyperplane) -> f64 {
        let d = self.dim();
        match self {
            ConvexBody::Ball { center, radius } => {
                let p = h.signed_distance(center);
                if fabs(p) >= *radius {
                    return 0.0;
                }
                kappa(d - 1) * pow(radius * radius - p * p, (d - 1) as f64 / 2.0)
            }
            ConvexBody::Cuboid { lower, upper } => {
                let sides: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
                let b = h.offset - dot(&h.normal, lower);
                box_section(&sides, &h.normal, b)
            }
        }
    }

    /// Chord of the line `p + s v` through the body, as the parameter interval.
    pub fn clip_line(&self, p: &[f64], v: &[f64]) -> Option<(f64, f64)> {
        match self {
            ConvexBody::Ball { center, radius } => {
                let w = linalg::sub(p, center);
                let a = dot(v, v);
                let b = dot(&w, v);
                let c = dot(&w, &w) - radius * radius;
                let disc = b * b - a * c;
                if disc < 0.0 || a == 0.0 {
                    return if a == 0.0 && c <= 0.0 { Some((0.0, 0.0)) } else { None };
                }
                let r = sqrt(disc);
                Some(((-b - r) / a, (-b + r) / a))
            }
            ConvexBody::Cuboid { lower, upper } => {
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for i in 0..p.len() {
                    if v[i] == 0.0 {
                        if p[i] < lower[i] || p[i] > upper[i] {
                            return None;
                        }
                    } else {
                        let a = (lower[i] - p[i]) / v[i];
                        let b = (upper[i] - p[i]) / v[i];
                        lo = lo.max(a.min(b));
                        hi = hi.min(a.max(b));
                    }
                }
                (lo <= hi).then_some((lo, hi))
            }
        }
    }
}

fn ball_iv(m: usize, j: usize, r: f64) -> f64 {
    binomial(m, j) * kappa(m) / kappa(m - j) * pow(r, j as f64)
}

fn elementary_symmetric(x: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; x.len() + 1];
    e[0] = 1.0;
    for (i, v) in x.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += e[j - 1] * v;
        }
    }
    e
}

// Below this a normal component is treated as zero and the section reduces
// to a prism; the cancellation error of the inclusion–exclusion sum grows
// like machine epsilon over the smallest component.
const PRISM_CUTOFF: f64 = 1e-6;

/// (d-1)-volume of `{y in Π[0, s_i] : a·y = b}` for unit `a`.
fn box_section(sides: &[f64], a: &[f64], b: f64) -> f64 {
    let d = sides.len();
    if d == 1 {
        return if b >= 0.0 && b <= sides[0] * fabs(a[0]) { 1.0 } else { 0.0 };
    }
    if let Some(i) = a.iter().position(|ai| fabs(*ai) < PRISM_CUTOFF) {
        let mut rest_s = sides.to_vec();
        let mut rest_a = a.to_vec();
        let si = rest_s.remove(i);
        rest_a.remove(i);
        let n = norm(&rest_a);
        rest_a.iter_mut().for_each(|x| *x /= n);
        return si * box_section(&rest_s, &rest_a, b / n);
    }
    // reflect so that every component is positive
    let mut b = b;
    let abs_a: Vec<f64> = a.iter().map(|x| fabs(*x)).collect();
    for i in 0..d {
        if a[i] < 0.0 {
            b -= a[i] * sides[i];
        }
    }
    let prod: f64 = abs_a.iter().product();
    let mut total = 0.0;
    for mask in 0u32..(1 << d) {
        let shift: f64 = (0..d).filter(|i| mask >> i & 1 == 1).map(|i| abs_a[i] * sides[i]).sum();
        let r = b - shift;
        if r > 0.0 {
            let term = pow(r, (d - 1) as f64);
            if mask.count_ones() % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
    }
    (total / (factorial(d - 1) * prod)).max(0.0)
}

/// `κ_d`, the volume of the unit ball in `R^d`, for `0 <= d <= 20`.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    if d > 20 {
        return Err(domain!("unit_ball_volume supports d <= 20, got {d}"));
    }
    Ok(kappa(d))
}

/// `V_j` of an `m`-dimensional ball of radius `r`.
pub fn intrinsic_volume_ball(m: usize, j: usize, r: f64) -> Result<f64> {
    if j > m {
        return Err(domain!("intrinsic volume order {j} exceeds dimension {m}"));
    }
    if !(r >= 0.0) {
        return Err(domain!("radius must be nonnegative, got {r}"));
    }
    Ok(ball_iv(m, j, r))
}

/// `(V_0, ..., V_d)` of a box with the given side lengths.
pub fn intrinsic_volumes_box(sides: &[f64]) -> Result<Vec<f64>> {
    if sides.iter().any(|s| !(*s > 0.0)) {
        return Err(domain!("box side lengths must be positive"));
    }
    Ok(elementary_symmetric(sides))
}

/// `ς_{d,i,k} = k!(d-k+i)! κ_k κ_{d-k+i} / (d! i! κ_d κ_i)`.
pub fn crofton_constant(d: usize, i: usize, k: usize) -> Result<f64> {
    if k > d || i > k || d > 20 {
        return Err(domain!("crofton constant needs 0 <= i <= k <= d <= 20, got d={d} i={i} k={k}"));
    }
    let e = d - k + i;
    Ok(factorial(k) * factorial(e) * kappa(k) * kappa(e)
        / (factorial(d) * factorial(i) * kappa(d) * kappa(i)))
}

/// Volume of the simplex spanned by `d + 1` points of `R^d`.
pub fn simplex_volume<P: AsRef<[f64]>>(vertices: &[P]) -> Result<f64> {
    let Some(first) = vertices.first() else {
        return Err(domain!("simplex needs at least one vertex"));
    };
    let v0 = first.as_ref();
    let d = v0.len();
    if vertices.len() != d + 1 || vertices.iter().any(|v| v.as_ref().len() != d) {
        return Err(domain!("simplex in R^{d} needs {} vertices of dimension {d}", d + 1));
    }
    if d == 2 {
        let (a, b) = (vertices[1].as_ref(), vertices[2].as_ref());
        let cross = (a[0] - v0[0]) * (b[1] - v0[1]) - (a[1] - v0[1]) * (b[0] - v0[0]);
        return Ok(0.5 * fabs(cross));
    }
    let mut m = Vec::with_capacity(d * d);
    for v in &vertices[1..] {
        m.extend(v.as_ref().iter().zip(v0).map(|(a, b)| a - b));
    }
    Ok(fabs(linalg::det(m, d)) / factorial(d))
}

/// A `k`-dimensional affine subspace `base + span(frame)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Flat {
    base: Vec<f64>,
    frame: Vec<Vec<f64>>,
}

impl Flat {
    /// `frame` must be orthonormal to [`FRAME_TOL`] and have fewer than `d` vectors.
    pub fn new(base: Vec<f64>, frame: Vec<Vec<f64>>) -> Result<Self> {
        let d = base.len();
        if d == 0 || frame.len() >= d {
            return Err(domain!("flat of dimension {} in R^{d} is not proper", frame.len()));
        }
        for (i, u) in frame.iter().enumerate() {
            if u.len() != d {
                return Err(domain!("frame vector {i} has dimension {} not {d}", u.len()));
            }
            for (j, v) in frame.iter().enumerate().take(i + 1) {
                let want = if i == j { 1.0 } else { 0.0 };
                if fabs(dot(u, v) - want) > FRAME_TOL {
                    return Err(domain!("frame is not orthonormal (pair {j},{i})"));
                }
            }
        }
        Ok(Flat { base, frame })
    }

    /// Builds a flat from arbitrary spanning vectors, orthonormalizing them.
    pub fn from_span(base: Vec<f64>, span: &[Vec<f64>]) -> Result<Self> {
        let frame = linalg::orthonormalize(span, RANK_TOL)
            .ok_or_else(|| domain!("spanning vectors are linearly dependent"))?;
        Flat::new(base, frame)
    }

    pub(crate) fn from_parts_unchecked(base: Vec<f64>, frame: Vec<Vec<f64>>) -> Self {
        Flat { base, frame }
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    /// Orthonormal basis of the orthogonal complement of the direction space.
    pub fn normals(&self) -> Vec<Vec<f64>> {
        linalg::complement(&self.frame, self.ambient_dim())
    }

    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        let mut out = self.base.clone();
        let w = linalg::sub(y, &self.base);
        for f in &self.frame {
            axpy(dot(&w, f), f, &mut out);
        }
        out
    }

    pub fn distance(&self, y: &[f64]) -> f64 {
        linalg::dist(&self.project(y), y)
    }

    /// Whether the flat meets the window.
    pub fn hits(&self, w: &ConvexBody) -> bool {
        match (w, self.dim()) {
            (ConvexBody::Ball { center, radius }, _) => self.distance(center) <= *radius,
            (ConvexBody::Cuboid { .. }, 0) => w.contains(&self.base, 0.0),
            (ConvexBody::Cuboid { .. }, 1) => w.clip_line(&self.base, &self.frame[0]).is_some(),
            (ConvexBody::Cuboid { .. }, k) if k + 1 == self.ambient_dim() => {
                let n = &self.normals()[0];
                let c = dot(n, &self.base);
                let neg: Vec<f64> = n.iter().map(|x| -x).collect();
                c <= w.support(n) && -c <= w.support(&neg)
            }
            _ => {
                let p = project_onto_flat_in_body(&w.center(), self, w, 1e-12, DEFAULT_MAX_ITER);
                self.distance(&p.point) <= 1e-8 && w.contains(&p.point, 1e-8)
            }
        }
    }

    /// `E ∩ W` as a segment `(a, b)` when the flat has dimension at most one.
    pub(crate) fn clip_low_dim(&self, w: &ConvexBody) -> Option<(Vec<f64>, Vec<f64>)> {
        match self.dim() {
            0 => w.contains(&self.base, 0.0).then(|| (self.base.clone(), self.base.clone())),
            1 => {
                let v = &self.frame[0];
                let (lo, hi) = w.clip_line(&self.base, v)?;
                let mut a = self.base.clone();
                axpy(lo, v, &mut a);
                let mut b = self.base.clone();
                axpy(hi, v, &mut b);
                Some((a, b))
            }
            _ => None,
        }
    }
}

/// Hyperplane `{x : <normal, x> = offset}` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if fabs(norm(&normal) - 1.0) > FRAME_TOL {
            return Err(domain!("hyperplane normal must have unit length"));
        }
        if !offset.is_finite() {
            return Err(domain!("hyperplane offset must be finite"));
        }
        Ok(Hyperplane { normal, offset })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn signed_distance(&self, y: &[f64]) -> f64 {
        dot(&self.normal, y) - self.offset
    }

    pub fn to_flat(&self) -> Flat {
        let base = self.normal.iter().map(|n| n * self.offset).collect();
        let frame = linalg::complement(core::slice::from_ref(&self.normal), self.dim());
        Flat::from_parts_unchecked(base, frame)
    }
}

/// Affine intersection of flats; `None` when the stacked constraints are
/// inconsistent or rank deficient beyond [`RANK_TOL`].
pub fn intersect_flats(flats: &[Flat]) -> Option<Flat> {
    let d = flats.first()?.ambient_dim();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for f in flats {
        if f.ambient_dim() != d {
            return None;
        }
        for n in f.normals() {
            rhs.push(dot(&n, &f.base));
            rows.push(n);
        }
    }
    if rows.len() > d {
        return None;
    }
    // Gram–Schmidt on the rows, carrying the right-hand side along
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    let mut c: Vec<f64> = Vec::with_capacity(rows.len());
    for (mut w, mut b) in rows.into_iter().zip(rhs) {
        for _ in 0..2 {
            for (qi, ci) in q.iter().zip(&c) {
                let proj = dot(&w, qi);
                axpy(-proj, qi, &mut w);
                b -= proj * ci;
            }
        }
        let n = norm(&w);
        if n <= RANK_TOL {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= n);
        q.push(w);
        c.push(b / n);
    }
    let mut base = vec![0.0; d];
    for (qi, ci) in q.iter().zip(&c) {
        axpy(*ci, qi, &mut base);
    }
    let frame = linalg::complement(&q, d);
    Some(Flat::from_parts_unchecked(base, frame))
}

/// A lower-dimensional ball `W ∩ E` for a ball window.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSection {
    pub center: Vec<f64>,
    pub radius: f64,
    pub dim: usize,
}

/// Intersection of a flat with a ball window; errors for box windows.
pub fn flat_ball_intersection(flat: &Flat, ball: &ConvexBody) -> Result<Option<BallSection>> {
    let ConvexBody::Ball { center, radius } = ball else {
        return Err(Error::Precondition("flat_ball_intersection needs a ball".into()));
    };
    let p = flat.project(center);
    let dist = linalg::dist(&p, center);
    if dist > *radius {
        return Ok(None);
    }
    Ok(Some(BallSection {
        center: p,
        radius: sqrt((radius * radius - dist * dist).max(0.0)),
        dim: flat.dim(),
    }))
}

/// Default iteration cap for the projection schemes.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Result of [`dist_within_window`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowDistance {
    pub value: f64,
    /// `false` when the iteration cap was hit before the tolerance was met.
    pub converged: bool,
    /// Zero for the closed-form path.
    pub iterations: usize,
}

/// Nearest point of a convex set to `y`, with convergence bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Projection {
    pub point: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Dykstra's scheme for the projection onto `E ∩ W`.
pub(crate) fn project_onto_flat_in_body(
    y: &[f64],
    e: &Flat,
    w: &ConvexBody,
    tol: f64,
    max_iter: usize,
) -> Projection {
    let d = y.len();
    let mut x = y.to_vec();
    let mut p = vec![0.0; d];
    let mut q = vec![0.0; d];
    for it in 1..=max_iter {
        let xp: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let yk = e.project(&xp);
        for i in 0..d {
            p[i] = xp[i] - yk[i];
        }
        let mut xn: Vec<f64> = yk.iter().zip(&q).map(|(a, b)| a + b).collect();
        w.project_in_place(&mut xn);
        for i in 0..d {
            q[i] = yk[i] + q[i] - xn[i];
        }
        let change = linalg::dist(&xn, &x).max(linalg::dist(&xn, &yk));
        x = xn;
        if change < tol {
            return Projection { point: x, converged: true, iterations: it };
        }
    }
    Projection { point: x, converged: false, iterations: max_iter }
}

/// Nearest point of `W` to `y`.
pub fn project_onto_body(y: &[f64], w: &ConvexBody) -> Vec<f64> {
    w.project(y)
}

/// `min { |y1 - y2| : y1 in E ∩ W, y2 in F ∩ W }`.
///
/// Flats of dimension at most one are clipped to segments and handled in
/// closed form. Otherwise alternating projections between `E ∩ W` and
/// `F ∩ W` run until the distance changes by less than `tol`, each
/// projection by [`DEFAULT_MAX_ITER`]-capped Dykstra iterations.
pub fn dist_within_window(e: &Flat, f: &Flat, w: &ConvexBody, tol: f64) -> Result<WindowDistance> {
    if e.ambient_dim() != w.dim() || f.ambient_dim() != w.dim() {
        return Err(domain!("flats and window live in different dimensions"));
    }
    if e.dim() <= 1 && f.dim() <= 1 {
        let (Some((a0, a1)), Some((b0, b1))) = (e.clip_low_dim(w), f.clip_low_dim(w)) else {
            return Err(Error::Precondition("flat does not hit the window".into()));
        };
        return Ok(WindowDistance {
            value: segment_distance(&a0, &a1, &b0, &b1),
            converged: true,
            iterations: 0,
        });
    }
    dist_within_window_iterative(e, f, w, tol, DEFAULT_MAX_ITER)
}

/// The iterative path of [`dist_within_window`], exposed for cross-checks.
pub fn dist_within_window_iterative(
    e: &Flat,
    f: &Flat,
    w: &ConvexBody,
    tol: f64,
    max_iter: usize,
) -> Result<WindowDistance> {
    if !e.hits(w) || !f.hits(w) {
        return Err(Error::Precondition("flat does not hit the window".into()));
    }
    let inner_tol = tol * 0.1;
    let start = project_onto_flat_in_body(&w.center(), e, w, inner_tol, max_iter);
    let mut converged = start.converged;
    let mut iterations = start.iterations;
    let mut a = start.point;
    let mut prev = f64::INFINITY;
    for _ in 0..max_iter {
        let pb = project_onto_flat_in_body(&a, f, w, inner_tol, max_iter);
        let pa = project_onto_flat_in_body(&pb.point, e, w, inner_tol, max_iter);
        converged &= pb.converged && pa.converged;
        iterations += pb.iterations + pa.iterations;
        let value = linalg::dist(&pa.point, &pb.point);
        a = pa.point;
        if fabs(prev - value) < tol {
            return Ok(WindowDistance { value, converged, iterations });
        }
        prev = value;
    }
    Ok(WindowDistance { value: prev, converged: false, iterations })
}

/// Distance between segments `[p0, p1]` and `[q0, q1]` in any dimension.
pub fn segment_distance(p0: &[f64], p1: &[f64], q0: &[f64], q1: &[f64]) -> f64 {
    let u = linalg::sub(p1, p0);
    let v = linalg::sub(q1, q0);
    let r = linalg::sub(p0, q0);
    let a = dot(&u, &u);
    let e = dot(&v, &v);
    let f = dot(&v, &r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return norm(&r);
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(&u, &r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(&u, &v);
            let denom = a * e - b * b;
            let s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t = t0;
                s = s0;
            }
        }
    }
    let mut diff = r;
    axpy(s, &u, &mut diff);
    axpy(-t, &v, &mut diff);
    norm(&diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn line(base: [f64; 3], dir: [f64; 3]) -> Flat {
        Flat::from_span(base.to_vec(), &[dir.to_vec()]).unwrap()
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1).unwrap(), 2.0);
        assert_relative_eq!(unit_ball_volume(2).unwrap(), PI);
        assert_relative_eq!(unit_ball_volume(3).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert!(unit_ball_volume(21).is_err());
    }

    #[test]
    fn ball_volume_recursion_in_gamma_form() {
        use crate::numeric::gamma_half;
        for d in 1..=10 {
            let lhs = unit_ball_volume(d).unwrap();
            let rhs = unit_ball_volume(d - 1).unwrap() * sqrt(PI) * gamma_half(d + 1) / gamma_half(d + 2);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
        }
    }

    #[test]
    fn intrinsic_volumes_of_balls() {
        assert_eq!(intrinsic_volume_ball(1, 1, 1.0).unwrap(), 2.0);
        assert_relative_eq!(intrinsic_volume_ball(2, 1, 1.0).unwrap(), PI);
        assert_eq!(intrinsic_volume_ball(3, 0, 0.5).unwrap(), 1.0);
        assert_relative_eq!(intrinsic_volume_ball(3, 2, 1.0).unwrap(), 2.0 * PI, max_relative = 1e-15);
        assert!(intrinsic_volume_ball(2, 3, 1.0).is_err());
    }

    #[test]
    fn intrinsic_volumes_of_boxes() {
        assert_eq!(intrinsic_volumes_box(&[1.0, 1.0]).unwrap(), vec![1.0, 2.0, 1.0]);
        assert_eq!(intrinsic_volumes_box(&[2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(intrinsic_volumes_box(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 3.0, 3.0, 1.0]);
        assert!(intrinsic_volumes_box(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn crofton_constants() {
        assert_relative_eq!(crofton_constant(2, 0, 1).unwrap(), 2.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(crofton_constant(3, 0, 1).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(crofton_constant(3, 0, 2).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(crofton_constant(3, 2, 2).unwrap(), 1.0, max_relative = 1e-15);
        assert!(crofton_constant(2, 2, 1).is_err());
    }

    #[test]
    fn simplices() {
        assert_eq!(simplex_volume(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap(), 0.5);
        let tet = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_relative_eq!(simplex_volume(&tet).unwrap(), 1.0 / 6.0);
        assert_eq!(simplex_volume(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap(), 0.0);
        assert!(simplex_volume(&[[0.0, 0.0], [1.0, 1.0]]).is_err());
    }

    #[test]
    fn flat_intersections() {
        let z0 = Hyperplane::new(vec![0.0, 0.0, 1.0], 0.0).unwrap().to_flat();
        let y0 = Hyperplane::new(vec![0.0, 1.0, 0.0], 0.0).unwrap().to_flat();
        let l = intersect_flats(&[z0, y0]).unwrap();
        assert_eq!(l.dim(), 1);
        assert!(norm(l.base()) < 1e-15);
        assert_relative_eq!(fabs(l.frame()[0][0]), 1.0);

        let a = Hyperplane::new(vec![0.0, 1.0], 0.0).unwrap().to_flat();
        let b = Hyperplane::new(vec![0.0, 1.0], 1.0).unwrap().to_flat();
        assert!(intersect_flats(&[a, b]).is_none());

        let s = core::f64::consts::FRAC_1_SQRT_2;
        let a = Hyperplane::new(vec![-s, s], 0.0).unwrap().to_flat();
        let b = Hyperplane::new(vec![s, s], 0.0).unwrap().to_flat();
        let p = intersect_flats(&[a, b]).unwrap();
        assert_eq!(p.dim(), 0);
        assert!(norm(p.base()) < 1e-15);
    }

    #[test]
    fn ball_sections() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let x = line([0.0; 3], [1.0, 0.0, 0.0]);
        let s = flat_ball_intersection(&x, &ball).unwrap().unwrap();
        assert_eq!((s.radius, s.dim), (1.0, 1));
        let plane = Hyperplane::new(vec![0.0, 0.0, 1.0], 0.6).unwrap().to_flat();
        let s = flat_ball_intersection(&plane, &ball).unwrap().unwrap();
        assert_relative_eq!(s.radius, 0.8, max_relative = 1e-14);
        assert_relative_eq!(s.center[2], 0.6, max_relative = 1e-14);
        assert_eq!(s.dim, 2);
        let far = Hyperplane::new(vec![0.0, 0.0, 1.0], 2.0).unwrap().to_flat();
        assert!(flat_ball_intersection(&far, &ball).unwrap().is_none());
        assert!(flat_ball_intersection(&far, &ConvexBody::unit_cube(3).unwrap()).is_err());
    }

    #[test]
    fn window_distances() {
        let w = ConvexBody::ball(vec![0.0; 3], 2.0).unwrap();
        let a = line([0.0; 3], [1.0, 0.0, 0.0]);
        let b = line([0.0, 1.0, 0.0], [1.0, 0.0, 0.0]);
        assert_relative_eq!(dist_within_window(&a, &b, &w, 1e-10).unwrap().value, 1.0, max_relative = 1e-12);
        let c = line([0.0; 3], [0.0, 1.0, 0.0]);
        assert!(dist_within_window(&a, &c, &w, 1e-10).unwrap().value < 1e-12);
        let skew = line([0.0, 0.0, 1.0], [0.0, 1.0, 0.0]);
        assert_relative_eq!(dist_within_window(&a, &skew, &w, 1e-10).unwrap().value, 1.0, max_relative = 1e-12);
        let miss = line([0.0, 0.0, 5.0], [0.0, 1.0, 0.0]);
        assert!(matches!(dist_within_window(&a, &miss, &w, 1e-10), Err(Error::Precondition(_))));
    }

    #[test]
    fn window_distance_is_cut_by_the_window() {
        // two lines crossing outside the unit disk at (0, 2)
        let w = ConvexBody::unit_ball(2).unwrap();
        let a = Flat::from_span(vec![0.0, 2.0], &[vec![1.0, 2.0]]).unwrap();
        let b = Flat::from_span(vec![0.0, 2.0], &[vec![-1.0, 2.0]]).unwrap();
        let exact = dist_within_window(&a, &b, &w, 1e-10).unwrap();
        let iter = dist_within_window_iterative(&a, &b, &w, 1e-10, DEFAULT_MAX_ITER).unwrap();
        assert!(exact.value > 0.1);
        assert!(fabs(exact.value - iter.value) < 1e-6, "{exact:?} {iter:?}");
    }

    #[test]
    fn projections() {
        let disk = ConvexBody::unit_ball(2).unwrap();
        assert_eq!(project_onto_body(&[2.0, 0.0], &disk), vec![1.0, 0.0]);
        let sq = ConvexBody::unit_cube(2).unwrap();
        assert_eq!(project_onto_body(&[0.2, 0.3], &sq), vec![0.2, 0.3]);
        assert_eq!(project_onto_body(&[-1.0, 2.0], &sq), vec![0.0, 1.0]);
    }

    #[test]
    fn box_sections() {
        let sq = ConvexBody::unit_cube(2).unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        // the diagonal x + y = 1
        let h = Hyperplane::new(vec![s, s], s).unwrap();
        assert_relative_eq!(sq.section_volume(&h), 2.0f64.sqrt(), max_relative = 1e-12);
        let h = Hyperplane::new(vec![1.0, 0.0], 0.3).unwrap();
        assert_relative_eq!(sq.section_volume(&h), 1.0);
        let h = Hyperplane::new(vec![-s, s], 0.0).unwrap();
        assert_relative_eq!(sq.section_volume(&h), 2.0f64.sqrt(), max_relative = 1e-12);
        let cube = ConvexBody::unit_cube(3).unwrap();
        let h = Hyperplane::new(vec![0.0, 0.0, 1.0], 0.5).unwrap();
        assert_relative_eq!(cube.section_volume(&h), 1.0, max_relative = 1e-12);
        let ball = ConvexBody::unit_ball(3).unwrap();
        assert_relative_eq!(ball.section_volume(&h), PI * 0.75, max_relative = 1e-12);
    }

    #[test]
    fn hyperplane_hits_box() {
        let cube = ConvexBody::unit_cube(3).unwrap();
        let n = vec![1.0 / 3f64.sqrt(); 3];
        assert!(Hyperplane::new(n.clone(), 1.7).unwrap().to_flat().hits(&cube));
        assert!(!Hyperplane::new(n, 1.8).unwrap().to_flat().hits(&cube));
    }
}
