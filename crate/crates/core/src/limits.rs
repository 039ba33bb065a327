//! Limit parameters `(γ, β, τ)`, the Weibull-process intensity and
//! order-statistic tails, mean tuple counts `α_t`, locality bounds `r_t`,
//! and numeric integration for the two models without a closed-form `β`.

use alloc::vec::Vec;

use libm::{acos, asin, exp, expm1, fabs, log1p, pow, sqrt};

use crate::error::domain;
use crate::geometry::{crofton_constant, ConvexBody, Hyperplane};
use crate::linalg::{self, dot};
use crate::models::{run_model, ModelSpec, RunParams};
use crate::numeric::{adaptive_simpson, binomial, factorial, gamma_half, kappa, sine_power_integral};
use crate::qmc::{direction_dims, direction_from_unit, rqmc_integrate, Aggregate, RqmcEstimate};
use crate::sampling::SeededStream;
use crate::stats::mc_mean_stderr;
use crate::{Error, Result};

/// Where a `β` value comes from.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum BetaProvenance {
    ClosedForm,
    Numeric { estimate: f64, std_error: f64, diverging: bool },
}

/// Weibull-process limit: intensity `βτu^{τ-1}du` on the half-line and
/// scaling exponent `γ`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LimitLaw {
    pub gamma: f64,
    pub beta: f64,
    pub tau: f64,
    pub provenance: BetaProvenance,
}

impl LimitLaw {
    pub fn new(gamma: f64, beta: f64, tau: f64) -> Result<Self> {
        if !(gamma > 0.0 && beta > 0.0 && tau > 0.0) {
            return Err(domain!("limit law needs positive gamma, beta and tau"));
        }
        Ok(LimitLaw { gamma, beta, tau, provenance: BetaProvenance::ClosedForm })
    }

    /// `P(F^{(m)} > x)` in the limit.
    pub fn tail(&self, m: usize, x: f64) -> f64 {
        limit_tail(m, x, self)
    }

    /// `P(F^{(m)} <= x)` in the limit.
    pub fn cdf(&self, m: usize, x: f64) -> f64 {
        1.0 - self.tail(m, x)
    }

    /// `ν((a, b])`.
    pub fn intensity(&self, a: f64, b: f64) -> Result<f64> {
        intensity_measure(a, b, self)
    }
}

/// `e^{-βx^τ} Σ_{i<m} (βx^τ)^i / i!`.
pub fn limit_tail(m: usize, x: f64, law: &LimitLaw) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mu = law.beta * pow(x, law.tau);
    let mut term = 1.0;
    let mut sum = 0.0;
    for i in 0..m {
        if i > 0 {
            term *= mu / i as f64;
        }
        sum += term;
    }
    (exp(-mu) * sum).min(1.0)
}

/// `ν((a, b]) = β(b^τ - a^τ)`.
pub fn intensity_measure(a: f64, b: f64, law: &LimitLaw) -> Result<f64> {
    if !(a >= 0.0) || a > b {
        return Err(domain!("need 0 <= a <= b, got a={a} b={b}"));
    }
    Ok(law.beta * (pow(b, law.tau) - pow(a, law.tau)))
}

/// How [`beta_numeric`] parametrizes the hyperplane integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Parametrization {
    /// Hyperplanes by direction and offset over the circumscribed ball.
    Crofton,
    /// Hyperplanes through a uniform anchor point of `W`
    /// (Blaschke–Petkantschin).
    Anchored,
}

/// Settings for numeric `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericOptions {
    /// QMC points per randomization.
    pub points: usize,
    pub randomizations: usize,
    pub stream: SeededStream,
    pub parametrization: Parametrization,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            points: 1 << 14,
            randomizations: 16,
            stream: SeededStream::new(0x5EED_0F_BE7A, 0),
            parametrization: Parametrization::Anchored,
        }
    }
}

/// `V_j` of the `m`-dimensional unit ball.
fn ball_iv(m: usize, j: usize) -> f64 {
    binomial(m, j) * kappa(m) / kappa(m - j)
}

/// `β` for intersecting flats, from the limit of the exact mean count:
/// `n/(2ℓ!) Π_{i<ℓ} ς_{d,i(d-k),k} V_n(B^d) V_j(B^{d-n})^{-2/j}` with `n = ℓ(d-k)`.
pub fn beta_intersecting(d: usize, k: usize, ell: usize, j: usize) -> Result<f64> {
    let n = ell * (d - k);
    let mut prod = 1.0;
    for i in 0..ell {
        prod *= crofton_constant(d, i * (d - k), k)?;
    }
    Ok(n as f64 / (2.0 * factorial(ell)) * prod * ball_iv(d, n) * pow(ball_iv(d - n, j), -2.0 / j as f64))
}

/// The closed expression for `β` as printed alongside the intersecting-flats
/// limit theorem. It disagrees with [`beta_intersecting`] (for example
/// `π/64` against `π²/32` at `d=3, k=2, ℓ=2, j=1`); kept for comparison.
pub fn beta_intersecting_printed(d: usize, k: usize, ell: usize, j: usize) -> f64 {
    let n = ell * (d - k);
    let m = d - n;
    let jf = j as f64;
    kappa(d) * factorial(n - 1) / (2.0 * kappa(m) * factorial(ell))
        * binomial(d, n)
        * pow(binomial(m, j), -1.0 / jf)
        * pow(factorial(k) * kappa(k) / (factorial(d) * kappa(d)), ell as f64)
        * pow(kappa(m - j) / kappa(m), 1.0 / jf)
}

/// Limit law of the model. Closed forms where they exist; numeric
/// integration (see [`beta_numeric`]) for point simplices with `d >= 3` and
/// for hyperplane simplices.
pub fn limit_params(spec: &ModelSpec, numeric: &NumericOptions) -> Result<LimitLaw> {
    spec.validate()?;
    let d = spec.dim();
    let df = d as f64;
    let gamma = spec.gamma();
    let closed = |beta: f64, tau: f64| LimitLaw { gamma, beta, tau, provenance: BetaProvenance::ClosedForm };
    Ok(match spec {
        ModelSpec::ProximityFlats { k, window } => {
            let k = *k;
            let beta = binomial(d - k, k) * kappa(d - k) * kappa(d - k) / (2.0 * binomial(d, k) * kappa(d))
                * window.volume();
            closed(beta, (d - 2 * k) as f64)
        }
        ModelSpec::IntersectingFlats { k, ell, j, .. } => closed(beta_intersecting(d, *k, *ell, *j)?, 2.0 / *j as f64),
        ModelSpec::SpherePolytope { .. } => closed(df / 2.0 * kappa(d) * kappa(d - 1), df - 1.0),
        ModelSpec::Gilbert { window, .. } => closed(kappa(d) / 2.0 * window.volume(), df),
        ModelSpec::PointSimplices { window } if d <= 2 => {
            // d = 1: pairs of points; d = 2: Crofton's chord-power formula
            let v = window.volume();
            closed(if d == 1 { v } else { 2.0 * v * v }, 1.0)
        }
        ModelSpec::PointSimplices { .. } | ModelSpec::HyperplaneSimplices { .. } => {
            let est = beta_numeric(spec, numeric)?;
            let tau = if matches!(spec, ModelSpec::PointSimplices { .. }) { 1.0 } else { 1.0 / df };
            LimitLaw {
                gamma,
                beta: est.estimate,
                tau,
                provenance: BetaProvenance::Numeric {
                    estimate: est.estimate,
                    std_error: est.std_error,
                    diverging: est.diverging,
                },
            }
        }
    })
}

/// Uniform point of `W` from `d` (box) or `d + 1` (ball) unit coordinates.
fn body_point_from_unit(w: &ConvexBody, u: &[f64]) -> Vec<f64> {
    match w {
        ConvexBody::Cuboid { lower, upper } => {
            lower.iter().zip(upper).zip(u).map(|((l, h), v)| l + (h - l) * v).collect()
        }
        ConvexBody::Ball { center, radius } => {
            let d = center.len();
            let dir = direction_from_unit(&u[1..], d);
            let r = radius * pow(u[0], 1.0 / d as f64);
            center.iter().zip(&dir).map(|(c, x)| c + r * x).collect()
        }
    }
}

fn body_point_dims(w: &ConvexBody) -> usize {
    match w {
        ConvexBody::Cuboid { lower, .. } => lower.len(),
        ConvexBody::Ball { center, .. } => 1 + direction_dims(center.len()),
    }
}

/// `V(u)^{-1/d}` for the simplex cut from the cone of `d` hyperplanes with
/// normals `rows` (row-major) by a hyperplane with normal `u` at unit
/// distance from their common point, together with `|det N|`.
fn unit_simplex_inverse_root(rows: &[f64], u: &[f64], d: usize) -> Option<(f64, f64)> {
    let det = linalg::det(rows.to_vec(), d);
    if fabs(det) < 1e-14 {
        return None;
    }
    // columns c_i of N^{-1}: solve N c_i = e_i
    let mut prod = 1.0;
    for i in 0..d {
        let mut e = alloc::vec![0.0; d];
        e[i] = 1.0;
        let c = linalg::solve(rows.to_vec(), e, d, 1e-14)?;
        prod *= fabs(dot(u, &c));
    }
    let inv_vol = factorial(d) * fabs(det) * prod;
    Some((pow(inv_vol, 1.0 / d as f64), fabs(det)))
}

/// Randomized QMC estimate of `β` for point simplices (any `d`) and
/// hyperplane simplices, in the flat measure pinned by the Crofton identity.
pub fn beta_numeric(spec: &ModelSpec, opts: &NumericOptions) -> Result<RqmcEstimate> {
    spec.validate()?;
    if opts.points < 1000 / opts.randomizations.max(1) || opts.randomizations < 2 {
        return Err(domain!("numeric beta needs at least 1000 points and 2 randomizations"));
    }
    let d = spec.dim();
    let dd = direction_dims(d);
    let pts = opts.points;
    let reps = opts.randomizations;
    let stream = opts.stream;
    match (spec, opts.parametrization) {
        (ModelSpec::PointSimplices { window }, Parametrization::Crofton) => {
            let c = window.center();
            let r = window.circumradius();
            let pref = d as f64 * kappa(d) / (d as f64 + 1.0) * 2.0 * r;
            Ok(rqmc_integrate(dd + 1, pts, reps, stream, Aggregate::Mean, |u| {
                let n = direction_from_unit(&u[..dd], d);
                let p = dot(&n, &c) + r * (2.0 * u[dd] - 1.0);
                let sec = window.section_volume(&Hyperplane { normal: n, offset: p });
                pref * pow(sec, d as f64 + 1.0)
            }))
        }
        (ModelSpec::PointSimplices { window }, Parametrization::Anchored) => {
            let bd = body_point_dims(window);
            let pref = d as f64 * kappa(d) / (d as f64 + 1.0) * window.volume();
            Ok(rqmc_integrate(bd + dd, pts, reps, stream, Aggregate::Mean, |u| {
                let x = body_point_from_unit(window, &u[..bd]);
                let n = direction_from_unit(&u[bd..], d);
                let p = dot(&n, &x);
                let sec = window.section_volume(&Hyperplane { normal: n, offset: p });
                pref * pow(sec, d as f64)
            }))
        }
        (ModelSpec::HyperplaneSimplices { window }, Parametrization::Crofton) => {
            let c = window.center();
            let r = window.circumradius();
            let pref = pow(2.0 * r, d as f64) / factorial(d + 1) * 2.0;
            let per = dd + 1;
            Ok(rqmc_integrate(d * per + dd, pts, reps, stream, Aggregate::MedianOfMeans, |u| {
                let mut rows = Vec::with_capacity(d * d);
                let mut offs = Vec::with_capacity(d);
                for i in 0..d {
                    let n = direction_from_unit(&u[i * per..i * per + dd], d);
                    offs.push(dot(&n, &c) + r * (2.0 * u[i * per + dd] - 1.0));
                    rows.extend(n);
                }
                let Some(p) = linalg::solve(rows.clone(), offs, d, 1e-14) else { return 0.0 };
                if !window.contains(&p, 0.0) {
                    return 0.0;
                }
                let dir = direction_from_unit(&u[d * per..], d);
                match unit_simplex_inverse_root(&rows, &dir, d) {
                    Some((v, _)) => pref * v,
                    None => 0.0,
                }
            }))
        }
        (ModelSpec::HyperplaneSimplices { window }, Parametrization::Anchored) => {
            // the anchor point does not enter the integrand
            let pref = window.volume() / factorial(d + 1) * 2.0;
            Ok(rqmc_integrate(d * dd + dd, pts, reps, stream, Aggregate::MedianOfMeans, |u| {
                let mut rows = Vec::with_capacity(d * d);
                for i in 0..d {
                    rows.extend(direction_from_unit(&u[i * dd..(i + 1) * dd], d));
                }
                let dir = direction_from_unit(&u[d * dd..], d);
                match unit_simplex_inverse_root(&rows, &dir, d) {
                    Some((v, det)) => pref * det * v,
                    None => 0.0,
                }
            }))
        }
        _ => Err(Error::Unsupported(alloc::format!("no numeric beta for model {}", spec.name()))),
    }
}

/// Kind of an [`AlphaEval`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum AlphaKind {
    /// Exact, possibly up to one-dimensional quadrature.
    Exact,
    /// Only the limit `βx^τ` is known.
    LeadingOrder,
    /// `α_t` lies in `[lower, upper]`; the value is the limit `βx^τ`.
    Bracket { lower: f64, upper: f64 },
}

/// `α_t(x)`, the mean number of tuples with rescaled value at most `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlphaEval {
    pub value: f64,
    pub kind: AlphaKind,
}

/// Surface area of the cap `{y in S^{d-1} : |y - y0| <= s}`.
pub fn sphere_cap_area(d: usize, s: f64) -> f64 {
    if s >= 2.0 {
        return d as f64 * kappa(d);
    }
    let theta = 2.0 * asin(s / 2.0);
    (d - 1) as f64 * kappa(d - 1) * sine_power_integral(d - 2, theta)
}

/// `∫_W ∫_W 1(|y1 - y2| <= s) dy1 dy2`.
pub(crate) fn pair_volume(w: &ConvexBody, s: f64) -> Option<f64> {
    let d = w.dim();
    match w {
        ConvexBody::Cuboid { lower, upper } => {
            let sides: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
            if sides.iter().any(|a| *a < s) {
                return None;
            }
            // inclusion–exclusion over the coordinates where |h_i| is taken
            // from the covariogram Π(a_i - |h_i|)
            let mut total = 0.0;
            for mask in 0u32..(1 << d) {
                let m = mask.count_ones() as usize;
                let rest: f64 = (0..d).filter(|i| mask >> i & 1 == 0).map(|i| sides[i]).product();
                let c = pow(core::f64::consts::PI, (d - m) as f64 / 2.0) / gamma_half(d + m + 2);
                let term = rest * c * pow(s, (d + m) as f64);
                total += if m % 2 == 0 { term } else { -term };
            }
            Some(total)
        }
        ConvexBody::Ball { radius, .. } => {
            let r0 = *radius;
            let s = s.min(2.0 * r0);
            let cov = |r: f64| {
                let th = acos((r / (2.0 * r0)).min(1.0));
                2.0 * kappa(d - 1) * pow(r0, d as f64) * sine_power_integral(d, th)
            };
            let shell = d as f64 * kappa(d);
            Some(adaptive_simpson(|r| shell * pow(r, (d - 1) as f64) * cov(r), 0.0, s, 1e-12, 1e-300))
        }
    }
}

fn proximity_coefficients(d: usize, k: usize) -> Vec<f64> {
    (0..=k)
        .map(|j| {
            binomial(k, j) * binomial(d - j, k) / (2.0 * binomial(d, k) * binomial(d, k - j)) * kappa(k)
                * kappa(d - k)
                * kappa(d - j)
                * kappa(d + j - k)
                / (kappa(j) * kappa(d) * kappa(d))
        })
        .collect()
}

/// `α_t(x)` for the model at intensity `t`; `law` supplies `βx^τ` where
/// only the limit is known.
pub fn alpha_t(spec: &ModelSpec, law: &LimitLaw, x: f64, t: f64) -> Result<AlphaEval> {
    spec.validate()?;
    if !(x >= 0.0 && t > 0.0) {
        return Err(domain!("need x >= 0 and t > 0"));
    }
    let d = spec.dim();
    let s = x * pow(t, -spec.gamma());
    let limit = law.beta * pow(x, law.tau);
    let exact = |value: f64| Ok(AlphaEval { value, kind: AlphaKind::Exact });
    match spec {
        ModelSpec::Gilbert { window, delta } => {
            let s = s.min(delta.delta(t));
            match pair_volume(window, s) {
                Some(v) => exact(t * t / 2.0 * v),
                None => {
                    let lead = kappa(d) / 2.0 * window.volume() * t * t * pow(s, d as f64);
                    let outer: f64 =
                        (0..d).map(|j| kappa(d - j) * window.intrinsic_volume(j) * pow(s, (d - j) as f64)).sum();
                    let lower = (lead - kappa(d) / 2.0 * t * t * pow(s, d as f64) * outer).max(0.0);
                    Ok(AlphaEval { value: lead, kind: AlphaKind::Bracket { lower, upper: lead } })
                }
            }
        }
        ModelSpec::SpherePolytope { .. } => exact(t * t / 2.0 * d as f64 * kappa(d) * sphere_cap_area(d, s)),
        ModelSpec::IntersectingFlats { k, ell, j, .. } => {
            let n = ell * (d - k);
            let rho = pow(s / ball_iv(d - n, *j), 1.0 / *j as f64).min(1.0);
            let mut prod = 1.0;
            for i in 0..*ell {
                prod *= crofton_constant(d, i * (d - k), *k)?;
            }
            let frac = -expm1(n as f64 / 2.0 * log1p(-rho * rho));
            exact(pow(t, *ell as f64) / factorial(*ell) * prod * ball_iv(d, n) * frac)
        }
        ModelSpec::ProximityFlats { k, window } => {
            let k = *k;
            let coef = proximity_coefficients(d, k);
            let inner = window.inner_parallel(s);
            let (mut lower, mut upper) = (0.0, 0.0);
            for (j, c) in coef.iter().enumerate() {
                let f = c * t * t * pow(s, (d - k - j) as f64);
                upper += f * window.intrinsic_volume(d - k + j);
                lower += f * inner.as_ref().map_or(0.0, |b| b.intrinsic_volume(d - k + j));
            }
            Ok(AlphaEval { value: limit, kind: AlphaKind::Bracket { lower, upper } })
        }
        ModelSpec::PointSimplices { .. } | ModelSpec::HyperplaneSimplices { .. } => {
            Ok(AlphaEval { value: limit, kind: AlphaKind::LeadingOrder })
        }
    }
}

/// Monte Carlo `α_t(x)`: mean and standard error of the number of tuples
/// with rescaled value at most `x`, over `reps` replications.
pub fn alpha_t_mc(spec: &ModelSpec, x: f64, t: f64, reps: usize, stream: SeededStream) -> Result<(f64, f64)> {
    let params = RunParams::new(t, x, 1);
    let counts = (0..reps as u64)
        .map(|i| {
            run_model(spec, &params, SeededStream::new(stream.seed, stream.index.wrapping_add(i)))
                .map(|r| r.values.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    mc_mean_stderr(&counts)
}

/// Upper bound for the locality term `r_t(x)`; `None` where no bound is
/// available (point and hyperplane simplices, and intersections of three
/// or more flats).
///
/// - Gilbert: `t κ_d (x t^{-γ})^d`.
/// - Sphere: exact, `t` times the cap area.
/// - Proximity: Steiner bound with `sup_E V_j(E ∩ W) <= V_j(B^k_R)`, `R`
///   the circumradius.
/// - Intersecting flats, `ℓ = 2`: the exact supremum over the fixed flat,
///   `t ς_{d,0,k} V_n(B^k) g(ρ)` with `n = d - k`, `g(ρ) = ρ` for `n = 1`
///   (attained by nearly tangent flats, so it does not vanish as `t` grows)
///   and `1 - (1 - ρ²)^{n/2}` otherwise.
pub fn r_t_bound(spec: &ModelSpec, x: f64, t: f64) -> Result<Option<f64>> {
    spec.validate()?;
    let d = spec.dim();
    let s = x * pow(t, -spec.gamma());
    Ok(match spec {
        ModelSpec::Gilbert { .. } => Some(t * kappa(d) * pow(s, d as f64)),
        ModelSpec::SpherePolytope { .. } => Some(t * sphere_cap_area(d, s)),
        ModelSpec::ProximityFlats { k, window } => {
            let k = *k;
            let r = window.circumradius();
            let sum: f64 = (0..=k)
                .map(|j| {
                    pow(s, (d - k - j) as f64) * binomial(d - j, k) * kappa(d - j) / kappa(k)
                        * ball_iv(k, j)
                        * pow(r, j as f64)
                })
                .sum();
            Some(t * crofton_constant(d, 0, k)? * sum)
        }
        ModelSpec::IntersectingFlats { k, ell, j, .. } => match ell {
            1 => Some(0.0),
            2 => {
                let n = d - k;
                let m = d - 2 * n;
                let rho = pow(s / ball_iv(m, *j), 1.0 / *j as f64).min(1.0);
                let g = if n == 1 { rho } else { -expm1(n as f64 / 2.0 * log1p(-rho * rho)) };
                Some(t * crofton_constant(d, 0, *k)? * ball_iv(*k, n) * g)
            }
            _ => None,
        },
        ModelSpec::PointSimplices { .. } | ModelSpec::HyperplaneSimplices { .. } => None,
    })
}

/// `|βx^τ - α_t(x)| + C sqrt(r_t(x))`, or `None` where `r_t` has no bound.
/// For bracketed `α_t` the farther end of the bracket is used.
pub fn rate_bound(spec: &ModelSpec, law: &LimitLaw, _m: usize, x: f64, t: f64, c: f64) -> Result<Option<f64>> {
    if !(c > 0.0) {
        return Err(domain!("rate constant must be positive"));
    }
    let Some(r) = r_t_bound(spec, x, t)? else { return Ok(None) };
    let limit = law.beta * pow(x, law.tau);
    let a = alpha_t(spec, law, x, t)?;
    let gap = match a.kind {
        AlphaKind::Bracket { lower, upper } => fabs(limit - lower).max(fabs(limit - upper)),
        _ => fabs(limit - a.value),
    };
    Ok(Some(rate_bound_value(gap, r, c)))
}

/// `gap + C sqrt(r)`.
pub fn rate_bound_value(gap: f64, r: f64, c: f64) -> f64 {
    gap + c * sqrt(r)
}
