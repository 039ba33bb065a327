//! Chaos kernels, the variance identity and the Poisson-approximation bound
//! for the pair-counting U-statistic `U = Σ_{pairs} 1(f <= s)`.
//!
//! Supported: the Gilbert graph in a box or ball window of dimension 1 or
//! 2, and the sphere model in any dimension (where the first kernel is
//! constant).

use alloc::vec::Vec;

use libm::{acos, asin, exp, pow, sqrt};

use crate::error::domain;
use crate::geometry::ConvexBody;
use crate::limits::{pair_volume, r_t_bound, sphere_cap_area};
use crate::linalg::dist;
use crate::models::ModelSpec;
use crate::numeric::{kappa, piecewise_simpson};
use crate::{Error, Result};

const QUAD_TOL: f64 = 1e-11;

/// The U-statistic counting pairs with `f <= s`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UStatSpec {
    pub model: ModelSpec,
    pub s: f64,
}

impl UStatSpec {
    pub fn new(model: ModelSpec, s: f64) -> Result<Self> {
        let spec = UStatSpec { model, s };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.s >= 0.0) || !self.s.is_finite() {
            return Err(domain!("s must be finite and nonnegative"));
        }
        match &self.model {
            ModelSpec::Gilbert { window, .. } if window.dim() <= 2 => Ok(()),
            ModelSpec::SpherePolytope { .. } => Ok(()),
            m => Err(Error::Unsupported(alloc::format!("no chaos analytics for {} (d={})", m.name(), m.dim()))),
        }
    }

    pub fn arity(&self) -> usize {
        2
    }
}

/// Area of `{x <= a, y <= b}` inside the disk of radius `s` at the origin.
fn disk_quadrant(a: f64, b: f64, s: f64) -> f64 {
    let a = a.min(s);
    if a <= -s || b <= -s {
        return 0.0;
    }
    let h = |x: f64| sqrt((s * s - x * x).max(0.0));
    let prim = |x: f64| 0.5 * (x * h(x) + s * s * asin((x / s).clamp(-1.0, 1.0)));
    let mut cuts: Vec<f64> = alloc::vec![-s, a];
    if b.abs() < s {
        let c = sqrt(s * s - b * b);
        cuts.extend([-c, c].into_iter().filter(|x| *x > -s && *x < a));
    }
    cuts.sort_by(f64::total_cmp);
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let hm = h(0.5 * (x0 + x1));
        // vertical chord [-h, h] clipped above at b
        if b >= hm {
            area += 2.0 * (prim(x1) - prim(x0));
        } else if b > -hm {
            area += b * (x1 - x0) + prim(x1) - prim(x0);
        }
    }
    area
}

/// Area of the disk `B(c, s)` inside the rectangle `[lo, hi]`.
pub fn disk_rect_area(c: &[f64], s: f64, lo: &[f64], hi: &[f64]) -> f64 {
    let q = |x: f64, y: f64| disk_quadrant(x - c[0], y - c[1], s);
    (q(hi[0], hi[1]) - q(lo[0], hi[1]) - q(hi[0], lo[1]) + q(lo[0], lo[1])).max(0.0)
}

/// Area of the intersection of disks with radii `r1`, `r2` at distance `l`.
pub fn disk_disk_area(r1: f64, r2: f64, l: f64) -> f64 {
    let pi = core::f64::consts::PI;
    if l >= r1 + r2 {
        return 0.0;
    }
    if l <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return pi * r * r;
    }
    let a1 = acos(((l * l + r1 * r1 - r2 * r2) / (2.0 * l * r1)).clamp(-1.0, 1.0));
    let a2 = acos(((l * l + r2 * r2 - r1 * r1) / (2.0 * l * r2)).clamp(-1.0, 1.0));
    let k = sqrt(((-l + r1 + r2) * (l + r1 - r2) * (l - r1 + r2) * (l + r1 + r2)).max(0.0));
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k
}

/// `|W ∩ B(y, s)|` for a window of dimension 1 or 2.
fn window_ball_volume(w: &ConvexBody, y: &[f64], s: f64) -> f64 {
    match (w, w.dim()) {
        (ConvexBody::Cuboid { lower, upper }, 1) => ((y[0] + s).min(upper[0]) - (y[0] - s).max(lower[0])).max(0.0),
        (ConvexBody::Ball { center, radius }, 1) => {
            ((y[0] + s).min(center[0] + radius) - (y[0] - s).max(center[0] - radius)).max(0.0)
        }
        (ConvexBody::Cuboid { lower, upper }, _) => disk_rect_area(y, s, lower, upper),
        (ConvexBody::Ball { center, radius }, _) => disk_disk_area(*radius, s, dist(y, center)),
    }
}

/// `h_q(y_1, …, y_q)` at intensity `t`:
/// `h_1(y) = t |W ∩ B(y, s)|` (or `t` times the cap area on the sphere),
/// `h_2(y_1, y_2) = ½ 1(|y_1 - y_2| <= s)`.
pub fn kernel_h_q(spec: &UStatSpec, t: f64, q: usize, args: &[&[f64]]) -> Result<f64> {
    spec.validate()?;
    if q == 0 || q > spec.arity() || args.len() != q {
        return Err(domain!("kernel order must be 1 or 2 with as many arguments"));
    }
    let s = spec.s;
    if q == 2 {
        return Ok(if dist(args[0], args[1]) <= s { 0.5 } else { 0.0 });
    }
    Ok(match &spec.model {
        ModelSpec::Gilbert { window, .. } => t * window_ball_volume(window, args[0], s),
        ModelSpec::SpherePolytope { d } => t * sphere_cap_area(*d, s),
        _ => unreachable!(),
    })
}

/// `σ_t = E U`.
pub fn sigma_t(spec: &UStatSpec, t: f64) -> Result<f64> {
    spec.validate()?;
    let s = spec.s;
    Ok(match &spec.model {
        ModelSpec::Gilbert { window, .. } => t * t / 2.0 * pair_volume(window, s).unwrap_or_else(|| pair_volume_numeric(window, s)),
        ModelSpec::SpherePolytope { d } => t * t / 2.0 * *d as f64 * kappa(*d) * sphere_cap_area(*d, s),
        _ => unreachable!(),
    })
}

fn pair_volume_numeric(w: &ConvexBody, s: f64) -> f64 {
    integrate_window(w, s, |y| window_ball_volume(w, y, s))
}

/// `∫_W g(y) dy` for windows of dimension 1 or 2, splitting at the lines
/// and arcs where `|W ∩ B(y, s)|` changes form.
fn integrate_window<G: Fn(&[f64]) -> f64>(w: &ConvexBody, s: f64, g: G) -> f64 {
    match (w, w.dim()) {
        (ConvexBody::Ball { radius, .. }, 2) => {
            let r0 = *radius;
            let c = w.center();
            let breaks = sorted_breaks(0.0, r0, &[r0 - s, s - r0]);
            piecewise_simpson(
                |r| {
                    let mut y = c.clone();
                    y[0] += r;
                    2.0 * core::f64::consts::PI * r * g(&y)
                },
                &breaks,
                QUAD_TOL,
                0.0,
            )
        }
        _ => {
            let (lo, hi) = match w {
                ConvexBody::Cuboid { lower, upper } => (lower.clone(), upper.clone()),
                ConvexBody::Ball { center, radius } => (
                    center.iter().map(|c| c - radius).collect(),
                    center.iter().map(|c| c + radius).collect(),
                ),
            };
            if w.dim() == 1 {
                let breaks = sorted_breaks(lo[0], hi[0], &[lo[0] + s, hi[0] - s]);
                return piecewise_simpson(|x| g(&[x]), &breaks, QUAD_TOL, 0.0);
            }
            let outer = sorted_breaks(lo[1], hi[1], &[lo[1] + s, hi[1] - s]);
            piecewise_simpson(
                |y2| {
                    let mut cuts = alloc::vec![lo[0] + s, hi[0] - s];
                    for e in [lo[1], hi[1]] {
                        let dy = (y2 - e).abs();
                        if dy < s {
                            let c = sqrt(s * s - dy * dy);
                            cuts.extend([lo[0] + c, hi[0] - c]);
                        }
                    }
                    let inner = sorted_breaks(lo[0], hi[0], &cuts);
                    piecewise_simpson(|y1| g(&[y1, y2]), &inner, QUAD_TOL, 0.0)
                },
                &outer,
                QUAD_TOL,
                0.0,
            )
        }
    }
}

fn sorted_breaks(a: f64, b: f64, interior: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = interior.iter().copied().filter(|x| *x > a && *x < b).collect();
    v.push(a);
    v.push(b);
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// `Var U = Σ_q q! ∫ h_q² dλ_t^q = t ∫ h_1² dy + σ_t`.
pub fn variance_u(spec: &UStatSpec, t: f64) -> Result<f64> {
    let sig = sigma_t(spec, t)?;
    let s = spec.s;
    let first = match &spec.model {
        ModelSpec::Gilbert { window, .. } => {
            t * t * t * integrate_window(window, s, |y| pow(window_ball_volume(window, y, s), 2.0))
        }
        ModelSpec::SpherePolytope { d } => {
            let cap = sphere_cap_area(*d, s);
            t * t * t * *d as f64 * kappa(*d) * cap * cap
        }
        _ => unreachable!(),
    };
    Ok(sig + first)
}

/// Upper bound for `ρ_t`, the same per-model bound as the locality term
/// with `A_t = [0, s]`.
pub fn rho_t(spec: &UStatSpec, t: f64) -> Result<f64> {
    spec.validate()?;
    // r_t_bound takes the unscaled x with s = x t^{-γ}
    let x = spec.s * pow(t, spec.model.gamma());
    r_t_bound(&spec.model, x, t)?.ok_or_else(|| Error::Unsupported("no bound for rho_t".into()))
}

/// Inputs to [`dtv_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundIngredients {
    pub sigma_t: f64,
    pub rho_t: f64,
    /// Mean of the approximating Poisson law.
    pub sigma: f64,
}

/// `|σ - σ_t| + C_k (1 - e^{-σ_t})/σ_t (1 + 1/σ_t) sqrt(σ_t (ρ_t + ρ_t³))`.
pub fn dtv_bound(ing: &BoundIngredients, c_k: f64) -> Result<f64> {
    let BoundIngredients { sigma_t, rho_t, sigma } = *ing;
    if !(sigma_t > 0.0) || !sigma_t.is_finite() {
        return Err(domain!("dtv bound needs sigma_t > 0"));
    }
    if !(rho_t >= 0.0 && sigma >= 0.0 && c_k > 0.0) {
        return Err(domain!("dtv bound needs rho_t, sigma >= 0 and C_k > 0"));
    }
    Ok((sigma - sigma_t).abs()
        + c_k * (1.0 - exp(-sigma_t)) / sigma_t * (1.0 + 1.0 / sigma_t) * sqrt(sigma_t * (rho_t + rho_t * rho_t * rho_t)))
}
