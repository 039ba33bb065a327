//! Scalar helpers: factorials, half-integer gamma values, ball constants,
//! the inverse normal CDF and adaptive quadrature.

use core::f64::consts::PI;

use libm::{log, sqrt};

/// `n!` as a float. Exact for `n <= 22`.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Γ(n / 2)` for a positive integer `n`, by the half-integer recursion.
pub fn gamma_half(n: usize) -> f64 {
    assert!(n > 0, "gamma_half needs n >= 1");
    // Γ(1/2) = √π, Γ(1) = 1, Γ(x + 1) = x Γ(x)
    let (mut value, mut arg2) = if n % 2 == 0 { (1.0, 2) } else { (sqrt(PI), 1) };
    while arg2 < n {
        value *= arg2 as f64 / 2.0;
        arg2 += 2;
    }
    value
}

/// Volume of the unit ball in dimension `d`, via `κ_d = 2π κ_{d-2} / d`.
pub(crate) fn kappa(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * kappa(d - 2),
    }
}

/// `ln(n!)`, exact summation for small `n` and Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 64 {
        return (2..=n).map(|i| log(i as f64)).sum();
    }
    let x = n as f64 + 1.0;
    (x - 0.5) * log(x) - x + 0.5 * log(2.0 * PI) + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x * x)
}

/// Poisson probability mass `P(N = n)` for mean `mean >= 0`.
pub fn poisson_pmf(n: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    libm::exp(n as f64 * log(mean) - mean - ln_factorial(n))
}

/// `∫_0^θ sin^n(φ) dφ` by the standard reduction formula.
pub fn sine_power_integral(n: usize, theta: f64) -> f64 {
    match n {
        0 => theta,
        1 => 1.0 - libm::cos(theta),
        _ => {
            let s = libm::sin(theta);
            let c = libm::cos(theta);
            -libm::pow(s, (n - 1) as f64) * c / n as f64
                + (n - 1) as f64 / n as f64 * sine_power_integral(n - 2, theta)
        }
    }
}

/// Inverse of the standard normal CDF (Wichura, AS 241, PPND16).
///
/// Accurate to about 1e-16 relative on `(0, 1)`; returns `±∞` at the ends.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if libm::fabs(q) <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                + 67265.770927008700853)
                * r
                + 45921.953931549871457)
                * r
                + 13731.693765509461125)
                * r
                + 1971.5909503065514427)
                * r
                + 133.14166789178437745)
                * r
                + 3.387132872796366608)
            / (((((((5226.495278852545925 * r + 28729.085735721942674) * r
                + 39307.89580009271061)
                * r
                + 21213.794301586595867)
                * r
                + 5394.1960214247511077)
                * r
                + 687.1870074920579083)
                * r
                + 42.313330701600911252)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = sqrt(-log(r));
    let value = if r <= 5.0 {
        r -= 1.6;
        (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
            + 0.24178072517745061177)
            * r
            + 1.27045825245236838258)
            * r
            + 3.64784832476320460504)
            * r
            + 5.7694972214606914055)
            * r
            + 4.6303378461565452959)
            * r
            + 1.42343711074968357734)
            / (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                + 0.0151986665636164571966)
                * r
                + 0.14810397642748007459)
                * r
                + 0.68976733498510000455)
                * r
                + 1.6763848301838038494)
                * r
                + 2.05319162663775882187)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
            + 0.0012426609473880784386)
            * r
            + 0.026532189526576123093)
            * r
            + 0.29656057182850489123)
            * r
            + 1.7848265399172913358)
            * r
            + 5.4637849111641143699)
            * r
            + 6.6579046435011037772)
            / (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                + 1.8463183175100546818e-5)
                * r
                + 7.868691311456132591e-4)
                * r
                + 0.0148753612908506148525)
                * r
                + 0.13692988092273580531)
                * r
                + 0.59983220655588793769)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// Refines until the Richardson error estimate is below
/// `max(abs_tol, rel_tol * |whole|)` or the recursion depth is exhausted.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = abs_tol.max(rel_tol * libm::fabs(whole));
    simpson_step(&mut f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // the minimum width guard keeps discontinuous integrands finite
    if depth == 0 || libm::fabs(delta) <= 15.0 * tol || (b - a) < 1e-13 {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive quadrature over a piecewise-smooth integrand with known breakpoints.
pub fn piecewise_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    breaks
        .windows(2)
        .map(|w| adaptive_simpson(&mut f, w[0], w[1], rel_tol, abs_tol))
        .sum()
}
