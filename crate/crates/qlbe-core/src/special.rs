//! Special functions and thermal momentum distributions.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Relative stopping threshold for the Kummer series.
pub const SERIES_TOL: f64 = 1e-15;
/// Maximum number of Kummer series terms.
pub const SERIES_CAP: usize = 500;
/// Below this |x| the closed forms fall back to the series.
pub const SMALL_X: f64 = 1e-3;
/// Above this |z| a negative argument uses the asymptotic expansion.
const ASYMPTOTIC_Z: f64 = 60.0;

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `erf(x)/x` with its limit `2/√π` at the origin.
pub fn erf_over_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        2.0 / SQRT_PI * (1.0 - x2 / 3.0 + x2 * x2 / 10.0)
    } else {
        erf(x) / x
    }
}

/// Plain Kummer series `Σ (a)_n/(c)_n x^n/n!`.
pub fn kummer_series(a: f64, c: f64, x: f64) -> Result<f64> {
    check_c(c)?;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..SERIES_CAP {
        let nf = n as f64;
        term *= (a + nf) / (c + nf) * x / (nf + 1.0);
        sum += term;
        if term.abs() < SERIES_TOL * sum.abs() || term == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::Series { terms: SERIES_CAP })
}

fn check_c(c: f64) -> Result<()> {
    if c <= 0.0 && c == c.round() {
        return Err(Error::Domain(alloc::format!(
            "1F1 lower parameter {c} is a non-positive integer"
        )));
    }
    Ok(())
}

/// Confluent hypergeometric function `₁F₁(a; c; x)` for real arguments.
///
/// Negative arguments go through Kummer's transformation (a positive-term
/// series) or, for `|x| > 60`, the large-argument expansion.
pub fn hyp1f1(a: f64, c: f64, x: f64) -> Result<f64> {
    check_c(c)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < 0.0 {
        let z = -x;
        if z > ASYMPTOTIC_Z {
            if let Some(v) = hyp1f1_asymptotic_neg(a, c, z) {
                return Ok(v);
            }
        }
        if c - a > 0.0 && c > 0.0 {
            return Ok(x.exp() * kummer_series(c - a, c, z)?);
        }
    }
    kummer_series(a, c, x)
}

/// `₁F₁(a; c; −z)` for large `z`, dropping the exponentially small branch.
fn hyp1f1_asymptotic_neg(a: f64, c: f64, z: f64) -> Option<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for s in 0..60 {
        let sf = s as f64;
        term *= (a + sf) * (a - c + 1.0 + sf) / ((sf + 1.0) * z);
        if term.abs() > last {
            return None;
        }
        last = term.abs();
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            let pre = gamma(c) / gamma(c - a) * z.powf(-a);
            return Some(pre * sum);
        }
    }
    None
}

/// `₁F₁(−1/2, 3/2; −x²) = ½e^{−x²} + (1+2x²)(√π/4) erf(x)/x`.
pub fn f_m12_32(x: f64) -> f64 {
    let x = x.abs();
    if x < SMALL_X {
        return kummer_series(-0.5, 1.5, -x * x).unwrap_or(1.0);
    }
    let x2 = x * x;
    0.5 * (-x2).exp() + (1.0 + 2.0 * x2) * (SQRT_PI / 4.0) * erf(x) / x
}

/// `₁F₁(−1/2, 5/2; −x²)`.
pub fn f_m12_52(x: f64) -> f64 {
    let x = x.abs();
    if x < SMALL_X {
        return kummer_series(-0.5, 2.5, -x * x).unwrap_or(1.0);
    }
    let x2 = x * x;
    let e = (-x2).exp();
    let r = (SQRT_PI / 2.0) * erf(x) / x;
    3.0 / 16.0 / x2 * ((1.0 + 2.0 * x2) * e - (1.0 - 4.0 * x2 - 4.0 * x2 * x2) * r)
}

/// `₁F₁(−3/2, 3/2; −x²)`.
pub fn f_m32_32(x: f64) -> f64 {
    let x = x.abs();
    if x < SMALL_X {
        return kummer_series(-1.5, 1.5, -x * x).unwrap_or(1.0);
    }
    let x2 = x * x;
    let e = (-x2).exp();
    let r = (SQRT_PI / 2.0) * erf(x) / x;
    0.125 * ((5.0 + 2.0 * x2) * e + (3.0 + 12.0 * x2 + 4.0 * x2 * x2) * r)
}

/// Maxwell-Boltzmann momentum density `π^{-3/2} p_β^{-3} exp(−p²/p_β²)`.
pub fn mb_density(p: Vec3, beta: f64, m: f64) -> f64 {
    let pb = crate::units::p_beta(beta, m);
    (-vec3::dot(p, p) / (pb * pb)).exp() / (PI.powf(1.5) * pb * pb * pb)
}

/// One-dimensional Maxwell-Boltzmann marginal `√(β/2πm) e^{−βp²/2m}`.
pub fn mb_density_1d(p: f64, beta: f64, m: f64) -> f64 {
    (beta / (2.0 * PI * m)).sqrt() * (-beta * p * p / (2.0 * m)).exp()
}

/// Two-dimensional Maxwell-Boltzmann marginal `β/(2πm) e^{−βp²/2m}` with
/// `p_sq = p²`.
pub fn mb_density_2d(p_sq: f64, beta: f64, m: f64) -> f64 {
    beta / (2.0 * PI * m) * (-beta * p_sq / (2.0 * m)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyp1f1_at_zero_is_one() {
        for &(a, c) in &[(-0.5, 2.5), (-1.5, 1.5), (-0.3, 1.5), (2.0, 3.0)] {
            assert_eq!(hyp1f1(a, c, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn forbidden_lower_parameter() {
        assert!(matches!(hyp1f1(0.5, -2.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(hyp1f1(0.5, 0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn asymptotic_branch_matches_series_at_crossover() {
        for &(a, c) in &[(-0.5, 1.5), (-0.5, 2.5), (-1.5, 1.5), (-0.3, 1.5)] {
            let z = 61.0;
            let asy = hyp1f1_asymptotic_neg(a, c, z).unwrap();
            let ser = (-z).exp() * kummer_series(c - a, c, z).unwrap();
            assert!((asy - ser).abs() / ser.abs() < 1e-12, "{a} {c}: {asy} {ser}");
        }
    }

    #[test]
    fn mb_marginals_multiply_to_full_density() {
        let (beta, m) = (1.3, 0.7);
        let p = [0.3, -0.2, 0.5];
        let full = mb_density(p, beta, m);
        let split = mb_density_2d(p[0] * p[0] + p[1] * p[1], beta, m) * mb_density_1d(p[2], beta, m);
        assert!((full - split).abs() < 1e-14 * full);
    }
}
