//! Dynamic structure factors of the ideal gas and the rates written in
//! terms of them.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::quad::{self, Rule};
use crate::scattering::{gauss_hermite_escalate, Collision, GasSpec, Statistics};
use crate::vec3::{self, Vec3};

/// Below this `|βE|` the quantum-statistics formula uses its series form.
const SMALL_BETA_E: f64 = 1e-4;

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(invalid("Q", "must be finite and > 0"));
    }
    Ok(())
}

/// Energy transferred to a test particle of mass `big_m` and momentum `P`
/// by a kick `Q`: `Q²/2M + Q·P/M`.
pub fn energy_transfer(q: Vec3, big_p: Vec3, big_m: f64) -> f64 {
    (vec3::dot(q, q) / 2.0 + vec3::dot(q, big_p)) / big_m
}

/// `S_MB(Q, E) = √(βm/2π)(1/Q) exp(−β(Q² + 2mE)²/(8mQ²))`.
pub fn s_mb(q: f64, e: f64, gas: &GasSpec) -> Result<f64> {
    check_q(q)?;
    let (m, beta) = (gas.m, gas.beta);
    let a = q * q + 2.0 * m * e;
    Ok((beta * m / (2.0 * PI)).sqrt() / q * (-beta * a * a / (8.0 * m * q * q)).exp())
}

/// Number density of an ideal Maxwell-Boltzmann gas at fugacity `z`,
/// `z (2πm/β)^{3/2}/(2πħ)³`.
pub fn density_for_fugacity(z: f64, m: f64, beta: f64, hbar: f64) -> f64 {
    z * (2.0 * PI * m / beta).powf(1.5) / (2.0 * PI * hbar).powi(3)
}

/// Number density of the ideal gas described by `gas.statistics` and
/// `gas.beta`, `(2πħ)^{−3} ∫d³p [z^{−1}e^{βp²/2m} − s]^{−1}` with `s = 0, ±1`.
/// The `gas.n_gas` field is ignored.
pub fn ideal_gas_density(gas: &GasSpec, hbar: f64) -> Result<f64> {
    let (m, beta) = (gas.m, gas.beta);
    let (s, z) = match gas.statistics {
        Statistics::MaxwellBoltzmann => return Ok(density_for_fugacity(1.0, m, beta, hbar)),
        Statistics::BoseEinstein { z } => (1.0, z),
        Statistics::FermiDirac { z } => (-1.0, z),
    };
    if !(z > 0.0) || (s > 0.0 && z >= 1.0) {
        return Err(invalid("z", "must be > 0, and < 1 for a Bose gas"));
    }
    // Integrate in x = βp²/2m up to where the occupation is negligible.
    let x_max = z.ln().max(0.0) + 60.0;
    let rule = quad::gauss_legendre(32);
    let occupation = |x: f64| {
        let y = z * (-x).exp();
        y / (1.0 - s * y)
    };
    // Substituting x = t² removes the square-root endpoint behaviour.
    let integral = quad::integrate(&rule, 0.0, x_max.sqrt(), 64, |t| 2.0 * t * t * occupation(t * t));
    let pref = 2.0 * PI * (2.0 * m / beta).powf(1.5) / (2.0 * PI * hbar).powi(3);
    Ok(pref * integral)
}

/// Structure factor of an ideal Bose or Fermi gas. Falls back to `S_MB`
/// for a Maxwell-Boltzmann gas. The density `gas.n_gas` must be consistent
/// with the fugacity.
pub fn s_bf(q: f64, e: f64, gas: &GasSpec, hbar: f64) -> Result<f64> {
    check_q(q)?;
    gas.validate()?;
    let (s, z) = match gas.statistics {
        Statistics::MaxwellBoltzmann => return s_mb(q, e, gas),
        Statistics::BoseEinstein { z } => (1.0, z),
        Statistics::FermiDirac { z } => (-1.0, z),
    };
    let d = gas.beta * e;
    if d.abs() < SMALL_BETA_E {
        Ok(s_bf_series(q, e, gas, hbar, s, z))
    } else {
        Ok(s_bf_direct(q, e, gas, hbar, s, z))
    }
}

fn bf_prefactor(q: f64, gas: &GasSpec, hbar: f64) -> f64 {
    let (m, beta) = (gas.m, gas.beta);
    2.0 * PI * m * m / (beta * (2.0 * PI * hbar).powi(3)) / (gas.n_gas * q)
}

/// `pref·s·[h(u) − h(v)]/(e^{βE} − 1)` with `h(x) = ln(1 − s z e^{−x})`.
fn s_bf_direct(q: f64, e: f64, gas: &GasSpec, hbar: f64, s: f64, z: f64) -> f64 {
    let (m, beta) = (gas.m, gas.beta);
    let scale = beta / (8.0 * m * q * q);
    let h = |x: f64| (-s * z * (-x).exp()).ln_1p();
    let u = scale * (q * q + 2.0 * m * e).powi(2);
    let v = scale * (q * q - 2.0 * m * e).powi(2);
    bf_prefactor(q, gas, hbar) * s * (h(u) - h(v)) / (beta * e).exp_m1()
}

/// Expansion of the difference `h(u) − h(v)` about the midpoint, for small `βE`.
fn s_bf_series(q: f64, e: f64, gas: &GasSpec, hbar: f64, s: f64, z: f64) -> f64 {
    let (m, beta) = (gas.m, gas.beta);
    let d = beta * e;
    let mid = beta / (8.0 * m * q * q) * (q.powi(4) + 4.0 * m * m * e * e);
    let y = s * z * (-mid).exp();
    let h1 = y / (1.0 - y);
    let h3 = y * (1.0 + y) / (1.0 - y).powi(3);
    let ratio = if d == 0.0 { 1.0 } else { d / d.exp_m1() };
    bf_prefactor(q, gas, hbar) * s * ratio * (h1 + h3 * d * d / 24.0)
}

/// Structure factor of the gas in `c`, with the statistics it carries.
pub fn structure_factor(c: &Collision, q: f64, e: f64) -> Result<f64> {
    s_bf(q, e, &c.gas, c.hbar)
}

/// `|S(Q,E) − e^{−βE} S(Q,−E)|` relative to the larger of the two terms.
pub fn detailed_balance_residual(q: f64, e: f64, gas: &GasSpec, hbar: f64) -> Result<f64> {
    let fwd = s_bf(q, e, gas, hbar)?;
    let back = (-gas.beta * e).exp() * s_bf(q, -e, gas, hbar)?;
    let scale = fwd.abs().max(back.abs());
    Ok(if scale == 0.0 { 0.0 } else { (fwd - back).abs() / scale })
}

/// Laboratory-frame double-differential cross-section
/// `(M²/m*²)(P′/P)|f_B(Q)|² S(Q, E)` with `P′ = |P + Q|`.
pub fn lab_frame_cross_section(c: &Collision, big_p: Vec3, q: Vec3, e: f64) -> Result<f64> {
    let p = vec3::norm(big_p);
    if !(p > 0.0) {
        return Err(invalid("P", "must be non-zero"));
    }
    let qn = vec3::norm(q);
    let f = c.born_amplitude(qn)?;
    let big_m = c.particle.mass;
    let ms = c.m_star();
    let p_out = vec3::norm(vec3::add(big_p, q));
    Ok(big_m * big_m / (ms * ms) * p_out / p * f * f * structure_factor(c, qn, e)?)
}

/// Cross-section averaged over the two-dimensional gas distribution in the
/// plane perpendicular to `Q`.
pub fn averaged_cross_section(c: &Collision, p_perp: Vec3, q: Vec3) -> Result<f64> {
    let qn = vec3::norm(q);
    check_q(qn)?;
    let qhat = vec3::scale(q, 1.0 / qn);
    let (_, p_perp) = vec3::split(p_perp, qhat);
    let (e1, e2) = vec3::orthonormal_pair(qhat);
    let pb = c.gas.p_beta();
    let half_q = vec3::scale(q, 0.5);
    gauss_hermite_escalate(|rule: &Rule| {
        let mut acc = 0.0;
        for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
            for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
                let k = vec3::add(vec3::scale(e1, pb * x), vec3::scale(e2, pb * y));
                let rel = c.rel(k, p_perp);
                acc += wx * wy * c.diff_cross_section(vec3::sub(rel, half_q), vec3::add(rel, half_q))?;
            }
        }
        Ok(acc / PI)
    })
}

/// Gain rate density for a jump from `P` by `Q` rebuilt as
/// `(n_gas/m*²) σ_av(P_⊥, Q) S_MB(Q, E(Q, P))`.
pub fn gain_rate_from_structure_factor(c: &Collision, big_p: Vec3, q: Vec3) -> Result<f64> {
    if !matches!(c.gas.statistics, Statistics::MaxwellBoltzmann) {
        return Err(Error::Domain(alloc::string::String::from(
            "the structure-factor form of the classical rate assumes a Maxwell-Boltzmann gas",
        )));
    }
    let ms = c.m_star();
    let sigma = averaged_cross_section(c, big_p, q)?;
    let e = energy_transfer(q, big_p, c.particle.mass);
    Ok(c.gas.n_gas / (ms * ms) * sigma * s_mb(vec3::norm(q), e, &c.gas)?)
}
