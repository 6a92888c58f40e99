//! Pure collisional decoherence of a massive tracer: momentum-transfer
//! statistics, the decoherence function, position-coherence decay and the
//! interferometer visibility law.

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::quad::{self, Rule};
use crate::scattering::{self, sinc, Collision};
use crate::special::{gamma, hyp1f1};
use crate::vec3::{self, Vec3};

/// Mass ratio above which the massive-tracer limit is flagged.
pub const MASS_RATIO_WARNING: f64 = 0.1;

const LAGUERRE_NODES: usize = 96;
const ANGLE_NODES: usize = 128;

/// Collision setup together with an optional tracer reference momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceSpec {
    pub collision: Collision,
    pub p0: Vec3,
    laguerre: Rule,
    angles: Rule,
}

impl DecoherenceSpec {
    pub fn new(collision: Collision, p0: Option<Vec3>) -> Self {
        Self {
            collision,
            p0: p0.unwrap_or(vec3::ZERO),
            laguerre: quad::gauss_laguerre(LAGUERRE_NODES, 1.0),
            angles: quad::gauss_legendre(ANGLE_NODES),
        }
    }

    pub fn mass_ratio(&self) -> f64 {
        self.collision.gas.m / self.collision.particle.mass
    }

    /// The mass ratio when it exceeds the massive-tracer threshold.
    pub fn mass_ratio_warning(&self) -> Option<f64> {
        let r = self.mass_ratio();
        (r > MASS_RATIO_WARNING).then_some(r)
    }

    /// Total collision rate `Γ_tot(P₀) = M_out(P₀)`.
    pub fn gamma_tot(&self) -> Result<f64> {
        self.collision.loss_rate(self.p0)
    }

    /// Probability density of momentum transfers `M_in(P₀+Q; Q)/Γ_tot(P₀)`.
    pub fn transfer_distribution(&self, q: Vec3) -> Result<f64> {
        Ok(self.collision.gain_rate(self.p0, q)? / self.gamma_tot()?)
    }

    /// `∫ dp ν̄(p)(p/m) ∫ d(cos θ) |f(cos θ; p)|² sinc(2p sin(θ/2) S/ħ)` up to a
    /// constant factor, with `ν̄` the Maxwell speed distribution.
    fn phi_integral(&self, s: f64) -> Result<f64> {
        let c = &self.collision;
        let (pb, ms, m) = (c.gas.p_beta(), c.m_star(), c.gas.m);
        let mut total = 0.0;
        for (&x, &wx) in self.laguerre.nodes.iter().zip(&self.laguerre.weights) {
            let p = pb * x.sqrt();
            let prel = ms / m * p;
            let mut inner = 0.0;
            for (&ct, &wt) in self.angles.nodes.iter().zip(&self.angles.weights) {
                let q = (2.0 * prel * prel * (1.0 - ct)).max(0.0).sqrt();
                inner += wt * c.diff_cross_section_angle(ct, prel)? * sinc(q * s / c.hbar);
            }
            total += wx * inner;
        }
        Ok(total)
    }

    /// Decoherence function `Φ(S)` of an isotropic setup, normalized so that
    /// `Φ(0) = 1`.
    pub fn decoherence_function(&self, s: f64) -> Result<f64> {
        if !s.is_finite() {
            return Err(invalid("S", "must be finite"));
        }
        let norm = self.phi_integral(0.0)?;
        if !(norm > 0.0) {
            return Err(Error::Quadrature { residual: norm.abs() });
        }
        if s == 0.0 {
            return Ok(1.0);
        }
        Ok(self.phi_integral(s.abs())? / norm)
    }

    /// Total collision rate of the massive-tracer limit,
    /// `2π n_gas ∫ dp ν̄(p)(p/m) ∫ d(cos θ)|f|²`.
    pub fn gamma_tot_massive(&self) -> Result<f64> {
        let c = &self.collision;
        let (pb, m) = (c.gas.p_beta(), c.gas.m);
        let pre = 2.0 * PI * c.gas.n_gas * 4.0 / PI.sqrt() * pb / (2.0 * m);
        Ok(pre * self.phi_integral(0.0)?)
    }

    /// Position coherence `ρ₀ exp(−Γ_tot[1 − Φ(S)] t)`.
    pub fn evolve_position_coherence(&self, rho0: Complex64, s: f64, t: f64) -> Result<Complex64> {
        let phi = self.decoherence_function(s)?;
        Ok(rho0 * coherence_factor(self.gamma_tot()?, phi, t))
    }
}

/// `Ψ = exp(−Γ_tot[1 − Φ] t)`.
pub fn coherence_factor(gamma_tot: f64, phi: f64, t: f64) -> f64 {
    (-gamma_tot * (1.0 - phi) * t).exp()
}

/// `Σ_{n ≤ n_max} e^{−Γt}(Γt)ⁿ/n! Φⁿ`.
pub fn jump_expansion(gamma_t: f64, phi: f64, n_max: usize) -> f64 {
    let mut weight = (-gamma_t).exp();
    let mut power = 1.0;
    let mut total = weight;
    for n in 1..=n_max {
        weight *= gamma_t / n as f64;
        power *= phi;
        total += weight * power;
    }
    total
}

/// Interferometer beam crossing a dilute gas with a `−C6/r⁶` interaction.
/// All quantities share one consistent unit system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilitySetup {
    pub kb: f64,
    pub temperature: f64,
    pub m_gas: f64,
    pub c6: f64,
    pub hbar: f64,
    pub big_m: f64,
    /// Beam momentum magnitude.
    pub p0: f64,
    pub flight_time: f64,
    /// Visibility without gas.
    pub v0: f64,
}

impl VisibilitySetup {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kb", self.kb),
            ("temperature", self.temperature),
            ("m_gas", self.m_gas),
            ("C6", self.c6),
            ("hbar", self.hbar),
            ("M", self.big_m),
            ("flight_time", self.flight_time),
            ("V0", self.v0),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, "must be finite and > 0"));
            }
        }
        if !(self.p0 >= 0.0) {
            return Err(invalid("P0", "must be >= 0"));
        }
        Ok(())
    }

    pub fn v_beta(&self) -> f64 {
        (2.0 * self.kb * self.temperature / self.m_gas).sqrt()
    }

    /// `P₀/(M v_β)`.
    pub fn scaled_momentum(&self) -> f64 {
        self.p0 / (self.big_m * self.v_beta())
    }

    /// Gas density at `pressure`, `p/(k_B T)`.
    pub fn density(&self, pressure: f64) -> f64 {
        pressure / (self.kb * self.temperature)
    }

    fn rate_prefactor(&self) -> f64 {
        4.0 * PI * gamma(0.9) / (5.0 * (PI / 5.0).sin())
            * (3.0 * PI * self.c6 / (2.0 * self.hbar)).powf(0.4)
            * self.v_beta().powf(0.6)
    }

    /// Collision rate per unit gas density from the closed form with
    /// `₁F₁(−3/10, 3/2; −U₀²)`.
    pub fn rate_per_density(&self) -> Result<f64> {
        let u = self.scaled_momentum();
        Ok(self.rate_prefactor() * hyp1f1(-0.3, 1.5, -u * u)?)
    }

    /// The same rate with `₁F₁` truncated to `1 + U₀²/5`.
    pub fn rate_per_density_truncated(&self) -> f64 {
        let u = self.scaled_momentum();
        self.rate_prefactor() * (1.0 + u * u / 5.0)
    }

    /// The same rate by direct quadrature of `⟨|v − V| σ_tot(|v − V|)⟩`.
    pub fn rate_per_density_quadrature(&self) -> Result<f64> {
        let v = self.p0 / self.big_m;
        let mut err = None;
        let avg = scattering::relative_speed_average(v, self.v_beta(), |w| {
            match scattering::london_cross_section(w, self.c6, self.hbar) {
                Ok(s) => w * s,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(avg),
        }
    }

    /// `Γ_tot(P₀)` at the given pressure.
    pub fn gamma_tot(&self, pressure: f64) -> Result<f64> {
        Ok(self.density(pressure) * self.rate_per_density()?)
    }

    /// Critical pressure `p₀ = M k_B T/(P₀ σ_eff(P₀) t)`.
    pub fn critical_pressure(&self) -> Result<f64> {
        Ok(self.kb * self.temperature / (self.rate_per_density()? * self.flight_time))
    }

    /// `V = V₀ exp(−p/p₀)`.
    pub fn visibility(&self, pressure: f64) -> Result<f64> {
        Ok(self.v0 * (-pressure / self.critical_pressure()?).exp())
    }

    /// `ln V = ln V₀ − p/p₀`.
    pub fn ln_visibility(&self, pressure: f64) -> Result<f64> {
        Ok(self.v0.ln() - pressure / self.critical_pressure()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::{london_model, CrossSectionModel, GasSpec, ParticleSpec};

    fn spec() -> DecoherenceSpec {
        let c = Collision::internal(CrossSectionModel::Constant { sigma_tot: 1.0 }, 1e-4).unwrap();
        DecoherenceSpec::new(c, None)
    }

    #[test]
    fn phi_is_one_at_zero_and_bounded() {
        let d = spec();
        assert_eq!(d.decoherence_function(0.0).unwrap(), 1.0);
        for i in 1..40 {
            let v = d.decoherence_function(0.25 * i as f64).unwrap();
            assert!(v.abs() <= 1.0 + 1e-12);
        }
        assert!(d.decoherence_function(50.0).unwrap().abs() < 1e-3);
    }

    #[test]
    fn massive_rate_matches_loss_rate() {
        let d = spec();
        let a = d.gamma_tot_massive().unwrap();
        let b = d.gamma_tot().unwrap();
        assert!((a - b).abs() < 1e-3 * b, "{a} {b}");
    }

    #[test]
    fn constant_model_phi_closed_form() {
        // Isotropic scattering with M → ∞: Φ(S) = ⟨sinc²(pS/ħ)⟩ weighted by p ν̄(p).
        let d = spec();
        let s = 0.8;
        let rule = quad::gauss_laguerre(96, 1.0);
        let num = rule.sum(|x| {
            let k = x.sqrt() * s;
            if k == 0.0 { 1.0 } else { (k.sin() / k).powi(2) }
        });
        let den = rule.sum(|_| 1.0);
        let got = d.decoherence_function(s).unwrap();
        assert!((got - num / den).abs() < 1e-3, "{got} {}", num / den);
    }

    #[test]
    fn jump_expansion_converges_to_closed_form() {
        for &phi in &[0.0, 0.3, 0.9, -0.2] {
            let a = jump_expansion(3.0, phi, 30);
            let b = coherence_factor(1.0, phi, 3.0);
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_rate_matches_power_law_effective_cross_section() {
        let v = VisibilitySetup {
            kb: 1.0,
            temperature: 1.0,
            m_gas: 1.0,
            c6: 2.0,
            hbar: 1.0,
            big_m: 50.0,
            p0: 12.0,
            flight_time: 1.0,
            v0: 1.0,
        };
        let gas = GasSpec::mb(1.0, 1.0, 1.0);
        let c = Collision::new(london_model(2.0, 1.0), gas, ParticleSpec::new(50.0), 1.0).unwrap();
        let via_model = c.loss_rate([12.0, 0.0, 0.0]).unwrap();
        let closed = v.rate_per_density().unwrap();
        assert!((via_model - closed).abs() < 1e-12 * closed);
    }
}
