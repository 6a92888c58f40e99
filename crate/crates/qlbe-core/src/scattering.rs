//! Collision models and the classical gain and loss rates built from them.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::quad::{self, Rule};
use crate::special::{self, gamma, hyp1f1};
use crate::units;
use crate::vec3::{self, Vec3};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Radially symmetric interaction potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `V(r) = v0 exp(−r²/r0²)`.
    Gaussian { v0: f64, r0: f64 },
    /// Piecewise linear table, zero beyond the last radius.
    Tabulated { r: Vec<f64>, v: Vec<f64> },
}

impl Potential {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Potential::Gaussian { v0, r0 } => v0 * (-(r * r) / (r0 * r0)).exp(),
            Potential::Tabulated { r: rs, v } => {
                if rs.is_empty() || r > rs[rs.len() - 1] {
                    return 0.0;
                }
                if r <= rs[0] {
                    return v[0];
                }
                let k = rs.partition_point(|&x| x <= r).min(rs.len() - 1);
                let (r0, r1) = (rs[k - 1], rs[k]);
                let t = (r - r0) / (r1 - r0);
                v[k - 1] + t * (v[k] - v[k - 1])
            }
        }
    }

    fn range(&self) -> f64 {
        match self {
            Potential::Gaussian { r0, .. } => 9.0 * r0,
            Potential::Tabulated { r, .. } => r.last().copied().unwrap_or(0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Potential::Gaussian { r0, v0 } => {
                if !(*r0 > 0.0) || !v0.is_finite() {
                    return Err(invalid("r0", "Gaussian potential needs r0 > 0 and finite v0"));
                }
            }
            Potential::Tabulated { r, v } => {
                if r.len() < 2 || r.len() != v.len() {
                    return Err(invalid("potential", "table needs at least two (r, V) rows"));
                }
                if r[0] < 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("potential", "table radii must be increasing and non-negative"));
                }
            }
        }
        Ok(())
    }

    /// `∫ V(x) e^{−iq·x} d³x` with `q` a wavenumber; closed form for the
    /// Gaussian, radial quadrature otherwise.
    pub fn fourier_transform(&self, q: f64) -> Result<f64> {
        match self {
            Potential::Gaussian { v0, r0 } => Ok(v0 * PI.powf(1.5) * r0 * r0 * r0 * (-(q * q * r0 * r0) / 4.0).exp()),
            Potential::Tabulated { .. } => self.radial_transform(q),
        }
    }

    /// `4π ∫ r² V(r) sin(qr)/(qr) dr`, converged against the scale
    /// `4π ∫ r² |V(r)| dr` so that exponentially small transforms terminate.
    fn radial_transform(&self, q: f64) -> Result<f64> {
        let rmax = self.range();
        let rule = quad::gauss_legendre(32);
        let eval = |panels: usize, g: &dyn Fn(f64) -> f64| {
            4.0 * PI * quad::integrate(&rule, 0.0, rmax, panels, |r| r * r * g(r))
        };
        let scale = eval(64, &|r| self.value(r).abs()).max(1e-300);
        let transform = |panels: usize| eval(panels, &|r| self.value(r) * sinc(q * r));
        let mut prev = transform(8);
        let mut panels = 16;
        while panels <= 1024 {
            let cur = transform(panels);
            if (cur - prev).abs() <= 1e-12 * scale.max(cur.abs()) || cur == prev {
                return Ok(cur);
            }
            prev = cur;
            panels *= 2;
        }
        Err(Error::Quadrature {
            residual: (transform(1024) - transform(512)).abs(),
        })
    }
}

/// `sin(x)/x` with the removable point handled.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Two-body collision law.
#[derive(Debug, Clone, PartialEq)]
pub enum CrossSectionModel {
    /// Isotropic constant cross-section, `|f|² = σ_tot/4π`.
    Constant { sigma_tot: f64 },
    /// `|f|² = c |v_rel|^a` per solid angle.
    PowerLaw { c: f64, a: f64 },
    /// Born amplitude of a radial potential.
    Born(Potential),
    /// Energy-dependent s-wave amplitude `f(k) = −a/(1 + ika)`, which obeys the
    /// optical theorem exactly.
    SWave { length: f64 },
}

impl CrossSectionModel {
    pub fn name(&self) -> &'static str {
        match self {
            CrossSectionModel::Constant { .. } => "constant",
            CrossSectionModel::PowerLaw { .. } => "power-law",
            CrossSectionModel::Born(_) => "born",
            CrossSectionModel::SWave { .. } => "s-wave",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CrossSectionModel::Constant { sigma_tot } => {
                if !(*sigma_tot > 0.0) {
                    return Err(invalid("sigma_tot", "must be > 0"));
                }
            }
            CrossSectionModel::PowerLaw { c, a } => {
                if !(*c > 0.0) {
                    return Err(invalid("c", "must be > 0"));
                }
                if !(*a > -3.0) {
                    return Err(invalid("a", "must be > -3"));
                }
            }
            CrossSectionModel::Born(p) => p.validate()?,
            CrossSectionModel::SWave { length } => {
                if !length.is_finite() || *length == 0.0 {
                    return Err(invalid("length", "must be finite and non-zero"));
                }
            }
        }
        Ok(())
    }

    /// Constant models are the `a = 0` power law.
    fn power_law(&self) -> Option<(f64, f64)> {
        match self {
            CrossSectionModel::Constant { sigma_tot } => Some((sigma_tot / (4.0 * PI), 0.0)),
            CrossSectionModel::PowerLaw { c, a } => Some((*c, *a)),
            _ => None,
        }
    }
}

/// Quantum statistics of the gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistics {
    MaxwellBoltzmann,
    BoseEinstein { z: f64 },
    FermiDirac { z: f64 },
}

/// Background gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasSpec {
    pub n_gas: f64,
    pub m: f64,
    pub beta: f64,
    pub statistics: Statistics,
}

impl GasSpec {
    /// Maxwell-Boltzmann gas.
    pub fn mb(n_gas: f64, m: f64, beta: f64) -> Self {
        Self {
            n_gas,
            m,
            beta,
            statistics: Statistics::MaxwellBoltzmann,
        }
    }

    /// Unit-density gas in internal units.
    pub fn internal() -> Self {
        Self::mb(1.0, 1.0, 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_gas > 0.0) {
            return Err(invalid("n_gas", "must be > 0"));
        }
        if !(self.m > 0.0) {
            return Err(invalid("m", "must be > 0"));
        }
        if !(self.beta > 0.0) {
            return Err(invalid("beta", "must be > 0"));
        }
        match self.statistics {
            Statistics::BoseEinstein { z } if !(z > 0.0 && z < 1.0) => {
                Err(invalid("z", "Bose-Einstein fugacity must lie in (0, 1)"))
            }
            Statistics::FermiDirac { z } if !(z > 0.0) => {
                Err(invalid("z", "Fermi-Dirac fugacity must be > 0"))
            }
            _ => Ok(()),
        }
    }

    pub fn v_beta(&self) -> f64 {
        units::v_beta(self.beta, self.m)
    }

    pub fn p_beta(&self) -> f64 {
        units::p_beta(self.beta, self.m)
    }
}

/// Test particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleSpec {
    pub mass: f64,
    pub p0: Option<Vec3>,
}

impl ParticleSpec {
    pub fn new(mass: f64) -> Self {
        Self { mass, p0: None }
    }
}

/// A collision model together with the gas and the test particle.
#[derive(Debug, Clone, PartialEq)]
pub struct Collision {
    pub model: CrossSectionModel,
    pub gas: GasSpec,
    pub particle: ParticleSpec,
    pub hbar: f64,
}

impl Collision {
    pub fn new(model: CrossSectionModel, gas: GasSpec, particle: ParticleSpec, hbar: f64) -> Result<Self> {
        model.validate()?;
        gas.validate()?;
        if !(particle.mass > 0.0) {
            return Err(invalid("M", "must be > 0"));
        }
        if !(hbar > 0.0) {
            return Err(invalid("hbar", "must be > 0"));
        }
        Ok(Self {
            model,
            gas,
            particle,
            hbar,
        })
    }

    /// Internal units with `m/M = mass_ratio`.
    pub fn internal(model: CrossSectionModel, mass_ratio: f64) -> Result<Self> {
        Self::new(model, GasSpec::internal(), ParticleSpec::new(1.0 / mass_ratio), 1.0)
    }

    pub fn m_star(&self) -> f64 {
        units::reduced_mass(self.gas.m, self.particle.mass)
    }

    /// Gas momentum density.
    pub fn mu(&self, p: Vec3) -> f64 {
        special::mb_density(p, self.gas.beta, self.gas.m)
    }

    /// One-dimensional Gaussian marginal `exp(−a²/p_β²)/(√π p_β)`.
    fn mu1(&self, a: f64) -> f64 {
        let pb = self.gas.p_beta();
        (-(a * a) / (pb * pb)).exp() / (SQRT_PI * pb)
    }

    /// Relative momentum `m*(p/m − P/M)`.
    pub fn rel(&self, p: Vec3, big_p: Vec3) -> Vec3 {
        let ms = self.m_star();
        vec3::sub(vec3::scale(p, ms / self.gas.m), vec3::scale(big_p, ms / self.particle.mass))
    }

    /// Born amplitude `f_B(q) = −(m*/2πħ²) ∫ V e^{−iq·x/ħ} d³x` for momentum
    /// transfer magnitude `q`.
    pub fn born_amplitude(&self, q: f64) -> Result<f64> {
        match &self.model {
            CrossSectionModel::Born(pot) => {
                let ft = pot.fourier_transform(q / self.hbar)?;
                Ok(-self.m_star() / (2.0 * PI * self.hbar * self.hbar) * ft)
            }
            other => Err(Error::PhaseFree(other.name())),
        }
    }

    /// Scattering amplitude `f(p_f, p_i)` in relative momenta.
    pub fn amplitude(&self, p_f: Vec3, p_i: Vec3) -> Result<Complex64> {
        match &self.model {
            CrossSectionModel::Born(_) => {
                Ok(Complex64::new(self.born_amplitude(vec3::norm(vec3::sub(p_f, p_i)))?, 0.0))
            }
            CrossSectionModel::SWave { length } => Ok(swave(*length, vec3::norm(p_i) / self.hbar)),
            other => Err(Error::PhaseFree(other.name())),
        }
    }

    /// Forward amplitude `f(p, p)` for relative momentum magnitude `p`.
    pub fn forward_amplitude(&self, p: f64) -> Result<Complex64> {
        match &self.model {
            CrossSectionModel::Born(_) => Ok(Complex64::new(self.born_amplitude(0.0)?, 0.0)),
            CrossSectionModel::SWave { length } => Ok(swave(*length, p / self.hbar)),
            other => Err(Error::PhaseFree(other.name())),
        }
    }

    /// Differential cross-section `σ(p_f, p_i) = |f(p_f, p_i)|²`.
    pub fn diff_cross_section(&self, p_f: Vec3, p_i: Vec3) -> Result<f64> {
        match &self.model {
            CrossSectionModel::Born(_) => {
                let f = self.born_amplitude(vec3::norm(vec3::sub(p_f, p_i)))?;
                Ok(f * f)
            }
            _ => self.diff_cross_section_angle(0.0, vec3::norm(p_i)),
        }
    }

    /// Differential cross-section for relative momentum magnitude `p` and
    /// scattering angle with cosine `cos_theta`.
    pub fn diff_cross_section_angle(&self, cos_theta: f64, p: f64) -> Result<f64> {
        Ok(match &self.model {
            CrossSectionModel::Constant { sigma_tot } => sigma_tot / (4.0 * PI),
            CrossSectionModel::PowerLaw { c, a } => c * (p / self.m_star()).powf(*a),
            CrossSectionModel::Born(_) => {
                let q = (2.0 * p * p * (1.0 - cos_theta)).max(0.0).sqrt();
                let f = self.born_amplitude(q)?;
                f * f
            }
            CrossSectionModel::SWave { length } => swave(*length, p / self.hbar).norm_sqr(),
        })
    }

    /// Total cross-section at relative momentum magnitude `p`.
    pub fn total_cross_section(&self, p: f64) -> Result<f64> {
        match &self.model {
            CrossSectionModel::Born(_) => {
                let rule = quad::gauss_legendre(48);
                let mut acc = 0.0;
                for (&c, &w) in rule.nodes.iter().zip(&rule.weights) {
                    acc += w * self.diff_cross_section_angle(c, p)?;
                }
                Ok(2.0 * PI * acc)
            }
            _ => Ok(4.0 * PI * self.diff_cross_section_angle(1.0, p)?),
        }
    }

    /// Total thermal scattering rate `Γ_β = n_gas v_β σ_tot` of a constant model.
    pub fn thermal_rate(&self) -> Result<f64> {
        match self.model {
            CrossSectionModel::Constant { sigma_tot } => Ok(self.gas.n_gas * self.gas.v_beta() * sigma_tot),
            _ => Err(Error::Domain(alloc::string::String::from(
                "thermal rate needs a constant cross-section",
            ))),
        }
    }

    /// `P σ_eff(P)`, finite at `P = 0`.
    pub fn p_sigma_eff(&self, p: f64) -> Result<f64> {
        let (c, a) = self.model.power_law().ok_or_else(|| {
            Error::Domain(alloc::string::String::from(
                "effective cross-section needs a constant or power-law model",
            ))
        })?;
        let vb = self.gas.v_beta();
        let big_m = self.particle.mass;
        let u = p / (big_m * vb);
        let f = hyp1f1(-(a / 2.0 + 0.5), 1.5, -u * u)?;
        Ok(8.0 * SQRT_PI * gamma(a / 2.0 + 2.0) * big_m * vb.powf(a + 1.0) * c * f)
    }

    /// Effective cross-section `σ_eff(P)` for `P > 0`.
    pub fn effective_cross_section(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(Error::Domain(alloc::string::String::from(
                "σ_eff diverges at P = 0; use p_sigma_eff",
            )));
        }
        Ok(self.p_sigma_eff(p)? / p)
    }

    /// Classical loss rate `M_out(P)`.
    pub fn loss_rate(&self, big_p: Vec3) -> Result<f64> {
        let p = vec3::norm(big_p);
        if self.model.power_law().is_some() {
            return Ok(self.gas.n_gas * self.p_sigma_eff(p)? / self.particle.mass);
        }
        let v = p / self.particle.mass;
        let ms = self.m_star();
        let mut err = None;
        let avg = relative_speed_average(v, self.gas.v_beta(), |w| {
            match self.total_cross_section(ms * w) {
                Ok(s) => w * s,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(self.gas.n_gas * avg),
        }
    }

    /// Classical gain rate density `M_in(P+Q; Q)` for a jump from `P` by `Q`.
    pub fn gain_rate(&self, big_p: Vec3, q: Vec3) -> Result<f64> {
        let qn = vec3::norm(q);
        if !(qn > 0.0) {
            return Err(Error::Domain(alloc::string::String::from("Q = 0 is excluded")));
        }
        let qhat = vec3::scale(q, 1.0 / qn);
        let (p_par, _) = vec3::split(big_p, qhat);
        let (m, big_m, ms) = (self.gas.m, self.particle.mass, self.m_star());
        let a_par = m / ms * qn / 2.0 + m / big_m * p_par;
        let pre = self.gas.n_gas * m / (ms * ms * qn) * self.mu1(a_par);
        match &self.model {
            CrossSectionModel::Constant { sigma_tot } => Ok(pre * sigma_tot / (4.0 * PI)),
            CrossSectionModel::Born(_) => {
                let f = self.born_amplitude(qn)?;
                Ok(pre * f * f)
            }
            _ => self.gain_rate_quadrature(big_p, q),
        }
    }

    /// Gain rate density by Gauss-Hermite quadrature over the plane `Q^⊥`,
    /// escalating the order until the relative change drops below 1e-8.
    pub fn gain_rate_quadrature(&self, big_p: Vec3, q: Vec3) -> Result<f64> {
        let qn = vec3::norm(q);
        if !(qn > 0.0) {
            return Err(Error::Domain(alloc::string::String::from("Q = 0 is excluded")));
        }
        let qhat = vec3::scale(q, 1.0 / qn);
        let (p_par, p_perp) = vec3::split(big_p, qhat);
        let (e1, e2) = vec3::orthonormal_pair(qhat);
        let (m, big_m, ms) = (self.gas.m, self.particle.mass, self.m_star());
        let a_par = m / ms * qn / 2.0 + m / big_m * p_par;
        let pre = self.gas.n_gas * m / (ms * ms * qn) * self.mu1(a_par);
        let pb = self.gas.p_beta();
        let half_q = vec3::scale(q, 0.5);
        let eval = |rule: &Rule| -> Result<f64> {
            let mut acc = 0.0;
            for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
                for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
                    let k = vec3::add(vec3::scale(e1, pb * x), vec3::scale(e2, pb * y));
                    let rel = self.rel(k, p_perp);
                    let s = self.diff_cross_section(vec3::sub(rel, half_q), vec3::add(rel, half_q))?;
                    acc += wx * wy * s;
                }
            }
            Ok(acc / PI)
        };
        gauss_hermite_escalate(eval).map(|v| pre * v)
    }

    /// Loss rate by direct quadrature of the gain rate over all transfers.
    pub fn loss_rate_quadrature(&self, big_p: Vec3) -> Result<f64> {
        let p = vec3::norm(big_p);
        let axis = if p > 0.0 { vec3::scale(big_p, 1.0 / p) } else { [0.0, 0.0, 1.0] };
        let (e1, _) = vec3::orthonormal_pair(axis);
        let (m, big_m, ms) = (self.gas.m, self.particle.mass, self.m_star());
        let q_max = 2.0 * ms / m * (m / big_m * p + 9.0 * self.gas.p_beta());
        let radial = quad::gauss_legendre(32);
        let angular = quad::gauss_legendre(64);
        let mut total = 0.0;
        let panels = 24;
        let h = q_max / panels as f64;
        for k in 0..panels {
            let mid = h * (k as f64 + 0.5);
            for (&xr, &wr) in radial.nodes.iter().zip(&radial.weights) {
                let qn = mid + 0.5 * h * xr;
                for (&c, &wc) in angular.nodes.iter().zip(&angular.weights) {
                    let s = (1.0 - c * c).max(0.0).sqrt();
                    let q = vec3::add(vec3::scale(axis, qn * c), vec3::scale(e1, qn * s));
                    total += 0.5 * h * wr * wc * qn * qn * self.gain_rate(big_p, q)?;
                }
            }
        }
        Ok(2.0 * PI * total)
    }
}

/// `f(k) = −a/(1 + ika)`.
pub fn swave(length: f64, k: f64) -> Complex64 {
    Complex64::new(-length, 0.0) / Complex64::new(1.0, k * length)
}

/// Largest Gauss-Hermite order tried by the escalating quadratures.
pub(crate) const HERMITE_CAP: usize = 256;

/// Run `eval` on Gauss-Hermite rules of growing order until successive
/// values agree to 1e-8 relative.
pub(crate) fn gauss_hermite_escalate<F>(mut eval: F) -> Result<f64>
where
    F: FnMut(&Rule) -> Result<f64>,
{
    let mut prev = eval(&quad::gauss_hermite(8))?;
    let mut n = 16;
    let mut residual = f64::INFINITY;
    while n <= HERMITE_CAP {
        let cur = eval(&quad::gauss_hermite(n))?;
        residual = (cur - prev).abs();
        if residual <= 1e-8 * cur.abs() || cur == prev {
            return Ok(cur);
        }
        prev = cur;
        n *= 2;
    }
    Err(Error::Quadrature { residual })
}

/// Average of `g(w)` over the relative speed `w = |v − V|` with `v` drawn
/// from the Maxwell-Boltzmann velocity distribution of most probable speed
/// `vb` and `|V| = v_test`.
pub fn relative_speed_average<F: FnMut(f64) -> f64>(v_test: f64, vb: f64, mut g: F) -> f64 {
    let rule = quad::gauss_legendre(48);
    let lo = (v_test - 11.0 * vb).max(0.0);
    let hi = v_test + 11.0 * vb;
    let panels = 16;
    quad::integrate(&rule, lo, hi, panels, |w| relative_speed_density(w, v_test, vb) * g(w))
}

/// Probability density of the relative speed `w` for test speed `v_test`.
pub fn relative_speed_density(w: f64, v_test: f64, vb: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let x = w / vb;
    let y = v_test / vb;
    if y < 1e-8 {
        return 4.0 / (SQRT_PI * vb) * x * x * (-x * x).exp();
    }
    let d = x - y;
    let diff = -(-d * d).exp() * (-4.0 * x * y).exp_m1();
    x / y / (SQRT_PI * vb) * diff
}

/// Semiclassical total cross-section of a `−C6/r⁶` interaction at relative
/// speed `v_rel`.
pub fn london_cross_section(v_rel: f64, c6: f64, hbar: f64) -> Result<f64> {
    if !(v_rel > 0.0) {
        return Err(invalid("v_rel", "must be > 0"));
    }
    if !(c6 > 0.0) {
        return Err(invalid("C6", "must be > 0"));
    }
    Ok(london_prefactor(c6, hbar) * v_rel.powf(-0.4))
}

/// Coefficient `A` of `σ_tot = A v^{−2/5}`.
pub fn london_prefactor(c6: f64, hbar: f64) -> f64 {
    PI * PI / ((PI / 5.0).sin() * gamma(0.4)) * (3.0 * PI * c6 / (8.0 * hbar)).powf(0.4)
}

/// Power-law model equivalent to the London cross-section.
pub fn london_model(c6: f64, hbar: f64) -> CrossSectionModel {
    CrossSectionModel::PowerLaw {
        c: london_prefactor(c6, hbar) / (4.0 * PI),
        a: -0.4,
    }
}

#[cfg(test)]
mod tests {

    #[test]
    fn gaussian_transform_matches_radial_quadrature() {
        let pot = Potential::Gaussian { v0: -0.7, r0: 1.3 };
        for q in [0.0, 0.5, 2.0, 5.0] {
            let closed = pot.fourier_transform(q).unwrap();
            let radial = pot.radial_transform(q).unwrap();
            assert!((closed - radial).abs() < 1e-11 * pot.fourier_transform(0.0).unwrap().abs(), "{q}");
        }
        assert!(pot.radial_transform(40.0).unwrap().abs() < 1e-10);
    }
    use super::*;

    fn constant(ratio: f64) -> Collision {
        Collision::internal(CrossSectionModel::Constant { sigma_tot: 1.0 }, ratio).unwrap()
    }

    #[test]
    fn loss_rate_at_rest() {
        let c = constant(1.0);
        let v = c.loss_rate([0.0; 3]).unwrap();
        assert!((v - 2.0 / SQRT_PI).abs() < 1e-14);
    }

    #[test]
    fn gain_quadrature_matches_closed_form() {
        let c = constant(0.5);
        for &(p, q) in &[([0.3, -1.0, 2.0], [0.5, 0.2, -0.7]), ([4.0, 0.0, 0.0], [-1.0, 0.3, 0.0])] {
            let a = c.gain_rate(p, q).unwrap();
            let b = c.gain_rate_quadrature(p, q).unwrap();
            assert!((a - b).abs() < 1e-12 * a, "{a} {b}");
        }
    }

    #[test]
    fn phase_free_models_refuse_amplitudes() {
        let c = constant(1.0);
        assert!(matches!(c.amplitude([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), Err(Error::PhaseFree(_))));
        let p = Collision::internal(CrossSectionModel::PowerLaw { c: 1.0, a: -0.4 }, 1.0).unwrap();
        assert!(matches!(p.forward_amplitude(1.0), Err(Error::PhaseFree(_))));
    }

    #[test]
    fn relative_speed_density_normalized() {
        for &v in &[0.0, 0.05, 1.0, 4.0] {
            let s = relative_speed_average(v, 1.0, |_| 1.0);
            assert!((s - 1.0).abs() < 1e-13, "{v}: {s}");
        }
    }

    #[test]
    fn tabulated_potential_interpolates() {
        let p = Potential::Tabulated {
            r: alloc::vec![0.0, 1.0, 2.0],
            v: alloc::vec![-2.0, -1.0, 0.0],
        };
        assert_eq!(p.value(0.5), -1.5);
        assert_eq!(p.value(3.0), 0.0);
    }
}
