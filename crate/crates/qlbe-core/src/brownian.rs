//! Quantum Brownian limit: friction and diffusion coefficients and the exact
//! solutions of the frictionless master equation for Gaussian-sum states.
//!
//! The solutions factorize over Cartesian axes for product states, so they
//! are implemented for one axis.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::quad;
use crate::scattering::Collision;

const LAGUERRE_NODES: usize = 64;
const ANGLE_NODES: usize = 64;

/// Friction coefficient
/// `η = (16/3)√π (m/M) n_gas √(2/βm) ∫du u⁵e^{−u²} ∫dθ sinθ(1 − cosθ) σ(θ; u)`
/// where `u` is the relative speed in units of `v_β`.
pub fn friction_coefficient(c: &Collision) -> Result<f64> {
    let lag = quad::gauss_laguerre(LAGUERRE_NODES, 2.0);
    let ang = quad::gauss_legendre(ANGLE_NODES);
    let (m, big_m, ms) = (c.gas.m, c.particle.mass, c.m_star());
    let vb = c.gas.v_beta();
    let mut total = 0.0;
    for (&x, &wx) in lag.nodes.iter().zip(&lag.weights) {
        let prel = ms * x.sqrt() * vb;
        let mut inner = 0.0;
        for (&ct, &wt) in ang.nodes.iter().zip(&ang.weights) {
            inner += wt * (1.0 - ct) * c.diff_cross_section_angle(ct, prel)?;
        }
        total += wx * inner;
    }
    Ok(16.0 / 3.0 * PI.sqrt() * (m / big_m) * c.gas.n_gas * vb * 0.5 * total)
}

/// Momentum and position diffusion coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffusion {
    pub d_pp: f64,
    pub d_xx: f64,
}

/// `D_pp = ηM/β`, `D_xx = βħ²η/(16M)`.
pub fn diffusion_coefficients(eta: f64, beta: f64, big_m: f64, hbar: f64) -> Result<Diffusion> {
    for (name, v) in [("eta", eta), ("beta", beta), ("M", big_m), ("hbar", hbar)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(invalid(name, "must be finite and >= 0"));
        }
    }
    if !(beta > 0.0 && big_m > 0.0 && hbar > 0.0) {
        return Err(invalid("beta, M, hbar", "must be > 0"));
    }
    Ok(Diffusion {
        d_pp: eta * big_m / beta,
        d_xx: beta * hbar * hbar * eta / (16.0 * big_m),
    })
}

/// Time below which the position-diffusion decay of momentum coherences
/// dominates the kinetic contribution, `(√3/2)βħ`.
pub fn crossover_time(beta: f64, hbar: f64) -> f64 {
    0.75f64.sqrt() * beta * hbar
}

/// `exp(−a x² + b x + c)` with `Re a > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl Gaussian {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        if !(a.re > 0.0) || !a.im.is_finite() || !(b.re.is_finite() && b.im.is_finite()) {
            return Err(invalid("gaussian", "needs finite coefficients with Re a > 0"));
        }
        Ok(Self { a, b, c })
    }

    /// Normalized wave packet of width `sigma` centred at `x0` with mean
    /// momentum `p0`.
    pub fn packet(x0: f64, p0: f64, sigma: f64, hbar: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(invalid("sigma", "must be > 0"));
        }
        let a = 1.0 / (4.0 * sigma * sigma);
        let b = Complex64::new(2.0 * a * x0, p0 / hbar);
        let c = Complex64::new(-a * x0 * x0 - 0.25 * (2.0 * PI * sigma * sigma).ln(), 0.0);
        Self::new(Complex64::new(a, 0.0), b, c)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (-self.a * x * x + self.b * x + self.c).exp()
    }

    fn log_eval(&self, x: Complex64) -> Complex64 {
        -self.a * x * x + self.b * x + self.c
    }

    /// Free Schrödinger evolution over time `t`.
    pub fn free_evolve(&self, t: f64, big_m: f64, hbar: f64) -> Self {
        if t == 0.0 {
            return *self;
        }
        let i = Complex64::i();
        let big_a = 1.0 / (4.0 * self.a) + i * hbar * t / (2.0 * big_m);
        let four_a_a = 4.0 * self.a * big_a;
        let b = self.b;
        Self {
            a: 1.0 / (4.0 * big_a),
            b: b / four_a_a,
            c: self.c + b * b / (4.0 * self.a) - b * b / (16.0 * self.a * self.a * big_a) - 0.5 * four_a_a.ln(),
        }
    }

    /// Momentum-space wave function `(2πħ)^{−1/2} ∫ψ(x)e^{−iPx/ħ}dx`, itself
    /// a Gaussian in `P`.
    pub fn momentum(&self, hbar: f64) -> Self {
        let i = Complex64::i();
        let a = self.a;
        Self {
            a: 1.0 / (4.0 * a * hbar * hbar),
            b: -i * self.b / (2.0 * a * hbar),
            c: self.c + self.b * self.b / (4.0 * a) + 0.5 * (PI / a).ln()
                - 0.5 * Complex64::new(2.0 * PI * hbar, 0.0).ln(),
        }
    }
}

/// `ln ∫ exp(−α y² + β y) dy = ln √(π/α) + β²/(4α)`.
fn log_gauss_integral(alpha: Complex64, beta: Complex64) -> Complex64 {
    0.5 * (Complex64::new(PI, 0.0) / alpha).ln() + beta * beta / (4.0 * alpha)
}

/// Pure state `Σ_j g_j(x)` in one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSum {
    pub terms: Vec<Gaussian>,
}

/// Parameters of the frictionless master equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionlessParams {
    pub d_pp: f64,
    pub d_xx: f64,
    pub big_m: f64,
    pub hbar: f64,
}

impl FrictionlessParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_pp >= 0.0 && self.d_xx >= 0.0) {
            return Err(invalid("D", "diffusion coefficients must be >= 0"));
        }
        if !(self.big_m > 0.0 && self.hbar > 0.0) {
            return Err(invalid("M, hbar", "must be > 0"));
        }
        Ok(())
    }
}

impl GaussianSum {
    pub fn new(terms: Vec<Gaussian>) -> Result<Self> {
        if terms.is_empty() {
            return Err(invalid("state", "needs at least one Gaussian term"));
        }
        Ok(Self { terms })
    }

    /// Initial density matrix `⟨x|ρ₀|x′⟩`.
    pub fn density(&self, x: f64, xp: f64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for gj in &self.terms {
            for gk in &self.terms {
                s += gj.eval(x) * gk.eval(xp).conj();
            }
        }
        s
    }

    /// `∫|ψ|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for gj in &self.terms {
            for gk in &self.terms {
                s += log_gauss_integral(gj.a + gk.a.conj(), gj.b + gk.b.conj()).exp() * (gj.c + gk.c.conj()).exp();
            }
        }
        s.re
    }

    /// `⟨X|ρ_t|X′⟩` of the frictionless master equation.
    pub fn position_element(&self, x: f64, xp: f64, t: f64, p: &FrictionlessParams) -> Result<Complex64> {
        p.validate()?;
        if !(t >= 0.0) {
            return Err(invalid("t", "must be >= 0"));
        }
        let evolved: Vec<Gaussian> = self.terms.iter().map(|g| g.free_evolve(t, p.big_m, p.hbar)).collect();
        let big_a = p.d_xx + p.d_pp * t * t / (3.0 * p.big_m * p.big_m);
        if t == 0.0 || big_a == 0.0 {
            let mut s = Complex64::new(0.0, 0.0);
            for gj in &evolved {
                for gk in &evolved {
                    s += gj.eval(x) * gk.eval(xp).conj();
                }
            }
            return Ok(s);
        }
        let d = x - xp;
        let hb = p.hbar;
        let decay = -p.d_pp / (hb * hb) * d * d * t * (1.0 - p.d_pp * t * t / (4.0 * p.big_m * p.big_m) / big_a);
        let width = 4.0 * big_a * t;
        let kappa = p.d_pp * d * t / (2.0 * p.big_m * hb * big_a);
        let log_pre = -0.5 * (PI * width).ln() + decay;
        let i = Complex64::i();
        let mut s = Complex64::new(0.0, 0.0);
        for gj in &evolved {
            for gk in &evolved {
                let (aj, bj) = (gj.a, gj.b);
                let (ak, bk) = (gk.a.conj(), gk.b.conj());
                let alpha = aj + ak + 1.0 / width;
                let beta = 2.0 * aj * x - bj + 2.0 * ak * xp - bk + i * kappa;
                let constant = gj.log_eval(Complex64::new(x, 0.0)) + gk.log_eval(Complex64::new(xp, 0.0)).conj();
                s += (log_gauss_integral(alpha, beta) + constant + log_pre).exp();
            }
        }
        Ok(s)
    }

    /// `⟨P|ρ_t|P′⟩` of the frictionless master equation:
    /// `e^{−D_xx k²t} e^{−D_pp k²t³/12M²} e^{−i(P²−P′²)t/2Mħ}` times the
    /// Gaussian convolution `∫dQ G(Q) e^{ikQt/2M} ρ₀(P−Q, P′−Q)`, `k = (P−P′)/ħ`.
    pub fn momentum_element(&self, pm: f64, pmp: f64, t: f64, p: &FrictionlessParams) -> Result<Complex64> {
        p.validate()?;
        if !(t >= 0.0) {
            return Err(invalid("t", "must be >= 0"));
        }
        let hb = p.hbar;
        let mom: Vec<Gaussian> = self.terms.iter().map(|g| g.momentum(hb)).collect();
        let k = (pm - pmp) / hb;
        let i = Complex64::i();
        let log_pre = -p.d_xx * k * k * t - p.d_pp * k * k * t.powi(3) / (12.0 * p.big_m * p.big_m)
            - i * (pm * pm - pmp * pmp) * t / (2.0 * p.big_m * hb);
        let mut s = Complex64::new(0.0, 0.0);
        for gj in &mom {
            for gk in &mom {
                let constant = gj.log_eval(Complex64::new(pm, 0.0)) + gk.log_eval(Complex64::new(pmp, 0.0)).conj();
                if t == 0.0 || p.d_pp == 0.0 {
                    s += (constant + log_pre).exp();
                    continue;
                }
                let width = 4.0 * p.d_pp * t;
                let (aj, bj) = (gj.a, gj.b);
                let (ak, bk) = (gk.a.conj(), gk.b.conj());
                let alpha = aj + ak + 1.0 / width;
                let beta = 2.0 * aj * pm - bj + 2.0 * ak * pmp - bk + i * k * t / (2.0 * p.big_m);
                s += (log_gauss_integral(alpha, beta) + constant + log_pre - 0.5 * (PI * width).ln()).exp();
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::CrossSectionModel;

    fn params() -> FrictionlessParams {
        FrictionlessParams {
            d_pp: 0.3,
            d_xx: 0.02,
            big_m: 2.0,
            hbar: 1.0,
        }
    }

    fn cat() -> GaussianSum {
        GaussianSum::new(alloc::vec![
            Gaussian::packet(-1.5, 0.4, 0.6, 1.0).unwrap(),
            Gaussian::packet(1.5, -0.2, 0.6, 1.0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn constant_cross_section_friction() {
        let c = Collision::internal(CrossSectionModel::Constant { sigma_tot: 1.0 }, 0.3).unwrap();
        let eta = friction_coefficient(&c).unwrap();
        let want = 8.0 / (3.0 * PI.sqrt()) * 0.3 * c.thermal_rate().unwrap();
        assert!((eta - want).abs() < 1e-12 * want);
    }

    #[test]
    fn packet_is_normalized_and_free_evolution_unitary() {
        let g = Gaussian::packet(0.3, 1.2, 0.7, 1.0).unwrap();
        let s = GaussianSum::new(alloc::vec![g.free_evolve(2.5, 1.5, 1.0)]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn free_evolution_moves_the_packet() {
        let (m, hbar, p0) = (2.0, 1.0, 1.4);
        let g = Gaussian::packet(0.0, p0, 0.5, hbar).unwrap().free_evolve(3.0, m, hbar);
        let centre = (g.b / (2.0 * g.a)).re;
        // Peak of |ψ|²: maximize −Re(a)x² + Re(b)x.
        let peak = g.b.re / (2.0 * g.a.re);
        assert!((peak - p0 / m * 3.0).abs() < 1e-12, "{centre} {peak}");
    }

    #[test]
    fn momentum_transform_by_quadrature() {
        let g = Gaussian::packet(0.4, -0.8, 0.9, 1.0).unwrap();
        let phi = g.momentum(1.0);
        let rule = quad::gauss_legendre(64);
        for &pm in &[-1.0, 0.0, 0.7] {
            let num = quad::integrate(&rule, -12.0, 12.0, 16, |x| (g.eval(x) * Complex64::from_polar(1.0, -pm * x)).re);
            let num_im = quad::integrate(&rule, -12.0, 12.0, 16, |x| (g.eval(x) * Complex64::from_polar(1.0, -pm * x)).im);
            let want = Complex64::new(num, num_im) / (2.0 * PI).sqrt();
            assert!((phi.eval(pm) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn solutions_reduce_to_initial_state() {
        let s = cat();
        let p = params();
        for &(x, xp) in &[(0.2, -1.0), (1.4, 1.6)] {
            let a = s.position_element(x, xp, 0.0, &p).unwrap();
            assert!((a - s.density(x, xp)).norm() < 1e-15);
        }
    }

    #[test]
    fn no_diffusion_is_free_evolution() {
        let s = cat();
        let p = FrictionlessParams { d_pp: 0.0, d_xx: 0.0, ..params() };
        let evolved = GaussianSum::new(s.terms.iter().map(|g| g.free_evolve(1.3, p.big_m, p.hbar)).collect()).unwrap();
        let a = s.position_element(0.4, -0.9, 1.3, &p).unwrap();
        assert!((a - evolved.density(0.4, -0.9)).norm() < 1e-14);
    }

    #[test]
    fn momentum_solution_of_uniform_coherence() {
        // A broad packet is nearly constant in momentum; the convolution then
        // contributes e^{−D_pp k² t³/3M²} through the correlation phase.
        let wide = GaussianSum::new(alloc::vec![Gaussian::packet(0.0, 0.0, 1e-4, 1.0).unwrap()]).unwrap();
        let p = FrictionlessParams { d_xx: 0.0, ..params() };
        let t = 1.5;
        let (pm, pmp) = (0.3, -0.2);
        let got = wide.momentum_element(pm, pmp, t, &p).unwrap();
        let rho0 = wide.momentum_element(pm, pmp, 0.0, &p).unwrap();
        let k = pm - pmp;
        let phase = Complex64::from_polar(1.0, -(pm * pm - pmp * pmp) * t / (2.0 * p.big_m));
        let want = rho0 * phase * (-p.d_pp * k * k * t.powi(3) / (3.0 * p.big_m * p.big_m)).exp();
        assert!((got - want).norm() < 1e-6 * want.norm(), "{got} {want}");
    }
}
