//! Lindblad operators and kernels of the quantum linear Boltzmann equation,
//! coherent forward-scattering corrections, and a small momentum-grid
//! generator used as an oracle.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::quad::{self, Rule};
use crate::scattering::{self, Collision, CrossSectionModel, HERMITE_CAP};
use crate::vec3::{self, Vec3};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Largest grid oracle edge.
pub const MAX_GRID_POINTS: usize = 9;
/// Fraction of the loss rate leaking across the grid boundary that
/// triggers a warning.
pub const LEAKAGE_WARNING: f64 = 0.01;

fn check_q(q: Vec3) -> Result<(f64, Vec3)> {
    let qn = vec3::norm(q);
    if !(qn > 0.0) || !qn.is_finite() {
        return Err(Error::Domain(alloc::string::String::from("Q = 0 is excluded")));
    }
    Ok((qn, vec3::scale(q, 1.0 / qn)))
}

/// One-dimensional gas marginal `exp(−a²/p_β²)/(√π p_β)`.
fn mu1(c: &Collision, a: f64) -> f64 {
    let pb = c.gas.p_beta();
    (-(a * a) / (pb * pb)).exp() / (SQRT_PI * pb)
}

/// Parallel argument `(m/m*)Q/2 + (m/M)P_∥ − m V_∥` of the gas distribution.
fn parallel_arg(c: &Collision, big_p: Vec3, qn: f64, qhat: Vec3, v_gas: Vec3) -> f64 {
    let (m, big_m, ms) = (c.gas.m, c.particle.mass, c.m_star());
    m / ms * qn / 2.0 + m / big_m * vec3::dot(big_p, qhat) - m * vec3::dot(v_gas, qhat)
}

/// Scattering amplitude, or `√σ` for models that carry no phase.
fn amplitude_or_modulus(c: &Collision, p_f: Vec3, p_i: Vec3) -> Result<Complex64> {
    match c.amplitude(p_f, p_i) {
        Err(Error::PhaseFree(_)) => Ok(Complex64::new(c.diff_cross_section(p_f, p_i)?.sqrt(), 0.0)),
        other => other,
    }
}

fn lindblad_parts(c: &Collision, p_perp: Vec3, big_p: Vec3, q: Vec3, v_gas: Vec3) -> Result<(f64, Vec3, Vec3, f64)> {
    let (qn, qhat) = check_q(q)?;
    let (_, p_perp) = vec3::split(p_perp, qhat);
    let (_, big_p_perp) = vec3::split(big_p, qhat);
    let ms = c.m_star();
    let pre = c.gas.n_gas * c.gas.m / (ms * ms * qn);
    let rel = c.rel(p_perp, big_p_perp);
    let half_q = vec3::scale(q, 0.5);
    let a = parallel_arg(c, big_p, qn, qhat, v_gas);
    let (_, vperp) = vec3::split(vec3::scale(v_gas, c.gas.m), qhat);
    let mu = c.mu(vec3::add(vec3::sub(p_perp, vperp), vec3::scale(qhat, a)));
    Ok((pre, vec3::sub(rel, half_q), vec3::add(rel, half_q), mu))
}

/// Lindblad function
/// `L(p_⊥, P; Q) = √(n_gas m/(m*² Q)) f(rel − Q/2, rel + Q/2) √μ(p_⊥ + (m/m*)Q/2 + (m/M)P_∥)`
/// with `rel = rel(p_⊥, P_⊥)`. The component of `p_perp` along `Q` is
/// ignored.
pub fn lindblad_value(c: &Collision, p_perp: Vec3, big_p: Vec3, q: Vec3) -> Result<Complex64> {
    lindblad_value_in_moving_gas(c, p_perp, big_p, q, vec3::ZERO)
}

/// Lindblad function for a gas drifting with velocity `v_gas`, whose
/// distribution is `μ(p − m v_gas)`.
pub fn lindblad_value_in_moving_gas(c: &Collision, p_perp: Vec3, big_p: Vec3, q: Vec3, v_gas: Vec3) -> Result<Complex64> {
    let (pre, p_f, p_i, mu) = lindblad_parts(c, p_perp, big_p, q, v_gas)?;
    Ok(c.amplitude(p_f, p_i)? * (pre * mu).sqrt())
}

/// `|L(p_⊥, P; Q)|²`, defined for every model.
pub fn lindblad_modulus_sq(c: &Collision, p_perp: Vec3, big_p: Vec3, q: Vec3) -> Result<f64> {
    let (pre, p_f, p_i, mu) = lindblad_parts(c, p_perp, big_p, q, vec3::ZERO)?;
    Ok(pre * c.diff_cross_section(p_f, p_i)? * mu)
}

/// Born Lindblad function `L_B(P; Q)` with the perpendicular gas momenta
/// integrated out, so that `|L_B|² = M_in(P+Q; Q)`.
pub fn born_lindblad(c: &Collision, big_p: Vec3, q: Vec3) -> Result<f64> {
    let (qn, qhat) = check_q(q)?;
    let f = c.born_amplitude(qn)?;
    let ms = c.m_star();
    let a = parallel_arg(c, big_p, qn, qhat, vec3::ZERO);
    Ok(f * (c.gas.n_gas * c.gas.m / (ms * ms * qn) * mu1(c, a)).sqrt())
}

/// Scaled Born Lindblad function for a constant cross-section,
/// `√(Γ_β/(4π^{3/2} K)) exp(−(K/2 + U·K̂)²/2)`, whose squared modulus is
/// the jump density in scaled variables.
pub fn scaled_lindblad(u: Vec3, k: Vec3, gamma_beta: f64) -> Result<f64> {
    let (kn, khat) = check_q(k)?;
    let a = kn / 2.0 + vec3::dot(u, khat);
    Ok((gamma_beta / (4.0 * PI.powf(1.5) * kn)).sqrt() * (-a * a / 2.0).exp())
}

/// Gain kernel `M_in(P, P′; Q) = ∫_{Q^⊥} d²k L(k, P−Q; Q) L*(k, P′−Q; Q)`.
/// Models without a phase enter through `√σ`.
pub fn quantum_gain_kernel(c: &Collision, big_p: Vec3, big_pp: Vec3, q: Vec3) -> Result<Complex64> {
    quantum_gain_kernel_in_moving_gas(c, big_p, big_pp, q, vec3::ZERO)
}

/// Gain kernel for a gas drifting with velocity `v_gas`.
pub fn quantum_gain_kernel_in_moving_gas(
    c: &Collision,
    big_p: Vec3,
    big_pp: Vec3,
    q: Vec3,
    v_gas: Vec3,
) -> Result<Complex64> {
    let (qn, qhat) = check_q(q)?;
    let src = vec3::sub(big_p, q);
    let srcp = vec3::sub(big_pp, q);
    let ms = c.m_star();
    let pre = c.gas.n_gas * c.gas.m / (ms * ms * qn);
    let a = parallel_arg(c, src, qn, qhat, v_gas);
    let ap = parallel_arg(c, srcp, qn, qhat, v_gas);
    let gauss = (mu1(c, a) * mu1(c, ap)).sqrt();
    match &c.model {
        CrossSectionModel::Constant { sigma_tot } => {
            return Ok(Complex64::new(pre * gauss * sigma_tot / (4.0 * PI), 0.0));
        }
        CrossSectionModel::Born(_) => {
            let f = c.born_amplitude(qn)?;
            return Ok(Complex64::new(pre * gauss * f * f, 0.0));
        }
        _ => {}
    }
    let (e1, e2) = vec3::orthonormal_pair(qhat);
    let (_, src_perp) = vec3::split(src, qhat);
    let (_, srcp_perp) = vec3::split(srcp, qhat);
    let (_, vperp) = vec3::split(vec3::scale(v_gas, c.gas.m), qhat);
    let pb = c.gas.p_beta();
    let half_q = vec3::scale(q, 0.5);
    let eval = |rule: &Rule| -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
            for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
                let k = vec3::add(vperp, vec3::add(vec3::scale(e1, pb * x), vec3::scale(e2, pb * y)));
                let rel = c.rel(k, src_perp);
                let relp = c.rel(k, srcp_perp);
                let f = amplitude_or_modulus(c, vec3::sub(rel, half_q), vec3::add(rel, half_q))?;
                let fp = amplitude_or_modulus(c, vec3::sub(relp, half_q), vec3::add(relp, half_q))?;
                acc += f * fp.conj() * (wx * wy);
            }
        }
        Ok(acc / PI)
    };
    let mut prev = eval(&quad::gauss_hermite(8))?;
    let mut n = 16;
    let mut residual = f64::INFINITY;
    while n <= HERMITE_CAP {
        let cur = eval(&quad::gauss_hermite(n))?;
        residual = (cur - prev).norm();
        if residual <= 1e-8 * cur.norm() || cur == prev {
            return Ok(cur * (pre * gauss));
        }
        prev = cur;
        n *= 2;
    }
    Err(Error::Quadrature { residual })
}

/// Density matrix on a cubic momentum grid, `⟨P_i|ρ|P_j⟩` with unit trace
/// `Σ ρ_ii = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixGrid {
    pub n: usize,
    pub spacing: f64,
    pub rho: Vec<Complex64>,
}

impl DensityMatrixGrid {
    /// Zero matrix on `n³` points with momenta `spacing·(i − (n−1)/2)` per axis.
    pub fn zeros(n: usize, spacing: f64) -> Result<Self> {
        if n == 0 || n > MAX_GRID_POINTS {
            return Err(invalid("n", "grid edge must be in 1..=9"));
        }
        if !(spacing > 0.0) {
            return Err(invalid("spacing", "must be > 0"));
        }
        let d = n * n * n;
        Ok(Self {
            n,
            spacing,
            rho: alloc::vec![Complex64::new(0.0, 0.0); d * d],
        })
    }

    /// Diagonal state with weights `w(P)`, normalized to unit trace.
    pub fn diagonal<F: Fn(Vec3) -> f64>(n: usize, spacing: f64, w: F) -> Result<Self> {
        let mut g = Self::zeros(n, spacing)?;
        let d = g.dim();
        let weights: Vec<f64> = (0..d).map(|i| w(g.momentum(i))).collect();
        let total: f64 = weights.iter().sum();
        for (i, wi) in weights.iter().enumerate() {
            g.rho[i * d + i] = Complex64::new(wi / total, 0.0);
        }
        Ok(g)
    }

    /// Pure state `|ψ⟩⟨ψ|` with amplitudes `ψ(P)`, normalized.
    pub fn pure<F: Fn(Vec3) -> Complex64>(n: usize, spacing: f64, psi: F) -> Result<Self> {
        let mut g = Self::zeros(n, spacing)?;
        let d = g.dim();
        let amps: Vec<Complex64> = (0..d).map(|i| psi(g.momentum(i))).collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        for i in 0..d {
            for j in 0..d {
                g.rho[i * d + j] = amps[i] * amps[j].conj() / norm;
            }
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.n * self.n * self.n
    }

    fn coords(&self, i: usize) -> [usize; 3] {
        let n = self.n;
        [i / (n * n), (i / n) % n, i % n]
    }

    pub fn momentum(&self, i: usize) -> Vec3 {
        let c = self.coords(i);
        let mid = (self.n as f64 - 1.0) / 2.0;
        [
            self.spacing * (c[0] as f64 - mid),
            self.spacing * (c[1] as f64 - mid),
            self.spacing * (c[2] as f64 - mid),
        ]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rho[i * self.dim() + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// Options of the grid generator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneratorOptions {
    /// Add the kinetic commutator, and the forward-scattering energy shift
    /// when the model carries a phase.
    pub hamiltonian: bool,
}

/// Time derivative produced by the grid generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorOutput {
    pub drho: DensityMatrixGrid,
    /// Share of the loss rate whose transfers leave the grid.
    pub leakage: f64,
    /// Set when `leakage` exceeds `LEAKAGE_WARNING`.
    pub leakage_warning: Option<f64>,
    /// Grid loss rates `Σ_Q M_in(P+Q; Q) h³` restricted to the grid.
    pub loss_rates: Vec<f64>,
}

/// Index offsets of grid transfers `Q` (excluding zero), each in `−(n−1)..=(n−1)`.
fn transfer_offsets(n: usize) -> Vec<[i64; 3]> {
    let r = n as i64 - 1;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                if (a, b, c) != (0, 0, 0) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

fn shifted(n: usize, coords: [usize; 3], off: [i64; 3], sign: i64) -> Option<usize> {
    let mut idx = 0usize;
    for d in 0..3 {
        let v = coords[d] as i64 + sign * off[d];
        if v < 0 || v >= n as i64 {
            return None;
        }
        idx = idx * n + v as usize;
    }
    Some(idx)
}

/// Apply the quantum linear Boltzmann generator on the grid. Gain transfers
/// are restricted to exact grid differences and the loss term uses the
/// grid-restricted loss rate, so the trace is conserved exactly.
pub fn apply_generator(rho: &DensityMatrixGrid, c: &Collision, opts: GeneratorOptions) -> Result<GeneratorOutput> {
    let n = rho.n;
    let d = rho.dim();
    let h = rho.spacing;
    let h3 = h * h * h;
    let offsets = transfer_offsets(n);
    let qvec = |o: [i64; 3]| [o[0] as f64 * h, o[1] as f64 * h, o[2] as f64 * h];
    let factorized = matches!(c.model, CrossSectionModel::Constant { .. } | CrossSectionModel::Born(_));

    // L[src][q] for factorized models.
    let mut l_table = Vec::new();
    if factorized {
        l_table = alloc::vec![0.0; d * offsets.len()];
        for src in 0..d {
            let p = rho.momentum(src);
            for (k, &o) in offsets.iter().enumerate() {
                l_table[src * offsets.len() + k] = c.gain_rate(p, qvec(o))?.sqrt();
            }
        }
    }

    let mut loss = alloc::vec![0.0; d];
    let mut leak = 0.0;
    let mut total_loss = 0.0;
    for src in 0..d {
        let p = rho.momentum(src);
        let coords = rho.coords(src);
        let mut inside = 0.0;
        for (k, &o) in offsets.iter().enumerate() {
            if shifted(n, coords, o, 1).is_some() {
                inside += if factorized {
                    let l = l_table[src * offsets.len() + k];
                    l * l
                } else {
                    c.gain_rate(p, qvec(o))?
                } * h3;
            }
        }
        loss[src] = inside;
        let weight = rho.get(src, src).re;
        if weight > 0.0 {
            let full = c.loss_rate(p)?;
            leak += weight * (full - inside).max(0.0);
            total_loss += weight * full;
        }
    }

    let mut out = DensityMatrixGrid::zeros(n, h)?;
    let hn = if opts.hamiltonian { energy_levels(rho, c)? } else { Vec::new() };
    for i in 0..d {
        let ci = rho.coords(i);
        for j in 0..d {
            let cj = rho.coords(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &o) in offsets.iter().enumerate() {
                let (si, sj) = match (shifted(n, ci, o, -1), shifted(n, cj, o, -1)) {
                    (Some(a), Some(b)) => (a, b),
                    _ => continue,
                };
                let r = rho.get(si, sj);
                if r == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let kernel = if factorized {
                    Complex64::new(l_table[si * offsets.len() + k] * l_table[sj * offsets.len() + k], 0.0)
                } else {
                    quantum_gain_kernel(c, rho.momentum(i), rho.momentum(j), qvec(o))?
                };
                acc += kernel * r * h3;
            }
            acc -= rho.get(i, j) * (0.5 * (loss[i] + loss[j]));
            if opts.hamiltonian {
                acc += -Complex64::i() / c.hbar * (hn[i] - hn[j]) * rho.get(i, j);
            }
            out.rho[i * d + j] = acc;
        }
    }
    let leakage = if total_loss > 0.0 { leak / total_loss } else { 0.0 };
    Ok(GeneratorOutput {
        drho: out,
        leakage,
        leakage_warning: (leakage > LEAKAGE_WARNING).then_some(leakage),
        loss_rates: loss,
    })
}

/// Kinetic energy plus the forward-scattering shift where defined.
fn energy_levels(rho: &DensityMatrixGrid, c: &Collision) -> Result<Vec<f64>> {
    let big_m = c.particle.mass;
    (0..rho.dim())
        .map(|i| {
            let p = rho.momentum(i);
            let kinetic = vec3::dot(p, p) / (2.0 * big_m);
            match energy_shift(c, p) {
                Ok(s) => Ok(kinetic + s),
                Err(Error::PhaseFree(_)) => Ok(kinetic),
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn forward_at(c: &Collision, prel: f64) -> Result<Complex64> {
    c.forward_amplitude(prel)
}

/// Thermal average `⟨f₀(P)⟩ = ∫d³p μ(p) f(rel, rel)` by quadrature in
/// spherical coordinates of the relative velocity about `P/M`.
pub fn thermal_forward_average(c: &Collision, big_p: Vec3) -> Result<Complex64> {
    forward_at(c, 0.0)?;
    let vb = c.gas.v_beta();
    let big_v = vec3::scale(big_p, 1.0 / c.particle.mass);
    let v = vec3::norm(big_v);
    let ms = c.m_star();
    let radial = quad::gauss_legendre(32);
    let polar = quad::gauss_legendre(32);
    let (w_lo, w_hi) = ((v - 11.0 * vb).max(0.0), v + 11.0 * vb);
    let (r_panels, c_panels) = (16, 16);
    let hr = (w_hi - w_lo) / r_panels as f64;
    let hc = 2.0 / c_panels as f64;
    let norm = 1.0 / (PI.powf(1.5) * vb * vb * vb);
    let mut total = Complex64::new(0.0, 0.0);
    for kr in 0..r_panels {
        let rmid = w_lo + hr * (kr as f64 + 0.5);
        for (&xr, &wr) in radial.nodes.iter().zip(&radial.weights) {
            let w = rmid + 0.5 * hr * xr;
            let f = forward_at(c, ms * w)?;
            let mut ang = 0.0;
            for kc in 0..c_panels {
                let cmid = -1.0 + hc * (kc as f64 + 0.5);
                for (&xc, &wc) in polar.nodes.iter().zip(&polar.weights) {
                    let ct = cmid + 0.5 * hc * xc;
                    ang += 0.5 * hc * wc * 2.0 * PI * (-(w * w + v * v + 2.0 * w * v * ct) / (vb * vb)).exp();
                }
            }
            total += f * (0.5 * hr * wr * w * w * ang * norm);
        }
    }
    Ok(total)
}

/// The same average through the relative-speed distribution,
/// `∫dw (w/V)(1/√π v_β)[e^{−(w−V)²/v_β²} − e^{−(w+V)²/v_β²}] f(m* w)`.
pub fn thermal_forward_average_1d(c: &Collision, big_p: Vec3) -> Result<Complex64> {
    forward_at(c, 0.0)?;
    let v = vec3::norm(big_p) / c.particle.mass;
    let ms = c.m_star();
    let vb = c.gas.v_beta();
    let mut err = None;
    let mut grab = |w: f64, part: fn(Complex64) -> f64| match forward_at(c, ms * w) {
        Ok(f) => part(f),
        Err(e) => {
            err = Some(e);
            0.0
        }
    };
    let re = scattering::relative_speed_average(v, vb, |w| grab(w, |f| f.re));
    let im = scattering::relative_speed_average(v, vb, |w| grab(w, |f| f.im));
    match err {
        Some(e) => Err(e),
        None => Ok(Complex64::new(re, im)),
    }
}

/// Forward amplitude averaged over the Maxwell speed distribution of the
/// gas, the `P → 0` limit of the thermal average.
pub fn speed_averaged_forward(c: &Collision) -> Result<Complex64> {
    let rule = quad::gauss_legendre(32);
    let vb = c.gas.v_beta();
    let ms = c.m_star();
    let panels = 16;
    let h = 11.0 / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let mid = h * (k as f64 + 0.5);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let s = mid + 0.5 * h * x;
            total += forward_at(c, ms * vb * s)? * (0.5 * h * w * s * s * (-s * s).exp());
        }
    }
    Ok(total * (4.0 / SQRT_PI))
}

/// Energy shift `H_n(P) = −2πħ²(n_gas/m*) Re⟨f₀(P)⟩`.
pub fn energy_shift(c: &Collision, big_p: Vec3) -> Result<f64> {
    let f = thermal_forward_average(c, big_p)?;
    Ok(-2.0 * PI * c.hbar * c.hbar * c.gas.n_gas / c.m_star() * f.re)
}

/// Complex index of refraction `1 + 2π(n_gas/K²)(M/m*)⟨f₀(ħK)⟩` for a beam
/// of wavenumber `k`.
pub fn refraction_index(c: &Collision, k: f64) -> Result<Complex64> {
    if !(k > 0.0) {
        return Err(invalid("K", "must be > 0"));
    }
    let f = thermal_forward_average(c, [0.0, 0.0, c.hbar * k])?;
    Ok(1.0 + f * (2.0 * PI * c.gas.n_gas / (k * k) * c.particle.mass / c.m_star()))
}

/// Attenuation part of the refraction index from the classical loss rate,
/// `M_out(ħK)/(2ħK²/M)`.
pub fn refraction_n2_from_loss(c: &Collision, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(invalid("K", "must be > 0"));
    }
    let rate = c.loss_rate([0.0, 0.0, c.hbar * k])?;
    Ok(rate * c.particle.mass / (2.0 * c.hbar * k * k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::Potential;

    fn swave(ratio: f64) -> Collision {
        Collision::internal(CrossSectionModel::SWave { length: 0.7 }, ratio).unwrap()
    }

    #[test]
    fn modulus_integrates_to_gain_rate() {
        let c = Collision::internal(CrossSectionModel::PowerLaw { c: 0.2, a: -0.4 }, 0.5).unwrap();
        let big_p = [0.5, -0.3, 1.0];
        let q = [0.4, 0.2, -0.6];
        let (_, qhat) = check_q(q).unwrap();
        let (e1, e2) = vec3::orthonormal_pair(qhat);
        let rule = quad::gauss_hermite(64);
        let mut acc = 0.0;
        for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
            for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
                let k = vec3::add(vec3::scale(e1, x), vec3::scale(e2, y));
                let g = lindblad_modulus_sq(&c, k, big_p, q).unwrap();
                acc += wx * wy * (x * x + y * y).exp() * g;
            }
        }
        let want = c.gain_rate(big_p, q).unwrap();
        assert!((acc - want).abs() < 1e-6 * want, "{acc} {want}");
    }

    #[test]
    fn phase_free_models_refuse_amplitudes() {
        let c = Collision::internal(CrossSectionModel::Constant { sigma_tot: 1.0 }, 1.0).unwrap();
        assert!(matches!(
            lindblad_value(&c, [0.1, 0.0, 0.0], [0.0; 3], [0.0, 0.0, 1.0]),
            Err(Error::PhaseFree(_))
        ));
        assert!(matches!(thermal_forward_average(&c, [0.0; 3]), Err(Error::PhaseFree(_))));
    }

    #[test]
    fn born_lindblad_ignores_perpendicular_momentum() {
        let c = Collision::internal(CrossSectionModel::Born(Potential::Gaussian { v0: -1.0, r0: 0.5 }), 0.3).unwrap();
        let q = [0.0, 0.0, 0.8];
        let a = lindblad_value(&c, [0.2, 0.1, 0.0], [0.0, 0.0, 0.4], q).unwrap();
        let b = lindblad_value(&c, [0.2, 0.1, 0.0], [1.5, -2.0, 0.4], q).unwrap();
        assert!((a - b).norm() < 1e-14 * a.norm());
        let lb = born_lindblad(&c, [0.0, 0.0, 0.4], q).unwrap();
        assert!((lb * lb - c.gain_rate([0.0, 0.0, 0.4], q).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn boost_identity() {
        let c = swave(0.5);
        let v = [0.3, -0.2, 0.5];
        let big_m = c.particle.mass;
        let q = [0.2, 0.5, -0.3];
        let (_, qhat) = check_q(q).unwrap();
        let p = vec3::split([0.4, 0.1, -0.7], qhat).1;
        let big_p = [0.6, 0.9, -0.1];
        let lhs = lindblad_value(&c, p, vec3::sub(big_p, vec3::scale(v, big_m)), q).unwrap();
        let shift = vec3::split(vec3::scale(v, c.gas.m), qhat).1;
        let rhs = lindblad_value_in_moving_gas(&c, vec3::add(p, shift), big_p, q, v).unwrap();
        assert!((lhs - rhs).norm() < 1e-13 * lhs.norm(), "{lhs} {rhs}");
    }

    #[test]
    fn kernel_diagonal_is_classical_rate() {
        let c = swave(0.8);
        let big_p = [0.7, -0.1, 0.3];
        let q = [0.3, 0.3, -0.2];
        let k = quantum_gain_kernel(&c, big_p, big_p, q).unwrap();
        let want = c.gain_rate(vec3::sub(big_p, q), q).unwrap();
        assert!(k.im.abs() < 1e-14 * want);
        assert!((k.re - want).abs() < 1e-8 * want);
    }

    #[test]
    fn constant_amplitude_has_constant_average() {
        let c = Collision::internal(CrossSectionModel::Born(Potential::Gaussian { v0: 0.4, r0: 1.0 }), 0.5).unwrap();
        let f0 = c.born_amplitude(0.0).unwrap();
        for p in [[0.0; 3], [3.0, 0.0, 0.0]] {
            let a = thermal_forward_average(&c, p).unwrap();
            assert!((a.re - f0).abs() < 1e-12 * f0.abs());
        }
    }

    #[test]
    fn three_and_one_dimensional_averages_agree() {
        let c = swave(0.5);
        for p in [[0.0, 0.0, 0.2], [0.0, 1.0, 1.5]] {
            let a = thermal_forward_average(&c, p).unwrap();
            let b = thermal_forward_average_1d(&c, p).unwrap();
            assert!((a - b).norm() < 1e-10 * a.norm(), "{a} {b}");
        }
    }

    #[test]
    fn slow_beam_limit_is_speed_average() {
        let c = swave(0.5);
        let a = thermal_forward_average(&c, [0.0; 3]).unwrap();
        let b = speed_averaged_forward(&c).unwrap();
        assert!((a - b).norm() < 1e-10 * a.norm(), "{a} {b}");
    }

    #[test]
    fn attractive_potential_lowers_energy() {
        let c = Collision::internal(CrossSectionModel::Born(Potential::Gaussian { v0: -0.5, r0: 1.0 }), 0.5).unwrap();
        assert!(c.born_amplitude(0.0).unwrap() > 0.0);
        assert!(energy_shift(&c, [0.5, 0.0, 0.0]).unwrap() < 0.0);
    }
}
