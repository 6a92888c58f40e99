//! Classical linear Boltzmann equation: detailed balance, stationarity of
//! the thermal distribution and the H-theorem on binned ensembles.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::quad;
use crate::scattering::{Collision, Statistics};
use crate::special::erf;
use crate::vec3::{self, Vec3};

/// Minimum bin count entering the relative entropy.
pub const MIN_BIN_COUNT: f64 = 5.0;

/// Energy transferred to the test particle by a kick `Q` from `P`.
pub fn energy_transfer(c: &Collision, big_p: Vec3, q: Vec3) -> f64 {
    (vec3::dot(q, q) / 2.0 + vec3::dot(q, big_p)) / c.particle.mass
}

/// Thermal momentum density of the test particle,
/// `(β/2πM)^{3/2} exp(−βP²/2M)`.
pub fn nu_eq(c: &Collision, big_p: Vec3) -> f64 {
    let (beta, big_m) = (c.gas.beta, c.particle.mass);
    (beta / (2.0 * PI * big_m)).powf(1.5) * (-beta * vec3::dot(big_p, big_p) / (2.0 * big_m)).exp()
}

fn require_mb(c: &Collision) -> Result<()> {
    if matches!(c.gas.statistics, Statistics::MaxwellBoltzmann) {
        Ok(())
    } else {
        Err(Error::Domain(alloc::string::String::from(
            "the classical equation needs a Maxwell-Boltzmann gas",
        )))
    }
}

/// `|M_in(P+Q; Q) − M_in(P; −Q) e^{−βE(Q,P)}|` relative to the larger term.
pub fn detailed_balance_residual(c: &Collision, big_p: Vec3, q: Vec3) -> Result<f64> {
    require_mb(c)?;
    let fwd = c.gain_rate(big_p, q)?;
    let back = c.gain_rate(vec3::add(big_p, q), vec3::scale(q, -1.0))? * (-c.gas.beta * energy_transfer(c, big_p, q)).exp();
    let scale = fwd.abs().max(back.abs());
    Ok(if scale == 0.0 { 0.0 } else { (fwd - back).abs() / scale })
}

/// `W(P, P′) = M(P′ → P) e^{βP²/2M}`, symmetric under detailed balance.
pub fn symmetric_rate(c: &Collision, big_p: Vec3, big_pp: Vec3) -> Result<f64> {
    let rate = c.gain_rate_quadrature(big_pp, vec3::sub(big_p, big_pp))?;
    Ok(rate * (c.gas.beta * vec3::dot(big_p, big_p) / (2.0 * c.particle.mass)).exp())
}

/// Spherical quadrature of `∫d³Q [rate(P−Q, Q) ν(P−Q) − rate(P, Q) ν(P)]`,
/// the collision term at `P`. Returns `(value, loss scale)`.
pub fn collision_term<R, D>(c: &Collision, big_p: Vec3, mut rate: R, density: D) -> Result<(f64, f64)>
where
    R: FnMut(Vec3, Vec3) -> Result<f64>,
    D: Fn(Vec3) -> f64,
{
    let p = vec3::norm(big_p);
    let axis = if p > 0.0 { vec3::scale(big_p, 1.0 / p) } else { [0.0, 0.0, 1.0] };
    let (e1, e2) = vec3::orthonormal_pair(axis);
    let (m, big_m, ms) = (c.gas.m, c.particle.mass, c.m_star());
    let thermal = (2.0 * big_m / c.gas.beta).sqrt();
    let reach = 2.0 * ms / m * (m / big_m * p + 9.0 * c.gas.p_beta());
    let q_max = reach.max(p + 9.0 * thermal);
    let radial = quad::gauss_legendre(32);
    let polar = quad::gauss_legendre(64);
    let azim = 4;
    let panels = 48;
    let h = q_max / panels as f64;
    let nu_p = density(big_p);
    let (mut net, mut loss) = (0.0, 0.0);
    for k in 0..panels {
        let mid = h * (k as f64 + 0.5);
        for (&xr, &wr) in radial.nodes.iter().zip(&radial.weights) {
            let qn = mid + 0.5 * h * xr;
            for (&ct, &wt) in polar.nodes.iter().zip(&polar.weights) {
                let st = (1.0 - ct * ct).max(0.0).sqrt();
                for j in 0..azim {
                    let phi = 2.0 * PI * (j as f64 + 0.5) / azim as f64;
                    let dir = vec3::add(
                        vec3::scale(axis, ct),
                        vec3::add(vec3::scale(e1, st * phi.cos()), vec3::scale(e2, st * phi.sin())),
                    );
                    let q = vec3::scale(dir, qn);
                    let from = vec3::sub(big_p, q);
                    let w = 0.5 * h * wr * wt * qn * qn;
                    let out = rate(big_p, q)? * nu_p;
                    net += w * (rate(from, q)? * density(from) - out);
                    loss += w * out;
                }
            }
        }
    }
    let norm = 2.0 * PI / azim as f64;
    Ok((net * norm, loss * norm))
}

/// Largest relative collision term `|∂_t ν(P)|/(M_out(P) ν(P))` over `grid`
/// for a candidate stationary density.
pub fn stationary_residual_of<D: Fn(Vec3) -> f64 + Copy>(c: &Collision, grid: &[Vec3], density: D) -> Result<f64> {
    require_mb(c)?;
    let mut worst = 0.0f64;
    for &big_p in grid {
        let (net, loss) = collision_term(c, big_p, |p, q| c.gain_rate(p, q), density)?;
        worst = worst.max(net.abs() / loss);
    }
    Ok(worst)
}

/// Stationarity residual of the thermal density `ν_EQ`.
pub fn stationary_residual(c: &Collision, grid: &[Vec3]) -> Result<f64> {
    stationary_residual_of(c, grid, |p| nu_eq(c, p))
}

/// Weighted histogram on cubic bins in scaled momentum `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumHistogram {
    pub lo: f64,
    pub width: f64,
    pub bins_per_axis: usize,
    pub counts: Vec<f64>,
    pub total: f64,
    touched: Vec<usize>,
}

impl MomentumHistogram {
    /// Bins of side `width` covering `[lo, −lo]³`.
    pub fn new(lo: f64, width: f64) -> Result<Self> {
        if !(lo < 0.0) || !(width > 0.0) {
            return Err(invalid("histogram", "needs lo < 0 and width > 0"));
        }
        let n = (-2.0 * lo / width).round() as usize;
        Ok(Self {
            lo,
            width,
            bins_per_axis: n,
            counts: alloc::vec![0.0; n * n * n],
            total: 0.0,
            touched: Vec::new(),
        })
    }

    /// Default binning: width 0.25 on `[−6, 6]³`.
    pub fn standard() -> Self {
        Self::new(-6.0, 0.25).expect("valid default binning")
    }

    fn index(&self, u: Vec3) -> Option<usize> {
        let n = self.bins_per_axis;
        let mut idx = 0;
        for x in u {
            let k = ((x - self.lo) / self.width).floor();
            if !(k >= 0.0 && k < n as f64) {
                return None;
            }
            idx = idx * n + k as usize;
        }
        Some(idx)
    }

    /// Add a sample; out-of-range samples only count towards the total.
    pub fn add(&mut self, u: Vec3, weight: f64) {
        self.total += weight;
        if let Some(i) = self.index(u) {
            if self.counts[i] == 0.0 {
                self.touched.push(i);
            }
            self.counts[i] += weight;
        }
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.bins_per_axis != other.bins_per_axis || self.lo != other.lo || self.width != other.width {
            return Err(invalid("histogram", "binnings differ"));
        }
        for &i in &other.touched {
            if self.counts[i] == 0.0 {
                self.touched.push(i);
            }
            self.counts[i] += other.counts[i];
        }
        self.total += other.total;
        Ok(())
    }

    pub fn clear(&mut self) {
        for &i in &self.touched {
            self.counts[i] = 0.0;
        }
        self.touched.clear();
        self.total = 0.0;
    }

    pub fn bin_volume(&self) -> f64 {
        self.width.powi(3)
    }

    /// Density estimate in bin `i`.
    pub fn density(&self, i: usize) -> f64 {
        self.counts[i] / (self.total * self.bin_volume())
    }

    fn bin_lower(&self, i: usize) -> Vec3 {
        let n = self.bins_per_axis;
        let (a, b, c) = (i / (n * n), (i / n) % n, i % n);
        [
            self.lo + a as f64 * self.width,
            self.lo + b as f64 * self.width,
            self.lo + c as f64 * self.width,
        ]
    }

    /// Relative entropy `Σ f_i ln(f_i/g_i)` of the binned distribution against
    /// the bin probabilities `g_i` of the isotropic Gaussian
    /// `∝ exp(−U²/s²)`, over bins holding at least `MIN_BIN_COUNT` counts.
    /// Returns infinity if an occupied bin has `g_i = 0`.
    pub fn relative_entropy_gaussian(&self, s: f64) -> f64 {
        let mut h = 0.0;
        for &i in &self.touched {
            let n = self.counts[i];
            if n < MIN_BIN_COUNT {
                continue;
            }
            let lower = self.bin_lower(i);
            let mut g = 1.0;
            for x in lower {
                g *= 0.5 * (erf((x + self.width) / s) - erf(x / s));
            }
            let f = n / self.total;
            if g <= 0.0 {
                return f64::INFINITY;
            }
            h += f * (f / g).ln();
        }
        h
    }
}

/// Relative entropy `Σ fᵢ ln(fᵢ/gᵢ)` of two probability vectors. Terms with
/// `fᵢ = 0` contribute nothing; `fᵢ > 0` with `gᵢ = 0` gives infinity.
pub fn relative_entropy(f: &[f64], g: &[f64]) -> Result<f64> {
    if f.len() != g.len() {
        return Err(invalid("g", "must have the same length as f"));
    }
    let mut h = 0.0;
    for (&fi, &gi) in f.iter().zip(g) {
        if !(fi >= 0.0) || !(gi >= 0.0) {
            return Err(invalid("f, g", "entries must be >= 0"));
        }
        if fi == 0.0 {
            continue;
        }
        if gi == 0.0 {
            return Ok(f64::INFINITY);
        }
        h += fi * (fi / gi).ln();
    }
    Ok(h)
}

/// Width `s` of the thermal Gaussian `exp(−U²/s²)` in scaled momentum,
/// `s² = m/M`.
pub fn thermal_width(mass_ratio: f64) -> f64 {
    mass_ratio.sqrt()
}

/// Relative entropy series with bootstrap errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySeries {
    pub h: Vec<f64>,
    pub se: Vec<f64>,
    /// Bootstrap standard error of `h[k+1] − h[k]`.
    pub step_se: Vec<f64>,
}

impl EntropySeries {
    /// Indices `k` where `h[k+1] − h[k]` exceeds `k_sigma` step errors.
    pub fn increases(&self, k_sigma: f64) -> Vec<usize> {
        (0..self.step_se.len())
            .filter(|&k| self.h[k + 1] - self.h[k] > k_sigma * self.step_se[k])
            .collect()
    }
}

/// Binned relative entropy against the thermal distribution for each time,
/// `samples[k][j]` being trajectory `j` at time `k`. Standard errors come from
/// `n_boot` paired resamples of trajectories.
pub fn entropy_series<R: Rng + ?Sized>(
    samples: &[Vec<Vec3>],
    mass_ratio: f64,
    n_boot: usize,
    rng: &mut R,
) -> Result<EntropySeries> {
    if samples.is_empty() {
        return Err(invalid("samples", "need at least one time"));
    }
    let n = samples[0].len();
    if n == 0 || samples.iter().any(|s| s.len() != n) {
        return Err(invalid("samples", "every time needs the same non-zero trajectory count"));
    }
    let s = thermal_width(mass_ratio);
    let mut hist = MomentumHistogram::standard();
    let mut h = Vec::with_capacity(samples.len());
    for snap in samples {
        hist.clear();
        for &u in snap {
            hist.add(u, 1.0);
        }
        h.push(hist.relative_entropy_gaussian(s));
    }
    let mut boot = alloc::vec![Vec::with_capacity(n_boot); samples.len()];
    let mut idx = alloc::vec![0usize; n];
    for _ in 0..n_boot {
        for i in idx.iter_mut() {
            *i = rng.random_range(0..n);
        }
        for (k, snap) in samples.iter().enumerate() {
            hist.clear();
            for &i in &idx {
                hist.add(snap[i], 1.0);
            }
            boot[k].push(hist.relative_entropy_gaussian(s));
        }
    }
    let sd = |v: &[f64]| {
        let nb = v.len() as f64;
        if v.len() < 2 {
            return 0.0;
        }
        let mean = v.iter().sum::<f64>() / nb;
        (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nb - 1.0)).sqrt()
    };
    let se = boot.iter().map(|b| sd(b)).collect();
    let step_se = (0..samples.len() - 1)
        .map(|k| {
            let d: Vec<f64> = boot[k + 1].iter().zip(&boot[k]).map(|(a, b)| a - b).collect();
            sd(&d)
        })
        .collect();
    Ok(EntropySeries { h, se, step_se })
}
