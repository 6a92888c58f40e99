//! Ensemble estimators, analytic relaxation and decoherence predictions, and
//! the exponential fit used to compare them.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::quad;
use crate::scattering::{Collision, CrossSectionModel};
use crate::special::{self, erf_over_x};
use crate::trajectory::{loss_rate_scaled, TrajectoryRecord};
use crate::vec3::{self, Vec3};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Per-time ensemble estimates with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSeries {
    pub times: Vec<f64>,
    pub n_traj: usize,
    /// `⟨U⟩` per time.
    pub mean_u: Vec<Vec3>,
    pub mean_u_se: Vec<Vec3>,
    /// `|⟨U⟩|²` per time, jackknife standard error.
    pub mean_u_squared: Vec<f64>,
    pub mean_u_squared_se: Vec<f64>,
    /// `⟨U²⟩` per time.
    pub mean_u_sq: Vec<f64>,
    pub mean_u_sq_se: Vec<f64>,
    /// Coherence `C(t)`, present for two-component ensembles.
    pub coherence: Option<Vec<f64>>,
    pub coherence_se: Option<Vec<f64>>,
    /// Mean cumulative jump count per time.
    pub mean_jumps: Vec<f64>,
}

impl EnsembleSeries {
    /// Reduce trajectory records, in index order, to ensemble estimates.
    pub fn from_records(times: &[f64], records: &[TrajectoryRecord]) -> Result<Self> {
        let n = records.len();
        if n == 0 {
            return Err(invalid("n_traj", "need at least one trajectory"));
        }
        for r in records {
            if r.snapshots.len() != times.len() {
                return Err(invalid("records", "snapshot count differs from sample times"));
            }
        }
        let two = records[0].snapshots.first().map(|s| s.len() == 2).unwrap_or(false);
        let c0 = if two { Some(pair_modulus(&records[0].snapshots[0])) } else { None };
        let mut s = Self {
            times: times.to_vec(),
            n_traj: n,
            mean_u: Vec::with_capacity(times.len()),
            mean_u_se: Vec::with_capacity(times.len()),
            mean_u_squared: Vec::with_capacity(times.len()),
            mean_u_squared_se: Vec::with_capacity(times.len()),
            mean_u_sq: Vec::with_capacity(times.len()),
            mean_u_sq_se: Vec::with_capacity(times.len()),
            coherence: two.then(Vec::new),
            coherence_se: two.then(Vec::new),
            mean_jumps: Vec::with_capacity(times.len()),
        };
        let mut us: Vec<Vec3> = Vec::with_capacity(n);
        let mut u2: Vec<f64> = Vec::with_capacity(n);
        let mut coh: Vec<f64> = Vec::with_capacity(n);
        for k in 0..times.len() {
            us.clear();
            u2.clear();
            coh.clear();
            let mut jumps = 0.0;
            for r in records {
                let snap = &r.snapshots[k];
                us.push(snap.mean_u());
                u2.push(snap.mean_u_sq());
                jumps += r.jumps[k] as f64;
                if let Some(c0) = c0 {
                    coh.push(pair_modulus(snap) / c0);
                }
            }
            let mut m = [0.0; 3];
            let mut se = [0.0; 3];
            for d in 0..3 {
                let col: Vec<f64> = us.iter().map(|u| u[d]).collect();
                let (mu, sd) = mean_se(&col);
                m[d] = mu;
                se[d] = sd;
            }
            s.mean_u.push(m);
            s.mean_u_se.push(se);
            let (sq, sq_se) = jackknife_squared_mean(&us);
            s.mean_u_squared.push(sq);
            s.mean_u_squared_se.push(sq_se);
            let (mu2, se2) = mean_se(&u2);
            s.mean_u_sq.push(mu2);
            s.mean_u_sq_se.push(se2);
            s.mean_jumps.push(jumps / n as f64);
            if let (Some(c), Some(cs)) = (s.coherence.as_mut(), s.coherence_se.as_mut()) {
                let (mc, sc) = mean_se(&coh);
                c.push(mc);
                cs.push(sc);
            }
        }
        Ok(s)
    }
}

fn pair_modulus(s: &crate::trajectory::SuperpositionState) -> f64 {
    (s.amps[0] * s.amps[1].conj()).norm()
}

/// Sample mean and its standard error.
pub fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `|mean(U)|²` with its leave-one-out jackknife standard error.
pub fn jackknife_squared_mean(us: &[Vec3]) -> (f64, f64) {
    let n = us.len();
    let total = us.iter().fold([0.0; 3], |a, u| vec3::add(a, *u));
    let mean = vec3::scale(total, 1.0 / n as f64);
    let full = vec3::dot(mean, mean);
    if n < 2 {
        return (full, 0.0);
    }
    let nf = n as f64;
    let loo: Vec<f64> = us
        .iter()
        .map(|u| {
            let m = vec3::scale(vec3::sub(total, *u), 1.0 / (nf - 1.0));
            vec3::dot(m, m)
        })
        .collect();
    let bar = loo.iter().sum::<f64>() / nf;
    let var = (nf - 1.0) / nf * loo.iter().map(|v| (v - bar) * (v - bar)).sum::<f64>();
    (full, var.sqrt())
}

/// Generic delete-one jackknife standard error of `stat` over `n` samples.
pub fn jackknife<F: FnMut(usize) -> f64>(n: usize, mut stat_without: F) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let loo: Vec<f64> = (0..n).map(&mut stat_without).collect();
    let bar = loo.iter().sum::<f64>() / nf;
    ((nf - 1.0) / nf * loo.iter().map(|v| (v - bar) * (v - bar)).sum::<f64>()).sqrt()
}

fn constant_rate(c: &Collision) -> Result<f64> {
    match c.model {
        CrossSectionModel::Constant { .. } => c.thermal_rate(),
        _ => Err(Error::Domain(alloc::string::String::from(
            "analytic drifts need a constant cross-section",
        ))),
    }
}

/// Friction rate `η = (8/3√π)(m/M)Γ_β` of a constant cross-section.
pub fn eta_constant(mass_ratio: f64, gamma_beta: f64) -> f64 {
    8.0 / (3.0 * SQRT_PI) * mass_ratio * gamma_beta
}

/// Instantaneous `d⟨P⟩/dt` for a momentum eigenstate `P`.
pub fn momentum_drift_analytic(c: &Collision, big_p: Vec3) -> Result<Vec3> {
    let gb = constant_rate(c)?;
    let big_m = c.particle.mass;
    let u = vec3::norm(big_p) / (big_m * c.gas.v_beta());
    let k = -8.0 / (3.0 * SQRT_PI) * c.m_star() / big_m * gb * special::f_m12_52(u);
    Ok(vec3::scale(big_p, k))
}

/// Instantaneous `d⟨E⟩/dt` for a momentum eigenstate of kinetic energy `e`.
pub fn energy_drift_analytic(c: &Collision, e: f64) -> Result<f64> {
    if !(e >= 0.0) {
        return Err(invalid("E", "must be >= 0"));
    }
    let gb = constant_rate(c)?;
    let (m, big_m, beta) = (c.gas.m, c.particle.mass, c.gas.beta);
    let ms = c.m_star();
    let u = (beta * e * m / big_m).sqrt();
    Ok(-16.0 / (3.0 * SQRT_PI) * ms / big_m
        * gb
        * (special::f_m12_52(u) * e - 1.5 / beta * ms / m * special::f_m32_32(u)))
}

/// `d⟨g⟩/dt = ∫ d³Q M_in(P+Q; Q)[g(P+Q) − g(P)]` for an eigenstate `P`, by
/// spherical quadrature over the transfer.
pub fn moment_drift_quadrature<G: FnMut(Vec3) -> f64>(c: &Collision, big_p: Vec3, mut g: G) -> Result<f64> {
    let p = vec3::norm(big_p);
    let axis = if p > 0.0 { vec3::scale(big_p, 1.0 / p) } else { [0.0, 0.0, 1.0] };
    let (e1, e2) = vec3::orthonormal_pair(axis);
    let (m, big_m, ms) = (c.gas.m, c.particle.mass, c.m_star());
    let q_max = 2.0 * ms / m * (m / big_m * p + 9.0 * c.gas.p_beta());
    let radial = quad::gauss_legendre(32);
    let polar = quad::gauss_legendre(48);
    let azim = 8;
    let g0 = g(big_p);
    let panels = 24;
    let h = q_max / panels as f64;
    let mut total = 0.0;
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
                    let rate = c.gain_rate(big_p, q)?;
                    total += 0.5 * h * wr * wt * qn * qn * rate * (g(vec3::add(big_p, q)) - g0);
                }
            }
        }
    }
    Ok(total * 2.0 * PI / azim as f64)
}

/// Predicted moments in the diffusive regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusiveMoments {
    pub mean_u_squared: f64,
    pub mean_u_sq: f64,
}

/// `⟨U⟩²_t = ⟨U⟩²₀e^{−2ηt}` and `⟨U²⟩_t = ⟨U²⟩_eq + (⟨U²⟩₀ − ⟨U²⟩_eq)e^{−2ηt}`
/// with `⟨U²⟩_eq = 3m/2M`.
pub fn diffusive_solutions(
    mean_u_squared_0: f64,
    mean_u_sq_0: f64,
    eta: f64,
    mass_ratio: f64,
    t: f64,
) -> DiffusiveMoments {
    let eq = equilibrium_u_sq(mass_ratio);
    let d = (-2.0 * eta * t).exp();
    DiffusiveMoments {
        mean_u_squared: mean_u_squared_0 * d,
        mean_u_sq: eq + (mean_u_sq_0 - eq) * d,
    }
}

/// `⟨U²⟩_eq = 3m/2M`.
pub fn equilibrium_u_sq(mass_ratio: f64) -> f64 {
    1.5 * mass_ratio
}

/// Predicted decay rate `Λ(U₀) = Γ̃(U₀) − Γ_β erf(U₀)/U₀` of the coherence
/// between `±U₀`.
pub fn decoherence_rate_prediction(u0: f64, gamma_beta: f64) -> f64 {
    loss_rate_scaled(u0, gamma_beta) - gamma_beta * erf_over_x(u0)
}

/// Result of a log-linear fit `y ≈ A e^{−rate·t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub rate: f64,
    pub intercept: f64,
    /// Covariance of `(rate, ln A)`.
    pub cov: [[f64; 2]; 2],
    pub chi2_per_dof: f64,
    pub n_used: usize,
    pub n_excluded: usize,
    /// Index range `[start, end)` of the fitted points.
    pub window: (usize, usize),
}

impl ExpFit {
    pub fn rate_se(&self) -> f64 {
        self.cov[0][0].sqrt()
    }
}

/// Leading run of points with `y > k·se`, counted from the first index.
pub fn leading_window(y: &[f64], se: &[f64], k: f64) -> (usize, usize) {
    let end = y
        .iter()
        .zip(se)
        .position(|(v, s)| !(*v > k * s && *v > 0.0))
        .unwrap_or(y.len());
    (0, end)
}

/// Weighted least squares on `ln y` over the whole series. Standard errors
/// weight points by `(y/se)²`; non-positive values are excluded.
pub fn fit_exponential(t: &[f64], y: &[f64], se: &[f64]) -> Result<ExpFit> {
    fit_exponential_window(t, y, se, (0, t.len()))
}

/// Fit over the window where `y` stays above 20 standard errors.
pub fn fit_exponential_auto(t: &[f64], y: &[f64], se: &[f64]) -> Result<ExpFit> {
    let w = leading_window(y, se, 20.0);
    fit_exponential_window(t, y, se, w)
}

pub fn fit_exponential_window(t: &[f64], y: &[f64], se: &[f64], window: (usize, usize)) -> Result<ExpFit> {
    if t.len() != y.len() || t.len() != se.len() {
        return Err(invalid("series", "columns differ in length"));
    }
    let (start, end) = window;
    let end = end.min(t.len());
    let mut pts = Vec::new();
    let mut excluded = 0;
    for i in start..end {
        if y[i] > 0.0 && y[i].is_finite() {
            pts.push((t[i], y[i].ln(), se[i] / y[i]));
        } else {
            excluded += 1;
        }
    }
    if pts.len() < 4 {
        return Err(Error::TooFewPoints(pts.len()));
    }
    let min_rel = pts
        .iter()
        .map(|p| p.2)
        .filter(|s| *s > 0.0 && s.is_finite())
        .fold(f64::INFINITY, f64::min);
    let weighted = min_rel.is_finite();
    let w: Vec<f64> = pts
        .iter()
        .map(|p| {
            if !weighted {
                1.0
            } else if p.2 > 0.0 {
                1.0 / (p.2 * p.2)
            } else {
                1.0 / (min_rel * min_rel)
            }
        })
        .collect();
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, wi) in pts.iter().zip(&w) {
        s += wi;
        sx += wi * p.0;
        sy += wi * p.1;
        sxx += wi * p.0 * p.0;
        sxy += wi * p.0 * p.1;
    }
    let det = s * sxx - sx * sx;
    if !(det > 0.0) {
        return Err(Error::TooFewPoints(pts.len()));
    }
    let slope = (s * sxy - sx * sy) / det;
    let icpt = (sxx * sy - sx * sxy) / det;
    let chi2: f64 = pts
        .iter()
        .zip(&w)
        .map(|(p, wi)| {
            let r = p.1 - (icpt + slope * p.0);
            wi * r * r
        })
        .sum();
    let dof = (pts.len() - 2) as f64;
    let scale = if weighted { 1.0 } else { chi2 / dof };
    let var_slope = s / det * scale;
    let var_icpt = sxx / det * scale;
    let cov_si = -sx / det * scale;
    Ok(ExpFit {
        rate: -slope,
        intercept: icpt,
        cov: [[var_slope, cov_si], [cov_si, var_icpt]],
        chi2_per_dof: chi2 / dof,
        n_used: pts.len(),
        n_excluded: excluded,
        window: (start, end),
    })
}
