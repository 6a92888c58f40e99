//! Monte Carlo wave-function unravelling of the Born-approximation equation
//! for a constant cross-section, on finite superpositions of momentum
//! eigenstates.
//!
//! All momenta are scaled, `U = P/(M v_β)` and `K = Q/(m* v_β)`, and
//! times are measured in the same units as `1/gamma_beta`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::special::{self, erfc};
use crate::vec3::{self, Vec3};

const SQRT_PI: f64 = 1.772_453_850_905_516;
const STALL_LIMIT: u64 = 1_000_000;
const BISECTION_STEPS: usize = 60;

/// Reproducible random stream for trajectory `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Parameters of the scaled jump process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Engine {
    /// Thermal collision rate `Γ_β`.
    pub gamma_beta: f64,
    /// Mass ratio `m/M`.
    pub mass_ratio: f64,
    /// Phase rate per unit `U²`, i.e. `M v_β²/(2ħ)` in the chosen time unit.
    pub omega: f64,
}

impl Engine {
    /// Internal units with `Γ_β = 1`, so that `M v_β²/2ħ = M/2`.
    pub fn new(mass_ratio: f64) -> Result<Self> {
        Self::with_rate(mass_ratio, 1.0, 0.5 / mass_ratio)
    }

    pub fn with_rate(mass_ratio: f64, gamma_beta: f64, omega: f64) -> Result<Self> {
        if !(mass_ratio > 0.0) || !mass_ratio.is_finite() {
            return Err(invalid("mass_ratio", "must be finite and > 0"));
        }
        if !(gamma_beta >= 0.0) || !gamma_beta.is_finite() {
            return Err(invalid("gamma_beta", "must be finite and >= 0"));
        }
        if !omega.is_finite() {
            return Err(invalid("omega", "must be finite"));
        }
        Ok(Self {
            mass_ratio,
            gamma_beta,
            omega,
        })
    }

    /// Jump scale `m*/M = r/(1+r)`.
    pub fn kick_scale(&self) -> f64 {
        self.mass_ratio / (1.0 + self.mass_ratio)
    }

    /// Scaled loss rate `Γ̃(U) = Γ_β (2/√π) ₁F₁(−1/2, 3/2; −U²)`.
    pub fn loss_rate(&self, u: f64) -> f64 {
        loss_rate_scaled(u, self.gamma_beta)
    }

    /// Evolve amplitudes over `tau` without jumps, then renormalize.
    pub fn drift(&self, state: &mut SuperpositionState, tau: f64) {
        if tau == 0.0 {
            return;
        }
        let mut logs: Vec<f64> = Vec::with_capacity(state.len());
        for (c, u) in state.amps.iter().zip(&state.momenta) {
            let rate = self.loss_rate(vec3::norm(*u));
            logs.push(c.norm().ln() - 0.5 * rate * tau);
        }
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for ((c, u), l) in state.amps.iter_mut().zip(&state.momenta).zip(&logs) {
            let phase = Complex64::from_polar(1.0, c.arg() - self.omega * vec3::dot(*u, *u) * tau);
            *c = phase * (l - top).exp();
        }
        state.normalize();
        state.t += tau;
    }

    /// `1 − Σ |c_j|² e^{−Γ̃_j τ}`.
    pub fn waiting_cdf(&self, state: &SuperpositionState, tau: f64) -> f64 {
        let mut survive = 0.0;
        for (c, u) in state.amps.iter().zip(&state.momenta) {
            survive += c.norm_sqr() * (-self.loss_rate(vec3::norm(*u)) * tau).exp();
        }
        1.0 - survive
    }

    /// Draw a waiting time by inverting the waiting-time distribution with
    /// bracket doubling and bisection. Returns infinity without a gas.
    pub fn sample_waiting_time<R: Rng + ?Sized>(&self, state: &SuperpositionState, rng: &mut R) -> f64 {
        let eta: f64 = rng.random();
        self.invert_waiting_cdf(state, eta)
    }

    pub fn invert_waiting_cdf(&self, state: &SuperpositionState, eta: f64) -> f64 {
        let max_rate = state
            .momenta
            .iter()
            .map(|u| self.loss_rate(vec3::norm(*u)))
            .fold(0.0, f64::max);
        if !(max_rate > 0.0) {
            return f64::INFINITY;
        }
        let mut hi = 1.0 / max_rate;
        while self.waiting_cdf(state, hi) <= eta {
            hi *= 2.0;
            if !hi.is_finite() {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if self.waiting_cdf(state, mid) <= eta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Jump weights `λ_i ∝ |c_i|² Γ̃(U_i)` of the current amplitudes.
    pub fn jump_weights(&self, state: &SuperpositionState) -> Vec<f64> {
        let mut w: Vec<f64> = state
            .amps
            .iter()
            .zip(&state.momenta)
            .map(|(c, u)| c.norm_sqr() * self.loss_rate(vec3::norm(*u)))
            .collect();
        let total: f64 = w.iter().sum();
        for x in &mut w {
            *x /= total;
        }
        w
    }

    /// Draw the scaled momentum transfer of a jump from the current state.
    pub fn sample_jump<R: Rng + ?Sized>(&self, state: &SuperpositionState, rng: &mut R) -> Result<Vec3> {
        let weights = self.jump_weights(state);
        let pick: f64 = rng.random();
        let mut acc = 0.0;
        let mut idx = weights.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if pick < acc {
                idx = i;
                break;
            }
        }
        let u = state.momenta[idx];
        let un = vec3::norm(u);
        let (k, xi) = sample_k_xi(un, rng)?;
        let axis = if un > 0.0 { vec3::scale(u, 1.0 / un) } else { [0.0, 0.0, 1.0] };
        let (e1, e2) = vec3::orthonormal_pair(axis);
        let phi = 2.0 * PI * rng.random::<f64>();
        let perp = k * (1.0 - xi * xi).max(0.0).sqrt();
        Ok(vec3::add(
            vec3::scale(axis, k * xi),
            vec3::add(vec3::scale(e1, perp * phi.cos()), vec3::scale(e2, perp * phi.sin())),
        ))
    }

    /// Apply a jump with scaled transfer `k`: reweight amplitudes and shift
    /// all momenta by `(m*/M) K`.
    pub fn apply_jump(&self, state: &mut SuperpositionState, k: Vec3) {
        let kn = vec3::norm(k);
        let khat = if kn > 0.0 { vec3::scale(k, 1.0 / kn) } else { [0.0; 3] };
        let logs: Vec<f64> = state
            .momenta
            .iter()
            .map(|u| {
                let a = kn / 2.0 + vec3::dot(*u, khat);
                -0.5 * a * a
            })
            .collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (c, l) in state.amps.iter_mut().zip(&logs) {
            *c *= (l - top).exp();
        }
        state.normalize();
        let shift = vec3::scale(k, self.kick_scale());
        for u in &mut state.momenta {
            *u = vec3::add(*u, shift);
        }
    }

    /// Run one trajectory and record the state at each of the ascending
    /// `sample_times`.
    pub fn run_trajectory<R: Rng + ?Sized>(
        &self,
        initial: &SuperpositionState,
        sample_times: &[f64],
        rng: &mut R,
    ) -> Result<TrajectoryRecord> {
        let mut state = initial.clone();
        let mut snapshots = Vec::with_capacity(sample_times.len());
        let mut jumps = Vec::with_capacity(sample_times.len());
        let mut count = 0u64;
        let mut next = 0;
        let t_end = sample_times.last().copied().unwrap_or(state.t);
        while next < sample_times.len() {
            let tau = self.sample_waiting_time(&state, rng);
            let t_jump = state.t + tau;
            while next < sample_times.len() && sample_times[next] <= t_jump {
                let mut snap = state.clone();
                self.drift(&mut snap, sample_times[next] - state.t);
                snapshots.push(snap);
                jumps.push(count);
                next += 1;
            }
            if t_jump > t_end {
                break;
            }
            self.drift(&mut state, tau);
            let k = self.sample_jump(&state, rng)?;
            self.apply_jump(&mut state, k);
            count += 1;
        }
        Ok(TrajectoryRecord { snapshots, jumps })
    }

    /// Sequential ensemble over trajectory indices `0..n_traj`, each with its
    /// own stream derived from `seed`.
    pub fn run_ensemble(
        &self,
        initial: &SuperpositionState,
        n_traj: u64,
        sample_times: &[f64],
        seed: u64,
    ) -> Result<Vec<TrajectoryRecord>> {
        (0..n_traj)
            .map(|i| self.run_trajectory(initial, sample_times, &mut stream(seed, i)))
            .collect()
    }
}

/// Snapshots of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub snapshots: Vec<SuperpositionState>,
    /// Cumulative jump count at each snapshot.
    pub jumps: Vec<u64>,
}

/// Normalized superposition of momentum eigenstates `Σ c_j |U_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionState {
    pub amps: Vec<Complex64>,
    pub momenta: Vec<Vec3>,
    pub t: f64,
}

impl SuperpositionState {
    pub fn new(amps: Vec<Complex64>, momenta: Vec<Vec3>) -> Result<Self> {
        if amps.is_empty() || amps.len() != momenta.len() {
            return Err(invalid("state", "need matching, non-empty amplitude and momentum lists"));
        }
        if amps.iter().all(|c| c.norm_sqr() == 0.0) {
            return Err(invalid("state", "amplitudes vanish"));
        }
        let mut s = Self { amps, momenta, t: 0.0 };
        s.normalize();
        Ok(s)
    }

    /// A single momentum eigenstate.
    pub fn eigenstate(u: Vec3) -> Self {
        Self {
            amps: alloc::vec![Complex64::new(1.0, 0.0)],
            momenta: alloc::vec![u],
            t: 0.0,
        }
    }

    /// Equal-weight superposition of `u1` and `u2`.
    pub fn pair(u1: Vec3, u2: Vec3) -> Self {
        let a = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            amps: alloc::vec![a, a],
            momenta: alloc::vec![u1, u2],
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        for c in &mut self.amps {
            *c /= n;
        }
    }

    /// `⟨U⟩ = Σ |c_j|² U_j`.
    pub fn mean_u(&self) -> Vec3 {
        let mut m = [0.0; 3];
        for (c, u) in self.amps.iter().zip(&self.momenta) {
            m = vec3::add(m, vec3::scale(*u, c.norm_sqr()));
        }
        m
    }

    /// `⟨U²⟩ = Σ |c_j|² U_j²`.
    pub fn mean_u_sq(&self) -> f64 {
        self.amps
            .iter()
            .zip(&self.momenta)
            .map(|(c, u)| c.norm_sqr() * vec3::dot(*u, *u))
            .sum()
    }
}

/// `Γ̃(U) = Γ_β (2/√π) ₁F₁(−1/2, 3/2; −U²)`.
pub fn loss_rate_scaled(u: f64, gamma_beta: f64) -> f64 {
    gamma_beta * 2.0 / SQRT_PI * special::f_m12_32(u)
}

/// Scaled jump density `P(K, ξ) = Γ_β/(2√π Γ̃(U)) K exp[−(K/2 + Uξ)²]`.
pub fn jump_density(k: f64, xi: f64, u: f64) -> f64 {
    if k < 0.0 || xi.abs() > 1.0 {
        return 0.0;
    }
    let a = k / 2.0 + u * xi;
    k * (-a * a).exp() / (2.0 * SQRT_PI * loss_rate_scaled(u, 1.0))
}

/// `∫₀^∞ K e^{−(K/2+s)²} dK = 2e^{−s²} − 2√π s erfc(s)`.
pub fn xi_marginal(s: f64) -> f64 {
    2.0 * (-s * s).exp() - 2.0 * SQRT_PI * s * erfc(s)
}

/// Exact draw of `(K, ξ)` from the scaled jump density at speed `u`.
pub fn sample_k_xi<R: Rng + ?Sized>(u: f64, rng: &mut R) -> Result<(f64, f64)> {
    let mut proposals = 0u64;
    let g_max = xi_marginal(-u);
    let xi = loop {
        proposals += 1;
        if proposals > STALL_LIMIT {
            return Err(Error::SamplerStall(proposals));
        }
        let xi = 2.0 * rng.random::<f64>() - 1.0;
        if rng.random::<f64>() * g_max < xi_marginal(u * xi) {
            break xi;
        }
    };
    let k = sample_k_given(u * xi, rng, &mut proposals)?;
    Ok((k, xi))
}

fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::Open01)
}

/// Draw `K` from the density proportional to `K exp[−(K/2 + s)²]`.
fn sample_k_given<R: Rng + ?Sized>(s: f64, rng: &mut R, proposals: &mut u64) -> Result<f64> {
    loop {
        *proposals += 1;
        if *proposals > STALL_LIMIT {
            return Err(Error::SamplerStall(*proposals));
        }
        if s >= 1.0 {
            let k = -(open01(rng).ln() + open01(rng).ln()) / s;
            if rng.random::<f64>() < (-k * k / 4.0).exp() {
                return Ok(k);
            }
        } else if s >= 0.0 {
            let k = 2.0 * (-open01(rng).ln()).sqrt();
            if rng.random::<f64>() < (-s * k).exp() {
                return Ok(k);
            }
        } else {
            let t = -s;
            let tail = 1.0 - (-t * t).exp();
            let weight_a = t * SQRT_PI / 2.0 * erfc(-t);
            let weight_b = 0.5 + 0.5 * tail;
            let w = if rng.random::<f64>() * (weight_a + weight_b) < weight_a {
                loop {
                    let z: f64 = StandardNormal.sample(rng);
                    let w = z * core::f64::consts::FRAC_1_SQRT_2;
                    if w > -t {
                        break w;
                    }
                }
            } else if rng.random::<f64>() * weight_b < 0.5 {
                (-open01(rng).ln()).sqrt()
            } else {
                -(-(1.0 - rng.random::<f64>() * tail).ln()).sqrt()
            };
            if rng.random::<f64>() * (w.abs() + t) < w + t {
                return Ok(2.0 * (w + t));
            }
        }
    }
}
