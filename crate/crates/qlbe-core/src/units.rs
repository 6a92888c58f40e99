//! Unit conventions and SI conversion.

#[allow(unused_imports)]
use num_traits::Float;

/// Reduced Planck constant in J s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Boltzmann constant in J/K.
pub const KB_SI: f64 = 1.380_649e-23;
/// Atomic mass unit in kg.
pub const AMU_SI: f64 = 1.660_539_066_60e-27;

/// Marker for the internal dimensionless system: `m = 1`, `v_β = 1`,
/// `β = 2`, `p_β = 1`, `ħ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UnitSystem;

impl UnitSystem {
    pub const M_GAS: f64 = 1.0;
    pub const V_BETA: f64 = 1.0;
    pub const BETA: f64 = 2.0;
    pub const P_BETA: f64 = 1.0;
    pub const HBAR: f64 = 1.0;
}

/// Scales that map SI quantities onto the internal system for a gas of
/// particle mass `m` (kg) at temperature `t` (K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiScales {
    pub mass: f64,
    pub velocity: f64,
    pub momentum: f64,
    pub energy: f64,
    pub length: f64,
    pub time: f64,
}

impl SiScales {
    pub fn new(m_gas: f64, temperature: f64) -> Self {
        let v_beta = (2.0 * KB_SI * temperature / m_gas).sqrt();
        let momentum = m_gas * v_beta;
        let length = HBAR_SI / momentum;
        Self {
            mass: m_gas,
            velocity: v_beta,
            momentum,
            energy: m_gas * v_beta * v_beta,
            length,
            time: length / v_beta,
        }
    }

    pub fn to_internal_length(&self, x: f64) -> f64 {
        x / self.length
    }

    pub fn to_si_length(&self, x: f64) -> f64 {
        x * self.length
    }

    pub fn to_internal_area(&self, a: f64) -> f64 {
        a / (self.length * self.length)
    }

    pub fn to_si_area(&self, a: f64) -> f64 {
        a * self.length * self.length
    }

    pub fn to_internal_density(&self, n: f64) -> f64 {
        n * self.length * self.length * self.length
    }

    pub fn to_si_density(&self, n: f64) -> f64 {
        n / (self.length * self.length * self.length)
    }

    pub fn to_internal_rate(&self, r: f64) -> f64 {
        r * self.time
    }

    pub fn to_si_rate(&self, r: f64) -> f64 {
        r / self.time
    }
}

/// Most probable gas velocity `√(2/(βm))`.
pub fn v_beta(beta: f64, m: f64) -> f64 {
    (2.0 / (beta * m)).sqrt()
}

/// Most probable gas momentum `√(2m/β)`.
pub fn p_beta(beta: f64, m: f64) -> f64 {
    (2.0 * m / beta).sqrt()
}

/// Reduced mass `mM/(m+M)`.
pub fn reduced_mass(m: f64, big_m: f64) -> f64 {
    m * big_m / (m + big_m)
}
