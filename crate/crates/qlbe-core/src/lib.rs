//! Kernels, limiting forms and the Monte Carlo wave-function unravelling of the
//! quantum linear Boltzmann equation for a test particle in an ideal gas.
//!
//! The crate is `no_std` and only needs `alloc`. Floating point math goes
//! through `libm`, so results do not depend on the platform's libc.
//!
//! Internal units: gas particle mass `m = 1`, most probable gas velocity
//! `v_β = 1` (hence `β = 2`, `p_β = 1`), `ħ = 1`. Times in the trajectory
//! engine are measured in units of `1/Γ_β`.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod brownian;
pub mod classical_lbe;
pub mod decoherence;
mod error;
pub mod observables;
pub mod qlbe_generator;
pub mod quad;
pub mod scattering;
pub mod special;
pub mod structure_factor;
pub mod trajectory;
pub mod units;
pub mod vec3;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use vec3::Vec3;

/// Crate version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
