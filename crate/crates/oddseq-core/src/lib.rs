//! Odd unimodal sequences: exact enumeration, rank moments, eta-multiplier
//! arithmetic, Kloosterman-Bessel asymptotics and a conditioned Boltzmann
//! sampler.
//!
//! The crate is `no_std` and only needs `alloc`. Floating-point elementary
//! functions go through `core` and `libm`, so results do not
//! depend on the platform's libc.
//!
//! Module map:
//!
//! * [`qseries`] truncated power series and rank-moment transport
//! * [`exact`] counts, peak-resolved counts, rank laws, brute-force oracles
//! * [`special`] Bessel, Euler polynomials, cotangent derivatives, limit laws
//! * [`modular`] eta multiplier, Kloosterman sums, theta/eta/C*/psi evaluation
//! * [`asympt`] Rademacher, main term, the Kloosterman-Bessel moment series,
//!   saddle point
//! * [`boltzmann`] free and exact-size samplers
//! * [`stats`] KS and total variation distances
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asympt;
pub mod boltzmann;
pub mod error;
pub mod exact;
pub mod modular;
pub mod qseries;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
