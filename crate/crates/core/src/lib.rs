//! Numerical laboratory for the maximum-entropy family p(x; θ) ∝ exp(θ|x|ⁿ).
//!
//! The crate covers the closed-form dually flat geometry of the family
//! ([`expfam`]), the embedding of the integers as divergence level sets
//! ([`embedding`]), theta-series duality and Fourier decay of the kernel
//! exp(−|x|ⁿ) ([`spectral`]), the Mellin transform of the theta series
//! ([`mellin_zeta`]) and a reporting front end ([`cli_report`]). All numerics
//! are self-contained in [`numerics`].

pub mod cli_report;
pub mod embedding;
pub mod error;
pub mod expfam;
pub mod mellin_zeta;
pub mod numerics;
pub mod spectral;

pub use error::{Error, Result};
