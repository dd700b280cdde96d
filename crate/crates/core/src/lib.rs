//! Stability certification for two-block linear time-varying ODE systems
//! with quaternion-valued coefficients.
//!
//! The library decides Lyapunov / asymptotic stability of systems of the form
//!
//! ```text
//! Φ' = A(t) Φ + B(t) Ψ
//! Ψ' = C(t) Φ + D(t) Ψ,    t ≥ t0,
//! ```
//!
//! where the blocks are quaternion-valued matrix functions. The decision
//! procedure reduces the system to a two-dimensional real comparison system
//! built from spectral envelopes of the diagonal blocks and operator norms of
//! the coupling blocks, then certifies stability through the behaviour of an
//! associated scalar Riccati equation. Classical tests (logarithmic norms,
//! the freezing method, integral norm estimates) are implemented alongside
//! for comparison, and an empirical integrator cross-checks every verdict.
//!
//! Modules:
//! - [`quat`] — quaternion scalars and matrices, norms, real embeddings
//! - [`expr`] — expression parser/evaluator for time-dependent coefficients
//! - [`ode`] — adaptive embedded Runge–Kutta integration
//! - [`quad`] — adaptive quadrature
//! - [`system`] — block systems, structural checks, envelopes, comparison system
//! - [`riccati`] — scalar Riccati equations: integration, classification, bounds
//! - [`criteria`] — the stability criterion and the second-order front end
//! - [`classical`] — logarithmic norms, freezing test, integral norm estimates
//! - [`verifier`] — empirical trajectory integration and domination checks
//! - [`report`] — report assembly and JSON / CSV / table rendering
//! - [`builtin`] — parameterized built-in example systems

pub mod builtin;
pub mod classical;
pub mod criteria;
pub mod error;
pub mod expr;
pub mod ode;
pub mod quad;
pub mod quat;
pub mod report;
pub mod riccati;
pub mod scalar;
pub mod system;
pub mod verifier;

pub use error::Error;
