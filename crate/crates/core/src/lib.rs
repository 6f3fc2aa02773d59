//! Simulation tiers for a driven two-mode collective spin
//! H(t) = a(t) J_x + sign * (c/N) J_z^2  (hbar = 1, j = N/2).
//!
//! Four dynamical tiers share one parameter set:
//! exact Schroedinger evolution in the Dicke basis, a nine-moment
//! beyond-mean-field (BMF) closure, a quadratic Holstein-Primakoff (HP)
//! expansion, and the classical mean-field limit on the Bloch sphere.
//! On top of those sit quantum Fisher information (QFI) analysis with an
//! entanglement-depth witness, kicked-drive chaos diagnostics (Lyapunov
//! exponents, Poincare sections), break-time scaling scans, and an
//! adiabatic sweep through the two-mode ground-state transition.

pub mod analytic;
pub mod bmf;
pub mod breaktime;
pub mod config;
pub mod dicke;
pub mod evolve;
pub mod hp;
pub mod linalg;
pub mod mf;
mod ode;
pub mod output;
pub mod params;
pub mod qfi;
pub mod qpt;
pub mod runs;

pub use params::{KickedDrive, ModelParams, SpinError};
