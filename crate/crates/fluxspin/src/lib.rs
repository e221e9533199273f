//! Simulation toolkit for a microwave-dressed superconducting flux qubit
//! magnetically coupled to a single NV-center electron spin.
//!
//! A strong classical drive dresses the flux qubit; tuning the dressed
//! splitting Ω onto the spin–qubit detuning δ = ω_s − Δ activates an
//! effective exchange coupling of strength g/2 between the two otherwise
//! far-detuned two-level systems. The crate provides
//!
//! * [`qstate`] — states, operators and measures on the 4-dimensional
//!   joint Hilbert space;
//! * [`hamiltonians`] — the frame-tagged generators (lab, rotating,
//!   interaction, effective) and the device-parameter formulas;
//! * [`dynamics`] — Schrödinger and Lindblad integrators with invariant
//!   monitoring;
//! * [`protocols`] — the five coupling-enabled procedures: coupling
//!   detection, spin initialization, quantum memory, spin rotation, and
//!   spin tomography, each with its analytic oracle;
//! * [`cli`] — configuration, CSV/manifest serialization and the command
//!   front end used by the `fluxspin` binary.

pub mod error;
pub mod qstate;
pub mod hamiltonians;
pub mod dynamics;
pub mod protocols;
pub mod cli;

pub use error::{Error, Result};
