//! Exact rarefaction-wave solutions of the compressible Euler equations,
//! relative-energy diagnostics, and a small 2-D finite-volume testbed.
//!
//! The crate is organised around one pipeline:
//!
//! * [`gas`] fixes the thermodynamics (ideal gas, gas constant one,
//!   configurable heat capacity `c_v`).
//! * [`riemann`] builds the exact self-similar solution of the 1-D Riemann
//!   problem in the shock-free regime (two rarefaction fans joined by a
//!   constant middle state on a single isentrope) and samples it.
//! * [`energy`] evaluates the relative energy of a numerical field against
//!   that exact solution, together with the per-term right-hand side of the
//!   energy inequality that makes the rarefaction wave a stable attractor.
//! * [`certify`] runs falsifiable grid scans of the scalar inequalities the
//!   energy argument rests on and emits machine-readable reports.
//! * [`fv`] is a deliberately plain 2-D finite-volume solver (local
//!   Lax-Friedrichs, optional minmod second order) used to observe the
//!   predicted behaviour discretely.
//! * [`cli`] wires everything into the `rarewave` binary.

pub mod certify;
pub mod cli;
pub mod config;
pub mod energy;
pub mod fv;
pub mod gas;
pub mod kahan;
pub mod riemann;
pub mod tol;

pub use gas::{AdmissibilityBounds, Conserved, GasError, GasParams, Primitive};
pub use riemann::{RiemannData, RiemannError, RiemannState, ShockFreeSolution};
