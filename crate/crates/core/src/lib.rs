//! Spectral-transform toolkit for the matrix defocusing nonlinear Schrödinger
//! equation `2 v_t = i (v_xx - 2 v v* v)` on the semi-strip `x >= 0, 0 <= t < a`.
//!
//! The crate is organised around the two auxiliary linear systems
//! `u_x = G u` and `R_t = F R`:
//!
//! * [`dirac`] builds `G`, `F`, the signature matrix `j` and propagates both
//!   fundamental solutions.
//! * [`weyl`] turns the space propagator into nested matrix balls and a Weyl
//!   function estimate.
//! * [`evolution`] moves Weyl functions forward in time with the
//!   linear-fractional map built from `R`, and extracts the initial Weyl
//!   function from boundary data alone in the quarter-plane setting.
//! * [`recovery`] recovers the Taylor jet `∂ₓᵏ v(0, t)` from the boundary traces.
//! * [`verify`] holds exact solutions and residual checks that close the loop.

pub mod chebyshev;
pub mod dirac;
pub mod error;
pub mod evolution;
pub mod linalg;
mod ode;
pub mod recovery;
pub mod verify;
pub mod weyl;

pub use dirac::{PotentialProfile, PropagatorSamples, Signature, SpectralParameter};
pub use error::{Error, Result};
pub use linalg::{CMat, C64};
