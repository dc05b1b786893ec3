//! Traveling combustion fronts in a striated periodic medium.
//!
//! A traveling wave is a triple `(c, ψ, u)`: a speed, a 1-periodic front
//! profile `x = ψ(y)` and a temperature field in the fresh region
//! `{x < ψ(y)}`. The temperature solves `c u_x − Δu = 0` with the flux
//! condition `∂u/∂ν = c / √(1+ψ_y²)` on the front, and the front obeys the
//! forced curvature law
//!
//! ```text
//! ψ_yy / (1 + ψ_y²) = −c + R(y) K(u(ψ(y), y)) √(1 + ψ_y²)
//! ```
//!
//! where `R` is the periodic combustion rate and `K` the kinetic law, which
//! may degenerate at zero temperature (Arrhenius). The crate computes such
//! waves by alternating a front relaxation with a front-fitted temperature
//! solve, wrapped in a continuation on the truncated kinetics
//! `K_n = max{K, 1/n}`, and checks the result against the a-priori bounds
//! such solutions must satisfy.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod coupler;
pub mod diagnostics;
mod error;
pub mod front;
pub mod kinetics;
pub mod linalg;
pub mod quadrature;
pub mod temperature;

pub use coupler::{
    picard_step, solve_at_truncation, solve_traveling_wave, GridLength, GridSpec, Initialization,
    PicardState, SolveOutcome, SolverConfig, StageRecord, TravelingWave,
};
pub use diagnostics::{run_all, CheckResult, DiagnosticsReport};
pub use error::{Error, Result};
pub use front::{Forcing, FrontParams, FrontProfile};
pub use kinetics::{CombustionRate, KineticsModel};
pub use temperature::{StripGrid, TemperatureField};
