//! Numerical laboratory for normalized radial solutions of
//! `−Δu = λu + μ|u|^{q−2}u + |u|^{2*−2}u` in R^N with `‖u‖₂² = a²`.

pub mod asymptotics;
pub mod bvp;
pub mod error;
pub mod fibering;
pub mod grid;
pub mod nonlinearity;
pub mod ode;
pub mod params;
pub mod shooting;
pub mod special;

pub use error::{NlsError, Result};
pub use grid::{grad_norm_sq, h1_dist, lp_norm, make_grid, ode_residual, RadialFn, RadialGrid, Tail};
pub use params::ProblemParams;
