//! Numerical laboratory for the nonlocal Chafee-Infante problem
//! `u_t = a(‖u_x‖²) u_xx + λ f(u)` on `(0, π)` with Dirichlet conditions.
//!
//! States are sine-Galerkin fields ([`sine::Field`]). Equilibria come from
//! shooting plus a scalar fixed point ([`equilibria`]), their linearizations
//! from [`spectrum`], connecting orbits from time stepping ([`dynamics`]), and
//! the Morse-theoretic bookkeeping from [`morse`] and [`modelflow`].
//! [`pipeline`] runs complete experiments from a [`config::RunConfig`].

pub mod config;
pub mod crosscheck;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod etd;
pub mod model;
pub mod modelflow;
pub mod morse;
pub mod numerics;
pub mod pipeline;
pub mod sine;
pub mod spectrum;

pub use error::{LabError, Result};
