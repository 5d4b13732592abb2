//! Strain-limiting viscoelasticity in one space dimension.
//!
//! Two rate-type closures of the equation of motion `rho u_tt = T_x` are
//! provided: the stress-rate model `eps = h(T) - gamma T_t` and the
//! strain-rate (Kelvin-Voigt type) model `eps + nu eps_t = g(T)`, together
//! with their elastic limit `eps = h(T)`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constitutive;
pub mod dispersion;
pub mod error;
pub mod grid;
mod numerics;
pub mod params;
pub mod pde;
pub mod twave;

pub use error::{Error, Result};
