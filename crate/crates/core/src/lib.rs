//! Radiative rates and population relaxation of a two-level atom coupled to
//! the electromagnetic field on stationary trajectories: at rest in free
//! space, at rest near a perfect mirror in a thermal bath, and uniformly
//! accelerated parallel to a mirror.
//!
//! Natural units (`hbar = c = k_B = 1`) are used throughout.

pub mod cli;
pub mod domain;
pub mod dynamics;
pub mod error;
pub mod quadrature;
pub mod rates;
pub mod spectral;
pub mod wightman;

pub use error::{Error, Result};
