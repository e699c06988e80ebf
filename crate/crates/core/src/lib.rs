//! Radial numerics for the focusing energy-critical inhomogeneous NLS
//! `i u_t + Δu + |x|^{-b}|u|^α u = 0`.

pub mod app;
pub mod approx;
pub mod config;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod groundstate;
pub mod io;
pub mod linalg;
pub mod modulation;
pub mod ode;
pub mod lorentz;
pub mod operators;
pub mod params;
pub mod scalar;
pub mod spectral;
pub mod virial;

pub use error::{Error, Result};

pub type Params = params::Params<f64>;
pub type Grid = grid::RadialGrid<f64>;
pub type Field = field::RadialField<f64>;
pub type GroundState = groundstate::GroundState<f64>;
pub type Evolver = evolution::Evolver<f64>;
pub type Trajectory = evolution::Trajectory<f64>;
pub type ModulationState = modulation::ModulationState<f64>;
