//! Non-isothermal chemical reaction networks in the state `(U, N)`.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the bottom fix `f64`, which is what the command line tool uses.

// NaN must fail every guard, hence `!(x > 0)` over `x <= 0`.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod kinetics;
pub mod linalg;
pub mod network;
pub mod networks;
pub mod scalar;
pub mod thermo;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Network = network::NetworkSpec<f64>;
pub type NetworkMatrices = network::Matrices<f64>;
pub type Species = thermo::SpeciesThermo<f64>;
pub type Thermo = thermo::ThermoModel<f64>;
pub type StateF64 = thermo::State<f64>;
