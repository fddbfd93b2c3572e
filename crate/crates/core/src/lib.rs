//! Casimir-Lifshitz pressures between layered mirrors in electrolytes,
//! suspension equilibria of a gold nanoplate above a coated substrate, and
//! the optical response of the resulting Fabry-Perot cavity.
//!
//! Every numerical routine is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod casimir;
pub mod constants;
pub mod electrolyte;
pub mod equilibrium;
pub mod error;
pub mod layers;
pub mod materials;
pub mod optics;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DielectricModel = materials::DielectricModel<f64>;
pub type MaterialsDatabase = materials::MaterialsDatabase<f64>;
pub type ScreeningState = electrolyte::ScreeningState<f64>;
pub type LayerStack = layers::LayerStack<f64>;
pub type CasimirJob = casimir::CasimirJob<f64>;
pub type QuadratureSettings = casimir::QuadratureSettings<f64>;
pub type PressureDecomposition = casimir::PressureDecomposition<f64>;
pub type ExternalLoad = equilibrium::ExternalLoad<f64>;
pub type EquilibriumResult = equilibrium::EquilibriumResult<f64>;
pub type CavityAssembly = optics::CavityAssembly<f64>;
pub type Spectrum = optics::Spectrum<f64>;
