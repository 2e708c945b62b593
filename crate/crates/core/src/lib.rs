//! Numerical workbench for solitary waves of the nonlinear Schrödinger
//! equation `i∂ₜu = −½∂ₓ²u + qδ(x)u + σ|u|^p u` with an attractive delta
//! potential (`q < 0`).

pub mod banded;
pub mod error;
pub mod fields;
pub mod grid;
pub mod jost;
pub mod modulation;
pub mod nls;
pub mod numeric;
pub mod operators;
pub mod profile;
pub mod propagator;
pub mod resonance;
pub mod scalar;
pub mod soliton;
pub mod spectrum;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};
pub use soliton::Regime;

/// `f64` instantiations of the generic types.
pub type Grid = grid::Grid<f64>;
pub type SolitonParams = soliton::SolitonParams<f64>;
pub type ComplexField = fields::ComplexField<f64>;
pub type TwoComponentField = fields::TwoComponentField<f64>;

/// `f32` instantiations of the generic types.
pub type Grid32 = grid::Grid<f32>;
pub type SolitonParams32 = soliton::SolitonParams<f32>;
