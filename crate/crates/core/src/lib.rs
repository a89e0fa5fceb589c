//! Numerical laboratory for weighted composition operators on weighted Hardy
//! spaces of the unit disk.
//!
//! A space is described by its kernel coefficients `γ(n) = ‖zⁿ‖⁻²`, so that
//! `K_w(z) = Σ γ(n) (w̄ z)ⁿ`. Operators `W_{F,φ} f = F · (f ∘ φ)` are realized
//! as truncated matrices in the orthonormal basis `e_n = √γ(n) zⁿ`, and the
//! co-isometry / unitarity characterization is checked numerically against
//! the theoretical prediction.
//!
//! All numerical code is generic over the real scalar type (`f32` or `f64`,
//! see [`Real`]); the `*64` aliases below are what the CLI and the acceptance
//! suite use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernel;
pub mod literal;
pub mod moebius;
pub mod operator;
pub mod report;
pub mod scalar;
pub mod series;
pub mod verdict;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::{Complex, Real};

pub type WeightSequence64 = weights::WeightSequence<f64>;
pub type WeightSequence32 = weights::WeightSequence<f32>;
pub type SpaceClass64 = weights::SpaceClass<f64>;
pub type TruncatedSeries64 = series::TruncatedSeries<f64>;
pub type TruncatedSeries32 = series::TruncatedSeries<f32>;
pub type Automorphism64 = moebius::Automorphism<f64>;
pub type Automorphism32 = moebius::Automorphism<f32>;
pub type WcoSymbols64 = operator::WcoSymbols<f64>;
pub type OperatorMatrix64 = operator::OperatorMatrix<f64>;
pub type Complex64 = Complex<f64>;
pub type Complex32 = Complex<f32>;
