//! Numerical checks for disjoint transitivity, disjoint mixing and chaos of
//! weighted translations on Orlicz spaces over discrete and lattice groups.
//!
//! The numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the command line
//! runner uses.

pub mod dynamics;
pub mod group;
pub mod orlicz;
pub mod scalar;
pub mod translation;
pub mod young;

pub use group::{Aperiodicity, CompactSet, GroupElement, GroupError, GroupKind, GroupModel};
pub use scalar::Scalar;

pub type YoungFunction = young::YoungFunction<f64>;
pub type OrliczVector = orlicz::OrliczVector<f64>;
pub type Weight = translation::Weight<f64>;
pub type WeightedTranslation = translation::WeightedTranslation<f64>;
pub type Scenario = dynamics::Scenario<f64>;
pub type ConditionReport = dynamics::ConditionReport<f64>;

pub type YoungFunction32 = young::YoungFunction<f32>;
pub type OrliczVector32 = orlicz::OrliczVector<f32>;
pub type WeightedTranslation32 = translation::WeightedTranslation<f32>;
