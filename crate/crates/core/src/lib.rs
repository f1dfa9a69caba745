//! Crop production variability, seasonal estimator cascades and the accuracy
//! required of early crop estimators to improve on historical baselines.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to one of the two.

pub mod cascade;
pub mod error;
pub mod ingest;
pub mod rainfall;
pub mod report;
pub mod requirements;
pub mod scalar;
pub mod series;
pub mod spatial;
pub mod stats;
pub mod trend;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use series::YearSeries;

pub type CropPanel64 = ingest::CropPanel<f64>;
pub type CropPanel32 = ingest::CropPanel<f32>;
pub type TrendModel64 = trend::TrendModel<f64>;
pub type TrendModel32 = trend::TrendModel<f32>;
pub type ErrorVector64 = stats::ErrorVector<f64>;
pub type ErrorVector32 = stats::ErrorVector<f32>;
pub type CascadeReport64 = cascade::CascadeReport<f64>;
pub type CascadeReport32 = cascade::CascadeReport<f32>;
pub type RequirementResult64 = requirements::RequirementResult<f64>;
pub type RequirementResult32 = requirements::RequirementResult<f32>;
pub type ErrorGrid64 = requirements::ErrorGrid<f64>;
pub type ErrorGrid32 = requirements::ErrorGrid<f32>;
