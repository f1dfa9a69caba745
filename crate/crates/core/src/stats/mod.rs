//! Error metrics and descriptive statistics.
//!
//! Two variance conventions coexist here on purpose: [`rmse`] divides by the
//! number of evaluated years, while [`describe`] reports the coefficient of
//! variation with the sample standard deviation (divisor n − 1).

mod correlation;
pub mod special;

pub use correlation::{pearson, CorrelationResult};

use crate::error::{Error, Result};
use crate::scalar::{mean, Scalar};
use crate::series::YearSeries;

/// Signed estimation errors (predicted − actual) per evaluated year.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorVector<T> {
    pub crop: String,
    pub years: Vec<i32>,
    pub errors: Vec<T>,
}

impl<T: Scalar> ErrorVector<T> {
    pub fn new(years: Vec<i32>, errors: Vec<T>) -> Result<Self> {
        if years.len() != errors.len() {
            return Err(Error::LengthMismatch { left: years.len(), right: errors.len() });
        }
        if errors.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("error vector"));
        }
        Ok(Self { crop: String::new(), years, errors })
    }

    pub fn with_crop(mut self, crop: impl Into<String>) -> Self {
        self.crop = crop.into();
        self
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Per-year signed error, positive when the prediction overestimates.
pub fn estimation_error<T: Scalar>(predicted: &YearSeries<T>, actual: &YearSeries<T>) -> Result<ErrorVector<T>> {
    if !predicted.aligned_with(actual) {
        return Err(Error::MisalignedYears);
    }
    let errors = predicted.values().iter().zip(actual.values()).map(|(&p, &a)| p - a).collect();
    ErrorVector::new(predicted.years().to_vec(), errors)
}

/// Root mean square of the errors, divisor = number of years.
pub fn rmse<T: Scalar>(ev: &ErrorVector<T>) -> Result<T> {
    rmse_of(&ev.errors)
}

pub(crate) fn rmse_of<T: Scalar>(errors: &[T]) -> Result<T> {
    if errors.is_empty() {
        return Err(Error::Empty);
    }
    let ss: T = errors.iter().map(|&e| e * e).sum();
    Ok((ss / T::from_count(errors.len())).sqrt())
}

/// RMSE as a percentage of `reference_mean`, the mean of the actual series.
pub fn cv_rmse<T: Scalar>(ev: &ErrorVector<T>, reference_mean: T) -> Result<T> {
    if reference_mean <= T::zero() {
        return Err(Error::NonPositive { what: "reference mean", value: reference_mean.as_f64() });
    }
    Ok(T::hundred() * rmse(ev)? / reference_mean)
}

/// CV(RMSE) of `predicted` against `actual`, normalized by the mean of `actual`.
pub fn cv_rmse_of<T: Scalar>(predicted: &YearSeries<T>, actual: &YearSeries<T>) -> Result<T> {
    let ev = estimation_error(predicted, actual)?;
    cv_rmse(&ev, actual.mean()?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptiveStats<T> {
    pub min: T,
    pub mean: T,
    pub max: T,
    /// Sample standard deviation over the mean, in percent.
    pub cv: T,
}

pub fn describe<T: Scalar>(series: &[T]) -> Result<DescriptiveStats<T>> {
    if series.is_empty() {
        return Err(Error::Empty);
    }
    let m = mean(series);
    if m <= T::zero() {
        return Err(Error::NonPositive { what: "series mean", value: m.as_f64() });
    }
    let min = series.iter().copied().fold(T::infinity(), T::min);
    let max = series.iter().copied().fold(T::neg_infinity(), T::max);
    // a single observation has no spread
    let cv = if series.len() < 2 {
        T::zero()
    } else {
        let ss: T = series.iter().map(|&v| (v - m) * (v - m)).sum();
        T::hundred() * (ss / T::from_count(series.len() - 1)).sqrt() / m
    };
    Ok(DescriptiveStats { min, mean: m.max(min).min(max), max, cv })
}
