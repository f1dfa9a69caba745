use crate::error::{Error, Result};
use crate::scalar::{mean, Scalar};

/// Annual values indexed by calendar year, years strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct YearSeries<T> {
    years: Vec<i32>,
    values: Vec<T>,
}

impl<T: Scalar> YearSeries<T> {
    pub fn new(years: Vec<i32>, values: Vec<T>) -> Result<Self> {
        if years.len() != values.len() {
            return Err(Error::LengthMismatch { left: years.len(), right: values.len() });
        }
        if years.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnorderedYears);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("series"));
        }
        Ok(Self { years, values })
    }

    /// Consecutive years starting at `first`.
    pub fn from_start(first: i32, values: Vec<T>) -> Result<Self> {
        let years = (0..values.len() as i32).map(|k| first + k).collect();
        Self::new(years, values)
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, year: i32) -> Option<T> {
        self.years.binary_search(&year).ok().map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, T)> + '_ {
        self.years.iter().copied().zip(self.values.iter().copied())
    }

    pub fn mean(&self) -> Result<T> {
        if self.is_empty() {
            return Err(Error::Empty);
        }
        Ok(mean(&self.values))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { years: self.years.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn aligned_with(&self, other: &YearSeries<T>) -> bool {
        self.years == other.years
    }
}
