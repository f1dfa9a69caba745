//! Linear and exponential trend models fitted by ordinary least squares
//! against calendar time, slope significance, model selection and
//! detrending.
//!
//! Time is measured in years from an origin year (the first year of the
//! fitted series unless stated otherwise), so `alpha` is the trend level at
//! the origin. The slope does not depend on the origin.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::YearSeries;
use crate::stats::special::student_t_two_sided;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrendKind {
    None,
    Linear,
    Exponential,
}

impl TrendKind {
    pub const ALL: [TrendKind; 3] = [TrendKind::None, TrendKind::Linear, TrendKind::Exponential];

    pub fn as_str(self) -> &'static str {
        match self {
            TrendKind::None => "none",
            TrendKind::Linear => "linear",
            TrendKind::Exponential => "exponential",
        }
    }
}

impl fmt::Display for TrendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TrendKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown trend kind '{s}'")))
    }
}

/// A fitted trend. For the exponential kind, `alpha` and `beta` live in log
/// space and `r2` is the fit quality of the log-linear regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendModel<T> {
    pub kind: TrendKind,
    pub alpha: T,
    pub beta: T,
    /// Year at which t = 0.
    pub origin: i32,
    pub p_value: T,
    pub r2: T,
}

impl<T: Scalar> TrendModel<T> {
    pub fn none() -> Self {
        Self { kind: TrendKind::None, alpha: T::zero(), beta: T::zero(), origin: 0, p_value: T::one(), r2: T::zero() }
    }

    pub fn linear(alpha: T, beta: T, origin: i32) -> Self {
        Self { kind: TrendKind::Linear, alpha, beta, origin, p_value: T::zero(), r2: T::one() }
    }

    pub fn exponential(alpha: T, beta: T, origin: i32) -> Self {
        Self { kind: TrendKind::Exponential, ..Self::linear(alpha, beta, origin) }
    }

    pub fn is_significant(&self, alpha: T) -> bool {
        self.kind != TrendKind::None && self.p_value < alpha
    }

    /// Trend value at `year`; extrapolation outside the fitted years is allowed.
    pub fn value_at(&self, year: i32) -> Result<T> {
        let t = T::from_i32(year - self.origin).expect("year offset fits the scalar");
        match self.kind {
            TrendKind::None => Err(Error::NoTrend),
            TrendKind::Linear => Ok(self.alpha + self.beta * t),
            TrendKind::Exponential => Ok((self.alpha + self.beta * t).exp()),
        }
    }
}

/// Series split into a trend and the detrended remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct DetrendedSeries<T> {
    pub years: Vec<i32>,
    pub values: Vec<T>,
    pub trend_values: Vec<T>,
}

struct Ols<T> {
    alpha: T,
    beta: T,
    p_value: T,
    r2: T,
}

/// Simple regression of `y` on `t` with intercept.
fn ols<T: Scalar>(t: &[T], y: &[T]) -> Result<Ols<T>> {
    let n = y.len();
    let nf = T::from_count(n);
    let t_mean = t.iter().copied().sum::<T>() / nf;
    let y_mean = y.iter().copied().sum::<T>() / nf;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&ti, &yi) in t.iter().zip(y) {
        let (dt, dy) = (ti - t_mean, yi - y_mean);
        sxx += dt * dt;
        sxy += dt * dy;
        syy += dy * dy;
    }
    if sxx <= T::zero() {
        return Err(Error::ZeroVariance("time regressor"));
    }
    let beta = sxy / sxx;
    let alpha = y_mean - beta * t_mean;
    let sse: T = t.iter().zip(y).map(|(&ti, &yi)| (yi - alpha - beta * ti).powi(2)).sum();

    let (p_value, r2) = if syy <= T::zero() {
        // constant series: no slope to detect
        (T::one(), T::zero())
    } else if sse <= syy * T::epsilon() {
        // perfect fit, the t statistic would be 0/0 or infinite
        (T::zero(), T::one())
    } else {
        let df = T::from_count(n - 2);
        let se = (sse / df / sxx).sqrt();
        let p = student_t_two_sided(beta / se, df);
        (p, (T::one() - sse / syy).max(T::zero()).min(T::one()))
    };
    Ok(Ols { alpha, beta, p_value, r2 })
}

fn time_axis<T: Scalar>(years: &[i32], origin: i32) -> Vec<T> {
    years.iter().map(|&y| T::from_i32(y - origin).expect("year offset fits the scalar")).collect()
}

fn check_len<T: Scalar>(series: &YearSeries<T>) -> Result<()> {
    if series.len() < 3 {
        return Err(Error::TooShort { needed: 3, got: series.len() });
    }
    Ok(())
}

/// OLS fit of `u = α + β t` with time counted from the series' first year.
pub fn fit_linear<T: Scalar>(series: &YearSeries<T>) -> Result<TrendModel<T>> {
    check_len(series)?;
    fit_linear_at(series.years(), series.values(), series.years()[0])
}

/// OLS fit of `ln u = α + β t`; every value must be strictly positive.
pub fn fit_exponential<T: Scalar>(series: &YearSeries<T>) -> Result<TrendModel<T>> {
    check_len(series)?;
    fit_exponential_at(series.years(), series.values(), series.years()[0])
}

pub(crate) fn fit_linear_at<T: Scalar>(years: &[i32], values: &[T], origin: i32) -> Result<TrendModel<T>> {
    let fit = ols(&time_axis(years, origin), values)?;
    Ok(TrendModel { kind: TrendKind::Linear, alpha: fit.alpha, beta: fit.beta, origin, p_value: fit.p_value, r2: fit.r2 })
}

pub(crate) fn fit_exponential_at<T: Scalar>(years: &[i32], values: &[T], origin: i32) -> Result<TrendModel<T>> {
    if values.iter().any(|&v| v <= T::zero()) {
        return Err(Error::ExponentialIneligible);
    }
    let logs: Vec<T> = values.iter().map(|v| v.ln()).collect();
    let fit = ols(&time_axis(years, origin), &logs)?;
    Ok(TrendModel {
        kind: TrendKind::Exponential,
        alpha: fit.alpha,
        beta: fit.beta,
        origin,
        p_value: fit.p_value,
        r2: fit.r2,
    })
}

/// Both candidate fits of a series; the exponential one is absent when the
/// series has a non-positive value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendCandidates<T> {
    pub linear: TrendModel<T>,
    pub exponential: Option<TrendModel<T>>,
}

impl<T: Scalar> TrendCandidates<T> {
    pub fn fit(series: &YearSeries<T>) -> Result<Self> {
        let linear = fit_linear(series)?;
        let exponential = match fit_exponential(series) {
            Ok(m) => Some(m),
            Err(Error::ExponentialIneligible) => None,
            Err(e) => return Err(e),
        };
        Ok(Self { linear, exponential })
    }

    /// Candidate with the higher R² regardless of significance.
    pub fn best_fit(&self) -> TrendModel<T> {
        match self.exponential {
            Some(e) if e.r2 > self.linear.r2 => e,
            _ => self.linear,
        }
    }

    /// Significant candidate (p < `alpha`) with the higher R², or a `none` model.
    pub fn select(&self, alpha: T) -> TrendModel<T> {
        let linear = Some(self.linear).filter(|m| m.p_value < alpha);
        let exponential = self.exponential.filter(|m| m.p_value < alpha);
        match (linear, exponential) {
            (Some(l), Some(e)) => {
                if e.r2 > l.r2 {
                    e
                } else {
                    l
                }
            }
            (Some(m), None) | (None, Some(m)) => m,
            (None, None) => TrendModel::none(),
        }
    }
}

/// Keeps the fits whose slope is significant at `alpha` and returns the one
/// with the higher R², each R² measured in its own fitting space.
pub fn select_trend<T: Scalar>(series: &YearSeries<T>, alpha: T) -> Result<TrendModel<T>> {
    Ok(TrendCandidates::fit(series)?.select(alpha))
}

pub fn detrend<T: Scalar>(series: &YearSeries<T>, model: &TrendModel<T>) -> Result<DetrendedSeries<T>> {
    if model.kind == TrendKind::None {
        return Err(Error::NoTrend);
    }
    let trend_values = series.years().iter().map(|&y| model.value_at(y)).collect::<Result<Vec<T>>>()?;
    let values = series.values().iter().zip(&trend_values).map(|(&u, &tr)| u - tr).collect();
    Ok(DetrendedSeries { years: series.years().to_vec(), values, trend_values })
}

pub fn trend_value<T: Scalar>(model: &TrendModel<T>, year: i32) -> Result<T> {
    model.value_at(year)
}
