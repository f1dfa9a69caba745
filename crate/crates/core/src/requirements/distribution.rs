use crate::cascade::{Component, ComponentErrors, Stage, StageContext};
use crate::error::Result;
use crate::scalar::Scalar;

/// Per-year production errors, in percent of mean production, of the SEP
/// estimator (area × leave-one-out yield) and of area × yield biased by `e_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDistribution<T> {
    pub crop: String,
    pub yield_error: T,
    pub years: Vec<i32>,
    pub sep_loocv: Vec<T>,
    pub yield_biased: Vec<T>,
}

impl<T: Scalar> ErrorDistribution<T> {
    /// Root mean square of each series, i.e. the two CV(RMSE) values.
    pub fn cv_pair(&self) -> (T, T) {
        let rms = |v: &[T]| (v.iter().map(|&x| x * x).sum::<T>() / T::from_count(v.len())).sqrt();
        (rms(&self.sep_loocv), rms(&self.yield_biased))
    }
}

pub fn error_distributions<T: Scalar>(ctx: &StageContext<'_, T>, yield_error: T) -> Result<ErrorDistribution<T>> {
    let actual = ctx.panel.production();
    let mean = actual.mean()?;
    let relative = |stage: Stage, errors: ComponentErrors<T>| -> Result<Vec<T>> {
        let predicted = ctx.predictions(stage, &errors)?;
        Ok(predicted.values().iter().zip(actual.values()).map(|(&p, &a)| T::hundred() * (p - a) / mean).collect())
    };
    Ok(ErrorDistribution {
        crop: ctx.panel.crop().to_string(),
        yield_error,
        years: actual.years().to_vec(),
        sep_loocv: relative(Stage::Sep, ComponentErrors::none())?,
        yield_biased: relative(Stage::Oct, ComponentErrors::only(Component::Yield, yield_error))?,
    })
}
