use super::Variable;
use crate::error::{Error, Result};
use crate::ingest::{CropPanel, CroplandSeries};
use crate::scalar::{mean, Scalar};
use crate::series::YearSeries;
use crate::trend::{fit_exponential_at, fit_linear_at, TrendCandidates, TrendKind, TrendModel};

/// How the trend of a baseline is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrendPolicy<T> {
    /// Select on the full series at significance level `alpha`.
    Select { alpha: T },
    /// Use this kind regardless of significance.
    Fixed(TrendKind),
}

impl<T: Scalar> TrendPolicy<T> {
    fn model(&self, series: &YearSeries<T>) -> Result<TrendModel<T>> {
        let candidates = || TrendCandidates::fit(series);
        Ok(match *self {
            TrendPolicy::Select { alpha } => candidates()?.select(alpha),
            TrendPolicy::Fixed(TrendKind::None) => TrendModel::none(),
            TrendPolicy::Fixed(TrendKind::Linear) => candidates()?.linear,
            TrendPolicy::Fixed(TrendKind::Exponential) => {
                candidates()?.exponential.ok_or(Error::ExponentialIneligible)?
            }
        })
    }
}

/// Leave-one-out predictions of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct LoocvSeries<T> {
    pub predictions: YearSeries<T>,
    /// Held-out years whose exponential refit fell back to a linear one
    /// because a training value was not positive.
    pub fallback_years: Vec<i32>,
}

/// Predicts every year from the other years.
///
/// With a trend, the parameters of `kind` are refit on the remaining years,
/// the mean residual z̄ of those years is computed, and the prediction is
/// z̄ + trend(year). Without a trend it is the plain mean of the other years.
///
/// Needs 2 years without a trend and 4 with one (3 per refit).
pub fn loocv_series<T: Scalar>(series: &YearSeries<T>, kind: TrendKind) -> Result<LoocvSeries<T>> {
    let n = series.len();
    let needed = if kind == TrendKind::None { 2 } else { 4 };
    if n < needed {
        return Err(Error::TooShort { needed, got: n });
    }
    let years = series.years();
    let values = series.values();
    let origin = years[0];
    let mut train_years = Vec::with_capacity(n - 1);
    let mut train_values = Vec::with_capacity(n - 1);
    let mut predictions = Vec::with_capacity(n);
    let mut fallback_years = Vec::new();

    for held in 0..n {
        train_years.clear();
        train_values.clear();
        for i in (0..n).filter(|&i| i != held) {
            train_years.push(years[i]);
            train_values.push(values[i]);
        }
        let model = match kind {
            TrendKind::None => {
                predictions.push(mean(&train_values));
                continue;
            }
            TrendKind::Linear => fit_linear_at(&train_years, &train_values, origin)?,
            TrendKind::Exponential => match fit_exponential_at(&train_years, &train_values, origin) {
                Ok(m) => m,
                Err(Error::ExponentialIneligible) => {
                    fallback_years.push(years[held]);
                    fit_linear_at(&train_years, &train_values, origin)?
                }
                Err(e) => return Err(e),
            },
        };
        let mut residual_sum = T::zero();
        for (&y, &v) in train_years.iter().zip(&train_values) {
            residual_sum += v - model.value_at(y)?;
        }
        let z_bar = residual_sum / T::from_count(train_values.len());
        predictions.push(z_bar + model.value_at(years[held])?);
    }
    Ok(LoocvSeries { predictions: YearSeries::new(years.to_vec(), predictions)?, fallback_years })
}

/// Historical estimator of one variable evaluated by leave-one-out.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselinePredictor<T> {
    pub variable: Variable,
    /// Trend chosen on the full series; its kind is reused in every fold.
    pub trend: TrendModel<T>,
    pub predictions: YearSeries<T>,
    pub fallback_years: Vec<i32>,
}

impl<T: Scalar> BaselinePredictor<T> {
    pub fn at(&self, year: i32) -> Option<T> {
        self.predictions.get(year)
    }
}

pub(crate) fn ratio_series<T: Scalar>(panel: &CropPanel<T>, cropland: &CroplandSeries<T>) -> Result<YearSeries<T>> {
    let values = panel
        .area()
        .iter()
        .map(|(year, a)| cropland.get(year).map(|c| a / c).ok_or(Error::MissingYear { what: "cropland", year }))
        .collect::<Result<Vec<T>>>()?;
    YearSeries::new(panel.years().to_vec(), values)
}

/// Leave-one-out baseline of `variable`. The trend kind is decided once on the
/// full series by `policy`; the area/cropland ratio never carries a trend.
pub fn loocv_baseline<T: Scalar>(
    panel: &CropPanel<T>,
    cropland: Option<&CroplandSeries<T>>,
    variable: Variable,
    policy: TrendPolicy<T>,
) -> Result<BaselinePredictor<T>> {
    if panel.len() < 4 {
        return Err(Error::TooShort { needed: 4, got: panel.len() });
    }
    let (series, trend) = match variable {
        Variable::Ratio => {
            let cropland = cropland.ok_or(Error::MissingCropland("the area/cropland ratio baseline"))?;
            (ratio_series(panel, cropland)?, TrendModel::none())
        }
        Variable::Production | Variable::Area | Variable::Yield => {
            let series = match variable {
                Variable::Production => panel.production(),
                Variable::Area => panel.area(),
                _ => panel.yields(),
            };
            (series.clone(), policy.model(series)?)
        }
    };
    let loocv = loocv_series(&series, trend.kind)?;
    Ok(BaselinePredictor { variable, trend, predictions: loocv.predictions, fallback_years: loocv.fallback_years })
}

/// The four historical baselines of one crop.
#[derive(Debug, Clone, PartialEq)]
pub struct Baselines<T> {
    pub production: BaselinePredictor<T>,
    pub area: BaselinePredictor<T>,
    pub yields: BaselinePredictor<T>,
    /// Present when a cropland series was supplied.
    pub ratio: Option<BaselinePredictor<T>>,
}

impl<T: Scalar> Baselines<T> {
    pub fn compute(panel: &CropPanel<T>, cropland: Option<&CroplandSeries<T>>, policy: TrendPolicy<T>) -> Result<Self> {
        Ok(Self {
            production: loocv_baseline(panel, cropland, Variable::Production, policy)?,
            area: loocv_baseline(panel, cropland, Variable::Area, policy)?,
            yields: loocv_baseline(panel, cropland, Variable::Yield, policy)?,
            ratio: cropland.map(|c| loocv_baseline(panel, Some(c), Variable::Ratio, policy)).transpose()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn panel(production: &[f64]) -> CropPanel<f64> {
        let n = production.len();
        CropPanel::new("x", (2000..2000 + n as i32).collect(), production.to_vec(), production.to_vec(), vec![1.0; n])
            .unwrap()
    }

    #[test]
    fn hand_loocv_without_trend() {
        let s = YearSeries::from_start(2000, vec![100.0, 110.0, 90.0, 100.0]).unwrap();
        let p = loocv_series(&s, TrendKind::None).unwrap();
        let expected = [100.0, 290.0 / 3.0, 310.0 / 3.0, 100.0];
        for (got, want) in p.predictions.values().iter().zip(expected) {
            assert_relative_eq!(*got, want, max_relative = 1e-14);
        }
    }

    #[test]
    fn three_point_series() {
        let s = YearSeries::from_start(2000, vec![100.0, 110.0, 90.0]).unwrap();
        assert_eq!(loocv_series(&s, TrendKind::None).unwrap().predictions.values(), &[100.0, 95.0, 105.0]);
        assert!(matches!(loocv_series(&s, TrendKind::Linear), Err(Error::TooShort { needed: 4, got: 3 })));
    }

    #[test]
    fn constant_series() {
        let b = loocv_baseline(&panel(&[7.0; 4]), None, Variable::Production, TrendPolicy::Select { alpha: 0.01 })
            .unwrap();
        assert_eq!(b.trend.kind, TrendKind::None);
        assert!(b.predictions.values().iter().all(|&v| v == 7.0));
    }

    #[test]
    fn linear_trend_is_extrapolated() {
        let values: Vec<f64> = (0..8).map(|t| 10.0 + 2.0 * t as f64).collect();
        let b = loocv_baseline(&panel(&values), None, Variable::Production, TrendPolicy::Select { alpha: 0.01 })
            .unwrap();
        assert_eq!(b.trend.kind, TrendKind::Linear);
        for (p, v) in b.predictions.values().iter().zip(&values) {
            assert_relative_eq!(p, v, epsilon = 1e-10);
        }
    }

    #[test]
    fn ratio_requires_cropland() {
        let p = panel(&[1.0, 2.0, 3.0, 4.0]);
        let err = loocv_baseline(&p, None, Variable::Ratio, TrendPolicy::Fixed(TrendKind::None)).unwrap_err();
        assert!(matches!(err, Error::MissingCropland(_)));
        let c = CroplandSeries::from_panels(&[p.clone(), p.scaled(3.0)]).unwrap();
        let b = loocv_baseline(&p, Some(&c), Variable::Ratio, TrendPolicy::Fixed(TrendKind::Linear)).unwrap();
        assert_eq!(b.trend.kind, TrendKind::None);
        assert!(b.predictions.values().iter().all(|&r| (r - 0.25).abs() < 1e-15));
    }

    #[test]
    fn exponential_fold_falls_back_to_linear() {
        let s = YearSeries::from_start(2000, vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = loocv_series(&s, TrendKind::Exponential).unwrap();
        // every fold except the one holding out the zero sees a zero
        assert_eq!(p.fallback_years, vec![2001, 2002, 2003, 2004]);
        assert_relative_eq!(p.predictions.values()[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn short_panel_rejected() {
        let p = panel(&[1.0, 2.0, 3.0]);
        assert!(loocv_baseline(&p, None, Variable::Yield, TrendPolicy::Fixed(TrendKind::None)).is_err());
    }
}
