use super::{Baselines, Component, Stage};
use crate::error::{Error, Result};
use crate::ingest::{CropPanel, CroplandSeries};
use crate::scalar::Scalar;
use crate::series::YearSeries;
use crate::stats::cv_rmse_of;

/// Signed relative biases of the early estimators, e.g. `0.1` = 10 % over.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComponentErrors<T> {
    pub cropland: Option<T>,
    pub area: Option<T>,
    pub yields: Option<T>,
}

impl<T: Scalar> ComponentErrors<T> {
    pub fn none() -> Self {
        Self { cropland: None, area: None, yields: None }
    }

    pub fn only(component: Component, e: T) -> Self {
        let mut errors = Self::none();
        match component {
            Component::Cropland => errors.cropland = Some(e),
            Component::Area => errors.area = Some(e),
            Component::Yield => errors.yields = Some(e),
        }
        errors
    }

    pub fn get(&self, component: Component) -> Option<T> {
        match component {
            Component::Cropland => self.cropland,
            Component::Area => self.area,
            Component::Yield => self.yields,
        }
    }
}

/// Observed values of one crop-year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropYearInputs<T> {
    pub year: i32,
    pub area: T,
    pub yields: T,
    pub cropland: Option<T>,
}

/// Baseline predictions of one crop-year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineValues<T> {
    pub production: T,
    pub yields: T,
    pub ratio: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Input {
    Production,
    Cropland,
    Ratio,
    Area,
    Yield,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source<T> {
    Observed,
    Baseline,
    /// Observed value times (1 + error).
    Biased(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageEstimate<T> {
    pub crop: String,
    pub year: i32,
    pub stage: Stage,
    /// Production estimate, kt.
    pub value: T,
    pub components: Vec<(Input, Source<T>)>,
}

/// Production estimate of one crop-year at `stage`.
///
/// Only the error of the component the stage relies on may be supplied
/// (cropland at JUL, area at AUG, yield at OCT); an error for any other
/// component is rejected rather than ignored.
pub fn stage_estimate<T: Scalar>(
    crop: &str,
    stage: Stage,
    inputs: &CropYearInputs<T>,
    baselines: &BaselineValues<T>,
    errors: &ComponentErrors<T>,
) -> Result<StageEstimate<T>> {
    for component in Component::ALL {
        let Some(e) = errors.get(component) else { continue };
        if stage.biased_component() != Some(component) {
            return Err(Error::UnusedComponentError { stage: stage.label(), component: component.as_str() });
        }
        if e.is_nan() || e.abs() >= T::one() {
            return Err(Error::ErrorOutOfRange(e.as_f64()));
        }
    }
    let bias = |c: Component| errors.get(c).unwrap_or_else(T::zero);
    let biased_source = |c: Component| errors.get(c).map_or(Source::Observed, Source::Biased);
    let one = T::one();

    let (value, components) = match stage {
        Stage::May => (baselines.production, vec![(Input::Production, Source::Baseline)]),
        Stage::Jul => {
            let c = inputs.cropland.ok_or(Error::MissingCropland("the JUL stage"))?;
            let ratio = baselines.ratio.ok_or(Error::MissingCropland("the JUL ratio baseline"))?;
            (
                c * (one + bias(Component::Cropland)) * ratio * baselines.yields,
                vec![
                    (Input::Cropland, biased_source(Component::Cropland)),
                    (Input::Ratio, Source::Baseline),
                    (Input::Yield, Source::Baseline),
                ],
            )
        }
        Stage::Aug => (
            inputs.area * (one + bias(Component::Area)) * baselines.yields,
            vec![(Input::Area, biased_source(Component::Area)), (Input::Yield, Source::Baseline)],
        ),
        Stage::Sep => {
            (inputs.area * baselines.yields, vec![(Input::Area, Source::Observed), (Input::Yield, Source::Baseline)])
        }
        Stage::Oct => (
            inputs.area * inputs.yields * (one + bias(Component::Yield)),
            vec![(Input::Area, Source::Observed), (Input::Yield, biased_source(Component::Yield))],
        ),
        Stage::Nov => {
            (inputs.area * inputs.yields, vec![(Input::Area, Source::Observed), (Input::Yield, Source::Observed)])
        }
    };
    if value.is_nan() || value <= T::zero() {
        return Err(Error::NonPositiveEstimate { stage: stage.label(), year: inputs.year, value: value.as_f64() });
    }
    Ok(StageEstimate { crop: crop.to_string(), year: inputs.year, stage, value, components })
}

/// Everything needed to evaluate the stages of one crop.
#[derive(Debug, Clone, Copy)]
pub struct StageContext<'a, T> {
    pub panel: &'a CropPanel<T>,
    pub cropland: Option<&'a CroplandSeries<T>>,
    pub baselines: &'a Baselines<T>,
}

impl<'a, T: Scalar> StageContext<'a, T> {
    pub fn new(panel: &'a CropPanel<T>, cropland: Option<&'a CroplandSeries<T>>, baselines: &'a Baselines<T>) -> Self {
        Self { panel, cropland, baselines }
    }

    fn year_inputs(&self, i: usize) -> (CropYearInputs<T>, BaselineValues<T>) {
        let year = self.panel.years()[i];
        let inputs = CropYearInputs {
            year,
            area: self.panel.area().values()[i],
            yields: self.panel.yields().values()[i],
            cropland: self.cropland.and_then(|c| c.get(year)),
        };
        let b = self.baselines;
        let baselines = BaselineValues {
            production: b.production.predictions.values()[i],
            yields: b.yields.predictions.values()[i],
            ratio: b.ratio.as_ref().map(|r| r.predictions.values()[i]),
        };
        (inputs, baselines)
    }

    /// Stage estimates for every year of the panel.
    pub fn estimates(&self, stage: Stage, errors: &ComponentErrors<T>) -> Result<Vec<StageEstimate<T>>> {
        (0..self.panel.len())
            .map(|i| {
                let (inputs, baselines) = self.year_inputs(i);
                stage_estimate(self.panel.crop(), stage, &inputs, &baselines, errors)
            })
            .collect()
    }

    pub fn predictions(&self, stage: Stage, errors: &ComponentErrors<T>) -> Result<YearSeries<T>> {
        let values = self.estimates(stage, errors)?.into_iter().map(|e| e.value).collect();
        YearSeries::new(self.panel.years().to_vec(), values)
    }

    /// CV(RMSE) in percent of the stage's predictions against actual production.
    pub fn cv(&self, stage: Stage, errors: &ComponentErrors<T>) -> Result<T> {
        cv_rmse_of(&self.predictions(stage, errors)?, self.panel.production())
    }
}

pub fn stage_cv<T: Scalar>(ctx: &StageContext<'_, T>, stage: Stage, errors: &ComponentErrors<T>) -> Result<T> {
    ctx.cv(stage, errors)
}

/// Components whose early estimator is assumed exact in a cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerfectComponents {
    pub cropland: bool,
    pub area: bool,
    pub yields: bool,
}

impl PerfectComponents {
    pub fn all() -> Self {
        Self { cropland: true, area: true, yields: true }
    }

    pub fn none() -> Self {
        Self { cropland: false, area: false, yields: false }
    }

    pub fn contains(&self, component: Component) -> bool {
        match component {
            Component::Cropland => self.cropland,
            Component::Area => self.area,
            Component::Yield => self.yields,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageCv<T> {
    pub stage: Stage,
    pub cv: T,
    /// Lowest CV among this stage and every earlier one in the report.
    pub best: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeReport<T> {
    pub crop: String,
    pub stages: Vec<StageCv<T>>,
}

impl<T: Scalar> CascadeReport<T> {
    pub fn get(&self, stage: Stage) -> Option<&StageCv<T>> {
        self.stages.iter().find(|s| s.stage == stage)
    }
}

/// CV of every stage available with the given perfect components, plus the
/// best-available path (running minimum in calendar order). Stages whose
/// early estimator is not perfect, and JUL without cropland, are left out.
pub fn cascade<T: Scalar>(ctx: &StageContext<'_, T>, perfect: PerfectComponents) -> Result<CascadeReport<T>> {
    let mut stages = Vec::with_capacity(Stage::ALL.len());
    let mut best = T::infinity();
    for stage in Stage::ALL {
        let errors = match stage.biased_component() {
            Some(c) if !perfect.contains(c) => continue,
            Some(Component::Cropland) if ctx.cropland.is_none() || ctx.baselines.ratio.is_none() => continue,
            Some(c) => ComponentErrors::only(c, T::zero()),
            None => ComponentErrors::none(),
        };
        let cv = ctx.cv(stage, &errors)?;
        best = best.min(cv);
        stages.push(StageCv { stage, cv, best });
    }
    Ok(CascadeReport { crop: ctx.panel.crop().to_string(), stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::TrendPolicy;
    use approx::assert_relative_eq;

    fn inputs() -> (CropYearInputs<f64>, BaselineValues<f64>) {
        (
            CropYearInputs { year: 2000, area: 50.0, yields: 2.0, cropland: Some(1000.0) },
            BaselineValues { production: 90.0, yields: 1.2, ratio: Some(0.3) },
        )
    }

    #[test]
    fn stage_formulas() {
        let (i, b) = inputs();
        let none = ComponentErrors::none();
        let v = |stage, e: &ComponentErrors<f64>| stage_estimate("x", stage, &i, &b, e).unwrap().value;
        assert_eq!(v(Stage::May, &none), 90.0);
        assert_relative_eq!(v(Stage::Jul, &ComponentErrors::only(Component::Cropland, 0.10)), 396.0, epsilon = 1e-12);
        assert_relative_eq!(v(Stage::Aug, &ComponentErrors::only(Component::Area, -0.5)), 30.0, epsilon = 1e-12);
        assert_eq!(v(Stage::Sep, &none), 60.0);
        assert_eq!(v(Stage::Oct, &ComponentErrors::only(Component::Yield, 0.0)), v(Stage::Nov, &none));
        assert_eq!(v(Stage::Nov, &none), 100.0);
    }

    #[test]
    fn composition_provenance() {
        let (i, b) = inputs();
        let est = stage_estimate("x", Stage::Jul, &i, &b, &ComponentErrors::only(Component::Cropland, 0.1)).unwrap();
        assert_eq!(est.components[0], (Input::Cropland, Source::Biased(0.1)));
        assert_eq!(est.components[1], (Input::Ratio, Source::Baseline));
    }

    #[test]
    fn misuse_is_rejected() {
        let (mut i, b) = inputs();
        let err = stage_estimate("x", Stage::Sep, &i, &b, &ComponentErrors::only(Component::Yield, 0.1)).unwrap_err();
        assert!(matches!(err, Error::UnusedComponentError { stage: "SEP", component: "yield" }));
        let err = stage_estimate("x", Stage::Aug, &i, &b, &ComponentErrors::only(Component::Area, 1.0)).unwrap_err();
        assert!(matches!(err, Error::ErrorOutOfRange(_)));
        i.cropland = None;
        let err = stage_estimate("x", Stage::Jul, &i, &b, &ComponentErrors::none()).unwrap_err();
        assert!(matches!(err, Error::MissingCropland(_)));
    }

    fn constant_yield_panel() -> CropPanel<f64> {
        let area = vec![10.0, 14.0, 9.0, 12.0, 11.0, 13.0];
        let production = area.iter().map(|a| a * 1.5).collect();
        CropPanel::new("x", (2000..2006).collect(), production, area, vec![1.5; 6]).unwrap()
    }

    #[test]
    fn sep_with_constant_yield_and_exact_nov() {
        let p = constant_yield_panel();
        let c = CroplandSeries::from_panels(&[p.clone(), p.scaled(2.0)]).unwrap();
        let b = Baselines::compute(&p, Some(&c), TrendPolicy::Select { alpha: 0.01 }).unwrap();
        let ctx = StageContext::new(&p, Some(&c), &b);
        assert!(ctx.cv(Stage::Sep, &ComponentErrors::none()).unwrap() < 1e-12);
        assert!(ctx.cv(Stage::Nov, &ComponentErrors::none()).unwrap() < 1e-12);
        let report = cascade(&ctx, PerfectComponents::all()).unwrap();
        assert_eq!(report.stages.len(), 6);
        assert!(report.stages.windows(2).all(|w| w[1].best <= w[0].best));
        assert_eq!(report.stages.last().unwrap().best, report.get(Stage::Nov).unwrap().cv);
        // JUL with cropland exactly 3 x area is exact as well
        assert!(report.get(Stage::Jul).unwrap().cv < 1e-12);
    }

    #[test]
    fn cascade_skips_imperfect_components() {
        let p = constant_yield_panel();
        let b = Baselines::compute(&p, None, TrendPolicy::Select { alpha: 0.01 }).unwrap();
        let ctx = StageContext::new(&p, None, &b);
        let report = cascade(&ctx, PerfectComponents { cropland: true, area: false, yields: true }).unwrap();
        let stages: Vec<Stage> = report.stages.iter().map(|s| s.stage).collect();
        assert_eq!(stages, vec![Stage::May, Stage::Sep, Stage::Oct, Stage::Nov]);
    }
}
