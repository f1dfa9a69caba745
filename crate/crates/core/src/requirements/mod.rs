//! Accuracy requirements of early estimators.
//!
//! An early estimator of cropland, crop area or crop yield is worth using
//! only while the stage it feeds (JUL, AUG, OCT) keeps a CV(RMSE) no higher
//! than the historical baseline it replaces (MAY for cropland and area, SEP
//! for yield). The requirement is the largest constant relative bias for
//! which that holds, taking the worse of over- and underestimation.

mod distribution;
mod grid;
pub mod isoline;

use std::fmt;

pub use distribution::{error_distributions, ErrorDistribution};
pub use grid::{grid_area_yield, grid_best_estimator, Axis, ErrorGrid, GridCells, Isoline, Threshold};

use crate::cascade::{Component, ComponentErrors, Stage, StageContext};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignPolicy {
    WorstCase,
    OverOnly,
    UnderOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Over,
    Under,
}

impl Sign {
    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Over => "over",
            Sign::Under => "under",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequirementQuery<T> {
    pub component: Component,
    pub baseline_stage: Stage,
    pub sign_policy: SignPolicy,
    /// Largest relative error scanned (fraction).
    pub search_cap: T,
    /// Scan increment (fraction).
    pub step: T,
}

impl<T: Scalar> RequirementQuery<T> {
    /// Worst-case query against the usual baseline, 0.5 % steps up to 50 %.
    pub fn new(component: Component) -> Self {
        Self {
            component,
            baseline_stage: component.baseline_stage(),
            sign_policy: SignPolicy::WorstCase,
            search_cap: T::lit(0.5),
            step: T::lit(0.005),
        }
    }

    pub fn with_scan(mut self, step: T, search_cap: T) -> Self {
        self.step = step;
        self.search_cap = search_cap;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > T::zero() && self.step <= self.search_cap && self.search_cap <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "requirement scan needs 0 < step <= cap <= 1 (step {}, cap {})",
                self.step, self.search_cap
            )));
        }
        let expected = self.component.baseline_stage();
        if self.baseline_stage != expected {
            return Err(Error::InvalidPairing {
                component: self.component.as_str(),
                expected: expected.label(),
                got: self.baseline_stage.label(),
            });
        }
        Ok(())
    }
}

/// Maximum tolerable error, in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxError<T> {
    Percent(T),
    /// Even the smallest scanned error loses against the baseline.
    Useless,
    /// Every scanned error up to the cap (percent) still beats the baseline.
    AboveCap(T),
}

impl<T: Scalar> MaxError<T> {
    /// Fraction to plug back into an estimator: 0 when useless, the cap when above it.
    pub fn as_fraction(&self) -> T {
        match *self {
            MaxError::Percent(p) | MaxError::AboveCap(p) => p / T::hundred(),
            MaxError::Useless => T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequirementResult<T> {
    pub crop: String,
    pub component: Component,
    pub baseline_stage: Stage,
    pub baseline_cv: T,
    pub max_error: MaxError<T>,
    /// Sign of the error that limits the requirement.
    pub binding_sign: Sign,
}

/// Worst CV over the signs allowed by `policy` at magnitude `e`, with its sign.
pub(crate) fn worst_cv<T: Scalar>(
    ctx: &StageContext<'_, T>,
    component: Component,
    policy: SignPolicy,
    e: T,
) -> Result<(T, Sign)> {
    let cv = |signed: T| ctx.cv(component.stage(), &ComponentErrors::only(component, signed));
    Ok(match policy {
        SignPolicy::OverOnly => (cv(e)?, Sign::Over),
        SignPolicy::UnderOnly => (cv(-e)?, Sign::Under),
        SignPolicy::WorstCase => {
            let (over, under) = (cv(e)?, cv(-e)?);
            if over >= under {
                (over, Sign::Over)
            } else {
                (under, Sign::Under)
            }
        }
    })
}

/// Scans e = step, 2·step, … up to the cap and returns the last error before
/// the worst-case CV first exceeds the baseline CV.
pub fn solve_requirement<T: Scalar>(q: &RequirementQuery<T>, ctx: &StageContext<'_, T>) -> Result<RequirementResult<T>> {
    q.validate()?;
    let baseline_cv = ctx.cv(q.baseline_stage, &ComponentErrors::none())?;
    let steps = (q.search_cap / q.step + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    let step_pct = q.step * T::hundred();
    let mut last_ok: Option<(usize, Sign)> = None;
    let mut outcome = None;
    for k in 1..=steps {
        let e = T::from_count(k) * q.step;
        if e >= T::one() {
            break;
        }
        let (cv, sign) = worst_cv(ctx, q.component, q.sign_policy, e)?;
        if cv > baseline_cv {
            outcome = Some(match last_ok {
                None => (MaxError::Useless, sign),
                Some((ok, _)) => (MaxError::Percent(T::from_count(ok) * step_pct), sign),
            });
            break;
        }
        last_ok = Some((k, sign));
    }
    let (max_error, binding_sign) = match (outcome, last_ok) {
        (Some(o), _) => o,
        (None, Some((_, sign))) => (MaxError::AboveCap(q.search_cap * T::hundred()), sign),
        (None, None) => return Err(Error::InvalidParameter("requirement scan has no steps".into())),
    };
    Ok(RequirementResult {
        crop: ctx.panel.crop().to_string(),
        component: q.component,
        baseline_stage: q.baseline_stage,
        baseline_cv,
        max_error,
        binding_sign,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{Baselines, TrendPolicy};
    use crate::ingest::{CropPanel, CroplandSeries};

    fn panel() -> CropPanel<f64> {
        let area = vec![10.0, 14.0, 9.0, 12.0, 11.0, 13.0, 8.0, 15.0];
        let yields = vec![1.1, 0.8, 1.4, 1.0, 0.9, 1.3, 1.2, 0.7];
        let production = area.iter().zip(&yields).map(|(a, y)| a * y).collect();
        CropPanel::new("x", (2000..2008).collect(), production, area, yields).unwrap()
    }

    #[test]
    fn perfect_baseline_cannot_be_beaten() {
        let area = vec![10.0, 14.0, 9.0, 12.0, 11.0];
        let production = area.iter().map(|a| a * 2.0).collect();
        let p = CropPanel::new("x", (2000..2005).collect(), production, area, vec![2.0; 5]).unwrap();
        let b = Baselines::compute(&p, None, TrendPolicy::Select { alpha: 0.01 }).unwrap();
        let ctx = StageContext::new(&p, None, &b);
        let r = solve_requirement(&RequirementQuery::new(Component::Yield), &ctx).unwrap();
        assert_eq!(r.max_error, MaxError::Useless);
        assert!(r.baseline_cv < 1e-12);
    }

    #[test]
    fn invariant_at_the_solution() {
        let p = panel();
        let c = CroplandSeries::from_panels(&[p.clone(), p.scaled(2.5)]).unwrap();
        let b = Baselines::compute(&p, Some(&c), TrendPolicy::Select { alpha: 0.01 }).unwrap();
        let ctx = StageContext::new(&p, Some(&c), &b);
        for component in Component::ALL {
            let q = RequirementQuery::new(component);
            let r = solve_requirement(&q, &ctx).unwrap();
            if let MaxError::Percent(pct) = r.max_error {
                let e = pct / 100.0;
                let (at, _) = worst_cv(&ctx, component, SignPolicy::WorstCase, e).unwrap();
                let (next, sign) = worst_cv(&ctx, component, SignPolicy::WorstCase, e + q.step).unwrap();
                assert!(at <= r.baseline_cv && next > r.baseline_cv, "{component}: {at} {next} {}", r.baseline_cv);
                assert_eq!(sign, r.binding_sign);
            }
        }
    }

    #[test]
    fn yield_requirement_closed_form() {
        // OCT CV is |e|·Q under exact identity, so the requirement is floor(SEP / Q) on the step grid
        let p = panel();
        let b = Baselines::compute(&p, None, TrendPolicy::Select { alpha: 0.01 }).unwrap();
        let ctx = StageContext::new(&p, None, &b);
        let sep = ctx.cv(Stage::Sep, &ComponentErrors::none()).unwrap();
        let values = p.production().values();
        let n = values.len() as f64;
        let q = (values.iter().map(|v| v * v).sum::<f64>() / n).sqrt() / (values.iter().sum::<f64>() / n);
        let r = solve_requirement(&RequirementQuery::new(Component::Yield), &ctx).unwrap();
        let expected = (sep / (100.0 * q) / 0.005 + 1e-9).floor() * 0.5;
        match r.max_error {
            MaxError::Percent(pct) => assert!((pct - expected).abs() < 1e-9, "{pct} vs {expected}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pairing_and_scan_validation() {
        let p = panel();
        let b = Baselines::compute(&p, None, TrendPolicy::Select { alpha: 0.01 }).unwrap();
        let ctx = StageContext::new(&p, None, &b);
        let mut q = RequirementQuery::new(Component::Yield);
        q.baseline_stage = Stage::May;
        assert!(matches!(solve_requirement(&q, &ctx), Err(Error::InvalidPairing { .. })));
        let q = RequirementQuery::new(Component::Area).with_scan(0.6, 0.5);
        assert!(matches!(solve_requirement(&q, &ctx), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn above_cap_when_baseline_is_poor() {
        // volatile area with a constant yield: MAY is poor, AUG degrades slowly
        let area = vec![10.0, 30.0, 5.0, 25.0, 8.0, 40.0];
        let yields = vec![1.0; 6];
        let production = area.iter().zip(&yields).map(|(a, y)| a * y).collect();
        let p = CropPanel::new("x", (2000..2006).collect(), production, area, yields).unwrap();
        let b = Baselines::compute(&p, None, TrendPolicy::Fixed(crate::trend::TrendKind::None)).unwrap();
        let ctx = StageContext::new(&p, None, &b);
        let q = RequirementQuery::new(Component::Area).with_scan(0.01, 0.2);
        let r = solve_requirement(&q, &ctx).unwrap();
        assert_eq!(r.max_error, MaxError::AboveCap(20.0));
    }
}
