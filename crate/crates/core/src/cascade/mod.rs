//! Calendar-ordered production estimators and their leave-one-out errors.
//!
//! | stage | estimate                                   |
//! |-------|--------------------------------------------|
//! | MAY   | historical baseline of production           |
//! | JUL   | ĉ · baseline(area/cropland) · baseline(yield) |
//! | AUG   | â · baseline(yield)                         |
//! | SEP   | a · baseline(yield)                         |
//! | OCT   | a · ŷ                                       |
//! | NOV   | a · y                                       |
//!
//! Baselines are leave-one-out predictions: each year is predicted from all
//! other years. Early estimators ĉ, â and ŷ are modelled as the true value
//! with a constant relative bias.

mod baseline;
mod stage;

use std::fmt;
use std::str::FromStr;

pub use baseline::{loocv_baseline, loocv_series, BaselinePredictor, Baselines, LoocvSeries, TrendPolicy};
pub use stage::{
    cascade, stage_cv, stage_estimate, BaselineValues, CascadeReport, ComponentErrors, CropYearInputs, Input,
    PerfectComponents, Source, StageContext, StageCv, StageEstimate,
};

use crate::error::Error;

/// Point of the agricultural calendar at which an estimator becomes available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    May,
    Jul,
    Aug,
    Sep,
    Oct,
    Nov,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::May, Stage::Jul, Stage::Aug, Stage::Sep, Stage::Oct, Stage::Nov];

    pub fn label(self) -> &'static str {
        match self {
            Stage::May => "MAY",
            Stage::Jul => "JUL",
            Stage::Aug => "AUG",
            Stage::Sep => "SEP",
            Stage::Oct => "OCT",
            Stage::Nov => "NOV",
        }
    }

    /// Component whose early estimator this stage relies on, if any.
    pub fn biased_component(self) -> Option<Component> {
        match self {
            Stage::Jul => Some(Component::Cropland),
            Stage::Aug => Some(Component::Area),
            Stage::Oct => Some(Component::Yield),
            _ => None,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Stage::ALL
            .into_iter()
            .find(|st| st.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown stage '{s}'")))
    }
}

/// Series a baseline predictor is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    Production,
    Area,
    Yield,
    /// Crop area over total cropland.
    Ratio,
}

impl Variable {
    pub fn as_str(self) -> &'static str {
        match self {
            Variable::Production => "production",
            Variable::Area => "area",
            Variable::Yield => "yield",
            Variable::Ratio => "ratio",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Quantity an early estimator measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    Cropland,
    Area,
    Yield,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Cropland, Component::Area, Component::Yield];

    pub fn as_str(self) -> &'static str {
        match self {
            Component::Cropland => "cropland",
            Component::Area => "area",
            Component::Yield => "yield",
        }
    }

    /// Stage at which an estimator of this component is used.
    pub fn stage(self) -> Stage {
        match self {
            Component::Cropland => Stage::Jul,
            Component::Area => Stage::Aug,
            Component::Yield => Stage::Oct,
        }
    }

    /// Stage the estimator has to beat to be worth using.
    pub fn baseline_stage(self) -> Stage {
        match self {
            Component::Cropland | Component::Area => Stage::May,
            Component::Yield => Stage::Sep,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_order_and_labels() {
        let mut shuffled = [Stage::Nov, Stage::May, Stage::Sep, Stage::Jul, Stage::Oct, Stage::Aug];
        shuffled.sort();
        assert_eq!(shuffled, Stage::ALL);
        for s in Stage::ALL {
            assert_eq!(s.label().parse::<Stage>().unwrap(), s);
        }
        assert!("DEC".parse::<Stage>().is_err());
    }
}
