//! Department-level variability and stratification by contribution to the
//! national production error.
//!
//! Each department series is predicted by the plain leave-one-out mean (no
//! trend). Departments are then grouped, least variable first, into nested
//! strata `[0, c]` whose combined error stays below `c` percent of national
//! production. The combined error of a set sums the signed yearly errors of
//! its members before taking the RMSE, so correlated shocks do not cancel out
//! the way independent ones would.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::cascade::loocv_series;
use crate::error::{Error, Result};
use crate::ingest::{CropPanel, DepartmentPanel};
use crate::scalar::{mean, Scalar};
use crate::stats::ErrorVector;
use crate::trend::TrendKind;

/// Minimum number of years in a department series.
pub const MIN_DEPARTMENT_YEARS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CropScore<T> {
    pub crop: String,
    /// Leave-one-out errors (kt).
    pub errors: ErrorVector<T>,
    /// Mean production of the department (kt).
    pub mean_production: T,
    /// RMSE in percent of the national mean production over the same years.
    pub score: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepartmentScore<T> {
    pub department: String,
    /// One entry per crop, sorted by crop.
    pub crops: Vec<CropScore<T>>,
}

/// How per-crop scores are combined into the sort key of a department.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreWeighting {
    #[default]
    Mean,
    /// Weighted by the department's mean production of each crop.
    Production,
}

impl<T: Scalar> DepartmentScore<T> {
    pub fn get(&self, crop: &str) -> Option<&CropScore<T>> {
        self.crops.iter().find(|c| c.crop == crop)
    }

    pub fn sort_key(&self, weighting: ScoreWeighting) -> T {
        if self.crops.is_empty() {
            return T::zero();
        }
        match weighting {
            ScoreWeighting::Mean => mean(&self.crops.iter().map(|c| c.score).collect::<Vec<_>>()),
            ScoreWeighting::Production => {
                let total: T = self.crops.iter().map(|c| c.mean_production).sum();
                if total <= T::zero() {
                    return T::zero();
                }
                self.crops.iter().map(|c| c.mean_production * c.score).sum::<T>() / total
            }
        }
    }
}

fn national_mean<T: Scalar>(panel: &CropPanel<T>, years: &[i32]) -> Result<T> {
    let values = years
        .iter()
        .map(|&year| panel.production().get(year).ok_or(Error::MissingYear { what: "national production", year }))
        .collect::<Result<Vec<T>>>()?;
    Ok(mean(&values))
}

fn find_crop<'a, T: Scalar>(national: &'a [CropPanel<T>], crop: &str) -> Result<&'a CropPanel<T>> {
    national
        .iter()
        .find(|p| p.crop() == crop)
        .ok_or_else(|| Error::NoOverlap(format!("crop {crop} is missing from the national panel")))
}

/// Leave-one-out errors and relative scores of every department series.
/// Output is sorted by department, crops within a department by name.
pub fn department_scores<T: Scalar>(
    departments: &[DepartmentPanel<T>],
    national: &[CropPanel<T>],
) -> Result<Vec<DepartmentScore<T>>> {
    let scored = departments
        .par_iter()
        .map(|d| {
            let n = d.production.len();
            if n < MIN_DEPARTMENT_YEARS {
                return Err(Error::TooShort { needed: MIN_DEPARTMENT_YEARS, got: n });
            }
            let loocv = loocv_series(&d.production, TrendKind::None)?;
            let errors: Vec<T> =
                loocv.predictions.values().iter().zip(d.production.values()).map(|(&p, &a)| p - a).collect();
            let reference = national_mean(find_crop(national, &d.crop)?, d.production.years())?;
            let rmse = (errors.iter().map(|&e| e * e).sum::<T>() / T::from_count(n)).sqrt();
            let score = if rmse == T::zero() { T::zero() } else { T::hundred() * rmse / reference };
            let errors = ErrorVector::new(d.production.years().to_vec(), errors)?.with_crop(d.crop.clone());
            Ok((d.department.clone(), CropScore { crop: d.crop.clone(), errors, mean_production: d.production.mean()?, score }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut by_department: BTreeMap<String, Vec<CropScore<T>>> = BTreeMap::new();
    for (department, score) in scored {
        by_department.entry(department).or_default().push(score);
    }
    Ok(by_department
        .into_iter()
        .map(|(department, mut crops)| {
            crops.sort_by(|a, b| a.crop.cmp(&b.crop));
            DepartmentScore { department, crops }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stratum<T> {
    /// Upper bound in percent; the stratum covers `]previous cutoff, cutoff]`.
    pub cutoff: T,
    /// Departments first admitted at this cutoff, in admission order.
    pub departments: Vec<String>,
    /// Per-crop combined error (percent of national production) of every
    /// department admitted up to and including this stratum.
    pub aggregate: Vec<(String, T)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stratification<T> {
    pub strata: Vec<Stratum<T>>,
    /// Department to stratum index.
    pub assignment: BTreeMap<String, usize>,
}

/// Running per-year sums of signed errors for one crop.
struct CropAccumulator<T> {
    crop: String,
    sums: BTreeMap<i32, T>,
    reference: T,
}

impl<T: Scalar> CropAccumulator<T> {
    fn with(&self, errors: Option<&ErrorVector<T>>) -> T {
        let mut sums = self.sums.clone();
        if let Some(ev) = errors {
            for (&year, &e) in ev.years.iter().zip(&ev.errors) {
                *sums.entry(year).or_insert_with(T::zero) += e;
            }
        }
        if sums.is_empty() {
            return T::zero();
        }
        let ms = sums.values().map(|&s| s * s).sum::<T>() / T::from_count(sums.len());
        T::hundred() * ms.sqrt() / self.reference
    }

    fn add(&mut self, errors: &ErrorVector<T>) {
        for (&year, &e) in errors.years.iter().zip(&errors.errors) {
            *self.sums.entry(year).or_insert_with(T::zero) += e;
        }
    }
}

/// Greedy nested stratification. Departments are visited in ascending order
/// of their sort key; for each cutoff every not-yet-assigned department is
/// admitted if the combined error of each crop stays at or below the cutoff.
/// The last cutoff takes every department still unassigned.
pub fn stratify<T: Scalar>(
    scores: &[DepartmentScore<T>],
    national: &[CropPanel<T>],
    cutoffs: &[T],
    weighting: ScoreWeighting,
) -> Result<Stratification<T>> {
    if cutoffs.is_empty() || cutoffs.windows(2).any(|w| w[0] >= w[1]) || cutoffs[0] <= T::zero() {
        return Err(Error::InvalidParameter("strata cutoffs must be positive and strictly ascending".into()));
    }
    let crops: BTreeSet<&str> = scores.iter().flat_map(|s| s.crops.iter().map(|c| c.crop.as_str())).collect();
    let mut accumulators = crops
        .into_iter()
        .map(|crop| {
            let years: BTreeSet<i32> = scores
                .iter()
                .filter_map(|s| s.get(crop))
                .flat_map(|c| c.errors.years.iter().copied())
                .collect();
            let years: Vec<i32> = years.into_iter().collect();
            let reference = national_mean(find_crop(national, crop)?, &years)?;
            Ok(CropAccumulator { crop: crop.to_string(), sums: BTreeMap::new(), reference })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<(T, &DepartmentScore<T>)> = scores.iter().map(|s| (s.sort_key(weighting), s)).collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite scores").then_with(|| a.1.department.cmp(&b.1.department)));
    let mut pending: Vec<&DepartmentScore<T>> = order.into_iter().map(|(_, s)| s).collect();

    let mut strata = Vec::with_capacity(cutoffs.len());
    let mut assignment = BTreeMap::new();
    for (k, &cutoff) in cutoffs.iter().enumerate() {
        let last = k + 1 == cutoffs.len();
        let mut admitted = Vec::new();
        let mut rest = Vec::new();
        for dept in pending {
            let fits = last || accumulators.iter().all(|acc| acc.with(dept.get(&acc.crop).map(|c| &c.errors)) <= cutoff);
            if fits {
                for acc in accumulators.iter_mut() {
                    if let Some(c) = dept.get(&acc.crop) {
                        acc.add(&c.errors);
                    }
                }
                assignment.insert(dept.department.clone(), k);
                admitted.push(dept.department.clone());
            } else {
                rest.push(dept);
            }
        }
        pending = rest;
        let aggregate = accumulators.iter().map(|acc| (acc.crop.clone(), acc.with(None))).collect();
        strata.push(Stratum { cutoff, departments: admitted, aggregate });
    }
    Ok(Stratification { strata, assignment })
}
