//! Correlation between crop yield and rainfall accumulated since early June.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{CropPanel, RainfallPanel};
use crate::scalar::Scalar;
use crate::stats::{pearson, CorrelationResult};

/// First decade of June.
pub const SEASON_START: u8 = 16;
/// Last decade of October.
pub const SEASON_END: u8 = 30;
pub const MIN_OVERLAP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointCorrelation<T> {
    /// Last decade included in the cumulative rainfall.
    pub decade: u8,
    pub n: usize,
    /// `None` when either series is constant over the overlapping years.
    pub r: Option<T>,
    pub p_value: Option<T>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RainfallCorrelation<T> {
    pub crop: String,
    pub endpoints: Vec<EndpointCorrelation<T>>,
}

/// Pearson r between yield and cumulative rainfall from the first decade of
/// June to each endpoint up to the end of October. Years lacking yield or any
/// decade of the window are left out of that endpoint.
pub fn rainfall_yield_correlation<T: Scalar>(
    rainfall: &RainfallPanel<T>,
    panels: &[CropPanel<T>],
    alpha: T,
) -> Result<Vec<RainfallCorrelation<T>>> {
    panels.par_iter().map(|panel| crop_correlation(rainfall, panel, alpha)).collect()
}

fn crop_correlation<T: Scalar>(rainfall: &RainfallPanel<T>, panel: &CropPanel<T>, alpha: T) -> Result<RainfallCorrelation<T>> {
    let mut endpoints = Vec::with_capacity(usize::from(SEASON_END - SEASON_START + 1));
    for decade in SEASON_START..=SEASON_END {
        let (rain, yields): (Vec<T>, Vec<T>) = panel
            .yields()
            .iter()
            .filter_map(|(year, y)| rainfall.cumulative(year, SEASON_START, decade).map(|r| (r, y)))
            .unzip();
        if rain.len() < MIN_OVERLAP {
            return Err(Error::NoOverlap(format!(
                "{}: {} year(s) with both yield and rainfall up to decade {decade}, {MIN_OVERLAP} required",
                panel.crop(),
                rain.len()
            )));
        }
        let n = rain.len();
        let endpoint = match pearson(&rain, &yields) {
            Ok(CorrelationResult { r, p_value, .. }) => {
                EndpointCorrelation { decade, n, r: Some(r), p_value: Some(p_value), significant: p_value < alpha }
            }
            Err(Error::ZeroVariance(_)) => EndpointCorrelation { decade, n, r: None, p_value: None, significant: false },
            Err(e) => return Err(e),
        };
        endpoints.push(endpoint);
    }
    Ok(RainfallCorrelation { crop: panel.crop().to_string(), endpoints })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rain(years: std::ops::Range<i32>) -> RainfallPanel<f64> {
        RainfallPanel::from_cells(years.flat_map(|y| {
            (1..=36u8).map(move |d| (y, d, ((y * 37 + i32::from(d) * 11) % 23) as f64 + 1.0))
        }))
        .unwrap()
    }

    #[test]
    fn affine_in_june_to_september_rain() {
        let r = rain(2000..2010);
        let years: Vec<i32> = (2000..2010).collect();
        // end of September is decade 27
        let yields: Vec<f64> = years.iter().map(|&y| 0.3 + 0.002 * r.cumulative(y, 16, 27).unwrap()).collect();
        let area = vec![10.0; years.len()];
        let production = yields.iter().map(|y| y * 10.0).collect();
        let panel = CropPanel::new("millet", years, production, area, yields).unwrap();
        let out = rainfall_yield_correlation(&r, &[panel], 0.01).unwrap();
        let sept = out[0].endpoints.iter().find(|e| e.decade == 27).unwrap();
        assert_relative_eq!(sept.r.unwrap(), 1.0, epsilon = 1e-12);
        assert!(sept.significant);
        assert_eq!(out[0].endpoints.len(), 15);
        assert!(out[0].endpoints.iter().all(|e| e.r.is_none_or(|r| r.abs() <= 1.0)));
    }

    #[test]
    fn too_little_overlap() {
        let r = rain(2000..2004);
        let panel = CropPanel::new("rice", (2000..2010).collect(), vec![2.0; 10], vec![1.0; 10], vec![2.0; 10]).unwrap();
        assert!(matches!(rainfall_yield_correlation(&r, &[panel], 0.01), Err(Error::NoOverlap(_))));
    }

    #[test]
    fn constant_yield_gives_undefined_r() {
        let r = rain(2000..2008);
        let panel = CropPanel::new("rice", (2000..2008).collect(), vec![2.0; 8], vec![1.0; 8], vec![2.0; 8]).unwrap();
        let out = rainfall_yield_correlation(&r, &[panel], 0.01).unwrap();
        assert!(out[0].endpoints.iter().all(|e| e.r.is_none() && !e.significant));
    }
}
