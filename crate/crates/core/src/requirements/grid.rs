use super::isoline::{contour, crossings_at_x};
use crate::cascade::{Component, ComponentErrors, Stage, StageContext};
use crate::error::{Error, Result};
use crate::ingest::CropPanel;
use crate::scalar::Scalar;

/// Symmetric axis of relative errors `k · step` for `k = -n..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis<T> {
    pub component: Component,
    pub values: Vec<T>,
}

impl<T: Scalar> Axis<T> {
    pub fn symmetric(component: Component, range: T, step: T) -> Result<Self> {
        if !(step > T::zero() && range >= step && range < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "grid axis needs 0 < step <= range < 1 (step {step}, range {range})"
            )));
        }
        let n = (range / step + T::lit(1e-9)).floor().to_i64().expect("finite grid size");
        let values = (-n..=n).map(|k| T::from_i64(k).expect("grid index") * step).collect();
        Ok(Self { component, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridCells<T> {
    /// CV(RMSE) in percent.
    Cv(Vec<T>),
    /// Stage giving the lowest CV(RMSE).
    Label(Vec<Stage>),
}

/// Named threshold to extract an isoline at.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold<T> {
    pub name: String,
    pub level: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Isoline<T> {
    pub name: String,
    pub level: T,
    /// Polylines of (x, y) points.
    pub lines: Vec<Vec<(T, T)>>,
}

impl<T: Scalar> Isoline<T> {
    /// Smallest positive y where the isoline crosses `x = x0`.
    pub fn positive_intercept_at_x(&self, x0: T) -> Option<T> {
        crossings_at_x(&self.lines, x0).into_iter().find(|&y| y > T::zero())
    }
}

/// Raster over two error axes. Cells are row-major with the x axis outer:
/// cell `(i, j)` is at index `i * y.len() + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorGrid<T> {
    pub crop: String,
    pub x: Axis<T>,
    pub y: Axis<T>,
    pub cells: GridCells<T>,
    pub isolines: Vec<Isoline<T>>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> ErrorGrid<T> {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.y.len() + j
    }

    pub fn cv_at(&self, i: usize, j: usize) -> Option<T> {
        match &self.cells {
            GridCells::Cv(v) => Some(v[self.index(i, j)]),
            GridCells::Label(_) => None,
        }
    }

    pub fn label_at(&self, i: usize, j: usize) -> Option<Stage> {
        match &self.cells {
            GridCells::Label(v) => Some(v[self.index(i, j)]),
            GridCells::Cv(_) => None,
        }
    }

    /// Index of the zero-error node on an axis.
    pub fn origin(&self) -> (usize, usize) {
        (self.x.len() / 2, self.y.len() / 2)
    }
}

/// Best of MAY, JUL(e_c) and AUG(e_a) at every (e_c, e_a) node; x is the
/// cropland error, y the crop-area error. Ties go to the later stage.
pub fn grid_best_estimator<T: Scalar>(ctx: &StageContext<'_, T>, range: T, step: T) -> Result<ErrorGrid<T>> {
    if ctx.cropland.is_none() || ctx.baselines.ratio.is_none() {
        return Err(Error::MissingCropland("the cropland/area label grid"));
    }
    let x = Axis::symmetric(Component::Cropland, range, step)?;
    let y = Axis::symmetric(Component::Area, range, step)?;
    let may = ctx.cv(Stage::May, &ComponentErrors::none())?;
    let jul = x
        .values
        .iter()
        .map(|&e| ctx.cv(Stage::Jul, &ComponentErrors::only(Component::Cropland, e)))
        .collect::<Result<Vec<T>>>()?;
    let aug = y
        .values
        .iter()
        .map(|&e| ctx.cv(Stage::Aug, &ComponentErrors::only(Component::Area, e)))
        .collect::<Result<Vec<T>>>()?;
    let mut labels = Vec::with_capacity(x.len() * y.len());
    for &j_cv in &jul {
        for &a_cv in &aug {
            let mut best = (Stage::May, may);
            for candidate in [(Stage::Jul, j_cv), (Stage::Aug, a_cv)] {
                if candidate.1 <= best.1 {
                    best = candidate;
                }
            }
            labels.push(best.0);
        }
    }
    Ok(ErrorGrid {
        crop: ctx.panel.crop().to_string(),
        x,
        y,
        cells: GridCells::Label(labels),
        isolines: Vec::new(),
        warnings: Vec::new(),
    })
}

/// CV(RMSE) of a(1 + e_a) · y(1 + e_y) against production at every node; x is
/// the area error, y the yield error. Isolines are extracted at `thresholds`.
pub fn grid_area_yield<T: Scalar>(
    panel: &CropPanel<T>,
    range: T,
    step: T,
    thresholds: &[Threshold<T>],
) -> Result<ErrorGrid<T>> {
    let x = Axis::symmetric(Component::Area, range, step)?;
    let y = Axis::symmetric(Component::Yield, range, step)?;
    let mut warnings = Vec::new();
    let gap = panel.max_identity_gap();
    if gap > T::lit(1e-6) {
        warnings.push(format!(
            "{}: production differs from area × yield by up to {:.4}%",
            panel.crop(),
            (gap * T::hundred()).as_f64()
        ));
    }
    let production = panel.production().values();
    let mean = panel.production().mean()?;
    let n = T::from_count(production.len());
    let one = T::one();
    let mut cells = Vec::with_capacity(x.len() * y.len());
    for &ea in &x.values {
        for &ey in &y.values {
            let ss: T = production
                .iter()
                .zip(panel.area().values())
                .zip(panel.yields().values())
                .map(|((&p, &a), &yl)| {
                    let err = a * (one + ea) * yl * (one + ey) - p;
                    err * err
                })
                .sum();
            cells.push(T::hundred() * (ss / n).sqrt() / mean);
        }
    }
    let isolines = thresholds
        .iter()
        .map(|t| Isoline { name: t.name.clone(), level: t.level, lines: contour(&x.values, &y.values, &cells, t.level) })
        .collect();
    Ok(ErrorGrid { crop: panel.crop().to_string(), x, y, cells: GridCells::Cv(cells), isolines, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{Baselines, TrendPolicy};
    use crate::ingest::CroplandSeries;

    fn panel() -> CropPanel<f64> {
        let area = vec![10.0, 14.0, 9.0, 12.0, 11.0, 13.0, 8.0, 15.0];
        let yields = vec![1.1, 0.8, 1.4, 1.0, 0.9, 1.3, 1.2, 0.7];
        let production = area.iter().zip(&yields).map(|(a, y)| a * y).collect();
        CropPanel::new("x", (2000..2008).collect(), production, area, yields).unwrap()
    }

    #[test]
    fn axis_sizes() {
        let a: Axis<f64> = Axis::symmetric(Component::Area, 0.5, 0.01).unwrap();
        assert_eq!(a.len(), 101);
        assert_eq!(a.values[50], 0.0);
        assert!((a.values[100] - 0.5).abs() < 1e-15);
        assert!(Axis::<f64>::symmetric(Component::Area, 1.0, 0.01).is_err());
        assert!(Axis::<f64>::symmetric(Component::Area, 0.5, 0.0).is_err());
    }

    #[test]
    fn compensation_beats_multiplication() {
        let p = panel();
        let g = grid_area_yield(&p, 0.1, 0.1, &[]).unwrap();
        let v = p.production().values();
        let q = (v.iter().map(|x| x * x).sum::<f64>() / 8.0).sqrt() / (v.iter().sum::<f64>() / 8.0);
        let (i0, j0) = g.origin();
        assert!(g.cv_at(i0, j0).unwrap() < 1e-12);
        let comp = g.cv_at(2, 0).unwrap(); // (+0.1, -0.1)
        let mult = g.cv_at(2, 2).unwrap(); // (+0.1, +0.1)
        assert!((comp - 100.0 * 0.01 * q).abs() < 1e-9);
        assert!((mult - 100.0 * 0.21 * q).abs() < 1e-9);
        assert!(mult >= comp);
        assert!(g.warnings.is_empty());
    }

    #[test]
    fn label_grid_origin_prefers_perfect_area() {
        let area = vec![10.0, 14.0, 9.0, 12.0, 11.0, 13.0];
        let production = area.iter().map(|a| a * 1.5).collect();
        let p = CropPanel::new("x", (2000..2006).collect(), production, area, vec![1.5; 6]).unwrap();
        let c = CroplandSeries::from_panels(&[p.clone(), p.scaled(1.7)]).unwrap();
        let b = Baselines::compute(&p, Some(&c), TrendPolicy::Select { alpha: 0.01 }).unwrap();
        let ctx = StageContext::new(&p, Some(&c), &b);
        let g = grid_best_estimator(&ctx, 0.5, 0.05).unwrap();
        let (i0, j0) = g.origin();
        // cropland proportional to area: JUL and AUG tie at the origin, AUG wins the tie
        assert_eq!(g.label_at(i0, j0), Some(Stage::Aug));
        assert_eq!(g.x.len() * g.y.len(), 21 * 21);
        let no_cropland = Baselines::compute(&p, None, TrendPolicy::Select { alpha: 0.01 }).unwrap();
        assert!(grid_best_estimator(&StageContext::new(&p, None, &no_cropland), 0.5, 0.05).is_err());
    }
}
