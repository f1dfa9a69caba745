//! Structural properties that must hold for any valid input.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;

use cropreq::cascade::{Baselines, Component, ComponentErrors, Stage, StageContext, TrendPolicy};
use cropreq::error::Error;
use cropreq::ingest::{parse_national_panel, CropPanel, CroplandSeries, Locator};
use cropreq::requirements::{grid_area_yield, grid_best_estimator, solve_requirement, RequirementQuery};

struct Case {
    panel: CropPanel<f64>,
    cropland: CroplandSeries<f64>,
    baselines: Baselines<f64>,
}

impl Case {
    fn new(seed: u64, n: usize) -> Self {
        let mut r = common::rng(seed);
        let panel = common::random_panel(&mut r, "millet", n);
        let cropland = common::random_cropland(&mut r, std::slice::from_ref(&panel));
        let baselines =
            Baselines::compute(&panel, Some(&cropland), TrendPolicy::Select { alpha: 0.01 }).unwrap();
        Case { panel, cropland, baselines }
    }

    fn ctx(&self) -> StageContext<'_, f64> {
        StageContext::new(&self.panel, Some(&self.cropland), &self.baselines)
    }
}

fn worst(ctx: &StageContext<'_, f64>, c: Component, e: f64) -> f64 {
    let cv = |s: f64| ctx.cv(c.stage(), &ComponentErrors::only(c, s)).unwrap();
    cv(e).max(cv(-e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// SEP uses only area and yield: swapping the cropland series or passing
    /// errors for the earlier components either leaves it unchanged or is refused.
    #[test]
    fn sep_ignores_cropland_and_early_errors(seed in 0u64..1000, ec in -0.5f64..0.5, ea in -0.5f64..0.5) {
        let case = Case::new(seed, 12);
        let clean = case.ctx().cv(Stage::Sep, &ComponentErrors::none()).unwrap();
        let other = common::random_cropland(&mut common::rng(seed + 7), std::slice::from_ref(&case.panel));
        let b = Baselines::compute(&case.panel, Some(&other), TrendPolicy::Select { alpha: 0.01 }).unwrap();
        let swapped = StageContext::new(&case.panel, Some(&other), &b);
        prop_assert_eq!(swapped.cv(Stage::Sep, &ComponentErrors::none()).unwrap(), clean);
        let noisy = ComponentErrors { cropland: Some(ec), area: Some(ea), yields: None };
        let refused = matches!(case.ctx().cv(Stage::Sep, &noisy), Err(Error::UnusedComponentError { .. }));
        prop_assert!(refused);
    }

    #[test]
    fn late_stages_are_exact_without_errors(seed in 0u64..1000) {
        let case = Case::new(seed, 10);
        let ctx = case.ctx();
        for stage in [Stage::Oct, Stage::Nov] {
            prop_assert!(ctx.cv(stage, &ComponentErrors::none()).unwrap() < 1e-10);
        }
    }

    #[test]
    fn worst_case_cv_grows_with_magnitude(seed in 0u64..1000, a in 0.0f64..0.5, b in 0.0f64..0.5) {
        let case = Case::new(seed, 10);
        let ctx = case.ctx();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for c in [Component::Cropland, Component::Area, Component::Yield] {
            prop_assert!(worst(&ctx, c, lo) <= worst(&ctx, c, hi) + 1e-9, "{c:?}");
        }
    }

    #[test]
    fn requirement_is_step_stable(seed in 0u64..1000, k in 1usize..5) {
        let case = Case::new(seed, 12);
        let ctx = case.ctx();
        let step = 0.005 * k as f64;
        for c in [Component::Cropland, Component::Area, Component::Yield] {
            let coarse = solve_requirement(&RequirementQuery::new(c).with_scan(step, 0.5), &ctx).unwrap();
            let fine = solve_requirement(&RequirementQuery::new(c).with_scan(step / 2.0, 0.5), &ctx).unwrap();
            let gap = (coarse.max_error.as_fraction() - fine.max_error.as_fraction()).abs();
            prop_assert!(gap <= step + 1e-12, "{c:?}: {:?} vs {:?}", coarse.max_error, fine.max_error);
        }
    }

    #[test]
    fn area_yield_grid_origin_is_nov(seed in 0u64..1000) {
        let case = Case::new(seed, 8);
        let ctx = case.ctx();
        let grid = grid_area_yield(&case.panel, 0.2, 0.05, &[]).unwrap();
        let (i, j) = grid.origin();
        let nov = ctx.cv(Stage::Nov, &ComponentErrors::none()).unwrap();
        prop_assert!((grid.cv_at(i, j).unwrap() - nov).abs() < 1e-9);
    }

    /// JUL wins on a contiguous run of cropland errors in every row, AUG on a
    /// contiguous run of area errors in every column.
    #[test]
    fn label_regions_are_contiguous(seed in 0u64..1000) {
        let case = Case::new(seed, 12);
        let grid = grid_best_estimator(&case.ctx(), 0.5, 0.05).unwrap();
        let (nx, ny) = (grid.x.len(), grid.y.len());
        let runs = |flags: Vec<bool>| flags.windows(2).filter(|w| !w[0] && w[1]).count() + usize::from(flags[0]);
        for j in 0..ny {
            let row = (0..nx).map(|i| grid.label_at(i, j) == Some(Stage::Jul)).collect();
            prop_assert!(runs(row) <= 1, "row {j}");
        }
        for i in 0..nx {
            let col = (0..ny).map(|j| grid.label_at(i, j) == Some(Stage::Aug)).collect();
            prop_assert!(runs(col) <= 1, "column {i}");
        }
    }

    /// Every data row is either accepted or blamed by exactly one error.
    #[test]
    fn validation_is_total(seed in 0u64..2000, n in 2usize..15) {
        let mut r = common::rng(seed);
        let mut text = String::from("crop,year,production_kt,area_kha,yield_tha\n");
        let mut bad: BTreeMap<u64, &str> = BTreeMap::new();
        let mut clean = Vec::new();
        for (line, t) in (2u64..).zip(0..n) {
            let year = 2000 + t as i32;
            let row = match r.gen_range(0..6) {
                0 => { bad.insert(line, "sign"); format!("rice,{year},10,-5,2") }
                1 => { bad.insert(line, "number"); format!("rice,{year},10,5,abc") }
                2 => { bad.insert(line, "fields"); format!("rice,{year},10,5") }
                _ => { clean.push(year); format!("rice,{year},10,5,2") }
            };
            text.push_str(&row);
            text.push('\n');
        }
        if let Some(&year) = clean.first() {
            if r.gen_bool(0.5) {
                bad.insert(2 + n as u64, "duplicate");
                text.push_str(&format!("rice,{year},10,5,2\n"));
            }
        }
        match parse_national_panel::<f64, _>(text.as_bytes(), false) {
            Ok(_) => prop_assert!(bad.is_empty()),
            Err(Error::Validation(report)) => {
                let mut blamed: BTreeMap<u64, usize> = BTreeMap::new();
                for issue in &report.errors {
                    if let Locator::Line(l) = issue.locator {
                        *blamed.entry(l).or_default() += 1;
                    }
                }
                prop_assert!(blamed.values().all(|&k| k == 1), "{report}");
                prop_assert_eq!(blamed.keys().collect::<Vec<_>>(), bad.keys().collect::<Vec<_>>(), "{}", report);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
