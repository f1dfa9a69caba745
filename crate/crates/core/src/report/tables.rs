//! One renderer per analysis. Every renderer returns finished file contents;
//! nothing touches the disk here.

use rayon::prelude::*;

use super::format::{fmt_sig, Table};
use super::RunConfig;
use crate::cascade::{cascade, Baselines, Component, ComponentErrors, PerfectComponents, Stage, StageContext};
use crate::error::Result;
use crate::ingest::{CropPanel, DepartmentPanel, NationalData, RainfallPanel};
use crate::rainfall::rainfall_yield_correlation;
use crate::requirements::{
    error_distributions, grid_area_yield, grid_best_estimator, solve_requirement, GridCells, MaxError,
    RequirementQuery, Threshold,
};
use crate::spatial::{department_scores, stratify, ScoreWeighting};
use crate::stats::describe as describe_series;
use crate::trend::TrendCandidates;

type Series<'a> = [(&'static str, &'a crate::series::YearSeries<f64>); 3];

fn variables(panel: &CropPanel<f64>) -> Series<'_> {
    [("production", panel.production()), ("area", panel.area()), ("yield", panel.yields())]
}

pub(crate) fn describe(national: &NationalData<f64>) -> Result<Vec<u8>> {
    let mut t = Table::new(&["crop", "variable", "min", "mean", "max", "cv"])?;
    for panel in &national.panels {
        for (name, series) in variables(panel) {
            let d = describe_series(series.values())?;
            t.row([panel.crop(), name, &fmt_sig(d.min), &fmt_sig(d.mean), &fmt_sig(d.max), &fmt_sig(d.cv)])?;
        }
    }
    t.finish()
}

pub(crate) fn trend(national: &NationalData<f64>, alpha: f64) -> Result<Vec<u8>> {
    let mut t = Table::new(&["crop", "variable", "selected", "fitted", "beta", "r2", "p_value", "significant"])?;
    for panel in &national.panels {
        for (name, series) in variables(panel) {
            let candidates = TrendCandidates::fit(series)?;
            let selected = candidates.select(alpha);
            // the selected fit when there is one, otherwise the better-fitting candidate
            let shown = if selected.kind == crate::trend::TrendKind::None { candidates.best_fit() } else { selected };
            t.row([
                panel.crop(),
                name,
                selected.kind.as_str(),
                shown.kind.as_str(),
                &fmt_sig(shown.beta),
                &fmt_sig(shown.r2),
                &fmt_sig(shown.p_value),
                bool_str(shown.p_value < alpha),
            ])?;
        }
    }
    t.finish()
}

fn bool_str(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// Leave-one-out baselines of every crop, in panel order.
pub(crate) fn baselines(national: &NationalData<f64>, alpha: f64) -> Result<Vec<Baselines<f64>>> {
    let policy = crate::cascade::TrendPolicy::Select { alpha };
    national.panels.par_iter().map(|p| Baselines::compute(p, Some(&national.cropland), policy)).collect()
}

fn contexts<'a>(national: &'a NationalData<f64>, baselines: &'a [Baselines<f64>]) -> Vec<StageContext<'a, f64>> {
    national.panels.iter().zip(baselines).map(|(p, b)| StageContext::new(p, Some(&national.cropland), b)).collect()
}

pub(crate) fn cascade_table(national: &NationalData<f64>, baselines: &[Baselines<f64>]) -> Result<Vec<u8>> {
    let reports = contexts(national, baselines)
        .par_iter()
        .map(|ctx| cascade(ctx, PerfectComponents::all()))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["crop", "stage", "cv", "best"])?;
    for r in &reports {
        for s in &r.stages {
            t.row([r.crop.as_str(), s.stage.label(), &fmt_sig(s.cv), &fmt_sig(s.best)])?;
        }
    }
    t.finish()
}

pub(crate) fn requirements(
    national: &NationalData<f64>,
    baselines: &[Baselines<f64>],
    cfg: &RunConfig,
) -> Result<(Vec<u8>, Vec<u8>)> {
    let per_crop = contexts(national, baselines)
        .par_iter()
        .map(|ctx| {
            let results = [Component::Cropland, Component::Area, Component::Yield]
                .into_iter()
                .map(|c| solve_requirement(&RequirementQuery::new(c).with_scan(cfg.req_step, cfg.req_cap), ctx))
                .collect::<Result<Vec<_>>>()?;
            let yield_error = results[2].max_error.as_fraction();
            let dist = error_distributions(ctx, yield_error)?;
            Ok((results, dist))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut req = Table::new(&[
        "crop",
        "component",
        "stage",
        "baseline_stage",
        "baseline_cv",
        "status",
        "max_error",
        "binding_sign",
    ])?;
    let mut dist = Table::new(&["crop", "year", "yield_error", "sep_loocv", "yield_biased"])?;
    for (results, d) in &per_crop {
        for r in results {
            let (status, value) = match r.max_error {
                MaxError::Percent(p) => ("percent", fmt_sig(p)),
                MaxError::Useless => ("none", String::new()),
                MaxError::AboveCap(p) => ("above_cap", fmt_sig(p)),
            };
            req.row([
                r.crop.as_str(),
                r.component.as_str(),
                r.component.stage().label(),
                r.baseline_stage.label(),
                &fmt_sig(r.baseline_cv),
                status,
                &value,
                r.binding_sign.as_str(),
            ])?;
        }
        for (i, year) in d.years.iter().enumerate() {
            dist.row([
                d.crop.as_str(),
                &year.to_string(),
                &fmt_sig(d.yield_error),
                &fmt_sig(d.sep_loocv[i]),
                &fmt_sig(d.yield_biased[i]),
            ])?;
        }
    }
    Ok((req.finish()?, dist.finish()?))
}

pub(crate) struct GridFiles {
    pub best: Vec<u8>,
    pub area_yield: Vec<u8>,
    pub isolines: Vec<u8>,
}

pub(crate) fn grids(national: &NationalData<f64>, baselines: &[Baselines<f64>], cfg: &RunConfig) -> Result<(GridFiles, Vec<String>)> {
    let per_crop = contexts(national, baselines)
        .par_iter()
        .map(|ctx| {
            let best = grid_best_estimator(ctx, cfg.grid_range, cfg.grid_step)?;
            let thresholds = [
                Threshold { name: "MAY".to_string(), level: ctx.cv(Stage::May, &ComponentErrors::none())? },
                Threshold { name: "SEP".to_string(), level: ctx.cv(Stage::Sep, &ComponentErrors::none())? },
            ];
            let area_yield = grid_area_yield(ctx.panel, cfg.grid_range, cfg.grid_step, &thresholds)?;
            Ok((best, area_yield))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best_t = Table::new(&["crop", "e_cropland", "e_area", "label"])?;
    let mut ay_t = Table::new(&["crop", "e_area", "e_yield", "cv"])?;
    let mut iso_t = Table::new(&["crop", "threshold", "level", "line", "point", "e_area", "e_yield"])?;
    let mut warnings = Vec::new();
    for (best, ay) in &per_crop {
        if let GridCells::Label(labels) = &best.cells {
            for (i, &x) in best.x.values.iter().enumerate() {
                for (j, &y) in best.y.values.iter().enumerate() {
                    best_t.row([best.crop.as_str(), &fmt_sig(x), &fmt_sig(y), labels[best.index(i, j)].label()])?;
                }
            }
        }
        if let GridCells::Cv(cells) = &ay.cells {
            for (i, &x) in ay.x.values.iter().enumerate() {
                for (j, &y) in ay.y.values.iter().enumerate() {
                    ay_t.row([ay.crop.as_str(), &fmt_sig(x), &fmt_sig(y), &fmt_sig(cells[ay.index(i, j)])])?;
                }
            }
        }
        for iso in &ay.isolines {
            for (l, line) in iso.lines.iter().enumerate() {
                for (k, &(x, y)) in line.iter().enumerate() {
                    iso_t.row([
                        ay.crop.as_str(),
                        iso.name.as_str(),
                        &fmt_sig(iso.level),
                        &l.to_string(),
                        &k.to_string(),
                        &fmt_sig(x),
                        &fmt_sig(y),
                    ])?;
                }
            }
        }
        warnings.extend(ay.warnings.iter().cloned());
    }
    Ok((GridFiles { best: best_t.finish()?, area_yield: ay_t.finish()?, isolines: iso_t.finish()? }, warnings))
}

pub(crate) fn strata(
    departments: &[DepartmentPanel<f64>],
    national: &NationalData<f64>,
    cfg: &RunConfig,
) -> Result<Vec<u8>> {
    let scores = department_scores(departments, &national.panels)?;
    let s = stratify(&scores, &national.panels, &cfg.strata, cfg.strata_weighting)?;
    let mut t = Table::new(&["record", "stratum", "cutoff", "department", "crop", "value"])?;
    for (k, stratum) in s.strata.iter().enumerate() {
        let (k, cutoff) = (k.to_string(), fmt_sig(stratum.cutoff));
        for dept in &stratum.departments {
            let key = scores.iter().find(|d| &d.department == dept).map(|d| d.sort_key(cfg.strata_weighting));
            t.row(["member", &k, &cutoff, dept, "", &fmt_sig(key.unwrap_or_default())])?;
        }
        for (crop, e) in &stratum.aggregate {
            t.row(["aggregate", &k, &cutoff, "", crop, &fmt_sig(*e)])?;
        }
    }
    for d in &scores {
        let k = s.assignment[&d.department];
        let (k, cutoff) = (k.to_string(), fmt_sig(s.strata[k].cutoff));
        for c in &d.crops {
            t.row(["score", &k, &cutoff, &d.department, &c.crop, &fmt_sig(c.score)])?;
        }
        t.row(["key_mean", &k, &cutoff, &d.department, "", &fmt_sig(d.sort_key(ScoreWeighting::Mean))])?;
        t.row(["key_production", &k, &cutoff, &d.department, "", &fmt_sig(d.sort_key(ScoreWeighting::Production))])?;
    }
    t.finish()
}

pub(crate) fn rainfall(rain: &RainfallPanel<f64>, national: &NationalData<f64>, alpha: f64) -> Result<Vec<u8>> {
    let correlations = rainfall_yield_correlation(rain, &national.panels, alpha)?;
    let mut t = Table::new(&["crop", "endpoint_decade", "n", "r", "p_value", "significant"])?;
    let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    for c in &correlations {
        for e in &c.endpoints {
            t.row([
                c.crop.as_str(),
                &e.decade.to_string(),
                &e.n.to_string(),
                &opt(e.r),
                &opt(e.p_value),
                bool_str(e.significant),
            ])?;
        }
    }
    t.finish()
}
