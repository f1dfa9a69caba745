use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{check_header, csv_reader, format_exact, open_input, parse_number, parse_year};
use super::{Locator, ValidationReport};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::YearSeries;

const COLUMNS: [&str; 4] = ["department", "crop", "year", "production_kt"];

/// Production (kt) of one crop in one department. Zero production is allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct DepartmentPanel<T> {
    pub department: String,
    pub crop: String,
    pub production: YearSeries<T>,
}

impl<T: Scalar> DepartmentPanel<T> {
    pub fn new(department: impl Into<String>, crop: impl Into<String>, production: YearSeries<T>) -> Result<Self> {
        if let Some(&v) = production.values().iter().find(|v| **v < T::zero()) {
            return Err(Error::NonPositive { what: "department production", value: v.as_f64() });
        }
        Ok(Self { department: department.into(), crop: crop.into(), production })
    }
}

pub fn load_department_panel<T: Scalar>(path: &Path) -> Result<(Vec<DepartmentPanel<T>>, ValidationReport)> {
    parse_department_panel(open_input(path)?)
}

/// Parses `department,crop,year,production_kt` into one series per
/// (department, crop), sorted by department then crop.
pub fn parse_department_panel<T: Scalar, R: Read>(input: R) -> Result<(Vec<DepartmentPanel<T>>, ValidationReport)> {
    let mut report = ValidationReport::default();
    let mut reader = csv_reader(input);
    if check_header(&mut reader, &COLUMNS, &[], &mut report).is_none() {
        return Err(Error::Validation(report));
    }
    let mut series: BTreeMap<(String, String), BTreeMap<i32, (f64, u64)>> = BTreeMap::new();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let loc = e.position().map_or(Locator::Key("file".into()), |p| Locator::Line(p.line()));
                report.error(loc, format!("malformed row: {e}"));
                if e.is_io_error() {
                    break;
                }
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != COLUMNS.len() {
            report.error(
                Locator::Line(line),
                format!("malformed row: expected {} fields, found {}", COLUMNS.len(), record.len()),
            );
            continue;
        }
        let parsed = (|| {
            if record[0].is_empty() || record[1].is_empty() {
                return Err("empty department or crop identifier".to_string());
            }
            let year = parse_year(&record[2])?;
            let v = parse_number(&record[3], "production_kt")?;
            if v < 0.0 {
                return Err(format!("negative production_kt ({v})"));
            }
            Ok((year, v))
        })();
        let (year, value) = match parsed {
            Ok(p) => p,
            Err(rule) => {
                report.error(Locator::Line(line), rule);
                continue;
            }
        };
        let key = (record[0].to_string(), record[1].to_string());
        let rows = series.entry(key.clone()).or_default();
        if let Some(&(_, first)) = rows.get(&year) {
            report.error(
                Locator::Line(line),
                format!("duplicate (department, crop, year) = ({}, {}, {year}), first at line {first}", key.0, key.1),
            );
            continue;
        }
        rows.insert(year, (value, line));
    }
    if series.is_empty() && report.errors.is_empty() {
        report.error(Locator::Key("file".into()), "no data rows");
    }
    if !report.is_accepted() {
        return Err(Error::Validation(report));
    }
    let panels = series
        .into_iter()
        .map(|((department, crop), rows)| {
            let (years, values) = rows.into_iter().map(|(y, (v, _))| (y, T::from_f64(v).expect("finite"))).unzip();
            DepartmentPanel::new(department, crop, YearSeries::new(years, values)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((panels, report))
}

pub fn write_department_panel<T: Scalar, W: Write>(mut out: W, panels: &[DepartmentPanel<T>]) -> Result<()> {
    writeln!(out, "{}", COLUMNS.join(","))?;
    let mut sorted: Vec<&DepartmentPanel<T>> = panels.iter().collect();
    sorted.sort_by(|a, b| (&a.department, &a.crop).cmp(&(&b.department, &b.crop)));
    for p in sorted {
        for (year, v) in p.production.iter() {
            writeln!(out, "{},{},{},{}", p.department, p.crop, year, format_exact(v.as_f64()))?;
        }
    }
    Ok(())
}
