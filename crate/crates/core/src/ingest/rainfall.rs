use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{check_header, csv_reader, format_exact, open_input, parse_number, parse_year};
use super::{Locator, ValidationReport};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const COLUMNS: [&str; 3] = ["year", "decade", "rain_mm"];
pub const DECADES_PER_YEAR: u8 = 36;

/// Country-average rainfall (mm) per 10-day period, decades numbered 1..=36.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RainfallPanel<T> {
    cells: BTreeMap<(i32, u8), T>,
}

impl<T: Scalar> RainfallPanel<T> {
    pub fn from_cells(cells: impl IntoIterator<Item = (i32, u8, T)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (year, decade, v) in cells {
            if !(1..=DECADES_PER_YEAR).contains(&decade) {
                return Err(Error::InvalidParameter(format!("decade {decade} outside 1..=36")));
            }
            if v < T::zero() || !v.is_finite() {
                return Err(Error::NonPositive { what: "rainfall", value: v.as_f64() });
            }
            if map.insert((year, decade), v).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate cell ({year}, {decade})")));
            }
        }
        Ok(Self { cells: map })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = self.cells.keys().map(|&(y, _)| y).collect();
        years.dedup();
        years
    }

    pub fn get(&self, year: i32, decade: u8) -> Option<T> {
        self.cells.get(&(year, decade)).copied()
    }

    /// Rainfall summed over decades `from..=to` of `year`; `None` if any decade is missing.
    pub fn cumulative(&self, year: i32, from: u8, to: u8) -> Option<T> {
        (from..=to).map(|d| self.get(year, d)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, u8, T)> + '_ {
        self.cells.iter().map(|(&(y, d), &v)| (y, d, v))
    }
}

pub fn load_rainfall_panel<T: Scalar>(path: &Path) -> Result<(RainfallPanel<T>, ValidationReport)> {
    parse_rainfall_panel(open_input(path)?)
}

/// Parses `year,decade,rain_mm`.
pub fn parse_rainfall_panel<T: Scalar, R: Read>(input: R) -> Result<(RainfallPanel<T>, ValidationReport)> {
    let mut report = ValidationReport::default();
    let mut reader = csv_reader(input);
    if check_header(&mut reader, &COLUMNS, &[], &mut report).is_none() {
        return Err(Error::Validation(report));
    }
    let mut cells: BTreeMap<(i32, u8), (T, u64)> = BTreeMap::new();
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
            let year = parse_year(&record[0])?;
            let decade: u8 = record[1].parse().map_err(|_| format!("malformed decade '{}'", &record[1]))?;
            if !(1..=DECADES_PER_YEAR).contains(&decade) {
                return Err(format!("decade {decade} outside 1..=36"));
            }
            let v = parse_number(&record[2], "rain_mm")?;
            if v < 0.0 {
                return Err(format!("negative rain_mm ({v})"));
            }
            Ok((year, decade, v))
        })();
        match parsed {
            Ok((year, decade, v)) => match cells.entry((year, decade)) {
                Entry::Vacant(e) => {
                    e.insert((T::from_f64(v).expect("finite"), line));
                }
                Entry::Occupied(o) => report.error(
                    Locator::Line(line),
                    format!("duplicate (year, decade) = ({year}, {decade}), first at line {}", o.get().1),
                ),
            },
            Err(rule) => report.error(Locator::Line(line), rule),
        }
    }
    if cells.is_empty() && report.errors.is_empty() {
        report.error(Locator::Key("file".into()), "no data rows");
    }
    if !report.is_accepted() {
        return Err(Error::Validation(report));
    }
    let cells = cells.into_iter().map(|(k, (v, _))| (k, v)).collect();
    Ok((RainfallPanel { cells }, report))
}

pub fn write_rainfall_panel<T: Scalar, W: Write>(mut out: W, panel: &RainfallPanel<T>) -> Result<()> {
    writeln!(out, "{}", COLUMNS.join(","))?;
    for (year, decade, v) in panel.iter() {
        writeln!(out, "{year},{decade},{}", format_exact(v.as_f64()))?;
    }
    Ok(())
}
