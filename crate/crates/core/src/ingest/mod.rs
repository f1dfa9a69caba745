//! Loading and validation of the national, department and rainfall tables.
//!
//! All three files are comma-separated with a mandatory header row. Units are
//! fixed by the column names (kt, 10³ ha, t/ha, mm). Rows that break a rule
//! are reported in a [`ValidationReport`] together with their line number; a
//! file is accepted only when the report holds no errors.

mod department;
mod national;
mod rainfall;
mod validation;

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

pub use department::{load_department_panel, parse_department_panel, write_department_panel, DepartmentPanel};
pub use national::{
    load_national_panel, parse_national_panel, write_national_panel, CropPanel, CroplandSeries,
    CroplandSource, NationalData,
};
pub use rainfall::{load_rainfall_panel, parse_rainfall_panel, write_rainfall_panel, RainfallPanel, DECADES_PER_YEAR};
pub use validation::{Issue, Locator, ValidationReport};

use crate::error::{Error, Result};

pub(crate) fn open_input(path: &Path) -> Result<impl Read> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| Error::Input { path: path.display().to_string(), source })
}

pub(crate) fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

/// Checks the header row against the expected column names. `optional` columns
/// may follow the required ones, in order.
pub(crate) fn check_header<R: Read>(
    reader: &mut csv::Reader<R>,
    required: &[&str],
    optional: &[&str],
    report: &mut ValidationReport,
) -> Option<usize> {
    let header = match reader.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].is_empty()) => h.clone(),
        Ok(_) => {
            report.error(Locator::Header, "missing header row");
            return None;
        }
        Err(e) => {
            report.error(Locator::Header, format!("unreadable header: {e}"));
            return None;
        }
    };
    let names: Vec<&str> = header.iter().collect();
    let extra = names.len().checked_sub(required.len());
    let ok = names.len() >= required.len()
        && names[..required.len()] == *required
        && extra.is_some_and(|n| n <= optional.len() && names[required.len()..] == optional[..n]);
    if !ok {
        let mut expected = required.join(",");
        for o in optional {
            expected.push_str(&format!("[,{o}]"));
        }
        report.error(Locator::Header, format!("expected columns {expected}, found {}", names.join(",")));
        return None;
    }
    Some(names.len())
}

pub(crate) fn parse_number(field: &str, what: &str) -> std::result::Result<f64, String> {
    let v: f64 = field.parse().map_err(|_| format!("malformed {what} '{field}'"))?;
    if !v.is_finite() {
        return Err(format!("non-finite {what}"));
    }
    Ok(v)
}

pub(crate) fn parse_year(field: &str) -> std::result::Result<i32, String> {
    field.parse().map_err(|_| format!("malformed year '{field}'"))
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn format_exact(v: f64) -> String {
    format!("{v}")
}
