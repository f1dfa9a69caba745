use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{check_header, csv_reader, format_exact, open_input, parse_number, parse_year};
use super::{Locator, ValidationReport};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::YearSeries;

const REQUIRED: [&str; 5] = ["crop", "year", "production_kt", "area_kha", "yield_tha"];
const CROPLAND: &str = "cropland_kha";
/// Relative gap between production and area × yield above which a row is flagged.
const IDENTITY_TOLERANCE: f64 = 0.05;

/// National annual statistics of one crop: production (kt), area (10³ ha) and
/// yield (t/ha), all on the same gap-free run of years.
#[derive(Debug, Clone, PartialEq)]
pub struct CropPanel<T> {
    crop: String,
    production: YearSeries<T>,
    area: YearSeries<T>,
    yields: YearSeries<T>,
}

impl<T: Scalar> CropPanel<T> {
    pub fn new(
        crop: impl Into<String>,
        years: Vec<i32>,
        production: Vec<T>,
        area: Vec<T>,
        yields: Vec<T>,
    ) -> Result<Self> {
        let production = YearSeries::new(years.clone(), production)?;
        let area = YearSeries::new(years.clone(), area)?;
        let yields = YearSeries::new(years, yields)?;
        for (what, s) in [("production", &production), ("area", &area), ("yield", &yields)] {
            if let Some(&v) = s.values().iter().find(|v| **v <= T::zero()) {
                return Err(Error::NonPositive { what, value: v.as_f64() });
            }
        }
        Ok(Self { crop: crop.into(), production, area, yields })
    }

    pub fn crop(&self) -> &str {
        &self.crop
    }

    pub fn years(&self) -> &[i32] {
        self.production.years()
    }

    pub fn len(&self) -> usize {
        self.production.len()
    }

    pub fn is_empty(&self) -> bool {
        self.production.is_empty()
    }

    pub fn production(&self) -> &YearSeries<T> {
        &self.production
    }

    pub fn area(&self) -> &YearSeries<T> {
        &self.area
    }

    pub fn yields(&self) -> &YearSeries<T> {
        &self.yields
    }

    /// Same panel with production and area multiplied by `k` (yield unchanged).
    pub fn scaled(&self, k: T) -> Self {
        Self {
            crop: self.crop.clone(),
            production: self.production.map(|v| v * k),
            area: self.area.map(|v| v * k),
            yields: self.yields.clone(),
        }
    }

    /// Largest relative gap |p − a·y| / (a·y) over the years.
    pub fn max_identity_gap(&self) -> T {
        self.production
            .values()
            .iter()
            .zip(self.area.values())
            .zip(self.yields.values())
            .map(|((&p, &a), &y)| ((p - a * y) / (a * y)).abs())
            .fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CroplandSource {
    /// Read from the `cropland_kha` column.
    Column,
    /// Per-year sum of the areas of every crop in the file.
    SumOfCropAreas,
}

/// Total cropland (10³ ha) per year.
#[derive(Debug, Clone, PartialEq)]
pub struct CroplandSeries<T> {
    series: YearSeries<T>,
    source: CroplandSource,
}

impl<T: Scalar> CroplandSeries<T> {
    pub fn new(series: YearSeries<T>, source: CroplandSource) -> Result<Self> {
        if let Some(&v) = series.values().iter().find(|v| **v <= T::zero()) {
            return Err(Error::NonPositive { what: "cropland", value: v.as_f64() });
        }
        Ok(Self { series, source })
    }

    /// Cropland synthesized as the per-year sum of the panels' areas.
    pub fn from_panels(panels: &[CropPanel<T>]) -> Result<Self> {
        let mut sums: BTreeMap<i32, T> = BTreeMap::new();
        for p in panels {
            for (year, a) in p.area().iter() {
                *sums.entry(year).or_insert_with(T::zero) += a;
            }
        }
        let (years, values) = sums.into_iter().unzip();
        Self::new(YearSeries::new(years, values)?, CroplandSource::SumOfCropAreas)
    }

    pub fn series(&self) -> &YearSeries<T> {
        &self.series
    }

    pub fn source(&self) -> CroplandSource {
        self.source
    }

    pub fn get(&self, year: i32) -> Option<T> {
        self.series.get(year)
    }

    pub fn scaled(&self, k: T) -> Self {
        Self { series: self.series.map(|v| v * k), source: self.source }
    }
}

/// Accepted national input: one panel per crop (alphabetical) plus cropland.
#[derive(Debug, Clone)]
pub struct NationalData<T> {
    pub panels: Vec<CropPanel<T>>,
    pub cropland: CroplandSeries<T>,
    pub report: ValidationReport,
}

struct Row {
    production: f64,
    area: f64,
    yields: f64,
}

pub fn load_national_panel<T: Scalar>(path: &Path, require_cropland: bool) -> Result<NationalData<T>> {
    parse_national_panel(open_input(path)?, require_cropland)
}

/// Parses the national table `crop,year,production_kt,area_kha,yield_tha[,cropland_kha]`.
///
/// Returns [`Error::Validation`] when any row or series breaks a rule. With
/// `require_cropland` the cropland column must be present; otherwise a
/// missing column is replaced by the per-year sum of crop areas and noted.
pub fn parse_national_panel<T: Scalar, R: Read>(input: R, require_cropland: bool) -> Result<NationalData<T>> {
    let mut report = ValidationReport::default();
    let mut reader = csv_reader(input);
    let Some(ncols) = check_header(&mut reader, &REQUIRED, &[CROPLAND], &mut report) else {
        return Err(Error::Validation(report));
    };
    let has_cropland = ncols == REQUIRED.len() + 1;
    if require_cropland && !has_cropland {
        report.error(Locator::Header, format!("{CROPLAND} column required"));
        return Err(Error::Validation(report));
    }

    let mut crops: BTreeMap<String, BTreeMap<i32, Row>> = BTreeMap::new();
    let mut cropland: BTreeMap<i32, (f64, u64)> = BTreeMap::new();

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
        let loc = Locator::Line(line);
        if record.len() != ncols {
            report.error(loc, format!("malformed row: expected {ncols} fields, found {}", record.len()));
            continue;
        }
        let parsed = (|| {
            let crop = record[0].to_string();
            if crop.is_empty() {
                return Err("empty crop identifier".to_string());
            }
            let year = parse_year(&record[1])?;
            let mut values = [0.0; 4];
            for (k, name) in REQUIRED[2..].iter().chain([CROPLAND].iter()).take(ncols - 2).enumerate() {
                let v = parse_number(&record[k + 2], name)?;
                if v <= 0.0 {
                    return Err(format!("non-positive {name} ({v})"));
                }
                values[k] = v;
            }
            Ok((crop, year, values))
        })();
        let (crop, year, [production, area, yields, cl]) = match parsed {
            Ok(p) => p,
            Err(rule) => {
                report.error(loc, rule);
                continue;
            }
        };
        if crops.get(&crop).is_some_and(|m| m.contains_key(&year)) {
            report.error(loc, format!("duplicate (crop, year) = ({crop}, {year})"));
            continue;
        }
        if has_cropland {
            match cropland.entry(year) {
                Entry::Vacant(v) => {
                    v.insert((cl, line));
                }
                Entry::Occupied(o) if o.get().0 != cl => {
                    report.error(loc, format!("{CROPLAND} differs from line {} for year {year}", o.get().1));
                    continue;
                }
                Entry::Occupied(_) => {}
            }
        }
        let expected = area * yields;
        let gap = (production - expected).abs() / expected;
        if gap > IDENTITY_TOLERANCE {
            report.warn(loc, format!("unit identity violated by {:.1}%", 100.0 * gap));
        }
        crops.entry(crop).or_default().insert(year, Row { production, area, yields });
    }

    for (crop, rows) in &crops {
        let (first, last) = (*rows.keys().next().unwrap(), *rows.keys().next_back().unwrap());
        let missing: Vec<String> = (first..=last).filter(|y| !rows.contains_key(y)).map(|y| y.to_string()).collect();
        if !missing.is_empty() {
            report.error(Locator::Key(format!("crop={crop}")), format!("missing year(s) {}", missing.join(" ")));
        }
    }
    if crops.is_empty() && report.errors.is_empty() {
        report.error(Locator::Key("file".into()), "no data rows");
    }
    if has_cropland {
        for (year, &(c, _)) in &cropland {
            let max_area = crops.values().filter_map(|m| m.get(year)).map(|r| r.area).fold(0.0, f64::max);
            if c < max_area {
                report.error(
                    Locator::Key(format!("year={year}")),
                    format!("{CROPLAND} {c} below the largest crop area {max_area}"),
                );
            }
        }
    }
    if !report.is_accepted() {
        return Err(Error::Validation(report));
    }

    let conv = |v: f64| T::from_f64(v).expect("finite input");
    let panels = crops
        .into_iter()
        .map(|(crop, rows)| {
            let years = rows.keys().copied().collect();
            let production = rows.values().map(|r| conv(r.production)).collect();
            let area = rows.values().map(|r| conv(r.area)).collect();
            let yields = rows.values().map(|r| conv(r.yields)).collect();
            CropPanel::new(crop, years, production, area, yields)
        })
        .collect::<Result<Vec<_>>>()?;
    let cropland = if has_cropland {
        let (years, values) = cropland.into_iter().map(|(y, (c, _))| (y, conv(c))).unzip();
        CroplandSeries::new(YearSeries::new(years, values)?, CroplandSource::Column)?
    } else {
        report.notes.push("cropland synthesized as the per-year sum of crop areas".into());
        CroplandSeries::from_panels(&panels)?
    };
    Ok(NationalData { panels, cropland, report })
}

/// Writes panels in the national format, crops alphabetical and years ascending.
/// The cropland column is emitted when `cropland` is given.
pub fn write_national_panel<T: Scalar, W: Write>(
    mut out: W,
    panels: &[CropPanel<T>],
    cropland: Option<&CroplandSeries<T>>,
) -> Result<()> {
    let mut header = REQUIRED.join(",");
    if cropland.is_some() {
        header.push(',');
        header.push_str(CROPLAND);
    }
    writeln!(out, "{header}")?;
    let mut sorted: Vec<&CropPanel<T>> = panels.iter().collect();
    sorted.sort_by(|a, b| a.crop.cmp(&b.crop));
    for p in sorted {
        for (i, &year) in p.years().iter().enumerate() {
            write!(
                out,
                "{},{},{},{},{}",
                p.crop,
                year,
                format_exact(p.production.values()[i].as_f64()),
                format_exact(p.area.values()[i].as_f64()),
                format_exact(p.yields.values()[i].as_f64()),
            )?;
            if let Some(c) = cropland {
                let v = c.get(year).ok_or(Error::MissingYear { what: "cropland", year })?;
                write!(out, ",{}", format_exact(v.as_f64()))?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<NationalData<f64>> {
        parse_national_panel(text.as_bytes(), false)
    }

    fn errors(text: &str) -> ValidationReport {
        match parse(text) {
            Err(Error::Validation(r)) => r,
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn identity_scale_panel_is_warning_free() {
        let data = parse("crop,year,production_kt,area_kha,yield_tha\nx,2000,1,1,1\nx,2001,1,1,1\n").unwrap();
        assert_eq!(data.panels.len(), 1);
        assert_eq!(data.panels[0].years(), &[2000, 2001]);
        assert!(data.report.warnings.is_empty());
        assert_eq!(data.cropland.source(), CroplandSource::SumOfCropAreas);
        assert_eq!(data.report.notes.len(), 1);
    }

    #[test]
    fn unit_identity_warning() {
        let data = parse("crop,year,production_kt,area_kha,yield_tha\nx,2000,10,2,3\nx,2001,6,2,3\n").unwrap();
        assert_eq!(data.report.warnings.len(), 1);
        let w = &data.report.warnings[0];
        assert_eq!(w.locator, Locator::Line(2));
        assert_eq!(w.rule, "unit identity violated by 66.7%");
    }

    #[test]
    fn rows_are_sorted_by_year() {
        let data = parse("crop,year,production_kt,area_kha,yield_tha\nb,2002,3,3,1\nb,2001,2,2,1\na,2001,1,1,1\n").unwrap();
        assert_eq!(data.panels[0].crop(), "a");
        assert_eq!(data.panels[1].years(), &[2001, 2002]);
        assert_eq!(data.panels[1].production().values(), &[2.0, 3.0]);
        assert_eq!(data.cropland.series().values(), &[3.0, 3.0]);
    }

    #[test]
    fn malformed_and_non_positive_rows() {
        let r = errors("crop,year,production_kt,area_kha,yield_tha\nx,2000,1,1\nx,2001,0,1,1\nx,20o2,1,1,1\n");
        assert_eq!(r.errors.len(), 3, "{r}");
        assert_eq!(r.errors[0].locator, Locator::Line(2));
        assert!(r.errors[0].rule.starts_with("malformed row"));
        assert_eq!(r.errors[1].locator, Locator::Line(3));
        assert!(r.errors[1].rule.contains("non-positive production_kt"));
        assert!(r.errors[2].rule.contains("malformed year"));
    }

    #[test]
    fn interior_gap_is_rejected() {
        let r = errors("crop,year,production_kt,area_kha,yield_tha\nx,2000,1,1,1\nx,2002,1,1,1\n");
        assert_eq!(r.errors.len(), 1);
        assert_eq!(r.errors[0].locator, Locator::Key("crop=x".into()));
        assert!(r.errors[0].rule.contains("2001"));
    }

    #[test]
    fn duplicate_row_rejected() {
        let r = errors("crop,year,production_kt,area_kha,yield_tha\nx,2000,1,1,1\nx,2000,2,2,1\n");
        assert_eq!(r.errors[0].locator, Locator::Line(3));
    }

    #[test]
    fn bad_or_missing_header() {
        assert_eq!(errors("").errors[0].locator, Locator::Header);
        assert_eq!(errors("crop,year,prod,area_kha,yield_tha\n").errors[0].locator, Locator::Header);
        assert_eq!(errors("crop,year,production_kt,area_kha,yield_tha,foo\n").errors[0].locator, Locator::Header);
    }

    #[test]
    fn cropland_column() {
        let text = "crop,year,production_kt,area_kha,yield_tha,cropland_kha\na,2000,1,1,1,10\nb,2000,2,2,1,10\n";
        let data = parse(text).unwrap();
        assert_eq!(data.cropland.source(), CroplandSource::Column);
        assert_eq!(data.cropland.get(2000), Some(10.0));
        assert!(data.report.notes.is_empty());

        let r = errors("crop,year,production_kt,area_kha,yield_tha,cropland_kha\na,2000,1,1,1,10\nb,2000,2,2,1,11\n");
        assert!(r.errors[0].rule.contains("differs from line 2"));
        let r = errors("crop,year,production_kt,area_kha,yield_tha,cropland_kha\na,2000,5,5,1,4\n");
        assert_eq!(r.errors[0].locator, Locator::Key("year=2000".into()));
    }

    #[test]
    fn required_cropland_column() {
        let text = "crop,year,production_kt,area_kha,yield_tha\nx,2000,1,1,1\n";
        assert!(matches!(parse_national_panel::<f64, _>(text.as_bytes(), true), Err(Error::Validation(_))));
    }

    #[test]
    fn seven_crops_twenty_years() {
        let mut text = String::from("crop,year,production_kt,area_kha,yield_tha\n");
        for crop in ["groundnuts", "millet", "rice", "cassava", "maize", "sorghum", "cotton"] {
            for year in 1997..=2016 {
                text.push_str(&format!("{crop},{year},2,2,1\n"));
            }
        }
        let data = parse(&text).unwrap();
        assert_eq!(data.panels.len(), 7);
        assert!(data.panels.iter().all(|p| p.len() == 20));
    }
}
