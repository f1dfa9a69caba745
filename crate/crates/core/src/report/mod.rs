//! Orchestration from input files to a report bundle on disk.
//!
//! Every output is rendered in memory first; files are written only once all
//! requested analyses have succeeded, so a failing run leaves nothing behind.

mod format;
mod tables;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

pub use format::fmt_sig;

use crate::error::{Error, Result};
use crate::ingest::{
    parse_department_panel, parse_national_panel, parse_rainfall_panel, CroplandSource, DepartmentPanel, NationalData,
    RainfallPanel,
};
use crate::spatial::ScoreWeighting;

pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub national: PathBuf,
    pub departments: Option<PathBuf>,
    pub rainfall: Option<PathBuf>,
    /// Require the cropland column instead of summing crop areas.
    pub cropland_column: bool,
    pub alpha: f64,
    pub req_step: f64,
    pub req_cap: f64,
    pub grid_range: f64,
    pub grid_step: f64,
    /// Stratum cutoffs in percent; the last one is always 100.
    pub strata: Vec<f64>,
    pub strata_weighting: ScoreWeighting,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            national: PathBuf::new(),
            departments: None,
            rainfall: None,
            cropland_column: false,
            alpha: 0.01,
            req_step: 0.005,
            req_cap: 0.5,
            grid_range: 0.5,
            grid_step: 0.01,
            strata: vec![10.0, 20.0, 30.0, 100.0],
            strata_weighting: ScoreWeighting::Mean,
            out: PathBuf::from("cropreq-out"),
            seed: 0,
        }
    }
}

/// Parses `10,20,30` into ascending cutoffs ending at 100.
pub fn parse_strata(text: &str) -> Result<Vec<f64>> {
    let mut cutoffs = text
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad stratum cutoff {s:?}"))))
        .collect::<Result<Vec<f64>>>()?;
    if cutoffs.last() != Some(&100.0) {
        cutoffs.push(100.0);
    }
    Ok(cutoffs)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::InvalidParameter(format!("{key}: expected true or false, got {value:?}"))),
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "national" => self.national = PathBuf::from(value),
            "departments" => self.departments = Some(PathBuf::from(value)),
            "rainfall" => self.rainfall = Some(PathBuf::from(value)),
            "cropland_column" => self.cropland_column = parse_bool(key, value)?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "req_step" => self.req_step = parse_num(key, value)?,
            "req_cap" => self.req_cap = parse_num(key, value)?,
            "grid_range" => self.grid_range = parse_num(key, value)?,
            "grid_step" => self.grid_step = parse_num(key, value)?,
            "strata" => self.strata = parse_strata(value)?,
            "strata_weighted" => {
                self.strata_weighting =
                    if parse_bool(key, value)? { ScoreWeighting::Production } else { ScoreWeighting::Mean }
            }
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = parse_num(key, value)?,
            _ => return Err(Error::InvalidParameter(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a plain-text config: one `key = value` per line, `#` comments.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("config line {}: expected key = value", n + 1)))?;
            self.set(key.trim().replace('-', "_").as_str(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.national.as_os_str().is_empty() {
            return bad("a national panel is required".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return bad(format!("alpha must lie in (0, 0.5), got {}", self.alpha));
        }
        if !(self.req_step > 0.0 && self.req_step <= self.req_cap && self.req_cap < 1.0) {
            return bad(format!("need 0 < req_step <= req_cap < 1, got {} and {}", self.req_step, self.req_cap));
        }
        if !(self.grid_step > 0.0 && self.grid_step <= self.grid_range && self.grid_range < 1.0) {
            return bad(format!("need 0 < grid_step <= grid_range < 1, got {} and {}", self.grid_step, self.grid_range));
        }
        let ascending = self.strata.windows(2).all(|w| w[0] < w[1]);
        if self.strata.is_empty() || !ascending || self.strata[0] <= 0.0 || self.strata.last() != Some(&100.0) {
            return bad(format!("strata must be ascending in (0, 100] and end at 100, got {:?}", self.strata));
        }
        Ok(())
    }

    fn echo(&self) -> Vec<(&'static str, String)> {
        let strata: Vec<String> = self.strata.iter().map(|&c| fmt_sig(c)).collect();
        let weighting = match self.strata_weighting {
            ScoreWeighting::Mean => "mean",
            ScoreWeighting::Production => "production",
        };
        vec![
            ("alpha", fmt_sig(self.alpha)),
            ("cropland_column", self.cropland_column.to_string()),
            ("req_step", fmt_sig(self.req_step)),
            ("req_cap", fmt_sig(self.req_cap)),
            ("grid_range", fmt_sig(self.grid_range)),
            ("grid_step", fmt_sig(self.grid_step)),
            ("strata", strata.join(",")),
            ("strata_weighting", weighting.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Analysis {
    Describe,
    Trend,
    Cascade,
    Requirements,
    Grids,
    Stratify,
    Rainfall,
}

impl Analysis {
    pub const ALL: [Analysis; 7] = [
        Analysis::Describe,
        Analysis::Trend,
        Analysis::Cascade,
        Analysis::Requirements,
        Analysis::Grids,
        Analysis::Stratify,
        Analysis::Rainfall,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Analysis::Describe => "describe",
            Analysis::Trend => "trend",
            Analysis::Cascade => "cascade",
            Analysis::Requirements => "requirements",
            Analysis::Grids => "grids",
            Analysis::Stratify => "stratify",
            Analysis::Rainfall => "rainfall",
        }
    }

    /// Files written by this analysis, in manifest order.
    pub fn files(self) -> &'static [&'static str] {
        match self {
            Analysis::Describe => &["describe.csv"],
            Analysis::Trend => &["trend.csv"],
            Analysis::Cascade => &["cascade.csv"],
            Analysis::Requirements => &["requirements.csv", "error_dist.csv"],
            Analysis::Grids => &["grid_best.csv", "grid_area_yield.csv", "isolines.csv"],
            Analysis::Stratify => &["strata.csv"],
            Analysis::Rainfall => &["rainfall_corr.csv"],
        }
    }

    fn needs_baselines(self) -> bool {
        matches!(self, Analysis::Cascade | Analysis::Requirements | Analysis::Grids)
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which analyses a run performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Everything the supplied inputs allow; the rest is skipped.
    All,
    /// A single analysis, whose inputs must be present.
    Only(Analysis),
}

impl Selection {
    fn analyses(self) -> Vec<Analysis> {
        match self {
            Selection::All => Analysis::ALL.to_vec(),
            Selection::Only(a) => vec![a],
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Selection::All => "all",
            Selection::Only(a) => a.as_str(),
        }
    }
}

#[derive(Debug, Clone)]
struct InputFile {
    role: &'static str,
    path: String,
    sha256: String,
}

/// Parsed and validated inputs together with their digests.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub national: NationalData<f64>,
    pub departments: Option<Vec<DepartmentPanel<f64>>>,
    pub rainfall: Option<RainfallPanel<f64>>,
    pub warnings: Vec<String>,
    files: Vec<InputFile>,
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Input { path: path.display().to_string(), source })
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads, digests and validates every configured input.
pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    let mut record = |role: &'static str, path: &Path, bytes: &[u8]| {
        files.push(InputFile { role, path: path.display().to_string(), sha256: sha256_hex(bytes) });
    };

    let bytes = read_input(&cfg.national)?;
    record("national", &cfg.national, &bytes);
    let national = parse_national_panel::<f64, _>(bytes.as_slice(), cfg.cropland_column)?;
    warnings.extend(national.report.warnings.iter().map(|w| format!("national: {w}")));

    let departments = match &cfg.departments {
        Some(path) => {
            let bytes = read_input(path)?;
            record("departments", path, &bytes);
            let (panels, report) = parse_department_panel::<f64, _>(bytes.as_slice())?;
            warnings.extend(report.warnings.iter().map(|w| format!("departments: {w}")));
            Some(panels)
        }
        None => None,
    };
    let rainfall = match &cfg.rainfall {
        Some(path) => {
            let bytes = read_input(path)?;
            record("rainfall", path, &bytes);
            let (panel, report) = parse_rainfall_panel::<f64, _>(bytes.as_slice())?;
            warnings.extend(report.warnings.iter().map(|w| format!("rainfall: {w}")));
            Some(panel)
        }
        None => None,
    };
    Ok(Inputs { national, departments, rainfall, warnings, files })
}

/// Result of a successful run.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub out_dir: PathBuf,
    /// Emitted files with their SHA-256 digests, manifest last.
    pub files: Vec<(String, String)>,
    pub skipped: Vec<(Analysis, String)>,
    pub warnings: Vec<String>,
}

impl ReportBundle {
    pub fn summary(&self) -> String {
        let mut s = format!("wrote {} file(s) to {}\n", self.files.len(), self.out_dir.display());
        for (name, _) in &self.files {
            s.push_str(&format!("  {name}\n"));
        }
        for (a, why) in &self.skipped {
            s.push_str(&format!("skipped {a}: {why}\n"));
        }
        for w in &self.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        s
    }
}

fn missing_input(analysis: Analysis, inputs: &Inputs) -> Option<&'static str> {
    match analysis {
        Analysis::Stratify if inputs.departments.is_none() => Some("no department panel"),
        Analysis::Rainfall if inputs.rainfall.is_none() => Some("no rainfall panel"),
        _ => None,
    }
}

/// Renders the selected analyses in memory, then writes them and the manifest.
pub fn run(cfg: &RunConfig, selection: Selection) -> Result<ReportBundle> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    let (outputs, skipped, warnings) = render(cfg, selection, &inputs)?;
    let manifest = manifest(cfg, selection, &inputs, &outputs, &skipped, &warnings);
    let mut files: Vec<(String, String)> = outputs.iter().map(|(n, b)| (n.to_string(), sha256_hex(b))).collect();
    files.push((MANIFEST.to_string(), sha256_hex(manifest.as_bytes())));

    let mut all: Vec<(&str, &[u8])> = outputs.iter().map(|(n, b)| (*n, b.as_slice())).collect();
    all.push((MANIFEST, manifest.as_bytes()));
    write_all(&cfg.out, &all)?;
    Ok(ReportBundle { out_dir: cfg.out.clone(), files, skipped, warnings })
}

type Rendered = (Vec<(&'static str, Vec<u8>)>, Vec<(Analysis, String)>, Vec<String>);

fn render(cfg: &RunConfig, selection: Selection, inputs: &Inputs) -> Result<Rendered> {
    let national = &inputs.national;
    let mut outputs = Vec::new();
    let mut skipped = Vec::new();
    let mut warnings = inputs.warnings.clone();
    let analyses = selection.analyses();
    let mut enabled = Vec::new();
    for a in analyses {
        match (missing_input(a, inputs), selection) {
            (Some(why), Selection::All) => skipped.push((a, why.to_string())),
            (Some(why), Selection::Only(_)) => {
                return Err(Error::MissingInput(format!("{a}: {why}")))
            }
            (None, _) => enabled.push(a),
        }
    }
    let baselines =
        if enabled.iter().any(|a| a.needs_baselines()) { tables::baselines(national, cfg.alpha)? } else { Vec::new() };

    for a in enabled {
        let names = a.files();
        match a {
            Analysis::Describe => outputs.push((names[0], tables::describe(national)?)),
            Analysis::Trend => outputs.push((names[0], tables::trend(national, cfg.alpha)?)),
            Analysis::Cascade => outputs.push((names[0], tables::cascade_table(national, &baselines)?)),
            Analysis::Requirements => {
                let (req, dist) = tables::requirements(national, &baselines, cfg)?;
                outputs.push((names[0], req));
                outputs.push((names[1], dist));
            }
            Analysis::Grids => {
                let (g, w) = tables::grids(national, &baselines, cfg)?;
                outputs.push((names[0], g.best));
                outputs.push((names[1], g.area_yield));
                outputs.push((names[2], g.isolines));
                warnings.extend(w);
            }
            Analysis::Stratify => {
                let departments = inputs.departments.as_deref().expect("checked above");
                outputs.push((names[0], tables::strata(departments, national, cfg)?));
            }
            Analysis::Rainfall => {
                let rain = inputs.rainfall.as_ref().expect("checked above");
                outputs.push((names[0], tables::rainfall(rain, national, cfg.alpha)?));
            }
        }
    }
    Ok((outputs, skipped, warnings))
}

fn manifest(
    cfg: &RunConfig,
    selection: Selection,
    inputs: &Inputs,
    outputs: &[(&'static str, Vec<u8>)],
    skipped: &[(Analysis, String)],
    warnings: &[String],
) -> String {
    let mut m = BTreeMap::new();
    let mut lines = vec![
        format!("tool={}", env!("CARGO_PKG_NAME")),
        format!("version={}", env!("CARGO_PKG_VERSION")),
        format!("selection={}", selection.as_str()),
    ];
    for (k, v) in cfg.echo() {
        lines.push(format!("config.{k}={v}"));
    }
    for f in &inputs.files {
        lines.push(format!("input.{}.path={}", f.role, f.path));
        lines.push(format!("input.{}.sha256={}", f.role, f.sha256));
    }
    let source = match inputs.national.cropland.source() {
        CroplandSource::Column => "column",
        CroplandSource::SumOfCropAreas => "sum_of_crop_areas",
    };
    lines.push(format!("cropland.source={source}"));
    for (a, why) in skipped {
        m.insert(*a, format!("skipped ({why})"));
    }
    for a in selection.analyses() {
        let status = m.remove(&a).unwrap_or_else(|| "done".to_string());
        lines.push(format!("analysis.{a}={status}"));
    }
    for (i, w) in warnings.iter().enumerate() {
        lines.push(format!("warning.{}={}", i + 1, w.replace('\n', " ")));
    }
    for (name, bytes) in outputs {
        lines.push(format!("file.{name}.sha256={}", sha256_hex(bytes)));
    }
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

/// Writes every file or none: on failure the files already written are removed.
fn write_all(dir: &Path, files: &[(&str, &[u8])]) -> Result<()> {
    let created = !dir.exists();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, bytes) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            if created {
                let _ = fs::remove_dir(dir);
            }
            return Err(e.into());
        }
        written.push(path);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_and_validation() {
        let mut cfg = RunConfig::default();
        cfg.apply_config_text("# comment\nnational = n.csv\nalpha=0.05\nstrata = 5, 15\nstrata-weighted = true\n").unwrap();
        assert_eq!(cfg.national, PathBuf::from("n.csv"));
        assert_eq!(cfg.alpha, 0.05);
        assert_eq!(cfg.strata, vec![5.0, 15.0, 100.0]);
        assert_eq!(cfg.strata_weighting, ScoreWeighting::Production);
        cfg.validate().unwrap();
        cfg.set("alpha", "0.7").unwrap();
        assert!(cfg.validate().is_err());
        assert!(cfg.apply_config_text("nonsense").is_err());
        assert!(cfg.set("colour", "red").is_err());
    }

    #[test]
    fn file_layout() {
        let total: usize = Analysis::ALL.iter().map(|a| a.files().len()).sum();
        assert_eq!(total, 10);
    }
}
