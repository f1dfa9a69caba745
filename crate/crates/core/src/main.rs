use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cropreq::report::{parse_strata, run, Analysis, RunConfig, Selection};
use cropreq::spatial::ScoreWeighting;
use cropreq::Error;

#[derive(Parser)]
#[command(name = "cropreq", version, about = "Crop production variability and accuracy requirements of early estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every analysis the inputs allow.
    Run(Common),
    /// Descriptive statistics per crop and variable.
    Describe(Common),
    /// Trend fits and selection.
    Trend(Common),
    /// CV(RMSE) of the seasonal estimator cascade.
    Cascade(Common),
    /// Maximum tolerable errors of early estimators.
    Requirements(Common),
    /// Best-estimator and area-yield error grids with isolines.
    Grids(Common),
    /// Department stratification (needs --departments).
    Stratify(Common),
    /// Rainfall-yield correlation (needs --rainfall).
    Rainfall(Common),
}

#[derive(Args)]
struct Common {
    /// National crop panel (CSV).
    #[arg(long)]
    national: Option<PathBuf>,
    /// Department production panel (CSV).
    #[arg(long)]
    departments: Option<PathBuf>,
    /// Decadal rainfall panel (CSV).
    #[arg(long)]
    rainfall: Option<PathBuf>,
    /// Require the cropland column instead of summing crop areas.
    #[arg(long)]
    cropland_column: bool,
    /// Significance level for trends and correlations [default: 0.01]
    #[arg(long)]
    alpha: Option<f64>,
    /// Requirement scan step, as a fraction [default: 0.005]
    #[arg(long)]
    req_step: Option<f64>,
    /// Largest requirement error scanned, as a fraction [default: 0.5]
    #[arg(long)]
    req_cap: Option<f64>,
    /// Half-width of the error grids, as a fraction [default: 0.5]
    #[arg(long)]
    grid_range: Option<f64>,
    /// Error grid spacing, as a fraction [default: 0.01]
    #[arg(long)]
    grid_step: Option<f64>,
    /// Stratum cutoffs in percent, e.g. 10,20,30 (100 is appended).
    #[arg(long)]
    strata: Option<String>,
    /// Sort departments by production-weighted score.
    #[arg(long)]
    strata_weighted: bool,
    /// Output directory [default: cropreq-out]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recorded in the manifest; the analyses are deterministic
    #[arg(long)]
    seed: Option<u64>,
    /// Plain-text key = value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn into_config(self) -> cropreq::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|source| Error::Input { path: path.display().to_string(), source })?;
            cfg.apply_config_text(&text)?;
        }
        if let Some(v) = self.national {
            cfg.national = v;
        }
        if let Some(v) = self.departments {
            cfg.departments = Some(v);
        }
        if let Some(v) = self.rainfall {
            cfg.rainfall = Some(v);
        }
        cfg.cropland_column |= self.cropland_column;
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.req_step {
            cfg.req_step = v;
        }
        if let Some(v) = self.req_cap {
            cfg.req_cap = v;
        }
        if let Some(v) = self.grid_range {
            cfg.grid_range = v;
        }
        if let Some(v) = self.grid_step {
            cfg.grid_step = v;
        }
        if let Some(v) = self.strata {
            cfg.strata = parse_strata(&v)?;
        }
        if self.strata_weighted {
            cfg.strata_weighting = ScoreWeighting::Production;
        }
        if let Some(v) = self.out {
            cfg.out = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, selection) = match cli.command {
        Command::Run(c) => (c, Selection::All),
        Command::Describe(c) => (c, Selection::Only(Analysis::Describe)),
        Command::Trend(c) => (c, Selection::Only(Analysis::Trend)),
        Command::Cascade(c) => (c, Selection::Only(Analysis::Cascade)),
        Command::Requirements(c) => (c, Selection::Only(Analysis::Requirements)),
        Command::Grids(c) => (c, Selection::Only(Analysis::Grids)),
        Command::Stratify(c) => (c, Selection::Only(Analysis::Stratify)),
        Command::Rainfall(c) => (c, Selection::Only(Analysis::Rainfall)),
    };
    let cfg = match common.into_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg, selection) {
        Ok(bundle) => {
            print!("{}", bundle.summary());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Validation(report) = &e {
                eprint!("{report}");
            }
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
