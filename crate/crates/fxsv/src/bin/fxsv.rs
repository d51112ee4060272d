use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use fxsv::calibrate::CostKind;
use fxsv::estimators::SzIcmForm;
use fxsv::pipeline::{
    cmd_estimate, cmd_ingest, cmd_pipeline, cmd_report, cmd_risk, cmd_surface, cmd_vix, EstimateMethod, ModelChoice,
    Outcome, PipelineError, RunManifest, StartMethod,
};
use fxsv::pricer::IntegrationGrid;

/// Batch calibration of stochastic-volatility models to FX smiles.
#[derive(Parser)]
#[command(name = "fxsv", version)]
struct Cli {
    /// Vols in the CSV are decimals (0.1) rather than percent (10).
    #[arg(long, global = true)]
    vols_decimal: bool,
    #[arg(long, global = true, default_value_t = -17.0, allow_hyphen_values = true)]
    grid_min: f64,
    #[arg(long, global = true, default_value_t = 5.0, allow_hyphen_values = true)]
    grid_max: f64,
    #[arg(long, global = true, default_value_t = 0.4)]
    grid_step: f64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a quote CSV and write one surface JSON per date.
    Ingest {
        input: PathBuf,
        #[arg(long, default_value = "surfaces")]
        out: PathBuf,
    },
    /// Print the strike/vol surfaces of the selected dates as JSON.
    Surface(Selection),
    /// Print implied variance, skew and kurtosis per date and tenor as CSV.
    Vix(Selection),
    /// Print closed-form ω, ρ estimates per date as JSON.
    Estimate {
        #[command(flatten)]
        sel: Selection,
        #[arg(long, value_enum, default_value = "icm")]
        method: EstimateMethod,
        #[arg(long, value_enum, default_value = "heston")]
        model: ModelChoice,
        #[arg(long, value_enum, default_value = "kernel")]
        sz_icm: SzIcmForm,
    },
    /// Run the full calibration protocol per date.
    Calibrate(CalibArgs),
    /// Calibration risk across the MSE, MAE and MAPE cost functions.
    Risk(CalibArgs),
    /// Summary statistics of the calibration records in a directory.
    Report { dir: PathBuf },
}

#[derive(Args)]
struct Selection {
    input: PathBuf,
    #[arg(long)]
    from: Option<NaiveDate>,
    #[arg(long)]
    to: Option<NaiveDate>,
}

#[derive(Args)]
struct CalibArgs {
    #[command(flatten)]
    sel: Selection,
    #[arg(long, value_enum, default_value = "heston")]
    model: ModelChoice,
    #[arg(long, value_enum, default_value = "icm")]
    start: StartMethod,
    #[arg(long, value_enum, default_value = "mse")]
    cost: CostKind,
    /// Penalize parameter sets violating the Feller condition.
    #[arg(long)]
    feller: bool,
    /// Iteration cap; 1600 for one-factor and 800 for two-factor models by default.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Stop when either tolerance is met instead of both.
    #[arg(long)]
    stop_any: bool,
    /// Schöbel-Zhu moment-matching form for the vol-route starts.
    #[arg(long, value_enum, default_value = "kernel")]
    sz_icm: SzIcmForm,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Cli {
    fn manifest(&self, sel: &Selection, out: PathBuf) -> Result<RunManifest, PipelineError> {
        let mut m = RunManifest::new(&sel.input, out);
        m.from = sel.from;
        m.to = sel.to;
        m.vols_decimal = self.vols_decimal;
        m.jobs = self.jobs;
        m.grid = IntegrationGrid::new(self.grid_min, self.grid_max, self.grid_step)
            .map_err(|e| PipelineError::Invalid(e.to_string()))?;
        Ok(m)
    }

    fn calib_manifest(&self, a: &CalibArgs) -> Result<RunManifest, PipelineError> {
        let mut m = self.manifest(&a.sel, a.out.clone())?;
        m.model = a.model;
        m.start = a.start;
        m.cost = a.cost;
        m.feller = a.feller;
        m.max_iter = a.max_iter;
        m.stop_any = a.stop_any;
        m.sz_icm = a.sz_icm;
        Ok(m)
    }
}

fn run(cli: &Cli) -> Result<Outcome, PipelineError> {
    match &cli.cmd {
        Command::Ingest { input, out } => cmd_ingest(input, out, cli.vols_decimal),
        Command::Surface(sel) => {
            print!("{}", cmd_surface(&cli.manifest(sel, PathBuf::new())?)?);
            Ok(Outcome::default())
        }
        Command::Vix(sel) => {
            let (csv, out) = cmd_vix(&cli.manifest(sel, PathBuf::new())?)?;
            print!("{csv}");
            Ok(out)
        }
        Command::Estimate { sel, method, model, sz_icm } => {
            let mut m = cli.manifest(sel, PathBuf::new())?;
            m.model = *model;
            m.sz_icm = *sz_icm;
            let (json, out) = cmd_estimate(&m, *method)?;
            print!("{json}");
            Ok(out)
        }
        Command::Calibrate(a) => cmd_pipeline(&cli.calib_manifest(a)?),
        Command::Risk(a) => cmd_risk(&cli.calib_manifest(a)?),
        Command::Report { dir } => {
            print!("{}", cmd_report(dir)?);
            Ok(Outcome::default())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            for (d, e) in &out.failures {
                eprintln!("failed {d}: {e}");
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
