//! Command-line front end. `run` returns the process exit code so the binary
//! stays a one-liner and the tests can drive it in-process.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::LinkConfig;
use crate::error::Error;
use crate::eye::eye_diagram;
use crate::link::{
    capture_waveforms, loss_sweep, loss_sweep_csv, max_loss_search, run_link, sensitivity_sweep,
    sweep_csv, SweepSettings,
};
use crate::metrics::{budget_report, reference_area, PowerBudget};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAILED_RUN: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "serdes-sim", version, about = "Behavioral all-digital SerDes link simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Link configuration file (key = value lines).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory receiving the CSV artifacts.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Number of PRBS bits (UI) to simulate.
    #[arg(long, global = true, value_name = "N")]
    pub bits: Option<usize>,
    /// Overrides `rng_seed`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Exit with status 2 when a run fails to lock or shows errors.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Cap on dumped waveform length, in UI.
    #[arg(long, global = true, value_name = "N", default_value_t = 200)]
    pub max_ui: usize,
    /// Config override applied after the file, e.g. `--set channel_loss_db=30`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One PRBS run; writes run_report.csv and phase_trace.csv.
    Run,
    /// BER over a loss grid plus the maximum error-free loss.
    SweepLoss {
        #[arg(long, default_value_t = 20.0)]
        loss_lo: f64,
        #[arg(long, default_value_t = 45.0)]
        loss_hi: f64,
        #[arg(long, default_value_t = 1.0)]
        step_db: f64,
        #[arg(long, default_value_t = 0.25)]
        resolution_db: f64,
    },
    /// Sensitivity and maximum loss per bitrate.
    SweepSensitivity {
        /// Comma separated bitrates in bit/s.
        #[arg(long, value_delimiter = ',', default_value = "1e9,1.5e9,2e9")]
        bitrates: Vec<f64>,
    },
    /// Eye histogram of the receiver input.
    Eye {
        #[arg(long, default_value_t = 64)]
        bins_v: usize,
    },
    /// Power and area tables from the reported block figures.
    Budget,
    /// Waveforms of each analog stage, capped by --max-ui.
    DumpWaveforms,
}

const DEFAULT_RUN_BITS: usize = 1_000_000;
const DEFAULT_SWEEP_BITS: usize = 100_000;
const DEFAULT_EYE_UI: usize = 2000;

/// Failure of a command after argument parsing.
enum Failure {
    Invalid(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::ConfigParse { .. } | Error::UnknownKey(_) | Error::Io(_) => {
                Failure::Invalid(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_INVALID
                }
            };
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Run(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            if cli.common.strict {
                EXIT_FAILED_RUN
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<LinkConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => LinkConfig::from_config_str(&fs::read_to_string(path)?)?,
        None => LinkConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.rng_seed = seed;
    }
    for o in &common.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| Error::ConfigParse {
            line: 0,
            message: format!("override {o:?} is not KEY=VALUE"),
        })?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()
}

fn write_artifact(dir: &Path, name: &str, content: &str) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), content)?;
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let common = &cli.common;
    let dir = common.out.as_path();
    let mut failed = false;
    match &cli.command {
        Command::Budget => {
            let report = budget_report(&PowerBudget::reference())?;
            let link = budget_report(&PowerBudget::reference().link_only())?;
            let area = reference_area();
            write_artifact(dir, "budget.csv", &report.to_csv())?;
            write_artifact(dir, "area.csv", &area.to_csv())?;
            let md = format!(
                "## Power\n\n{}\nLink only (driver and receiver): {} mW\n\n## Area\n\n{}",
                report.to_markdown(),
                crate::metrics::fmt_exact(&link.total_mw, 6),
                area.to_markdown()
            );
            write_artifact(dir, "budget.md", &md)?;
            let _ = write!(out, "{md}");
        }
        Command::Run => {
            let cfg = load_config(common)?;
            let bits = common.bits.unwrap_or(DEFAULT_RUN_BITS);
            let report = run_link(&cfg, bits)?;
            write_artifact(dir, "run_report.csv", &report.to_csv())?;
            write_artifact(dir, "phase_trace.csv", &report.phase_trace_csv())?;
            let _ = write!(out, "{}", report.to_csv());
            failed = !report.passed();
        }
        Command::SweepLoss {
            loss_lo,
            loss_hi,
            step_db,
            resolution_db,
        } => {
            let cfg = load_config(common)?;
            let bits = common.bits.unwrap_or(DEFAULT_SWEEP_BITS);
            if !(*step_db > 0.0 && loss_lo <= loss_hi) {
                return Err(Failure::Invalid("need step_db > 0 and loss_lo <= loss_hi".into()));
            }
            let n = ((loss_hi - loss_lo) / step_db + 1e-9).floor() as usize;
            let grid: Vec<f64> = (0..=n).map(|i| loss_lo + i as f64 * step_db).collect();
            let points = loss_sweep(&cfg, bits, &grid)?;
            write_artifact(dir, "loss_sweep.csv", &loss_sweep_csv(&points))?;
            let summary = match max_loss_search(&cfg, bits, *loss_lo, *loss_hi, *resolution_db) {
                Ok(db) => format!("key,value\nmax_loss_db,{db:?}\nresolution_db,{resolution_db:?}\n"),
                Err(e) => {
                    failed = true;
                    format!("key,value\nmax_loss_db,none\nreason,{}\n", e.to_string().replace(',', ";"))
                }
            };
            write_artifact(dir, "max_loss.csv", &summary)?;
            let _ = write!(out, "{summary}");
        }
        Command::SweepSensitivity { bitrates } => {
            let cfg = load_config(common)?;
            let settings = SweepSettings {
                n_bits: common.bits.unwrap_or(DEFAULT_SWEEP_BITS),
                ..Default::default()
            };
            let rows = sensitivity_sweep(&cfg, bitrates, &settings)?;
            let csv = sweep_csv(&rows);
            write_artifact(dir, "sensitivity_sweep.csv", &csv)?;
            let _ = write!(out, "{csv}");
        }
        Command::Eye { bins_v } => {
            let cfg = load_config(common)?;
            let w = capture_waveforms(&cfg, common.bits.unwrap_or(DEFAULT_EYE_UI))?;
            let eye = eye_diagram(&w.rx_input, &cfg, *bins_v)?;
            write_artifact(dir, "eye.csv", &eye.to_csv())?;
            let centre = cfg.samples_per_ui / 2;
            let opening = eye.opening(centre).map_or("none".to_string(), |v| format!("{v:?}"));
            let _ = writeln!(out, "eye_opening_v_at_phase_{centre},{opening}");
        }
        Command::DumpWaveforms => {
            let cfg = load_config(common)?;
            let n_ui = common.bits.unwrap_or(common.max_ui).min(common.max_ui);
            let w = capture_waveforms(&cfg, n_ui)?;
            write_artifact(dir, "driver.csv", &w.driver.to_csv())?;
            write_artifact(dir, "channel.csv", &w.channel.to_csv())?;
            write_artifact(dir, "rx_input.csv", &w.rx_input.to_csv())?;
            let mut logic = String::from("time_s,level\n");
            for (i, &l) in w.rx_logic.levels.iter().enumerate() {
                logic.push_str(&format!("{:e},{}\n", w.rx_input.time_of(i), l as u8));
            }
            write_artifact(dir, "rx_logic.csv", &logic)?;
            let _ = writeln!(out, "wrote {n_ui} UI per stage");
        }
    }
    Ok(if failed && common.strict {
        EXIT_FAILED_RUN
    } else {
        EXIT_OK
    })
}
