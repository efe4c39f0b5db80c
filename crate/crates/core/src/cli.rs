//! Command-line front end: `simulate`, `verify` and `sweep-sigma`.
//!
//! Exit codes: 0 success, 1 verification or physics failure, 2 usage or config error.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::evolve::{run_with, step_plan};
use crate::io::{dump_state, Manifest};
use crate::limit::{sweep_sigma, Verdict};
use crate::verify::{run_suite, write_rows, Suite, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "capelast", version, about = "Capillary neo-Hookean free-boundary simulator and identity checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a configuration and write diagnostics, dumps and a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a residual battery and write its table.
    Verify {
        #[arg(long)]
        suite: String,
        /// Optional config supplying the grid depth and history length.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run one member per σ from the same initial data and compare them.
    SweepSigma {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated, non-increasing; end with 0 to measure d(σ, 0).
        #[arg(long)]
        sigmas: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long)]
    pub nz: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub snapshot_every: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(n) = self.nx {
            cfg.init.nx = n;
        }
        if let Some(n) = self.ny {
            cfg.init.ny = n;
        }
        if let Some(n) = self.nz {
            cfg.init.nz = n;
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(s) = self.seed {
            cfg.init.seed = s;
        }
        if let Some(n) = self.snapshot_every {
            cfg.snapshot_every = n;
        }
        cfg.validate()
    }
}

fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_path(path)?;
    overrides.apply(&mut cfg)?;
    Ok(cfg)
}

/// Result of `simulate`, for callers that want more than the exit code.
#[derive(Debug)]
pub struct SimulateSummary {
    pub steps_done: usize,
    pub records: Vec<DiagnosticsRecord>,
    pub error: Option<String>,
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<SimulateSummary> {
    fs::create_dir_all(out)?;
    fs::write(out.join("config.txt"), cfg.to_text())?;
    let csv_path = out.join("diagnostics.csv");
    let mut csv = BufWriter::new(File::create(&csv_path)?);
    writeln!(csv, "{}", DiagnosticsRecord::CSV_HEADER)?;
    let mut io_error: Option<std::io::Error> = None;
    let result = run_with(cfg, |_, rec| {
        if io_error.is_none() {
            if let Err(e) = writeln!(csv, "{}", rec.csv_row()).and_then(|_| csv.flush()) {
                io_error = Some(e);
            }
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let grid = &result.grid;
    let mut dumps = Vec::new();
    if cfg.dumps {
        let dir = out.join("fields");
        fs::create_dir_all(&dir)?;
        for (step, state) in &result.snapshots {
            for mut e in dump_state(&dir, grid, *step, state)? {
                e.path = Path::new("fields").join(e.path);
                dumps.push(e);
            }
        }
    }
    let steps_done = result.records.len().saturating_sub(1);
    let error = result.error.as_ref().map(|e| e.to_string());
    let (planned, _) = step_plan(cfg.dt, cfg.t_final);
    Manifest {
        format: "CAPELAST1".into(),
        config: cfg.to_text(),
        nx: grid.nx(),
        ny: grid.ny(),
        nz: grid.nz(),
        depth: grid.depth(),
        sigma: cfg.init.sigma,
        t: result.final_state.t,
        dt: result.dt,
        steps_planned: planned,
        steps_done,
        t_final: cfg.t_final,
        diagnostics: "diagnostics.csv".into(),
        dumps,
        error: error.clone(),
    }
    .write(&out.join("manifest.json"))?;
    Ok(SimulateSummary {
        steps_done,
        records: result.records,
        error,
    })
}

fn usage_or_failure(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::InvalidGrid(_)
        | Error::InvalidCutoff(_)
        | Error::InfeasibleCutoff { .. }
        | Error::InvalidSweep(_)
        | Error::InvalidMultiIndex(_)
        | Error::InsufficientHistory { .. }
        | Error::CflViolation { .. }
        | Error::Io(_)
        | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn report(e: &Error) -> i32 {
    eprintln!("error: {e}");
    usage_or_failure(e)
}

fn parse_sigmas(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidSweep(format!("cannot parse sigma '{x}'")))
        })
        .collect()
}

pub fn run_command(cmd: Command) -> i32 {
    match cmd {
        Command::Simulate { config, out, overrides } => {
            let cfg = match load_config(&config, &overrides) {
                Ok(c) => c,
                Err(e) => return report(&e),
            };
            match simulate(&cfg, &out) {
                Ok(s) => {
                    println!("simulate: {} steps written to {}", s.steps_done, out.display());
                    match s.error {
                        Some(e) => {
                            eprintln!("run aborted: {e}");
                            EXIT_FAILURE
                        }
                        None => EXIT_OK,
                    }
                }
                Err(e) => report(&e),
            }
        }
        Command::Verify {
            suite,
            config,
            out,
            overrides,
        } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => return report(&e),
            };
            let mut opts = VerifyOptions::default();
            if let Some(path) = config {
                match RunConfig::from_path(&path) {
                    Ok(c) => {
                        opts.nx = c.init.nx;
                        opts.ny = c.init.ny;
                        opts.nz = c.init.nz;
                        opts.depth = c.init.depth;
                        opts.history = c.history_len;
                    }
                    Err(e) => return report(&e),
                }
            }
            opts.nx = overrides.nx.unwrap_or(opts.nx);
            opts.ny = overrides.ny.unwrap_or(opts.ny);
            opts.nz = overrides.nz.unwrap_or(opts.nz);
            let rows = match run_suite(suite, &opts) {
                Ok(r) => r,
                Err(e) => return report(&e),
            };
            let written = match &out {
                Some(dir) => fs::create_dir_all(dir)
                    .map_err(Error::from)
                    .and_then(|_| Ok(File::create(dir.join(format!("verify_{suite}.csv")))?))
                    .and_then(|f| Ok(write_rows(BufWriter::new(f), &rows)?)),
                None => write_rows(std::io::stdout().lock(), &rows).map_err(Error::from),
            };
            if let Err(e) = written {
                return report(&e);
            }
            let failed = rows.iter().filter(|r| !r.passed()).count();
            eprintln!("verify {suite}: {} checks, {failed} failed", rows.len());
            if failed == 0 {
                EXIT_OK
            } else {
                EXIT_FAILURE
            }
        }
        Command::SweepSigma {
            config,
            sigmas,
            out,
            overrides,
        } => {
            let cfg = match load_config(&config, &overrides) {
                Ok(c) => c,
                Err(e) => return report(&e),
            };
            let sigmas = match parse_sigmas(&sigmas) {
                Ok(s) => s,
                Err(e) => return report(&e),
            };
            let (rep, _) = match sweep_sigma(&cfg, &sigmas) {
                Ok(r) => r,
                Err(e) => return report(&e),
            };
            let written = fs::create_dir_all(&out)
                .and_then(|_| fs::write(out.join("sweep.csv"), rep.to_csv()))
                .and_then(|_| fs::write(out.join("sweep_summary.txt"), rep.summary()));
            if let Err(e) = written {
                return report(&e.into());
            }
            print!("{}", rep.summary());
            let distinct = sigmas.windows(2).all(|w| w[1] < w[0]);
            match rep.verdict {
                Verdict::Void { .. } => EXIT_FAILURE,
                Verdict::NotMonotone if distinct => EXIT_FAILURE,
                _ => EXIT_OK,
            }
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_command(cli.command),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_config_is_a_usage_error() {
        assert_eq!(main_with_args(["capelast", "simulate"]), EXIT_USAGE);
        assert_eq!(
            main_with_args(["capelast", "simulate", "--config", "/nonexistent/run.cfg"]),
            EXIT_USAGE
        );
    }

    #[test]
    fn unknown_suite_is_a_usage_error() {
        assert_eq!(main_with_args(["capelast", "verify", "--suite", "bogus"]), EXIT_USAGE);
    }

    #[test]
    fn sigma_list_parsing() {
        assert_eq!(parse_sigmas("0.1, 1e-2,0").unwrap(), vec![0.1, 0.01, 0.0]);
        assert!(parse_sigmas("0.1,x").is_err());
    }

    #[test]
    fn overrides_apply_and_validate() {
        let mut cfg = RunConfig::default();
        let o = Overrides {
            nx: Some(16),
            dt: Some(0.5),
            seed: Some(9),
            ..Overrides::default()
        };
        o.apply(&mut cfg).unwrap();
        assert_eq!((cfg.init.nx, cfg.dt, cfg.init.seed), (16, 0.5, 9));
        let bad = Overrides {
            nx: Some(7),
            ..Overrides::default()
        };
        assert!(bad.apply(&mut cfg).is_err());
    }
}
