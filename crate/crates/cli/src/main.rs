use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use walkoff::config::{EngineChoice, RunConfig};
use walkoff::error::ExitClass;
use walkoff::scenario::{self, SweepParam, Trend, SELFCHECK_GRID_POINTS, SELFCHECK_TOLERANCE};
use walkoff::{Error, Execution};

#[derive(Parser)]
#[command(name = "walkoff", version, about = "Two-photon amplitude of type-I PDC in walk-off compensated crystal stacks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Overrides the engine named in the config.
    #[arg(long, global = true, value_enum)]
    engine: Option<EngineArg>,

    /// Overrides the output directory named in the config.
    #[arg(long, global = true)]
    outdir: Option<PathBuf>,

    /// Evaluate grids on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Closed,
    Oracle,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every stack in the config and write grids, images and a report.
    Simulate { config: PathBuf },
    /// Repeat a run for several values of one parameter.
    Sweep {
        config: PathBuf,
        /// pump_fwhm (µm) or L_total (mm).
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
    },
    /// Compare the closed form against the quadrature oracle on a 41x41 grid.
    Selfcheck,
}

fn load(path: &PathBuf, cli: &Cli) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = RunConfig::parse(&text)?;
    apply_overrides(&mut cfg, cli);
    Ok(cfg)
}

fn apply_overrides(cfg: &mut RunConfig, cli: &Cli) {
    if let Some(e) = cli.engine {
        cfg.engine = match e {
            EngineArg::Closed => EngineChoice::Closed,
            EngineArg::Oracle => EngineChoice::Oracle,
        };
    }
    if let Some(dir) = &cli.outdir {
        cfg.outdir = dir.clone();
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Simulate { config } => {
            let cfg = load(config, cli)?;
            let report = scenario::run_scenarios(&cfg, exec)?;
            let pm = &report.phase_matching;
            println!(
                "alpha = {:.4} deg, walk-off = {:.4} deg",
                pm.alpha_deg, pm.walkoff_deg
            );
            println!("{:<14} {:>10} {:>10} {:>9}", "stack", "swap_asym", "skewness", "K");
            for s in &report.scenarios {
                println!(
                    "{:<14} {:>10.4e} {:>10.4e} {:>9.4}",
                    s.name, s.swap_asym, s.marginal_skewness, s.schmidt_k
                );
            }
            println!(
                "wrote {} files to {}",
                report.manifest.len() + 1,
                cfg.outdir.display()
            );
            Ok(true)
        }
        Command::Sweep { config, param, values } => {
            let cfg = load(config, cli)?;
            let param = SweepParam::parse(param).ok_or_else(|| {
                Error::Invalid(format!("unknown sweep parameter `{param}` (pump_fwhm, L_total)"))
            })?;
            let table = scenario::sweep(&cfg, param, values, exec)?;
            print!("{}", table.to_csv());
            if let Some(trend) = table.single_aniso_trend {
                let word = match trend {
                    Trend::Increasing => "increasing",
                    Trend::Decreasing => "decreasing",
                    Trend::NonMonotonic => "non-monotonic",
                };
                println!("single_aniso swap_asym is {word} in {}", param.name());
            }
            Ok(true)
        }
        Command::Selfcheck => {
            let mut cfg = RunConfig::baseline();
            apply_overrides(&mut cfg, cli);
            let rows = scenario::selfcheck(&cfg, SELFCHECK_GRID_POINTS, exec)?;
            let mut ok = true;
            for r in &rows {
                let pass = r.max_deviation < SELFCHECK_TOLERANCE;
                ok &= pass;
                println!(
                    "{} {:<14} max |dF| = {:.3e}  oracle delta = {:.3e}",
                    if pass { "PASS" } else { "FAIL" },
                    r.preset.name(),
                    r.max_deviation,
                    r.oracle_max_delta
                );
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(ExitClass::Numeric as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_class() as u8)
        }
    }
}
