use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracfund_cli::config::{self, LoadedConfig};
use fracfund_cli::{
    cmd_fundamental, cmd_mlf, cmd_solve, cmd_verify, write_summary, CliError, EXIT_CONFIG, EXIT_OK, EXIT_VERIFY_FAILED,
};

/// Fundamental solution matrices of linear Caputo systems and the solution formulas built on them.
///
/// Exit codes: 0 ok, 1 verification failure, 2 config error, 3 numerical error,
/// 4 method precondition violated. FRACFUND_THREADS caps the worker threads.
#[derive(Debug, Parser)]
#[command(name = "fracfund", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute F(t, s) on the triangle grid and write it as CSV.
    Fundamental {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `[output] fundamental` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the Cauchy problem; writes the CSV and `<out>.meta.json`.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// direct, repr-pc, repr-gc or repr-gc-compact; defaults to `method` in the config.
        #[arg(long)]
        method: Option<String>,
        /// Defaults to `[output] solution` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite and write a JSON report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `[output] report` in the config.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the Mittag-Leffler function E_{alpha,beta}(z).
    Mlf {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        z: f64,
        /// Series truncation tolerance.
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("FRACFUND_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("FRACFUND_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot set up {n} threads: {e}")))
}

fn with_config(path: &Path, run: impl FnOnce(&LoadedConfig) -> Result<u8, CliError>) -> Result<u8, CliError> {
    run(&config::load(path)?)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Fundamental { config, out } => with_config(&config, |cfg| {
            let out = cfg.output_path(
                out.as_deref(),
                cfg.run.output.fundamental.as_ref(),
                "fundamental output",
            )?;
            cmd_fundamental(cfg, &out)?;
            Ok(EXIT_OK)
        }),
        Command::Solve { config, method, out } => with_config(&config, |cfg| {
            let method = cfg.method(method.as_deref())?;
            let out = cfg.output_path(out.as_deref(), cfg.run.output.solution.as_ref(), "solution output")?;
            let meta = cmd_solve(cfg, method, &out)?;
            eprintln!(
                "{}: N = {}, residual {:.3e}, {:.2} s",
                meta.method, meta.grid_n, meta.residual, meta.wall_time_s
            );
            Ok(EXIT_OK)
        }),
        Command::Verify { config, report } => with_config(&config, |cfg| {
            let path = cfg.output_path(report.as_deref(), cfg.run.output.report.as_ref(), "report")?;
            let report = cmd_verify(cfg, &path)?;
            write_summary(&report, std::io::stdout().lock()).ok();
            Ok(if report.all_pass() { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }),
        Command::Mlf { alpha, beta, z, tol } => {
            println!("{}", cmd_mlf(alpha, beta, z, tol)?);
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fracfund: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
