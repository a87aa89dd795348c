//! Command-line front end: series evaluation, figure data, model sums and SIS
//! experiments. Outputs are CSV or JSON plus a run manifest.
//!
//! Exit codes: 0 ok, 2 input error, 3 numerical failure, 4 caustic.

mod figures;
mod inputs;
mod manifest;
mod sis;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use laplace_sums::series::eval_series_direct;
use laplace_sums::standard_sums::{exp_sum, gaussian_sum_direct, gaussian_sum_theta, oscillatory_factor_p, GaussianSumParams};
use laplace_sums::{Error, SeriesProblem};
use serde_json::json;

use figures::Figure;
use manifest::{manifest_beside, Run};
use sis::SisAction;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::input(format!("{}: {e}", path.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CausticFormed { .. } => 4,
            Error::NonSummable(_)
            | Error::NonIntegrable(_)
            | Error::ToleranceExceeded { .. }
            | Error::IntegrationFailure(_) => 3,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "laplace-sums", version, about = "Asymptotics of peaked series and SIS semiclassics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Direct evaluation of n^(1-a) sum_k exp(-n f(k/n^a)) g(k/n^a).
    SeriesEval {
        /// Preset (paper-example, one, linear), inline JSON or JSON file.
        #[arg(long)]
        f: String,
        #[arg(long, default_value = "one")]
        g: String,
        /// Exponent as a fraction ("1/2") or a decimal.
        #[arg(long)]
        alpha: String,
        /// Comma-separated values of n.
        #[arg(long, default_value = "")]
        n: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// CSV data behind figures 1a-1d.
    Figures {
        #[arg(long)]
        which: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exponential sum, Gaussian sum, its theta form and the factor P.
    Sums {
        #[arg(long)]
        n: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// SIS experiments from a JSON run configuration.
    Sis {
        #[arg(value_enum)]
        action: SisAction,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn series_eval(f: &str, g: &str, alpha: &str, n: &str, tol: f64, out: &Path) -> Result<(), CliError> {
    let inputs = json!({"f": f, "g": g, "alpha": alpha, "n": n, "tol": tol});
    let problem = SeriesProblem::new(inputs::parse_function(f)?, inputs::parse_function(g)?, inputs::parse_alpha(alpha)?);
    let ns: Vec<u64> = inputs::parse_list(n)?;
    let mut run = Run::start("series-eval", inputs);
    let rows = ns
        .iter()
        .map(|&n| eval_series_direct(&problem, n, tol).map(|r| (n, r.value, r.truncation_bound)))
        .collect::<Result<Vec<_>, _>>()?;
    run.write_csv(out, &["n", "direct_value", "truncation_bound"], &rows)?;
    run.finish(&manifest_beside(out))
}

fn figure(which: &str, out: &Path) -> Result<(), CliError> {
    let fig: Figure = which.parse()?;
    let grid = fig.n_grid();
    let inputs = json!({"which": fig.id(), "alpha": fig.alpha().to_string(), "n_grid": fig.grid_description()});
    let mut run = Run::start("figures", inputs);
    let rows = figures::compute(fig, &grid)?;
    run.write_csv(&out.join(format!("figure_{}.csv", fig.id())), fig.header(), &rows)?;
    run.finish(&out.join(format!("figure_{}.manifest.json", fig.id())))
}

fn sums(n: &str, alpha: f64, gamma: f64, x0: f64, out: &Path) -> Result<(), CliError> {
    let inputs = json!({"n": n, "alpha": alpha, "gamma": gamma, "x0": x0});
    let ns: Vec<u64> = inputs::parse_list(n)?;
    let mut run = Run::start("sums", inputs);
    let rows = ns
        .iter()
        .map(|&n| {
            let p = GaussianSumParams::new(n, alpha, gamma, x0)?;
            Ok((
                n,
                exp_sum(n, alpha, gamma),
                gaussian_sum_direct(&p),
                gaussian_sum_theta(&p)?,
                oscillatory_factor_p(&p),
            ))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let header = ["n", "exp_sum", "gaussian_direct", "gaussian_theta", "oscillatory_p"];
    run.write_csv(out, &header, &rows)?;
    run.finish(&manifest_beside(out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::SeriesEval { f, g, alpha, n, tol, out } => series_eval(f, g, alpha, n, *tol, out),
        Command::Figures { which, out } => figure(which, out),
        Command::Sums { n, alpha, gamma, x0, out } => sums(n, *alpha, *gamma, *x0, out),
        Command::Sis { action, config, out } => sis::run(*action, config, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
