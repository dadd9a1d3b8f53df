use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tangency_cli::bound;
use tangency_cli::figures::{self, Fig1, Fig2, Fig3, Fig4};
use tangency_cli::verify::{self, VerifyConfig};

const USAGE_ERROR: u8 = 2;
const VERIFY_FAILURE: u8 = 1;

#[derive(Parser)]
#[command(
    name = "tangency",
    version,
    about = "Tangent-optimized Jensen-like bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output file; `-` or omitted for stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// SIMO capacity bounds against the number of antennas k.
    Fig1 {
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 100)]
        k_max: u64,
        /// Step of the alpha grid.
        #[arg(long, default_value_t = 0.001)]
        resolution: f64,
        #[arg(long, default_value_t = 10.0)]
        alpha_max: f64,
        /// Monte Carlo samples per k.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        no_oracle: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Exponential-SNR capacity bounds against theta.
    Fig2 {
        #[arg(long, default_value_t = 5.0)]
        gain: f64,
        #[arg(long, default_value_t = 0.1)]
        theta_min: f64,
        #[arg(long, default_value_t = 5.0)]
        theta_max: f64,
        #[arg(long, default_value_t = 0.05)]
        theta_step: f64,
        #[arg(long, default_value_t = 0.001)]
        resolution: f64,
        #[arg(long, default_value_t = 10.0)]
        alpha_max: f64,
        #[arg(long)]
        no_oracle: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Binomial fractional-moment bounds against n.
    Fig3 {
        #[arg(long, default_value_t = 0.2)]
        p: f64,
        #[arg(long, default_value_t = 100)]
        n_max: u64,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        /// Step of both the alpha and s grids.
        #[arg(long, default_value_t = 0.01)]
        resolution: f64,
        #[arg(long, default_value_t = 10.0)]
        alpha_max: f64,
        #[arg(long)]
        no_oracle: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Gap factor mu_t against t.
    Fig4 {
        #[arg(long, default_value_t = 0.1)]
        t_min: f64,
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.01)]
        t_step: f64,
        /// Step of the s grid before refinement.
        #[arg(long, default_value_t = 0.001)]
        resolution: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run every acceptance check and invariant; exit 1 if any fails.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_failure: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate one operation: `bound <op> key=value ...`.
    Bound {
        op: String,
        params: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn open(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p.as_os_str() != "-" => Box::new(BufWriter::new(File::create(p)?)),
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("tangency: {msg}");
    ExitCode::from(code)
}

fn write_out(
    path: &Option<PathBuf>,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> io::Result<()> {
    let mut w = open(path)?;
    body(&mut w)?;
    w.flush()
}

fn emit(path: &Option<PathBuf>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> ExitCode {
    match write_out(path, body) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(USAGE_ERROR, e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Fig1 {
            sigma2,
            k_max,
            resolution,
            alpha_max,
            samples,
            seed,
            no_oracle,
            common,
        } => {
            let cfg = Fig1 {
                sigma2,
                k_max,
                resolution,
                alpha_max,
                samples,
                seed,
                oracle: !no_oracle,
            };
            match figures::fig1(&cfg) {
                Ok(rows) => emit(&common.output, |w| figures::write_rows(w, &rows)),
                Err(e) => fail(USAGE_ERROR, e),
            }
        }
        Command::Fig2 {
            gain,
            theta_min,
            theta_max,
            theta_step,
            resolution,
            alpha_max,
            no_oracle,
            common,
        } => {
            let cfg = Fig2 {
                gain,
                theta_min,
                theta_max,
                theta_step,
                resolution,
                alpha_max,
                oracle: !no_oracle,
                ..Fig2::default()
            };
            match figures::fig2(&cfg) {
                Ok(rows) => emit(&common.output, |w| figures::write_rows(w, &rows)),
                Err(e) => fail(USAGE_ERROR, e),
            }
        }
        Command::Fig3 {
            p,
            n_max,
            t,
            resolution,
            alpha_max,
            no_oracle,
            common,
        } => {
            let cfg = Fig3 {
                p,
                n_max,
                t,
                resolution,
                alpha_max,
                oracle: !no_oracle,
                ..Fig3::default()
            };
            match figures::fig3(&cfg) {
                Ok(rows) => emit(&common.output, |w| figures::write_rows(w, &rows)),
                Err(e) => fail(USAGE_ERROR, e),
            }
        }
        Command::Fig4 {
            t_min,
            t_max,
            t_step,
            resolution,
            common,
        } => {
            let cfg = Fig4 {
                t_min,
                t_max,
                t_step,
                s_resolution: resolution,
                ..Fig4::default()
            };
            match figures::fig4(&cfg) {
                Ok(rows) => emit(&common.output, |w| figures::write_gap_rows(w, &rows)),
                Err(e) => fail(USAGE_ERROR, e),
            }
        }
        Command::Verify {
            seed,
            inject_failure,
            common,
        } => {
            let cfg = VerifyConfig {
                seed,
                tol_scale: if inject_failure { -1.0 } else { 1.0 },
            };
            let checks = verify::run(&cfg);
            let report = verify::report(&cfg, &checks);
            let written = write_out(&common.output, |w| {
                serde_json::to_writer_pretty(&mut *w, &report)?;
                writeln!(w)
            });
            if let Err(e) = written {
                return fail(USAGE_ERROR, e);
            }
            if checks.iter().all(|c| c.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(VERIFY_FAILURE)
            }
        }
        Command::Bound { op, params, common } => match bound::run(&op, &params) {
            Ok(v) => emit(&common.output, |w| {
                serde_json::to_writer_pretty(&mut *w, &v)?;
                writeln!(w)
            }),
            Err(e) => fail(USAGE_ERROR, e),
        },
    }
}
