use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twisted_hodge::scalar::Mode;

mod commands;
mod report;
mod theta;

use report::{Format, RunReport, Status, Timing};

#[derive(Parser, Debug)]
#[command(name = "twisted-hodge", version, about = "Twisted Dolbeault cohomology, index and vanishing checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check d² = 0 and unimodularity of a model file.
    Validate(ModelArgs),
    /// Twisted Hodge table and χ_y-genus.
    Hodge(HodgeArgs),
    /// Run one of the named verifications.
    Verify(VerifyArgs),
    /// Smallest singular values of the twisted Dirac operator along a t-grid.
    Scan(ScanArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Path to a model file, or the name of a bundled model.
    #[arg(long)]
    pub model: String,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "exact" => Ok(Mode::Exact),
        "numeric" => Ok(Mode::Numeric),
        other => Err(format!("mode must be exact or numeric, got {other:?}")),
    }
}

#[derive(Args, Debug)]
pub struct HodgeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Label from the model file or an inline sum like `2*phi_bar_1`.
    #[arg(long, default_value = "0")]
    pub theta: String,
    /// `all` or a single holomorphic degree.
    #[arg(long, default_value = "all")]
    pub p: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    #[value(alias = "1.1")]
    Vanishing,
    #[value(alias = "3.3")]
    LieIdentity,
    #[value(alias = "3.4")]
    RealPart,
    #[value(alias = "3.5")]
    CurvatureIdentity,
    #[value(alias = "3.6")]
    H00,
    #[value(alias = "A.1")]
    Commutator,
    #[value(alias = "A.2")]
    Primitive,
    #[value(alias = "A.4")]
    Genus,
    Index,
    Lee,
}

impl Which {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    /// Model label or inline sum; for torus checks a coefficient expression.
    #[arg(long)]
    pub theta: Option<String>,
    /// Values of t for the index check.
    #[arg(long, value_delimiter = ',', default_value = "0,1,5")]
    pub t: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub torus_n: usize,
    #[arg(long, default_value_t = 4)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 0)]
    pub p: usize,
    /// Random forms per identity check.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Primitive dimensions `s^{p,q}` for `p + q ≤ n − 1`, rows joined by `;`.
    #[arg(long)]
    pub s_table: Option<String>,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 1)]
    pub torus_n: usize,
    #[arg(long, default_value_t = 4)]
    pub cutoff: usize,
    /// Coefficient expression, e.g. `2+cos` or `(1+0.5*sin(2*pi*y_1))*dzbar_1`.
    #[arg(long)]
    pub theta: String,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4,8,16")]
    pub t_grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub p: usize,
    /// Skip the comparison against cutoff + 2.
    #[arg(long)]
    pub no_stability: bool,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("TWISTED_HODGE_THREADS") {
        let threads: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("TWISTED_HODGE_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<RunReport> {
    let started = Instant::now();
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let mut report = RunReport::new(echo.join(" "));
    match &cli.command {
        Command::Validate(a) => commands::validate(a, &mut report)?,
        Command::Hodge(a) => commands::hodge(a, &mut report)?,
        Command::Verify(a) => commands::verify(a, &mut report)?,
        Command::Scan(a) => commands::scan(a, &mut report)?,
    }
    report.finish();
    if cli.timing {
        report.timing = Some(Timing {
            seconds: started.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
        });
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|_| run(&cli));
    match outcome {
        Ok(report) => {
            if let Err(e) = report.emit(cli.format, cli.out.as_deref()) {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            if report.status == Status::Fail {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            // Library errors all describe bad input or unmet preconditions.
            if e.downcast_ref::<twisted_hodge::Error>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
