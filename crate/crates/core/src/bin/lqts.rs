use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lqts::experiments::{
    self, FewLevelJob, GridSpec, LzJob, Overrides, ScalingJob, SweepJob, EXIT_CONFIG, EXIT_OK,
    EXIT_PARTIAL,
};
use lqts::susceptibility::Method;
use lqts::Error;

/// Local quantum thermal susceptibility of Ising and XXZ chains.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// LQTS of several windows along a parameter sweep (CSV)
    Sweep(Common),
    /// Peak or trough scaling with window size at beta = 3L/4 (JSON)
    Scaling(Common),
    /// Truncated heat capacity of the lowest levels (CSV)
    FewLevel(Common),
    /// Two-level heat-capacity classification of a gap profile (JSON)
    Lz(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Schmidt,
    Eigendiff,
    Fidelity,
    All,
}

#[derive(Args)]
struct Common {
    /// JSON job file
    #[arg(long)]
    config: PathBuf,
    /// Chain length
    #[arg(long = "L")]
    sites: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// Parameter grid as min:max:count[:log]
    #[arg(long)]
    grid: Option<String>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
}

impl Common {
    fn overrides(&self) -> Result<Overrides, Error> {
        Ok(Overrides {
            sites: self.sites,
            beta: self.beta,
            grid: self.grid.as_deref().map(GridSpec::parse).transpose()?,
            out: self.out.clone(),
            workers: self.workers,
            methods: self.method.map(|m| match m {
                MethodArg::Schmidt => vec![Method::Schmidt],
                MethodArg::Eigendiff => vec![Method::EigenDifference],
                MethodArg::Fidelity => vec![Method::Fidelity],
                MethodArg::All => Method::ALL.to_vec(),
            }),
        })
    }

    fn read_config(&self) -> Result<String, Error> {
        std::fs::read_to_string(&self.config)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", self.config.display())))
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<(), Error> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Sweep(c) => {
            let mut job = SweepJob::from_json(&c.read_config()?)?;
            job.apply(&c.overrides()?);
            let out = experiments::run_sweep(&job)?;
            out.write_csv(output(job.out.as_deref())?)?;
            if out.failed_rows() > 0 {
                eprintln!("{} of {} rows failed", out.failed_rows(), out.rows.len());
            }
            Ok(out.exit_code())
        }
        Command::Scaling(c) => {
            let mut job = ScalingJob::from_json(&c.read_config()?)?;
            job.apply(&c.overrides()?);
            let fits = experiments::run_peak_scaling(&job)?;
            write_json(job.out.as_deref(), &fits)?;
            Ok(if fits.iter().all(|f| f.alpha.is_finite()) {
                EXIT_OK
            } else {
                EXIT_PARTIAL
            })
        }
        Command::FewLevel(c) => {
            let mut job = FewLevelJob::from_json(&c.read_config()?)?;
            job.apply(&c.overrides()?);
            let rows = experiments::run_few_level(&job)?;
            experiments::write_few_level_csv(&rows, output(job.out.as_deref())?)?;
            Ok(if rows.iter().any(|r| r.outcome.is_err()) {
                EXIT_PARTIAL
            } else {
                EXIT_OK
            })
        }
        Command::Lz(c) => {
            let mut job = LzJob::from_json(&c.read_config()?)?;
            job.apply(&c.overrides()?);
            job.resolve_against(c.config.parent().unwrap_or(Path::new(".")));
            let report = experiments::run_lz(&job)?;
            write_json(job.out.as_deref(), &report)?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(experiments::exit_code(&e) as u8)
        }
    }
}
