use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use snumlab::sweep::{run_sweep, Job, Report, SweepConfig};

/// Sweeps over block-radial embeddings and diagonal operators.
#[derive(Parser)]
#[command(name = "snumlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predicted decay rates of embeddings, with fitted exponents.
    Rates(Common),
    /// Upper and lower bounds for approximation numbers of diagonal operators.
    Diag(Common),
    /// Weighted lattice counts.
    Lattice(Common),
    /// Nuclearity verdicts and series diagnostics.
    Nuclear(Common),
    /// Norm ratios under the weight-ordered reindexing.
    Equiv(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Write only this format; both are written by default.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

const CONFIG_ERROR: u8 = 2;
const IO_ERROR: u8 = 1;

fn write(report: &Report, out: &Path, job: Job, format: Option<Format>) -> snumlab::Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    if !matches!(format, Some(Format::Json)) {
        let path = out.join(format!("{job}.csv"));
        report.write_csv(BufWriter::new(File::create(&path)?))?;
        written.push(path);
    }
    if !matches!(format, Some(Format::Csv)) {
        let path = out.join(format!("{job}.json"));
        report.write_json(BufWriter::new(File::create(&path)?))?;
        written.push(path);
    }
    Ok(written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (job, args) = match cli.command {
        Command::Rates(a) => (Job::Rates, a),
        Command::Diag(a) => (Job::Diag, a),
        Command::Lattice(a) => (Job::Lattice, a),
        Command::Nuclear(a) => (Job::Nuclear, a),
        Command::Equiv(a) => (Job::Equiv, a),
    };
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let mut config = match SweepConfig::from_toml(&text, job) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error in {}: {e}", args.config.display());
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let report = match run_sweep(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_precondition() { 3 } else { IO_ERROR });
        }
    };
    match write(&report, &args.out, job, args.format) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(IO_ERROR);
        }
    }
    println!("{job}: {} points, {} failures", report.points, report.failures);
    for r in report.records.iter().filter(|r| r.error.is_some()) {
        eprintln!("point {}: {}", r.index, r.error.as_ref().map(|e| e.message.as_str()).unwrap_or_default());
    }
    ExitCode::from(report.status().exit_code() as u8)
}
