use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spin_bench::exit_code_for;
use spin_bench::gen::{generate, GenSpec, MatrixKind};
use spin_bench::harness::{
    compare_model, read_sweep_csv, run_invert, scalability, sweep, write_compare_csv,
    write_scale_csv, write_sweep_csv, SweepConfig, DEFAULT_SWEEP_SEED,
};
use spin_bench::record::{Algorithm, SWEEP_HEADER};
use spin_core::cost::{lu_cost_levelsum, spin_cost_levelsum, CostParams};
use spin_core::error::{Error, Result};
use spin_core::executor::{ExecConfig, Executor};
use spin_core::io::{read_matrix, write_matrix};

/// Block-recursive matrix inversion bench tool.
#[derive(Parser)]
#[command(name = "spin-bench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random matrix file.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long = "block-size")]
        block_size: usize,
        #[arg(long)]
        seed: u64,
        /// spd | dd | uniform
        #[arg(long, default_value = "spd")]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Invert a matrix file and write the result plus a report row.
    Invert {
        #[arg(long = "in")]
        input: PathBuf,
        /// spin | lu
        #[arg(long)]
        algorithm: String,
        #[arg(long = "block-size")]
        block_size: usize,
        #[arg(long, default_value_t = 1)]
        cores: usize,
        #[arg(long)]
        out: PathBuf,
        /// Single-row CSV report (sweep schema).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sweep partition sizes for one or more algorithms.
    Sweep {
        #[arg(long)]
        n: usize,
        /// Comma-separated: spin,lu
        #[arg(long, value_delimiter = ',', default_value = "spin,lu")]
        algorithms: Vec<String>,
        /// Comma-separated splits per side, e.g. 2,4,8,16,32
        #[arg(long, value_delimiter = ',')]
        b: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        cores: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the analytical cost breakdown as CSV (method,term,value).
    Model {
        /// spin | lu
        #[arg(long)]
        algorithm: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        b: usize,
        #[arg(long, default_value_t = 1)]
        cores: usize,
    },
    /// Join a sweep CSV with model predictions.
    Compare {
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cores: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure wall clock across core counts.
    Scale {
        #[arg(long = "in")]
        input: PathBuf,
        /// spin | lu
        #[arg(long)]
        algorithm: String,
        /// Comma-separated core counts, e.g. 1,2,4,8
        #[arg(long, value_delimiter = ',')]
        cores: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are not argument errors.
            use clap::error::ErrorKind;
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(4),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err) as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            n,
            block_size,
            seed,
            kind,
            out,
        } => {
            let spec = GenSpec {
                n,
                block_size,
                seed,
                kind: kind.parse::<MatrixKind>()?,
            };
            let matrix = generate(&spec)?;
            write_matrix(&matrix, &out)
        }
        Command::Invert {
            input,
            algorithm,
            block_size,
            cores,
            out,
            report,
        } => {
            let algorithm: Algorithm = algorithm.parse()?;
            let exec = Executor::new(ExecConfig::from_env_or(cores)?);
            let matrix = reblocked(&input, block_size)?;
            let (inverse, record) = run_invert(algorithm, &matrix, &exec, 0)?;
            write_matrix(&inverse, &out)?;
            if let Some(report_path) = report {
                std::fs::write(
                    &report_path,
                    format!("{SWEEP_HEADER}\n{}\n", record.to_csv_row()),
                )?;
            }
            println!(
                "inverted n={} block_size={} algorithm={} wall_ms={:.3} residual_inf={:?}",
                record.n,
                record.block_size,
                record.algorithm.as_str(),
                record.wall_ms,
                record.residual_inf
            );
            Ok(())
        }
        Command::Sweep {
            n,
            algorithms,
            b,
            cores,
            repeats,
            out,
        } => {
            let algorithms: Vec<Algorithm> = algorithms
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_>>()?;
            if b.is_empty() {
                return Err(Error::InvalidParams("need at least one --b value".into()));
            }
            let exec = Executor::new(ExecConfig::from_env_or(cores)?);
            let cfg = SweepConfig {
                n,
                algorithms,
                b_values: b,
                cores: exec.cores(),
                repeats,
                seed: DEFAULT_SWEEP_SEED,
                kind: MatrixKind::Spd,
            };
            let rows = sweep(&cfg, &exec)?;
            write_sweep_csv(&rows, &out)?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
        Command::Model {
            algorithm,
            n,
            b,
            cores,
        } => {
            let algorithm: Algorithm = algorithm.parse()?;
            let params = CostParams::new(n, b, cores)?;
            let breakdown = match algorithm {
                Algorithm::Spin => spin_cost_levelsum(&params),
                Algorithm::Lu => lu_cost_levelsum(&params),
            };
            println!("method,term,value");
            for (term, value) in breakdown.terms() {
                println!("{},{term},{value:?}", algorithm.as_str());
            }
            Ok(())
        }
        Command::Compare {
            sweep,
            n,
            cores,
            out,
        } => {
            let records = read_sweep_csv(&sweep)?;
            let result = compare_model(&records, n, cores)?;
            write_compare_csv(&result, &out)?;
            println!(
                "measured argmin b={} predicted argmin b={} within_one_step={} calibration={:.3e}",
                result.measured_argmin_b,
                result.predicted_argmin_b,
                result.argmin_within_one_step,
                result.calibration
            );
            Ok(())
        }
        Command::Scale {
            input,
            algorithm,
            cores,
            out,
        } => {
            let algorithm: Algorithm = algorithm.parse()?;
            if cores.is_empty() {
                return Err(Error::InvalidParams(
                    "need at least one --cores value".into(),
                ));
            }
            let matrix = read_matrix(&input, None)?;
            let rows = scalability(algorithm, &matrix, &cores)?;
            write_scale_csv(&rows, &out)?;
            for row in &rows {
                println!(
                    "cores={} wall_ms={:.3} ideal_ms={:.3} efficiency={:.3}",
                    row.cores, row.wall_ms, row.ideal_ms, row.efficiency
                );
            }
            Ok(())
        }
    }
}

/// Loads a matrix file and re-blocks it to the requested block size.
fn reblocked(path: &std::path::Path, block_size: usize) -> Result<spin_core::BlockMatrix> {
    let matrix = read_matrix(path, Some(block_size))?;
    if matrix.block_size() == block_size {
        return Ok(matrix);
    }
    spin_core::block::partition(&spin_core::block::densify(&matrix), block_size)
}
