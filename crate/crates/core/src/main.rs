use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cdmos::cli::{
    basis_table, dump_relaxations, parse_measure_spec, parse_problem, run, sample_density, CliError,
    RunOptions,
};

#[derive(Parser)]
#[command(name = "cdmos", version, about = "Moment-SOS bounds and Christoffel-Darboux densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print a JSON report.
    Solve {
        file: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Sample the density on N points per axis (CSV).
        #[arg(long, value_name = "N")]
        density_grid: Option<usize>,
        /// Destination of the density CSV (default: stdout).
        #[arg(long, value_name = "PATH")]
        density_out: Option<PathBuf>,
        /// SDP tolerance, overriding the file.
        #[arg(long)]
        tol: Option<f64>,
        /// Largest order to run.
        #[arg(long)]
        max_order: Option<u32>,
        /// Write the plain-text SDP of every order here.
        #[arg(long, value_name = "PATH")]
        dump_sdp: Option<PathBuf>,
    },
    /// Print the orthonormal basis of a measure and K_t(x, x) samples.
    Basis {
        /// `uniform_box:-1..1,-1..1`, `uniform_box:2` or `counting_hypercube:2`.
        measure: String,
        t: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Kernel samples per axis.
        #[arg(long, default_value_t = 5)]
        points: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn threads() -> usize {
    std::env::var("CDMOS_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

fn write(path: &PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    // exit code 2 is reserved for partial success, so argument errors use 1
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Solve {
            file,
            json,
            density_grid,
            density_out,
            tol,
            max_order,
            dump_sdp,
        } => {
            if density_grid.is_some() && json.is_none() && density_out.is_none() {
                return Err(CliError::Usage(
                    "--density-grid needs --json or --density-out so the outputs do not share stdout".into(),
                ));
            }
            let text = fs::read_to_string(&file)
                .map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
            let pf = parse_problem(&text)?;
            let opts = RunOptions {
                tol,
                max_order,
                threads: threads(),
            };
            if let Some(path) = dump_sdp {
                let mut buf = Vec::new();
                dump_relaxations(&pf, &opts, &mut buf)?;
                write(&path, &String::from_utf8_lossy(&buf))?;
            }
            let report = run(&pf, &opts)?;
            match &json {
                Some(path) => write(path, &report.to_json())?,
                None => emit(&format!("{}\n", report.to_json()))?,
            }
            if let Some(points) = density_grid {
                let csv = sample_density(&report, points)?.to_csv();
                match &density_out {
                    Some(path) => write(path, &csv)?,
                    None => emit(&csv)?,
                }
            }
            for row in report.rows.iter().filter(|r| r.status != "solved") {
                let why = row.lower_error.as_ref().or(row.upper_error.as_ref());
                eprintln!("order {}: {}", row.t, why.map_or("failed", |s| s.as_str()));
            }
            Ok(report.exit_code as u8)
        }
        Command::Basis {
            measure,
            t,
            format,
            points,
        } => {
            let m = parse_measure_spec(&measure)?;
            let table = basis_table(&m, t, points)?;
            match format {
                Format::Csv => emit(&table.to_csv())?,
                Format::Json => emit(&format!(
                    "{}\n",
                    serde_json::to_string_pretty(&table).map_err(|e| CliError::Json(e.to_string()))?
                ))?,
            }
            Ok(0)
        }
    }
}
