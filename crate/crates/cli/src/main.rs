use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evanesim::{load_scenario, run_reproduction, sweep, Error, RunReport, SweepParameter};

/// Two-channel photodetection simulator for pulses crossing a dielectric mirror.
#[derive(Parser)]
#[command(name = "evanesim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write CSV tables, plot scripts and report.json.
    Run {
        scenario: PathBuf,
        /// Output directory; defaults to the scenario's `output_dir`, then `out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun a scenario for each value of one parameter and write sweep.csv.
    Sweep {
        scenario: PathBuf,
        /// periods, fwhm_bandwidth or center_wavelength
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario file without simulating.
    Validate { scenario: PathBuf },
}

fn out_dir(flag: Option<PathBuf>, configured: Option<&Path>) -> PathBuf {
    flag.or_else(|| configured.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn summarize(r: &RunReport) {
    println!("retardation       {:.3} fs", r.retardation_fs);
    println!("barrier thickness {:.1} nm", r.barrier_thickness_nm);
    println!("plateau ratio     {:.6e}", r.plateau_ratio);
    println!("group delay       {:.4} fs", r.group_delay_fs);
    println!("SHG peak delay    {:.4} fs", r.shg_peak_delay_fs);
    println!("min delta P       {:.6e}", r.delta_p_min_significant);
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { scenario, out } => {
            let s = load_scenario(&scenario)?;
            let dir = out_dir(out, s.output_dir.as_deref());
            let report = run_reproduction(&s, &dir)?;
            summarize(&report);
            println!("wrote {}", dir.display());
        }
        Command::Sweep {
            scenario,
            param,
            values,
            out,
        } => {
            let parameter: SweepParameter = param.parse()?;
            let s = load_scenario(&scenario)?;
            let dir = out_dir(out, s.output_dir.as_deref());
            let reports = sweep(&s, parameter, &values, &dir)?;
            println!("{:>14}  {:>14}  {:>10}", parameter.name(), "ratio", "delay_fs");
            for (v, r) in values.iter().zip(&reports) {
                println!(
                    "{v:>14}  {:>14.6e}  {:>10.4}",
                    r.plateau_ratio, r.group_delay_fs
                );
            }
            if !reports.is_empty() {
                println!("wrote {}", dir.display());
            }
        }
        Command::Validate { scenario } => {
            let s = load_scenario(&scenario)?;
            s.validate()?;
            println!("{}: ok", scenario.display());
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else if matches!(e, Error::Io { .. }) {
        1
    } else {
        3
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
