use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use wld_cli::commands::{
    b_table_csv, density_curve_csv, json_text, lemma41_json, measure_density_csv, measure_moments_csv, rmt_sim_json,
};
use wld_cli::resolve_threads;
use wld_cli::verify::{run_verify, Level};
use wld_core::kernels::Family;

#[derive(Parser)]
#[command(name = "wld", version, about = "Weighted one-level density kernels, measures and checks")]
struct Cli {
    /// Worker threads (falls back to WLD_THREADS, then to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(name = "theoremA")]
    TheoremA,
    #[value(name = "conjectureD")]
    ConjectureD,
    #[value(name = "Sp")]
    Sp,
    #[value(name = "SOeven")]
    SOeven,
    #[value(name = "U")]
    U,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::TheoremA => Family::TheoremA,
            FamilyArg::ConjectureD => Family::ConjectureD,
            FamilyArg::Sp => Family::Sp,
            FamilyArg::SOeven => Family::SOeven,
            FamilyArg::U => Family::U,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Exact residue coefficients b_r(j) as CSV.
    BTable {
        #[arg(long, default_value_t = 4)]
        r_max: u32,
        /// Permit r-max above 8.
        #[arg(long)]
        allow_large: bool,
    },
    /// Kernel curves W(x) as CSV.
    DensityCurve {
        /// Restrict to one family; all families otherwise.
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        x_max: f64,
        #[arg(long, default_value_t = 201)]
        npoints: usize,
    },
    /// Chebyshev moments of a local measure as CSV.
    MeasureMoments {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u32,
        /// Use the unweighted family instead of the harmonic one.
        #[arg(long)]
        unweighted: bool,
        #[arg(long, default_value_t = 10)]
        ell_max: u32,
    },
    /// Density of a local measure on [-2, 2] as CSV.
    MeasureDensity {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        unweighted: bool,
        #[arg(long, default_value_t = 401)]
        npoints: usize,
    },
    /// Weighted one-level statistic of Haar SO(2N) as JSON.
    RmtSim {
        #[arg(long = "N", default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Prime sum against its main term as JSON.
    Lemma41 {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long = "R", default_value_t = 1e14)]
        big_r: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 10_000_000)]
        limit: u64,
    },
    /// Runs the verification suite; exits nonzero on any failure.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        level: LevelArg,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut h = std::io::stdout().lock();
            h.write_all(text.as_bytes())?;
            Ok(h.flush()?)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let env = std::env::var("WLD_THREADS").ok();
    if let Some(n) = resolve_threads(cli.threads, env.as_deref())? {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let text = match cli.command {
        Command::BTable { r_max, allow_large } => b_table_csv(r_max, allow_large)?,
        Command::DensityCurve { family, r, x_min, x_max, npoints } => {
            density_curve_csv(family.map(Family::from), r, x_min, x_max, npoints)?
        }
        Command::MeasureMoments { p, r, unweighted, ell_max } => measure_moments_csv(p, r, !unweighted, ell_max)?,
        Command::MeasureDensity { p, r, unweighted, npoints } => measure_density_csv(p, r, !unweighted, npoints)?,
        Command::RmtSim { n, samples, r, delta, seed } => json_text(&rmt_sim_json(n, samples, r, delta, seed)?),
        Command::Lemma41 { n, big_r, delta, limit } => json_text(&lemma41_json(n, big_r, delta, limit)?),
        Command::Verify { level } => {
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let report = run_verify(level);
            emit(&cli.out, &json_text(&serde_json::to_value(&report)?))?;
            for name in report.failures() {
                eprintln!("FAILED: {name}");
            }
            return Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    };
    emit(&cli.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
