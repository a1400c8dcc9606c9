use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use two_slit_bohm::runner::{main_with, Overrides};
use two_slit_bohm::scenario::Case;

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    #[value(name = "symmetric_3_1")]
    Symmetric,
    #[value(name = "selective_3_2")]
    Selective,
}

/// Two-particle two-slit ensembles: Bohmian trajectories against |psi|^2.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of particle pairs.
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long, value_enum)]
    case: Option<CaseArg>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        out_dir: cli.out_dir,
        seed: cli.seed,
        pairs: cli.pairs,
        case: cli.case.map(|c| match c {
            CaseArg::Symmetric => Case::SymmetricDetection,
            CaseArg::Selective => Case::SelectiveDetection,
        }),
    };
    let code = main_with(cli.config.as_deref(), &overrides);
    ExitCode::from(code as u8)
}
