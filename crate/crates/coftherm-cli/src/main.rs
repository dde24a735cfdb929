//! `coftherm` command-line entry point.
//!
//! Subcommands: dmr, kappa, kappa-batch, vdos, psed, attn, features,
//! rf-cv, pipeline. JSON results go to stdout with the resolved options
//! embedded; CSV artifacts go to stdout and, with `--out-dir`, to files
//! alongside a `manifest.json` of resolved options. Failures exit
//! nonzero with an error JSON on stderr.

mod commands;
mod output;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "coftherm", version, about = "COF thermal-transport analysis toolkit")]
struct Cli {
    /// Directory for output artifacts and the run manifest.
    #[arg(long, global = true)]
    out_dir: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify main-branch vs. dangling atoms and report the DMR.
    Dmr(commands::DmrArgs),
    /// Extract thermal conductivity from a bin-temperature profile.
    Kappa(commands::KappaArgs),
    /// Batch kappa extraction over a JSON manifest of profile pairs.
    KappaBatch(commands::KappaBatchArgs),
    /// Per-group VDOS curves and the overlap metric S.
    Vdos(commands::VdosArgs),
    /// Phonon spectral energy density map along one supercell axis.
    Psed(commands::PsedArgs),
    /// Aggregate an attention stack into per-atom scores.
    Attn(commands::AttnArgs),
    /// Build a feature table from structures and a kappa manifest.
    Features(commands::FeaturesArgs),
    /// Random-forest cross-validation and feature importances.
    RfCv(commands::RfCvArgs),
    /// Batch dataset assembly: one CSV row per structure.
    Pipeline(commands::PipelineArgs),
}

fn main() {
    if let Ok(threads) = std::env::var("COFTHERM_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }

    let cli = Cli::parse();
    let out_dir = cli.out_dir.clone();
    let result = match cli.command {
        Command::Dmr(args) => commands::dmr(args, out_dir.as_deref()),
        Command::Kappa(args) => commands::kappa(args, out_dir.as_deref()),
        Command::KappaBatch(args) => commands::kappa_batch(args, out_dir.as_deref()),
        Command::Vdos(args) => commands::vdos(args, out_dir.as_deref()),
        Command::Psed(args) => commands::psed(args, out_dir.as_deref()),
        Command::Attn(args) => commands::attn(args, out_dir.as_deref()),
        Command::Features(args) => commands::features(args, out_dir.as_deref()),
        Command::RfCv(args) => commands::rf_cv(args, out_dir.as_deref()),
        Command::Pipeline(args) => commands::pipeline(args, out_dir.as_deref()),
    };

    if let Err(err) = result {
        let kind = err
            .downcast_ref::<coftherm::Error>()
            .map(|e| e.kind())
            .unwrap_or("other");
        eprintln!(
            "{}",
            serde_json::json!({ "error": err.to_string(), "kind": kind })
        );
        std::process::exit(1);
    }
}
