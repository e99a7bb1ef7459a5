use cgo_lab::config::ExperimentConfig;
use cgo_lab::experiments::{plot_script, run_suite, Suite};
use cgo_lab::io::write_atomic;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cgo-lab", version, about = "CGO verification pipelines for the planar Schrodinger inverse problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML). Defaults to the built-in reference config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "cgo-lab-out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "CGO_LAB_JOBS")]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Closed-form norm lattice and scaling exponents.
    AppendixChecks,
    /// Cauchy transform checks.
    CauchyChecks,
    /// Integration by parts, T, S and phi decay, stationary phase.
    Decay,
    /// CGO series, envelopes and residuals.
    Cgo,
    /// Alessandrini pipeline and DN map plumbing.
    Reconstruct,
    /// Everything above.
    All,
    /// Print the reference config.
    PrintConfig,
}

fn suite(c: Command) -> Option<Suite> {
    Some(match c {
        Command::AppendixChecks => Suite::Appendix,
        Command::CauchyChecks => Suite::Cauchy,
        Command::Decay => Suite::Decay,
        Command::Cgo => Suite::Cgo,
        Command::Reconstruct => Suite::Reconstruct,
        Command::All => Suite::All,
        Command::PrintConfig => return None,
    })
}

fn run(cli: &Cli) -> cgo_lab::Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default_config(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let Some(suite) = suite(cli.command) else {
        print!("{}", cfg.to_toml());
        return Ok(true);
    };
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| cgo_lab::LabError::Config(e.to_string()))?;
    }
    let dir = cli.out.join(suite.name());
    let report = run_suite(&cfg, suite);
    for a in &report.artifacts {
        write_atomic(&dir.join(&a.name), &a.bytes)?;
    }
    write_atomic(&dir.join("config.toml"), cfg.to_toml().as_bytes())?;
    write_atomic(&dir.join("plot.py"), plot_script(suite).as_bytes())?;
    let verdict = serde_json::to_vec_pretty(&report.verdict_json()).expect("verdict serializes");
    write_atomic(&dir.join("verdict.json"), &verdict)?;
    for v in &report.verdicts {
        println!(
            "{} [{}] {} ({:.1}s of {:.0}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.criterion,
            v.name,
            v.seconds,
            v.budget_seconds
        );
    }
    println!("outputs in {}", display(&dir));
    Ok(report.passed())
}

fn display(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
