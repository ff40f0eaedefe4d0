use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quench_core::config::ExperimentConfig;
use quench_core::harness::{export_tables, run, run_scaling, ResultBundle, CODE_VERSION};
use quench_core::QuenchError;

const THREADS_ENV: &str = "QUENCH_THREADS";

#[derive(Parser)]
#[command(name = "quench", about = "Time statistics of observables after a small quench of the TAM chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override `rng_seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override `output_dir` from the config. The directory must exist.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Worker threads (default: $QUENCH_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the quench pipeline and write all tables.
    Run { config: PathBuf },
    /// Run only the finite-size scaling probes.
    Scaling { config: PathBuf },
    /// Parse and validate a config without computing anything.
    Validate { config: PathBuf },
    /// Print the version.
    Version,
}

fn exit_code(err: &QuenchError) -> u8 {
    match err {
        QuenchError::Config(_) | QuenchError::InvalidModel(_) | QuenchError::InvalidInput(_) => 1,
        QuenchError::Io { .. } => 3,
        _ => 2,
    }
}

fn load(path: &Path, cli: &Cli) -> Result<ExperimentConfig, QuenchError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn configure_threads(cli: &Cli) -> Result<(), QuenchError> {
    let from_env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.parse::<usize>()
                .map_err(|_| QuenchError::Config(format!("{THREADS_ENV}: not a thread count: `{v}`")))?,
        ),
        Err(_) => None,
    };
    if let Some(n) = cli.threads.or(from_env) {
        if n == 0 {
            return Err(QuenchError::Config("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| QuenchError::Config(e.to_string()))?;
    }
    Ok(())
}

fn report(bundle: &ResultBundle) {
    if let Some(q) = &bundle.quench {
        let s = &q.spectrum;
        println!(
            "retained {} states, deficit {:.3e}, purity {:.6}",
            s.len(),
            s.deficit,
            s.purity()
        );
        for o in &q.observables {
            print!(
                "{}: mean {:.6e}, variance {:.6e}",
                o.kind, o.moments.mean, o.moments.variance
            );
            for r in &o.references {
                print!(", KS({}) {:.4}", r.model.name(), r.report.ks_distance);
            }
            println!();
        }
    }
    for s in &bundle.scaling {
        for (quantity, fit, expected) in &s.fits {
            println!(
                "{} {}: exponent {:.3} (expected {}), r² {:.4}",
                s.probe.label(),
                quantity,
                fit.exponent,
                expected,
                fit.r_squared
            );
        }
    }
}

fn execute(cli: &Cli) -> Result<(), QuenchError> {
    configure_threads(cli)?;
    match &cli.command {
        Command::Version => {
            println!("quench {CODE_VERSION}");
            Ok(())
        }
        Command::Validate { config } => {
            load(config, cli)?;
            println!("{}: ok", config.display());
            Ok(())
        }
        Command::Run { config } | Command::Scaling { config } => {
            let cfg = load(config, cli)?;
            if !cfg.output_dir.is_dir() {
                return Err(QuenchError::Io {
                    path: cfg.output_dir.display().to_string(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
                });
            }
            let bundle = match cli.command {
                Command::Run { .. } => run(&cfg)?,
                _ => run_scaling(&cfg)?,
            };
            report(&bundle);
            let files = export_tables(&bundle, &cfg.output_dir)?;
            println!("wrote {} files to {}", files.len(), cfg.output_dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
