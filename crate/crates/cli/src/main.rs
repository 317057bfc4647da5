use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};
use thbheat::driver::{run, run_comparison, Preset, SimulationConfig};

/// Adaptive THB-spline heat transfer simulator.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Accepted for reproducible invocations; the pipeline is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides the field sampling grid size of the configs.
    #[arg(long, global = true)]
    sample_n: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several configs and compare their energies with a reference.
    Compare {
        /// Comma-separated config files.
        #[arg(long, value_delimiter = ',', required = true)]
        configs: Vec<PathBuf>,
        /// Config used as reference (must be one of --configs).
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a bundled scenario config.
    Preset {
        /// circular_arc or alternating
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &Path, sample_n: Option<usize>) -> Result<SimulationConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = SimulationConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(n) = sample_n {
        cfg.sample_n = n;
    }
    Ok(cfg)
}

fn label(path: &Path) -> String {
    path.file_stem().map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned())
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        bail!("--threads must be positive");
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    #[cfg(not(feature = "parallel"))]
    log::warn!("built without the parallel feature; --threads {n} ignored");
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    configure_threads(cli.threads)?;
    if let Some(seed) = cli.seed {
        log::debug!("seed {seed} (no stochastic components)");
    }

    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config, cli.sample_n)?;
            let result = run(&cfg, Some(&out)).with_context(|| format!("running {}", config.display()))?;
            let last = result.records.last().expect("at least one step");
            println!("{} steps, final dofs {}, results in {}", result.records.len(), last.n_dofs, out.display());
        }
        Command::Compare { configs, reference, out } => {
            let reference_index = configs
                .iter()
                .position(|c| c == &reference)
                .with_context(|| format!("reference {} is not among --configs", reference.display()))?;
            let mut labelled = Vec::with_capacity(configs.len());
            for path in &configs {
                let mut name = label(path);
                if labelled.iter().any(|(l, _): &(String, SimulationConfig)| *l == name) {
                    name = format!("{name}_{}", labelled.len());
                }
                labelled.push((name, load(path, cli.sample_n)?));
            }
            let runs = run_comparison(&labelled, reference_index, Some(&out))?;
            for r in &runs {
                let worst = r.eps_i.iter().map(|e| e.value).fold(0.0, f64::max);
                println!("{}: max eps_i {worst:.3e}", r.label);
            }
            println!("comparison written to {}", out.join("comparison.csv").display());
        }
        Command::Preset { name, out } => {
            let preset: Preset = name.parse()?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(&out, preset.config().to_config_string())
                .with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}
