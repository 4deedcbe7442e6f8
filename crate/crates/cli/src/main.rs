use std::path::{Path, PathBuf};

use activecanvas::harness::{bench, simulate, SimulatedUser, Strategy, BENCH_TOUCHED};
use activecanvas_core::synthetic::{generate_synthetic, SyntheticSpec};
use activecanvas_core::{EngineConfig, Workspace, WorkspaceStore};
use activecanvas_service::config::DEFAULT_PORT;
use activecanvas_service::{load_engine_config, AppState};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "activecanvas", version, about = "Infer canvas layouts from a few placed items")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic labelled dataset.
    Gen {
        #[arg(long, default_value_t = 5)]
        classes: usize,
        #[arg(long, default_value_t = 250)]
        items: usize,
        #[arg(long, default_value_t = 500)]
        dims: usize,
        #[arg(long, default_value_t = 20)]
        informative: usize,
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Play a simulated user against a dataset and report clustering quality.
    Simulate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "8,14,20")]
        schedule: Vec<usize>,
        #[arg(long, default_value_t = Strategy::ClassAnchors)]
        strategy: Strategy,
        #[arg(long, default_value_t = 0.03)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Time refinement at 8, 20 and 50 touched items.
    Bench {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the websocket and HTTP service.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn engine_config(path: Option<&Path>, seed: Option<u64>) -> Result<EngineConfig> {
    let mut config = match path {
        Some(p) => load_engine_config(p)?,
        None => EngineConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

/// Opens a dataset directory, including any committed features saved in it.
fn open_dataset(dir: &Path, seed: u64) -> Result<Workspace> {
    let dir = dir.canonicalize().with_context(|| format!("dataset {}", dir.display()))?;
    let (Some(root), Some(id)) = (dir.parent(), dir.file_name().and_then(|n| n.to_str())) else {
        bail!("{} is not a dataset directory", dir.display());
    };
    let mut ws = WorkspaceStore::new(root).reload(id, seed)?;
    ws.new_session(seed)?;
    Ok(ws)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen {
            classes,
            items,
            dims,
            informative,
            noise,
            seed,
            out,
        } => {
            let spec = SyntheticSpec {
                classes,
                items,
                dims,
                informative,
                noise,
                seed,
            };
            generate_synthetic(&spec)?.write(&out)?;
            eprintln!("wrote {items} items x {dims} features to {}", out.display());
        }
        Command::Simulate {
            data,
            schedule,
            strategy,
            sigma,
            seed,
            config,
            report,
        } => {
            let config = engine_config(config.as_deref(), Some(seed))?;
            let user = SimulatedUser {
                strategy,
                sigma,
                schedule,
                seed,
            };
            let mut ws = open_dataset(&data, seed)?;
            let run = simulate(&mut ws, &user, &config)?;
            let json = serde_json::to_string_pretty(&run)?;
            match report {
                Some(path) => {
                    std::fs::write(&path, json + "\n")?;
                    eprintln!("final ARI {:.3}, report in {}", run.final_ari, path.display());
                }
                None => println!("{json}"),
            }
        }
        Command::Bench { data, reps, config } => {
            let config = engine_config(config.as_deref(), None)?;
            let ws = open_dataset(&data, config.seed)?;
            println!("N={} D={}", ws.len(), ws.dims());
            println!("{:>8} {:>5} {:>10} {:>10}", "touched", "reps", "p50_ms", "p95_ms");
            for row in bench(&ws, &config, reps, &BENCH_TOUCHED)? {
                println!(
                    "{:>8} {:>5} {:>10.1} {:>10.1}",
                    row.touched, row.reps, row.p50_ms, row.p95_ms
                );
            }
        }
        Command::Serve {
            port,
            data_dir,
            config,
            seed,
        } => {
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| "info".into()),
                )
                .init();
            let config = engine_config(config.as_deref(), seed)?;
            let state = AppState::new(WorkspaceStore::new(data_dir), config);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", port))
                    .await
                    .with_context(|| format!("binding port {port}"))?;
                activecanvas_service::serve(listener, state, async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(())
}
