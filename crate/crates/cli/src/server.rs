//! Experiment service verbs.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use humility_experiment::{Backends, ContentPack, EventStore, ExperimentConfig, ExperimentService, SystemClock};

use crate::read_text;

#[derive(Args)]
pub struct ServeArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Event-log directory; overrides the configuration.
    #[arg(long)]
    store: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExportArgs {
    /// TOML experiment configuration (content pack and arms).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Event-log directory to read.
    #[arg(long)]
    store: PathBuf,
    /// Directory for participants.csv, comments.csv and surveys.csv.
    #[arg(long)]
    out: PathBuf,
}

fn load_config(path: Option<&PathBuf>) -> anyhow::Result<ExperimentConfig> {
    Ok(match path {
        Some(p) => ExperimentConfig::from_toml(&read_text(p)?)?,
        None => ExperimentConfig::default(),
    })
}

pub fn serve(a: ServeArgs, seed: Option<u64>) -> anyhow::Result<()> {
    let mut cfg = load_config(a.config.as_ref())?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if a.store.is_some() {
        cfg.store_dir = a.store;
    }
    // blocking HTTP clients in remote backends must live outside the runtime
    let svc = Arc::new(ExperimentService::new(cfg)?);
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    let served = rt.block_on(humility_experiment::serve(svc.clone(), a.addr));
    drop(rt);
    svc.write_snapshot()?;
    drop(svc);
    Ok(served?)
}

/// Replays the log with stub backends; nothing is classified or generated.
pub fn export(a: ExportArgs) -> anyhow::Result<()> {
    let cfg = load_config(a.config.as_ref())?;
    let content = match &cfg.content_pack {
        Some(p) => ContentPack::load(p)?,
        None => ContentPack::sample(),
    };
    let store = EventStore::open(&a.store, false)?;
    let svc = ExperimentService::with_parts(cfg, content, Backends::stub(), Arc::new(SystemClock), store)?;
    svc.export_to_dir(&a.out)?;
    eprintln!("{} sessions exported to {}", svc.states().len(), a.out.display());
    Ok(())
}
