use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use sst::config::{GraphKind, PresetId};
use sst::error::RunError;
use sst::metrics::write_graph_props;
use sst::runner::{graph_props, load_config, run, sweep, SweepDimension};

#[derive(Parser)]
#[command(name = "sst", version, about = "Social SatTorrent simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file with `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Feature preset a..i
    #[arg(long)]
    preset: Option<PresetId>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Override any config key, e.g. `--set duration_s=3600`
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_kv)]
    set: Vec<(String, String)>,
}

#[derive(Subcommand)]
enum Command {
    /// Run replications of one scenario
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Vary one parameter across values
    Sweep {
        /// sat_ratio, node_count, mi_model or preset
        #[arg(long)]
        dimension: SweepDimension,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Structural properties of generated social graphs
    GraphProps {
        /// ba or to
        #[arg(long)]
        model: GraphKind,
        #[arg(long)]
        nodes: usize,
        /// Number of independent graphs
        #[arg(long, default_value_t = 1)]
        graphs: u64,
        #[command(flatten)]
        common: Common,
        /// Write CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}

fn resolve(common: &Common) -> Result<sst::config::ScenarioConfig, RunError> {
    let mut overrides = common.set.clone();
    if let Some(s) = common.seed {
        overrides.push(("seed".into(), s.to_string()));
    }
    if let Some(r) = common.reps {
        overrides.push(("reps".into(), r.to_string()));
    }
    let cfg = load_config(common.config.as_deref(), common.preset, &overrides)?;
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { common, out } => {
            let cfg = resolve(&common)?;
            for s in run(&cfg, &out)? {
                let mean = s.mean_duration.map_or("nan".to_string(), |m| format!("{m:.1}"));
                println!(
                    "rep {} seed {}: mean duration {mean} s, files/user {:.2} -> {}",
                    s.replication,
                    s.seed,
                    s.files_per_user,
                    s.dir.display()
                );
            }
        }
        Command::Sweep { dimension, values, common, out } => {
            let cfg = resolve(&common)?;
            let report = sweep(dimension, &values, &cfg, &out)?;
            println!("{} runs completed -> {}", report.completed, out.display());
            for f in &report.failures {
                eprintln!("failed: {}={} rep {}: {}", dimension, f.value, f.replication, f.error);
            }
            if !report.failures.is_empty() {
                anyhow::bail!("{} of {} runs failed", report.failures.len(), report.failures.len() + report.completed);
            }
        }
        Command::GraphProps { model, nodes, graphs, common, out } => {
            let mut cfg = resolve(&common)?;
            cfg.graph_kind = model;
            cfg.node_count = nodes;
            let rows: Vec<_> = graph_props(&cfg, graphs)?
                .into_iter()
                .map(|(seed, p)| (format!("{}-{seed}", cfg.graph_model().name()), p))
                .collect();
            match out {
                Some(path) => {
                    let f = std::fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
                    write_graph_props(&rows, f)?;
                }
                None => {
                    let stdout = std::io::stdout();
                    write_graph_props(&rows, stdout.lock())?;
                    stdout.lock().flush()?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config_error = matches!(e.downcast_ref::<RunError>(), Some(RunError::Config(_) | RunError::Input { .. }))
                || e.downcast_ref::<sst::error::ConfigError>().is_some();
            ExitCode::from(if config_error { 1 } else { 2 })
        }
    }
}
