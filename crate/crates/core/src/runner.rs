//! Replications, sweeps and results bundles.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::{expand_preset, GraphKind, PresetId, ScenarioConfig};
use crate::error::{ConfigError, RunError};
use crate::graphgen::{graph_properties, p_nsn, GraphProperties};
use crate::metrics::{
    duration_series_until, files_per_user, files_per_user_until, mean_duration, non_friend_upload_series_until,
    sat_correlations, write_correlations, write_download_records, write_durations, write_files_per_user,
    write_graph_props, write_nonfriend, write_pnsn, CorrelationRow, PnsnRow,
};
use crate::protocol::write_transfer_log;
use crate::simcore::{build_graph, init_world, LedgerEvent, World};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Files every replication directory contains.
pub const BUNDLE_FILES: [&str; 10] = [
    "manifest.txt",
    "transfers.csv",
    "downloads.csv",
    "ledger.csv",
    "durations.csv",
    "nonfriend.csv",
    "files_per_user.csv",
    "correlations.csv",
    "graph_props.csv",
    "pnsn.csv",
];

/// Headline numbers of one finished replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub replication: u64,
    pub seed: u64,
    pub dir: PathBuf,
    pub mean_duration: Option<f64>,
    pub files_per_user: f64,
    pub non_friend_bytes: u64,
    pub corr_sat_flag: Option<f64>,
    pub corr_sat_friend_count: Option<f64>,
}

/// Resolves a config the way the command line does: defaults, then the
/// file, then the preset (explicit argument wins over the file's own
/// `preset` key), then `key=value` overrides.
pub fn load_config(
    file: Option<&Path>,
    preset: Option<PresetId>,
    overrides: &[(String, String)],
) -> Result<ScenarioConfig, RunError> {
    let mut cfg = ScenarioConfig::default();
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|source| RunError::Input {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.apply_kv(&text)?;
    }
    if let Some(p) = preset.or(cfg.preset) {
        cfg = expand_preset(p, &cfg);
    }
    for (k, v) in overrides {
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

/// The config of replication `r`: seed offset by `r`, a single repetition,
/// so that the manifest alone reproduces the bundle.
pub fn replication_config(base: &ScenarioConfig, r: u64) -> ScenarioConfig {
    ScenarioConfig {
        seed: base.seed.wrapping_add(r),
        reps: 1,
        ..base.clone()
    }
}

/// Runs one replication to the end of its horizon.
pub fn simulate(config: &ScenarioConfig) -> Result<World, ConfigError> {
    let mut world = init_world(config)?;
    world.run();
    Ok(world)
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path).map(BufWriter::new).map_err(|source| RunError::Output {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Output {
        path: path.to_path_buf(),
        source,
    }
}

fn mi_name(config: &ScenarioConfig) -> String {
    config.mi_model.map_or("off".to_string(), |m| m.to_string())
}

fn write_ledger<W: Write>(events: &[LedgerEvent], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["time", "kind", "from", "to", "amount"])?;
    for e in events {
        let row = match *e {
            LedgerEvent::Payment { time, from, to, amount } => {
                [time.to_string(), "payment".into(), from.to_string(), to.to_string(), amount.to_string()]
            }
            LedgerEvent::Donation { time, from, to, amount } => {
                [time.to_string(), "donation".into(), from.to_string(), to.to_string(), amount.to_string()]
            }
            LedgerEvent::Mint { time, peer, amount } => {
                [time.to_string(), "mint".into(), String::new(), peer.to_string(), amount.to_string()]
            }
        };
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes the complete bundle of a finished world into `dir`.
pub fn write_bundle(world: &World, dir: &Path, note: &str) -> Result<RunSummary, RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let cfg = &world.config;
    let horizon = Some(cfg.duration_s);

    let path = dir.join("manifest.txt");
    let mut m = create(&path)?;
    writeln!(m, "# sst {VERSION}").map_err(io_err(&path))?;
    if !note.is_empty() {
        writeln!(m, "# {note}").map_err(io_err(&path))?;
    }
    m.write_all(cfg.to_kv().as_bytes()).map_err(io_err(&path))?;
    m.flush().map_err(io_err(&path))?;

    let path = dir.join("transfers.csv");
    let mut f = create(&path)?;
    write_transfer_log(&world.log, &mut f).map_err(io_err(&path))?;
    f.flush().map_err(io_err(&path))?;

    write_download_records(&world.records, create(&dir.join("downloads.csv"))?)?;
    write_ledger(&world.ledger_events, create(&dir.join("ledger.csv"))?)?;

    let durations = duration_series_until(&world.records, cfg.bucket_s, horizon);
    write_durations(&durations, create(&dir.join("durations.csv"))?)?;
    let nonfriend = non_friend_upload_series_until(&world.log, cfg.bucket_s, horizon);
    write_nonfriend(&nonfriend, create(&dir.join("nonfriend.csv"))?)?;
    let files = files_per_user_until(&world.records, world.user_count(), cfg.bucket_s, horizon);
    write_files_per_user(&files, create(&dir.join("files_per_user.csv"))?)?;

    let (flag, friends) = sat_correlations(&world.records, &world.graph);
    let row = CorrelationRow {
        mi_model: mi_name(cfg),
        corr_sat_flag: flag,
        corr_sat_friend_count: friends,
    };
    write_correlations(&[row], create(&dir.join("correlations.csv"))?)?;

    let model = cfg.graph_model().name().to_string();
    write_graph_props(
        &[(model.clone(), graph_properties(&world.graph))],
        create(&dir.join("graph_props.csv"))?,
    )?;
    let pnsn = PnsnRow {
        model,
        ratio_or_nodes: cfg.sat_ratio,
        p_nsn: p_nsn(&world.graph),
    };
    write_pnsn(&[pnsn], create(&dir.join("pnsn.csv"))?)?;

    Ok(RunSummary {
        replication: 0,
        seed: cfg.seed,
        dir: dir.to_path_buf(),
        mean_duration: mean_duration(&world.records),
        files_per_user: files_per_user(&world.records, world.user_count()),
        non_friend_bytes: nonfriend.iter().map(|p| p.non_friend_bytes).sum(),
        corr_sat_flag: flag,
        corr_sat_friend_count: friends,
    })
}

fn run_one(base: &ScenarioConfig, r: u64, out: &Path) -> Result<RunSummary, RunError> {
    let cfg = replication_config(base, r);
    let world = simulate(&cfg)?;
    let note = format!("replication {r} of {}, base seed {}", base.reps, base.seed);
    let mut s = write_bundle(&world, &out.join(format!("rep-{r:03}")), &note)?;
    s.replication = r;
    Ok(s)
}

/// Runs `config.reps` replications into `out/rep-NNN`.
pub fn run(config: &ScenarioConfig, out: &Path) -> Result<Vec<RunSummary>, RunError> {
    config.validate()?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    (0..config.reps as u64)
        .into_par_iter()
        .map(|r| run_one(config, r, out))
        .collect()
}

/// What a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDimension {
    SatRatio,
    NodeCount,
    MiModel,
    Preset,
}

impl SweepDimension {
    pub fn key(self) -> &'static str {
        match self {
            SweepDimension::SatRatio => "sat_ratio",
            SweepDimension::NodeCount => "node_count",
            SweepDimension::MiModel => "mi_model",
            SweepDimension::Preset => "preset",
        }
    }

    /// Sat-ratio and node-count sweeps only need the graph.
    pub fn graph_only(self) -> bool {
        matches!(self, SweepDimension::SatRatio | SweepDimension::NodeCount)
    }
}

impl fmt::Display for SweepDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SweepDimension {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().replace('-', "_").as_str() {
            "sat_ratio" | "ratio" => Ok(SweepDimension::SatRatio),
            "node_count" | "nodes" => Ok(SweepDimension::NodeCount),
            "mi_model" | "mi" => Ok(SweepDimension::MiModel),
            "preset" => Ok(SweepDimension::Preset),
            _ => Err(ConfigError::invalid(
                "dimension",
                format!("`{s}` is not one of sat_ratio, node_count, mi_model, preset"),
            )),
        }
    }
}

/// One failed run inside a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub value: String,
    pub replication: u64,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    pub completed: usize,
    pub failures: Vec<SweepFailure>,
}

/// `base` with the swept parameter set to `value`.
pub fn sweep_config(base: &ScenarioConfig, dim: SweepDimension, value: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = base.clone();
    match dim {
        SweepDimension::Preset => cfg = expand_preset(value.trim().parse()?, &cfg),
        _ => cfg.set(dim.key(), value)?,
    }
    cfg.validate()?;
    Ok(cfg)
}

fn describe(e: &dyn std::error::Error) -> String {
    let mut s = e.to_string();
    let mut cur = e.source();
    while let Some(c) = cur {
        s.push_str(": ");
        s.push_str(&c.to_string());
        cur = c.source();
    }
    s
}

fn mean_defined(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn graph_sweep(
    base: &ScenarioConfig,
    dim: SweepDimension,
    values: &[String],
    out: &Path,
) -> Result<SweepReport, RunError> {
    let mut jobs = Vec::new();
    for kind in [GraphKind::Ba, GraphKind::To] {
        for v in values {
            for r in 0..base.reps as u64 {
                jobs.push((kind, v.clone(), r));
            }
        }
    }
    let results: Vec<Result<f64, String>> = jobs
        .par_iter()
        .map(|(kind, v, r)| {
            let mut cfg = replication_config(base, *r);
            cfg.graph_kind = *kind;
            let cfg = sweep_config(&cfg, dim, v).map_err(|e| e.to_string())?;
            build_graph(&cfg).map(|g| p_nsn(&g)).map_err(|e| e.to_string())
        })
        .collect();
    let mut report = SweepReport::default();
    let mut rows = Vec::new();
    for (chunk, kind_jobs) in results.chunks(base.reps).zip(jobs.chunks(base.reps)) {
        let (kind, value, _) = &kind_jobs[0];
        let mut sum = 0.0;
        let mut ok = 0;
        for (res, (_, _, r)) in chunk.iter().zip(kind_jobs) {
            match res {
                Ok(p) => {
                    sum += p;
                    ok += 1;
                }
                Err(e) => report.failures.push(SweepFailure {
                    value: value.clone(),
                    replication: *r,
                    error: e.clone(),
                }),
            }
        }
        report.completed += ok;
        if ok > 0 {
            rows.push(PnsnRow {
                model: if *kind == GraphKind::Ba { "ba" } else { "to" }.to_string(),
                ratio_or_nodes: value.trim().parse().unwrap_or(f64::NAN),
                p_nsn: sum / ok as f64,
            });
        }
    }
    write_pnsn(&rows, create(&out.join("pnsn.csv"))?)?;
    Ok(report)
}

fn write_summary(out: &Path, rows: &[(String, RunSummary)]) -> Result<(), RunError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(&out.join("summary.csv"))?);
    w.write_record([
        "value",
        "replication",
        "seed",
        "mean_duration_s",
        "files_per_user",
        "non_friend_bytes",
        "corr_sat_flag",
        "corr_sat_friend_count",
    ])?;
    let num = |x: Option<f64>| x.map_or("nan".to_string(), |v| v.to_string());
    for (v, s) in rows {
        w.write_record([
            v.clone(),
            s.replication.to_string(),
            s.seed.to_string(),
            num(s.mean_duration),
            s.files_per_user.to_string(),
            s.non_friend_bytes.to_string(),
            num(s.corr_sat_flag),
            num(s.corr_sat_friend_count),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Runs every value times every replication. Failed runs are listed in the
/// report and in `failures.csv`; the remaining runs still complete.
pub fn sweep(
    dim: SweepDimension,
    values: &[String],
    base: &ScenarioConfig,
    out: &Path,
) -> Result<SweepReport, RunError> {
    if values.is_empty() {
        return Err(ConfigError::invalid("values", "sweep needs at least one value").into());
    }
    if base.reps == 0 {
        return Err(ConfigError::invalid("reps", "must be positive").into());
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut report = if dim.graph_only() {
        graph_sweep(base, dim, values, out)?
    } else {
        let jobs: Vec<(String, u64)> = values
            .iter()
            .flat_map(|v| (0..base.reps as u64).map(move |r| (v.trim().to_string(), r)))
            .collect();
        let results: Vec<Result<RunSummary, String>> = jobs
            .par_iter()
            .map(|(v, r)| {
                let cfg = sweep_config(base, dim, v).map_err(|e| e.to_string())?;
                run_one(&cfg, *r, &out.join(format!("{dim}-{v}"))).map_err(|e| describe(&e))
            })
            .collect();
        let mut report = SweepReport::default();
        let mut done = Vec::new();
        for ((v, r), res) in jobs.into_iter().zip(results) {
            match res {
                Ok(s) => done.push((v, s)),
                Err(error) => report.failures.push(SweepFailure {
                    value: v,
                    replication: r,
                    error,
                }),
            }
        }
        report.completed = done.len();
        write_summary(out, &done)?;
        if dim == SweepDimension::MiModel {
            let rows: Vec<CorrelationRow> = values
                .iter()
                .map(|v| v.trim())
                .filter(|v| done.iter().any(|(d, _)| d == v))
                .map(|v| {
                    let runs = || done.iter().filter(move |(d, _)| d == v).map(|(_, s)| s);
                    CorrelationRow {
                        mi_model: v.to_string(),
                        corr_sat_flag: mean_defined(runs().map(|s| s.corr_sat_flag)),
                        corr_sat_friend_count: mean_defined(runs().map(|s| s.corr_sat_friend_count)),
                    }
                })
                .collect();
            write_correlations(&rows, create(&out.join("correlations.csv"))?)?;
        }
        report
    };
    report.failures.sort_by(|a, b| (&a.value, a.replication).cmp(&(&b.value, b.replication)));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(&out.join("failures.csv"))?);
    w.write_record(["value", "replication", "error"])?;
    for f in &report.failures {
        w.write_record([f.value.as_str(), &f.replication.to_string(), f.error.as_str()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(report)
}

/// Structural properties of `seeds` independent graphs of `config`'s model.
pub fn graph_props(config: &ScenarioConfig, seeds: u64) -> Result<Vec<(u64, GraphProperties)>, ConfigError> {
    config.graph_model().validate(config.node_count)?;
    (0..seeds)
        .into_par_iter()
        .map(|r| {
            let cfg = replication_config(config, r);
            build_graph(&cfg).map(|g| (cfg.seed, graph_properties(&g)))
        })
        .collect()
}
