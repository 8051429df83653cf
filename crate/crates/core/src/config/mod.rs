//! Scenario description: flat `key = value` files, validation and the
//! feature presets.

mod presets;

use std::fmt::Write as _;
use std::str::FromStr;

pub use presets::{expand_preset, PresetId};

use crate::error::ConfigError;
use crate::graphgen::{BaParams, GraphModel, ToParams};
use crate::prefs::{DemandWeights, FeedbackParams, MiModel};
use crate::protocol::{BroadcastPolicy, MIB};

/// Protocol features that the presets toggle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Features {
    pub buddy_help: bool,
    pub prefetch: bool,
    /// Maximum number of peers prefetching at once.
    pub prefetch_cap: Option<usize>,
    pub broadcast: bool,
    /// Prefer buddies as unicast sources without free buddy service.
    pub locality_only: bool,
    pub credits: bool,
}

impl Features {
    /// Whether caching and prediction take buddies' interests into account.
    pub fn social_caching(&self) -> bool {
        self.buddy_help || self.prefetch || self.locality_only
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Ba,
    To,
}

impl FromStr for GraphKind {
    type Err = ConfigError;

    fn from_str(v: &str) -> Result<Self, Self::Err> {
        match v.trim().to_ascii_lowercase().as_str() {
            "ba" => Ok(GraphKind::Ba),
            "to" => Ok(GraphKind::To),
            _ => Err(ConfigError::invalid("graph_model", format!("expected ba or to, got `{v}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaitDistribution {
    Exponential,
    Fixed,
    /// Uniform on `[0, 2 * mean]`.
    Uniform,
}

impl WaitDistribution {
    fn name(self) -> &'static str {
        match self {
            WaitDistribution::Exponential => "exponential",
            WaitDistribution::Fixed => "fixed",
            WaitDistribution::Uniform => "uniform",
        }
    }
}

/// Everything needed to reproduce one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub graph_kind: GraphKind,
    pub ba: BaParams,
    pub to: ToParams,
    pub node_count: usize,
    pub sat_ratio: f64,
    pub mi_model: Option<MiModel>,
    pub p_mi: f64,
    pub preset: Option<PresetId>,
    pub features: Features,
    pub categories: u32,
    pub catalog_size: u32,
    pub file_size_bytes: u64,
    pub piece_size_bytes: u64,
    pub seeders: usize,
    pub credit_limit: u64,
    /// Credits a buddy gives a helper-less peer stuck at the credit floor.
    pub donation: u64,
    pub download_bps: u64,
    pub upload_bps: u64,
    pub wait_mean_s: f64,
    pub wait_dist: WaitDistribution,
    pub duration_s: u64,
    pub step_s: u64,
    pub seed: u64,
    pub reps: usize,
    pub cache_items: u64,
    pub helpers_max: usize,
    pub max_sources: usize,
    /// Concurrent unicast downloaders one peer uploads to.
    pub upload_slots: usize,
    pub tracker_sample: usize,
    pub broadcast: BroadcastPolicy,
    pub digest_period_s: u64,
    pub feedback: FeedbackParams,
    pub weights: DemandWeights,
    pub profile_min: usize,
    pub profile_max: usize,
    pub bucket_s: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            graph_kind: GraphKind::Ba,
            ba: BaParams::default(),
            to: ToParams::default(),
            node_count: 2000,
            sat_ratio: 0.3,
            mi_model: Some(MiModel::Mi1),
            p_mi: 0.01,
            preset: None,
            features: Features {
                buddy_help: false,
                prefetch: false,
                prefetch_cap: None,
                broadcast: false,
                locality_only: false,
                credits: true,
            },
            categories: 100,
            catalog_size: 200,
            file_size_bytes: 100 * MIB,
            piece_size_bytes: MIB,
            seeders: 10,
            credit_limit: 50,
            donation: 10,
            download_bps: 8_000_000,
            upload_bps: 1_000_000,
            wait_mean_s: 7200.0,
            wait_dist: WaitDistribution::Exponential,
            duration_s: 48 * 3600,
            step_s: 60,
            seed: 1,
            reps: 1,
            cache_items: 20,
            helpers_max: 4,
            max_sources: 4,
            upload_slots: 4,
            tracker_sample: 50,
            broadcast: BroadcastPolicy::default(),
            digest_period_s: 3600,
            feedback: FeedbackParams::default(),
            weights: DemandWeights::default(),
            profile_min: 3,
            profile_max: 10,
            bucket_s: 3600,
        }
    }
}

fn parse<T: FromStr>(name: &'static str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::invalid(name, format!("cannot parse `{value}`")))
}

fn parse_bool(name: &'static str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::invalid(name, format!("expected a boolean, got `{value}`"))),
    }
}

fn parse_r_choices(value: &str) -> Result<Vec<(usize, f64)>, ConfigError> {
    value
        .split(',')
        .map(|part| {
            let part = part.trim();
            match part.split_once(':') {
                Some((r, w)) => Ok((parse("to_r", r.trim())?, parse("to_r", w.trim())?)),
                None => Ok((parse("to_r", part)?, 1.0)),
            }
        })
        .collect()
}

fn format_r_choices(choices: &[(usize, f64)]) -> String {
    if let [(r, w)] = choices {
        if *w == 1.0 {
            return r.to_string();
        }
    }
    choices
        .iter()
        .map(|(r, w)| format!("{r}:{w}"))
        .collect::<Vec<_>>()
        .join(",")
}

impl ScenarioConfig {
    pub fn graph_model(&self) -> GraphModel {
        match self.graph_kind {
            GraphKind::Ba => GraphModel::Ba(self.ba),
            GraphKind::To => GraphModel::To(self.to.clone()),
        }
    }

    pub fn steps(&self) -> u64 {
        self.duration_s / self.step_s.max(1)
    }

    pub fn cache_capacity_bytes(&self) -> u64 {
        self.cache_items * self.file_size_bytes
    }

    /// Assigns one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key.trim() {
            "graph_model" => self.graph_kind = v.parse()?,
            "ba_m0" => self.ba.m0 = parse("ba_m0", v)?,
            "ba_m" => self.ba.m = parse("ba_m", v)?,
            "to_r" => self.to.r_choices = parse_r_choices(v)?,
            "to_p" => self.to.p_mean = parse("to_p", v)?,
            "node_count" => self.node_count = parse("node_count", v)?,
            "sat_ratio" => self.sat_ratio = parse("sat_ratio", v)?,
            "mi_model" => {
                self.mi_model = if v.eq_ignore_ascii_case("off") {
                    None
                } else {
                    Some(v.parse().map_err(|e: String| ConfigError::invalid("mi_model", e))?)
                }
            }
            "p_mi" => self.p_mi = parse("p_mi", v)?,
            "preset" => {
                self.preset = if v.is_empty() || v == "none" {
                    None
                } else {
                    Some(v.parse()?)
                }
            }
            "buddy_help" => self.features.buddy_help = parse_bool("buddy_help", v)?,
            "prefetch" => self.features.prefetch = parse_bool("prefetch", v)?,
            "prefetch_cap" => {
                let cap: usize = parse("prefetch_cap", v)?;
                self.features.prefetch_cap = (cap > 0).then_some(cap);
            }
            "broadcast" => self.features.broadcast = parse_bool("broadcast", v)?,
            "locality_only" => self.features.locality_only = parse_bool("locality_only", v)?,
            "credits" => self.features.credits = parse_bool("credits", v)?,
            "categories" => self.categories = parse("categories", v)?,
            "catalog_size" => self.catalog_size = parse("catalog_size", v)?,
            "file_size" => self.file_size_bytes = parse("file_size", v)?,
            "piece_size" => self.piece_size_bytes = parse("piece_size", v)?,
            "seeders" => self.seeders = parse("seeders", v)?,
            "credit_limit" => self.credit_limit = parse("credit_limit", v)?,
            "donation" => self.donation = parse("donation", v)?,
            "download_bps" => self.download_bps = parse("download_bps", v)?,
            "upload_bps" => self.upload_bps = parse("upload_bps", v)?,
            "wait_mean_s" => self.wait_mean_s = parse("wait_mean_s", v)?,
            "wait_dist" => {
                self.wait_dist = match v {
                    "exponential" => WaitDistribution::Exponential,
                    "fixed" => WaitDistribution::Fixed,
                    "uniform" => WaitDistribution::Uniform,
                    _ => return Err(ConfigError::invalid("wait_dist", format!("unknown distribution `{v}`"))),
                }
            }
            "duration_s" => self.duration_s = parse("duration_s", v)?,
            "step_s" => self.step_s = parse("step_s", v)?,
            "seed" => self.seed = parse("seed", v)?,
            "reps" => self.reps = parse("reps", v)?,
            "cache_items" => self.cache_items = parse("cache_items", v)?,
            "helpers_max" => self.helpers_max = parse("helpers_max", v)?,
            "max_sources" => self.max_sources = parse("max_sources", v)?,
            "upload_slots" => self.upload_slots = parse("upload_slots", v)?,
            "tracker_sample" => self.tracker_sample = parse("tracker_sample", v)?,
            "broadcast_threshold" => self.broadcast.threshold = parse("broadcast_threshold", v)?,
            "broadcast_cooldown_s" => self.broadcast.cooldown_s = parse("broadcast_cooldown_s", v)?,
            "transponder_bps" => self.broadcast.transponder_bps = parse("transponder_bps", v)?,
            "digest_period_s" => self.digest_period_s = parse("digest_period_s", v)?,
            "feedback_strength" => self.feedback.base_strength = parse("feedback_strength", v)?,
            "feedback_epsilon" => self.feedback.epsilon = parse("feedback_epsilon", v)?,
            "feedback_negative_p" => self.feedback.negative_probability = parse("feedback_negative_p", v)?,
            "w_self" => self.weights.w_self = parse("w_self", v)?,
            "w_buddy" => self.weights.w_buddy = parse("w_buddy", v)?,
            "profile_min" => self.profile_min = parse("profile_min", v)?,
            "profile_max" => self.profile_max = parse("profile_max", v)?,
            "bucket_s" => self.bucket_s = parse("bucket_s", v)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// All settings in a fixed order, as written to manifests.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = &self.features;
        vec![
            ("graph_model", match self.graph_kind {
                GraphKind::Ba => "ba".into(),
                GraphKind::To => "to".into(),
            }),
            ("ba_m0", self.ba.m0.to_string()),
            ("ba_m", self.ba.m.to_string()),
            ("to_r", format_r_choices(&self.to.r_choices)),
            ("to_p", self.to.p_mean.to_string()),
            ("node_count", self.node_count.to_string()),
            ("sat_ratio", self.sat_ratio.to_string()),
            ("mi_model", self.mi_model.map_or("off".into(), |m| m.name().to_ascii_lowercase())),
            ("p_mi", self.p_mi.to_string()),
            ("preset", self.preset.map_or("none".into(), |p| p.to_string())),
            ("buddy_help", f.buddy_help.to_string()),
            ("prefetch", f.prefetch.to_string()),
            ("prefetch_cap", f.prefetch_cap.unwrap_or(0).to_string()),
            ("broadcast", f.broadcast.to_string()),
            ("locality_only", f.locality_only.to_string()),
            ("credits", f.credits.to_string()),
            ("categories", self.categories.to_string()),
            ("catalog_size", self.catalog_size.to_string()),
            ("file_size", self.file_size_bytes.to_string()),
            ("piece_size", self.piece_size_bytes.to_string()),
            ("seeders", self.seeders.to_string()),
            ("credit_limit", self.credit_limit.to_string()),
            ("donation", self.donation.to_string()),
            ("download_bps", self.download_bps.to_string()),
            ("upload_bps", self.upload_bps.to_string()),
            ("wait_mean_s", self.wait_mean_s.to_string()),
            ("wait_dist", self.wait_dist.name().into()),
            ("duration_s", self.duration_s.to_string()),
            ("step_s", self.step_s.to_string()),
            ("seed", self.seed.to_string()),
            ("reps", self.reps.to_string()),
            ("cache_items", self.cache_items.to_string()),
            ("helpers_max", self.helpers_max.to_string()),
            ("max_sources", self.max_sources.to_string()),
            ("upload_slots", self.upload_slots.to_string()),
            ("tracker_sample", self.tracker_sample.to_string()),
            ("broadcast_threshold", self.broadcast.threshold.to_string()),
            ("broadcast_cooldown_s", self.broadcast.cooldown_s.to_string()),
            ("transponder_bps", self.broadcast.transponder_bps.to_string()),
            ("digest_period_s", self.digest_period_s.to_string()),
            ("feedback_strength", self.feedback.base_strength.to_string()),
            ("feedback_epsilon", self.feedback.epsilon.to_string()),
            ("feedback_negative_p", self.feedback.negative_probability.to_string()),
            ("w_self", self.weights.w_self.to_string()),
            ("w_buddy", self.weights.w_buddy.to_string()),
            ("profile_min", self.profile_min.to_string()),
            ("profile_max", self.profile_max.to_string()),
            ("bucket_s", self.bucket_s.to_string()),
        ]
    }

    /// Renders the config in the key-value file format.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Parses `key = value` lines on top of `self`. `#` starts a comment.
    pub fn apply_kv(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                errors.push(ConfigError::Syntax {
                    line: i + 1,
                    reason: format!("expected `key = value`, got `{line}`"),
                });
                continue;
            };
            if let Err(e) = self.set(k, v) {
                errors.push(ConfigError::Syntax {
                    line: i + 1,
                    reason: e.to_string(),
                });
            }
        }
        match errors.len() {
            0 => Ok(()),
            1 => Err(errors.pop().unwrap()),
            _ => Err(ConfigError::Many(errors)),
        }
    }

    pub fn from_kv(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    /// Checks every constraint and reports all violations at once. On
    /// success returns non-fatal warnings (settings that contradict the
    /// reference link asymmetry).
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, name: &'static str, reason: &str| {
            if !ok {
                errs.push(ConfigError::invalid(name, reason));
            }
        };
        let f = &self.features;
        check(f.prefetch_cap.is_none() || f.prefetch, "prefetch_cap", "requires prefetch");
        check(!(f.locality_only && f.buddy_help), "locality_only", "excludes buddy_help");
        check((0.0..=1.0).contains(&self.sat_ratio), "sat_ratio", "must lie in [0, 1]");
        check((0.0..=1.0).contains(&self.p_mi), "p_mi", "must lie in [0, 1]");
        check(self.categories > 0, "categories", "must be positive");
        check(self.catalog_size > 0, "catalog_size", "must be positive");
        check(self.file_size_bytes > 0, "file_size", "must be positive");
        check(self.piece_size_bytes > 0, "piece_size", "must be positive");
        check(self.download_bps > 0, "download_bps", "must be positive");
        check(self.upload_bps > 0, "upload_bps", "must be positive");
        check(self.wait_mean_s > 0.0 && self.wait_mean_s.is_finite(), "wait_mean_s", "must be positive");
        check(self.step_s > 0, "step_s", "must be positive");
        check(self.reps > 0, "reps", "must be positive");
        check(self.cache_items > 0, "cache_items", "must be positive");
        check(self.max_sources > 0, "max_sources", "must be positive");
        check(self.upload_slots > 0, "upload_slots", "must be positive");
        check(self.tracker_sample > 0, "tracker_sample", "must be positive");
        check(self.broadcast.transponder_bps > 0, "transponder_bps", "must be positive");
        check(self.digest_period_s > 0, "digest_period_s", "must be positive");
        check(self.bucket_s > 0, "bucket_s", "must be positive");
        check(
            self.feedback.base_strength > 0.0 && self.feedback.base_strength <= 1.0,
            "feedback_strength",
            "must lie in (0, 1]",
        );
        check(
            self.feedback.epsilon > 0.0 && self.feedback.epsilon < 1.0,
            "feedback_epsilon",
            "must lie in (0, 1)",
        );
        check(
            (0.0..=1.0).contains(&self.feedback.negative_probability),
            "feedback_negative_p",
            "must lie in [0, 1]",
        );
        check(self.weights.w_self >= 0.0 && self.weights.w_buddy >= 0.0, "w_self", "weights must be >= 0");
        check(
            self.profile_min >= 1 && self.profile_min <= self.profile_max,
            "profile_min",
            "need 1 <= profile_min <= profile_max",
        );
        if self.node_count > 0 {
            if let Err(e) = self.graph_model().validate(self.node_count) {
                errs.push(e);
            }
        }
        if !errs.is_empty() {
            return Err(if errs.len() == 1 { errs.pop().unwrap() } else { ConfigError::Many(errs) });
        }
        let mut warnings = Vec::new();
        if self.upload_bps > self.download_bps {
            warnings.push(format!(
                "upload_bps ({}) exceeds download_bps ({}); reference links are 8:1 asymmetric",
                self.upload_bps, self.download_bps
            ));
        }
        Ok(warnings)
    }
}
