//! Flat `key = value` pipeline configuration.
//!
//! Unknown keys and out-of-domain values are validation errors; validation
//! reports every violated field at once. Command-line overrides are applied
//! before validation. The canonical rendering (sorted `key = value` lines of
//! every key, defaults included) is hashed into the provenance sidecars.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lexnet::corpus::CorpusFormat;
use lexnet::embedding::TrainingConfig;
use lexnet::netstats::{Binning, NetstatsConfig};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub corpus_path: Option<PathBuf>,
    pub corpus_format: CorpusFormat,
    pub corpus_label: Option<String>,
    pub extended_cjk: bool,
    pub min_count: u64,
    pub wcn_sample_fraction: f64,
    pub wcn_window: usize,
    pub wcn_max_unique_tokens: usize,
    pub wsn_sample_fraction: f64,
    pub embedding_window: usize,
    pub embedding_dim: usize,
    pub embedding_negatives: usize,
    pub embedding_epochs: usize,
    pub embedding_initial_lr: f64,
    pub embedding_subsample: f64,
    pub threshold_percentile: f64,
    pub threshold_sample_size: usize,
    pub threshold_exhaustive_below: usize,
    pub stats_ratio_threshold: f64,
    pub stats_neutral_band: f64,
    pub stats_bins_per_decade: u32,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus_path: None,
            corpus_format: CorpusFormat::PretokenizedLines,
            corpus_label: None,
            extended_cjk: false,
            min_count: 3,
            wcn_sample_fraction: 1.0,
            wcn_window: 0,
            wcn_max_unique_tokens: 0,
            wsn_sample_fraction: 1.0,
            embedding_window: 10,
            embedding_dim: 500,
            embedding_negatives: 5,
            embedding_epochs: 5,
            embedding_initial_lr: 0.025,
            embedding_subsample: 0.0,
            threshold_percentile: 99.0,
            threshold_sample_size: 10_000_000,
            threshold_exhaustive_below: 5_000,
            stats_ratio_threshold: 10.0,
            stats_neutral_band: 0.05,
            stats_bins_per_decade: 5,
            output_dir: PathBuf::from("out"),
            seed: 42,
            threads: 1,
        }
    }
}

pub const KNOWN_KEYS: &[&str] = &[
    "corpus.path",
    "corpus.format",
    "corpus.label",
    "normalize.extended_cjk",
    "vocab.min_count",
    "wcn.sample_fraction",
    "wcn.window",
    "wcn.max_unique_tokens",
    "wsn.sample_fraction",
    "embedding.window",
    "embedding.dim",
    "embedding.negatives",
    "embedding.epochs",
    "embedding.initial_lr",
    "embedding.subsample",
    "threshold.percentile",
    "threshold.sample_size",
    "threshold.exhaustive_below",
    "stats.ratio_threshold",
    "stats.neutral_band",
    "stats.bins_per_decade",
    "output.dir",
    "seed",
    "threads",
];

impl PipelineConfig {
    /// Parse a config file and apply `overrides` (from `--set`, `--seed`,
    /// `--threads`) on top. Every problem is collected and reported together.
    pub fn load(
        path: Option<&Path>,
        overrides: &[(String, String)],
    ) -> Result<PipelineConfig, Vec<String>> {
        let mut pairs: Vec<(String, String, String)> = Vec::new(); // key, value, origin
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| vec![format!("cannot read config {}: {e}", path.display())])?;
            for (idx, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let origin = format!("{}:{}", path.display(), idx + 1);
                match line.split_once('=') {
                    Some((k, v)) => {
                        pairs.push((k.trim().to_string(), v.trim().to_string(), origin))
                    }
                    None => {
                        return Err(vec![format!(
                            "{origin}: expected key = value, got {line:?}"
                        )])
                    }
                }
            }
        }
        for (k, v) in overrides {
            pairs.push((k.clone(), v.clone(), format!("--set {k}")));
        }

        let mut config = PipelineConfig::default();
        let mut problems = Vec::new();
        for (key, value, origin) in &pairs {
            if let Err(msg) = config.apply(key, value) {
                problems.push(format!("{origin}: {msg}"));
            }
        }
        config.validate(&mut problems);
        if problems.is_empty() {
            Ok(config)
        } else {
            Err(problems)
        }
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("{key}: cannot parse {value:?}"))
        }
        match key {
            "corpus.path" => self.corpus_path = Some(PathBuf::from(value)),
            "corpus.format" => {
                self.corpus_format = value
                    .parse::<CorpusFormat>()
                    .map_err(|e| format!("corpus.format: {e}"))?
            }
            "corpus.label" => self.corpus_label = Some(value.to_string()),
            "normalize.extended_cjk" => self.extended_cjk = parse(key, value)?,
            "vocab.min_count" => self.min_count = parse(key, value)?,
            "wcn.sample_fraction" => self.wcn_sample_fraction = parse(key, value)?,
            "wcn.window" => self.wcn_window = parse(key, value)?,
            "wcn.max_unique_tokens" => self.wcn_max_unique_tokens = parse(key, value)?,
            "wsn.sample_fraction" => self.wsn_sample_fraction = parse(key, value)?,
            "embedding.window" => self.embedding_window = parse(key, value)?,
            "embedding.dim" => self.embedding_dim = parse(key, value)?,
            "embedding.negatives" => self.embedding_negatives = parse(key, value)?,
            "embedding.epochs" => self.embedding_epochs = parse(key, value)?,
            "embedding.initial_lr" => self.embedding_initial_lr = parse(key, value)?,
            "embedding.subsample" => self.embedding_subsample = parse(key, value)?,
            "threshold.percentile" => self.threshold_percentile = parse(key, value)?,
            "threshold.sample_size" => self.threshold_sample_size = parse(key, value)?,
            "threshold.exhaustive_below" => self.threshold_exhaustive_below = parse(key, value)?,
            "stats.ratio_threshold" => self.stats_ratio_threshold = parse(key, value)?,
            "stats.neutral_band" => self.stats_neutral_band = parse(key, value)?,
            "stats.bins_per_decade" => self.stats_bins_per_decade = parse(key, value)?,
            "output.dir" => self.output_dir = PathBuf::from(value),
            "seed" => self.seed = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            other => {
                return Err(format!(
                    "unknown key {other:?} (known keys: {})",
                    KNOWN_KEYS.join(", ")
                ))
            }
        }
        Ok(())
    }

    fn validate(&self, problems: &mut Vec<String>) {
        let fraction = |name: &str, v: f64, problems: &mut Vec<String>| {
            if !(v > 0.0 && v <= 1.0) {
                problems.push(format!("{name} must be in (0, 1], got {v}"));
            }
        };
        fraction("wcn.sample_fraction", self.wcn_sample_fraction, problems);
        fraction("wsn.sample_fraction", self.wsn_sample_fraction, problems);
        if self.embedding_window < 1 {
            problems.push("embedding.window must be >= 1".to_string());
        }
        if self.embedding_dim < 1 {
            problems.push("embedding.dim must be >= 1".to_string());
        }
        if self.embedding_negatives < 1 {
            problems.push("embedding.negatives must be >= 1".to_string());
        }
        if !(self.embedding_initial_lr > 0.0) {
            problems.push("embedding.initial_lr must be positive".to_string());
        }
        if self.embedding_subsample < 0.0 {
            problems.push("embedding.subsample must be >= 0 (0 disables)".to_string());
        }
        if !(self.threshold_percentile > 0.0 && self.threshold_percentile < 100.0) {
            problems.push(format!(
                "threshold.percentile must be in (0, 100), got {}",
                self.threshold_percentile
            ));
        }
        if self.threshold_sample_size < 1000 {
            problems.push("threshold.sample_size must be >= 1000".to_string());
        }
        if !(self.stats_ratio_threshold > 1.0) {
            problems.push("stats.ratio_threshold must exceed 1".to_string());
        }
        if !(self.stats_neutral_band > 0.0) {
            problems.push("stats.neutral_band must be positive".to_string());
        }
        if self.threads < 1 {
            problems.push("threads must be >= 1".to_string());
        }
    }

    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            window: self.embedding_window,
            dim: self.embedding_dim,
            negatives: self.embedding_negatives,
            epochs: self.embedding_epochs,
            initial_lr: self.embedding_initial_lr,
            seed: self.seed,
            subsample_threshold: (self.embedding_subsample > 0.0)
                .then_some(self.embedding_subsample),
            threads: self.threads,
        }
    }

    pub fn netstats_config(&self) -> NetstatsConfig {
        NetstatsConfig {
            ratio_threshold: self.stats_ratio_threshold,
            neutral_band: self.stats_neutral_band,
            binning: if self.stats_bins_per_decade == 0 {
                Binning::None
            } else {
                Binning::Log {
                    bins_per_decade: self.stats_bins_per_decade,
                }
            },
        }
    }

    /// Sorted `key = value` rendering of every key, defaults included.
    pub fn canonical_string(&self) -> String {
        let mut map = BTreeMap::new();
        map.insert(
            "corpus.path",
            self.corpus_path
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        );
        map.insert("corpus.format", self.corpus_format.to_string());
        map.insert(
            "corpus.label",
            self.corpus_label.clone().unwrap_or_default(),
        );
        map.insert("normalize.extended_cjk", self.extended_cjk.to_string());
        map.insert("vocab.min_count", self.min_count.to_string());
        map.insert("wcn.sample_fraction", self.wcn_sample_fraction.to_string());
        map.insert("wcn.window", self.wcn_window.to_string());
        map.insert(
            "wcn.max_unique_tokens",
            self.wcn_max_unique_tokens.to_string(),
        );
        map.insert("wsn.sample_fraction", self.wsn_sample_fraction.to_string());
        map.insert("embedding.window", self.embedding_window.to_string());
        map.insert("embedding.dim", self.embedding_dim.to_string());
        map.insert("embedding.negatives", self.embedding_negatives.to_string());
        map.insert("embedding.epochs", self.embedding_epochs.to_string());
        map.insert(
            "embedding.initial_lr",
            self.embedding_initial_lr.to_string(),
        );
        map.insert("embedding.subsample", self.embedding_subsample.to_string());
        map.insert(
            "threshold.percentile",
            self.threshold_percentile.to_string(),
        );
        map.insert(
            "threshold.sample_size",
            self.threshold_sample_size.to_string(),
        );
        map.insert(
            "threshold.exhaustive_below",
            self.threshold_exhaustive_below.to_string(),
        );
        map.insert(
            "stats.ratio_threshold",
            self.stats_ratio_threshold.to_string(),
        );
        map.insert("stats.neutral_band", self.stats_neutral_band.to_string());
        map.insert(
            "stats.bins_per_decade",
            self.stats_bins_per_decade.to_string(),
        );
        map.insert("output.dir", self.output_dir.display().to_string());
        map.insert("seed", self.seed.to_string());
        map.insert("threads", self.threads.to_string());

        let mut out = String::new();
        for (k, v) in map {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
