//! Subcommand implementations. Every stage reads its declared input
//! artifacts from the output directory and writes its outputs there, plus a
//! `.meta.json` provenance sidecar carrying the config hash and seed.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use lexnet::corpus::{
    build_vocabulary, ingest_corpus, load_vocabulary, sample_vocabulary, save_corpus,
    save_vocabulary, Corpus, CorpusFormat, NormalizationConfig, Vocabulary,
};
use lexnet::embedding::{load_embeddings, save_embeddings, train_sgns_with_stats, EmbeddingMatrix};
use lexnet::graph::{
    build_wcn_with, build_wsn, estimate_similarity_threshold, exhaustive_similarity_threshold,
    load_graph, save_graph, CooccurrenceUnit, SimilarityThreshold, UndirectedGraph, WcnOptions,
};
use lexnet::netstats::{degree_distribution, plot_csv, structure_report};

use crate::config::PipelineConfig;

#[derive(Parser)]
#[command(
    name = "lexnet",
    version,
    about = "Build word co-occurrence and word similarity networks from tokenized corpora and analyze their structure"
)]
pub struct Cli {
    /// Flat key = value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Override the `seed` config key.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Override the `threads` config key; 1 guarantees determinism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Override any config key (repeatable), e.g. --set embedding.dim=64
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Read the raw corpus, normalize it, write corpus.jsonl.
    Ingest,
    /// Build the frequency-filtered vocabulary, write vocab.tsv.
    Vocab,
    /// Train SGNS embeddings, write embeddings.txt.
    Train,
    /// Build the word co-occurrence network, write wcn.graph.
    BuildWcn,
    /// Build the word similarity network, write wsn.graph.
    BuildWsn,
    /// Compute the structure report for a graph artifact.
    Stats {
        /// Graph file to analyze; default: wcn.graph and wsn.graph if present.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Collect report JSONs into summary.txt and summary.csv.
    Report,
    /// Run every stage in order.
    Pipeline,
}

#[derive(Debug)]
pub enum AppError {
    Validation(String),
    Runtime(anyhow::Error),
}

impl From<lexnet::Error> for AppError {
    fn from(e: lexnet::Error) -> Self {
        AppError::Runtime(anyhow::Error::new(e))
    }
}

impl From<anyhow::Error> for AppError {
    fn from(e: anyhow::Error) -> Self {
        AppError::Runtime(e)
    }
}

type AppResult<T> = Result<T, AppError>;

pub fn run(cli: Cli) -> AppResult<()> {
    let mut overrides: Vec<(String, String)> = Vec::new();
    for entry in &cli.set {
        match entry.split_once('=') {
            Some((k, v)) => overrides.push((k.trim().to_string(), v.trim().to_string())),
            None => {
                return Err(AppError::Validation(format!(
                    "--set expects KEY=VALUE, got {entry:?}"
                )))
            }
        }
    }
    if let Some(seed) = cli.seed {
        overrides.push(("seed".to_string(), seed.to_string()));
    }
    if let Some(threads) = cli.threads {
        overrides.push(("threads".to_string(), threads.to_string()));
    }
    let config = PipelineConfig::load(cli.config.as_deref(), &overrides)
        .map_err(|problems| AppError::Validation(problems.join("\n")))?;

    match cli.command {
        Command::Ingest => cmd_ingest(&config).map(|_| ()),
        Command::Vocab => cmd_vocab(&config).map(|_| ()),
        Command::Train => cmd_train(&config).map(|_| ()),
        Command::BuildWcn => cmd_build_wcn(&config).map(|_| ()),
        Command::BuildWsn => cmd_build_wsn(&config).map(|_| ()),
        Command::Stats { graph } => cmd_stats(&config, graph.as_deref()),
        Command::Report => cmd_report(&config),
        Command::Pipeline => cmd_pipeline(&config),
    }
}

fn rules(config: &PipelineConfig) -> NormalizationConfig {
    if config.extended_cjk {
        NormalizationConfig::with_extension_blocks()
    } else {
        NormalizationConfig::default()
    }
}

fn artifact(config: &PipelineConfig, name: &str) -> PathBuf {
    config.output_dir.join(name)
}

fn require_artifact(path: &Path, produced_by: &str) -> AppResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(AppError::Validation(format!(
            "{} not found; run {produced_by}",
            path.display()
        )))
    }
}

fn ensure_output_dir(config: &PipelineConfig) -> AppResult<()> {
    std::fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("cannot create {}", config.output_dir.display()))?;
    Ok(())
}

/// Provenance sidecar: `<artifact>.meta.json` with the config hash and seed.
fn write_meta(config: &PipelineConfig, path: &Path, subcommand: &str) -> AppResult<()> {
    let meta = json!({
        "artifact": path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        "config_hash": config.hash(),
        "seed": config.seed,
        "subcommand": subcommand,
        "tool_version": env!("CARGO_PKG_VERSION"),
    });
    let sidecar = sidecar_path(path);
    std::fs::write(
        &sidecar,
        format!("{}\n", serde_json::to_string_pretty(&meta).unwrap()),
    )
    .with_context(|| format!("cannot write {}", sidecar.display()))?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".meta.json");
    path.with_file_name(name)
}

fn load_corpus_artifact(config: &PipelineConfig) -> AppResult<Corpus> {
    let path = artifact(config, "corpus.jsonl");
    require_artifact(&path, "ingest")?;
    Ok(ingest_corpus(
        &path,
        CorpusFormat::TokenJsonLines,
        &rules(config),
    )?)
}

fn load_vocab_artifact(config: &PipelineConfig) -> AppResult<Vocabulary> {
    let path = artifact(config, "vocab.tsv");
    require_artifact(&path, "vocab")?;
    Ok(load_vocabulary(&path)?)
}

fn load_embedding_artifact(config: &PipelineConfig) -> AppResult<EmbeddingMatrix> {
    let path = artifact(config, "embeddings.txt");
    require_artifact(&path, "train")?;
    Ok(load_embeddings(&path)?)
}

fn cmd_ingest(config: &PipelineConfig) -> AppResult<Corpus> {
    let Some(source) = config.corpus_path.as_ref() else {
        return Err(AppError::Validation(
            "corpus.path is not set (config file or --set corpus.path=...)".to_string(),
        ));
    };
    if !source.exists() {
        return Err(AppError::Validation(format!(
            "corpus.path {} does not exist",
            source.display()
        )));
    }
    ensure_output_dir(config)?;
    let corpus = ingest_corpus(source, config.corpus_format, &rules(config))?;
    let out = artifact(config, "corpus.jsonl");
    save_corpus(&corpus, &out)?;
    write_meta(config, &out, "ingest")?;
    println!(
        "ingest: {} texts ({} dropped), {} tokens ({} dropped) -> {}",
        corpus.texts().len(),
        corpus.dropped_texts(),
        corpus.token_count(),
        corpus.dropped_tokens(),
        out.display()
    );
    Ok(corpus)
}

fn cmd_vocab(config: &PipelineConfig) -> AppResult<Vocabulary> {
    let corpus = load_corpus_artifact(config)?;
    let vocab = build_vocabulary(&corpus, config.min_count)?;
    let out = artifact(config, "vocab.tsv");
    save_vocabulary(&vocab, &out)?;
    write_meta(config, &out, "vocab")?;
    println!(
        "vocab: {} words with count > {} -> {}",
        vocab.len(),
        config.min_count,
        out.display()
    );
    Ok(vocab)
}

fn cmd_train(config: &PipelineConfig) -> AppResult<()> {
    let corpus = load_corpus_artifact(config)?;
    let vocab = load_vocab_artifact(config)?;
    let (matrix, stats) = train_sgns_with_stats(&corpus, &vocab, &config.training_config())?;
    let out = artifact(config, "embeddings.txt");
    save_embeddings(&matrix, &out)?;
    write_meta(config, &out, "train")?;
    let losses: Vec<String> = stats
        .epoch_mean_loss
        .iter()
        .map(|l| format!("{l:.4}"))
        .collect();
    println!(
        "train: {} x {} vectors, epoch losses [{}] -> {}",
        matrix.len(),
        matrix.dim(),
        losses.join(", "),
        out.display()
    );
    Ok(())
}

fn cmd_build_wcn(config: &PipelineConfig) -> AppResult<()> {
    let corpus = load_corpus_artifact(config)?;
    let vocab = load_vocab_artifact(config)?;
    let vocab = if config.wcn_sample_fraction < 1.0 {
        sample_vocabulary(&vocab, config.wcn_sample_fraction, config.seed)?
    } else {
        vocab
    };
    let options = WcnOptions {
        unit: if config.wcn_window == 0 {
            CooccurrenceUnit::Text
        } else {
            CooccurrenceUnit::Window(config.wcn_window)
        },
        max_unique_tokens: (config.wcn_max_unique_tokens > 0)
            .then_some(config.wcn_max_unique_tokens),
    };
    let graph = build_wcn_with(&corpus, &vocab, &options)?;
    let out = artifact(config, "wcn.graph");
    save_graph(&graph, &out)?;
    write_meta(config, &out, "build-wcn")?;
    println!(
        "build-wcn: {} nodes, {} edges -> {}",
        graph.node_count(),
        graph.edge_count(),
        out.display()
    );
    Ok(())
}

fn cmd_build_wsn(config: &PipelineConfig) -> AppResult<()> {
    let matrix = load_embedding_artifact(config)?;
    let vocab = load_vocab_artifact(config)?;
    let subset = if config.wsn_sample_fraction < 1.0 {
        sample_vocabulary(&vocab, config.wsn_sample_fraction, config.seed)?
    } else {
        vocab
    };
    let threshold = if subset.len() < config.threshold_exhaustive_below {
        exhaustive_similarity_threshold(&matrix, &subset, config.threshold_percentile)?
    } else {
        estimate_similarity_threshold(
            &matrix,
            &subset,
            config.threshold_percentile,
            config.threshold_sample_size,
            config.seed,
        )?
    };
    let graph = build_wsn(&matrix, &subset, &threshold)?;

    let threshold_out = artifact(config, "wsn_threshold.json");
    write_threshold(&threshold, &threshold_out)?;
    write_meta(config, &threshold_out, "build-wsn")?;

    let out = artifact(config, "wsn.graph");
    save_graph(&graph, &out)?;
    write_meta(config, &out, "build-wsn")?;
    println!(
        "build-wsn: threshold {:.6} (p{}), {} nodes, {} edges -> {}",
        threshold.value,
        threshold.percentile,
        graph.node_count(),
        graph.edge_count(),
        out.display()
    );
    Ok(())
}

fn write_threshold(threshold: &SimilarityThreshold, path: &Path) -> AppResult<()> {
    let value = json!({
        "value": threshold.value,
        "percentile": threshold.percentile,
        "sample_size": threshold.sample_size,
        "seed": threshold.seed,
    });
    std::fs::write(
        path,
        format!("{}\n", serde_json::to_string_pretty(&value).unwrap()),
    )
    .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn stats_for_graph(config: &PipelineConfig, path: &Path) -> AppResult<()> {
    let loaded = load_graph(path)?;
    if loaded.duplicate_edges > 0 {
        eprintln!(
            "warning: {} duplicate edge lines collapsed in {}",
            loaded.duplicate_edges,
            path.display()
        );
    }
    let graph: UndirectedGraph = loaded.graph;
    let report = structure_report(&graph, &config.netstats_config())?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".to_string());

    let mut body = report.to_json();
    body["network"] = Value::String(stem.clone());
    body["config_hash"] = Value::String(config.hash());
    body["seed"] = json!(config.seed);

    ensure_output_dir(config)?;
    let report_path = artifact(config, &format!("{stem}_report.json"));
    std::fs::write(
        &report_path,
        format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
    )
    .with_context(|| format!("cannot write {}", report_path.display()))?;
    write_meta(config, &report_path, "stats")?;

    let plot_path = artifact(config, &format!("{stem}_plot.csv"));
    let plot = match degree_distribution(&graph) {
        Ok(dist) => plot_csv(&dist, &report),
        Err(_) => "k,p,power_fit,two_regime_fit\n".to_string(),
    };
    std::fs::write(&plot_path, plot)
        .with_context(|| format!("cannot write {}", plot_path.display()))?;
    write_meta(config, &plot_path, "stats")?;

    println!(
        "stats: {} -> {} (cc {:.6}, {} nodes, {} edges)",
        path.display(),
        report_path.display(),
        report.cc,
        report.nodes,
        report.edges
    );
    Ok(())
}

fn cmd_stats(config: &PipelineConfig, graph: Option<&Path>) -> AppResult<()> {
    match graph {
        Some(path) => {
            require_artifact(path, "build-wcn or build-wsn")?;
            stats_for_graph(config, path)
        }
        None => {
            let candidates = [artifact(config, "wcn.graph"), artifact(config, "wsn.graph")];
            let present: Vec<&PathBuf> = candidates.iter().filter(|p| p.exists()).collect();
            if present.is_empty() {
                return Err(AppError::Validation(format!(
                    "no graph artifacts in {}; run build-wcn or build-wsn",
                    config.output_dir.display()
                )));
            }
            for path in present {
                stats_for_graph(config, path)?;
            }
            Ok(())
        }
    }
}

/// One summary row per report, mirroring the per-network tables: counts,
/// fit quality for both models, clustering, assortativity, classifications.
pub fn emit_summary_table(reports: &[(String, Value)]) -> (String, String) {
    const COLUMNS: &[&str] = &[
        "network",
        "nodes",
        "edges",
        "degree_class",
        "power_ssr",
        "power_aic",
        "two_regime_ssr",
        "two_regime_aic",
        "cc",
        "er_cc",
        "small_world",
        "dac",
        "assortativity_class",
    ];

    fn cell(value: &Value) -> String {
        match value {
            Value::Null => "undefined".to_string(),
            Value::String(s) => s.clone(),
            Value::Number(n) if n.is_u64() || n.is_i64() => n.to_string(),
            Value::Number(n) => match n.as_f64() {
                Some(x) => format!("{x:.6}"),
                None => n.to_string(),
            },
            Value::Bool(b) => b.to_string(),
            other => other.to_string(),
        }
    }

    fn fit_field(report: &Value, model: &str, field: &str) -> String {
        match &report[model] {
            Value::Object(obj) => cell(obj.get(field).unwrap_or(&Value::Null)),
            _ => "undefined".to_string(),
        }
    }

    let mut rows: Vec<Vec<String>> = vec![COLUMNS.iter().map(|s| s.to_string()).collect()];
    for (name, report) in reports {
        rows.push(vec![
            name.clone(),
            cell(&report["nodes"]),
            cell(&report["edges"]),
            cell(&report["degree_class"]),
            fit_field(report, "power_law", "ssr"),
            fit_field(report, "power_law", "aic"),
            fit_field(report, "two_regime", "ssr"),
            fit_field(report, "two_regime", "aic"),
            cell(&report["cc"]),
            cell(&report["er_cc"]),
            cell(&report["small_world"]),
            cell(&report["dac"]),
            cell(&report["assortativity_class"]),
        ]);
    }

    let widths: Vec<usize> = (0..COLUMNS.len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut text = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        text.push_str(line.join("  ").trim_end());
        text.push('\n');
    }

    let mut csv = String::new();
    for row in &rows {
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    (text, csv)
}

fn cmd_report(config: &PipelineConfig) -> AppResult<()> {
    let dir = &config.output_dir;
    let mut report_files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .map(|n| n.to_string_lossy().ends_with("_report.json"))
                .unwrap_or(false)
        })
        .collect();
    report_files.sort();
    if report_files.is_empty() {
        return Err(AppError::Validation(format!(
            "no *_report.json in {}; run stats",
            dir.display()
        )));
    }

    let mut reports = Vec::new();
    for path in &report_files {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let value: Value = serde_json::from_str(&text)
            .with_context(|| format!("{} is not valid JSON", path.display()))?;
        let name = value["network"]
            .as_str()
            .map(str::to_owned)
            .unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().trim_end_matches("_report").to_string())
                    .unwrap_or_else(|| "network".to_string())
            });
        reports.push((name, value));
    }

    let (text, csv) = emit_summary_table(&reports);
    let text_path = artifact(config, "summary.txt");
    let csv_path = artifact(config, "summary.csv");
    std::fs::write(&text_path, &text)
        .with_context(|| format!("cannot write {}", text_path.display()))?;
    write_meta(config, &text_path, "report")?;
    std::fs::write(&csv_path, &csv)
        .with_context(|| format!("cannot write {}", csv_path.display()))?;
    write_meta(config, &csv_path, "report")?;
    print!("{text}");
    println!(
        "report: {} networks -> {}",
        reports.len(),
        text_path.display()
    );
    Ok(())
}

fn cmd_pipeline(config: &PipelineConfig) -> AppResult<()> {
    cmd_ingest(config)?;
    cmd_vocab(config)?;
    cmd_train(config)?;
    cmd_build_wcn(config)?;
    cmd_build_wsn(config)?;
    cmd_stats(config, None)?;
    cmd_report(config)
}
