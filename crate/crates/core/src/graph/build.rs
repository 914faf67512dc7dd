//! Network builders: co-occurrence graphs from corpora, similarity graphs
//! from embeddings.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Vocabulary};
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

/// What counts as one co-occurrence context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CooccurrenceUnit {
    /// Two words co-occur when they both appear anywhere in the same text.
    Text,
    /// Extension: two words co-occur when they appear within `k` token
    /// positions of each other.
    Window(usize),
}

/// Options for [`build_wcn_with`].
#[derive(Debug, Clone)]
pub struct WcnOptions {
    pub unit: CooccurrenceUnit,
    /// Skip the pair expansion of texts with more unique in-vocabulary types
    /// than this (their tokens still count as node appearances). `None`
    /// means unlimited.
    pub max_unique_tokens: Option<usize>,
}

impl Default for WcnOptions {
    fn default() -> Self {
        WcnOptions {
            unit: CooccurrenceUnit::Text,
            max_unique_tokens: None,
        }
    }
}

/// Word co-occurrence network: nodes are vocabulary words that occur in at
/// least one text; each text contributes a clique over its unique
/// in-vocabulary word types. Duplicate pairs across texts collapse.
pub fn build_wcn(corpus: &Corpus, vocab: &Vocabulary) -> Result<UndirectedGraph> {
    build_wcn_with(corpus, vocab, &WcnOptions::default())
}

pub fn build_wcn_with(
    corpus: &Corpus,
    vocab: &Vocabulary,
    options: &WcnOptions,
) -> Result<UndirectedGraph> {
    if corpus.texts().is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_count: vocab.min_count(),
        });
    }

    let mut appeared = vec![false; vocab.len()];
    let mut edges: HashSet<(u32, u32)> = HashSet::new();

    for text in corpus.texts() {
        match options.unit {
            CooccurrenceUnit::Text => {
                let mut ids: Vec<u32> = text.tokens.iter().filter_map(|t| vocab.id_of(t)).collect();
                ids.sort_unstable();
                ids.dedup();
                for &id in &ids {
                    appeared[id as usize] = true;
                }
                if let Some(cap) = options.max_unique_tokens {
                    if ids.len() > cap {
                        continue;
                    }
                }
                for i in 0..ids.len() {
                    for j in (i + 1)..ids.len() {
                        edges.insert((ids[i], ids[j]));
                    }
                }
            }
            CooccurrenceUnit::Window(k) => {
                let ids: Vec<Option<u32>> = text.tokens.iter().map(|t| vocab.id_of(t)).collect();
                for (pos, id) in ids.iter().enumerate() {
                    let Some(u) = *id else { continue };
                    appeared[u as usize] = true;
                    for other in ids.iter().skip(pos + 1).take(k) {
                        let Some(v) = *other else { continue };
                        if u != v {
                            edges.insert((u.min(v), u.max(v)));
                        }
                    }
                }
            }
        }
    }

    // Dense re-indexing over the words that actually appeared, in vocab id
    // order so the node table is deterministic.
    let mut remap = vec![u32::MAX; vocab.len()];
    let mut words = Vec::new();
    for (old, &seen) in appeared.iter().enumerate() {
        if seen {
            remap[old] = words.len() as u32;
            words.push(vocab.word(old as u32).to_owned());
        }
    }
    let remapped: Vec<(u32, u32)> = edges
        .into_iter()
        .map(|(u, v)| (remap[u as usize], remap[v as usize]))
        .collect();
    UndirectedGraph::from_edges(words, &remapped)
}

/// A similarity cutoff: the empirical percentile of a cosine-similarity
/// population over word pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarityThreshold {
    pub value: f64,
    pub percentile: f64,
    pub sample_size: usize,
    pub seed: u64,
}

/// Empirical percentile with linear interpolation between order statistics.
fn percentile_linear(sorted: &[f64], percentile: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = percentile / 100.0 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn unit_vectors(matrix: &EmbeddingMatrix, subset: &Vocabulary) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::with_capacity(subset.len());
    for (_, word, _) in subset.iter() {
        let vec = matrix
            .vector_of(word)
            .ok_or_else(|| Error::invalid(format!("word {word:?} has no embedding vector")))?;
        let norm = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector {
                word: word.to_owned(),
            });
        }
        rows.push(vec.iter().map(|x| x / norm).collect());
    }
    Ok(rows)
}

fn validate_threshold_inputs(subset: &Vocabulary, percentile: f64) -> Result<()> {
    if subset.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 words to estimate a similarity threshold, got {}",
            subset.len()
        )));
    }
    if !(percentile > 0.0 && percentile < 100.0) {
        return Err(Error::invalid(format!(
            "percentile must be in (0, 100), got {percentile}"
        )));
    }
    Ok(())
}

/// Estimate the percentile threshold from `sample_size` uniform random
/// unordered word pairs (with replacement over pairs, identical pairs
/// excluded). Deterministic for a fixed seed.
pub fn estimate_similarity_threshold(
    matrix: &EmbeddingMatrix,
    subset: &Vocabulary,
    percentile: f64,
    sample_size: usize,
    seed: u64,
) -> Result<SimilarityThreshold> {
    validate_threshold_inputs(subset, percentile)?;
    if sample_size < 1000 {
        return Err(Error::invalid(format!(
            "sample_size must be at least 1000, got {sample_size}"
        )));
    }
    let rows = unit_vectors(matrix, subset)?;
    let n = rows.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sims = Vec::with_capacity(sample_size);
    for _ in 0..sample_size {
        let i = rng.gen_range(0..n);
        let j = loop {
            let j = rng.gen_range(0..n);
            if j != i {
                break j;
            }
        };
        sims.push(dot(&rows[i], &rows[j]));
    }
    sims.sort_by(f64::total_cmp);
    Ok(SimilarityThreshold {
        value: percentile_linear(&sims, percentile),
        percentile,
        sample_size,
        seed,
    })
}

/// Exact percentile over all unordered word pairs. Quadratic in the subset
/// size; intended for subsets small enough to enumerate.
pub fn exhaustive_similarity_threshold(
    matrix: &EmbeddingMatrix,
    subset: &Vocabulary,
    percentile: f64,
) -> Result<SimilarityThreshold> {
    validate_threshold_inputs(subset, percentile)?;
    let rows = unit_vectors(matrix, subset)?;
    let n = rows.len();
    let mut sims = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            sims.push(dot(&rows[i], &rows[j]));
        }
    }
    sims.sort_by(f64::total_cmp);
    Ok(SimilarityThreshold {
        value: percentile_linear(&sims, percentile),
        percentile,
        sample_size: sims.len(),
        seed: 0,
    })
}

/// Word similarity network: nodes are all subset words; `(u, v)` is an edge
/// iff their cosine similarity is strictly above the threshold. All pairs
/// are examined in row blocks, so memory stays bounded by the output edges.
pub fn build_wsn(
    matrix: &EmbeddingMatrix,
    subset: &Vocabulary,
    threshold: &SimilarityThreshold,
) -> Result<UndirectedGraph> {
    if !threshold.value.is_finite() || threshold.value.abs() > 1.0 + 1e-6 {
        return Err(Error::invalid(format!(
            "similarity threshold {} is outside [-1, 1]",
            threshold.value
        )));
    }
    let rows = unit_vectors(matrix, subset)?;
    let n = rows.len();
    let words: Vec<String> = subset.words().to_vec();

    const BLOCK: usize = 1024;
    let mut edges = Vec::new();
    let mut block_start = 0;
    while block_start < n {
        let block_end = (block_start + BLOCK).min(n);
        for i in block_start..block_end {
            for j in (i + 1)..n {
                if dot(&rows[i], &rows[j]) > threshold.value {
                    edges.push((i as u32, j as u32));
                }
            }
        }
        block_start = block_end;
    }
    UndirectedGraph::from_edges(words, &edges)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
