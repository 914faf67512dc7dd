//! Skip-gram negative-sampling embeddings and similarity queries.
//!
//! Training keeps two parameter matrices: input vectors (the published
//! embedding, one row per vocabulary word) and output vectors (context
//! parameters). Only input vectors are serialized.

mod io;
mod train;

pub use io::{load_embeddings, save_embeddings};
pub use train::{train_sgns, train_sgns_with_stats, TrainStats};

use std::collections::HashMap;

use rand::Rng;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// SGNS training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainingConfig {
    /// Context window: tokens considered on each side of the center.
    pub window: usize,
    /// Embedding dimension.
    pub dim: usize,
    /// Negative samples per (center, context) pair.
    pub negatives: usize,
    /// Full passes over the corpus; 0 returns the initialization unchanged.
    pub epochs: usize,
    /// Learning rate at the first step; decays linearly to 1/100 of it.
    pub initial_lr: f64,
    /// Seed for initialization, negative sampling and subsampling (ChaCha8).
    pub seed: u64,
    /// Frequent-word subsampling threshold `t`; `None` disables it. When on,
    /// each occurrence of word `w` is kept with probability
    /// `min(1, sqrt(t / freq(w)))`; dropped occurrences keep their position
    /// but act as neither center nor context.
    pub subsample_threshold: Option<f64>,
    /// Worker threads. 1 is deterministic; more than 1 applies lock-free
    /// shared updates and promises only statistical reproducibility.
    pub threads: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            window: 10,
            dim: 500,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            seed: 42,
            subsample_threshold: None,
            threads: 1,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.window < 1 {
            problems.push("window must be >= 1");
        }
        if self.dim < 1 {
            problems.push("dim must be >= 1");
        }
        if self.negatives < 1 {
            problems.push("negatives must be >= 1");
        }
        if !(self.initial_lr > 0.0) {
            problems.push("initial_lr must be positive");
        }
        if self.threads < 1 {
            problems.push("threads must be >= 1");
        }
        if let Some(t) = self.subsample_threshold {
            if !(t > 0.0) {
                problems.push("subsample threshold must be positive");
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(problems.join("; ")))
        }
    }
}

/// Dense input/output vectors for a vocabulary, row-major.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    words: Vec<String>,
    index: HashMap<String, u32>,
    dim: usize,
    input: Vec<f64>,
    output: Vec<f64>,
}

impl EmbeddingMatrix {
    pub(crate) fn new(words: Vec<String>, dim: usize, input: Vec<f64>, output: Vec<f64>) -> Self {
        debug_assert_eq!(input.len(), words.len() * dim);
        debug_assert_eq!(output.len(), words.len() * dim);
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        EmbeddingMatrix {
            words,
            index,
            dim,
            input,
            output,
        }
    }

    /// Build a matrix from explicit input rows (output vectors start at
    /// zero). Rows must be non-empty and share one dimension.
    pub fn from_rows(words: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::NoVectors);
        }
        if rows.len() != words.len() {
            return Err(Error::invalid(format!(
                "{} words but {} rows",
                words.len(),
                rows.len()
            )));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::invalid("zero-dimensional vectors".to_string()));
        }
        let mut input = Vec::with_capacity(rows.len() * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            input.extend_from_slice(row);
        }
        let output = vec![0.0; input.len()];
        Ok(EmbeddingMatrix::new(words, dim, input, output))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn id_of(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// Input (published) vector of a word id.
    pub fn input_vector(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dim;
        &self.input[start..start + self.dim]
    }

    /// Context-side vector of a word id.
    pub fn output_vector(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dim;
        &self.output[start..start + self.dim]
    }

    /// Input vector looked up by word.
    pub fn vector_of(&self, word: &str) -> Option<&[f64]> {
        self.id_of(word).map(|id| self.input_vector(id))
    }

    pub fn all_finite(&self) -> bool {
        self.input
            .iter()
            .chain(self.output.iter())
            .all(|x| x.is_finite())
    }
}

/// Unigram noise distribution with sampling weight proportional to
/// `count^0.75`, normalized to sum 1.
#[derive(Debug, Clone)]
pub struct NoiseDistribution {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl NoiseDistribution {
    pub fn from_vocabulary(vocab: &Vocabulary) -> Self {
        let raw: Vec<f64> = vocab
            .counts()
            .iter()
            .map(|&c| (c as f64).powf(0.75))
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        NoiseDistribution {
            weights,
            cumulative,
        }
    }

    pub fn weight(&self, id: u32) -> f64 {
        self.weights[id as usize]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sample(&self, rng: &mut impl Rng) -> u32 {
        let x: f64 = rng.gen();
        self.cumulative.partition_point(|&c| c < x) as u32
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x), stable for large |x|.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

fn check_dims(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> Result<()> {
    let dim = center.len();
    if context.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: context.len(),
        });
    }
    for neg in negatives {
        if neg.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: neg.len(),
            });
        }
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// SGNS objective for one (center, context) pair with the given negatives:
/// `-ln sigma(center . context) - sum_neg ln sigma(-center . neg)`.
pub fn sgns_pair_loss(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> Result<f64> {
    check_dims(center, context, negatives)?;
    let mut loss = softplus(-dot(center, context));
    for neg in negatives {
        loss += softplus(dot(center, neg));
    }
    Ok(loss)
}

/// Partial derivatives of [`sgns_pair_loss`] with respect to every vector.
#[derive(Debug, Clone)]
pub struct PairGradient {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn sgns_pair_gradient(
    center: &[f64],
    context: &[f64],
    negatives: &[Vec<f64>],
) -> Result<PairGradient> {
    check_dims(center, context, negatives)?;
    let dim = center.len();
    let g_pos = sigmoid(dot(center, context)) - 1.0;

    let mut grad_center: Vec<f64> = context.iter().map(|x| g_pos * x).collect();
    let grad_context: Vec<f64> = center.iter().map(|c| g_pos * c).collect();

    let mut grad_negatives = Vec::with_capacity(negatives.len());
    for neg in negatives {
        let g_neg = sigmoid(dot(center, neg));
        for d in 0..dim {
            grad_center[d] += g_neg * neg[d];
        }
        grad_negatives.push(center.iter().map(|c| g_neg * c).collect());
    }

    Ok(PairGradient {
        center: grad_center,
        context: grad_context,
        negatives: grad_negatives,
    })
}

/// Cosine similarity `a . b / (|a| |b|)`; undefined for zero vectors.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let norm_a = dot(a, a).sqrt();
    let norm_b = dot(b, b).sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok(dot(a, b) / (norm_a * norm_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, Corpus, TokenizedText};

    #[test]
    fn pair_loss_at_zero_vectors() {
        let z = vec![0.0; 4];
        let loss = sgns_pair_loss(&z, &z, std::slice::from_ref(&z)).unwrap();
        assert!((loss - 1.3862943611198906).abs() < 1e-12);
    }

    #[test]
    fn pair_loss_aligned_unit_vectors_no_negatives() {
        let e1 = vec![1.0, 0.0, 0.0];
        let loss = sgns_pair_loss(&e1, &e1, &[]).unwrap();
        assert!((loss - 0.31326168751822286).abs() < 1e-12);
    }

    #[test]
    fn pair_loss_decreases_with_alignment() {
        let neg = vec![vec![0.3, -0.2]];
        let mut prev = f64::INFINITY;
        for scale in [0.0, 0.5, 1.0, 2.0] {
            let c = vec![scale, 0.0];
            let x = vec![1.0, 0.0];
            let loss = sgns_pair_loss(&c, &x, &neg).unwrap();
            assert!(loss < prev || scale == 0.0);
            if scale > 0.0 {
                assert!(loss < prev);
            }
            prev = loss;
        }
    }

    #[test]
    fn pair_loss_rejects_dimension_mismatch() {
        let a = vec![0.0; 3];
        let b = vec![0.0; 4];
        assert!(matches!(
            sgns_pair_loss(&a, &b, &[]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradient_zero_at_zero_vectors() {
        let z = vec![0.0; 3];
        let g = sgns_pair_gradient(&z, &z, std::slice::from_ref(&z)).unwrap();
        assert!(g.center.iter().all(|&x| x == 0.0));
        assert!(g.context.iter().all(|&x| x == 0.0));
        assert!(g.negatives[0].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gradient_matches_closed_form() {
        let c = vec![0.4, -0.7, 0.2];
        let x = vec![-0.1, 0.3, 0.9];
        let n = vec![vec![0.5, 0.5, -0.5]];
        let g = sgns_pair_gradient(&c, &x, &n).unwrap();
        let g_pos = sigmoid(dot(&c, &x)) - 1.0;
        let g_neg = sigmoid(dot(&c, &n[0]));
        for d in 0..3 {
            assert!((g.center[d] - (g_pos * x[d] + g_neg * n[0][d])).abs() < 1e-15);
            assert!((g.context[d] - g_pos * c[d]).abs() < 1e-15);
            assert!((g.negatives[0][d] - g_neg * c[d]).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for trial in 0..100 {
            let dim = 2 + trial % 7; // dims 2..=8
            let sample = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
                (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
            };
            let c = sample(&mut rng);
            let x = sample(&mut rng);
            let negs: Vec<Vec<f64>> = (0..2).map(|_| sample(&mut rng)).collect();
            let grad = sgns_pair_gradient(&c, &x, &negs).unwrap();

            let check = |analytic: &[f64], mut perturb: Box<dyn FnMut(usize, f64) -> f64>| {
                for d in 0..dim {
                    let plus = perturb(d, h);
                    let minus = perturb(d, -h);
                    let numeric = (plus - minus) / (2.0 * h);
                    let denom = numeric.abs().max(analytic[d].abs()).max(1e-8);
                    assert!(
                        (numeric - analytic[d]).abs() / denom < 1e-4,
                        "dim {d}: analytic {} vs numeric {numeric}",
                        analytic[d]
                    );
                }
            };

            let (c2, x2, n2) = (c.clone(), x.clone(), negs.clone());
            check(
                &grad.center,
                Box::new(move |d, eps| {
                    let mut c = c2.clone();
                    c[d] += eps;
                    sgns_pair_loss(&c, &x2, &n2).unwrap()
                }),
            );
            let (c2, x2, n2) = (c.clone(), x.clone(), negs.clone());
            check(
                &grad.context,
                Box::new(move |d, eps| {
                    let mut x = x2.clone();
                    x[d] += eps;
                    sgns_pair_loss(&c2, &x, &n2).unwrap()
                }),
            );
            for k in 0..negs.len() {
                let (c2, x2, n2) = (c.clone(), x.clone(), negs.clone());
                check(
                    &grad.negatives[k],
                    Box::new(move |d, eps| {
                        let mut n = n2.clone();
                        n[k][d] += eps;
                        sgns_pair_loss(&c2, &x2, &n).unwrap()
                    }),
                );
            }
        }
    }

    #[test]
    fn cosine_basics() {
        let v = vec![0.3, -1.2, 0.4];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        let e1 = vec![1.0, 0.0];
        let e2 = vec![0.0, 1.0];
        assert!(cosine_similarity(&e1, &e2).unwrap().abs() < 1e-12);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((cosine_similarity(&v, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &e1),
            Err(Error::UndefinedSimilarity)
        ));
    }

    #[test]
    fn noise_distribution_matches_power_counts() {
        let texts = vec![TokenizedText {
            source_id: "t".into(),
            tokens: ["a"; 16]
                .iter()
                .chain(["b"; 2].iter())
                .map(|s| s.to_string())
                .collect(),
        }];
        let corpus = Corpus::from_texts("toy", texts).unwrap();
        let vocab = build_vocabulary(&corpus, 0).unwrap();
        let noise = NoiseDistribution::from_vocabulary(&vocab);
        let a = vocab.id_of("a").unwrap();
        let b = vocab.id_of("b").unwrap();
        let expected = (16.0f64 / 2.0).powf(0.75);
        assert!((noise.weight(a) / noise.weight(b) - expected).abs() < 1e-9);
        let sum: f64 = noise.weights().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
}
