//! SGNS training loop.
//!
//! Parameters live in atomic cells so one code path serves both modes: with
//! one thread every load/store is sequential and the result is bit-identical
//! for a fixed seed; with several threads workers share the matrices without
//! locks and tolerate lost updates (statistical reproducibility only).

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Vocabulary};
use crate::error::{Error, Result};

use super::{sigmoid, softplus, EmbeddingMatrix, NoiseDistribution, TrainingConfig};

/// Per-epoch training diagnostics, in epoch order.
#[derive(Debug, Clone)]
pub struct TrainStats {
    pub epoch_mean_loss: Vec<f64>,
    pub epoch_pairs: Vec<usize>,
}

/// Train embeddings over the in-vocabulary tokens of `corpus`.
pub fn train_sgns(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TrainingConfig,
) -> Result<EmbeddingMatrix> {
    train_sgns_with_stats(corpus, vocab, config).map(|(matrix, _)| matrix)
}

pub fn train_sgns_with_stats(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TrainingConfig,
) -> Result<(EmbeddingMatrix, TrainStats)> {
    config.validate()?;
    if corpus.texts().is_empty() {
        return Err(Error::EmptyCorpus);
    }

    // Token ids per text; out-of-vocabulary tokens keep their position so the
    // window is measured over the original sequence.
    let texts: Vec<Vec<Option<u32>>> = corpus
        .texts()
        .iter()
        .map(|t| t.tokens.iter().map(|tok| vocab.id_of(tok)).collect())
        .collect();
    let in_vocab_positions: usize = texts
        .iter()
        .map(|t| t.iter().filter(|id| id.is_some()).count())
        .sum();
    if in_vocab_positions == 0 {
        return Err(Error::NoTrainableTokens);
    }

    let dim = config.dim;
    let n_words = vocab.len();

    // Initialization: input rows uniform in (-0.5/dim, 0.5/dim), output rows
    // zero. Sequential and seed-determined regardless of thread count.
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let half = 0.5 / dim as f64;
    let input: Vec<AtomicU64> = (0..n_words * dim)
        .map(|_| AtomicU64::new(init_rng.gen_range(-half..half).to_bits()))
        .collect();
    let output: Vec<AtomicU64> = (0..n_words * dim)
        .map(|_| AtomicU64::new(0.0f64.to_bits()))
        .collect();

    let noise = NoiseDistribution::from_vocabulary(vocab);
    let keep_probability: Option<Vec<f64>> = config.subsample_threshold.map(|t| {
        let total: u64 = vocab.counts().iter().sum();
        vocab
            .counts()
            .iter()
            .map(|&c| {
                let freq = c as f64 / total as f64;
                (t / freq).sqrt().min(1.0)
            })
            .collect()
    });

    let total_steps = in_vocab_positions * config.epochs;
    let processed = AtomicUsize::new(0);

    let threads = config.threads.min(texts.len()).max(1);
    let chunk_len = texts.len().div_ceil(threads);
    let chunks: Vec<&[Vec<Option<u32>>]> = texts.chunks(chunk_len).collect();

    let mut per_worker_stats: Vec<Vec<(f64, usize)>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (worker, chunk) in chunks.iter().enumerate() {
            let input = &input;
            let output = &output;
            let noise = &noise;
            let keep_probability = &keep_probability;
            let processed = &processed;
            let handle = scope.spawn(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    config
                        .seed
                        .wrapping_add((worker as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                );
                let mut epoch_stats = Vec::with_capacity(config.epochs);
                let mut center_grad = vec![0.0f64; dim];
                let mut dropped: Vec<bool> = Vec::new();
                for _epoch in 0..config.epochs {
                    let mut loss_sum = 0.0f64;
                    let mut pair_count = 0usize;
                    for ids in *chunk {
                        // Subsampled tokens keep their position (the window
                        // still spans them) but act as neither center nor
                        // context, like out-of-vocabulary tokens.
                        dropped.clear();
                        dropped.resize(ids.len(), false);
                        if let Some(keep) = keep_probability {
                            for (pos, id) in ids.iter().enumerate() {
                                if let Some(w) = id {
                                    dropped[pos] = rng.gen::<f64>() >= keep[*w as usize];
                                }
                            }
                        }
                        for (pos, id) in ids.iter().enumerate() {
                            let Some(center) = *id else { continue };
                            let done = processed.fetch_add(1, Ordering::Relaxed);
                            let lr = config.initial_lr
                                * (1.0 - done as f64 / total_steps as f64).max(0.01);
                            if dropped[pos] {
                                continue;
                            }
                            let lo = pos.saturating_sub(config.window);
                            let hi = (pos + config.window + 1).min(ids.len());
                            for ctx_pos in lo..hi {
                                if ctx_pos == pos || dropped[ctx_pos] {
                                    continue;
                                }
                                let Some(context) = ids[ctx_pos] else {
                                    continue;
                                };
                                loss_sum += train_pair(
                                    input,
                                    output,
                                    dim,
                                    center,
                                    context,
                                    noise,
                                    config.negatives,
                                    lr,
                                    &mut rng,
                                    &mut center_grad,
                                );
                                pair_count += 1;
                            }
                        }
                    }
                    epoch_stats.push((loss_sum, pair_count));
                }
                epoch_stats
            });
            handles.push(handle);
        }
        for handle in handles {
            per_worker_stats.push(handle.join().expect("training worker panicked"));
        }
    });

    let mut epoch_mean_loss = Vec::with_capacity(config.epochs);
    let mut epoch_pairs = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let (sum, count) = per_worker_stats
            .iter()
            .map(|w| w[epoch])
            .fold((0.0, 0usize), |(s, c), (ws, wc)| (s + ws, c + wc));
        epoch_mean_loss.push(if count > 0 { sum / count as f64 } else { 0.0 });
        epoch_pairs.push(count);
    }

    let input: Vec<f64> = input
        .into_iter()
        .map(|cell| f64::from_bits(cell.into_inner()))
        .collect();
    let output: Vec<f64> = output
        .into_iter()
        .map(|cell| f64::from_bits(cell.into_inner()))
        .collect();
    let matrix = EmbeddingMatrix::new(vocab.words().to_vec(), dim, input, output);
    debug_assert!(matrix.all_finite());
    Ok((
        matrix,
        TrainStats {
            epoch_mean_loss,
            epoch_pairs,
        },
    ))
}

#[inline]
fn load(cells: &[AtomicU64], idx: usize) -> f64 {
    f64::from_bits(cells[idx].load(Ordering::Relaxed))
}

#[inline]
fn store(cells: &[AtomicU64], idx: usize, value: f64) {
    cells[idx].store(value.to_bits(), Ordering::Relaxed);
}

/// One stochastic step on a (center, context) pair: the positive update plus
/// `negatives` noise samples (resampled while they collide with the true
/// context). Returns the pair loss at the pre-update parameters.
#[allow(clippy::too_many_arguments)]
fn train_pair(
    input: &[AtomicU64],
    output: &[AtomicU64],
    dim: usize,
    center: u32,
    context: u32,
    noise: &NoiseDistribution,
    negatives: usize,
    lr: f64,
    rng: &mut ChaCha8Rng,
    center_grad: &mut [f64],
) -> f64 {
    let ci = center as usize * dim;
    center_grad.fill(0.0);

    // Positive pair: gradient (sigma(c.x) - 1) flows to both sides.
    let xi = context as usize * dim;
    let mut dot = 0.0;
    for d in 0..dim {
        dot += load(input, ci + d) * load(output, xi + d);
    }
    let g_pos = sigmoid(dot) - 1.0;
    let mut loss = softplus(-dot);
    for d in 0..dim {
        let c = load(input, ci + d);
        let x = load(output, xi + d);
        center_grad[d] += g_pos * x;
        store(output, xi + d, x - lr * g_pos * c);
    }

    for _ in 0..negatives {
        let mut sampled = noise.sample(rng);
        let mut attempts = 0;
        while sampled == context {
            sampled = noise.sample(rng);
            attempts += 1;
            if attempts > 1000 {
                break;
            }
        }
        if sampled == context {
            // Degenerate single-word noise distribution: no usable negative.
            continue;
        }
        let ni = sampled as usize * dim;
        let mut dot = 0.0;
        for d in 0..dim {
            dot += load(input, ci + d) * load(output, ni + d);
        }
        let g_neg = sigmoid(dot);
        loss += softplus(dot);
        for d in 0..dim {
            let c = load(input, ci + d);
            let n = load(output, ni + d);
            center_grad[d] += g_neg * n;
            store(output, ni + d, n - lr * g_neg * c);
        }
    }

    for d in 0..dim {
        let c = load(input, ci + d);
        store(input, ci + d, c - lr * center_grad[d]);
    }
    loss
}
