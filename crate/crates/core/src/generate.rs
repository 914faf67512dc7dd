//! Seeded random graph generators used as references in tests and
//! benchmarks: Erdős–Rényi G(n, p) and Barabási–Albert preferential
//! attachment.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

fn numbered_words(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// G(n, p) with geometric edge skipping, so the cost is proportional to the
/// number of edges rather than the number of pairs. Deterministic per seed.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> UndirectedGraph {
    let words = numbered_words(n);
    if p <= 0.0 || n < 2 {
        return UndirectedGraph::from_edges(words, &[]).expect("empty graph");
    }
    let mut edges = Vec::new();
    if p >= 1.0 {
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                edges.push((u, v));
            }
        }
        return UndirectedGraph::from_edges(words, &edges).expect("complete graph");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_q = (1.0 - p).ln();
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let r: f64 = rng.gen_range(0.0..1.0);
        let skip = ((1.0 - r).ln() / log_q).floor() as i64;
        w += 1 + skip;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as u32, v as u32));
        }
    }
    UndirectedGraph::from_edges(words, &edges).expect("generated edges are valid")
}

/// Barabási–Albert preferential attachment: starts from `m` unconnected
/// nodes; each subsequent node attaches to `m` distinct existing nodes
/// chosen proportionally to their degree (uniformly for the very first
/// attachment). Deterministic per seed.
pub fn barabasi_albert(n: usize, m: usize, seed: u64) -> Result<UndirectedGraph> {
    if m < 1 || n <= m {
        return Err(Error::invalid(format!(
            "Barabasi-Albert needs 1 <= m < n, got n = {n}, m = {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity((n - m) * m);
    // One entry per edge endpoint: sampling an index uniformly is sampling a
    // node proportionally to its degree.
    let mut repeated: Vec<u32> = Vec::with_capacity(2 * (n - m) * m);
    let mut targets: Vec<u32> = (0..m as u32).collect();
    for v in m as u32..n as u32 {
        for &t in &targets {
            edges.push((t, v));
            repeated.push(t);
            repeated.push(v);
        }
        if (v as usize) + 1 < n {
            targets.clear();
            while targets.len() < m {
                let candidate = repeated[rng.gen_range(0..repeated.len())];
                if !targets.contains(&candidate) {
                    targets.push(candidate);
                }
            }
        }
    }
    UndirectedGraph::from_edges(numbered_words(n), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erdos_renyi_edge_count_near_expectation() {
        let n = 500;
        let p = 0.05;
        let g = erdos_renyi(n, p, 123);
        assert_eq!(g.node_count(), n);
        let pairs = (n * (n - 1) / 2) as f64;
        let expected = pairs * p;
        let sd = (pairs * p * (1.0 - p)).sqrt();
        let e = g.edge_count() as f64;
        assert!(
            (e - expected).abs() < 5.0 * sd,
            "edges {e} expected {expected} sd {sd}"
        );
        g.check_invariants().unwrap();
    }

    #[test]
    fn erdos_renyi_extremes() {
        assert_eq!(erdos_renyi(10, 0.0, 1).edge_count(), 0);
        assert_eq!(erdos_renyi(10, 1.0, 1).edge_count(), 45);
    }

    #[test]
    fn erdos_renyi_deterministic() {
        let a = erdos_renyi(100, 0.1, 9);
        let b = erdos_renyi(100, 0.1, 9);
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
    }

    #[test]
    fn barabasi_albert_shape() {
        let n = 2000;
        let m = 4;
        let g = barabasi_albert(n, m, 42).unwrap();
        assert_eq!(g.node_count(), n);
        assert_eq!(g.edge_count(), (n - m) * m);
        g.check_invariants().unwrap();
        // Every attached node has degree >= m; hubs exist.
        let degrees = g.degree_sequence();
        assert!(degrees.iter().skip(m).all(|&d| d >= m));
        let max = degrees.iter().max().unwrap();
        assert!(*max > 4 * m, "max degree {max}");
    }

    #[test]
    fn barabasi_albert_rejects_bad_m() {
        assert!(barabasi_albert(5, 0, 1).is_err());
        assert!(barabasi_albert(5, 5, 1).is_err());
    }
}
