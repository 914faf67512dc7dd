//! Simple undirected unweighted graphs over word ids.
//!
//! Adjacency is stored as one sorted id array per node, which keeps the
//! memory footprint flat enough for tens of millions of edges and makes
//! neighbor intersection (triangle counting) a linear merge.

mod build;

pub use build::{
    build_wcn, build_wcn_with, build_wsn, estimate_similarity_threshold,
    exhaustive_similarity_threshold, CooccurrenceUnit, SimilarityThreshold, WcnOptions,
};

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Simple undirected graph: no self-loops, no parallel edges.
///
/// Node ids are dense `0..node_count()`; every node carries a word label.
#[derive(Debug, Clone)]
pub struct UndirectedGraph {
    words: Vec<String>,
    adjacency: Vec<Vec<u32>>,
    edge_count: usize,
}

impl UndirectedGraph {
    /// Build from a word table and an edge list. Duplicate edges collapse;
    /// self-loops and out-of-range ids are rejected.
    pub fn from_edges(words: Vec<String>, edges: &[(u32, u32)]) -> Result<Self> {
        let n = words.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u == v {
                return Err(Error::invalid(format!("self-loop at node {u}")));
            }
            if u as usize >= n || v as usize >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        let mut degree_sum = 0usize;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            degree_sum += list.len();
        }
        let graph = UndirectedGraph {
            words,
            adjacency,
            edge_count: degree_sum / 2,
        };
        graph.check_invariants()?;
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.words.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, node: u32) -> usize {
        self.adjacency[node as usize].len()
    }

    pub fn neighbors(&self, node: u32) -> &[u32] {
        &self.adjacency[node as usize]
    }

    pub fn word(&self, node: u32) -> &str {
        &self.words[node as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adjacency[u as usize].binary_search(&v).is_ok()
    }

    /// Iterate every edge once, as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let u = u as u32;
            list.iter()
                .copied()
                .filter_map(move |v| (u < v).then_some((u, v)))
        })
    }

    /// Degree of every node, in node id order.
    pub fn degree_sequence(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Verify the structural invariants: symmetry, sortedness, no self-loops,
    /// no duplicates, and the edge count matching half the degree sum.
    pub fn check_invariants(&self) -> Result<()> {
        let mut degree_sum = 0usize;
        for (u, list) in self.adjacency.iter().enumerate() {
            let u = u as u32;
            degree_sum += list.len();
            for window in list.windows(2) {
                if window[0] >= window[1] {
                    return Err(Error::invalid(format!(
                        "adjacency of node {u} is not strictly sorted"
                    )));
                }
            }
            for &v in list {
                if v == u {
                    return Err(Error::invalid(format!("self-loop at node {u}")));
                }
                if self.adjacency[v as usize].binary_search(&u).is_err() {
                    return Err(Error::invalid(format!(
                        "asymmetric adjacency: {u} -> {v} has no reverse"
                    )));
                }
            }
        }
        if degree_sum % 2 != 0 || degree_sum / 2 != self.edge_count {
            return Err(Error::invalid(format!(
                "edge count {} does not match degree sum {}",
                self.edge_count, degree_sum
            )));
        }
        Ok(())
    }
}

/// Result of [`load_graph`]: the graph plus the number of duplicate edge
/// lines that were collapsed.
#[derive(Debug)]
pub struct LoadedGraph {
    pub graph: UndirectedGraph,
    pub duplicate_edges: usize,
}

/// Write a graph: header `<nodes> <edges>`, one `<id> <word>` line per node,
/// an `#edges` sentinel, then one `<u> <v>` line per edge with `u < v`,
/// sorted by `(u, v)`.
pub fn save_graph(graph: &UndirectedGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    for (id, word) in graph.words().iter().enumerate() {
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(Error::invalid(format!(
                "word {word:?} of node {id} cannot be serialized (empty or contains whitespace)"
            )));
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>, s: &str| {
        w.write_all(s.as_bytes()).map_err(|e| Error::io(path, e))
    };
    write(
        &mut w,
        &format!("{} {}\n", graph.node_count(), graph.edge_count()),
    )?;
    for (id, word) in graph.words().iter().enumerate() {
        write(&mut w, &format!("{id} {word}\n"))?;
    }
    write(&mut w, "#edges\n")?;
    for (u, v) in graph.edges() {
        write(&mut w, &format!("{u} {v}\n"))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a graph written by [`save_graph`]. Malformed node or edge lines
/// (unknown ids, self-loops, count mismatches) are errors naming the line;
/// duplicate edge lines collapse to one edge and are counted.
pub fn load_graph(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let mut next_line = |expect: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((idx, line)) => Ok((idx + 1, line.map_err(|e| Error::io(path, e))?)),
            None => Err(Error::parse(
                path,
                0,
                format!("unexpected end of file, expected {expect}"),
            )),
        }
    };

    let (line_no, header) = next_line("header")?;
    let mut parts = header.split(' ');
    let (n, e) = match (parts.next(), parts.next(), parts.next()) {
        (Some(n), Some(e), None) => {
            let n: usize = n
                .parse()
                .map_err(|_| Error::parse(path, line_no, "node count is not an integer"))?;
            let e: usize = e
                .parse()
                .map_err(|_| Error::parse(path, line_no, "edge count is not an integer"))?;
            (n, e)
        }
        _ => {
            return Err(Error::parse(
                path,
                line_no,
                "expected header <nodes> <edges>",
            ))
        }
    };

    let mut words = Vec::with_capacity(n);
    for expected_id in 0..n {
        let (line_no, line) = next_line("node line")?;
        let (id, word) = line
            .split_once(' ')
            .ok_or_else(|| Error::parse(path, line_no, "expected <id> <word>"))?;
        let id: usize = id
            .parse()
            .map_err(|_| Error::parse(path, line_no, "node id is not an integer"))?;
        if id != expected_id {
            return Err(Error::parse(
                path,
                line_no,
                format!("non-contiguous node id {id}, expected {expected_id}"),
            ));
        }
        if word.is_empty() || word.contains(' ') {
            return Err(Error::parse(path, line_no, "empty or malformed word"));
        }
        words.push(word.to_owned());
    }

    let (line_no, sentinel) = next_line("#edges sentinel")?;
    if sentinel != "#edges" {
        return Err(Error::parse(path, line_no, "expected #edges sentinel"));
    }

    let mut edges = Vec::with_capacity(e);
    let mut duplicate_edges = 0usize;
    let mut seen = std::collections::HashSet::with_capacity(e);
    for _ in 0..e {
        let (line_no, line) = next_line("edge line")?;
        let (u, v) = line
            .split_once(' ')
            .ok_or_else(|| Error::parse(path, line_no, "expected <u> <v>"))?;
        let u: u32 = u
            .parse()
            .map_err(|_| Error::parse(path, line_no, "edge endpoint is not an integer"))?;
        let v: u32 = v
            .parse()
            .map_err(|_| Error::parse(path, line_no, "edge endpoint is not an integer"))?;
        if u == v {
            return Err(Error::parse(path, line_no, format!("self-loop {u} {v}")));
        }
        if u as usize >= n || v as usize >= n {
            return Err(Error::parse(
                path,
                line_no,
                format!("unknown node id in edge {u} {v}"),
            ));
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            edges.push(key);
        } else {
            duplicate_edges += 1;
        }
    }
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            return Err(Error::parse(
                path,
                idx + 1,
                "trailing content after edge list",
            ));
        }
    }

    let graph = UndirectedGraph::from_edges(words, &edges)?;
    Ok(LoadedGraph {
        graph,
        duplicate_edges,
    })
}
