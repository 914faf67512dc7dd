//! Structural diagnostics: degree-distribution model selection, clustering
//! against the Erdős–Rényi baseline, and degree assortativity, combined into
//! a per-network report.

mod fit;

pub use fit::{
    aic, fit_power_law, fit_power_law_points, fit_two_regime, fit_two_regime_points,
    log_binned_points, power_law_preferred, unbinned_points, FitPoints, PowerLawFit, TwoRegimeFit,
};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

/// Empirical degree distribution over nodes of degree >= 1. Degree-0 nodes
/// are excluded from the points (no log of zero) but reported alongside.
#[derive(Debug, Clone)]
pub struct DegreeDistribution {
    points: Vec<(u32, f64)>,
    isolated_nodes: usize,
}

impl DegreeDistribution {
    /// Build from explicit `(degree, probability)` points; degrees must be
    /// distinct and ascending, probabilities positive and summing to 1.
    pub fn from_points(points: Vec<(u32, f64)>, isolated_nodes: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("no degree points".to_string()));
        }
        let mut sum = 0.0;
        for window in points.windows(2) {
            if window[0].0 >= window[1].0 {
                return Err(Error::invalid(
                    "degrees must be distinct and ascending".to_string(),
                ));
            }
        }
        for &(k, p) in &points {
            if k < 1 || p <= 0.0 {
                return Err(Error::invalid(format!("invalid point ({k}, {p})")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(DegreeDistribution {
            points,
            isolated_nodes,
        })
    }

    pub fn points(&self) -> &[(u32, f64)] {
        &self.points
    }

    pub fn isolated_nodes(&self) -> usize {
        self.isolated_nodes
    }
}

/// Normalized frequency of each distinct degree >= 1.
pub fn degree_distribution(graph: &UndirectedGraph) -> Result<DegreeDistribution> {
    let degrees = graph.degree_sequence();
    let isolated = degrees.iter().filter(|&&d| d == 0).count();
    let counted = degrees.len() - isolated;
    if counted == 0 {
        return Err(Error::invalid("all nodes are isolated".to_string()));
    }
    let mut tally: std::collections::BTreeMap<u32, usize> = std::collections::BTreeMap::new();
    for &d in &degrees {
        if d > 0 {
            *tally.entry(d as u32).or_insert(0) += 1;
        }
    }
    let points = tally
        .into_iter()
        .map(|(k, c)| (k, c as f64 / counted as f64))
        .collect();
    Ok(DegreeDistribution {
        points,
        isolated_nodes: isolated,
    })
}

/// Number of edges among the neighbors of every node, via sorted-adjacency
/// intersection.
fn triangles_per_node(graph: &UndirectedGraph) -> Vec<usize> {
    let n = graph.node_count();
    let mut triangles = vec![0usize; n];
    for u in 0..n as u32 {
        let neighbors = graph.neighbors(u);
        let mut count = 0usize;
        for &v in neighbors {
            count += sorted_intersection_count(neighbors, graph.neighbors(v));
        }
        // Every neighbor-neighbor edge is seen from both endpoints.
        triangles[u as usize] = count / 2;
    }
    triangles
}

fn sorted_intersection_count(a: &[u32], b: &[u32]) -> usize {
    let mut i = 0;
    let mut j = 0;
    let mut count = 0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Mean local clustering coefficient over all nodes:
/// `C_i = 2 T_i / (k_i (k_i - 1))`, with `C_i = 0` for nodes of degree < 2
/// (which stay in the mean).
pub fn average_clustering(graph: &UndirectedGraph) -> Result<f64> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::invalid(
            "clustering undefined on an empty graph".to_string(),
        ));
    }
    let triangles = triangles_per_node(graph);
    let mut sum = 0.0;
    for u in 0..n {
        let k = graph.degree(u as u32);
        if k >= 2 {
            sum += 2.0 * triangles[u] as f64 / (k as f64 * (k as f64 - 1.0));
        }
    }
    Ok(sum / n as f64)
}

/// Expected clustering coefficient of the Erdős–Rényi graph matched in size
/// and density: the edge density `2 E / (n (n - 1))`.
pub fn er_baseline_cc(n_nodes: usize, n_edges: usize) -> Result<f64> {
    if n_nodes < 2 {
        return Err(Error::invalid(format!(
            "ER baseline needs at least 2 nodes, got {n_nodes}"
        )));
    }
    Ok(2.0 * n_edges as f64 / (n_nodes as f64 * (n_nodes as f64 - 1.0)))
}

/// Small-world test: the clustering coefficient must exceed the ER baseline
/// by at least `ratio_threshold`, and be positive.
pub fn classify_small_world(cc: f64, er_cc: f64, ratio_threshold: f64) -> Result<bool> {
    if !(ratio_threshold > 1.0) {
        return Err(Error::invalid(format!(
            "ratio threshold must exceed 1, got {ratio_threshold}"
        )));
    }
    Ok(cc > 0.0 && cc >= ratio_threshold * er_cc)
}

/// Degree assortativity: the Pearson correlation of endpoint degrees over
/// all edges counted in both orientations (Newman's r).
pub fn degree_assortativity(graph: &UndirectedGraph) -> Result<f64> {
    if graph.edge_count() == 0 {
        return Err(Error::invalid(
            "assortativity needs at least one edge".to_string(),
        ));
    }
    let degrees = graph.degree_sequence();
    let m = (2 * graph.edge_count()) as f64;
    let mut sum_x = 0.0;
    let mut sum_x2 = 0.0;
    let mut sum_xy = 0.0;
    for (u, v) in graph.edges() {
        let ku = degrees[u as usize] as f64;
        let kv = degrees[v as usize] as f64;
        // Both orientations: (ku, kv) and (kv, ku); marginals coincide.
        sum_x += ku + kv;
        sum_x2 += ku * ku + kv * kv;
        sum_xy += 2.0 * ku * kv;
    }
    let mean = sum_x / m;
    let variance = sum_x2 / m - mean * mean;
    if variance <= 0.0 {
        return Err(Error::AssortativityUndefined);
    }
    Ok((sum_xy / m - mean * mean) / variance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeClass {
    ScaleFree,
    TwoRegime,
}

impl std::fmt::Display for DegreeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DegreeClass::ScaleFree => write!(f, "scale-free"),
            DegreeClass::TwoRegime => write!(f, "two-regime"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssortativityClass {
    Assortative,
    Disassortative,
    Neutral,
}

impl std::fmt::Display for AssortativityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AssortativityClass::Assortative => write!(f, "assortative"),
            AssortativityClass::Disassortative => write!(f, "disassortative"),
            AssortativityClass::Neutral => write!(f, "neutral"),
        }
    }
}

/// Sign classification with a configurable neutral band around zero.
pub fn classify_assortativity(dac: f64, neutral_band: f64) -> Result<AssortativityClass> {
    if !(neutral_band > 0.0) {
        return Err(Error::invalid(format!(
            "neutral band must be positive, got {neutral_band}"
        )));
    }
    Ok(if dac.abs() < neutral_band {
        AssortativityClass::Neutral
    } else if dac > 0.0 {
        AssortativityClass::Assortative
    } else {
        AssortativityClass::Disassortative
    })
}

/// How degree-distribution points are prepared before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binning {
    /// Fit the raw `(k, p)` points.
    None,
    /// Width-normalized logarithmic binning (see [`log_binned_points`]).
    Log { bins_per_decade: u32 },
}

/// Thresholds and fitting options for [`structure_report`].
#[derive(Debug, Clone)]
pub struct NetstatsConfig {
    /// `cc >= ratio_threshold * er_cc` counts as small-world.
    pub ratio_threshold: f64,
    /// `|dac| < neutral_band` counts as neutral.
    pub neutral_band: f64,
    pub binning: Binning,
}

impl Default for NetstatsConfig {
    fn default() -> Self {
        NetstatsConfig {
            ratio_threshold: 10.0,
            neutral_band: 0.05,
            binning: Binning::Log { bins_per_decade: 5 },
        }
    }
}

/// Degree fits plus the model choice, on points prepared per the config.
pub fn classify_degree_distribution(
    dist: &DegreeDistribution,
    config: &NetstatsConfig,
) -> Result<(PowerLawFit, TwoRegimeFit, DegreeClass)> {
    let points = match config.binning {
        Binning::None => unbinned_points(dist),
        Binning::Log { bins_per_decade } => log_binned_points(dist, bins_per_decade),
    };
    let power = fit_power_law_points(&points)?;
    let two = fit_two_regime_points(&points)?;
    let class = if power_law_preferred(&power, &two) {
        DegreeClass::ScaleFree
    } else {
        DegreeClass::TwoRegime
    };
    Ok((power, two, class))
}

/// All three diagnostics for one graph. Components that cannot be computed
/// (too few fit points, zero degree variance) leave their fields unset
/// instead of failing the report.
#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub nodes: usize,
    pub edges: usize,
    pub isolated_nodes: usize,
    pub degree_class: Option<DegreeClass>,
    pub power_law: Option<PowerLawFit>,
    pub two_regime: Option<TwoRegimeFit>,
    pub degree_fit_error: Option<String>,
    pub cc: f64,
    pub er_cc: Option<f64>,
    pub small_world: Option<bool>,
    pub dac: Option<f64>,
    pub assortativity_class: Option<AssortativityClass>,
}

pub fn structure_report(
    graph: &UndirectedGraph,
    config: &NetstatsConfig,
) -> Result<StructureReport> {
    let nodes = graph.node_count();
    if nodes == 0 {
        return Err(Error::invalid(
            "cannot report on an empty graph".to_string(),
        ));
    }
    let edges = graph.edge_count();
    let cc = average_clustering(graph)?;

    let (isolated, degree_class, power_law, two_regime, degree_fit_error) =
        match degree_distribution(graph) {
            Ok(dist) => match classify_degree_distribution(&dist, config) {
                Ok((power, two, class)) => (
                    dist.isolated_nodes(),
                    Some(class),
                    Some(power),
                    Some(two),
                    None,
                ),
                Err(e) => (dist.isolated_nodes(), None, None, None, Some(e.to_string())),
            },
            Err(e) => (nodes, None, None, None, Some(e.to_string())),
        };

    let er_cc = er_baseline_cc(nodes, edges).ok();
    let small_world = er_cc
        .map(|er| classify_small_world(cc, er, config.ratio_threshold))
        .transpose()?;

    let dac = degree_assortativity(graph).ok();
    let assortativity_class = dac
        .map(|d| classify_assortativity(d, config.neutral_band))
        .transpose()?;

    Ok(StructureReport {
        nodes,
        edges,
        isolated_nodes: isolated,
        degree_class,
        power_law,
        two_regime,
        degree_fit_error,
        cc,
        er_cc,
        small_world,
        dac,
        assortativity_class,
    })
}

impl StructureReport {
    /// JSON document with numeric fields at full precision; fields that could
    /// not be computed appear as the string `"undefined"`.
    pub fn to_json(&self) -> Value {
        fn or_undefined<T: Serialize>(v: &Option<T>) -> Value {
            match v {
                Some(x) => serde_json::to_value(x).expect("serializable"),
                None => Value::String("undefined".to_string()),
            }
        }
        json!({
            "nodes": self.nodes,
            "edges": self.edges,
            "isolated_nodes": self.isolated_nodes,
            "degree_class": or_undefined(&self.degree_class),
            "power_law": or_undefined(&self.power_law),
            "two_regime": or_undefined(&self.two_regime),
            "degree_fit_error": or_undefined(&self.degree_fit_error),
            "cc": self.cc,
            "er_cc": or_undefined(&self.er_cc),
            "small_world": or_undefined(&self.small_world),
            "dac": or_undefined(&self.dac),
            "assortativity_class": or_undefined(&self.assortativity_class),
        })
    }
}

/// CSV rows `k,p,power_fit,two_regime_fit` over the observed degrees, for
/// external log-log plotting. Fit columns are `undefined` when the report
/// carries no fit.
pub fn plot_csv(dist: &DegreeDistribution, report: &StructureReport) -> String {
    let mut out = String::from("k,p,power_fit,two_regime_fit\n");
    for &(k, p) in dist.points() {
        let kf = k as f64;
        let power = report
            .power_law
            .as_ref()
            .map(|f| format!("{:e}", f.predict_ln(kf).exp()))
            .unwrap_or_else(|| "undefined".to_string());
        let two = report
            .two_regime
            .as_ref()
            .map(|f| format!("{:e}", f.predict_ln(kf).exp()))
            .unwrap_or_else(|| "undefined".to_string());
        out.push_str(&format!("{k},{p:e},{power},{two}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::UndirectedGraph;

    fn graph(n: usize, edges: &[(u32, u32)]) -> UndirectedGraph {
        let words = (0..n).map(|i| i.to_string()).collect();
        UndirectedGraph::from_edges(words, edges).unwrap()
    }

    fn triangle() -> UndirectedGraph {
        graph(3, &[(0, 1), (0, 2), (1, 2)])
    }

    #[test]
    fn degree_distribution_examples() {
        let d = degree_distribution(&triangle()).unwrap();
        assert_eq!(d.points(), &[(2, 1.0)]);

        let star = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        let d = degree_distribution(&star).unwrap();
        assert_eq!(d.points(), &[(1, 0.75), (3, 0.25)]);

        let path = graph(3, &[(0, 1), (1, 2)]);
        let d = degree_distribution(&path).unwrap();
        assert_eq!(d.points().len(), 2);
        assert!((d.points()[0].1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((d.points()[1].1 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degree_distribution_requires_an_edge() {
        let isolated = graph(3, &[]);
        assert!(degree_distribution(&isolated).is_err());
    }

    #[test]
    fn distribution_probabilities_sum_to_one() {
        let g = crate::generate::barabasi_albert(500, 3, 7).unwrap();
        let d = degree_distribution(&g).unwrap();
        let sum: f64 = d.points().iter().map(|&(_, p)| p).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn clustering_examples() {
        assert!((average_clustering(&triangle()).unwrap() - 1.0).abs() < 1e-12);
        let path = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(average_clustering(&path).unwrap(), 0.0);
        // Square with one diagonal: (2/3 + 1 + 2/3 + 1) / 4 = 5/6.
        let square = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        assert!((average_clustering(&square).unwrap() - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn er_baseline_values() {
        let p = er_baseline_cc(24_035, 208_759).unwrap();
        assert!((p - 7.227781584437649e-4).abs() < 1e-15);
        assert!((er_baseline_cc(4, 6).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(er_baseline_cc(10, 0).unwrap(), 0.0);
        assert!(er_baseline_cc(1, 0).is_err());
    }

    #[test]
    fn er_baseline_matches_density_of_a_real_graph() {
        let g = crate::generate::erdos_renyi(200, 0.05, 3);
        let density = er_baseline_cc(g.node_count(), g.edge_count()).unwrap();
        let expected =
            2.0 * g.edge_count() as f64 / (g.node_count() as f64 * (g.node_count() as f64 - 1.0));
        assert_eq!(density, expected);
    }

    #[test]
    fn small_world_classification() {
        assert!(classify_small_world(0.60, 7.227781584437649e-4, 10.0).unwrap());
        assert!(!classify_small_world(0.0, 0.5, 10.0).unwrap());
        assert!(!classify_small_world(0.05, 0.04, 10.0).unwrap());
        assert!(classify_small_world(0.1, 0.04, 1.0).is_err());
    }

    #[test]
    fn assortativity_star_is_minus_one() {
        let star = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        assert!((degree_assortativity(&star).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn assortativity_undefined_on_regular_graphs() {
        let cycle = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        assert!(matches!(
            degree_assortativity(&cycle),
            Err(Error::AssortativityUndefined)
        ));
    }

    #[test]
    fn assortativity_bridged_triangles() {
        let g = graph(6, &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]);
        let r = degree_assortativity(&g).unwrap();
        assert!((r + 1.0 / 6.0).abs() < 1e-12, "r = {r}");
    }

    #[test]
    fn assortativity_class_bands() {
        assert_eq!(
            classify_assortativity(-0.04, 0.05).unwrap(),
            AssortativityClass::Neutral
        );
        assert_eq!(
            classify_assortativity(-0.27, 0.05).unwrap(),
            AssortativityClass::Disassortative
        );
        assert_eq!(
            classify_assortativity(0.3, 0.05).unwrap(),
            AssortativityClass::Assortative
        );
        assert!(classify_assortativity(0.0, 0.0).is_err());
    }

    #[test]
    fn report_degrades_gracefully_on_triangle() {
        let report = structure_report(&triangle(), &NetstatsConfig::default()).unwrap();
        assert!((report.cc - 1.0).abs() < 1e-12);
        assert!(report.dac.is_none());
        assert!(report.degree_class.is_none());
        assert!(report.degree_fit_error.is_some());
        let json = report.to_json();
        assert_eq!(json["dac"], "undefined");
        assert_eq!(json["cc"], 1.0);
    }

    #[test]
    fn report_on_single_node_graph() {
        let g = graph(1, &[]);
        let report = structure_report(&g, &NetstatsConfig::default()).unwrap();
        assert_eq!(report.cc, 0.0);
        assert!(report.er_cc.is_none());
        assert!(report.small_world.is_none());
        assert!(report.dac.is_none());
        assert_eq!(report.isolated_nodes, 1);
        assert_eq!(report.to_json()["er_cc"], "undefined");
    }

    #[test]
    fn clustering_invariant_under_relabeling() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let g = crate::generate::erdos_renyi(60, 0.1, 11);
        let cc = average_clustering(&g).unwrap();
        let mut perm: Vec<u32> = (0..60).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(4));
        let edges: Vec<(u32, u32)> = g
            .edges()
            .map(|(u, v)| (perm[u as usize], perm[v as usize]))
            .collect();
        let words = (0..60).map(|i| format!("p{i}")).collect();
        let relabeled = UndirectedGraph::from_edges(words, &edges).unwrap();
        assert!((average_clustering(&relabeled).unwrap() - cc).abs() < 1e-12);
    }
}
