//! Topology-only similarity indices adapted to bipartite graphs.
//!
//! Every index scores a (drug, protein) candidate pair. Because drugs only
//! neighbour proteins, the neighbourhood-based indices look one hop further
//! than on unipartite graphs: a drug is compared with the second
//! neighbourhood Γ̂ of the protein, which is equivalent to counting
//! length-3 paths `drug → z1 → z2 → protein`.

mod katz;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Node};

pub use katz::{katz_block, katz_scores, KatzBlock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexKind {
    CommonNeighbours,
    Jaccard,
    PreferentialAttachment,
    Katz,
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexKind::CommonNeighbours => "cn",
            IndexKind::Jaccard => "jaccard",
            IndexKind::PreferentialAttachment => "pa",
            IndexKind::Katz => "katz",
        })
    }
}

/// Which of the two common-neighbour formulations to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CnVariant {
    /// `|Γ(drug) ∩ Γ̂(protein)|`; ignores weights.
    SetCardinality,
    /// Sum over length-3 paths; each path counts 1 (unweighted) or the sum
    /// of its three edge weights (weighted).
    #[default]
    PathCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum KatzMethod {
    /// Direct solve up to [`KATZ_DIRECT_MAX_NODES`] nodes, series above.
    #[default]
    Auto,
    DirectSolve,
    TruncatedSeries,
}

pub const KATZ_DIRECT_MAX_NODES: usize = 5000;
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;
pub const DEFAULT_SERIES_MAX_TERMS: usize = 50;

/// Which index to compute and how.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexConfig {
    pub kind: IndexKind,
    pub cn_variant: CnVariant,
    pub weighted: bool,
    pub beta: Option<f64>,
    pub katz_method: KatzMethod,
    pub series_tol: f64,
    pub series_max_terms: usize,
}

impl IndexConfig {
    fn base(kind: IndexKind) -> Self {
        Self {
            kind,
            cn_variant: CnVariant::PathCount,
            weighted: false,
            beta: None,
            katz_method: KatzMethod::Auto,
            series_tol: DEFAULT_SERIES_TOL,
            series_max_terms: DEFAULT_SERIES_MAX_TERMS,
        }
    }

    pub fn common_neighbours() -> Self {
        Self::base(IndexKind::CommonNeighbours)
    }

    pub fn jaccard() -> Self {
        Self::base(IndexKind::Jaccard)
    }

    pub fn preferential_attachment() -> Self {
        Self::base(IndexKind::PreferentialAttachment)
    }

    pub fn katz(beta: f64) -> Self {
        Self {
            beta: Some(beta),
            ..Self::base(IndexKind::Katz)
        }
    }

    pub fn with_weighted(mut self, weighted: bool) -> Self {
        self.weighted = weighted;
        self
    }

    pub fn with_cn_variant(mut self, variant: CnVariant) -> Self {
        self.cn_variant = variant;
        self
    }

    pub fn with_katz_method(mut self, method: KatzMethod) -> Self {
        self.katz_method = method;
        self
    }

    pub fn with_series(mut self, tol: f64, max_terms: usize) -> Self {
        self.series_tol = tol;
        self.series_max_terms = max_terms;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.beta) {
            (IndexKind::Katz, None) => {
                return Err(Error::InvalidConfig("katz requires a beta value".into()))
            }
            (IndexKind::Katz, Some(b)) if !(b.is_finite() && b > 0.0) => {
                return Err(Error::InvalidConfig(format!(
                    "beta must be positive and finite, got {b}"
                )))
            }
            (IndexKind::Katz, Some(_)) => {}
            (kind, Some(_)) => {
                return Err(Error::InvalidConfig(format!(
                    "beta only applies to katz, not {kind}"
                )))
            }
            (_, None) => {}
        }
        if !(self.series_tol.is_finite() && self.series_tol > 0.0) {
            return Err(Error::InvalidConfig("series tolerance must be positive".into()));
        }
        if self.series_max_terms < 3 {
            return Err(Error::InvalidConfig(
                "series must include at least 3 terms".into(),
            ));
        }
        Ok(())
    }

    /// Short human-readable name, also used for output file names.
    pub fn label(&self) -> String {
        let mut s = match self.kind {
            IndexKind::CommonNeighbours => match self.cn_variant {
                CnVariant::PathCount => "CN".to_string(),
                CnVariant::SetCardinality => "CN-set".to_string(),
            },
            IndexKind::Jaccard => "Jaccard".to_string(),
            IndexKind::PreferentialAttachment => "PA".to_string(),
            IndexKind::Katz => format!("Katz(beta={})", self.beta.unwrap_or(f64::NAN)),
        };
        if self.weighted {
            s.push_str("-weighted");
        }
        s
    }
}

/// Scores for every non-observed (drug, protein) pair of one training graph.
///
/// Candidates are stored in row-major (drug, protein) order.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    config: IndexConfig,
    fingerprint: String,
    drug_ids: Arc<[String]>,
    protein_ids: Arc<[String]>,
    drugs: Vec<u32>,
    proteins: Vec<u32>,
    scores: Vec<f64>,
}

impl ScoreTable {
    /// Assembles a table from per-drug rows of `(protein, score)` already
    /// restricted to candidates.
    pub(crate) fn from_rows(
        graph: &BipartiteGraph,
        config: IndexConfig,
        rows: Vec<Vec<(u32, f64)>>,
    ) -> Self {
        let total: usize = rows.iter().map(Vec::len).sum();
        let mut drugs = Vec::with_capacity(total);
        let mut proteins = Vec::with_capacity(total);
        let mut scores = Vec::with_capacity(total);
        for (d, row) in rows.into_iter().enumerate() {
            for (p, s) in row {
                drugs.push(d as u32);
                proteins.push(p);
                scores.push(s);
            }
        }
        Self {
            config,
            fingerprint: graph.fingerprint(),
            drug_ids: Arc::clone(graph.drug_ids()),
            protein_ids: Arc::clone(graph.protein_ids()),
            drugs,
            proteins,
            scores,
        }
    }

    /// Builds a table directly from `(drug, protein, score)` triples.
    ///
    /// Intended for tests and external score sources; entries are sorted into
    /// row-major order and must not repeat a pair.
    pub fn from_entries(
        graph: &BipartiteGraph,
        config: IndexConfig,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        entries.sort_by_key(|e| (e.0, e.1));
        for w in entries.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate candidate ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        for &(d, p, s) in &entries {
            graph.check_drug(d)?;
            graph.check_protein(p)?;
            if graph.has_edge(d, p) {
                return Err(Error::ObservedPair { drug: d, protein: p });
            }
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidConfig(format!("invalid score {s}")));
            }
        }
        let mut rows = vec![Vec::new(); graph.n_drugs()];
        for (d, p, s) in entries {
            rows[d].push((p as u32, s));
        }
        Ok(Self::from_rows(graph, config, rows))
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn drug_ids(&self) -> &Arc<[String]> {
        &self.drug_ids
    }

    pub fn protein_ids(&self) -> &Arc<[String]> {
        &self.protein_ids
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn drug(&self, i: usize) -> usize {
        self.drugs[i] as usize
    }

    pub fn protein(&self, i: usize) -> usize {
        self.proteins[i] as usize
    }

    pub fn score(&self, i: usize) -> f64 {
        self.scores[i]
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// `(drug, protein, score)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.len()).map(move |i| (self.drug(i), self.protein(i), self.score(i)))
    }

    /// Score of a candidate pair; `None` for observed or out-of-range pairs.
    pub fn get(&self, drug: usize, protein: usize) -> Option<f64> {
        let key = (drug as u32, protein as u32);
        let mut lo = 0;
        let mut hi = self.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match (self.drugs[mid], self.proteins[mid]).cmp(&key) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(self.scores[mid]),
            }
        }
        None
    }
}

fn check_pair(graph: &BipartiteGraph, drug: usize, protein: usize) -> Result<()> {
    graph.check_drug(drug)?;
    graph.check_protein(protein)?;
    if graph.has_edge(drug, protein) {
        return Err(Error::ObservedPair { drug, protein });
    }
    Ok(())
}

/// Intersection size of two ascending index lists.
fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Weighted length-3 path sum between `drug` and `protein`.
///
/// Additions happen in (z1, z2) ascending order with each path's weights
/// grouped as `(w1 + w2) + w3`; `score_all` reproduces this order exactly.
fn path_sum(graph: &BipartiteGraph, drug: usize, protein: usize) -> f64 {
    let target_drugs = graph.protein_neighbors(protein);
    let target_weights = graph.protein_weights(protein);
    let mut total = 0.0;
    for (&z1, &w1) in graph
        .drug_neighbors(drug)
        .iter()
        .zip(graph.drug_weights(drug))
    {
        let mid_drugs = graph.protein_neighbors(z1);
        let mid_weights = graph.protein_weights(z1);
        let (mut i, mut j) = (0, 0);
        while i < mid_drugs.len() && j < target_drugs.len() {
            match mid_drugs[i].cmp(&target_drugs[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    total += (w1 + mid_weights[i]) + target_weights[j];
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    total
}

fn path_count(graph: &BipartiteGraph, drug: usize, protein: usize) -> u64 {
    let targets = graph.protein_neighbors(protein);
    graph
        .drug_neighbors(drug)
        .iter()
        .map(|&z1| sorted_intersection_len(graph.protein_neighbors(z1), targets) as u64)
        .sum()
}

fn set_counts(graph: &BipartiteGraph, drug: usize, protein: usize) -> (usize, usize) {
    let first = graph.drug_neighbors(drug);
    let hat = graph
        .second_neighborhood(Node::Protein(protein))
        .expect("protein index checked");
    let inter = sorted_intersection_len(first, &hat);
    (inter, first.len() + hat.len() - inter)
}

/// Common-neighbours score of a non-observed pair.
pub fn cn_score(
    graph: &BipartiteGraph,
    drug: usize,
    protein: usize,
    variant: CnVariant,
    weighted: bool,
) -> Result<f64> {
    check_pair(graph, drug, protein)?;
    Ok(match (variant, weighted) {
        (CnVariant::SetCardinality, _) => set_counts(graph, drug, protein).0 as f64,
        (CnVariant::PathCount, false) => path_count(graph, drug, protein) as f64,
        (CnVariant::PathCount, true) => path_sum(graph, drug, protein),
    })
}

/// Jaccard score of a non-observed pair.
///
/// Unweighted: `|Γ(d) ∩ Γ̂(p)| / |Γ(d) ∪ Γ̂(p)|`. Weighted: the weighted
/// path sum divided by the (unweighted) size of that union. An empty union
/// scores 0.
pub fn jaccard_score(
    graph: &BipartiteGraph,
    drug: usize,
    protein: usize,
    weighted: bool,
) -> Result<f64> {
    check_pair(graph, drug, protein)?;
    let (inter, union) = set_counts(graph, drug, protein);
    if union == 0 {
        return Ok(0.0);
    }
    let numerator = if weighted {
        path_sum(graph, drug, protein)
    } else {
        inter as f64
    };
    Ok(numerator / union as f64)
}

/// Preferential attachment: product of (weighted) degrees.
pub fn pa_score(graph: &BipartiteGraph, drug: usize, protein: usize, weighted: bool) -> Result<f64> {
    let d = Node::Drug(drug);
    let p = Node::Protein(protein);
    if weighted {
        Ok(graph.weighted_degree(d)? * graph.weighted_degree(p)?)
    } else {
        Ok((graph.degree(d)? * graph.degree(p)?) as f64)
    }
}

/// Scores every non-observed pair of `graph` under `config`.
///
/// Rows are computed in parallel on the current rayon pool and assembled in
/// drug order, so the result does not depend on the worker count.
pub fn score_all(graph: &BipartiteGraph, config: &IndexConfig) -> Result<ScoreTable> {
    config.validate()?;
    if config.kind == IndexKind::Katz {
        return katz_scores(graph, config);
    }
    let np = graph.n_proteins();
    let hat_sizes: Vec<usize> = if config.kind == IndexKind::Jaccard {
        (0..np)
            .into_par_iter()
            .map(|p| {
                graph
                    .second_neighborhood(Node::Protein(p))
                    .expect("in range")
                    .len()
            })
            .collect()
    } else {
        Vec::new()
    };
    let protein_wdeg: Vec<f64> = (0..np)
        .map(|p| graph.protein_weights(p).iter().sum())
        .collect();

    let rows: Vec<Vec<(u32, f64)>> = (0..graph.n_drugs())
        .into_par_iter()
        .map(|d| {
            let raw = match config.kind {
                IndexKind::CommonNeighbours => match (config.cn_variant, config.weighted) {
                    (CnVariant::SetCardinality, _) => row_set_counts(graph, d)
                        .into_iter()
                        .map(|c| c as f64)
                        .collect(),
                    (CnVariant::PathCount, false) => row_path_counts(graph, d)
                        .into_iter()
                        .map(|c| c as f64)
                        .collect(),
                    (CnVariant::PathCount, true) => row_path_sums(graph, d),
                },
                IndexKind::Jaccard => {
                    let inter = row_set_counts(graph, d);
                    let deg = graph.drug_neighbors(d).len();
                    let sums = config.weighted.then(|| row_path_sums(graph, d));
                    (0..np)
                        .map(|p| {
                            let union = deg + hat_sizes[p] - inter[p];
                            if union == 0 {
                                0.0
                            } else {
                                let num = match &sums {
                                    Some(s) => s[p],
                                    None => inter[p] as f64,
                                };
                                num / union as f64
                            }
                        })
                        .collect()
                }
                IndexKind::PreferentialAttachment => {
                    if config.weighted {
                        let wd: f64 = graph.drug_weights(d).iter().sum();
                        protein_wdeg.iter().map(|&wp| wd * wp).collect()
                    } else {
                        let kd = graph.drug_neighbors(d).len();
                        (0..np)
                            .map(|p| (kd * graph.protein_neighbors(p).len()) as f64)
                            .collect()
                    }
                }
                IndexKind::Katz => unreachable!("handled above"),
            };
            candidates_of_row(graph, d, &raw)
        })
        .collect();
    Ok(ScoreTable::from_rows(graph, config.clone(), rows))
}

/// Keeps the entries of a dense score row whose protein is not a neighbour.
pub(crate) fn candidates_of_row(graph: &BipartiteGraph, drug: usize, row: &[f64]) -> Vec<(u32, f64)> {
    let observed = graph.drug_neighbors(drug);
    let mut next = 0;
    let mut out = Vec::with_capacity(row.len() - observed.len());
    for (p, &s) in row.iter().enumerate() {
        if next < observed.len() && observed[next] == p {
            next += 1;
            continue;
        }
        out.push((p as u32, s));
    }
    out
}

fn row_path_counts(graph: &BipartiteGraph, drug: usize) -> Vec<u64> {
    let mut acc = vec![0u64; graph.n_proteins()];
    for &z1 in graph.drug_neighbors(drug) {
        for &z2 in graph.protein_neighbors(z1) {
            if z2 == drug {
                continue;
            }
            for &p in graph.drug_neighbors(z2) {
                acc[p] += 1;
            }
        }
    }
    acc
}

fn row_path_sums(graph: &BipartiteGraph, drug: usize) -> Vec<f64> {
    let mut acc = vec![0.0; graph.n_proteins()];
    for (&z1, &w1) in graph
        .drug_neighbors(drug)
        .iter()
        .zip(graph.drug_weights(drug))
    {
        for (&z2, &w2) in graph
            .protein_neighbors(z1)
            .iter()
            .zip(graph.protein_weights(z1))
        {
            if z2 == drug {
                continue;
            }
            for (&p, &w3) in graph.drug_neighbors(z2).iter().zip(graph.drug_weights(z2)) {
                acc[p] += (w1 + w2) + w3;
            }
        }
    }
    acc
}

/// `|Γ(drug) ∩ Γ̂(p)|` for every protein `p`.
fn row_set_counts(graph: &BipartiteGraph, drug: usize) -> Vec<usize> {
    let np = graph.n_proteins();
    let mut counts = vec![0usize; np];
    // stamp[p] == z1 + 1 once p has been credited for z1
    let mut stamp = vec![0usize; np];
    for &z1 in graph.drug_neighbors(drug) {
        for &z2 in graph.protein_neighbors(z1) {
            if z2 == drug {
                continue;
            }
            for &p in graph.drug_neighbors(z2) {
                if stamp[p] != z1 + 1 {
                    stamp[p] = z1 + 1;
                    counts[p] += 1;
                }
            }
        }
    }
    counts
}
