//! Bipartite drug–protein network.
//!
//! The biadjacency matrix `B` (drugs × proteins) is kept in compressed sparse
//! row form, together with its transpose so that protein-side neighbourhoods
//! are as cheap to read as drug-side ones. Dense indices are assigned to
//! external identifiers in first-appearance order.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// One raw drug–protein record as read from a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub drug: String,
    pub protein: String,
    pub weight: f64,
}

impl Interaction {
    pub fn new(drug: impl Into<String>, protein: impl Into<String>, weight: f64) -> Self {
        Self {
            drug: drug.into(),
            protein: protein.into(),
            weight,
        }
    }
}

/// How repeated (drug, protein) records are merged in weighted mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DedupRule {
    #[default]
    Sum,
    Max,
    First,
}

impl DedupRule {
    fn merge(self, current: f64, incoming: f64) -> f64 {
        match self {
            DedupRule::Sum => current + incoming,
            DedupRule::Max => current.max(incoming),
            DedupRule::First => current,
        }
    }
}

impl fmt::Display for DedupRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DedupRule::Sum => "sum",
            DedupRule::Max => "max",
            DedupRule::First => "first",
        })
    }
}

/// A node on either side of the network, addressed by dense index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Drug(usize),
    Protein(usize),
}

/// A stored edge of the biadjacency matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub drug: usize,
    pub protein: usize,
    pub weight: f64,
}

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from triplets that are already sorted by (row, col) without duplicates.
    fn from_sorted_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut row_ptr = vec![0usize; n_rows + 1];
        for &(r, _, _) in triplets {
            row_ptr[r + 1] += 1;
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx: triplets.iter().map(|t| t.1).collect(),
            values: triplets.iter().map(|t| t.2).collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_indices(&self, row: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[row]..self.row_ptr[row + 1]]
    }

    pub fn row_values(&self, row: usize) -> &[f64] {
        &self.values[self.row_ptr[row]..self.row_ptr[row + 1]]
    }

    /// Entry lookup; zero when absent.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let cols = self.row_indices(row);
        match cols.binary_search(&col) {
            Ok(pos) => self.row_values(row)[pos],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            for (&c, &v) in self.row_indices(r).iter().zip(self.row_values(r)) {
                triplets.push((c, r, v));
            }
        }
        triplets.sort_by_key(|t| (t.0, t.1));
        CsrMatrix::from_sorted_triplets(self.n_cols, self.n_rows, &triplets)
    }

    /// `out = self * x`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(out.len(), self.n_rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o = self
                .row_indices(r)
                .iter()
                .zip(self.row_values(r))
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.n_rows * self.n_cols];
        for r in 0..self.n_rows {
            for (&c, &v) in self.row_indices(r).iter().zip(self.row_values(r)) {
                dense[r * self.n_cols + c] = v;
            }
        }
        dense
    }
}

/// Immutable weighted bipartite network over interned drug and protein IDs.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    drug_ids: Arc<[String]>,
    protein_ids: Arc<[String]>,
    drug_lookup: Arc<HashMap<String, usize>>,
    protein_lookup: Arc<HashMap<String, usize>>,
    /// `B`, rows are drugs.
    biadjacency: CsrMatrix,
    /// `Bᵀ`, rows are proteins.
    transposed: CsrMatrix,
    weighted: bool,
}

/// Builds a graph from raw interactions.
///
/// Indices follow first appearance. With `weighted` off every stored weight is
/// 1.0 and duplicates only record presence; otherwise duplicates are merged
/// with `dedup`.
pub fn build_graph(
    interactions: &[Interaction],
    weighted: bool,
    dedup: DedupRule,
) -> Result<BipartiteGraph> {
    if interactions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut drug_ids = Vec::new();
    let mut protein_ids = Vec::new();
    let mut drug_lookup = HashMap::new();
    let mut protein_lookup = HashMap::new();
    let mut merged: HashMap<(usize, usize), f64> = HashMap::with_capacity(interactions.len());

    for (row, it) in interactions.iter().enumerate() {
        if !(it.weight.is_finite() && it.weight > 0.0) {
            return Err(Error::InvalidWeight {
                row: row + 1,
                weight: it.weight,
            });
        }
        let d = intern(&mut drug_lookup, &mut drug_ids, &it.drug);
        let p = intern(&mut protein_lookup, &mut protein_ids, &it.protein);
        let w = if weighted { it.weight } else { 1.0 };
        merged
            .entry((d, p))
            .and_modify(|cur| {
                if weighted {
                    *cur = dedup.merge(*cur, w);
                }
            })
            .or_insert(w);
    }

    let mut edges: Vec<Edge> = merged
        .into_iter()
        .map(|((drug, protein), weight)| Edge {
            drug,
            protein,
            weight,
        })
        .collect();
    edges.sort_by_key(|e| (e.drug, e.protein));

    Ok(BipartiteGraph::assemble(
        drug_ids.into(),
        protein_ids.into(),
        Arc::new(drug_lookup),
        Arc::new(protein_lookup),
        &edges,
        weighted,
    ))
}

fn intern(lookup: &mut HashMap<String, usize>, ids: &mut Vec<String>, id: &str) -> usize {
    if let Some(&i) = lookup.get(id) {
        return i;
    }
    let i = ids.len();
    ids.push(id.to_owned());
    lookup.insert(id.to_owned(), i);
    i
}

impl BipartiteGraph {
    fn assemble(
        drug_ids: Arc<[String]>,
        protein_ids: Arc<[String]>,
        drug_lookup: Arc<HashMap<String, usize>>,
        protein_lookup: Arc<HashMap<String, usize>>,
        sorted_edges: &[Edge],
        weighted: bool,
    ) -> Self {
        let triplets: Vec<_> = sorted_edges
            .iter()
            .map(|e| (e.drug, e.protein, e.weight))
            .collect();
        let biadjacency =
            CsrMatrix::from_sorted_triplets(drug_ids.len(), protein_ids.len(), &triplets);
        let transposed = biadjacency.transpose();
        Self {
            drug_ids,
            protein_ids,
            drug_lookup,
            protein_lookup,
            biadjacency,
            transposed,
            weighted,
        }
    }

    /// A graph over the same node universe containing only `edges`.
    ///
    /// Used to build training graphs: nodes that lose all their edges stay in
    /// the index space as isolated nodes.
    pub fn subgraph(&self, edges: &[Edge]) -> Result<BipartiteGraph> {
        let mut sorted = edges.to_vec();
        for e in &sorted {
            self.check_drug(e.drug)?;
            self.check_protein(e.protein)?;
        }
        sorted.sort_by_key(|e| (e.drug, e.protein));
        sorted.dedup_by_key(|e| (e.drug, e.protein));
        Ok(Self::assemble(
            Arc::clone(&self.drug_ids),
            Arc::clone(&self.protein_ids),
            Arc::clone(&self.drug_lookup),
            Arc::clone(&self.protein_lookup),
            &sorted,
            self.weighted,
        ))
    }

    pub fn n_drugs(&self) -> usize {
        self.drug_ids.len()
    }

    pub fn n_proteins(&self) -> usize {
        self.protein_ids.len()
    }

    pub fn n_edges(&self) -> usize {
        self.biadjacency.nnz()
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn drug_ids(&self) -> &Arc<[String]> {
        &self.drug_ids
    }

    pub fn protein_ids(&self) -> &Arc<[String]> {
        &self.protein_ids
    }

    pub fn drug_index(&self, id: &str) -> Option<usize> {
        self.drug_lookup.get(id).copied()
    }

    pub fn protein_index(&self, id: &str) -> Option<usize> {
        self.protein_lookup.get(id).copied()
    }

    pub fn biadjacency(&self) -> &CsrMatrix {
        &self.biadjacency
    }

    /// Edge weight, zero for non-edges.
    pub fn weight(&self, drug: usize, protein: usize) -> f64 {
        self.biadjacency.get(drug, protein)
    }

    pub fn has_edge(&self, drug: usize, protein: usize) -> bool {
        self.weight(drug, protein) > 0.0
    }

    /// All edges in (drug, protein) row-major order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.n_edges());
        for d in 0..self.n_drugs() {
            for (&p, &w) in self.drug_neighbors(d).iter().zip(self.drug_weights(d)) {
                out.push(Edge {
                    drug: d,
                    protein: p,
                    weight: w,
                });
            }
        }
        out
    }

    pub(crate) fn check_drug(&self, drug: usize) -> Result<()> {
        if drug >= self.n_drugs() {
            return Err(Error::InvalidNode {
                side: "drugs",
                index: drug,
                count: self.n_drugs(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_protein(&self, protein: usize) -> Result<()> {
        if protein >= self.n_proteins() {
            return Err(Error::InvalidNode {
                side: "proteins",
                index: protein,
                count: self.n_proteins(),
            });
        }
        Ok(())
    }

    fn check(&self, node: Node) -> Result<()> {
        match node {
            Node::Drug(d) => self.check_drug(d),
            Node::Protein(p) => self.check_protein(p),
        }
    }

    /// Proteins adjacent to `drug`, ascending. Unchecked index.
    pub fn drug_neighbors(&self, drug: usize) -> &[usize] {
        self.biadjacency.row_indices(drug)
    }

    pub fn drug_weights(&self, drug: usize) -> &[f64] {
        self.biadjacency.row_values(drug)
    }

    /// Drugs adjacent to `protein`, ascending. Unchecked index.
    pub fn protein_neighbors(&self, protein: usize) -> &[usize] {
        self.transposed.row_indices(protein)
    }

    pub fn protein_weights(&self, protein: usize) -> &[f64] {
        self.transposed.row_values(protein)
    }

    /// Γ(x): opposite-side neighbours, sorted ascending.
    pub fn neighbors(&self, node: Node) -> Result<&[usize]> {
        self.check(node)?;
        Ok(match node {
            Node::Drug(d) => self.drug_neighbors(d),
            Node::Protein(p) => self.protein_neighbors(p),
        })
    }

    /// Γ̂(x): union of the neighbour sets of every neighbour of `node`.
    ///
    /// The result lies on the same side as `node`, and contains `node` itself
    /// whenever it has at least one neighbour.
    pub fn second_neighborhood(&self, node: Node) -> Result<Vec<usize>> {
        self.check(node)?;
        let (first, same_side_count): (&[usize], usize) = match node {
            Node::Drug(d) => (self.drug_neighbors(d), self.n_drugs()),
            Node::Protein(p) => (self.protein_neighbors(p), self.n_proteins()),
        };
        let mut seen = vec![false; same_side_count];
        for &c in first {
            let hop = match node {
                Node::Drug(_) => self.protein_neighbors(c),
                Node::Protein(_) => self.drug_neighbors(c),
            };
            for &x in hop {
                seen[x] = true;
            }
        }
        Ok(seen
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect())
    }

    pub fn degree(&self, node: Node) -> Result<usize> {
        Ok(self.neighbors(node)?.len())
    }

    pub fn weighted_degree(&self, node: Node) -> Result<f64> {
        self.check(node)?;
        Ok(match node {
            Node::Drug(d) => self.drug_weights(d).iter().sum(),
            Node::Protein(p) => self.protein_weights(p).iter().sum(),
        })
    }

    /// Stable content hash of the node universe size and stored edges.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n_drugs() as u64).to_le_bytes());
        hasher.update((self.n_proteins() as u64).to_le_bytes());
        for e in self.edges() {
            hasher.update((e.drug as u64).to_le_bytes());
            hasher.update((e.protein as u64).to_le_bytes());
            hasher.update(e.weight.to_bits().to_le_bytes());
        }
        hasher.finalize()[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Square symmetric adjacency `[[0, B], [Bᵀ, 0]]` over drugs then proteins.
#[derive(Debug, Clone)]
pub struct UnifiedAdjacency {
    n_drugs: usize,
    n_proteins: usize,
    matrix: CsrMatrix,
}

/// Unified adjacency carrying the graph's stored weights.
pub fn to_unified_adjacency(graph: &BipartiteGraph) -> UnifiedAdjacency {
    UnifiedAdjacency::from_graph(graph, true)
}

impl UnifiedAdjacency {
    /// With `use_weights` off every edge contributes 1.0.
    pub fn from_graph(graph: &BipartiteGraph, use_weights: bool) -> Self {
        let nd = graph.n_drugs();
        let np = graph.n_proteins();
        let mut triplets = Vec::with_capacity(2 * graph.n_edges());
        for d in 0..nd {
            for (&p, &w) in graph.drug_neighbors(d).iter().zip(graph.drug_weights(d)) {
                triplets.push((d, nd + p, if use_weights { w } else { 1.0 }));
            }
        }
        for p in 0..np {
            for (&d, &w) in graph
                .protein_neighbors(p)
                .iter()
                .zip(graph.protein_weights(p))
            {
                triplets.push((nd + p, d, if use_weights { w } else { 1.0 }));
            }
        }
        Self {
            n_drugs: nd,
            n_proteins: np,
            matrix: CsrMatrix::from_sorted_triplets(nd + np, nd + np, &triplets),
        }
    }

    pub fn dimension(&self) -> usize {
        self.n_drugs + self.n_proteins
    }

    pub fn n_drugs(&self) -> usize {
        self.n_drugs
    }

    pub fn n_proteins(&self) -> usize {
        self.n_proteins
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix.get(row, col)
    }

    /// Row-major dense copy of `A`.
    pub fn to_dense(&self) -> Vec<f64> {
        self.matrix.to_dense()
    }

    /// The drug × protein block, which equals `B`.
    pub fn biadjacency_block(&self) -> CsrMatrix {
        let mut triplets = Vec::new();
        for d in 0..self.n_drugs {
            for (&c, &v) in self
                .matrix
                .row_indices(d)
                .iter()
                .zip(self.matrix.row_values(d))
            {
                if c >= self.n_drugs {
                    triplets.push((d, c - self.n_drugs, v));
                }
            }
        }
        CsrMatrix::from_sorted_triplets(self.n_drugs, self.n_proteins, &triplets)
    }
}

const SPECTRAL_MAX_ITERATIONS: usize = 10_000;

/// Largest eigenvalue of the symmetric non-negative matrix `A`, to relative
/// tolerance `tol`.
///
/// `A` of a bipartite graph has a spectrum symmetric about zero, so plain power
/// iteration on `A` oscillates between ±λ. Iterating `A²` instead (which is
/// positive semi-definite with top eigenvalue λ²) converges monotonically; the
/// Rayleigh quotient `xᵀA²x = ‖Ax‖²` gives the estimate.
pub fn spectral_radius(adjacency: &UnifiedAdjacency, tol: f64) -> Result<f64> {
    let n = adjacency.dimension();
    if n == 0 || adjacency.matrix.nnz() == 0 {
        return Ok(0.0);
    }
    let a = &adjacency.matrix;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut estimate = 0.0f64;
    for iteration in 1..=SPECTRAL_MAX_ITERATIONS {
        a.mul_vec(&x, &mut y);
        a.mul_vec(&y, &mut z);
        let lambda = norm(&y);
        let z_norm = norm(&z);
        if z_norm == 0.0 {
            return Ok(lambda);
        }
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi = zi / z_norm;
        }
        if iteration > 1 && (lambda - estimate).abs() <= tol * lambda {
            return Ok(lambda);
        }
        estimate = lambda;
    }
    Err(Error::SpectralEstimateFailed {
        estimate,
        iterations: SPECTRAL_MAX_ITERATIONS,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
