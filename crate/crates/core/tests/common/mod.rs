//! Reference oracle and random graph generators shared by the integration
//! tests. Nothing here calls into the library: graphs are dense weight
//! matrices and every index is computed by literal enumeration.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

/// Dense bipartite graph; `w[d][p] == 0.0` means no edge.
#[derive(Debug, Clone)]
pub struct OracleGraph {
    pub drugs: Vec<String>,
    pub proteins: Vec<String>,
    pub w: Vec<Vec<f64>>,
}

impl OracleGraph {
    /// Interns IDs in first-appearance order and sums duplicate weights
    /// (or records presence only when `weighted` is false).
    pub fn from_rows(rows: &[(String, String, f64)], weighted: bool) -> Self {
        let mut drugs: Vec<String> = Vec::new();
        let mut proteins: Vec<String> = Vec::new();
        let mut cells: Vec<(usize, usize, f64)> = Vec::new();
        for (d, p, w) in rows {
            let di = match drugs.iter().position(|x| x == d) {
                Some(i) => i,
                None => {
                    drugs.push(d.clone());
                    drugs.len() - 1
                }
            };
            let pi = match proteins.iter().position(|x| x == p) {
                Some(i) => i,
                None => {
                    proteins.push(p.clone());
                    proteins.len() - 1
                }
            };
            cells.push((di, pi, if weighted { *w } else { 1.0 }));
        }
        let mut w = vec![vec![0.0; proteins.len()]; drugs.len()];
        for (d, p, x) in cells {
            if weighted {
                w[d][p] += x;
            } else {
                w[d][p] = 1.0;
            }
        }
        Self { drugs, proteins, w }
    }

    pub fn nd(&self) -> usize {
        self.drugs.len()
    }

    pub fn np(&self) -> usize {
        self.proteins.len()
    }

    pub fn edge(&self, d: usize, p: usize) -> bool {
        self.w[d][p] > 0.0
    }

    pub fn n_edges(&self) -> usize {
        self.w.iter().flatten().filter(|&&x| x > 0.0).count()
    }

    pub fn drug(&self, id: &str) -> usize {
        self.drugs.iter().position(|x| x == id).unwrap()
    }

    pub fn protein(&self, id: &str) -> usize {
        self.proteins.iter().position(|x| x == id).unwrap()
    }

    /// Same graph keeping only the listed (drug, protein) cells.
    pub fn restrict(&self, keep: &HashSet<(usize, usize)>) -> Self {
        let mut g = self.clone();
        for d in 0..g.nd() {
            for p in 0..g.np() {
                if !keep.contains(&(d, p)) {
                    g.w[d][p] = 0.0;
                }
            }
        }
        g
    }

    fn gamma_drug(&self, d: usize) -> BTreeSet<usize> {
        (0..self.np()).filter(|&p| self.edge(d, p)).collect()
    }

    /// Proteins two hops away from `p` (including `p` when it has an edge).
    fn gamma_hat_protein(&self, p: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for d in 0..self.nd() {
            if self.edge(d, p) {
                for q in 0..self.np() {
                    if self.edge(d, q) {
                        out.insert(q);
                    }
                }
            }
        }
        out
    }
}

pub fn oracle_cn_set(g: &OracleGraph, d: usize, p: usize) -> f64 {
    g.gamma_drug(d).intersection(&g.gamma_hat_protein(p)).count() as f64
}

/// Sum over every path d - q - d2 - p of 1 (unweighted) or of its three
/// edge weights (weighted).
pub fn oracle_cn_path(g: &OracleGraph, d: usize, p: usize, weighted: bool) -> f64 {
    let mut total = 0.0;
    for q in 0..g.np() {
        for d2 in 0..g.nd() {
            if g.edge(d, q) && g.edge(d2, q) && g.edge(d2, p) {
                total += if weighted {
                    g.w[d][q] + g.w[d2][q] + g.w[d2][p]
                } else {
                    1.0
                };
            }
        }
    }
    total
}

pub fn oracle_jaccard(g: &OracleGraph, d: usize, p: usize, weighted: bool) -> f64 {
    let a = g.gamma_drug(d);
    let b = g.gamma_hat_protein(p);
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    let num = if weighted {
        oracle_cn_path(g, d, p, true)
    } else {
        a.intersection(&b).count() as f64
    };
    num / union as f64
}

pub fn oracle_pa(g: &OracleGraph, d: usize, p: usize, weighted: bool) -> f64 {
    let (mut kd, mut kp) = (0.0, 0.0);
    for q in 0..g.np() {
        if g.edge(d, q) {
            kd += if weighted { g.w[d][q] } else { 1.0 };
        }
    }
    for e in 0..g.nd() {
        if g.edge(e, p) {
            kp += if weighted { g.w[e][p] } else { 1.0 };
        }
    }
    kd * kp
}

/// Dense unified adjacency, drugs first.
pub fn oracle_unified(g: &OracleGraph, weighted: bool) -> Vec<Vec<f64>> {
    let n = g.nd() + g.np();
    let mut a = vec![vec![0.0; n]; n];
    for d in 0..g.nd() {
        for p in 0..g.np() {
            if g.edge(d, p) {
                let x = if weighted { g.w[d][p] } else { 1.0 };
                a[d][g.nd() + p] = x;
                a[g.nd() + p][d] = x;
            }
        }
    }
    a
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            if a[i][k] != 0.0 {
                for j in 0..m {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    c
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
pub fn oracle_max_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::NEG_INFINITY, f64::max)
}

/// Spectral radius of the unified adjacency, as sqrt of the top eigenvalue
/// of the drug-side Gram matrix W Wᵀ.
pub fn oracle_lambda_max(g: &OracleGraph, weighted: bool) -> f64 {
    let w: Vec<Vec<f64>> = g
        .w
        .iter()
        .map(|row| row.iter().map(|&x| if weighted { x } else { (x > 0.0) as u8 as f64 }).collect())
        .collect();
    let wt: Vec<Vec<f64>> = (0..g.np()).map(|p| (0..g.nd()).map(|d| w[d][p]).collect()).collect();
    if g.nd() == 0 || g.np() == 0 {
        return 0.0;
    }
    oracle_max_eigenvalue(&matmul(&w, &wt)).max(0.0).sqrt()
}

/// Σ_{k=1..terms} βᵏAᵏ restricted to the drug × protein block.
pub fn oracle_katz(g: &OracleGraph, beta: f64, terms: usize, weighted: bool) -> Vec<Vec<f64>> {
    let a = oracle_unified(g, weighted);
    let n = a.len();
    let mut power = a.clone();
    let mut coef = beta;
    let mut sum = vec![vec![0.0; n]; n];
    for k in 1..=terms {
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += coef * power[i][j];
            }
        }
        if k < terms {
            power = matmul(&power, &a);
            coef *= beta;
        }
    }
    (0..g.nd())
        .map(|d| (0..g.np()).map(|p| sum[d][g.nd() + p]).collect())
        .collect()
}

/// Upper bound on the entries of the omitted tail Σ_{k>terms} βᵏAᵏ.
pub fn katz_tail_bound(beta: f64, lambda: f64, terms: usize) -> f64 {
    let r = beta * lambda;
    r.powi(terms as i32 + 1) / (1.0 - r)
}

/// (n, precision, recall) for n = 1..=min(max_n, len), by recounting the
/// hits in each prefix.
pub fn oracle_pr<T: Eq + std::hash::Hash + Clone>(
    ranked: &[T],
    validation: &[T],
    max_n: usize,
) -> Vec<(usize, f64, f64)> {
    let truth: HashSet<T> = validation.iter().cloned().collect();
    let len = ranked.len().min(max_n);
    (1..=len)
        .map(|n| {
            let hits = ranked[..n].iter().filter(|x| truth.contains(x)).count();
            (n, hits as f64 / n as f64, hits as f64 / truth.len() as f64)
        })
        .collect()
}

/// All-pairs shortest path lengths on the unified graph (Floyd–Warshall),
/// drug × protein block; `None` when unreachable.
pub fn oracle_distances(g: &OracleGraph) -> Vec<Vec<Option<usize>>> {
    let n = g.nd() + g.np();
    let inf = usize::MAX / 4;
    let mut dist = vec![vec![inf; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0;
    }
    for d in 0..g.nd() {
        for p in 0..g.np() {
            if g.edge(d, p) {
                dist[d][g.nd() + p] = 1;
                dist[g.nd() + p][d] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    (0..g.nd())
        .map(|d| {
            (0..g.np())
                .map(|p| {
                    let x = dist[d][g.nd() + p];
                    (x < inf).then_some(x)
                })
                .collect()
        })
        .collect()
}

/// Oracle ranking: score descending, then drug ID, then protein ID.
pub fn oracle_rank(entries: &mut [(String, String, f64)]) {
    entries.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap()
            .then_with(|| a.0.cmp(&b.0))
            .then_with(|| a.1.cmp(&b.1))
    });
}

/// Trapezoid over points sorted by recall, equal recalls averaged.
pub fn oracle_trapezoid(points: &[(f64, f64)]) -> f64 {
    let mut by_recall: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (r, p) in sorted {
        match by_recall.last_mut() {
            Some((lr, ps)) if *lr == r => ps.push(p),
            _ => by_recall.push((r, vec![p])),
        }
    }
    let merged: Vec<(f64, f64)> = by_recall
        .into_iter()
        .map(|(r, ps)| (r, ps.iter().sum::<f64>() / ps.len() as f64))
        .collect();
    merged
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Random interaction rows on up to `max_d` × `max_p` nodes. IDs are
/// `d<i>`/`p<j>`; rows are shuffled and a few are repeated so interning
/// order and duplicate merging are exercised. Every node has an edge.
pub fn random_rows<R: Rng>(
    rng: &mut R,
    max_d: usize,
    max_p: usize,
    weighted: bool,
) -> Vec<(String, String, f64)> {
    let nd = rng.gen_range(1..=max_d);
    let np = rng.gen_range(1..=max_p);
    let density: f64 = rng.gen_range(0.05..0.8);
    let weight = |rng: &mut R| {
        if weighted {
            rng.gen_range(0.1..5.0)
        } else {
            1.0
        }
    };
    let mut cells: HashMap<(usize, usize), ()> = HashMap::new();
    for d in 0..nd {
        for p in 0..np {
            if rng.gen_bool(density) {
                cells.insert((d, p), ());
            }
        }
    }
    for d in 0..nd {
        if !(0..np).any(|p| cells.contains_key(&(d, p))) {
            cells.insert((d, rng.gen_range(0..np)), ());
        }
    }
    for p in 0..np {
        if !(0..nd).any(|d| cells.contains_key(&(d, p))) {
            cells.insert((rng.gen_range(0..nd), p), ());
        }
    }
    let mut keys: Vec<_> = cells.into_keys().collect();
    keys.sort_unstable();
    let mut rows: Vec<(String, String, f64)> = keys
        .iter()
        .map(|&(d, p)| (format!("d{d}"), format!("p{p}"), weight(rng)))
        .collect();
    let dups = rng.gen_range(0..=rows.len() / 5);
    for _ in 0..dups {
        let (d, p, _) = rows[rng.gen_range(0..rows.len())].clone();
        rows.push((d, p, weight(rng)));
    }
    rows.shuffle(rng);
    rows
}

/// Synthetic drug-target network with latent communities: each drug draws
/// most of its targets from its own protein community (favouring the first
/// members), plus a few hubs and uniform noise.
pub fn community_rows<R: Rng>(
    rng: &mut R,
    n_drugs: usize,
    n_proteins: usize,
    communities: usize,
    mean_degree: f64,
) -> Vec<(String, String, f64)> {
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    let hubs: Vec<usize> = (0..n_proteins.div_ceil(20)).collect();
    for d in 0..n_drugs {
        let c = d % communities;
        let members: Vec<usize> = (0..n_proteins).filter(|p| p % communities == c).collect();
        let k = 1 + (rng.gen::<f64>() * 2.0 * (mean_degree - 1.0)).round() as usize;
        for _ in 0..k {
            let p = match rng.gen_range(0..10) {
                0 => hubs[rng.gen_range(0..hubs.len())],
                1 => rng.gen_range(0..n_proteins),
                _ => members[(members.len() as f64 * rng.gen::<f64>().powi(2)) as usize],
            };
            if seen.insert((d, p)) {
                let score = rng.gen_range(300..1000) as f64;
                rows.push((format!("CID{d:05}"), format!("PRT{p:04}"), score));
            }
        }
    }
    rows
}

pub fn rows_to_csv(rows: &[(String, String, f64)]) -> String {
    let mut s = String::from("drug,protein,weight\n");
    for (d, p, w) in rows {
        s.push_str(&format!("{d},{p},{w}\n"));
    }
    s
}

pub fn to_interactions(rows: &[(String, String, f64)]) -> Vec<dtilink::Interaction> {
    rows.iter()
        .map(|(d, p, w)| dtilink::Interaction::new(d.as_str(), p.as_str(), *w))
        .collect()
}
