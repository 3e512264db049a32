//! Katz index restricted to drug × protein pairs.
//!
//! With `A = [[0, B], [Bᵀ, 0]]`, odd powers of `A` carry the off-diagonal
//! blocks and even powers the diagonal ones, so the drug × protein block of
//! `(I − βA)⁻¹ − I = Σ βᵏAᵏ` is
//!
//! ```text
//! Σₘ β²ᵐ⁺¹ (BBᵀ)ᵐ B  =  β (I − β²BBᵀ)⁻¹ B  =  β B (I − β²BᵀB)⁻¹
//! ```
//!
//! The direct method solves the symmetric positive-definite system on the
//! smaller side; the series method accumulates the odd terms.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{candidates_of_row, IndexConfig, IndexKind, KatzMethod, ScoreTable, KATZ_DIRECT_MAX_NODES};
use crate::error::{Error, Result};
use crate::graph::{spectral_radius, BipartiteGraph, UnifiedAdjacency};

/// Fraction of `1 / λ_max` above which β is rejected.
pub const BETA_MARGIN: f64 = 0.95;
const SPECTRAL_TOL: f64 = 1e-10;
// The power-iteration estimate approaches λ_max from below; inflate it so
// that β at the bound is still rejected.
const SPECTRAL_SLACK: f64 = 1e-8;

/// Dense drug × protein block of the Katz similarity matrix.
#[derive(Debug, Clone)]
pub struct KatzBlock {
    pub n_drugs: usize,
    pub n_proteins: usize,
    /// Row-major, `n_drugs × n_proteins`.
    pub values: Vec<f64>,
    pub method: KatzMethod,
    /// Highest power of `A` included (series only).
    pub terms: Option<usize>,
    pub lambda_max: f64,
}

impl KatzBlock {
    pub fn get(&self, drug: usize, protein: usize) -> f64 {
        self.values[drug * self.n_proteins + protein]
    }
}

/// Computes the Katz block, checking β against the spectral radius of `A`.
pub fn katz_block(
    graph: &BipartiteGraph,
    beta: f64,
    method: KatzMethod,
    series_tol: f64,
    series_max_terms: usize,
    use_weights: bool,
) -> Result<KatzBlock> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    let adjacency = UnifiedAdjacency::from_graph(graph, use_weights);
    let lambda_max = spectral_radius(&adjacency, SPECTRAL_TOL)?;
    if lambda_max > 0.0 && beta * lambda_max * (1.0 + SPECTRAL_SLACK) >= BETA_MARGIN {
        return Err(Error::BetaTooLarge {
            beta,
            max_beta: BETA_MARGIN / lambda_max,
        });
    }
    let method = match method {
        KatzMethod::Auto if graph.n_drugs() + graph.n_proteins() <= KATZ_DIRECT_MAX_NODES => {
            KatzMethod::DirectSolve
        }
        KatzMethod::Auto => KatzMethod::TruncatedSeries,
        m => m,
    };
    let (values, terms) = match method {
        KatzMethod::DirectSolve => (direct(graph, beta, use_weights)?, None),
        _ => {
            let (v, k) = series(graph, beta, series_tol, series_max_terms, use_weights);
            (v, Some(k))
        }
    };
    Ok(KatzBlock {
        n_drugs: graph.n_drugs(),
        n_proteins: graph.n_proteins(),
        values,
        method,
        terms,
        lambda_max,
    })
}

/// Katz scores for every non-observed pair under `config`.
pub fn katz_scores(graph: &BipartiteGraph, config: &IndexConfig) -> Result<ScoreTable> {
    config.validate()?;
    if config.kind != IndexKind::Katz {
        return Err(Error::InvalidConfig(format!(
            "katz_scores called with {} config",
            config.kind
        )));
    }
    let beta = config.beta.expect("validated");
    let block = katz_block(
        graph,
        beta,
        config.katz_method,
        config.series_tol,
        config.series_max_terms,
        config.weighted,
    )?;
    let np = graph.n_proteins();
    let rows = (0..graph.n_drugs())
        .into_par_iter()
        .map(|d| candidates_of_row(graph, d, &block.values[d * np..(d + 1) * np]))
        .collect();
    Ok(ScoreTable::from_rows(graph, config.clone(), rows))
}

fn edge_weight(w: f64, use_weights: bool) -> f64 {
    if use_weights {
        w
    } else {
        1.0
    }
}

fn direct(graph: &BipartiteGraph, beta: f64, use_weights: bool) -> Result<Vec<f64>> {
    let nd = graph.n_drugs();
    let np = graph.n_proteins();
    let beta2 = beta * beta;
    let mut out = vec![0.0; nd * np];

    if np <= nd {
        // S = β B (I − β²BᵀB)⁻¹, computed as Sᵀ = β M⁻¹ Bᵀ
        let mut m = DMatrix::<f64>::identity(np, np);
        for d in 0..nd {
            let ps = graph.drug_neighbors(d);
            let ws = graph.drug_weights(d);
            for (a, (&p, &wp)) in ps.iter().zip(ws).enumerate() {
                let wp = edge_weight(wp, use_weights);
                for (&q, &wq) in ps[a..].iter().zip(&ws[a..]) {
                    let v = beta2 * wp * edge_weight(wq, use_weights);
                    m[(p, q)] -= v;
                    if p != q {
                        m[(q, p)] -= v;
                    }
                }
            }
        }
        let mut bt = DMatrix::<f64>::zeros(np, nd);
        for d in 0..nd {
            for (&p, &w) in graph.drug_neighbors(d).iter().zip(graph.drug_weights(d)) {
                bt[(p, d)] = beta * edge_weight(w, use_weights);
            }
        }
        let chol = m
            .cholesky()
            .ok_or_else(|| Error::SolveFailed("I − β²BᵀB is not positive definite".into()))?;
        let st = chol.solve(&bt);
        for d in 0..nd {
            for p in 0..np {
                out[d * np + p] = st[(p, d)].max(0.0);
            }
        }
    } else {
        // S = β (I − β²BBᵀ)⁻¹ B
        let mut m = DMatrix::<f64>::identity(nd, nd);
        for p in 0..np {
            let ds = graph.protein_neighbors(p);
            let ws = graph.protein_weights(p);
            for (a, (&d, &wd)) in ds.iter().zip(ws).enumerate() {
                let wd = edge_weight(wd, use_weights);
                for (&e, &we) in ds[a..].iter().zip(&ws[a..]) {
                    let v = beta2 * wd * edge_weight(we, use_weights);
                    m[(d, e)] -= v;
                    if d != e {
                        m[(e, d)] -= v;
                    }
                }
            }
        }
        let mut b = DMatrix::<f64>::zeros(nd, np);
        for d in 0..nd {
            for (&p, &w) in graph.drug_neighbors(d).iter().zip(graph.drug_weights(d)) {
                b[(d, p)] = beta * edge_weight(w, use_weights);
            }
        }
        let chol = m
            .cholesky()
            .ok_or_else(|| Error::SolveFailed("I − β²BBᵀ is not positive definite".into()))?;
        let s = chol.solve(&b);
        for d in 0..nd {
            for p in 0..np {
                out[d * np + p] = s[(d, p)].max(0.0);
            }
        }
    }
    Ok(out)
}

/// Accumulates `Σ β²ᵐ⁺¹ (BBᵀ)ᵐ B` until the newest term's max-norm drops
/// below `tol` or the power of `A` would exceed `max_terms`.
///
/// Returns the block and the highest power included.
fn series(
    graph: &BipartiteGraph,
    beta: f64,
    tol: f64,
    max_terms: usize,
    use_weights: bool,
) -> (Vec<f64>, usize) {
    let nd = graph.n_drugs();
    let np = graph.n_proteins();
    let beta2 = beta * beta;

    let mut term = vec![0.0; nd * np];
    for d in 0..nd {
        for (&p, &w) in graph.drug_neighbors(d).iter().zip(graph.drug_weights(d)) {
            term[d * np + p] = beta * edge_weight(w, use_weights);
        }
    }
    let mut sum = term.clone();
    let mut power = 1;
    let mut inner = vec![0.0; np * np];

    while max_norm(&term) >= tol && power + 2 <= max_terms {
        // inner = Bᵀ · term   (np × np)
        inner.par_chunks_mut(np).enumerate().for_each(|(q, row)| {
            row.iter_mut().for_each(|x| *x = 0.0);
            for (&d, &w) in graph
                .protein_neighbors(q)
                .iter()
                .zip(graph.protein_weights(q))
            {
                let w = edge_weight(w, use_weights);
                for (x, t) in row.iter_mut().zip(&term[d * np..(d + 1) * np]) {
                    *x += w * t;
                }
            }
        });
        // term = β² B · inner   (nd × np)
        term.par_chunks_mut(np).enumerate().for_each(|(d, row)| {
            row.iter_mut().for_each(|x| *x = 0.0);
            for (&q, &w) in graph.drug_neighbors(d).iter().zip(graph.drug_weights(d)) {
                let w = beta2 * edge_weight(w, use_weights);
                for (x, t) in row.iter_mut().zip(&inner[q * np..(q + 1) * np]) {
                    *x += w * t;
                }
            }
        });
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
        power += 2;
    }
    (sum, power)
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
