//! Cross-validated precision–recall evaluation.
//!
//! Interactions are split into `k` seeded folds. Each fold in turn is held
//! out as validation data; an index is applied to the remaining edges, the
//! non-observed pairs are ranked, and precision/recall are recorded for the
//! top `n` predictions for every `n` up to `max_n`. Fold curves are averaged
//! point-by-point at equal `n` and summarised by the area under the curve.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Edge};
use crate::indices::{score_all, IndexConfig};
use crate::ranking::{count_positive_predictions, rank, RankedPredictions, TiePolicy};

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_MAX_N: usize = 10_000;

/// Seed stream used for the fold split.
pub const FOLD_SEED_STREAM: u64 = 0;

/// Derives an independent sub-seed from a master seed (SplitMix64 of
/// `master + golden_gamma * (stream + 1)`).
///
/// Stream 0 seeds the fold split; stream `1 + f` seeds tie shuffling in fold `f`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn tie_seed(master: u64, fold: usize) -> u64 {
    derive_seed(master, 1 + fold as u64)
}

/// Assignment of each interaction (by position) to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    pub fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }

    /// Positions of the interactions in `fold`, ascending.
    pub fn members(&self, fold: usize) -> Vec<usize> {
        self.fold_of
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| (f == fold).then_some(i))
            .collect()
    }
}

/// Shuffles positions with `seed` and deals them round-robin into `k` folds,
/// so fold sizes differ by at most one.
pub fn split_folds<T>(items: &[T], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidFoldCount(k));
    }
    if k > items.len() {
        return Err(Error::TooManyFolds {
            k,
            interactions: items.len(),
        });
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0; items.len()];
    for (pos, idx) in order.into_iter().enumerate() {
        fold_of[idx] = pos % k;
    }
    Ok(FoldAssignment { k, seed, fold_of })
}

/// Training graph and validation pairs for one fold of `graph`'s edges.
pub fn fold_split(
    graph: &BipartiteGraph,
    edges: &[Edge],
    folds: &FoldAssignment,
    fold: usize,
) -> Result<(BipartiteGraph, Vec<(usize, usize)>)> {
    let train: Vec<Edge> = edges
        .iter()
        .zip(&folds.fold_of)
        .filter(|(_, &f)| f != fold)
        .map(|(e, _)| *e)
        .collect();
    let validation = edges
        .iter()
        .zip(&folds.fold_of)
        .filter(|(_, &f)| f == fold)
        .map(|(e, _)| (e.drug, e.protein))
        .collect();
    Ok((graph.subgraph(&train)?, validation))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub n: usize,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    SingleFold { validation_size: usize },
    FoldAveraged { folds: usize },
    External,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub max_n: usize,
    pub provenance: Provenance,
}

impl PrCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Precision and recall of the top `n` entries of `ranked` for
/// `n = 1..=min(max_n, ranked.len())`.
pub fn pr_curve(
    ranked: &RankedPredictions,
    validation: &[(usize, usize)],
    max_n: usize,
) -> Result<PrCurve> {
    let truth: HashSet<(usize, usize)> = validation.iter().copied().collect();
    if truth.is_empty() {
        return Err(Error::EmptyValidation);
    }
    let total = truth.len() as f64;
    let mut tp = 0usize;
    let points = ranked
        .entries
        .iter()
        .take(max_n)
        .enumerate()
        .map(|(i, e)| {
            if truth.contains(&(e.drug, e.protein)) {
                tp += 1;
            }
            let n = i + 1;
            PrPoint {
                n,
                precision: tp as f64 / n as f64,
                recall: tp as f64 / total,
            }
        })
        .collect();
    Ok(PrCurve {
        points,
        max_n,
        provenance: Provenance::SingleFold {
            validation_size: truth.len(),
        },
    })
}

/// Every validation pair must be a non-edge of `train`.
pub fn check_leakage(train: &BipartiteGraph, validation: &[(usize, usize)]) -> Result<()> {
    for &(d, p) in validation {
        train.check_drug(d)?;
        train.check_protein(p)?;
        if train.has_edge(d, p) {
            return Err(Error::LeakageDetected { drug: d, protein: p });
        }
    }
    Ok(())
}

/// Result of scoring one fold, with the statistics the report needs.
#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub curve: PrCurve,
    pub positive_predictions: usize,
}

/// Scores `train`, ranks the positive-score candidates and measures them
/// against `validation`.
///
/// Only candidates with a positive score count as predictions, so a fold
/// whose index reaches fewer than `max_n` pairs yields a shorter curve.
pub fn evaluate_fold_detailed(
    train: &BipartiteGraph,
    validation: &[(usize, usize)],
    config: &IndexConfig,
    max_n: usize,
    tie_policy: TiePolicy,
    seed: u64,
) -> Result<FoldOutcome> {
    check_leakage(train, validation)?;
    if validation.is_empty() {
        return Err(Error::EmptyValidation);
    }
    let scores = score_all(train, config)?;
    let positives = count_positive_predictions(&scores);
    let curve = if scores.is_empty() || positives == 0 {
        PrCurve {
            points: Vec::new(),
            max_n,
            provenance: Provenance::SingleFold {
                validation_size: validation.iter().collect::<HashSet<_>>().len(),
            },
        }
    } else {
        let ranked = rank(&scores, tie_policy, seed, Some(max_n))?.positive_only();
        pr_curve(&ranked, validation, max_n)?
    };
    Ok(FoldOutcome {
        curve,
        positive_predictions: positives,
    })
}

pub fn evaluate_fold(
    train: &BipartiteGraph,
    validation: &[(usize, usize)],
    config: &IndexConfig,
    max_n: usize,
    tie_policy: TiePolicy,
    seed: u64,
) -> Result<PrCurve> {
    evaluate_fold_detailed(train, validation, config, max_n, tie_policy, seed).map(|o| o.curve)
}

/// Rank-aligned mean of several curves.
///
/// Shorter curves contribute their last point to every later `n` (an empty
/// curve contributes precision 0 and recall 0). Values at each `n` are summed
/// in sorted order, so the result does not depend on the order of `curves`.
pub fn average_curves(curves: &[PrCurve]) -> Result<PrCurve> {
    if curves.is_empty() {
        return Err(Error::NoCurves);
    }
    let len = curves.iter().map(PrCurve::len).max().unwrap_or(0);
    let count = curves.len() as f64;
    let mut precisions = Vec::with_capacity(curves.len());
    let mut recalls = Vec::with_capacity(curves.len());
    let mut points = Vec::with_capacity(len);
    for i in 0..len {
        precisions.clear();
        recalls.clear();
        for c in curves {
            let (p, r) = match c.points.get(i).or_else(|| c.points.last()) {
                Some(pt) => (pt.precision, pt.recall),
                None => (0.0, 0.0),
            };
            precisions.push(p);
            recalls.push(r);
        }
        points.push(PrPoint {
            n: i + 1,
            precision: sorted_sum(&mut precisions) / count,
            recall: sorted_sum(&mut recalls) / count,
        });
    }
    Ok(PrCurve {
        points,
        max_n: curves.iter().map(|c| c.max_n).max().unwrap_or(0),
        provenance: Provenance::FoldAveraged {
            folds: curves.len(),
        },
    })
}

fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

/// Trapezoidal area under precision as a function of recall.
///
/// Points are sorted by recall and points sharing a recall value are merged
/// into their mean precision. A single point has zero area.
pub fn aupr(curve: &PrCurve) -> Result<f64> {
    if curve.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let mut pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.recall, p.precision)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    let mut i = 0;
    while i < pts.len() {
        let r = pts[i].0;
        let mut j = i;
        let mut group = Vec::new();
        while j < pts.len() && pts[j].0 == r {
            group.push(pts[j].1);
            j += 1;
        }
        let n = group.len() as f64;
        merged.push((r, sorted_sum(&mut group) / n));
        i = j;
    }
    if merged.len() == 1 {
        log::warn!("precision-recall curve has a single distinct recall value; area is 0");
        return Ok(0.0);
    }
    Ok(merged
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum())
}

/// Shortest training-graph path length for a validation pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathLength {
    Finite(usize),
    Unreachable,
}

impl fmt::Display for PathLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathLength::Finite(n) => write!(f, "{n}"),
            PathLength::Unreachable => f.write_str("unreachable"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathLengthHistogram {
    pub counts: BTreeMap<PathLength, usize>,
}

impl PathLengthHistogram {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn count(&self, length: PathLength) -> usize {
        self.counts.get(&length).copied().unwrap_or(0)
    }

    pub fn fraction(&self, length: PathLength) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.count(length) as f64 / t as f64,
        }
    }
}

/// Breadth-first distances from `drug` to every protein of `graph`.
pub fn protein_distances(graph: &BipartiteGraph, drug: usize) -> Vec<Option<usize>> {
    let nd = graph.n_drugs();
    let mut dist: Vec<Option<usize>> = vec![None; nd + graph.n_proteins()];
    let mut queue = VecDeque::new();
    dist[drug] = Some(0);
    queue.push_back(drug);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued nodes have a distance");
        let next: Box<dyn Iterator<Item = usize>> = if u < nd {
            Box::new(graph.drug_neighbors(u).iter().map(move |&p| nd + p))
        } else {
            Box::new(graph.protein_neighbors(u - nd).iter().copied())
        };
        for v in next {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist.split_off(nd)
}

/// Histogram of training-graph shortest-path lengths for validation pairs.
pub fn path_length_analysis(
    train: &BipartiteGraph,
    validation: &[(usize, usize)],
) -> Result<PathLengthHistogram> {
    check_leakage(train, validation)?;
    let mut by_drug: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(d, p) in validation {
        by_drug.entry(d).or_default().push(p);
    }
    let mut hist = PathLengthHistogram::default();
    for (d, proteins) in by_drug {
        let dist = protein_distances(train, d);
        for p in proteins {
            let len = dist[p].map_or(PathLength::Unreachable, PathLength::Finite);
            *hist.counts.entry(len).or_default() += 1;
        }
    }
    Ok(hist)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOptions {
    pub k: usize,
    pub seed: u64,
    pub max_n: usize,
    pub tie_policy: TiePolicy,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_FOLDS,
            seed: 42,
            max_n: DEFAULT_MAX_N,
            tie_policy: TiePolicy::Lexicographic,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConfigSummary {
    pub curve: PrCurve,
    pub aupr: f64,
    /// Points in each fold's curve.
    pub fold_lengths: Vec<usize>,
    /// Positive-score candidates in each fold.
    pub positive_predictions: Vec<usize>,
}

impl ConfigSummary {
    pub fn mean_positive_predictions(&self) -> f64 {
        self.positive_predictions.iter().sum::<usize>() as f64
            / self.positive_predictions.len().max(1) as f64
    }
}

#[derive(Debug, Clone)]
pub struct ConfigResult {
    pub label: String,
    pub config: IndexConfig,
    /// Error text when any fold failed for this config.
    pub outcome: std::result::Result<ConfigSummary, String>,
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub name: String,
    pub curve: PrCurve,
    pub aupr: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub n_drugs: usize,
    pub n_proteins: usize,
    pub n_interactions: usize,
    pub options: ExperimentOptions,
    pub fold_sizes: Vec<usize>,
    pub results: Vec<ConfigResult>,
    pub baseline: Option<BaselineResult>,
    /// Wall-clock stage timings; not part of the deterministic report body.
    pub timings: Vec<(String, Duration)>,
}

impl ExperimentReport {
    pub fn result(&self, label: &str) -> Option<&ConfigResult> {
        self.results.iter().find(|r| r.label == label)
    }
}

/// Full cross-validation of every config over the edges of `graph`.
///
/// Folds and configs are evaluated in parallel on the current rayon pool.
/// A config whose evaluation fails in any fold is reported with the error
/// while the remaining configs still complete.
pub fn run_experiment(
    graph: &BipartiteGraph,
    configs: &[IndexConfig],
    options: &ExperimentOptions,
    baseline: Option<(String, PrCurve)>,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut timings = Vec::new();
    for c in configs {
        c.validate()?;
    }

    let edges = graph.edges();
    let folds = split_folds(&edges, options.k, derive_seed(options.seed, FOLD_SEED_STREAM))?;
    let splits: Vec<(BipartiteGraph, Vec<(usize, usize)>)> = (0..options.k)
        .into_par_iter()
        .map(|f| fold_split(graph, &edges, &folds, f))
        .collect::<Result<_>>()?;
    timings.push(("split".to_string(), started.elapsed()));

    let tasks: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..options.k).map(move |f| (c, f)))
        .collect();
    let outcomes: Vec<(Result<FoldOutcome>, Duration)> = tasks
        .par_iter()
        .map(|&(c, f)| {
            let t = Instant::now();
            let (train, validation) = &splits[f];
            let out = evaluate_fold_detailed(
                train,
                validation,
                &configs[c],
                options.max_n,
                options.tie_policy,
                tie_seed(options.seed, f),
            );
            (out, t.elapsed())
        })
        .collect();

    let mut results = Vec::with_capacity(configs.len());
    for (c, config) in configs.iter().enumerate() {
        let label = config.label();
        let slice = &outcomes[c * options.k..(c + 1) * options.k];
        let busy: Duration = slice.iter().map(|(_, d)| *d).sum();
        timings.push((format!("evaluate {label} (summed over folds)"), busy));
        let mut fold_outcomes = Vec::with_capacity(options.k);
        let mut failure = None;
        for (f, (o, _)) in slice.iter().enumerate() {
            match o {
                Ok(o) => fold_outcomes.push(o.clone()),
                Err(e) => {
                    failure = Some(format!("fold {f}: {e}"));
                    break;
                }
            }
        }
        let outcome = match failure {
            Some(msg) => {
                log::warn!("{label} failed: {msg}");
                Err(msg)
            }
            None => summarise(&fold_outcomes).map_err(|e| e.to_string()),
        };
        results.push(ConfigResult {
            label,
            config: config.clone(),
            outcome,
        });
    }

    let baseline = match baseline {
        Some((name, curve)) => {
            let a = aupr(&curve)?;
            Some(BaselineResult {
                name,
                curve,
                aupr: a,
            })
        }
        None => None,
    };
    timings.push(("total".to_string(), started.elapsed()));

    Ok(ExperimentReport {
        n_drugs: graph.n_drugs(),
        n_proteins: graph.n_proteins(),
        n_interactions: graph.n_edges(),
        options: options.clone(),
        fold_sizes: folds.fold_sizes(),
        results,
        baseline,
        timings,
    })
}

fn summarise(folds: &[FoldOutcome]) -> Result<ConfigSummary> {
    let curves: Vec<PrCurve> = folds.iter().map(|f| f.curve.clone()).collect();
    let curve = average_curves(&curves)?;
    let area = if curve.is_empty() { 0.0 } else { aupr(&curve)? };
    Ok(ConfigSummary {
        aupr: area,
        fold_lengths: curves.iter().map(PrCurve::len).collect(),
        positive_predictions: folds.iter().map(|f| f.positive_predictions).collect(),
        curve,
    })
}
