//! Ordering candidate pairs by score.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::indices::ScoreTable;

/// How candidates with equal scores are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// By external drug ID, then external protein ID.
    #[default]
    Lexicographic,
    /// By a per-candidate random key drawn from the given seed.
    SeededShuffle,
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TiePolicy::Lexicographic => "lexicographic",
            TiePolicy::SeededShuffle => "shuffle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub drug: usize,
    pub protein: usize,
    pub score: f64,
}

/// Candidates in descending score order; rank `i + 1` is `entries[i]`.
#[derive(Debug, Clone)]
pub struct RankedPredictions {
    pub entries: Vec<Prediction>,
    pub tie_policy: TiePolicy,
    pub seed: u64,
    drug_ids: Arc<[String]>,
    protein_ids: Arc<[String]>,
}

impl RankedPredictions {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn drug_id(&self, drug: usize) -> &str {
        &self.drug_ids[drug]
    }

    pub fn protein_id(&self, protein: usize) -> &str {
        &self.protein_ids[protein]
    }

    /// `(rank, drug id, protein id, score)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (usize, &str, &str, f64)> + '_ {
        self.entries.iter().enumerate().map(|(i, e)| {
            (
                i + 1,
                self.drug_id(e.drug),
                self.protein_id(e.protein),
                e.score,
            )
        })
    }

    /// Drops zero-score entries from the tail.
    pub fn positive_only(mut self) -> Self {
        let cut = self.entries.partition_point(|e| e.score > 0.0);
        self.entries.truncate(cut);
        self
    }
}

/// Position of each ID in lexicographic order.
fn lexical_ranks(ids: &[String]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    let mut ranks = vec![0u32; ids.len()];
    for (r, i) in order.into_iter().enumerate() {
        ranks[i] = r as u32;
    }
    ranks
}

/// Sorts the table by descending score with the given tie policy, keeping
/// the first `top_n` entries (all when `None`).
pub fn rank(
    scores: &ScoreTable,
    tie_policy: TiePolicy,
    seed: u64,
    top_n: Option<usize>,
) -> Result<RankedPredictions> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let drug_lex = lexical_ranks(scores.drug_ids());
    let protein_lex = lexical_ranks(scores.protein_ids());
    let shuffle_keys: Vec<u64> = match tie_policy {
        TiePolicy::Lexicographic => Vec::new(),
        TiePolicy::SeededShuffle => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..scores.len()).map(|_| rng.gen()).collect()
        }
    };

    // Total order: score desc, then shuffle key (if any), then lexical IDs.
    let cmp = |&a: &u32, &b: &u32| -> Ordering {
        let (a, b) = (a as usize, b as usize);
        scores
            .score(b)
            .total_cmp(&scores.score(a))
            .then_with(|| match tie_policy {
                TiePolicy::SeededShuffle => shuffle_keys[a].cmp(&shuffle_keys[b]),
                TiePolicy::Lexicographic => Ordering::Equal,
            })
            .then_with(|| drug_lex[scores.drug(a)].cmp(&drug_lex[scores.drug(b)]))
            .then_with(|| protein_lex[scores.protein(a)].cmp(&protein_lex[scores.protein(b)]))
    };

    let mut order: Vec<u32> = (0..scores.len() as u32).collect();
    let keep = top_n.unwrap_or(order.len()).min(order.len());
    if keep < order.len() && keep > 0 {
        order.select_nth_unstable_by(keep - 1, cmp);
        order.truncate(keep);
    }
    order.truncate(keep);
    order.sort_unstable_by(cmp);

    Ok(RankedPredictions {
        entries: order
            .into_iter()
            .map(|i| {
                let i = i as usize;
                Prediction {
                    drug: scores.drug(i),
                    protein: scores.protein(i),
                    score: scores.score(i),
                }
            })
            .collect(),
        tie_policy,
        seed,
        drug_ids: Arc::clone(scores.drug_ids()),
        protein_ids: Arc::clone(scores.protein_ids()),
    })
}

/// Number of candidates the index actually predicts (score > 0).
pub fn count_positive_predictions(scores: &ScoreTable) -> usize {
    scores.scores().iter().filter(|&&s| s > 0.0).count()
}
