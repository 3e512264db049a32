mod common;

use common::*;
use dtilink::{build_graph, rank, score_all, DedupRule, IndexConfig, TiePolicy};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn table(seed: u64) -> Option<dtilink::ScoreTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = random_rows(&mut rng, 12, 12, false);
    let g = build_graph(&to_interactions(&rows), false, DedupRule::Sum).unwrap();
    let t = score_all(&g, &IndexConfig::common_neighbours()).unwrap();
    (!t.is_empty()).then_some(t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lexicographic_matches_oracle_order(seed in any::<u64>()) {
        let Some(t) = table(seed) else { return Ok(()) };
        let ranked = rank(&t, TiePolicy::Lexicographic, 0, None).unwrap();
        let mut expect: Vec<(String, String, f64)> = t
            .iter()
            .map(|(d, p, s)| (t.drug_ids()[d].clone(), t.protein_ids()[p].clone(), s))
            .collect();
        oracle_rank(&mut expect);
        let got: Vec<(String, String, f64)> = ranked
            .rows()
            .map(|(_, d, p, s)| (d.to_string(), p.to_string(), s))
            .collect();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn top_n_is_a_prefix(seed in any::<u64>(), n in 1usize..50) {
        let Some(t) = table(seed) else { return Ok(()) };
        for policy in [TiePolicy::Lexicographic, TiePolicy::SeededShuffle] {
            let full = rank(&t, policy, 7, None).unwrap();
            let top = rank(&t, policy, 7, Some(n)).unwrap();
            prop_assert_eq!(top.len(), n.min(t.len()));
            prop_assert_eq!(&full.entries[..top.len()], &top.entries[..]);
        }
    }

    #[test]
    fn shuffle_is_seeded_and_score_sorted(seed in any::<u64>(), tie in any::<u64>()) {
        let Some(t) = table(seed) else { return Ok(()) };
        let a = rank(&t, TiePolicy::SeededShuffle, tie, None).unwrap();
        let b = rank(&t, TiePolicy::SeededShuffle, tie, None).unwrap();
        prop_assert_eq!(&a.entries, &b.entries);
        prop_assert!(a.entries.windows(2).all(|w| w[0].score >= w[1].score));
        let lex = rank(&t, TiePolicy::Lexicographic, 0, None).unwrap();
        let mut x: Vec<_> = a.entries.iter().map(|e| (e.drug, e.protein)).collect();
        let mut y: Vec<_> = lex.entries.iter().map(|e| (e.drug, e.protein)).collect();
        x.sort_unstable();
        y.sort_unstable();
        prop_assert_eq!(x, y);
    }
}

#[test]
fn ranks_are_one_based() {
    let t = (0..100).find_map(table).unwrap();
    let r = rank(&t, TiePolicy::Lexicographic, 0, Some(3)).unwrap();
    let ranks: Vec<usize> = r.rows().map(|(i, ..)| i).collect();
    assert_eq!(ranks, (1..=r.len()).collect::<Vec<_>>());
}
