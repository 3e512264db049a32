mod common;

use common::*;
use dtilink::indices::{cn_score, jaccard_score, katz_block, pa_score};
use dtilink::{
    build_graph, rank, score_all, BipartiteGraph, CnVariant, DedupRule, IndexConfig, KatzMethod,
    TiePolicy,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graphs(seed: u64, weighted: bool) -> (BipartiteGraph, OracleGraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = random_rows(&mut rng, 10, 10, weighted);
    let g = build_graph(&to_interactions(&rows), weighted, DedupRule::Sum).unwrap();
    (g, OracleGraph::from_rows(&rows, weighted))
}

fn configs() -> Vec<IndexConfig> {
    let mut v = Vec::new();
    for weighted in [false, true] {
        v.push(IndexConfig::common_neighbours().with_weighted(weighted));
        v.push(
            IndexConfig::common_neighbours()
                .with_cn_variant(CnVariant::SetCardinality)
                .with_weighted(weighted),
        );
        v.push(IndexConfig::jaccard().with_weighted(weighted));
        v.push(IndexConfig::preferential_attachment().with_weighted(weighted));
    }
    v
}

fn oracle_score(o: &OracleGraph, c: &IndexConfig, d: usize, p: usize) -> f64 {
    use dtilink::IndexKind::*;
    match (c.kind, c.cn_variant) {
        (CommonNeighbours, CnVariant::SetCardinality) => oracle_cn_set(o, d, p),
        (CommonNeighbours, CnVariant::PathCount) => oracle_cn_path(o, d, p, c.weighted),
        (Jaccard, _) => oracle_jaccard(o, d, p, c.weighted),
        (PreferentialAttachment, _) => oracle_pa(o, d, p, c.weighted),
        (Katz, _) => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn score_all_matches_oracle(seed in any::<u64>(), weighted in any::<bool>()) {
        let (g, o) = graphs(seed, weighted);
        for c in configs() {
            let table = score_all(&g, &c).unwrap();
            prop_assert_eq!(table.len(), g.n_drugs() * g.n_proteins() - g.n_edges());
            for (d, p, s) in table.iter() {
                let od = o.drug(&g.drug_ids()[d]);
                let op = o.protein(&g.protein_ids()[p]);
                prop_assert!(!o.edge(od, op));
                let expect = oracle_score(&o, &c, od, op);
                prop_assert!((s - expect).abs() <= 1e-9, "{} {} {}: {} vs {}", c.label(), d, p, s, expect);
            }
        }
    }

    #[test]
    fn score_all_is_bit_identical_to_pairwise(seed in any::<u64>(), weighted in any::<bool>()) {
        let (g, _) = graphs(seed, weighted);
        for c in configs() {
            let table = score_all(&g, &c).unwrap();
            for (d, p, s) in table.iter() {
                let pair = match c.kind {
                    dtilink::IndexKind::CommonNeighbours => cn_score(&g, d, p, c.cn_variant, c.weighted),
                    dtilink::IndexKind::Jaccard => jaccard_score(&g, d, p, c.weighted),
                    _ => pa_score(&g, d, p, c.weighted),
                }.unwrap();
                prop_assert_eq!(s.to_bits(), pair.to_bits());
            }
        }
    }

    #[test]
    fn unweighted_cn_is_b_bt_b(seed in any::<u64>()) {
        let (g, _) = graphs(seed, false);
        let b = g.biadjacency().to_dense();
        let (nd, np) = (g.n_drugs(), g.n_proteins());
        let table = score_all(&g, &IndexConfig::common_neighbours()).unwrap();
        for (d, p, s) in table.iter() {
            let mut x = 0.0;
            for q in 0..np {
                for e in 0..nd {
                    x += b[d * np + q] * b[e * np + q] * b[e * np + p];
                }
            }
            prop_assert_eq!(s, x);
        }
    }

    #[test]
    fn weighted_cn_with_unit_weights_is_three_path_counts(seed in any::<u64>()) {
        let (g, _) = graphs(seed, false);
        let plain = score_all(&g, &IndexConfig::common_neighbours()).unwrap();
        let unit = score_all(&g, &IndexConfig::common_neighbours().with_weighted(true)).unwrap();
        for ((_, _, a), (_, _, b)) in plain.iter().zip(unit.iter()) {
            prop_assert_eq!(b, 3.0 * a);
        }
    }

    #[test]
    fn jaccard_lies_in_unit_interval(seed in any::<u64>()) {
        let (g, _) = graphs(seed, false);
        let table = score_all(&g, &IndexConfig::jaccard()).unwrap();
        prop_assert!(table.scores().iter().all(|s| (0.0..=1.0).contains(s)));
    }

    #[test]
    fn pa_scales_quadratically_with_weights(seed in any::<u64>(), factor in 0.5f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_rows(&mut rng, 10, 10, true);
        let scaled: Vec<_> = rows.iter().map(|(d, p, w)| (d.clone(), p.clone(), w * factor)).collect();
        let g1 = build_graph(&to_interactions(&rows), true, DedupRule::Sum).unwrap();
        let g2 = build_graph(&to_interactions(&scaled), true, DedupRule::Sum).unwrap();
        let c = IndexConfig::preferential_attachment().with_weighted(true);
        let (t1, t2) = (score_all(&g1, &c).unwrap(), score_all(&g2, &c).unwrap());
        for ((_, _, a), (_, _, b)) in t1.iter().zip(t2.iter()) {
            prop_assert!((b - a * factor * factor).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn relabelling_nodes_preserves_scores(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_rows(&mut rng, 10, 10, false);
        let mut reversed = rows.clone();
        reversed.reverse();
        let g1 = build_graph(&to_interactions(&rows), false, DedupRule::Sum).unwrap();
        let g2 = build_graph(&to_interactions(&reversed), false, DedupRule::Sum).unwrap();
        for c in configs().into_iter().filter(|c| !c.weighted) {
            let (t1, t2) = (score_all(&g1, &c).unwrap(), score_all(&g2, &c).unwrap());
            for (d, p, s) in t1.iter() {
                let d2 = g2.drug_index(&g1.drug_ids()[d]).unwrap();
                let p2 = g2.protein_index(&g1.protein_ids()[p]).unwrap();
                prop_assert_eq!(t2.get(d2, p2), Some(s));
            }
        }
    }

    #[test]
    fn katz_direct_matches_truncated_oracle(seed in any::<u64>(), frac in 0.05f64..0.9, weighted in any::<bool>()) {
        let (g, o) = graphs(seed, weighted);
        let lambda = oracle_lambda_max(&o, weighted);
        let beta = frac / lambda;
        let terms = 40;
        let block = katz_block(&g, beta, KatzMethod::DirectSolve, 1e-12, 50, weighted).unwrap();
        let reference = oracle_katz(&o, beta, terms, weighted);
        let bound = katz_tail_bound(beta, lambda, terms) + 1e-12;
        for d in 0..g.n_drugs() {
            for p in 0..g.n_proteins() {
                let (od, op) = (o.drug(&g.drug_ids()[d]), o.protein(&g.protein_ids()[p]));
                let diff = (block.get(d, p) - reference[od][op]).abs();
                prop_assert!(diff <= bound, "diff {} bound {}", diff, bound);
            }
        }
    }
}

#[test]
fn toy_scores() {
    let rows = [("d1", "p1"), ("d2", "p1"), ("d2", "p2")];
    let g = build_graph(
        &rows.iter().map(|(d, p)| dtilink::Interaction::new(*d, *p, 1.0)).collect::<Vec<_>>(),
        false,
        DedupRule::Sum,
    )
    .unwrap();
    let (d1, p2) = (g.drug_index("d1").unwrap(), g.protein_index("p2").unwrap());
    let cn = score_all(&g, &IndexConfig::common_neighbours()).unwrap();
    assert_eq!(cn.len(), 1);
    assert_eq!(cn.get(d1, p2), Some(1.0));
    let pa = score_all(&g, &IndexConfig::preferential_attachment()).unwrap();
    assert_eq!(pa.get(d1, p2), Some(1.0));
    let jac = score_all(&g, &IndexConfig::jaccard()).unwrap();
    assert_eq!(jac.get(d1, p2), Some(0.5));
    assert!(cn_score(&g, d1, g.protein_index("p1").unwrap(), CnVariant::PathCount, false).is_err());
}

#[test]
fn cn_orderings_agree() {
    for seed in 0..50 {
        let (g, _) = graphs(seed, false);
        let a = score_all(&g, &IndexConfig::common_neighbours()).unwrap();
        let b = score_all(&g, &IndexConfig::common_neighbours().with_weighted(true)).unwrap();
        if a.is_empty() {
            continue;
        }
        let ra = rank(&a, TiePolicy::Lexicographic, 0, None).unwrap();
        let rb = rank(&b, TiePolicy::Lexicographic, 0, None).unwrap();
        let key = |r: &dtilink::RankedPredictions| {
            r.entries.iter().map(|e| (e.drug, e.protein)).collect::<Vec<_>>()
        };
        assert_eq!(key(&ra), key(&rb));
    }
}
