mod common;

use std::collections::BTreeMap;

use cellgraph::evalkit::{
    evaluate, make_splits, specimen_scores, ClassScore, Partition, SpecimenPrediction, SplitMode, SplitSpec,
};
use proptest::prelude::*;

fn labelled(max_len: usize) -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    (1..max_len).prop_flat_map(|n| (prop::collection::vec(0u8..9, n), prop::collection::vec(0u8..9, n)))
}

fn class_permutation() -> impl Strategy<Value = [u8; 9]> {
    // permutes every class except the excluded one
    Just([0u8, 1, 2, 3, 4, 5, 6, 8]).prop_shuffle().prop_map(|v| {
        let mut p = [7u8; 9];
        for (i, c) in [0usize, 1, 2, 3, 4, 5, 6, 8].into_iter().enumerate() {
            p[c] = v[i];
        }
        p
    })
}

proptest! {
    #[test]
    fn matches_confusion_oracle((pred, gt) in labelled(60)) {
        let s = specimen_scores(&pred, &gt, ClassScore::Recall).unwrap();
        let (top1, ca) = common::scores_oracle(&pred, &gt);
        prop_assert!((s.top1 - top1).abs() < 1e-12);
        match (s.class_avg, ca) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn invariant_to_class_relabelling((pred, gt) in labelled(60), perm in class_permutation()) {
        let p2: Vec<u8> = pred.iter().map(|&c| perm[c as usize]).collect();
        let g2: Vec<u8> = gt.iter().map(|&c| perm[c as usize]).collect();
        let a = specimen_scores(&pred, &gt, ClassScore::Recall).unwrap();
        let b = specimen_scores(&p2, &g2, ClassScore::Recall).unwrap();
        prop_assert!((a.top1 - b.top1).abs() < 1e-12);
        match (a.class_avg, b.class_avg) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn perfect_iff_one((pred, gt) in labelled(40)) {
        let s = specimen_scores(&pred, &gt, ClassScore::Recall).unwrap();
        prop_assert_eq!(s.top1 == 1.0, pred == gt);
        let scored_correct = pred.iter().zip(&gt).all(|(p, g)| *g == 7 || p == g);
        if let Some(ca) = s.class_avg {
            prop_assert_eq!(ca == 1.0, scored_correct);
        }
        let own = specimen_scores(&gt, &gt, ClassScore::Recall).unwrap();
        prop_assert_eq!(own.top1, 1.0);
        prop_assert!(own.class_avg.is_none_or(|v| v == 1.0));
    }

    #[test]
    fn split_properties(counts in prop::collection::vec(1usize..12, 1..5), k in 2u32..6, seed in any::<u64>()) {
        let mut specimens = Vec::new();
        for (s, &c) in counts.iter().enumerate() {
            for i in 0..c {
                specimens.push((format!("sp{s}_{i}"), format!("stage{s}")));
            }
        }
        let split = make_splits(&specimens, SplitMode::CrossValidation, k, seed).unwrap();
        prop_assert_eq!(split.assignment.len(), specimens.len());
        // stratified: within each stage fold sizes differ by at most one
        for s in 0..counts.len() {
            let stage = format!("stage{s}");
            let mut sizes = vec![0usize; k as usize];
            for (st, p) in split.assignment.values() {
                if *st == stage {
                    let Partition::Fold(f) = p else { panic!("not a fold") };
                    sizes[*f as usize] += 1;
                }
            }
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
        prop_assert_eq!(&split, &make_splits(&specimens, SplitMode::CrossValidation, k, seed).unwrap());
        let back = SplitSpec::from_kv(&split.to_kv()).unwrap();
        prop_assert_eq!(&back, &split);
        for f in 0..k {
            let r = split.roles(f).unwrap();
            let mut seen = BTreeMap::new();
            for (part, ids) in [("train", r.train), ("val", r.val), ("test", r.test)] {
                for id in ids {
                    prop_assert!(seen.insert(id, part).is_none());
                }
            }
            prop_assert_eq!(seen.len(), specimens.len());
        }
    }
}

#[test]
fn aggregates_match_hand_computation() {
    let gt: Vec<Vec<u8>> = vec![vec![0, 1, 1, 2, 7], vec![3, 3, 4, 4], vec![5, 6, 8, 8, 0, 0]];
    let pred: Vec<Vec<u8>> = vec![vec![0, 1, 2, 2, 0], vec![3, 4, 4, 4], vec![5, 6, 8, 0, 0, 1]];
    let stages = ["a", "a", "b"];
    let ids = ["s0", "s1", "s2"];
    let items: Vec<SpecimenPrediction> = (0..3)
        .map(|i| SpecimenPrediction {
            specimen_id: ids[i],
            stage: stages[i],
            pred: &pred[i],
            gt: &gt[i],
        })
        .collect();
    let r = evaluate(&items, None, ClassScore::Recall).unwrap();

    // s0: top1 3/5, recalls nu 1, L1 1/2, L2 1 -> 5/6
    // s1: top1 3/4, recalls L3 1/2, L4 1 -> 3/4
    // s2: top1 4/6, recalls nu 1/2, fu 1, a-ch 1, p-ch 1/2 -> 3/4
    let top1 = [0.6, 0.75, 4.0 / 6.0];
    let ca = [5.0 / 6.0, 0.75, 0.75];
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let std = |v: &[f64]| (v.iter().map(|x| (x - mean(v)).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
    assert!((r.overall.top1.mean - mean(&top1)).abs() < 1e-12);
    assert!((r.overall.top1.std - std(&top1)).abs() < 1e-12);
    assert!((r.overall.class_avg.mean - mean(&ca)).abs() < 1e-12);
    assert!((r.per_stage["a"].class_avg.mean - mean(&ca[..2])).abs() < 1e-12);
    assert!((r.per_stage["b"].top1.mean - top1[2]).abs() < 1e-12);
    // nu present in s0 (1.0) and s2 (0.5)
    assert!((r.per_class[0].mean - 0.75).abs() < 1e-12);
    assert_eq!(r.per_class[0].count, 2);
    // es is reported per class but left out of the class average
    assert_eq!(r.per_class[7].count, 1);
    assert_eq!(r.per_class[7].mean, 0.0);
    assert!(r.flagged.is_empty());

    let split = make_splits(
        &ids.iter().zip(stages).map(|(i, s)| (i.to_string(), s.to_string())).collect::<Vec<_>>(),
        SplitMode::CrossValidation,
        3,
        0,
    )
    .unwrap();
    let r = evaluate(&items, Some(&split), ClassScore::Recall).unwrap();
    let total: usize = r.per_partition.values().map(|g| g.top1.count).sum();
    assert_eq!(total, 3);
}

#[test]
fn only_excluded_class_is_flagged() {
    let gt = [7u8, 7];
    let item = SpecimenPrediction {
        specimen_id: "es",
        stage: "x",
        pred: &gt,
        gt: &gt,
    };
    let r = evaluate(&[item], None, ClassScore::Recall).unwrap();
    assert_eq!(r.flagged, vec!["es".to_string()]);
}
