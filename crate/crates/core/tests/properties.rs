//! Randomized invariants across the library.

use olga::evaluate::{average_ranks, f1_macro, friedman_nemenyi, hypersphere_volume, ScoreTable};
use olga::graphbuild::{knn_graph, make_folds_from_labels, Label, Similarity};
use olga::model::{decode, hypersphere_penalty};
use olga::numcore::Matrix;
use proptest::prelude::*;

fn labels(max: usize) -> impl Strategy<Value = Vec<Label>> {
    prop::collection::vec(
        prop::bool::ANY.prop_map(|b| if b { Label::Interest } else { Label::NonInterest }),
        1..max,
    )
}

fn matrix(rows: std::ops::Range<usize>, cols: usize) -> impl Strategy<Value = Matrix> {
    rows.prop_flat_map(move |n| {
        prop::collection::vec(-3.0f64..3.0, n * cols).prop_map(move |v| Matrix::from_vec(n, cols, v).unwrap())
    })
}

proptest! {
    #[test]
    fn f1_ignores_node_order(pairs in labels(40).prop_flat_map(|t| {
        let n = t.len();
        (Just(t), labels(n + 1).prop_filter("same length", move |p| p.len() == n), Just(n))
    }).prop_flat_map(|(t, p, n)| (Just(t), Just(p), Just((0..n).collect::<Vec<_>>()).prop_shuffle()))) {
        let (truth, pred, perm) = pairs;
        let a = f1_macro(&pred, &truth).unwrap();
        let pt: Vec<Label> = perm.iter().map(|&i| truth[i]).collect();
        let pp: Vec<Label> = perm.iter().map(|&i| pred[i]).collect();
        let b = f1_macro(&pp, &pt).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn ranks_sum_to_triangular_number(rows in prop::collection::vec(prop::collection::vec(0u8..5, 4), 2..12)) {
        let m = 4;
        let scores: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| f64::from(v) / 4.0).collect()).collect();
        for row in &scores {
            let ranks = average_ranks(row);
            let total: f64 = ranks.iter().sum();
            prop_assert!((total - (m * (m + 1)) as f64 / 2.0).abs() < 1e-9);
        }
        let n = scores.len();
        let table = ScoreTable::new(
            (0..m).map(|i| format!("m{i}")).collect(),
            (0..n).map(|i| format!("d{i}")).collect(),
            scores,
        ).unwrap();
        let result = friedman_nemenyi(&table).unwrap();
        let total: f64 = result.avg_ranks.iter().sum::<f64>() * n as f64;
        prop_assert!((total - (n * m * (m + 1)) as f64 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn decoder_is_symmetric_probability(h in matrix(1..8, 2)) {
        let a = decode(&h);
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                prop_assert!(a[(i, j)] > 0.0 && a[(i, j)] < 1.0);
                prop_assert_eq!(a[(i, j)], a[(j, i)]);
            }
        }
    }

    #[test]
    fn penalty_is_monotone(a in -20.0f64..20.0, b in -20.0f64..20.0) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(hypersphere_penalty(lo) < hypersphere_penalty(hi));
    }

    #[test]
    fn knn_graph_is_symmetric_without_loops(x in matrix(2..12, 3), k in 1usize..4, euclid in prop::bool::ANY) {
        prop_assume!(k < x.rows());
        let metric = if euclid { Similarity::Euclidean } else { Similarity::Cosine };
        let a = knn_graph(&x, k, metric).unwrap();
        for i in 0..a.rows() {
            prop_assert_eq!(a[(i, i)], 0.0);
            let degree = (0..a.cols()).filter(|&j| a[(i, j)] != 0.0).count();
            prop_assert!(degree >= k);
            for j in 0..a.cols() {
                prop_assert_eq!(a[(i, j)], a[(j, i)]);
            }
        }
    }

    #[test]
    fn folds_partition_the_nodes(n_interest in 10usize..80, n_non in 2usize..60, n_folds in 2usize..10, seed in 0u64..1000) {
        let labels: Vec<Label> = (0..n_interest + n_non)
            .map(|i| if i % 3 == 0 && i / 3 < n_non { Label::NonInterest } else { Label::Interest })
            .collect();
        let interest = labels.iter().filter(|l| l.is_interest()).count();
        prop_assume!(interest >= n_folds);
        let folds = make_folds_from_labels(&labels, n_folds, seed).unwrap();
        let mut tested = vec![0usize; labels.len()];
        for f in &folds {
            let mut all: Vec<usize> = f.train_interest.iter()
                .chain(&f.val_interest)
                .chain(&f.test_interest)
                .chain(&f.val_non_interest)
                .chain(&f.test_non_interest)
                .copied()
                .collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            for &i in &f.test_interest {
                tested[i] += 1;
            }
        }
        for (i, l) in labels.iter().enumerate() {
            prop_assert_eq!(tested[i], usize::from(l.is_interest()));
        }
    }

    #[test]
    fn volume_shrinks_with_dimension_beyond_five(r in 0.05f64..=1.0, n in 6usize..60) {
        prop_assert!(hypersphere_volume(n + 1, r).unwrap() < hypersphere_volume(n, r).unwrap());
    }
}

#[test]
fn penalty_is_smooth_at_zero() {
    let eps = 1e-7;
    let left = (hypersphere_penalty(0.0) - hypersphere_penalty(-eps)) / eps;
    let right = (hypersphere_penalty(eps) - hypersphere_penalty(0.0)) / eps;
    assert!((left - 1.0).abs() < 1e-6 && (right - 1.0).abs() < 1e-6);
    assert_eq!(hypersphere_penalty(0.0), 1.0);
    assert_eq!(hypersphere_penalty(1.0), 2.0);
}
