use std::collections::HashSet;
use std::sync::Arc;

use proptest::prelude::*;
use selfdecl::axis::{build_axis, AxisScorer, EmbeddingTable, Projection};
use selfdecl::bayes::{fit_supervised, NbConfig};
use selfdecl::calibrate::fit_isotonic;
use selfdecl::data::{split, ActivityVector, Corpus, SplitSpec, Vocabulary};
use selfdecl::eval::{f1, roc_auc};
use selfdecl::labeling::{distant_label, Attribute, SeedSets};
use selfdecl::quantify::{estimate_from_parts, Quantifier};

fn corpus_strategy(max_n: usize, d: usize) -> impl Strategy<Value = Corpus> {
    let row = prop::collection::vec((0..d as u32, 1u32..6), 1..5);
    prop::collection::vec((row, 0i32..2), 4..max_n).prop_filter_map("both classes", move |rows| {
        let vocab = Arc::new(Vocabulary::new((0..d).map(|j| format!("c{j}"))).unwrap());
        let labels: Vec<i32> = rows.iter().map(|r| r.1).collect();
        if labels.iter().filter(|&&l| l == 1).count() < 2
            || labels.iter().filter(|&&l| l == 0).count() < 2
        {
            return None;
        }
        let vecs = rows
            .iter()
            .enumerate()
            .map(|(i, (r, _))| {
                ActivityVector::from_pairs(
                    format!("u{i}"),
                    r.iter().map(|&(j, c)| (j as usize, c as u64)),
                )
                .unwrap()
            })
            .collect();
        Corpus::new(vocab, vecs, labels, 2).ok()
    })
}

fn brute_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == 1 && labels[j] == 0 {
                den += 1.0;
                num += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    num / den
}

fn scores_labels() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    prop::collection::vec((0u8..20, 0u8..2), 2..60)
        .prop_filter("both classes", |v| {
            v.iter().any(|p| p.1 == 0) && v.iter().any(|p| p.1 == 1)
        })
        .prop_map(|v| {
            (
                v.iter().map(|p| p.0 as f64 / 19.0).collect(),
                v.iter().map(|p| p.1).collect(),
            )
        })
}

proptest! {
    #[test]
    fn split_is_a_disjoint_cover(c in corpus_strategy(40, 5), seed in any::<u64>(), t in 0.2f64..0.5) {
        let (train, test) = split(&c, &SplitSpec::holdout(t, seed)).unwrap();
        let ids = |x: &Corpus| x.rows().iter().map(|r| r.user_id.clone()).collect::<Vec<_>>();
        let (a, b) = (ids(&train), ids(&test));
        let sa: HashSet<_> = a.iter().collect();
        let sb: HashSet<_> = b.iter().collect();
        prop_assert_eq!(sa.len(), a.len());
        prop_assert!(sa.is_disjoint(&sb));
        prop_assert_eq!(a.len() + b.len(), c.len());
    }

    #[test]
    fn nb_is_label_permutation_equivariant(c in corpus_strategy(30, 6)) {
        let cfg = NbConfig::default();
        let (m, _) = fit_supervised(&c, &cfg).unwrap();
        let flipped = c.with_labels(c.labels().iter().map(|&l| 1 - l).collect()).unwrap();
        let (mf, _) = fit_supervised(&flipped, &cfg).unwrap();
        for x in c.rows() {
            let p = m.posterior(x).unwrap();
            let q = mf.posterior(x).unwrap();
            prop_assert!((p[0] - q[1]).abs() < 1e-12 && (p[1] - q[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn nb_is_feature_permutation_equivariant(c in corpus_strategy(30, 6), rot in 1usize..6) {
        let d = c.d();
        let perm = |j: usize| (j + rot) % d;
        let vocab = Arc::new(Vocabulary::new((0..d).map(|j| format!("c{j}"))).unwrap());
        let rows: Vec<ActivityVector> = c
            .rows()
            .iter()
            .map(|x| ActivityVector::from_pairs(x.user_id.clone(), x.iter().map(|(j, n)| (perm(j), n))).unwrap())
            .collect();
        let pc = Corpus::new(vocab, rows.clone(), c.labels().to_vec(), 2).unwrap();
        let (m, _) = fit_supervised(&c, &NbConfig::default()).unwrap();
        let (pm, _) = fit_supervised(&pc, &NbConfig::default()).unwrap();
        for (x, px) in c.rows().iter().zip(&rows) {
            let a = m.log_joint(x).unwrap();
            let b = pm.log_joint(px).unwrap();
            prop_assert!((a[0] - b[0]).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn auc_matches_pairwise_count((s, y) in scores_labels()) {
        prop_assert!((roc_auc(&s, &y).unwrap() - brute_auc(&s, &y)).abs() < 1e-12);
    }

    #[test]
    fn auc_ignores_monotone_transforms((s, y) in scores_labels(), a in 0.1f64..5.0, b in -3.0f64..3.0) {
        let t: Vec<f64> = s.iter().map(|v| (a * v + b).exp()).collect();
        prop_assert_eq!(roc_auc(&s, &y).unwrap(), roc_auc(&t, &y).unwrap());
    }

    #[test]
    fn f1_matches_definition(pairs in prop::collection::vec((0u8..2, 0u8..2), 0..50)) {
        let p: Vec<u8> = pairs.iter().map(|x| x.0).collect();
        let y: Vec<u8> = pairs.iter().map(|x| x.1).collect();
        let tp = pairs.iter().filter(|x| x.0 == 1 && x.1 == 1).count() as f64;
        let pp = p.iter().filter(|&&v| v == 1).count() as f64;
        let ap = y.iter().filter(|&&v| v == 1).count() as f64;
        let expected = if tp == 0.0 { 0.0 } else {
            let (prec, rec) = (tp / pp, tp / ap);
            2.0 * prec * rec / (prec + rec)
        };
        prop_assert!((f1(&p, &y, 1).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn isotonic_map_is_monotone((s, y) in scores_labels(), probes in prop::collection::vec(-0.5f64..1.5, 2..30)) {
        let m = fit_isotonic(&s, &y).unwrap();
        let mut probes = probes;
        probes.sort_by(f64::total_cmp);
        let out = m.apply(&probes);
        prop_assert!(out.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(out.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn axis_score_is_scale_invariant(
        z in prop::collection::vec(-3.0f64..3.0, 5),
        counts in prop::collection::vec((0usize..5, 1u64..20), 1..6),
        k in 2u64..9,
    ) {
        let scorer = AxisScorer::from_z(z.into_iter().map(Some).collect(), 0.0);
        let x = ActivityVector::from_pairs("u", counts.iter().copied()).unwrap();
        let kx = ActivityVector::from_pairs("u", counts.iter().map(|&(j, c)| (j, c * k))).unwrap();
        prop_assert!((scorer.score_user(&x).unwrap() - scorer.score_user(&kx).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn axis_pole_swap_negates(v in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 6)) {
        let rows: Vec<(String, Vec<f64>)> = v.into_iter().enumerate().map(|(i, r)| (format!("c{i}"), r)).collect();
        let emb = EmbeddingTable::new(rows).unwrap();
        let (a, b) = (vec!["c0".to_string(), "c1".to_string()], vec!["c2".to_string()]);
        if let (Ok(m1), Ok(m2)) = (build_axis(&emb, &a, &b, Projection::Cosine), build_axis(&emb, &b, &a, Projection::Cosine)) {
            for (x, y) in m1.z.iter().zip(&m2.z) {
                prop_assert!((x + y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn distant_labels_are_exclusive(c in corpus_strategy(40, 6), thr in 1u64..5) {
        let seeds = SeedSets {
            attribute: Attribute::Gender,
            pole_a: vec!["c0".into(), "c1".into()],
            pole_b: vec!["c2".into(), "c3".into()],
            threshold: thr,
        };
        let out = distant_label(&c, &seeds).unwrap();
        prop_assert_eq!(out.labels.len(), c.len());
        prop_assert!(out.labels.iter().all(|l| [-1, 0, 1].contains(l)));
        prop_assert_eq!(out.labels, distant_label(&c, &seeds).unwrap().labels);
    }

    #[test]
    fn perfect_acc_equals_cc(preds in prop::collection::vec(0u8..2, 1..100)) {
        let cc = estimate_from_parts(&Quantifier::cc(), &preds, None, None).unwrap();
        let acc = estimate_from_parts(&Quantifier::acc(1.0, 0.0).unwrap(), &preds, None, None).unwrap();
        prop_assert_eq!(cc.estimate, acc.estimate);
    }
}
