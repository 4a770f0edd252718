use selfdecl::axis::{build_axis_from_seeds, AxisLearner, Projection};
use selfdecl::bayes::NbLearner;
use selfdecl::data::{split, stratified_folds, ActivityVector, Corpus, Vocabulary};
use selfdecl::eval::*;
use selfdecl::labeling::{distant_label, Attribute};
use selfdecl::quantify::QuantMode;
use selfdecl::synth::{generate, synth_embeddings, synth_seeds, SynthSpec};
use selfdecl::{Classifier, Learner};
use std::sync::Arc;

fn separable(n: usize) -> Corpus {
    generate(&SynthSpec {
        n,
        d: 40,
        separation: 1.0,
        concentration: 0.2,
        seed: 11,
        ..Default::default()
    })
    .unwrap()
    .0
}

#[test]
fn bootstrap_is_deterministic() {
    let c = separable(400);
    let spec = BootstrapSpec {
        replicates: 8,
        seed: 5,
        ..Default::default()
    };
    let a = bootstrap_eval(&NbLearner::plain(), &c, &spec).unwrap();
    let b = bootstrap_eval(&NbLearner::plain(), &c, &spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.replicates, 8);
    assert!(a.roc_auc.std >= 0.0);
}

#[test]
fn single_replicate_is_a_plain_split() {
    let c = separable(300);
    let spec = BootstrapSpec {
        replicates: 1,
        seed: 2,
        ..Default::default()
    };
    let r = bootstrap_eval(&NbLearner::plain(), &c, &spec).unwrap();
    let (train, test) = split(&c, &spec.split_for(0)).unwrap();
    let clf = NbLearner::plain().fit(&train).unwrap();
    let s = score_labeled(clf.as_ref(), &test).unwrap();
    assert_eq!(r.roc_auc.mean, roc_auc(&s.scores, &s.labels).unwrap());
    assert_eq!(r.f1.mean, f1(&s.predictions, &s.labels, 1).unwrap());
    assert_eq!(r.roc_auc.std, 0.0);
}

#[test]
fn separable_data_scores_near_one() {
    let r = bootstrap_eval(
        &NbLearner::plain(),
        &separable(1000),
        &BootstrapSpec {
            replicates: 20,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(
        r.roc_auc.mean > 0.99 && r.roc_auc.std < 0.01,
        "{:?}",
        r.roc_auc
    );
}

#[test]
fn bootstrap_mean_stabilizes() {
    let (c, _) = generate(&SynthSpec {
        n: 600,
        d: 30,
        separation: 0.3,
        seed: 4,
        ..Default::default()
    })
    .unwrap();
    let small = bootstrap_eval(
        &NbLearner::plain(),
        &c,
        &BootstrapSpec {
            replicates: 20,
            ..Default::default()
        },
    )
    .unwrap();
    let big = bootstrap_eval(
        &NbLearner::plain(),
        &c,
        &BootstrapSpec {
            replicates: 40,
            ..Default::default()
        },
    )
    .unwrap();
    let bound = 2.0 * small.roc_auc.std / 20f64.sqrt();
    assert!(
        (big.roc_auc.mean - small.roc_auc.mean).abs() < bound,
        "{small:?} {big:?}"
    );
}

fn four_rows() -> Corpus {
    let vocab = Arc::new(Vocabulary::new(["a", "b"]).unwrap());
    let rows = vec![
        ActivityVector::from_pairs("u0", [(0, 3)]).unwrap(),
        ActivityVector::from_pairs("u1", [(1, 3)]).unwrap(),
        ActivityVector::from_pairs("u2", [(0, 2)]).unwrap(),
        ActivityVector::from_pairs("u3", [(1, 2)]).unwrap(),
    ];
    Corpus::new(vocab, rows, vec![0, 1, 0, 1], 2).unwrap()
}

#[test]
fn two_fold_cv_on_four_rows() {
    let c = four_rows();
    // class 0 rows {0, 2} get folds 0, 1; class 1 rows continue the rotation
    assert_eq!(
        stratified_folds(&c, 2, None).unwrap(),
        vec![Some(0), Some(0), Some(1), Some(1)]
    );
    let curve = cv_roc(&NbLearner::plain(), &c, 2, None, false).unwrap();
    assert_eq!(curve.auc, Some(1.0));
    let first = &curve.points[0];
    let last = curve.points.last().unwrap();
    assert_eq!((first.x, first.y), (0.0, Some(0.0)));
    assert_eq!((last.x, last.y), (1.0, Some(1.0)));
}

#[test]
fn cv_curve_is_monotone() {
    let (c, _) = generate(&SynthSpec {
        n: 500,
        d: 30,
        seed: 8,
        ..Default::default()
    })
    .unwrap();
    let curve = cv_roc(&NbLearner::plain(), &c, 10, Some(1), true).unwrap();
    assert!(curve
        .points
        .windows(2)
        .all(|w| w[0].x <= w[1].x && w[0].y <= w[1].y));
    assert!(curve.auc.unwrap() > 0.6);
}

#[test]
fn robustness_filter() {
    let (c, _) = generate(&SynthSpec {
        n: 2000,
        d: 30,
        separation: 0.4,
        seed: 12,
        ..Default::default()
    })
    .unwrap();
    let (train, test) = split(&c, &selfdecl::data::SplitSpec::holdout(0.3, 1)).unwrap();
    let clf = NbLearner::plain().fit(&train).unwrap();
    let taus = [0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.01];
    let curve = robustness_sweep(clf.as_ref(), &test, &taus, "NB").unwrap();
    let s = score_labeled(clf.as_ref(), &test).unwrap();
    assert_eq!(curve.points[0].retained, Some(1.0));
    assert_eq!(
        curve.points[0].y,
        Some(roc_auc(&s.scores, &s.labels).unwrap())
    );
    assert!(curve
        .points
        .windows(2)
        .all(|w| w[0].retained >= w[1].retained));
    let tight = curve.points.iter().rev().find(|p| p.y.is_some()).unwrap();
    assert!(tight.y.unwrap() >= curve.points[0].y.unwrap());
    assert!(robustness_sweep(clf.as_ref(), &test, &[0.7], "NB").is_err());
}

#[test]
fn empty_retained_set_is_marked() {
    let c = four_rows();
    let clf = Majority { prior: 0.5 };
    let curve = robustness_sweep(&clf, &c, &[0.1], "Majority").unwrap();
    assert_eq!(curve.points[0].y, None);
    assert_eq!(curve.points[0].retained, Some(0.0));
}

#[test]
fn majority_is_uninformative() {
    let (c, _) = generate(&SynthSpec {
        n: 400,
        d: 20,
        seed: 3,
        ..Default::default()
    })
    .unwrap();
    let r = bootstrap_eval(
        &MajorityLearner,
        &c,
        &BootstrapSpec {
            replicates: 3,
            oversample: false,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(r.roc_auc.mean, 0.5);
    let clf = MajorityLearner.fit(&c).unwrap();
    let x = &c.rows()[0];
    assert_eq!(clf.score(x).unwrap(), c.prevalence().unwrap());
}

#[test]
fn learning_curve_validation_and_limit() {
    let (c, _) = generate(&SynthSpec {
        n: 1500,
        d: 30,
        seed: 21,
        ..Default::default()
    })
    .unwrap();
    let proto = QuantProtocol {
        splits: 2,
        repeats: 10,
        cohort_size: 50,
        ..Default::default()
    };
    let nb = NbLearner::plain();
    assert!(learning_curve(&nb, &c, &[500, 200], &proto).is_err());
    assert!(learning_curve(&nb, &c, &[200, 200], &proto).is_err());
    assert!(learning_curve(&nb, &c, &[0, 200], &proto).is_err());
    // a 30% holdout takes floor(0.3 n_c) rows of each class
    let available: usize = c
        .class_counts()
        .iter()
        .map(|&n| n - (n as f64 * 0.3).floor() as usize)
        .sum();
    let full = run_quant_protocol(&nb, &c, &proto, None).unwrap();
    let curve = learning_curve(&nb, &c, &[100, available], &proto).unwrap();
    assert_eq!(curve.points[1].y, Some(full.mae));
    assert!(learning_curve(&nb, &c, &[100, available + 1], &proto).is_err());
}

#[test]
fn axis_learner_in_protocols() {
    let (c, truth) = generate(&SynthSpec {
        n: 800,
        d: 40,
        seed: 2,
        ..Default::default()
    })
    .unwrap();
    let emb = synth_embeddings(&truth, 8, 0.3, 1).unwrap();
    let axis = build_axis_from_seeds(
        &emb,
        &synth_seeds(&truth, 5, 3, Attribute::Gender),
        Projection::Cosine,
    )
    .unwrap();
    let wa = AxisLearner { model: axis };
    let r = bootstrap_eval(
        &wa,
        &c,
        &BootstrapSpec {
            replicates: 4,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(r.roc_auc.mean > 0.6, "{r:?}");
    let proto = QuantProtocol {
        splits: 2,
        repeats: 10,
        cohort_size: 50,
        mode: QuantMode::Cc,
        ..Default::default()
    };
    let q = run_quant_protocol(&wa, &c, &proto, None).unwrap();
    assert_eq!(q.method, "CC");
    assert_eq!(q.cohorts, 20);
}

#[test]
fn calibrated_protocol_reports_coverage() {
    let (c, _) = generate(&SynthSpec {
        n: 2000,
        d: 30,
        seed: 9,
        ..Default::default()
    })
    .unwrap();
    let proto = QuantProtocol {
        splits: 2,
        repeats: 20,
        cohort_size: 100,
        calibrate: true,
        confidence: Some(0.95),
        ..Default::default()
    };
    let q = run_quant_protocol(&NbLearner::plain(), &c, &proto, None).unwrap();
    assert!(q.coverage.is_some());
    let uncal = run_quant_protocol(
        &NbLearner::plain(),
        &c,
        &QuantProtocol {
            calibrate: false,
            ..proto
        },
        None,
    )
    .unwrap();
    assert!(uncal.coverage.is_none());
}

#[test]
fn distant_learner_ignores_training_labels() {
    let spec = SynthSpec {
        n: 600,
        d: 30,
        seed: 41,
        ..Default::default()
    };
    let (corpus, truth) = generate(&spec).unwrap();
    let seeds = synth_seeds(&truth, 4, 1, Attribute::Gender);
    let learner = DistantLearner {
        inner: NbLearner::plain(),
        seeds: seeds.clone(),
    };
    let scrambled: Vec<i32> = corpus.labels().iter().map(|&l| 1 - l).collect();
    let a = learner.fit(&corpus).unwrap();
    let b = learner
        .fit(&corpus.with_labels(scrambled).unwrap())
        .unwrap();
    assert_eq!(
        a.score_all(corpus.rows()).unwrap(),
        b.score_all(corpus.rows()).unwrap()
    );
    let distant = distant_label(&corpus, &seeds).unwrap();
    let direct = NbLearner::plain()
        .fit(&corpus.with_labels(distant.labels).unwrap())
        .unwrap();
    assert_eq!(
        a.score_all(corpus.rows()).unwrap(),
        direct.score_all(corpus.rows()).unwrap()
    );
}
