use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use selfdecl::bayes::{fit_semisupervised, fit_supervised, EmConfig, NbConfig};
use selfdecl::calibrate::fit_isotonic;
use selfdecl::eval::roc_auc;
use selfdecl::synth::mask_labels;
use selfdecl::Classifier;
use selfdecl_bench::{corpus, model, scores_and_labels};

fn fitting(c: &mut Criterion) {
    let mut g = c.benchmark_group("fit");
    for n in [1_000, 10_000] {
        let data = corpus(n, 200);
        g.bench_with_input(BenchmarkId::new("supervised", n), &data, |b, d| {
            b.iter(|| fit_supervised(d, &NbConfig::default()).unwrap())
        });
        g.bench_with_input(
            BenchmarkId::new("supervised_log_normal", n),
            &data,
            |b, d| {
                b.iter(|| {
                    fit_supervised(
                        d,
                        &NbConfig {
                            log_normal: true,
                            ..Default::default()
                        },
                    )
                    .unwrap()
                })
            },
        );
    }
    let partial = mask_labels(&corpus(5_000, 200), 0.1, 1).unwrap();
    let em = EmConfig {
        max_iter: 20,
        ..Default::default()
    };
    g.sample_size(10);
    g.bench_function("em_5000", |b| {
        b.iter(|| fit_semisupervised(&partial, &NbConfig::default(), &em).unwrap())
    });
    g.finish();
}

fn scoring(c: &mut Criterion) {
    let data = corpus(10_000, 200);
    let plain = model(&data, false);
    let log_normal = model(&data, true);
    let mut g = c.benchmark_group("score");
    g.bench_function("nb_10000", |b| {
        b.iter(|| plain.score_all(data.rows()).unwrap())
    });
    g.bench_function("nb_log_normal_10000", |b| {
        b.iter(|| log_normal.score_all(data.rows()).unwrap())
    });
    g.finish();
}

fn ranking(c: &mut Criterion) {
    let mut g = c.benchmark_group("rank");
    for n in [1_000, 20_000] {
        let (scores, labels) = scores_and_labels(n);
        g.bench_with_input(
            BenchmarkId::new("pava", n),
            &(&scores, &labels),
            |b, (s, l)| b.iter(|| fit_isotonic(s, l).unwrap()),
        );
        g.bench_with_input(
            BenchmarkId::new("roc_auc", n),
            &(&scores, &labels),
            |b, (s, l)| b.iter(|| roc_auc(s, l).unwrap()),
        );
    }
    g.finish();
}

criterion_group!(benches, fitting, scoring, ranking);
criterion_main!(benches);
