//! One function per subcommand. Each reads its inputs through [`Files`] so
//! the manifest can record them, and writes under `paths.out`.

use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rayon::prelude::*;
use selfdecl::axis::{build_axis_from_seeds, AxisLearner, EmbeddingTable};
use selfdecl::bayes::{
    feature_log_odds_dispersion, fit_semisupervised, fit_supervised, EmConfig, NbConfig, NbLearner,
};
use selfdecl::calibrate::{fit_isotonic, reliability, IsotonicMap};
use selfdecl::data::{
    load_corpus, read_labels_csv, split, write_jsonl, write_labels_csv, write_vocab, CorpusFormat,
    SplitSpec, UNLABELED,
};
use selfdecl::eval::{
    bootstrap_eval, cv_roc, learning_curve, robustness_sweep, run_quant_protocol, score_labeled,
    BootstrapSpec, CurveData, CurveKind, CurvePoint, DistantLearner, MajorityLearner,
    QuantProtocol, ReportRow, ReportTable,
};
use selfdecl::labeling::{
    activity_corpus, binarize, distant_label, extract_declarations, filter_bots, parse_botlist,
    read_comments, resolve_coherence, write_declarations, Attribute, RuleSet, SeedSets,
};
use selfdecl::persist::{to_pretty_json, Model, ModelFile};
use selfdecl::quantify::{
    estimate, fit_quantifier, CohortResult, QuantMode, QuantReport, Quantifier,
};
use selfdecl::{Classifier, Corpus, ErrorKind, Learner, Vocabulary};
use serde::Serialize;
use serde_json::json;

use crate::args::{Command, Task};
use crate::config::{require, CorpusFormatKind, ModelKind, RunConfig, Supervision};
use crate::error::{CliError, CliResult};
use crate::manifest;

/// Inputs read and outputs written by one command.
pub struct Files {
    out: PathBuf,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl Files {
    fn new(out: &Path) -> Self {
        Self {
            out: out.to_path_buf(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn input(&mut self, path: &Option<PathBuf>, flag: &str) -> CliResult<PathBuf> {
        let p = require(path, flag)?.to_path_buf();
        self.inputs.push(p.clone());
        Ok(p)
    }

    fn output(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.outputs.push(p.clone());
        p
    }

    fn text(&mut self, name: &str, text: &str) -> CliResult<()> {
        let p = self.output(name);
        fs::write(&p, text).map_err(|e| io_error(&p, e))
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<()> {
        self.text(name, &to_pretty_json(value)?)
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::data(format!("{}: {e}", path.display()))
}

pub fn command_name(command: &Command) -> String {
    match command {
        Command::Extract => "extract".into(),
        Command::LabelDistant => "label-distant".into(),
        Command::Train => "train".into(),
        Command::Predict => "predict".into(),
        Command::Quantify => "quantify".into(),
        Command::Evaluate { task } => {
            let task = task
                .to_possible_value()
                .map(|v| v.get_name().to_string())
                .unwrap_or_default();
            format!("evaluate --task {task}")
        }
        Command::Importance => "importance".into(),
        Command::Calibrate => "calibrate".into(),
        Command::Report => "report".into(),
    }
}

pub fn dispatch(command: &Command, cfg: &RunConfig) -> CliResult<()> {
    fs::create_dir_all(&cfg.paths.out).map_err(|e| io_error(&cfg.paths.out, e))?;
    let mut files = Files::new(&cfg.paths.out);
    match command {
        Command::Extract => extract(cfg, &mut files),
        Command::LabelDistant => label_distant(cfg, &mut files),
        Command::Train => train(cfg, &mut files),
        Command::Predict => predict(cfg, &mut files),
        Command::Quantify => quantify(cfg, &mut files),
        Command::Evaluate { task } => evaluate(cfg, *task, &mut files),
        Command::Importance => importance(cfg, &mut files),
        Command::Calibrate => calibrate(cfg, &mut files),
        Command::Report => report(cfg, &mut files),
    }?;
    manifest::write(cfg, &command_name(command), &files.inputs, &files.outputs)
}

fn attribute(cfg: &RunConfig) -> CliResult<Attribute> {
    cfg.attribute
        .ok_or_else(|| CliError::usage("missing --attribute (or attribute in the config)"))
}

fn load_vocab(cfg: &RunConfig, files: &mut Files) -> CliResult<Vocabulary> {
    let p = files.input(&cfg.paths.vocab, "vocab")?;
    Ok(Vocabulary::load(p)?)
}

fn load_at(
    path: &Path,
    cfg: &RunConfig,
    labels: Option<PathBuf>,
    vocab: &Vocabulary,
) -> CliResult<Corpus> {
    let format = match cfg.paths.corpus_format {
        CorpusFormatKind::Jsonl => CorpusFormat::Jsonl,
        CorpusFormatKind::Triplets => CorpusFormat::Triplets { labels },
    };
    let (corpus, report) = load_corpus(path, &format, vocab, 2)?;
    log::info!(
        "{}: {} users, {} dropped entries, {} unknown communities, {} merged records",
        path.display(),
        report.rows,
        report.dropped_entries,
        report.unknown_communities,
        report.merged_records
    );
    if !report.rejected_users.is_empty() {
        log::warn!(
            "{}: {} users rejected",
            path.display(),
            report.rejected_users.len()
        );
    }
    Ok(corpus)
}

/// Replaces every label with the one in a `user,label` CSV; users the file
/// does not mention become unlabeled.
fn relabel_from_csv(corpus: &Corpus, path: &Path) -> CliResult<Corpus> {
    let table: HashMap<String, i32> = read_labels_csv(path)?.into_iter().collect();
    let labels: Vec<i32> = corpus
        .rows()
        .iter()
        .map(|x| table.get(&x.user_id).copied().unwrap_or(UNLABELED))
        .collect();
    let known: HashSet<&str> = corpus.rows().iter().map(|x| x.user_id.as_str()).collect();
    let absent = table.keys().filter(|u| !known.contains(u.as_str())).count();
    if absent > 0 {
        log::warn!("{absent} labeled users are not in the corpus");
    }
    Ok(corpus.with_labels(labels)?)
}

fn load_main(cfg: &RunConfig, files: &mut Files) -> CliResult<Corpus> {
    let vocab = load_vocab(cfg, files)?;
    let path = files.input(&cfg.paths.corpus, "corpus")?;
    let labels = match &cfg.paths.labels {
        Some(_) => Some(files.input(&cfg.paths.labels, "labels")?),
        None => None,
    };
    match cfg.paths.corpus_format {
        CorpusFormatKind::Triplets => load_at(&path, cfg, labels, &vocab),
        CorpusFormatKind::Jsonl => {
            let corpus = load_at(&path, cfg, None, &vocab)?;
            match labels {
                Some(l) => relabel_from_csv(&corpus, &l),
                None => Ok(corpus),
            }
        }
    }
}

fn load_validation(
    cfg: &RunConfig,
    files: &mut Files,
    vocab: &Vocabulary,
) -> CliResult<Option<Corpus>> {
    if cfg.paths.validation.is_none() {
        return Ok(None);
    }
    let path = files.input(&cfg.paths.validation, "validation")?;
    load_at(&path, cfg, None, vocab).map(Some)
}

fn seeds(cfg: &RunConfig, files: &mut Files) -> CliResult<SeedSets> {
    let s = match &cfg.paths.seeds {
        Some(_) => SeedSets::load(files.input(&cfg.paths.seeds, "seeds")?)?,
        None => SeedSets::default_for(attribute(cfg)?),
    };
    if let Some(a) = cfg.attribute {
        if a != s.attribute {
            return Err(CliError::usage(format!(
                "seed file is for {} but the run is for {a}",
                s.attribute
            )));
        }
    }
    Ok(s)
}

fn axis_learner(cfg: &RunConfig, files: &mut Files, seeds: &SeedSets) -> CliResult<AxisLearner> {
    let emb = EmbeddingTable::load_tsv(files.input(&cfg.paths.embeddings, "embeddings")?)?;
    Ok(AxisLearner {
        model: build_axis_from_seeds(&emb, seeds, cfg.model.projection)?,
    })
}

fn distant(cfg: &RunConfig, seeds: &Option<SeedSets>, base: Box<dyn Learner>) -> Box<dyn Learner> {
    match (cfg.model.supervision, seeds) {
        (Supervision::Distant, Some(s)) => Box::new(DistantLearner {
            inner: base,
            seeds: s.clone(),
        }),
        _ => base,
    }
}

fn needs_seeds(cfg: &RunConfig) -> bool {
    cfg.model.supervision == Supervision::Distant
}

fn configured_learner(cfg: &RunConfig, files: &mut Files) -> CliResult<Box<dyn Learner>> {
    let seeds = match needs_seeds(cfg) || cfg.model.kind == ModelKind::Wa {
        true => Some(seeds(cfg, files)?),
        false => None,
    };
    Ok(match cfg.model.kind {
        ModelKind::Nb => distant(
            cfg,
            &seeds,
            Box::new(NbLearner {
                config: cfg.model.nb(),
                em: cfg.model.em(),
            }),
        ),
        ModelKind::Majority => distant(cfg, &seeds, Box::new(MajorityLearner)),
        ModelKind::Wa => Box::new(axis_learner(
            cfg,
            files,
            seeds.as_ref().expect("loaded above"),
        )?),
    })
}

fn quant_protocol(cfg: &RunConfig) -> QuantProtocol {
    let p = &cfg.protocol;
    QuantProtocol {
        test_fraction: p.pool_fraction,
        validation_fraction: p.validation_fraction,
        splits: p.splits,
        repeats: p.repeats,
        cohort_size: p.cohort_size,
        mode: p.mode,
        calibrate: p.calibrate,
        confidence: p.confidence,
        oversample: p.oversample,
        seed: cfg.seed,
    }
}

fn bootstrap_spec(cfg: &RunConfig) -> BootstrapSpec {
    let p = &cfg.protocol;
    BootstrapSpec {
        replicates: p.bootstrap,
        test_fraction: p.test_fraction,
        oversample: p.oversample,
        seed: cfg.seed,
    }
}

fn load_model(cfg: &RunConfig, files: &mut Files) -> CliResult<ModelFile> {
    let mf = ModelFile::load(files.input(&cfg.paths.model_file, "model-file")?)?;
    if let (Some(a), Some(b)) = (cfg.attribute, mf.attribute) {
        if a != b {
            log::warn!("model was trained for {b}, run is for {a}");
        }
    }
    Ok(mf)
}

fn bind(mf: &ModelFile, vocab: &Vocabulary) -> CliResult<Box<dyn Classifier>> {
    Ok(match &mf.model {
        Model::NaiveBayes(m) => {
            if m.d() != vocab.len() {
                return Err(CliError::data(format!(
                    "model has {} communities but the vocabulary has {}",
                    m.d(),
                    vocab.len()
                )));
            }
            Box::new(m.clone())
        }
        Model::Axis(m) => Box::new(m.scorer(vocab)),
    })
}

fn set_calibrator(mf: &mut ModelFile, map: Option<IsotonicMap>) {
    match &mut mf.model {
        Model::NaiveBayes(m) => m.set_calibrator(map),
        Model::Axis(m) => m.calibrator = map,
    }
}

/// Rows the classifier can score, and how many it could not.
fn scorable(clf: &dyn Classifier, corpus: &Corpus) -> CliResult<(Corpus, usize)> {
    let ok: Vec<bool> = corpus
        .rows()
        .par_iter()
        .map(|x| match clf.score(x) {
            Ok(_) => Ok(true),
            Err(e) if e.kind() == ErrorKind::Data => Ok(false),
            Err(e) => Err(e),
        })
        .collect::<selfdecl::Result<_>>()?;
    let keep: Vec<usize> = (0..ok.len()).filter(|&i| ok[i]).collect();
    let excluded = ok.len() - keep.len();
    if excluded > 0 {
        log::warn!("{excluded} users cannot be scored and are excluded");
    }
    Ok((corpus.subset(&keep), excluded))
}

fn extract(cfg: &RunConfig, files: &mut Files) -> CliResult<()> {
    let path = files.input(&cfg.paths.comments, "comments")?;
    let reader = BufReader::new(File::open(&path).map_err(|e| io_error(&path, e))?);
    let (comments, skipped) = read_comments(reader)?;
    let mut rules = match &cfg.paths.rules {
        Some(_) => RuleSet::load(files.input(&cfg.paths.rules, "rules")?)?,
        None => RuleSet::default_rules(),
    };
    if let Some(a) = cfg.attribute {
        rules = rules.restrict(&[a])?;
    }
    let bots = match &cfg.paths.botlist {
        Some(_) => {
            let p = files.input(&cfg.paths.botlist, "botlist")?;
            parse_botlist(&fs::read_to_string(&p).map_err(|e| io_error(&p, e))?)
        }
        None => HashSet::new(),
    };

    let (declarations, mut stats) = extract_declarations(&comments, &rules);
    stats.skipped_records = skipped;
    let found = declarations.len();
    let declarations = filter_bots(declarations, &bots);
    let out = files.output("declarations.jsonl");
    let w = BufWriter::new(File::create(&out).map_err(|e| io_error(&out, e))?);
    write_declarations(w, &declarations)?;

    let coherence = resolve_coherence(&declarations);
    let mut per_attribute = serde_json::Map::new();
    for a in rules.attributes() {
        let rejected = coherence.rejected.get(&a).map_or(0, |s| s.len());
        let resolved = coherence.for_attribute(a).len();
        let mut median = None;
        if resolved > 0 {
            let (labels, m) = binarize(&coherence.resolved, a, None)?;
            median = m;
            let out = files.output(&format!("labels_{a}.csv"));
            write_labels_csv(&out, labels.iter().map(|(u, l)| (u.as_str(), *l as i32)))?;
        }
        per_attribute.insert(
            a.to_string(),
            json!({
                "resolved": resolved,
                "rejected": rejected,
                "rejection_rate": coherence.rejection_rate(a),
                "year_median": median,
            }),
        );
    }

    let vocab = match &cfg.paths.vocab {
        Some(_) => Some(load_vocab(cfg, files)?),
        None => None,
    };
    let activity = activity_corpus(&comments, vocab.as_ref(), &bots)?;
    write_jsonl(&activity, files.output("activity.jsonl"))?;
    write_vocab(activity.vocab(), files.output("vocab.txt"))?;

    files.json(
        "extract_summary.json",
        &json!({
            "stats": stats,
            "declarations": found,
            "bot_declarations_removed": found - declarations.len(),
            "users": activity.len(),
            "communities": activity.d(),
            "attributes": per_attribute,
        }),
    )
}

fn label_distant(cfg: &RunConfig, files: &mut Files) -> CliResult<()> {
    let corpus = load_main(cfg, files)?;
    let seeds = seeds(cfg, files)?;
    let dl = distant_label(&corpus, &seeds)?;
    let out = files.output(&format!("distant_{}.csv", seeds.attribute));
    let rows = corpus
        .rows()
        .iter()
        .zip(&dl.labels)
        .filter(|(_, &l)| l != UNLABELED);
    write_labels_csv(&out, rows.map(|(x, &l)| (x.user_id.as_str(), l)))?;
    let [undecided, class0, class1] = dl.counts();
    files.json(
        "distant_summary.json",
        &json!({
            "attribute": seeds.attribute,
            "threshold": seeds.threshold,
            "users": corpus.len(),
            "class0": class0,
            "class1": class1,
            "undecided": undecided,
            "missing_seeds": dl.missing,
        }),
    )
}

fn train(cfg: &RunConfig, files: &mut Files) -> CliResult<()> {
    let model = match cfg.model.kind {
        ModelKind::Majority => {
            return Err(CliError::usage(
                "the majority baseline has no model file; use evaluate or report",
            ))
        }
        ModelKind::Wa => {
            let seeds = seeds(cfg, files)?;
            Model::Axis(axis_learner(cfg, files, &seeds)?.model)
        }
        ModelKind::Nb => {
            let mut corpus = load_main(cfg, files)?;
            if needs_seeds(cfg) {
                let seeds = seeds(cfg, files)?;
                corpus = corpus.with_labels(distant_label(&corpus, &seeds)?.labels)?;
            }
            let nb = cfg.model.nb();
            let (model, report) = match cfg.model.em() {
                Some(em) => fit_semisupervised(&corpus, &nb, &em)?,
                None => {
                    if corpus.n_unlabeled() > 0 {
                        log::info!(
                            "supervised fit ignores {} unlabeled users",
                            corpus.n_unlabeled()
                        );
                    }
                    fit_supervised(&corpus.labeled_only(), &nb)?
                }
            };
            files.json("fit_report.json", &report)?;
            Model::NaiveBayes(model)
        }
    };
    let mf = ModelFile {
        attribute: cfg.attribute,
        model,
    };
    mf.save(files.output("model.json"))?;
    Ok(())
}

fn predict(cfg: &RunConfig, files: &mut Files) -> CliResult<()> {
    let mf = load_model(cfg, files)?;
    let corpus = load_main(cfg, files)?;
    let clf = bind(&mf, corpus.vocab())?;
    let results: Vec<Option<(f64, u8)>> = corpus
        .rows()
        .par_iter()
        .map(|x| match clf.score(x) {
            Ok(s) => Ok(Some((s, clf.predict(x)?))),
            Err(e) if e.kind() == ErrorKind::Data => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<selfdecl::Result<_>>()?;

    let out = files.output("predictions.csv");
    let mut w = csv::Writer::from_path(&out).map_err(|e| io_error(&out, e))?;
    w.write_record(["user", "score", "prediction"])
        .map_err(|e| io_error(&out, e))?;
    for (x, r) in corpus.rows().iter().zip(&results) {
        let (s, p) = match r {
            Some((s, p)) => (s.to_string(), p.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([x.user_id.as_str(), &s, &p])
            .map_err(|e| io_error(&out, e))?;
    }
    w.flush().map_err(|e| io_error(&out, e))?;
    let scored = results.iter().filter(|r| r.is_some()).count();
    files.json(
        "predict_summary.json",
        &json!({ "users": corpus.len(), "scored": scored, "excluded": corpus.len() - scored, "calibrated": clf.is_calibrated() }),
    )
}

fn quantify(cfg: &RunConfig, files: &mut Files) -> CliResult<()> {
    let mf = load_model(cfg, files)?;
    let corpus = load_main(cfg, files)?;
    let clf = bind(&mf, corpus.vocab())?;
    let (cohort, excluded) = scorable(clf.as_ref(), &corpus)?;
    let quantifier = match cfg.protocol.mode {
        QuantMode::Cc => Quantifier::cc(),
        QuantMode::Acc => {
            let val = load_validation(cfg, files, corpus.vocab())?.ok_or_else(|| {
                CliError::usage("ACC needs a labeled --validation corpus for its rates")
            })?;
            let (val, _) = scorable(clf.as_ref(), &val.labeled_only())?;
            fit_quantifier(clf.as_ref(), &val, QuantMode::Acc)?
        }
    };
    let estimate = estimate(
        &quantifier,
        clf.as_ref(),
        cohort.rows(),
        cfg.protocol.confidence,
    )?;
    let truth = if cohort.n_unlabeled() == 0 {
        cohort.prevalence()
    } else {
        None
    };
    let report = QuantReport::new(vec![CohortResult {
        estimate,
        true_prevalence: truth,
    }]);
    files.json(
        "prevalence.json",
        &json!({ "quantifier": quantifier, "excluded": excluded, "report": report }),
    )
}

fn evaluate(cfg: &RunConfig, task: Task, files: &mut Files) -> CliResult<()> {
    let corpus = load_main(cfg, files)?;
    let learner = configured_learner(cfg, files)?;
    let p = &cfg.protocol;
    match task {
        Task::Classify => files.json(
            "metric_report.json",
            &bootstrap_eval(learner.as_ref(), &corpus, &bootstrap_spec(cfg))?,
        ),
        Task::Quantify => {
            let outcome =
                run_quant_protocol(learner.as_ref(), &corpus, &quant_protocol(cfg), None)?;
            files.json("quant_outcome.json", &outcome)
        }
        Task::Roc => {
            let curve = cv_roc(
                learner.as_ref(),
                &corpus,
                p.folds,
                Some(cfg.seed),
                p.oversample,
            )?;
            write_curve(files, "roc", &curve)
        }
        Task::Robustness => {
            let spec = SplitSpec {
                oversample: p.oversample,
                ..SplitSpec::holdout(p.test_fraction, cfg.seed)
            };
            let (train, test) = split(&corpus, &spec)?;
            let clf = learner.fit(&train)?;
            let curve =
                robustness_sweep(clf.as_ref(), &test.labeled_only(), &p.taus, &learner.name())?;
            write_curve(files, "robustness", &curve)
        }
        Task::Learning => {
            let curve = learning_curve(learner.as_ref(), &corpus, &p.sizes, &quant_protocol(cfg))?;
            write_curve(files, "learning", &curve)
        }
    }
}

fn write_curve(files: &mut Files, stem: &str, curve: &CurveData) -> CliResult<()> {
    files.text(&format!("{stem}.csv"), &curve.to_csv())?;
    files.json(&format!("{stem}.json"), curve)
}

#[derive(Serialize)]
struct ImportanceRow {
    community: String,
    log_odds: f64,
    bootstrap_mean: f64,
    bootstrap_std: f64,
}

fn importance(cfg: &RunConfig, files: &mut Files) -> CliResult<()> {
    let mut corpus = load_main(cfg, files)?;
    if needs_seeds(cfg) {
        let seeds = seeds(cfg, files)?;
        corpus = corpus.with_labels(distant_label(&corpus, &seeds)?.labels)?;
    }
    let labeled = corpus.labeled_only();
    let nb = cfg.model.nb();
    let (model, _) = fit_supervised(&labeled, &nb)?;
    let lo = model.feature_log_odds()?;
    let spread = feature_log_odds_dispersion(&labeled, &nb, cfg.protocol.rounds, cfg.seed)?;
    let vocab = corpus.vocab();
    let mut rows: Vec<ImportanceRow> = (0..vocab.len())
        .map(|j| ImportanceRow {
            community: vocab.name(j).to_string(),
            log_odds: lo[j],
            bootstrap_mean: spread[j].mean,
            bootstrap_std: spread[j].std,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.log_odds
            .total_cmp(&a.log_odds)
            .then_with(|| a.community.cmp(&b.community))
    });

    let out = files.output("importance.csv");
    let mut w = csv::Writer::from_path(&out).map_err(|e| io_error(&out, e))?;
    for r in &rows {
        w.serialize(r).map_err(|e| io_error(&out, e))?;
    }
    w.flush().map_err(|e| io_error(&out, e))?;
    files.json("importance.json", &rows)
}

fn calibrate(cfg: &RunConfig, files: &mut Files) -> CliResult<()> {
    let mut mf = load_model(cfg, files)?;
    set_calibrator(&mut mf, None);
    let val = match &cfg.paths.validation {
        Some(_) => {
            let vocab = load_vocab(cfg, files)?;
            load_validation(cfg, files, &vocab)?.expect("validation path is set")
        }
        None => load_main(cfg, files)?,
    };
    let val = val.labeled_only();
    let clf = bind(&mf, val.vocab())?;
    let s = score_labeled(clf.as_ref(), &val)?;
    let map = fit_isotonic(&s.scores, &s.labels)?;
    let before = reliability(&s.scores, &s.labels, cfg.protocol.bins)?;
    let after = reliability(&map.apply(&s.scores), &s.labels, cfg.protocol.bins)?;
    set_calibrator(&mut mf, Some(map));
    mf.save(files.output("model.json"))?;
    files.text(
        "reliability_before.csv",
        &CurveData::from_reliability("uncalibrated", &before).to_csv(),
    )?;
    files.text(
        "reliability_after.csv",
        &CurveData::from_reliability("calibrated", &after).to_csv(),
    )?;
    files.json(
        "calibration.json",
        &json!({
            "rows": s.scores.len(),
            "excluded": s.excluded,
            "ece_before": before.ece,
            "ece_after": after.ece,
            "before": before,
            "after": after,
        }),
    )
}

/// Learning curve over the sizes the corpus can supply; stops at the first
/// size the protocol rejects.
fn feasible_learning_curve(
    learner: &dyn Learner,
    corpus: &Corpus,
    sizes: &[usize],
    proto: &QuantProtocol,
) -> Option<CurveData> {
    let mut points = Vec::new();
    for &n in sizes {
        match run_quant_protocol(learner, corpus, proto, Some(n)) {
            Ok(o) => points.push(CurvePoint {
                x: n as f64,
                y: Some(o.mae),
                y_std: Some(o.std),
                retained: None,
            }),
            Err(e) => {
                log::info!(
                    "{}: learning curve stops before {n} rows: {e}",
                    learner.name()
                );
                break;
            }
        }
    }
    (!points.is_empty()).then(|| CurveData {
        kind: CurveKind::Learning,
        model: format!("{} {}", learner.name(), proto.mode.tag().to_uppercase()),
        points,
        auc: None,
    })
}

fn slug(name: &str) -> String {
    name.to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
}

fn report(cfg: &RunConfig, files: &mut Files) -> CliResult<()> {
    let a = attribute(cfg)?;
    let corpus = load_main(cfg, files)?;
    let seeds = match needs_seeds(cfg) || cfg.paths.embeddings.is_some() {
        true => Some(seeds(cfg, files)?),
        false => None,
    };
    let em = Some(EmConfig {
        max_iter: cfg.model.max_iter,
        tol: cfg.model.tol,
    });
    let nb = |log_normal: bool| NbConfig {
        log_normal,
        ..cfg.model.nb()
    };
    let mut learners: Vec<Box<dyn Learner>> = vec![
        distant(cfg, &seeds, Box::new(MajorityLearner)),
        distant(
            cfg,
            &seeds,
            Box::new(NbLearner {
                config: nb(false),
                em: None,
            }),
        ),
        distant(
            cfg,
            &seeds,
            Box::new(NbLearner {
                config: nb(true),
                em: None,
            }),
        ),
        distant(
            cfg,
            &seeds,
            Box::new(NbLearner {
                config: nb(false),
                em,
            }),
        ),
        distant(
            cfg,
            &seeds,
            Box::new(NbLearner {
                config: nb(true),
                em,
            }),
        ),
    ];
    if cfg.paths.embeddings.is_some() {
        learners.push(Box::new(axis_learner(
            cfg,
            files,
            seeds.as_ref().expect("loaded above"),
        )?));
    }

    let spec = bootstrap_spec(cfg);
    let classification: Vec<ReportRow> = learners
        .iter()
        .map(|l| match bootstrap_eval(l.as_ref(), &corpus, &spec) {
            Ok(r) => ReportRow::from(&r),
            Err(e) => ReportRow::failed(l.name(), e),
        })
        .collect();

    let proto = quant_protocol(cfg);
    let mut quantification = Vec::new();
    let mut curves = Vec::new();
    for (i, l) in learners.iter().enumerate() {
        let mut modes = vec![proto.mode];
        if l.name() == "WA" {
            modes = vec![QuantMode::Cc, QuantMode::Acc];
        }
        for mode in modes {
            let pr = QuantProtocol { mode, ..proto };
            quantification.push(match run_quant_protocol(l.as_ref(), &corpus, &pr, None) {
                Ok(o) => ReportRow::from(&o),
                Err(e) => {
                    ReportRow::failed(format!("{} {}", l.name(), mode.tag().to_uppercase()), e)
                }
            });
        }
        if i > 0 {
            if let Some(c) =
                feasible_learning_curve(l.as_ref(), &corpus, &cfg.protocol.sizes, &proto)
            {
                files.text(&format!("learning_{}.csv", slug(&c.model)), &c.to_csv())?;
                curves.push(c);
            }
        }
    }

    let table = |title: &str, rows: Vec<ReportRow>| ReportTable {
        title: title.into(),
        attribute: Some(a.to_string()),
        rows,
    };
    files.json(
        "report.json",
        &json!({
            "attribute": a,
            "supervision": cfg.model.supervision,
            "users": corpus.len(),
            "labeled": corpus.n_labeled(),
            "classification": table("classification", classification),
            "quantification": table("quantification", quantification),
            "learning_curves": curves,
        }),
    )
}
