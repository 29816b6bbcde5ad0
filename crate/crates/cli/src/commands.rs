use std::path::{Path, PathBuf};
use std::sync::Arc;

use revrank_core::corpus::{self, Corpus, InputFormat, IngestPaths};
use revrank_core::dataset::{
    assemble_features, read_features_csv, write_features_csv, FeatureCase, FeatureRow, FeatureVector,
    LabeledDataset, LabeledExample, Split,
};
use revrank_core::evaluation::{roc_curve, write_roc_csv, ClassificationReport, EvalReport, RankMode};
use revrank_core::learners::{load_model, save_model, Model, DECISION_THRESHOLD};
use revrank_core::pipeline::{
    evaluate as evaluate_models, fit_classifier, prepare_from_features, rank_with_models, train_models,
    ClassifierKind, PipelineConfig, RankedList, TrainedModels,
};
use revrank_core::synthetic::{generate as generate_corpus, SyntheticConfig};
use revrank_core::text::Lexicons;
use revrank_core::Error as CoreError;
use serde_json::{json, Value};

use crate::config::{resolve, FileConfig, GlobalFlags, PipelineFlags, RunConfig, DATA_DIR_ENV};
use crate::error::{CliError, Result};
use crate::output::{class_table, write_atomic, write_json};
use crate::{Command, EvaluateArgs, FeaturizeArgs, GenerateArgs, IngestArgs, InputArgs, RankArgs, RunArgs, TrainArgs};

pub const CLASSIFIER_FILE: &str = "classifier.json";
pub const REGRESSOR_FILE: &str = "regressor.json";
pub const REGRESSOR_ALL_FILE: &str = "regressor_all.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const TEST_FEATURES_FILE: &str = "test_features.csv";

struct Context<'a> {
    global: &'a GlobalFlags,
    file: &'a FileConfig,
    env_data_dir: Option<PathBuf>,
}

impl Context<'_> {
    fn config(&self, flags: &PipelineFlags, base: PipelineConfig, max_reject: Option<f64>) -> Result<RunConfig> {
        resolve(flags, self.global, self.file, base, max_reject, self.env_data_dir.clone())
    }
}

pub fn dispatch(command: Command, global: &GlobalFlags, file: &FileConfig) -> Result<()> {
    let ctx = Context {
        global,
        file,
        env_data_dir: std::env::var_os(DATA_DIR_ENV).map(PathBuf::from),
    };
    match command {
        Command::Ingest(a) => ingest(&ctx, a),
        Command::Featurize(a) => featurize(&ctx, a),
        Command::Train(a) => train(&ctx, a),
        Command::Rank(a) => rank(&ctx, a),
        Command::Evaluate(a) => evaluate(&ctx, a),
        Command::Run(a) => run(&ctx, a),
        Command::Generate(a) => generate(&ctx, a),
    }
}

fn lexicons(cfg: &RunConfig) -> Result<Arc<Lexicons>> {
    Ok(Lexicons::load(&cfg.word_lists.paths())?)
}

fn read_corpus(cfg: &RunConfig, input: &InputArgs) -> Result<Corpus> {
    let reviews_format = match input.reviews_format.as_deref() {
        None => InputFormat::from_path(&input.reviews),
        Some("csv") => InputFormat::Csv,
        Some("jsonl") => InputFormat::Jsonl,
        Some(other) => return Err(CliError::Usage(format!("unknown reviews format {other:?} (expected csv or jsonl)"))),
    };
    let paths = IngestPaths {
        reviews: input.reviews.clone(),
        reviews_format,
        descriptions: input.descriptions.clone(),
        qa: input.qa.clone(),
    };
    let corpus = corpus::ingest(&paths, &cfg.parse_options())?;
    if corpus.reviews.is_empty() {
        return Err(CliError::Usage(format!("{}: no usable reviews", input.reviews.display())));
    }
    if log::max_level() > log::LevelFilter::Error {
        let report = serde_json::to_string_pretty(&corpus.cleaning_report).map_err(CoreError::from)?;
        eprintln!("{report}");
    }
    Ok(corpus)
}

fn write_corpus(path: &Path, corpus: &Corpus, cfg: &RunConfig) -> Result<()> {
    let mut value = serde_json::to_value(corpus).map_err(CoreError::from)?;
    value["config_echo"] = cfg.echo();
    write_atomic(path, |w| {
        serde_json::to_writer(&mut *w, &value).map_err(CoreError::from)?;
        w.write_all(b"\n").map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn write_features(path: &Path, case: FeatureCase, rows: &[FeatureRow], labeled: bool) -> Result<()> {
    write_atomic(path, |w| Ok(write_features_csv(w, case, rows, labeled)?))
}

fn mismatch(expected: FeatureCase, found: FeatureCase) -> CliError {
    CliError::Core(CoreError::FeatureMismatch {
        expected: expected.feature_names().join(","),
        found: found.feature_names().join(","),
    })
}

/// Feature vectors from a features file, sorted into corpus order.
fn read_features(path: &Path) -> Result<(FeatureCase, Vec<FeatureRow>)> {
    let f = std::fs::File::open(path).map_err(|e| CoreError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let (case, mut rows) = read_features_csv(std::io::BufReader::new(f), path)?;
    rows.sort_by(|a, b| a.review_id.cmp(&b.review_id));
    Ok((case, rows))
}

fn vectors(case: FeatureCase, rows: Vec<FeatureRow>) -> Vec<(String, FeatureVector)> {
    rows.into_iter()
        .map(|r| (r.review_id, FeatureVector { case, values: r.values }))
        .collect()
}

/// Features from `path` when given, otherwise extracted from the corpus.
/// A features file fixes the case; an explicitly configured case must agree.
fn corpus_features(
    corpus: &Corpus,
    path: Option<&Path>,
    cfg: &mut RunConfig,
) -> Result<Vec<(String, FeatureVector)>> {
    match path {
        Some(p) => {
            let (case, rows) = read_features(p)?;
            if cfg.case_explicit && case != cfg.pipeline.case {
                return Err(mismatch(cfg.pipeline.case, case));
            }
            cfg.pipeline.case = case;
            Ok(vectors(case, rows))
        }
        None => Ok(assemble_features(corpus, cfg.pipeline.case, &*lexicons(cfg)?)?),
    }
}

fn ingest(ctx: &Context, args: IngestArgs) -> Result<()> {
    let cfg = ctx.config(&PipelineFlags::default(), PipelineConfig::default(), args.input.max_reject_fraction)?;
    let corpus = read_corpus(&cfg, &args.input)?;
    write_corpus(&args.out, &corpus, &cfg)?;
    log::info!("{} reviews written to {}", corpus.reviews.len(), args.out.display());
    Ok(())
}

fn featurize(ctx: &Context, args: FeaturizeArgs) -> Result<()> {
    let cfg = ctx.config(&args.pipeline, PipelineConfig::default(), None)?;
    let corpus = Corpus::load(&args.corpus)?;
    let case = cfg.pipeline.case;
    let features = assemble_features(&corpus, case, &*lexicons(&cfg)?)?;
    let rows: Vec<FeatureRow> = features
        .into_iter()
        .zip(&corpus.reviews)
        .map(|((id, fv), r)| FeatureRow {
            review_id: id,
            values: fv.values,
            label: None,
            helpful_votes: Some(r.helpful_votes),
            synthetic: None,
        })
        .collect();
    write_features(&args.out, case, &rows, false)?;
    log::info!("{} rows of case {case} features", rows.len());
    Ok(())
}

fn classifier_report(dataset: &LabeledDataset, model: &Model) -> Result<ClassificationReport> {
    let clf = model
        .as_classifier()
        .ok_or_else(|| CoreError::UnsupportedModel(model.model_type().as_str().into()))?;
    let mut labels = Vec::new();
    let mut probs = Vec::new();
    for e in dataset.test() {
        labels.push(e.label);
        probs.push(clf.predict_proba(&e.features)?);
    }
    Ok(ClassificationReport::new(&labels, &probs, DECISION_THRESHOLD)?)
}

fn kind_name(kind: ClassifierKind) -> &'static str {
    match kind {
        ClassifierKind::Rf => "rf",
        ClassifierKind::Nb => "nb",
    }
}

fn display_name(kind: ClassifierKind) -> &'static str {
    match kind {
        ClassifierKind::Rf => "RF",
        ClassifierKind::Nb => "NB",
    }
}

fn ids<'a>(examples: impl Iterator<Item = &'a LabeledExample>) -> (Vec<&'a str>, usize) {
    let mut real = Vec::new();
    let mut synthetic = 0;
    for e in examples {
        if e.synthetic {
            synthetic += 1;
        } else {
            real.push(e.id.as_str());
        }
    }
    (real, synthetic)
}

fn mse_pair(report: &EvalReport) -> Value {
    json!({ "mse_high_quality": report.mse_high_quality, "mse_all": report.mse_all })
}

/// Fits and writes the models, split manifest, train-time metrics and the
/// labeled test partition into `dir`.
fn train_into(
    corpus: &Corpus,
    features: Vec<(String, FeatureVector)>,
    cfg: &RunConfig,
    dir: &Path,
) -> Result<(LabeledDataset, TrainedModels)> {
    let p = &cfg.pipeline;
    let dataset = prepare_from_features(corpus, p, features)?;
    let models = train_models(&dataset, p)?;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    })?;
    save_model(&models.classifier, &dir.join(CLASSIFIER_FILE))?;
    save_model(&models.regressor, &dir.join(REGRESSOR_FILE))?;
    save_model(&models.regressor_all, &dir.join(REGRESSOR_ALL_FILE))?;

    let (cx, cy): (Vec<Vec<f64>>, Vec<u8>) = dataset.train().map(|e| (e.features.clone(), e.label)).unzip();
    let mut classifiers = serde_json::Map::new();
    let mut table = Vec::new();
    for kind in [ClassifierKind::Rf, ClassifierKind::Nb] {
        let model = if kind == p.classifier {
            models.classifier.clone()
        } else {
            let other = PipelineConfig {
                classifier: kind,
                ..p.clone()
            };
            fit_classifier(&other, &cx, &cy)?
        };
        let report = classifier_report(&dataset, &model)?;
        classifiers.insert(kind_name(kind).into(), serde_json::to_value(&report).map_err(CoreError::from)?);
        table.push((display_name(kind), report));
    }
    let with = evaluate_models(&dataset, &models, PipelineConfig { mode: RankMode::WithClassifier, ..p.clone() }.echo())?;
    let without =
        evaluate_models(&dataset, &models, PipelineConfig { mode: RankMode::WithoutClassifier, ..p.clone() }.echo())?;
    let split = dataset.split.as_ref().expect("prepared datasets are split");
    let metrics = json!({
        "config_echo": cfg.echo(),
        "selected_classifier": kind_name(p.classifier),
        "classifiers": classifiers,
        "regression": {
            "with_classifier": mse_pair(&with),
            "without_classifier": mse_pair(&without),
        },
        "class_counts": {
            "train": dataset.class_counts(split.train.iter().copied()),
            "test": dataset.class_counts(split.test.iter().copied()),
        },
    });
    write_json(&dir.join(METRICS_FILE), &metrics)?;

    let (train_ids, synthetic_train) = ids(dataset.train());
    let (test_ids, synthetic_test) = ids(dataset.test());
    let manifest = json!({
        "config_echo": cfg.echo(),
        "files": {
            "classifier": CLASSIFIER_FILE,
            "regressor": REGRESSOR_FILE,
            "regressor_all": REGRESSOR_ALL_FILE,
            "test_features": TEST_FEATURES_FILE,
        },
        "split": {
            "train": train_ids,
            "test": test_ids,
            "synthetic_train": synthetic_train,
            "synthetic_test": synthetic_test,
        },
        "thresholds": dataset.thresholds,
    });
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;

    let test_rows: Vec<FeatureRow> = dataset.test().map(FeatureRow::from).collect();
    write_features(&dir.join(TEST_FEATURES_FILE), p.case, &test_rows, true)?;

    let rows: Vec<(&str, &ClassificationReport)> = table.iter().map(|(n, r)| (*n, r)).collect();
    print!("{}", class_table(&rows));
    println!(
        "regressor mse (high-quality test reviews): with classifier {}, without classifier {}",
        fmt_opt(with.mse_high_quality),
        fmt_opt(without.mse_high_quality)
    );
    Ok((dataset, models))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("undefined".into(), |x| format!("{x:.4}"))
}

fn train(ctx: &Context, args: TrainArgs) -> Result<()> {
    let mut cfg = ctx.config(&args.pipeline, PipelineConfig::default(), None)?;
    let corpus = Corpus::load(&args.corpus)?;
    let features = corpus_features(&corpus, args.features.as_deref(), &mut cfg)?;
    train_into(&corpus, features, &cfg, &args.out_dir)?;
    Ok(())
}

fn load_models(dir: &Path) -> Result<TrainedModels> {
    Ok(TrainedModels {
        classifier: load_model(&dir.join(CLASSIFIER_FILE))?,
        regressor: load_model(&dir.join(REGRESSOR_FILE))?,
        regressor_all: load_model(&dir.join(REGRESSOR_ALL_FILE))?,
    })
}

/// The configuration recorded when the models in `dir` were trained, if any.
fn trained_config(dir: &Path) -> Result<Option<PipelineConfig>> {
    let path = dir.join(MANIFEST_FILE);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(source) => return Err(CoreError::Io { path, source }.into()),
    };
    let manifest: Value = serde_json::from_str(&text).map_err(CoreError::from)?;
    let config = serde_json::from_value(manifest["config_echo"]["pipeline"].clone())
        .map_err(|e| CliError::Usage(format!("{}: bad config_echo: {e}", path.display())))?;
    Ok(Some(config))
}

/// Configuration for commands that use trained models: the training
/// configuration is the base, and the case must be the models' case.
fn model_config(ctx: &Context, flags: &PipelineFlags, dir: &Path, models: &TrainedModels) -> Result<RunConfig> {
    let case = models.case()?;
    let base = trained_config(dir)?.unwrap_or_default();
    let mut cfg = ctx.config(flags, PipelineConfig { case, ..base }, None)?;
    if cfg.pipeline.case != case {
        return Err(mismatch(case, cfg.pipeline.case));
    }
    cfg.case_explicit = true;
    Ok(cfg)
}

fn print_matching(list: &RankedList) {
    if let Some(m) = list.matching {
        let note = if m.short { " (fewer high-quality reviews than k)" } else { "" };
        println!("matching@{}: {} of top {}{note}", m.k, m.matching, m.compared);
    }
}

fn rank_into(
    corpus: &Corpus,
    features: &[(String, FeatureVector)],
    models: &TrainedModels,
    cfg: &RunConfig,
    out: &Path,
) -> Result<RankedList> {
    let (mut list, _warnings) = rank_with_models(corpus, features, models, cfg.pipeline.mode, cfg.pipeline.k)?;
    list.config_echo = cfg.echo();
    write_json(out, &list)?;
    print_matching(&list);
    Ok(list)
}

fn rank(ctx: &Context, args: RankArgs) -> Result<()> {
    let models = load_models(&args.models)?;
    let mut cfg = model_config(ctx, &args.pipeline, &args.models, &models)?;
    let corpus = Corpus::load(&args.corpus)?;
    let features = corpus_features(&corpus, args.features.as_deref(), &mut cfg)?;
    rank_into(&corpus, &features, &models, &cfg, &args.out)?;
    Ok(())
}

/// A dataset whose examples all sit in the test partition.
fn held_out(case: FeatureCase, rows: Vec<FeatureRow>, seed: u64, origin: &Path) -> Result<LabeledDataset> {
    let examples = rows
        .into_iter()
        .map(|r| {
            let label = r.label.ok_or_else(|| {
                CliError::Usage(format!(
                    "{}: evaluation needs labeled features, as written by train",
                    origin.display()
                ))
            })?;
            Ok(LabeledExample {
                id: r.review_id,
                features: r.values,
                label,
                helpful_votes: r.helpful_votes,
                synthetic: r.synthetic.unwrap_or(false),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = examples.len();
    Ok(LabeledDataset {
        case,
        examples,
        thresholds: Default::default(),
        split: Some(Split {
            train: Vec::new(),
            test: (0..n).collect(),
        }),
        seed,
    })
}

/// Writes the evaluation report and, with a classifier, the ROC table.
fn evaluate_into(
    dataset: &LabeledDataset,
    models: &TrainedModels,
    cfg: &RunConfig,
    ranking: Option<&RankedList>,
    out: &Path,
    roc: &Path,
) -> Result<EvalReport> {
    let mut report = evaluate_models(dataset, models, cfg.pipeline.echo())?;
    if let Some(list) = ranking {
        report.matching = list.matching;
    }
    let mut value = serde_json::to_value(&report).map_err(CoreError::from)?;
    value["config_echo"] = cfg.echo();
    write_json(out, &value)?;

    if let Some(c) = &report.classifier {
        let clf = models.classifier.as_classifier().expect("evaluated as a classifier");
        let labels: Vec<u8> = dataset.test().map(|e| e.label).collect();
        let probs = dataset
            .test()
            .map(|e| clf.predict_proba(&e.features))
            .collect::<Result<Vec<f64>, _>>()?;
        match roc_curve(&labels, &probs) {
            Ok(points) => write_atomic(roc, |w| Ok(write_roc_csv(w, &points)?))?,
            Err(CoreError::Degenerate(msg)) => log::warn!("no ROC table: {msg}"),
            Err(e) => return Err(e.into()),
        }
        print!("{}", class_table(&[(display_name(cfg.pipeline.classifier), c)]));
    }
    println!(
        "regressor mse ({}): high-quality test reviews {}, all test reviews {}",
        cfg.pipeline.mode.as_str(),
        fmt_opt(report.mse_high_quality),
        fmt_opt(report.mse_all)
    );
    for w in &report.warnings {
        log::warn!("{w}");
    }
    Ok(report)
}

fn evaluate(ctx: &Context, args: EvaluateArgs) -> Result<()> {
    let models = load_models(&args.models)?;
    let path = args.features.clone().unwrap_or_else(|| args.models.join(TEST_FEATURES_FILE));
    let (case, rows) = read_features(&path)?;
    let model_case = models.case()?;
    if case != model_case {
        return Err(mismatch(model_case, case));
    }
    let cfg = model_config(ctx, &args.pipeline, &args.models, &models)?;
    let dataset = held_out(case, rows, cfg.pipeline.seed, &path)?;
    evaluate_into(&dataset, &models, &cfg, None, &args.out, &args.roc)?;
    Ok(())
}

fn run(ctx: &Context, args: RunArgs) -> Result<()> {
    let cfg = ctx.config(&args.pipeline, PipelineConfig::default(), args.input.max_reject_fraction)?;
    let out = &args.out_dir;
    let corpus = read_corpus(&cfg, &args.input)?;
    write_corpus(&out.join("corpus.json"), &corpus, &cfg)?;
    let case = cfg.pipeline.case;
    let features = assemble_features(&corpus, case, &*lexicons(&cfg)?)?;
    let rows: Vec<FeatureRow> = features
        .iter()
        .zip(&corpus.reviews)
        .map(|((id, fv), r)| FeatureRow {
            review_id: id.clone(),
            values: fv.values.clone(),
            label: None,
            helpful_votes: Some(r.helpful_votes),
            synthetic: None,
        })
        .collect();
    write_features(&out.join("features.csv"), case, &rows, false)?;
    let (dataset, models) = train_into(&corpus, features.clone(), &cfg, &out.join("models"))?;
    let list = rank_into(&corpus, &features, &models, &cfg, &out.join("ranking.json"))?;
    evaluate_into(&dataset, &models, &cfg, Some(&list), &out.join("report.json"), &out.join("roc.csv"))?;
    Ok(())
}

fn generate(ctx: &Context, args: GenerateArgs) -> Result<()> {
    if args.n_reviews == 0 || args.reviews_per_product == 0 {
        return Err(CliError::Usage("n-reviews and reviews-per-product must be at least 1".into()));
    }
    if !(args.noise_sd.is_finite() && args.noise_sd >= 0.0) {
        return Err(CliError::Usage(format!("noise-sd {} must be finite and non-negative", args.noise_sd)));
    }
    let cfg = ctx.config(&PipelineFlags::default(), PipelineConfig::default(), None)?;
    let config = SyntheticConfig {
        n_reviews: args.n_reviews,
        reviews_per_product: args.reviews_per_product,
        noise_sd: args.noise_sd,
        seed: args.seed,
    };
    let data = generate_corpus(&config, &*lexicons(&cfg)?)?;
    let out_err = |source| CliError::Output {
        path: args.out_dir.clone(),
        source,
    };
    std::fs::create_dir_all(&args.out_dir).map_err(out_err)?;
    // written into a scratch directory, then renamed file by file
    let scratch = tempfile::tempdir_in(&args.out_dir).map_err(out_err)?;
    let written = data.write(scratch.path())?;
    let mut files = vec![written.reviews];
    files.extend(written.descriptions);
    files.extend(written.qa);
    for f in files {
        let name = f.file_name().expect("generated files are named");
        std::fs::rename(&f, args.out_dir.join(name)).map_err(out_err)?;
    }
    log::info!(
        "{} reviews over {} products written to {}",
        data.reviews.len(),
        data.products.len(),
        args.out_dir.display()
    );
    Ok(())
}
