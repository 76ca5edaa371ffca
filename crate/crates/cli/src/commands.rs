use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde_json::{json, Value};

use revkit_core::annotation::{agreement_table, annotation_sets};
use revkit_core::corpus::{read_jsonl, write_record, CorpusStats, EditIntention, Revision, RevisionRecord};
use revkit_core::diff::{extract_revision_with, split_into_units, AlignConfig, UnitLevel};
use revkit_core::intent::eval::{evaluate_predictions, majority_baseline};
use revkit_core::intent::split::split_dataset;
use revkit_core::intent::{annotate_revision, labeled_examples, train, ClassifierModel, TrainConfig};
use revkit_core::metrics::distance::DistanceUnit;
use revkit_core::metrics::lm::{LanguageModel, NgramLm};
use revkit_core::metrics::{evaluate_corpus, EvalItem, EvalOptions, Metric};
use revkit_core::revise::{
    chain_lengths, check_template, iterativeness_report, run_iterative, Conditioning, ExecReviser, IntentRefresh,
    LoopTrace, Reviser, RuleConfig, RuleReviser, StoppingCriteria,
};
use revkit_core::text::SEGMENTER_VERSION;
use revkit_ingest::{
    build_chain, fetch_many, load_local_dir, read_seed_list, Cache, FetchPolicy, Fetcher, IngestError, RawVersion, Source,
    UreqTransport,
};

use crate::args::*;
use crate::output::{open, read_string, require_file, write_atomic, write_string_atomic, CliError, CliResult};

/// What a finished subcommand read and wrote, for the manifest.
pub struct Done {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub metadata: Value,
}

pub fn dispatch(cli: &Cli) -> CliResult<Done> {
    let seed = cli.global.seed;
    match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Extract(a) => extract(a),
        Command::Classify(a) => classify(a),
        Command::TrainIntent(a) => train_intent(a, seed),
        Command::Agreement(a) => agreement(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Revise(a) => revise(a),
        Command::Stats(a) => stats(a),
        Command::TrainLm(a) => train_lm(a),
    }
}

const CHUNK: usize = 512;

macro_rules! out {
    ($($t:tt)*) => {
        crate::output::emit(&format!($($t)*))?
    };
}

macro_rules! outln {
    ($($t:tt)*) => {
        crate::output::emit(&(format!($($t)*) + "\n"))?
    };
}

fn revisions(path: &Path) -> CliResult<impl Iterator<Item = CliResult<Revision>>> {
    require_file(path)?;
    let owned = path.to_path_buf();
    Ok(read_jsonl(open(path)?).map(move |r| r.map_err(|e| CliError::at(&owned, e))))
}

/// Streams `items` through `f` in parallel chunks, handing results to `sink`
/// in input order.
fn stream_map<T, U, F, S>(items: impl Iterator<Item = CliResult<T>>, f: F, mut sink: S) -> CliResult<()>
where
    T: Send,
    U: Send,
    F: Fn(T) -> CliResult<Vec<U>> + Sync,
    S: FnMut(U) -> CliResult<()>,
{
    let mut items = items.peekable();
    while items.peek().is_some() {
        let chunk: Vec<T> = items.by_ref().take(CHUNK).collect::<CliResult<_>>()?;
        let done: Vec<CliResult<Vec<U>>> = chunk.into_par_iter().map(&f).collect();
        for r in done {
            for u in r? {
                sink(u)?;
            }
        }
    }
    Ok(())
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::at(path, e)
}

// ---------------------------------------------------------------------------

fn ingest(a: &IngestArgs) -> CliResult<Done> {
    let source = match a.source {
        SourceArg::Wikipedia => Source::Wikipedia,
        SourceArg::Wikinews => Source::Wikinews,
        SourceArg::Arxiv => Source::ArXiv,
        SourceArg::Local => Source::LocalFile,
    };
    let policy = FetchPolicy {
        max_versions_per_doc: a.max_versions,
        request_rate_limit: a.rate_limit,
        max_attempts: a.max_attempts,
        ..FetchPolicy::default()
    };
    policy.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let mut inputs = Vec::new();
    let filter = match &a.seed_list {
        Some(p) => {
            require_file(p)?;
            inputs.push(p.clone());
            Some(read_seed_list(p).map_err(|e| CliError::at(p, e))?)
        }
        None => None,
    };
    let fetched: Vec<(String, Result<Vec<RawVersion>, IngestError>)> = if source == Source::LocalFile {
        let dir = a
            .input_dir
            .as_ref()
            .ok_or_else(|| CliError::Usage("--input-dir is required with --source local".into()))?;
        if !dir.is_dir() {
            return Err(CliError::at(dir, "input directory not found"));
        }
        let mut docs = load_local_dir(dir).map_err(|e| CliError::at(dir, e))?;
        if let Some(ids) = &filter {
            let keep: HashSet<&String> = ids.iter().collect();
            docs.retain(|id, _| keep.contains(id));
        }
        docs.into_iter()
            .map(|(id, mut v)| {
                let drop = v.len().saturating_sub(a.max_versions);
                v.drain(..drop);
                (id, Ok(v))
            })
            .collect()
    } else {
        let ids = filter.ok_or_else(|| CliError::Usage(format!("--seed-list is required with --source {:?}", a.source).to_lowercase()))?;
        let endpoint = a.endpoint.as_deref().or(source.endpoint()).expect("remote sources have endpoints");
        let cache = match &a.cache_dir {
            Some(d) => Some(Cache::new(d).map_err(|e| CliError::at(d, e))?),
            None => Cache::from_env().map_err(|e| CliError::data(e.to_string()))?,
        };
        let transport = UreqTransport::new(Duration::from_secs(a.timeout));
        let fetcher = Fetcher::new(Box::new(transport), policy, cache).map_err(|e| CliError::Usage(e.to_string()))?;
        fetch_many(&fetcher, source, endpoint, &ids)
    };

    let mut failed = Vec::new();
    let mut chains = Vec::new();
    for (id, r) in fetched {
        match r.and_then(build_chain) {
            Ok(c) => chains.push(c),
            Err(e) => {
                log::warn!("{id}: {e}");
                failed.push(json!({"id": id, "error": e.to_string()}));
            }
        }
    }
    if chains.is_empty() && !failed.is_empty() {
        return Err(CliError::data(format!("no document could be ingested ({} failed)", failed.len())));
    }
    let n_revisions: usize = chains.iter().map(|c| c.revisions.len()).sum();
    write_atomic(&a.out, |w| {
        for c in &chains {
            for r in &c.revisions {
                write_record(w, r).map_err(io_err(&a.out))?;
            }
        }
        Ok(())
    })?;
    eprintln!(
        "ingested {} document(s), {} revision(s); {} failed",
        chains.len(),
        n_revisions,
        failed.len()
    );
    if let Some(d) = &a.input_dir {
        inputs.push(d.clone());
    }
    Ok(Done {
        inputs,
        outputs: vec![a.out.clone()],
        metadata: json!({
            "source": a.source,
            "max_versions": a.max_versions,
            "paragraph_convention": "paragraphs separated by one blank line; headings, tables and rules end a paragraph",
            "documents": chains.len(),
            "revisions": n_revisions,
            "failed": failed,
        }),
    })
}

// ---------------------------------------------------------------------------

fn unit_record(rev: &Revision, unit: &str) -> Value {
    let mut v = serde_json::to_value(RevisionRecord::from(rev)).expect("serializable");
    v["unit"] = unit.into();
    v
}

fn extract(a: &ExtractArgs) -> CliResult<Done> {
    if !(0.0..=1.0).contains(&a.align_threshold) {
        return Err(CliError::Usage("--align-threshold must lie in [0, 1]".into()));
    }
    let cfg = AlignConfig {
        sentence_threshold: a.align_threshold,
        paragraph_threshold: a.align_threshold,
    };
    let input = revisions(&a.input)?;
    let mut written = 0usize;
    let mut unchanged = 0usize;
    let mut actions = 0usize;
    let granularity = a.granularity;
    write_atomic(&a.out, |w| {
        stream_map(
            input,
            |r: Revision| {
                if r.source_text == r.target_text {
                    return Ok(vec![None]);
                }
                let mut rev = extract_revision_with(&cfg, &r.doc_id, r.depth, &r.source_text, &r.target_text)
                    .map_err(|e| CliError::data(format!("{} depth {}: {e}", r.doc_id, r.depth)))?;
                rev.domain = r.domain;
                let n = rev.actions.len();
                let mut out = Vec::new();
                if matches!(granularity, GranularityArg::Paragraph | GranularityArg::Both) {
                    for u in split_into_units(&rev, UnitLevel::Paragraph, &cfg) {
                        out.push(Some((unit_record(&u, "paragraph"), 0)));
                    }
                }
                if matches!(granularity, GranularityArg::Sentence | GranularityArg::Both) {
                    for u in split_into_units(&rev, UnitLevel::Sentence, &cfg) {
                        out.push(Some((unit_record(&u, "sentence"), 0)));
                    }
                }
                if granularity == GranularityArg::Document {
                    let v = serde_json::to_value(RevisionRecord::from(&rev)).expect("serializable");
                    out.push(Some((v, 0)));
                }
                if let Some(Some((_, c))) = out.first_mut() {
                    *c = n;
                }
                Ok(out)
            },
            |item| {
                match item {
                    None => unchanged += 1,
                    Some((v, n)) => {
                        actions += n;
                        written += 1;
                        serde_json::to_writer(&mut *w, &v).map_err(|e| CliError::at(&a.out, e))?;
                        w.write_all(b"\n").map_err(io_err(&a.out))?;
                    }
                }
                Ok(())
            },
        )
    })?;
    if unchanged > 0 {
        log::warn!("skipped {unchanged} pair(s) with identical texts");
    }
    eprintln!("wrote {written} record(s), {actions} edit action(s)");
    Ok(Done {
        inputs: vec![a.input.clone()],
        outputs: vec![a.out.clone()],
        metadata: json!({
            "granularity": a.granularity,
            "segmenter": SEGMENTER_VERSION,
            "align_threshold": a.align_threshold,
            "align_tie_break": "matched at equality",
            "fusion_rule": "a maximal run of changed tokens between two LCS anchors in one aligned unit is one action; insert if the original is empty, delete if the revision is empty, else modify",
            "records": written,
            "skipped_identical": unchanged,
        }),
    })
}

// ---------------------------------------------------------------------------

fn load_model(path: &Path) -> CliResult<ClassifierModel> {
    require_file(path)?;
    let m = ClassifierModel::from_json(&read_string(path)?).map_err(|e| CliError::at(path, e))?;
    m.check_schema().map_err(|e| CliError::at(path, e))?;
    Ok(m)
}

fn classify(a: &ClassifyArgs) -> CliResult<Done> {
    let model = load_model(&a.model)?;
    let input = revisions(&a.input)?;
    let mut added = 0usize;
    write_atomic(&a.out, |w| {
        stream_map(
            input,
            |mut r: Revision| {
                let n = annotate_revision(&model, &mut r).map_err(|e| CliError::data(e.to_string()))?;
                Ok(vec![(r, n)])
            },
            |(r, n)| {
                added += n;
                write_record(w, &r).map_err(io_err(&a.out))
            },
        )
    })?;
    eprintln!("labeled {added} action(s)");
    Ok(Done {
        inputs: vec![a.model.clone(), a.input.clone()],
        outputs: vec![a.out.clone()],
        metadata: json!({
            "model_kind": model.kind,
            "feature_schema": model.schema_version,
            "other_floor": model.other_floor,
            "predictions": added,
        }),
    })
}

fn train_intent(a: &TrainIntentArgs, seed: u64) -> CliResult<Done> {
    let corpus: Vec<Revision> = revisions(&a.input)?.collect::<CliResult<_>>()?;
    let examples = labeled_examples(&corpus);
    if examples.is_empty() {
        return Err(CliError::at(&a.input, "no human-labeled edit actions"));
    }
    let split = split_dataset(examples, |e| e.label, seed).map_err(|e| CliError::at(&a.input, e))?;
    let cfg = TrainConfig {
        seed,
        max_epochs: a.max_epochs,
        learning_rate: a.learning_rate,
        l2: a.l2,
        other_floor: a.other_floor,
        ..TrainConfig::default()
    };
    let model = train(&split.train, &split.validation, &cfg).map_err(|e| CliError::at(&a.input, e))?;
    let train_gold: Vec<EditIntention> = split.train.iter().map(|e| e.label).collect();
    let test_gold: Vec<EditIntention> = split.test.iter().map(|e| e.label).collect();
    let pred: Vec<EditIntention> = split.test.iter().map(|e| model.predict_features(&e.features).label).collect();
    let report = evaluate_predictions(&test_gold, &pred);
    let (majority, baseline) = majority_baseline(&train_gold, &test_gold);
    let sizes = [split.train.len(), split.validation.len(), split.test.len()];
    outln!("split train/validation/test: {}/{}/{}", sizes[0], sizes[1], sizes[2]);
    out!("{}", report.render());
    outln!("majority baseline ({}) macro-F1 {baseline:.4}", majority.display_name());
    write_string_atomic(&a.out, &model.to_json())?;
    let summary = json!({
        "split": sizes,
        "test": report,
        "majority_label": majority,
        "majority_macro_f1": baseline,
        "epochs_trained": model.epochs_trained,
        "validation_macro_f1": model.validation_macro_f1,
    });
    let mut outputs = vec![a.out.clone()];
    if let Some(p) = &a.report {
        write_string_atomic(p, &(serde_json::to_string_pretty(&summary).expect("serializable") + "\n"))?;
        outputs.push(p.clone());
    }
    Ok(Done {
        inputs: vec![a.input.clone()],
        outputs,
        metadata: summary,
    })
}

// ---------------------------------------------------------------------------

fn agreement(a: &AgreementArgs) -> CliResult<Done> {
    let corpus: Vec<Revision> = revisions(&a.input)?.collect::<CliResult<_>>()?;
    let sets = annotation_sets(&corpus);
    if sets.is_empty() {
        return Err(CliError::at(&a.input, "no raw annotator labels (`raw_labels`) found"));
    }
    let table = agreement_table(&sets, a.by.is_some());
    match a.format {
        FormatArg::Json => outln!("{}", serde_json::to_string_pretty(&table.to_json()).expect("serializable")),
        FormatArg::Table | FormatArg::Tsv => out!("{}", table.render()),
    }
    Ok(Done {
        inputs: vec![a.input.clone()],
        outputs: vec![],
        metadata: json!({"items": sets.len(), "table": table.to_json()}),
    })
}

// ---------------------------------------------------------------------------

fn line_id(v: &Value, line: usize) -> String {
    match v.get("id").or_else(|| v.get("doc_id")) {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => line.to_string(),
    }
}

/// (id, source, text) per line: `{"id", "source", <text_key>}` objects or
/// revision records, whose after-text plays the role of `text_key`.
fn read_pairs(path: &Path, text_key: &str) -> CliResult<Vec<(String, String, Vec<String>)>> {
    require_file(path)?;
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(|e| CliError::at(path, format!("line {}: {e}", i + 1)))?;
        if v.get("before_revision").is_some() || v.get("before_sent").is_some() {
            let r = revkit_core::corpus::parse_record(i + 1, &line).map_err(|e| CliError::at(path, e))?;
            out.push((format!("{}#{}", r.doc_id, r.depth), r.source_text, vec![r.target_text]));
            continue;
        }
        let source = v.get("source").and_then(Value::as_str).unwrap_or_default().to_string();
        let texts: Vec<String> = match v.get(text_key) {
            Some(Value::String(s)) => vec![s.clone()],
            Some(Value::Array(xs)) => xs.iter().filter_map(|x| x.as_str().map(str::to_string)).collect(),
            _ => match v.get(text_key.trim_end_matches('s')) {
                Some(Value::String(s)) => vec![s.clone()],
                _ => return Err(CliError::at(path, format!("line {}: missing `{text_key}`", i + 1))),
            },
        };
        out.push((line_id(&v, i + 1), source, texts));
    }
    Ok(out)
}

fn load_lm(path: &Path) -> CliResult<NgramLm> {
    require_file(path)?;
    NgramLm::load(&read_string(path)?).map_err(|e| CliError::at(path, e))
}

fn unit(u: UnitArg) -> DistanceUnit {
    match u {
        UnitArg::Char => DistanceUnit::Char,
        UnitArg::Token => DistanceUnit::Token,
    }
}

fn evaluate(a: &EvaluateArgs) -> CliResult<Done> {
    let metrics = Metric::parse_list(&a.metrics).map_err(|e| CliError::Usage(e.to_string()))?;
    let needs_refs = metrics.iter().any(|m| matches!(m, Metric::Sari | Metric::Bleu | Metric::Rouge));
    if needs_refs && a.reference.is_none() {
        return Err(CliError::Usage("--ref is required for sari, bleu and rouge".into()));
    }
    if metrics.contains(&Metric::Slor) && a.lm.is_none() {
        return Err(CliError::Usage("--lm is required for slor".into()));
    }
    let preds = read_pairs(&a.input, "prediction")?;
    let mut inputs = vec![a.input.clone()];
    let mut refs: HashMap<String, Vec<String>> = HashMap::new();
    if let Some(rp) = &a.reference {
        for (id, _, texts) in read_pairs(rp, "references")? {
            refs.entry(id).or_default().extend(texts);
        }
        inputs.push(rp.clone());
    }
    let lm = a.lm.as_deref().map(load_lm).transpose()?;
    if let Some(p) = &a.lm {
        inputs.push(p.clone());
    }
    let empty = Vec::new();
    let mut items = Vec::with_capacity(preds.len());
    for (id, source, texts) in &preds {
        let r = match refs.get(id) {
            Some(r) => r,
            None if a.reference.is_some() => return Err(CliError::data(format!("no reference for prediction {id:?}"))),
            None => &empty,
        };
        items.push(EvalItem {
            source,
            prediction: texts.first().map(String::as_str).unwrap_or_default(),
            references: r.iter().map(String::as_str).collect(),
        });
    }
    let opts = EvalOptions {
        metrics,
        lm: lm.as_ref().map(|l| l as &dyn LanguageModel),
        distance_unit: unit(a.distance_unit),
    };
    let rep = evaluate_corpus(&items, &opts).map_err(|e| CliError::data(e.to_string()))?;
    let mut corpus = serde_json::Map::new();
    if let Some(b) = rep.corpus_bleu {
        corpus.insert("BLEU".into(), b.into());
    }
    if let Some([r1, r2, rl]) = rep.corpus_rouge {
        corpus.insert("R-1".into(), r1.into());
        corpus.insert("R-2".into(), r2.into());
        corpus.insert("R-L".into(), rl.into());
    }
    let report = json!({
        "items": rep.items,
        "tokenization": rep.tokenization,
        "sentence_level": rep.sentence_mean,
        "corpus_level": corpus,
    });
    if let Value::Object(m) = &report["sentence_level"] {
        for (k, v) in m {
            if let Some(x) = v.as_f64() {
                outln!("{k:<20}{x:>10.2}");
            }
        }
    }
    for (k, v) in &corpus {
        outln!("{:<20}{:>10.2}", format!("corpus {k}"), v.as_f64().unwrap_or(f64::NAN));
    }
    let mut outputs = Vec::new();
    if let Some(o) = &a.out {
        write_string_atomic(o, &(serde_json::to_string_pretty(&report).expect("serializable") + "\n"))?;
        outputs.push(o.clone());
    }
    Ok(Done {
        inputs,
        outputs,
        metadata: json!({"tokenization": rep.tokenization, "items": rep.items}),
    })
}

// ---------------------------------------------------------------------------

struct Doc {
    id: String,
    text: String,
    intents: Option<Vec<EditIntention>>,
}

fn parse_intents(list: &[&str]) -> Result<Vec<EditIntention>, String> {
    list.iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<EditIntention>().map_err(|e| e.to_string()))
        .collect()
}

fn read_docs(path: &Path) -> CliResult<Vec<Doc>> {
    require_file(path)?;
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |m: String| CliError::at(path, format!("line {}: {m}", i + 1));
        let v: Value = serde_json::from_str(&line).map_err(|e| at(e.to_string()))?;
        let text = match (v.get("text"), v.get("before_revision")) {
            (Some(Value::String(t)), _) | (None, Some(Value::String(t))) => t.clone(),
            _ => return Err(at("expected a `text` field".into())),
        };
        let intents = match v.get("intents") {
            Some(Value::Array(xs)) => {
                let names: Vec<&str> = xs.iter().filter_map(Value::as_str).collect();
                Some(parse_intents(&names).map_err(at)?)
            }
            _ => None,
        };
        out.push(Doc {
            id: line_id(&v, i + 1),
            text,
            intents,
        });
    }
    Ok(out)
}

fn revise(a: &ReviseArgs) -> CliResult<Done> {
    if a.max_depth == 0 {
        return Err(CliError::Usage("--max-depth must be at least 1".into()));
    }
    check_template(&a.intent_template).map_err(|e| CliError::Usage(e.to_string()))?;
    let reviser: Box<dyn Reviser> = if a.reviser == "rules" {
        Box::new(RuleReviser::new(RuleConfig::default()).map_err(|e| CliError::Usage(e.to_string()))?)
    } else if let Some(cmd) = a.reviser.strip_prefix("exec:") {
        Box::new(ExecReviser::new(cmd, Some(&a.intent_template)).map_err(|e| CliError::Usage(e.to_string()))?)
    } else {
        return Err(CliError::Usage(format!("unknown reviser {:?}; expected `rules` or `exec:COMMAND`", a.reviser)));
    };
    let default_intents = match &a.intents {
        Some(s) => Some(parse_intents(&s.split(',').collect::<Vec<_>>()).map_err(CliError::Usage)?),
        None => None,
    };
    let metrics = match &a.metrics {
        Some(s) => Some(Metric::parse_list(s).map_err(|e| CliError::Usage(e.to_string()))?),
        None => None,
    };
    if metrics.as_ref().is_some_and(|m| m.contains(&Metric::Slor)) && a.lm.is_none() {
        return Err(CliError::Usage("--lm is required for slor".into()));
    }
    let lm = a.lm.as_deref().map(load_lm).transpose()?;
    let docs = read_docs(&a.input)?;
    let human = match &a.human {
        Some(p) => Some(chain_lengths(&revisions(p)?.collect::<CliResult<Vec<_>>>()?)),
        None => None,
    };
    let refresh = match a.intent_refresh {
        RefreshArg::Once => IntentRefresh::Once,
        RefreshArg::Every => IntentRefresh::Every,
    };

    let run_doc = |d: &Doc| {
        let criteria = StoppingCriteria {
            max_depth: a.max_depth,
            min_edit_distance: a.min_distance,
            distance_unit: unit(a.distance_unit),
            predicates: Vec::new(),
            metrics: metrics.as_ref().map(|m| EvalOptions {
                metrics: m.clone(),
                lm: lm.as_ref().map(|l| l as &dyn LanguageModel),
                distance_unit: unit(a.distance_unit),
            }),
        };
        let intents = d.intents.clone().or_else(|| default_intents.clone());
        let conditioning = Conditioning {
            source: intents.as_ref().map(|v| v as &dyn revkit_core::revise::IntentSource),
            refresh,
        };
        run_iterative(&d.id, reviser.as_ref(), &d.text, &criteria, &conditioning)
    };
    let width = a.concurrency.unwrap_or_else(rayon::current_num_threads).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(width)
        .build()
        .map_err(|e| CliError::data(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| docs.par_iter().map(run_doc).collect());

    let mut traces: Vec<LoopTrace> = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(t) => traces.push(t),
            Err(e) => {
                log::error!("{e}");
                failures.push(json!({"id": e.doc_id, "depth": e.depth, "error": e.source.to_string()}));
            }
        }
    }
    let mut outputs = Vec::new();
    if let Some(p) = &a.trace_out {
        write_atomic(p, |w| {
            for t in &traces {
                serde_json::to_writer(&mut *w, t).map_err(|e| CliError::at(p, e))?;
                w.write_all(b"\n").map_err(io_err(p))?;
            }
            Ok(())
        })?;
        outputs.push(p.clone());
    }
    if let Some(p) = &a.out {
        let by_id: BTreeMap<&str, &str> = docs.iter().map(|d| (d.id.as_str(), d.text.as_str())).collect();
        write_atomic(p, |w| {
            for t in &traces {
                let text = t.final_text().unwrap_or(by_id[t.doc_id.as_str()]);
                serde_json::to_writer(&mut *w, &json!({"id": t.doc_id, "text": text})).map_err(|e| CliError::at(p, e))?;
                w.write_all(b"\n").map_err(io_err(p))?;
            }
            Ok(())
        })?;
        outputs.push(p.clone());
    }
    let mut report = iterativeness_report(&traces);
    if let Some(h) = &human {
        report.add_series("human", h);
    }
    out!("{}", report.render());
    if let Some(p) = &a.report_svg {
        write_string_atomic(p, &report.to_svg())?;
        outputs.push(p.clone());
    }
    let mut reasons: BTreeMap<String, usize> = BTreeMap::new();
    for t in &traces {
        *reasons.entry(format!("{:?}", t.stop_reason)).or_default() += 1;
    }
    let mut inputs = vec![a.input.clone()];
    inputs.extend(a.human.clone());
    inputs.extend(a.lm.clone());
    let done = Done {
        inputs,
        outputs,
        metadata: json!({
            "reviser": reviser.name(),
            "intent_template": a.intent_template,
            "intent_refresh": a.intent_refresh,
            "documents": docs.len(),
            "stop_reasons": reasons,
            "failed": failures,
        }),
    };
    if !failures.is_empty() {
        return Err(CliError::data(format!(
            "reviser failed on {} of {} document(s)",
            failures.len(),
            docs.len()
        )));
    }
    Ok(done)
}

// ---------------------------------------------------------------------------

fn stats(a: &StatsArgs) -> CliResult<Done> {
    let mut st = CorpusStats::default();
    let mut depths: BTreeMap<String, BTreeSet<u32>> = BTreeMap::new();
    for r in revisions(&a.input)? {
        let r = r?;
        st.add(&r);
        depths.entry(r.doc_id.clone()).or_default().insert(r.depth);
    }
    let docs = depths.len();
    let mean = if docs == 0 {
        0.0
    } else {
        depths.values().map(|s| s.len()).sum::<usize>() as f64 / docs as f64
    };
    match a.format {
        FormatArg::Table => {
            out!("{}", st.render_table());
            outln!("Documents: {docs}; mean revisions per document: {mean:.2}");
        }
        FormatArg::Tsv => out!("{}", st.render_tsv()),
        FormatArg::Json => {
            let mut v = st.to_json();
            v["documents"] = docs.into();
            v["mean_revisions_per_document"] = mean.into();
            outln!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
        }
    }
    Ok(Done {
        inputs: vec![a.input.clone()],
        outputs: vec![],
        metadata: json!({"documents": docs}),
    })
}

fn train_lm(a: &TrainLmArgs) -> CliResult<Done> {
    require_file(&a.input)?;
    let text = read_string(&a.input)?;
    let jsonl = text.lines().find(|l| !l.trim().is_empty()).is_some_and(|l| l.trim_start().starts_with('{'));
    let docs: Vec<String> = if jsonl {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for r in read_jsonl(text.as_bytes()) {
            let r = r.map_err(|e| CliError::at(&a.input, e))?;
            for t in [r.source_text, r.target_text] {
                if seen.insert(t.clone()) {
                    out.push(t);
                }
            }
        }
        out
    } else {
        text.lines().filter(|l| !l.trim().is_empty()).map(str::to_string).collect()
    };
    let lm = NgramLm::train(docs.iter().map(String::as_str), a.order).map_err(|e| CliError::Usage(e.to_string()))?;
    write_string_atomic(&a.out, &lm.save())?;
    eprintln!("trained order-{} model on {} text(s)", a.order, docs.len());
    Ok(Done {
        inputs: vec![a.input.clone()],
        outputs: vec![a.out.clone()],
        metadata: json!({"order": a.order, "texts": docs.len()}),
    })
}
