use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{PipelineConfig, PipelineError};
use crate::dataset::{
    cap_lemmas, entries_file_name, examples_file_name, materialize, parse_lexicon, read_entries,
    read_examples, split_lemmas, write_entries, write_examples, Expander, Split, Task, TaskExample,
};
use crate::eval::{build_report, records_tsv, EvalReport, PredictionRecord, ReportOptions};
use crate::fst::{parse_att, Transducer};
use crate::seq2seq::{
    load_checkpoint, log_to_jsonl, save_checkpoint, train, vocab_for, BatchObserver, Pair,
    Seq2SeqModel, TrainConfig,
};

fn create_dir(path: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(path).map_err(|e| PipelineError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<V: Serialize>(path: &Path, value: &V) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

pub fn read_analyzer(path: &Path) -> Result<Transducer, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    Ok(parse_att(&text)?)
}

fn required<'a>(
    value: &'a Option<std::path::PathBuf>,
    key: &str,
) -> Result<&'a Path, PipelineError> {
    value
        .as_deref()
        .ok_or_else(|| PipelineError::Usage(format!("`{key}` is not configured")))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// Written to `data/manifest.json` by [`extract`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractManifest {
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub lemma_cap: usize,
    pub exclusions: Vec<String>,
    pub lexicon_lemmas: usize,
    pub capped_lemmas: usize,
    pub truncated_lemmas: Vec<String>,
    pub warnings: Vec<String>,
    /// Lemma counts per part of speech and split.
    pub lemmas: BTreeMap<String, SplitCounts>,
    /// Row count per written file.
    pub rows: BTreeMap<String, usize>,
}

/// Caps, expands, filters, splits and materializes the lexicon, then writes
/// the task files, the entry sidecars and the manifest under `out/data`.
pub fn extract(config: &PipelineConfig) -> Result<ExtractManifest, PipelineError> {
    let analyzer = read_analyzer(required(&config.analyzer, "analyzer")?)?;
    let lexicon_path = required(&config.lexicon, "lexicon")?;
    let text = fs::read_to_string(lexicon_path).map_err(|e| PipelineError::io(lexicon_path, e))?;
    let lexicon = parse_lexicon(&text)?;
    let mut warnings = Vec::new();
    if lexicon.is_empty() {
        warn!("lexicon is empty");
        warnings.push("lexicon is empty".to_string());
    }

    let capped = cap_lemmas(&lexicon, config.lemma_cap, config.seed);
    let expander = Expander::new(&analyzer, &config.exclusions, config.max_path_len);
    let mut entries = Vec::new();
    let mut truncated = Vec::new();
    for entry in &capped {
        let expansion = expander.expand(entry)?;
        if expansion.truncated {
            truncated.push(format!("{}{}", entry.lemma, entry.pos));
        }
        if expansion.entries.is_empty() {
            warnings.push(format!("{}{} has no forms", entry.lemma, entry.pos));
        }
        entries.extend(expansion.entries);
    }
    if !truncated.is_empty() {
        warn!(
            "{} lemmas hit the path bound of {} arcs",
            truncated.len(),
            config.max_path_len
        );
    }
    let entries = config.filter.apply(entries);
    let (assignment, split_warnings) = split_lemmas(&capped, config.seed);
    warnings.extend(split_warnings);
    let data = materialize(&entries, &assignment)?;

    let dir = config.data_dir();
    create_dir(&dir)?;
    let mut rows = BTreeMap::new();
    for split in Split::ALL {
        let name = entries_file_name(split);
        write_entries(&dir.join(&name), data.entries(split))?;
        rows.insert(name, data.entries(split).len());
        for task in Task::ALL {
            let name = examples_file_name(task, split);
            write_examples(&dir.join(&name), data.examples(task, split))?;
            rows.insert(name, data.examples(task, split).len());
        }
    }
    let lemmas = assignment
        .parts_of_speech()
        .map(|pos| {
            let (train, val, test) = assignment.counts(pos);
            (pos.to_string(), SplitCounts { train, val, test })
        })
        .collect();
    let manifest = ExtractManifest {
        config: config.resolved(),
        seed: config.seed,
        lemma_cap: config.lemma_cap,
        exclusions: config.exclusions.clone(),
        lexicon_lemmas: lexicon.len(),
        capped_lemmas: capped.len(),
        truncated_lemmas: truncated,
        warnings,
        lemmas,
        rows,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    info!(
        "extracted {} entries from {} lemmas",
        entries.len(),
        capped.len()
    );
    Ok(manifest)
}

fn read_pairs(
    config: &PipelineConfig,
    task: Task,
    split: Split,
) -> Result<Vec<Pair>, PipelineError> {
    let path = config.data_dir().join(examples_file_name(task, split));
    Ok(read_examples(&path, task)?.iter().map(Pair::from).collect())
}

/// Written next to the checkpoint as `{task}.run.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub task: Task,
    pub config: BTreeMap<String, String>,
    pub train: TrainConfig,
    pub train_examples: usize,
    pub val_examples: usize,
    pub parameters: usize,
    pub best_step: usize,
    pub aborted: Option<String>,
}

/// Trains one task model on `data/{task}.train.tsv`, selecting on
/// `data/{task}.val.tsv`, and writes the checkpoint, the JSONL log and a
/// run summary under `out/models`. `observer` sees the training-file row
/// indices of every batch.
pub fn train_task(
    config: &PipelineConfig,
    task: Task,
    observer: Option<BatchObserver<'_>>,
) -> Result<TrainSummary, PipelineError> {
    let train_set = read_pairs(config, task, Split::Train)?;
    let val_set = read_pairs(config, task, Split::Val)?;
    if train_set.is_empty() {
        return Err(PipelineError::Data(format!("no {task} training examples")));
    }
    let (src, tgt) = vocab_for(&train_set)?;
    let model = Seq2SeqModel::<f64>::new(config.hyper(), src, tgt, task, config.seed)?;
    let parameters = model.num_parameters();
    let train_config = config.train_config();
    info!(
        "training {task}: {} examples, {parameters} parameters, {} steps",
        train_set.len(),
        train_config.steps
    );
    let outcome = train(model, &train_set, &val_set, &train_config, observer)?;

    let dir = config.models_dir();
    create_dir(&dir)?;
    save_checkpoint(&outcome.model, &config.checkpoint_path(task))?;
    let log_path = dir.join(format!("{task}.log.jsonl"));
    fs::write(&log_path, log_to_jsonl(&outcome.log))
        .map_err(|e| PipelineError::io(&log_path, e))?;
    let summary = TrainSummary {
        task,
        config: config.resolved(),
        train: train_config,
        train_examples: train_set.len(),
        val_examples: val_set.len(),
        parameters,
        best_step: outcome.best_step,
        aborted: outcome.aborted.clone(),
    };
    write_json(&dir.join(format!("{task}.run.json")), &summary)?;
    match outcome.aborted {
        Some(reason) => Err(PipelineError::Data(format!(
            "{task} training aborted: {reason}; last good checkpoint kept"
        ))),
        None => Ok(summary),
    }
}

/// Decodes the test split greedily and writes `eval/{task}.report.json`
/// and `eval/{task}.records.tsv`.
pub fn evaluate_task(config: &PipelineConfig, task: Task) -> Result<EvalReport, PipelineError> {
    let model: Seq2SeqModel<f64> = load_checkpoint(&config.checkpoint_path(task))?;
    if model.task() != task {
        return Err(PipelineError::Data(format!(
            "checkpoint holds a {} model, expected {task}",
            model.task()
        )));
    }
    let dir = config.data_dir();
    let examples = read_examples(&dir.join(examples_file_name(task, Split::Test)), task)?;
    let entries = read_entries(&dir.join(entries_file_name(Split::Test)))?;
    if examples.len() != entries.len() {
        return Err(PipelineError::Data(format!(
            "{} has {} rows but {} has {}",
            examples_file_name(task, Split::Test),
            examples.len(),
            entries_file_name(Split::Test),
            entries.len()
        )));
    }
    let mut records = Vec::with_capacity(examples.len());
    for (i, (ex, entry)) in examples.iter().zip(&entries).enumerate() {
        if *ex != TaskExample::from_entry(task, entry) {
            return Err(PipelineError::Data(format!(
                "test row {} does not match its entry",
                i + 1
            )));
        }
        let predicted = model.greedy_decode(&ex.source, None).tokens;
        let candidates = if config.n_best > 1 {
            model
                .beam_decode(&ex.source, config.n_best, config.n_best, None)
                .into_iter()
                .map(|h| h.tokens)
                .collect()
        } else {
            Vec::new()
        };
        let tags = TaskExample::from_entry(Task::Analyze, entry).target;
        records.push(PredictionRecord {
            task,
            source: ex.source.clone(),
            gold: ex.target.clone(),
            predicted,
            complexity: tags.len(),
            tags,
            candidates,
        });
    }
    let options = ReportOptions {
        top_k: config.top_k,
        min_support: config.min_support,
    };
    let report = build_report(task, &records, options)?;
    let out = config.eval_dir();
    create_dir(&out)?;
    write_json(&out.join(format!("{task}.report.json")), &report)?;
    let tsv_path = out.join(format!("{task}.records.tsv"));
    fs::write(&tsv_path, records_tsv(&records)?).map_err(|e| PipelineError::io(&tsv_path, e))?;
    info!(
        "{task}: accuracy {}%, {:?} {}",
        report.accuracy_display, report.error_metric, report.error_rate_display
    );
    Ok(report)
}
