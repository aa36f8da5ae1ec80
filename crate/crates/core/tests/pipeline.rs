use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use morphforge::dataset::{
    entries_file_name, examples_file_name, read_entries, split_lemmas, Split, Task,
};
use morphforge::pipeline::toy::ToyLanguage;
use morphforge::pipeline::{
    evaluate_task, extract, train_task, PipelineConfig, PipelineError, EXIT_DATA, EXIT_IO,
};

fn small_toy() -> ToyLanguage {
    ToyLanguage::generate(11, 12, 12)
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        files.insert(
            path.file_name().unwrap().to_string_lossy().into_owned(),
            fs::read(&path).unwrap(),
        );
    }
    files
}

fn quick(config: &mut PipelineConfig) {
    config.steps = Some(40);
    config.valid_interval = Some(20);
    config.batch_size = Some(8);
    config.hidden = Some(16);
    config.embedding = Some(8);
}

#[test]
fn extract_row_counts_match_the_paradigm_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let toy = small_toy();
    let config = toy.write_fixture(dir.path()).unwrap();
    let manifest = extract(&config).unwrap();

    let (assignment, _) = split_lemmas(&toy.lexicon, config.seed);
    let mut want: BTreeMap<Split, usize> = BTreeMap::new();
    for entry in &toy.lexicon {
        let split = assignment.get(&entry.lemma, entry.pos.as_str()).unwrap();
        *want.entry(split).or_default() += ToyLanguage::forms(entry).len();
    }
    for split in Split::ALL {
        let n = want.get(&split).copied().unwrap_or(0);
        assert_eq!(manifest.rows[&entries_file_name(split)], n, "{split:?}");
        for task in Task::ALL {
            assert_eq!(manifest.rows[&examples_file_name(task, split)], n);
        }
    }
    assert_eq!(manifest.lexicon_lemmas, 24);
    assert!(manifest.truncated_lemmas.is_empty());
    assert_eq!(manifest.config["seed"], "3435");
    assert!(config.data_dir().join("manifest.json").exists());
}

#[test]
fn extract_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_toy().write_fixture(dir.path()).unwrap();
    extract(&config).unwrap();
    let first = snapshot(&config.data_dir());
    extract(&config).unwrap();
    assert_eq!(snapshot(&config.data_dir()), first);
    assert_eq!(first.len(), 13);
}

#[test]
fn empty_lexicon_gives_empty_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_toy().write_fixture(dir.path()).unwrap();
    let empty = dir.path().join("empty.tsv");
    fs::write(&empty, "").unwrap();
    config.lexicon = Some(empty);
    let manifest = extract(&config).unwrap();
    assert!(manifest.rows.values().all(|&n| n == 0));
    assert!(!manifest.warnings.is_empty());
    let err = train_task(&config, Task::Analyze, None).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_DATA);
}

#[test]
fn missing_inputs_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_toy().write_fixture(dir.path()).unwrap();
    config.analyzer = Some(dir.path().join("absent.att"));
    assert_eq!(extract(&config).unwrap_err().exit_code(), EXIT_IO);
    let config = small_toy().write_fixture(dir.path()).unwrap();
    let err = train_task(&config, Task::Lemmatize, None).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_IO, "{err}");
}

#[test]
fn train_and_eval_chain_writes_consistent_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_toy().write_fixture(dir.path()).unwrap();
    quick(&mut config);
    extract(&config).unwrap();
    let test_rows = read_entries(&config.data_dir().join(entries_file_name(Split::Test))).unwrap();

    for task in Task::ALL {
        let summary = train_task(&config, task, None).unwrap();
        assert_eq!(summary.train.steps, 40);
        let ckpt = fs::read(config.checkpoint_path(task)).unwrap();
        let log = fs::read(config.models_dir().join(format!("{task}.log.jsonl"))).unwrap();
        train_task(&config, task, None).unwrap();
        assert_eq!(fs::read(config.checkpoint_path(task)).unwrap(), ckpt);
        assert_eq!(
            fs::read(config.models_dir().join(format!("{task}.log.jsonl"))).unwrap(),
            log
        );

        let report = evaluate_task(&config, task).unwrap();
        assert_eq!(report.records, test_rows.len());
        let bins: usize = report.complexity_bins.iter().map(|b| b.count).sum();
        assert_eq!(bins, report.records);

        let tsv =
            fs::read_to_string(config.eval_dir().join(format!("{task}.records.tsv"))).unwrap();
        let correct = tsv
            .lines()
            .skip(1)
            .filter(|l| l.split('\t').nth(6) == Some("1"))
            .count();
        assert_eq!(
            correct as f64 / test_rows.len() as f64,
            report.exact_accuracy
        );
        assert!(config
            .eval_dir()
            .join(format!("{task}.report.json"))
            .exists());
    }
}

#[test]
fn eval_rejects_a_checkpoint_for_another_task() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_toy().write_fixture(dir.path()).unwrap();
    quick(&mut config);
    config.steps = Some(2);
    extract(&config).unwrap();
    train_task(&config, Task::Analyze, None).unwrap();
    fs::copy(
        config.checkpoint_path(Task::Analyze),
        config.checkpoint_path(Task::Generate),
    )
    .unwrap();
    let err = evaluate_task(&config, Task::Generate).unwrap_err();
    assert!(matches!(err, PipelineError::Data(_)), "{err}");
}

#[test]
fn training_batches_never_touch_test_lemmas() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_toy().write_fixture(dir.path()).unwrap();
    quick(&mut config);
    extract(&config).unwrap();
    let train_rows =
        read_entries(&config.data_dir().join(entries_file_name(Split::Train))).unwrap();
    let test_lemmas: BTreeSet<(String, String)> =
        read_entries(&config.data_dir().join(entries_file_name(Split::Test)))
            .unwrap()
            .iter()
            .map(|e| e.key())
            .collect();
    assert!(!test_lemmas.is_empty());
    for task in Task::ALL {
        let mut seen = BTreeSet::new();
        let mut audit = |batch: &[usize]| seen.extend(batch.iter().copied());
        train_task(&config, task, Some(&mut audit)).unwrap();
        assert!(!seen.is_empty());
        for i in seen {
            assert!(
                !test_lemmas.contains(&train_rows[i].key()),
                "{task} row {i}"
            );
        }
    }
}
