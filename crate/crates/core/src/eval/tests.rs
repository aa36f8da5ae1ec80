use std::collections::HashMap;

use proptest::prelude::*;

use super::*;

fn chars(s: &str) -> Vec<String> {
    s.chars().map(String::from).collect()
}

fn tags(s: &str) -> Vec<String> {
    s.split('+').map(String::from).collect()
}

fn analysis(gold: &str, pred: &str) -> PredictionRecord {
    let g = tags(gold);
    PredictionRecord {
        task: Task::Analyze,
        source: chars("x"),
        predicted: tags(pred),
        complexity: g.len(),
        tags: g.clone(),
        gold: g,
        candidates: vec![],
    }
}

fn word(task: Task, gold: &str, pred: &str, form: &str) -> PredictionRecord {
    let t = tags(form);
    PredictionRecord {
        task,
        source: chars("src"),
        gold: chars(gold),
        predicted: chars(pred),
        complexity: t.len(),
        tags: t,
        candidates: vec![],
    }
}

/// Distance straight from the recursive definition, memoized on suffixes.
fn recursive_distance(a: &[u8], b: &[u8], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    if let Some(&d) = memo.get(&(a.len(), b.len())) {
        return d;
    }
    let d = (recursive_distance(&a[1..], &b[1..], memo) + usize::from(a[0] != b[0]))
        .min(recursive_distance(&a[1..], b, memo) + 1)
        .min(recursive_distance(a, &b[1..], memo) + 1);
    memo.insert((a.len(), b.len()), d);
    d
}

fn all_sequences(max: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max {
        let mut next = Vec::new();
        for s in &frontier {
            for c in 0..3u8 {
                let mut t: Vec<u8> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn edit_distance_matches_recursive_definition() {
    let seqs = all_sequences(4);
    for a in &seqs {
        for b in &seqs {
            let mut memo = HashMap::new();
            assert_eq!(
                edit_distance(a, b),
                recursive_distance(a, b, &mut memo),
                "{a:?} {b:?}"
            );
        }
    }
}

#[test]
fn cer_examples() {
    assert_eq!(cer("kissa", "kissa").unwrap(), 0.0);
    assert!((cer("kissa", "kissan").unwrap() - 100.0 / 6.0).abs() < 1e-12);
    assert_eq!(format_percent(cer("kissa", "kissan").unwrap()), "16.67");
    assert_eq!(cer("", "abc").unwrap(), 100.0);
    assert_eq!(cer("abc", ""), Err(EvalError::EmptyReference));
}

#[test]
fn mer_examples() {
    assert_eq!(mer(&tags("N+Sg+Nom"), &tags("N+Sg+Nom")).unwrap(), 0.0);
    assert_eq!(
        format_percent(mer(&tags("N+Sg+Nom"), &tags("N+Sg+Gen")).unwrap()),
        "33.33"
    );
    assert_eq!(mer(&tags("A+B+C"), &tags("D+E+F")).unwrap(), 100.0);
    let empty: Vec<String> = vec![];
    assert_eq!(mer(&tags("N"), &empty), Err(EvalError::EmptyReference));
}

#[test]
fn accuracy_examples() {
    let mut recs = vec![analysis("N+Sg", "N+Sg"); 4];
    assert_eq!(exact_accuracy(&recs).unwrap(), 1.0);
    recs[2] = analysis("N+Sg", "N+Pl");
    assert_eq!(exact_accuracy(&recs).unwrap(), 0.75);
    assert_eq!(exact_accuracy(&[]), Err(EvalError::Empty));
}

#[test]
fn complexity_curve_examples() {
    let same = vec![analysis("N+Sg", "N+Sg"), analysis("N+Pl", "N+Sg")];
    let bins = complexity_curve(&same);
    assert_eq!(bins.len(), 1);
    assert_eq!(bins[0].relative, 1.0);

    let recs = vec![
        analysis("N+Sg", "N+Sg"),
        analysis("N+Sg+Gen+Px", "N+Sg+Gen+Px"),
        analysis("N+Sg+Gen+Px", "N+Sg+Gen"),
    ];
    let bins = complexity_curve(&recs);
    let pairs: Vec<(f64, f64)> = bins.iter().map(|b| (b.relative, b.accuracy)).collect();
    assert_eq!(pairs, vec![(0.5, 1.0), (1.0, 0.5)]);
    assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), 3);
}

#[test]
fn tag_confusion_examples() {
    let perfect = vec![analysis("N+Sg", "N+Sg")];
    assert_eq!(
        tag_confusion(&perfect, 10).unwrap(),
        TagConfusion::default()
    );

    let one = vec![analysis("N+Sg+Gen", "N+Sg+Nom")];
    let c = tag_confusion(&one, 10).unwrap();
    assert_eq!(c.missing, vec![("Gen".to_string(), 1)]);
    assert_eq!(c.wrong, vec![("Nom".to_string(), 1)]);

    let several = vec![
        analysis("N+Sg+Gen", "N+Sg+Nom"),
        analysis("N+Pl+Gen", "N+Sg+Nom"),
        analysis("V+Pl", "V"),
    ];
    let c = tag_confusion(&several, 2).unwrap();
    assert_eq!(
        c.missing,
        vec![("Gen".to_string(), 2), ("Pl".to_string(), 2)]
    );
    assert_eq!(c.wrong, vec![("Nom".to_string(), 2), ("Sg".to_string(), 1)]);

    let lemma = vec![word(Task::Lemmatize, "a", "a", "N")];
    assert_eq!(
        tag_confusion(&lemma, 3),
        Err(EvalError::WrongTask(Task::Lemmatize))
    );
}

#[test]
fn hardest_forms_examples() {
    let recs = vec![
        word(Task::Generate, "ab", "ab", "N+Sg"),
        word(Task::Generate, "ab", "ab", "N+Sg"),
        word(Task::Generate, "ab", "b", "N+Pl"),
        word(Task::Generate, "ab", "a", "N+Pl"),
        word(Task::Generate, "ab", "a", "V+Inf"),
    ];
    let ranked = hardest_forms(&recs, 10, 1);
    assert_eq!(ranked[0].tags, "N+Pl");
    assert_eq!(ranked[0].error_rate, 1.0);
    assert_eq!(ranked[1].tags, "V+Inf");
    assert_eq!(ranked[2].tags, "N+Sg");
    let supported = hardest_forms(&recs, 10, 2);
    assert!(supported.iter().all(|f| f.tags != "V+Inf"));
    assert_eq!(hardest_forms(&recs, 1, 1).len(), 1);
}

#[test]
fn percent_rounding_is_half_up() {
    assert_eq!(format_percent(12.345), "12.35");
    assert_eq!(format_percent(0.005), "0.01");
    assert_eq!(format_percent(100.0), "100.00");
    assert_eq!(format_percent(2.0 / 3.0 * 100.0), "66.67");
    assert_eq!(format_percent(0.0), "0.00");
}

#[test]
fn report_is_consistent() {
    let recs = vec![
        word(Task::Lemmatize, "kissa", "kissa", "N+Sg+Nom"),
        word(Task::Lemmatize, "kissa", "kisa", "N+Sg+Gen"),
        word(Task::Lemmatize, "talo", "talo", "N+Pl+Gen"),
    ];
    let r = build_report(Task::Lemmatize, &recs, ReportOptions::default()).unwrap();
    assert_eq!(r.error_metric, ErrorMetric::Cer);
    assert!((r.exact_accuracy - 2.0 / 3.0).abs() < 1e-15);
    assert!((weighted_bin_accuracy(&r.complexity_bins) - r.exact_accuracy).abs() < 1e-12);
    assert!(r.tag_confusion.is_none());
    assert_eq!(r.hardest_forms.as_ref().unwrap()[0].tags, "N+Sg+Gen");
    assert_eq!(r.accuracy_display, "66.67");
    let json = serde_json::to_string(&r).unwrap();
    assert_eq!(serde_json::from_str::<EvalReport>(&json).unwrap(), r);

    let tsv = records_tsv(&recs).unwrap();
    assert_eq!(tsv.lines().count(), 4);
    assert!(tsv.lines().nth(2).unwrap().ends_with("\t0\t20.00"));
}

#[test]
fn report_rejects_mixed_tasks() {
    let recs = vec![analysis("N", "N"), word(Task::Generate, "a", "a", "N")];
    assert_eq!(
        build_report(Task::Analyze, &recs, ReportOptions::default()),
        Err(EvalError::WrongTask(Task::Generate))
    );
}

#[test]
fn top_n_credit_is_separate() {
    let mut r = analysis("N+Sg", "N+Pl");
    r.candidates = vec![tags("N+Pl"), tags("N+Sg")];
    let report = build_report(Task::Analyze, &[r], ReportOptions::default()).unwrap();
    assert_eq!(report.exact_accuracy, 0.0);
    assert_eq!(report.correct_in_top_n, Some(1.0));
}

fn tag_seq() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop::sample::select(vec!["N", "Sg", "Pl", "Gen", "Nom"]),
        1..6,
    )
    .prop_map(|v| v.into_iter().map(String::from).collect())
}

proptest! {
    #[test]
    fn confusion_totals_match_records(pairs in prop::collection::vec((tag_seq(), tag_seq()), 1..20)) {
        let recs: Vec<PredictionRecord> = pairs
            .iter()
            .map(|(g, p)| PredictionRecord {
                task: Task::Analyze,
                source: vec!["x".into()],
                gold: g.clone(),
                predicted: p.clone(),
                tags: g.clone(),
                complexity: g.len(),
                candidates: vec![],
            })
            .collect();
        let c = tag_confusion(&recs, usize::MAX).unwrap();
        let missing: usize = c.missing.iter().map(|x| x.1).sum();
        let wrong: usize = c.wrong.iter().map(|x| x.1).sum();
        let want_missing: usize = recs.iter().map(|r| multiset_difference(&r.gold, &r.predicted).values().sum::<usize>()).sum();
        let want_wrong: usize = recs.iter().map(|r| multiset_difference(&r.predicted, &r.gold).values().sum::<usize>()).sum();
        prop_assert_eq!(missing, want_missing);
        prop_assert_eq!(wrong, want_wrong);
        let report = build_report(Task::Analyze, &recs, ReportOptions::default()).unwrap();
        prop_assert!((weighted_bin_accuracy(&report.complexity_bins) - report.exact_accuracy).abs() < 1e-12);
        let positive = recs.iter().filter(|r| r.error_rate().unwrap() > 0.0).count() as f64;
        prop_assert!((report.exact_accuracy - (1.0 - positive / recs.len() as f64)).abs() < 1e-15);
    }

    #[test]
    fn edit_distance_is_a_metric(a in prop::collection::vec(0u8..4, 0..8), b in prop::collection::vec(0u8..4, 0..8), c in prop::collection::vec(0u8..4, 0..8)) {
        prop_assert_eq!(edit_distance(&a, &b), edit_distance(&b, &a));
        prop_assert_eq!(edit_distance(&a, &a), 0);
        prop_assert!(edit_distance(&a, &c) <= edit_distance(&a, &b) + edit_distance(&b, &c));
    }
}
