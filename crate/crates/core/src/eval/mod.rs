//! Evaluation metrics and reports over prediction records.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{detokenize_word, Task};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no records to evaluate")]
    Empty,
    #[error("reference is empty")]
    EmptyReference,
    #[error("{0} records have no tag rankings")]
    WrongTask(Task),
    #[error("record {index}: exact match and zero error rate disagree")]
    Inconsistent { index: usize },
}

/// One decoded example with its gold output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub task: Task,
    pub source: Vec<String>,
    pub gold: Vec<String>,
    pub predicted: Vec<String>,
    /// Gold tag tokens of the entry, part of speech first.
    pub tags: Vec<String>,
    /// Number of tag tokens in the gold analysis.
    pub complexity: usize,
    /// Optional N-best candidates, best first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<Vec<String>>,
}

impl PredictionRecord {
    pub fn is_correct(&self) -> bool {
        self.predicted == self.gold
    }

    /// CER for word outputs, MER for analyses.
    pub fn error_rate(&self) -> Result<f64, EvalError> {
        match self.task {
            Task::Analyze => mer(&self.predicted, &self.gold),
            Task::Lemmatize | Task::Generate => cer(
                &detokenize_word(&self.predicted),
                &detokenize_word(&self.gold),
            ),
        }
    }
}

/// Unit-cost Levenshtein distance.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn rate<T: PartialEq>(hyp: &[T], reference: &[T]) -> Result<f64, EvalError> {
    if reference.is_empty() {
        return Err(EvalError::EmptyReference);
    }
    Ok(edit_distance(hyp, reference) as f64 / reference.len() as f64 * 100.0)
}

/// Character error rate in percent.
pub fn cer(hypothesis: &str, reference: &str) -> Result<f64, EvalError> {
    let h: Vec<char> = hypothesis.chars().collect();
    let r: Vec<char> = reference.chars().collect();
    rate(&h, &r)
}

/// Tag error rate in percent over whole tag tokens.
pub fn mer<S: AsRef<str>>(hyp_tags: &[S], gold_tags: &[S]) -> Result<f64, EvalError> {
    let h: Vec<&str> = hyp_tags.iter().map(AsRef::as_ref).collect();
    let g: Vec<&str> = gold_tags.iter().map(AsRef::as_ref).collect();
    rate(&h, &g)
}

pub fn exact_accuracy(records: &[PredictionRecord]) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    let correct = records.iter().filter(|r| r.is_correct()).count();
    Ok(correct as f64 / records.len() as f64)
}

/// Fraction of records whose gold output is among their candidates.
pub fn correct_in_top_n(records: &[PredictionRecord]) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    let hits = records
        .iter()
        .filter(|r| r.candidates.contains(&r.gold))
        .count();
    Ok(hits as f64 / records.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityBin {
    pub complexity: usize,
    /// `complexity / max complexity`
    pub relative: f64,
    pub count: usize,
    pub correct: usize,
    pub accuracy: f64,
}

/// Accuracy grouped by absolute complexity, ascending.
pub fn complexity_curve(records: &[PredictionRecord]) -> Vec<ComplexityBin> {
    let mut groups: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for r in records {
        let e = groups.entry(r.complexity).or_default();
        e.0 += 1;
        e.1 += usize::from(r.is_correct());
    }
    let max = groups.keys().next_back().copied().unwrap_or(0).max(1);
    groups
        .into_iter()
        .map(|(c, (count, correct))| ComplexityBin {
            complexity: c,
            relative: c as f64 / max as f64,
            count,
            correct,
            accuracy: correct as f64 / count as f64,
        })
        .collect()
}

/// Count-weighted mean of bin accuracies.
pub fn weighted_bin_accuracy(bins: &[ComplexityBin]) -> f64 {
    let total: usize = bins.iter().map(|b| b.count).sum();
    bins.iter()
        .map(|b| b.accuracy * b.count as f64)
        .sum::<f64>()
        / total as f64
}

/// Multiset difference `a ∖ b`.
pub fn multiset_difference<S: AsRef<str>>(a: &[S], b: &[S]) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, isize> = BTreeMap::new();
    for t in a {
        *counts.entry(t.as_ref().to_string()).or_default() += 1;
    }
    for t in b {
        if let Some(c) = counts.get_mut(t.as_ref()) {
            *c -= 1;
        }
    }
    counts
        .into_iter()
        .filter(|&(_, c)| c > 0)
        .map(|(t, c)| (t, c as usize))
        .collect()
}

fn ranked(counts: BTreeMap<String, usize>, k: usize) -> Vec<(String, usize)> {
    let mut v: Vec<(String, usize)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(k);
    v
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TagConfusion {
    /// Gold tags the prediction lacked.
    pub missing: Vec<(String, usize)>,
    /// Predicted tags absent from the gold analysis.
    pub wrong: Vec<(String, usize)>,
}

/// Top-`k` missing and wrong tags, by count and then lexicographically.
pub fn tag_confusion(records: &[PredictionRecord], k: usize) -> Result<TagConfusion, EvalError> {
    let mut missing: BTreeMap<String, usize> = BTreeMap::new();
    let mut wrong: BTreeMap<String, usize> = BTreeMap::new();
    for r in records {
        if r.task != Task::Analyze {
            return Err(EvalError::WrongTask(r.task));
        }
        for (t, c) in multiset_difference(&r.gold, &r.predicted) {
            *missing.entry(t).or_default() += c;
        }
        for (t, c) in multiset_difference(&r.predicted, &r.gold) {
            *wrong.entry(t).or_default() += c;
        }
    }
    Ok(TagConfusion {
        missing: ranked(missing, k),
        wrong: ranked(wrong, k),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormDifficulty {
    /// Tag combination joined with `+`.
    pub tags: String,
    pub error_rate: f64,
    pub errors: usize,
    pub support: usize,
}

/// Tag combinations ranked by error rate, then support, then name.
pub fn hardest_forms(
    records: &[PredictionRecord],
    k: usize,
    min_support: usize,
) -> Vec<FormDifficulty> {
    let mut groups: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in records {
        let e = groups.entry(r.tags.join("+")).or_default();
        e.0 += 1;
        e.1 += usize::from(!r.is_correct());
    }
    let mut out: Vec<FormDifficulty> = groups
        .into_iter()
        .filter(|&(_, (support, _))| support >= min_support)
        .map(|(tags, (support, errors))| FormDifficulty {
            tags,
            error_rate: errors as f64 / support as f64,
            errors,
            support,
        })
        .collect();
    out.sort_by(|a, b| {
        b.error_rate
            .total_cmp(&a.error_rate)
            .then_with(|| b.support.cmp(&a.support))
            .then_with(|| a.tags.cmp(&b.tags))
    });
    out.truncate(k);
    out
}

/// Fixed two-decimal rendering with ties rounded away from zero on the
/// decimal expansion, so 12.345 becomes "12.35".
pub fn format_percent(x: f64) -> String {
    let scaled = (x.abs() * 1e12).round() as i128;
    let cents = (scaled + 5_000_000_000) / 10_000_000_000;
    let sign = if x < 0.0 && cents != 0 { "-" } else { "" };
    format!("{sign}{}.{:02}", cents / 100, cents % 100)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorMetric {
    Cer,
    Mer,
}

impl fmt::Display for ErrorMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorMetric::Cer => "CER",
            ErrorMetric::Mer => "MER",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub task: Task,
    pub records: usize,
    pub exact_accuracy: f64,
    pub error_metric: ErrorMetric,
    /// Mean per-record error rate in percent.
    pub error_rate: f64,
    /// `exact_accuracy` in percent, two decimals.
    pub accuracy_display: String,
    pub error_rate_display: String,
    pub complexity_bins: Vec<ComplexityBin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag_confusion: Option<TagConfusion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardest_forms: Option<Vec<FormDifficulty>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_in_top_n: Option<f64>,
}

/// Ranking sizes for [`build_report`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReportOptions {
    pub top_k: usize,
    pub min_support: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            top_k: 10,
            min_support: 1,
        }
    }
}

/// Full metric suite for one task. Fails when records of other tasks are
/// mixed in or when a record's exact match disagrees with a zero error rate.
pub fn build_report(
    task: Task,
    records: &[PredictionRecord],
    options: ReportOptions,
) -> Result<EvalReport, EvalError> {
    if let Some(r) = records.iter().find(|r| r.task != task) {
        return Err(EvalError::WrongTask(r.task));
    }
    let accuracy = exact_accuracy(records)?;
    let mut total = 0.0;
    for (index, r) in records.iter().enumerate() {
        let e = r.error_rate()?;
        if (e == 0.0) != r.is_correct() {
            return Err(EvalError::Inconsistent { index });
        }
        total += e;
    }
    let error_rate = total / records.len() as f64;
    let with_candidates = records.iter().any(|r| !r.candidates.is_empty());
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        task,
        records: records.len(),
        exact_accuracy: accuracy,
        error_metric: match task {
            Task::Analyze => ErrorMetric::Mer,
            _ => ErrorMetric::Cer,
        },
        error_rate,
        accuracy_display: format_percent(accuracy * 100.0),
        error_rate_display: format_percent(error_rate),
        complexity_bins: complexity_curve(records),
        tag_confusion: match task {
            Task::Analyze => Some(tag_confusion(records, options.top_k)?),
            _ => None,
        },
        hardest_forms: match task {
            Task::Analyze => None,
            _ => Some(hardest_forms(records, options.top_k, options.min_support)),
        },
        correct_in_top_n: if with_candidates {
            Some(correct_in_top_n(records)?)
        } else {
            None
        },
    })
}

pub const RECORDS_HEADER: &str =
    "index\tsource\tgold\tpredicted\ttags\tcomplexity\tcorrect\terror_rate";

/// One line per record; token sequences are space-separated.
pub fn records_tsv(records: &[PredictionRecord]) -> Result<String, EvalError> {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for (i, r) in records.iter().enumerate() {
        writeln!(
            out,
            "{i}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.source.join(" "),
            r.gold.join(" "),
            r.predicted.join(" "),
            r.tags.join("+"),
            r.complexity,
            u8::from(r.is_correct()),
            format_percent(r.error_rate()?),
        )
        .expect("writing to a string");
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
