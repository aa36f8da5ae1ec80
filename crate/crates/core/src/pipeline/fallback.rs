use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::dataset::{detokenize_word, word_tokens, Task};
use crate::fst::{is_tag, join_symbols, lookup, Symbol, Transducer, TAG_DELIMITER};
use crate::nn::Scalar;
use crate::seq2seq::Seq2SeqModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Fst,
    Neural,
}

/// Outputs from the transducer when it covers the input, otherwise from the
/// neural model together with its scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FallbackResult {
    pub outputs: Vec<String>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
}

fn dedup(items: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn neural<T: Scalar>(
    model: Option<&Seq2SeqModel<T>>,
    source: &[String],
    n_best: usize,
    render: impl Fn(&[String]) -> String,
) -> FallbackResult {
    let hyps = match model {
        Some(m) => m.beam_decode(source, n_best.max(1), n_best.max(1), None),
        None => Vec::new(),
    };
    FallbackResult {
        outputs: hyps.iter().map(|h| render(&h.tokens)).collect(),
        provenance: Provenance::Neural,
        scores: Some(hyps.iter().map(|h| h.score).collect()),
    }
}

fn from_fst(outputs: Vec<String>) -> Option<FallbackResult> {
    (!outputs.is_empty()).then_some(FallbackResult {
        outputs,
        provenance: Provenance::Fst,
        scores: None,
    })
}

fn render_tags(tokens: &[String]) -> String {
    tokens
        .iter()
        .map(|t| format!("{TAG_DELIMITER}{t}"))
        .collect()
}

/// Analyses of `word`: the analyzer's readings verbatim, or neural tag
/// sequences rendered as `+N+Sg+Gen`.
pub fn fallback_analyze<T: Scalar>(
    word: &str,
    analyzer: &Transducer,
    model: Option<&Seq2SeqModel<T>>,
    n_best: usize,
) -> FallbackResult {
    let readings = lookup(analyzer, word).into_iter().map(|a| join_symbols(&a));
    from_fst(dedup(readings))
        .unwrap_or_else(|| neural(model, &word_tokens(word), n_best, render_tags))
}

/// Lemmas of `word`: the analyzer's readings cut at the first tag, or the
/// neural lemmatizer's candidates.
pub fn fallback_lemmatize<T: Scalar>(
    word: &str,
    analyzer: &Transducer,
    model: Option<&Seq2SeqModel<T>>,
    n_best: usize,
) -> FallbackResult {
    let lemmas = lookup(analyzer, word).into_iter().map(|a| {
        let stem: Vec<Symbol> = a.into_iter().take_while(|s| !is_tag(s)).collect();
        join_symbols(&stem)
    });
    from_fst(dedup(lemmas))
        .unwrap_or_else(|| neural(model, &word_tokens(word), n_best, detokenize_word))
}

/// Splits `kissa+N+Sg+Gen` into the lemma and its tag tokens.
pub fn parse_analysis(analysis: &str) -> (String, Vec<String>) {
    match analysis.split_once(TAG_DELIMITER) {
        Some((lemma, tags)) => (
            lemma.to_string(),
            tags.split(TAG_DELIMITER)
                .filter(|t| !t.is_empty())
                .map(String::from)
                .collect(),
        ),
        None => (analysis.to_string(), Vec::new()),
    }
}

/// Surface forms for an analysis string: the generator's outputs in their
/// listed order, or the neural generator's candidates.
pub fn fallback_generate<T: Scalar>(
    analysis: &str,
    generator: &Transducer,
    model: Option<&Seq2SeqModel<T>>,
    n_best: usize,
) -> FallbackResult {
    let forms = lookup(generator, analysis)
        .into_iter()
        .map(|f| join_symbols(&f));
    from_fst(dedup(forms)).unwrap_or_else(|| {
        let (lemma, tags) = parse_analysis(analysis);
        let source: Vec<String> = word_tokens(&lemma).into_iter().chain(tags).collect();
        neural(model, &source, n_best, detokenize_word)
    })
}

/// An analyzer, its inverse and whichever task models are available.
pub struct Session<T> {
    analyzer: Transducer,
    generator: Transducer,
    models: BTreeMap<Task, Seq2SeqModel<T>>,
}

impl<T: Scalar> Session<T> {
    pub fn new(analyzer: Transducer, models: BTreeMap<Task, Seq2SeqModel<T>>) -> Self {
        Session {
            generator: analyzer.invert(),
            analyzer,
            models,
        }
    }

    pub fn model(&self, task: Task) -> Option<&Seq2SeqModel<T>> {
        self.models.get(&task)
    }

    pub fn query(&self, task: Task, input: &str, n_best: usize) -> FallbackResult {
        let model = self.model(task);
        match task {
            Task::Analyze => fallback_analyze(input, &self.analyzer, model, n_best),
            Task::Lemmatize => fallback_lemmatize(input, &self.analyzer, model, n_best),
            Task::Generate => fallback_generate(input, &self.generator, model, n_best),
        }
    }
}

/// One line of `run` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServeRecord {
    pub input: String,
    pub task: Task,
    #[serde(flatten)]
    pub result: FallbackResult,
}

/// Answers one query per non-empty input line, writing one JSON object per
/// line in input order. Returns the number of queries answered.
pub fn serve<T: Scalar, R: BufRead, W: Write>(
    session: &Session<T>,
    task: Task,
    n_best: usize,
    input: R,
    mut output: W,
) -> Result<usize, PipelineError> {
    let stdio = |e| PipelineError::io(std::path::Path::new("<stdio>"), e);
    let mut answered = 0;
    for line in input.lines() {
        let line = line.map_err(stdio)?;
        let word = line.trim_end_matches(['\r', '\n']);
        if word.trim().is_empty() {
            continue;
        }
        let record = ServeRecord {
            input: word.to_string(),
            task,
            result: session.query(task, word, n_best),
        };
        let json = serde_json::to_string(&record).expect("record serializes");
        writeln!(output, "{json}").map_err(stdio)?;
        answered += 1;
    }
    output.flush().map_err(stdio)?;
    Ok(answered)
}
