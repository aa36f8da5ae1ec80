//! Training data extraction: lexicon expansion through an analyzer, tag
//! filtering, lemma capping, lemma-level splitting and task materialization.

mod expand;
mod filter;
mod io;
mod materialize;
mod split;

pub use self::expand::{
    expand_lemma, expand_lemma_default, Expander, Expansion, DEFAULT_EXCLUSIONS,
};
pub use self::filter::{filter_entries, TagFilter, DEFAULT_DROP, DEFAULT_STRIP};
pub use self::io::{
    entries_file_name, examples_file_name, parse_lexicon, read_entries, read_examples,
    write_entries, write_examples,
};
pub use self::materialize::{
    detokenize_word, materialize, tag_token, word_tokens, Materialized, TaskExample, SPACE_TOKEN,
};
pub use self::split::{cap_lemmas, split_lemmas, SplitAssignment, DEFAULT_LEMMA_CAP};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fst::{FstError, Symbol, TAG_DELIMITER};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
    #[error("{path}: line {line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
    #[error("entry {lemma}{pos} has no split assignment")]
    Unassigned { lemma: String, pos: String },
    #[error(transparent)]
    Fst(#[from] FstError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl DatasetError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// One dictionary row: a lemma and its open-class part of speech.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LexiconEntry {
    pub lemma: String,
    pub pos: Symbol,
}

impl LexiconEntry {
    pub fn new(lemma: &str, pos: &str) -> Result<Self, String> {
        if lemma.is_empty() {
            return Err("empty lemma".into());
        }
        if !pos.starts_with(TAG_DELIMITER) || pos.len() < 2 {
            return Err(format!(
                "part of speech {pos:?} must start with '{TAG_DELIMITER}'"
            ));
        }
        Ok(LexiconEntry {
            lemma: lemma.to_string(),
            pos: Symbol::new(pos).map_err(|e| e.to_string())?,
        })
    }

    pub fn key(&self) -> (String, String) {
        (self.lemma.clone(), self.pos.as_str().to_string())
    }
}

/// One inflected form with its full analysis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MorphEntry {
    pub lemma: String,
    pub pos: Symbol,
    /// Tags after the part of speech, in analysis order.
    pub tags: Vec<Symbol>,
    pub surface: String,
}

impl MorphEntry {
    /// Number of tags including the part of speech.
    pub fn complexity(&self) -> usize {
        self.tags.len() + 1
    }

    /// `lemma+POS+Tag...`
    pub fn analysis(&self) -> String {
        let mut s = self.lemma.clone();
        s.push_str(self.pos.as_str());
        for t in &self.tags {
            s.push_str(t.as_str());
        }
        s
    }

    pub fn key(&self) -> (String, String) {
        (self.lemma.clone(), self.pos.as_str().to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Lemmatize,
    Analyze,
    Generate,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Lemmatize, Task::Analyze, Task::Generate];

    pub fn name(self) -> &'static str {
        match self {
            Task::Lemmatize => "lemmatize",
            Task::Analyze => "analyze",
            Task::Generate => "generate",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown task {s:?} (expected lemmatize, analyze or generate)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
