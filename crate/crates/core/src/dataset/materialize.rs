use std::collections::BTreeMap;

use super::{DatasetError, MorphEntry, Split, SplitAssignment, Task};
use crate::fst::{Symbol, TAG_DELIMITER};

/// One source/target token pair for a task. Tokens are single characters or
/// whole tags without the delimiter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskExample {
    pub task: Task,
    pub source: Vec<String>,
    pub target: Vec<String>,
}

/// Tag token as fed to the models: `+PxSg3` becomes `PxSg3`.
pub fn tag_token(tag: &Symbol) -> String {
    let s = tag.as_str();
    s.strip_prefix(TAG_DELIMITER).unwrap_or(s).to_string()
}

/// Token standing for a space inside a word, so tokens never contain
/// whitespace.
pub const SPACE_TOKEN: &str = "@_SPACE_@";

/// Splits a word into character tokens.
pub fn word_tokens(word: &str) -> Vec<String> {
    word.chars()
        .map(|c| {
            if c == ' ' {
                SPACE_TOKEN.to_string()
            } else {
                String::from(c)
            }
        })
        .collect()
}

/// Inverse of [`word_tokens`].
pub fn detokenize_word<S: AsRef<str>>(tokens: &[S]) -> String {
    tokens
        .iter()
        .map(|t| match t.as_ref() {
            SPACE_TOKEN => " ",
            other => other,
        })
        .collect()
}

impl TaskExample {
    pub fn from_entry(task: Task, entry: &MorphEntry) -> Self {
        let tags =
            || std::iter::once(tag_token(&entry.pos)).chain(entry.tags.iter().map(tag_token));
        let (source, target) = match task {
            Task::Lemmatize => (word_tokens(&entry.surface), word_tokens(&entry.lemma)),
            Task::Analyze => (word_tokens(&entry.surface), tags().collect()),
            Task::Generate => (
                word_tokens(&entry.lemma)
                    .into_iter()
                    .chain(tags())
                    .collect(),
                word_tokens(&entry.surface),
            ),
        };
        TaskExample {
            task,
            source,
            target,
        }
    }
}

/// Entries and task examples routed to their splits. For every split the
/// three task lists are index-aligned with `entries[split]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Materialized {
    pub entries: BTreeMap<Split, Vec<MorphEntry>>,
    pub examples: BTreeMap<(Task, Split), Vec<TaskExample>>,
}

impl Materialized {
    pub fn examples(&self, task: Task, split: Split) -> &[TaskExample] {
        self.examples.get(&(task, split)).map_or(&[], Vec::as_slice)
    }

    pub fn entries(&self, split: Split) -> &[MorphEntry] {
        self.entries.get(&split).map_or(&[], Vec::as_slice)
    }
}

/// Emits one example per task for each entry, in entry order.
pub fn materialize(
    entries: &[MorphEntry],
    split: &SplitAssignment,
) -> Result<Materialized, DatasetError> {
    let mut out = Materialized::default();
    for s in Split::ALL {
        out.entries.insert(s, Vec::new());
        for t in Task::ALL {
            out.examples.insert((t, s), Vec::new());
        }
    }
    for entry in entries {
        let s = split.get(&entry.lemma, entry.pos.as_str()).ok_or_else(|| {
            DatasetError::Unassigned {
                lemma: entry.lemma.clone(),
                pos: entry.pos.to_string(),
            }
        })?;
        out.entries.get_mut(&s).unwrap().push(entry.clone());
        for t in Task::ALL {
            out.examples
                .get_mut(&(t, s))
                .unwrap()
                .push(TaskExample::from_entry(t, entry));
        }
    }
    Ok(out)
}
