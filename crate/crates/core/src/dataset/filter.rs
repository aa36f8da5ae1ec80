use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::MorphEntry;

/// Tag substrings whose presence drops the whole entry (clitics, focus
/// particles, non-standard usage and dialectal forms).
pub const DEFAULT_DROP: [&str; 4] = ["Clt", "Foc", "Use", "Dial"];
/// Tag substrings removed from otherwise kept entries (semantic classes).
pub const DEFAULT_STRIP: [&str; 1] = ["Sem"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TagFilter {
    pub drop: Vec<String>,
    pub strip: Vec<String>,
}

impl Default for TagFilter {
    fn default() -> Self {
        TagFilter {
            drop: DEFAULT_DROP.iter().map(|s| s.to_string()).collect(),
            strip: DEFAULT_STRIP.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl TagFilter {
    fn drops(&self, tag: &str) -> bool {
        self.drop.iter().any(|d| tag.contains(d.as_str()))
    }

    fn strips(&self, tag: &str) -> bool {
        self.strip.iter().any(|s| tag.contains(s.as_str()))
    }

    /// Drops entries carrying a drop-listed tag and removes strip-listed
    /// tags from the rest. Entries made identical by stripping are merged,
    /// keeping the first occurrence.
    pub fn apply(&self, entries: Vec<MorphEntry>) -> Vec<MorphEntry> {
        let mut seen = HashSet::new();
        entries
            .into_iter()
            .filter(|e| !e.tags.iter().any(|t| self.drops(t.as_str())))
            .map(|mut e| {
                e.tags.retain(|t| !self.strips(t.as_str()));
                e
            })
            .filter(|e| seen.insert(e.clone()))
            .collect()
    }
}

/// Applies the default tag filter.
pub fn filter_entries(entries: Vec<MorphEntry>) -> Vec<MorphEntry> {
    TagFilter::default().apply(entries)
}
