use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use serde::{Deserialize, Serialize};

use super::{LexiconEntry, Split};
use crate::rng::SeededRng;

/// Per-POS lemma limit for large dictionaries.
pub const DEFAULT_LEMMA_CAP: usize = 2100;

fn group_by_pos(lexicon: &[LexiconEntry]) -> BTreeMap<String, Vec<usize>> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, e) in lexicon.iter().enumerate() {
        groups
            .entry(e.pos.as_str().to_string())
            .or_default()
            .push(i);
    }
    groups
}

/// Keeps at most `cap` lemmas per part of speech. Oversized groups are
/// sampled uniformly without replacement from a stream derived from `seed`
/// and the POS; survivors keep their input order.
pub fn cap_lemmas(lexicon: &[LexiconEntry], cap: usize, seed: u64) -> Vec<LexiconEntry> {
    assert!(cap > 0, "lemma cap must be positive");
    let mut keep = vec![false; lexicon.len()];
    for (pos, mut indices) in group_by_pos(lexicon) {
        if indices.len() > cap {
            SeededRng::derive(seed, &format!("cap{pos}")).shuffle(&mut indices);
            indices.truncate(cap);
        }
        for i in indices {
            keep[i] = true;
        }
    }
    lexicon
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(e, _)| e.clone())
        .collect()
}

/// Lemma-level assignment of (lemma, POS) keys to train/val/test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub seed: u64,
    assignments: BTreeMap<String, BTreeMap<String, Split>>,
}

impl SplitAssignment {
    pub fn get(&self, lemma: &str, pos: &str) -> Option<Split> {
        self.assignments.get(pos)?.get(lemma).copied()
    }

    pub fn len(&self) -> usize {
        self.assignments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn parts_of_speech(&self) -> impl Iterator<Item = &str> {
        self.assignments.keys().map(String::as_str)
    }

    /// (train, val, test) sizes for one part of speech.
    pub fn counts(&self, pos: &str) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for s in self
            .assignments
            .get(pos)
            .into_iter()
            .flat_map(|m| m.values())
        {
            match s {
                Split::Train => c.0 += 1,
                Split::Val => c.1 += 1,
                Split::Test => c.2 += 1,
            }
        }
        c
    }

    /// (lemma, POS) keys assigned to `split`.
    pub fn keys_in(&self, split: Split) -> BTreeSet<(String, String)> {
        self.assignments
            .iter()
            .flat_map(|(pos, m)| {
                m.iter()
                    .filter(move |(_, &s)| s == split)
                    .map(move |(lemma, _)| (lemma.clone(), pos.clone()))
            })
            .collect()
    }
}

/// Held-out size for `n` lemmas: floor(0.15 n).
pub(crate) fn held_out(n: usize) -> usize {
    n * 15 / 100
}

/// Splits lemmas per part of speech: each POS group is shuffled under a
/// stream derived from `seed` and the POS, the first floor(0.15 n) go to
/// test, the next floor(0.15 n) to val and the rest to train. Duplicate keys
/// are assigned once. Groups with fewer than three lemmas go entirely to
/// train with a warning.
pub fn split_lemmas(lexicon: &[LexiconEntry], seed: u64) -> (SplitAssignment, Vec<String>) {
    let mut warnings = Vec::new();
    let mut by_pos: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for e in lexicon {
        if seen.insert(e.key()) {
            by_pos
                .entry(e.pos.as_str().to_string())
                .or_default()
                .push(e.lemma.clone());
        }
    }
    let mut assignments = BTreeMap::new();
    for (pos, mut lemmas) in by_pos {
        let n = lemmas.len();
        let mut map = BTreeMap::new();
        if n < 3 {
            let msg = format!("only {n} lemma(s) for {pos}; all assigned to train");
            warn!("{msg}");
            warnings.push(msg);
            map.extend(lemmas.into_iter().map(|l| (l, Split::Train)));
        } else {
            SeededRng::derive(seed, &format!("split{pos}")).shuffle(&mut lemmas);
            let k = held_out(n);
            for (i, lemma) in lemmas.into_iter().enumerate() {
                let split = if i < k {
                    Split::Test
                } else if i < 2 * k {
                    Split::Val
                } else {
                    Split::Train
                };
                map.insert(lemma, split);
            }
        }
        assignments.insert(pos, map);
    }
    (SplitAssignment { seed, assignments }, warnings)
}
