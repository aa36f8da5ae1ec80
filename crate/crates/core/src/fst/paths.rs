use std::collections::BTreeMap;

use super::{StateId, Symbol, Transducer};

/// One accepting path with epsilons removed from both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct PathPair {
    pub input: Vec<Symbol>,
    pub output: Vec<Symbol>,
    /// Sum of arc weights plus the final weight; the minimum over all paths
    /// that produce the same pair.
    pub weight: f64,
}

#[derive(Clone, Debug, Default)]
pub struct PathSet {
    pub paths: Vec<PathPair>,
    /// Set when some path reached the arc bound while it could still be
    /// extended towards a final state.
    pub truncated: bool,
}

struct Walker<'t> {
    t: &'t Transducer,
    live: Vec<bool>,
    max_len: usize,
    found: BTreeMap<(Vec<Symbol>, Vec<Symbol>), f64>,
    truncated: bool,
    input: Vec<Symbol>,
    output: Vec<Symbol>,
}

impl Walker<'_> {
    fn visit(&mut self, state: StateId, depth: usize, weight: f64) {
        if let Some(fw) = self.t.final_weight(state) {
            let w = weight + fw;
            self.found
                .entry((self.input.clone(), self.output.clone()))
                .and_modify(|old| *old = old.min(w))
                .or_insert(w);
        }
        let t = self.t;
        for tr in t.outgoing(state) {
            if !self.live[tr.to] {
                continue;
            }
            if depth == self.max_len {
                self.truncated = true;
                return;
            }
            let push_in = !tr.input.is_epsilon();
            let push_out = !tr.output.is_epsilon();
            if push_in {
                self.input.push(tr.input.clone());
            }
            if push_out {
                self.output.push(tr.output.clone());
            }
            self.visit(tr.to, depth + 1, weight + tr.weight);
            if push_in {
                self.input.pop();
            }
            if push_out {
                self.output.pop();
            }
        }
    }
}

/// Lists every accepting path of at most `max_path_len` arcs, deduplicated
/// on (input, output) and sorted by input then output.
///
/// Machines with useful cycles are cut off at the bound and flagged as
/// truncated instead of looping.
pub fn enumerate_paths(t: &Transducer, max_path_len: usize) -> PathSet {
    assert!(max_path_len > 0, "max_path_len must be positive");
    let live = t.coaccessible();
    let mut walker = Walker {
        t,
        live,
        max_len: max_path_len,
        found: BTreeMap::new(),
        truncated: false,
        input: Vec::new(),
        output: Vec::new(),
    };
    if walker.live[t.start()] {
        walker.visit(t.start(), 0, 0.0);
    }
    PathSet {
        paths: walker
            .found
            .into_iter()
            .map(|((input, output), weight)| PathPair {
                input,
                output,
                weight,
            })
            .collect(),
        truncated: walker.truncated,
    }
}

/// Applies the machine to one word: the output sides of all accepting paths
/// whose input symbols spell `surface`. Multicharacter input symbols match
/// as substrings, so both character-level and tag-level inputs work. The
/// result is deduplicated and sorted; an empty result means no coverage.
pub fn lookup(t: &Transducer, surface: &str) -> Vec<Vec<Symbol>> {
    lookup_bounded(t, surface, super::DEFAULT_MAX_PATH_LEN)
}

pub fn lookup_bounded(t: &Transducer, surface: &str, max_path_len: usize) -> Vec<Vec<Symbol>> {
    #[allow(clippy::too_many_arguments)]
    fn walk(
        t: &Transducer,
        live: &[bool],
        state: StateId,
        rest: &str,
        depth: usize,
        max_len: usize,
        output: &mut Vec<Symbol>,
        found: &mut std::collections::BTreeSet<Vec<Symbol>>,
    ) {
        if rest.is_empty() && t.final_weight(state).is_some() {
            found.insert(output.clone());
        }
        if depth == max_len {
            return;
        }
        for tr in t.outgoing(state) {
            if !live[tr.to] {
                continue;
            }
            let next = if tr.input.is_epsilon() {
                rest
            } else if let Some(r) = rest.strip_prefix(tr.input.as_str()) {
                r
            } else {
                continue;
            };
            let pushed = !tr.output.is_epsilon();
            if pushed {
                output.push(tr.output.clone());
            }
            walk(t, live, tr.to, next, depth + 1, max_len, output, found);
            if pushed {
                output.pop();
            }
        }
    }

    let live = t.coaccessible();
    let mut found = std::collections::BTreeSet::new();
    if live[t.start()] {
        walk(
            t,
            &live,
            t.start(),
            surface,
            0,
            max_path_len,
            &mut Vec::new(),
            &mut found,
        );
    }
    found.into_iter().collect()
}
