//! Finite-state transducers: the tab-separated text format, inversion,
//! epsilon-aware composition, bounded path enumeration and word lookup.
//!
//! Machines are immutable once built. Weights are parsed and summed along
//! paths but no operation here makes decisions based on them.

mod att;
mod compose;
mod paths;
mod pattern;

pub use self::att::{parse_att, serialize_att};
pub use self::compose::compose;
pub use self::paths::{enumerate_paths, lookup, lookup_bounded, PathPair, PathSet};
pub use self::pattern::{build_pattern, excluded_symbols, is_tag, TAG_DELIMITER};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Upper bound on arcs per path used when the caller does not supply one.
pub const DEFAULT_MAX_PATH_LEN: usize = 128;

/// Canonical epsilon text.
pub const EPSILON: &str = "@0@";
/// Alternative epsilon spelling accepted on input.
pub const EPSILON_LONG: &str = "@_EPSILON_SYMBOL_@";

#[derive(Debug, Error, PartialEq)]
pub enum FstError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("malformed transducer: {0}")]
    Structure(String),
    #[error("invalid input: {0}")]
    Input(String),
}

/// A single transducer label: one character, a multicharacter tag such as
/// `+Sg`, or epsilon. Comparison is exact and case-sensitive.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(String);

impl Symbol {
    /// Builds a symbol; both epsilon spellings map to the canonical one.
    /// Empty text is rejected.
    pub fn new(text: impl Into<String>) -> Result<Self, FstError> {
        let text = text.into();
        if text.is_empty() {
            return Err(FstError::Input("empty symbol text".into()));
        }
        if text == EPSILON_LONG {
            return Ok(Self::epsilon());
        }
        Ok(Symbol(text))
    }

    pub fn epsilon() -> Self {
        Symbol(EPSILON.to_string())
    }

    pub fn from_char(c: char) -> Self {
        Symbol(c.to_string())
    }

    pub fn is_epsilon(&self) -> bool {
        self.0 == EPSILON
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Spells a word one character per symbol.
    pub fn spell(word: &str) -> Vec<Symbol> {
        word.chars().map(Symbol::from_char).collect()
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Concatenates symbol texts, skipping epsilons.
pub fn join_symbols(symbols: &[Symbol]) -> String {
    symbols
        .iter()
        .filter(|s| !s.is_epsilon())
        .map(Symbol::as_str)
        .collect()
}

pub type StateId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub from: StateId,
    pub to: StateId,
    pub input: Symbol,
    pub output: Symbol,
    pub weight: f64,
}

impl Transition {
    pub fn new(from: StateId, to: StateId, input: Symbol, output: Symbol, weight: f64) -> Self {
        Transition {
            from,
            to,
            input,
            output,
            weight,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Transducer {
    num_states: usize,
    start: StateId,
    finals: BTreeMap<StateId, f64>,
    transitions: Vec<Transition>,
    // outgoing transition indices per state
    outgoing: Vec<Vec<usize>>,
}

impl Transducer {
    /// Validates and indexes a machine. Every transition and final state
    /// must reference a state below `num_states`, and the start state must
    /// exist.
    pub fn from_parts(
        num_states: usize,
        start: StateId,
        finals: BTreeMap<StateId, f64>,
        transitions: Vec<Transition>,
    ) -> Result<Self, FstError> {
        if start >= num_states {
            return Err(FstError::Structure(format!(
                "start state {start} does not exist ({num_states} states)"
            )));
        }
        if let Some(&f) = finals.keys().find(|&&f| f >= num_states) {
            return Err(FstError::Structure(format!(
                "final state {f} does not exist"
            )));
        }
        let mut outgoing = vec![Vec::new(); num_states];
        for (i, t) in transitions.iter().enumerate() {
            if t.from >= num_states || t.to >= num_states {
                return Err(FstError::Structure(format!(
                    "transition {}->{} references a missing state",
                    t.from, t.to
                )));
            }
            outgoing[t.from].push(i);
        }
        Ok(Transducer {
            num_states,
            start,
            finals,
            transitions,
            outgoing,
        })
    }

    /// A single non-final start state: the empty relation.
    pub fn empty() -> Self {
        Transducer::from_parts(1, 0, BTreeMap::new(), Vec::new()).expect("valid")
    }

    /// Identity acceptor for a finite set of symbol strings, built as a trie.
    pub fn acceptor<I, W>(words: I) -> Self
    where
        I: IntoIterator<Item = W>,
        W: AsRef<[Symbol]>,
    {
        let mut num_states = 1;
        let mut transitions: Vec<Transition> = Vec::new();
        let mut children: Vec<BTreeMap<Symbol, StateId>> = vec![BTreeMap::new()];
        let mut finals = BTreeMap::new();
        for word in words {
            let mut state = 0;
            for sym in word.as_ref() {
                state = match children[state].get(sym) {
                    Some(&next) => next,
                    None => {
                        let next = num_states;
                        num_states += 1;
                        children.push(BTreeMap::new());
                        children[state].insert(sym.clone(), next);
                        transitions.push(Transition {
                            from: state,
                            to: next,
                            input: sym.clone(),
                            output: sym.clone(),
                            weight: 0.0,
                        });
                        next
                    }
                };
            }
            finals.insert(state, 0.0);
        }
        Transducer::from_parts(num_states, 0, finals, transitions).expect("trie is well formed")
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn finals(&self) -> &BTreeMap<StateId, f64> {
        &self.finals
    }

    pub fn final_weight(&self, state: StateId) -> Option<f64> {
        self.finals.get(&state).copied()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn outgoing(&self, state: StateId) -> impl Iterator<Item = &Transition> + '_ {
        self.outgoing[state]
            .iter()
            .map(move |&i| &self.transitions[i])
    }

    /// Every non-epsilon symbol on either side of any transition.
    pub fn alphabet(&self) -> BTreeSet<Symbol> {
        self.transitions
            .iter()
            .flat_map(|t| [&t.input, &t.output])
            .filter(|s| !s.is_epsilon())
            .cloned()
            .collect()
    }

    /// Swaps input and output on every transition.
    pub fn invert(&self) -> Transducer {
        let transitions = self
            .transitions
            .iter()
            .map(|t| Transition {
                input: t.output.clone(),
                output: t.input.clone(),
                ..t.clone()
            })
            .collect();
        Transducer {
            transitions,
            ..self.clone()
        }
    }

    /// States from which some final state is reachable.
    pub fn coaccessible(&self) -> Vec<bool> {
        let mut incoming = vec![Vec::new(); self.num_states];
        for t in &self.transitions {
            incoming[t.to].push(t.from);
        }
        let mut seen = vec![false; self.num_states];
        let mut stack: Vec<StateId> = self.finals.keys().copied().collect();
        for &f in &stack {
            seen[f] = true;
        }
        while let Some(s) = stack.pop() {
            for &p in &incoming[s] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// States reachable from the start state.
    pub fn accessible(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states];
        seen[self.start] = true;
        let mut stack = vec![self.start];
        while let Some(s) = stack.pop() {
            for t in self.outgoing(s) {
                if !seen[t.to] {
                    seen[t.to] = true;
                    stack.push(t.to);
                }
            }
        }
        seen
    }

    /// Removes states that are not both accessible and coaccessible. The
    /// start state is always kept.
    pub fn trim(&self) -> Transducer {
        let acc = self.accessible();
        let coacc = self.coaccessible();
        let mut remap = vec![None; self.num_states];
        let mut next = 0;
        for s in 0..self.num_states {
            if s == self.start || (acc[s] && coacc[s]) {
                remap[s] = Some(next);
                next += 1;
            }
        }
        let transitions = self
            .transitions
            .iter()
            .filter_map(|t| {
                let from = remap[t.from]?;
                let to = remap[t.to]?;
                (coacc[t.to] && acc[t.from]).then(|| Transition {
                    from,
                    to,
                    ..t.clone()
                })
            })
            .collect();
        let finals = self
            .finals
            .iter()
            .filter_map(|(&s, &w)| remap[s].filter(|_| acc[s]).map(|r| (r, w)))
            .collect();
        Transducer::from_parts(next, remap[self.start].unwrap(), finals, transitions)
            .expect("trimmed machine is well formed")
    }

    /// True when some accessible, coaccessible state lies on a cycle.
    pub fn has_useful_cycle(&self) -> bool {
        let t = self.trim();
        // Kahn's algorithm over the trimmed graph
        let mut indeg = vec![0usize; t.num_states];
        for tr in &t.transitions {
            indeg[tr.to] += 1;
        }
        let mut queue: Vec<StateId> = (0..t.num_states).filter(|&s| indeg[s] == 0).collect();
        let mut removed = 0;
        while let Some(s) = queue.pop() {
            removed += 1;
            for tr in t.outgoing(s) {
                indeg[tr.to] -= 1;
                if indeg[tr.to] == 0 {
                    queue.push(tr.to);
                }
            }
        }
        removed < t.num_states
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_spellings_are_canonical() {
        assert_eq!(Symbol::new(EPSILON_LONG).unwrap(), Symbol::epsilon());
        assert!(Symbol::new("@0@").unwrap().is_epsilon());
        assert!(Symbol::new("").is_err());
    }

    #[test]
    fn symbols_are_case_sensitive() {
        assert_ne!(Symbol::new("+sg").unwrap(), Symbol::new("+Sg").unwrap());
    }

    #[test]
    fn empty_machine_has_empty_alphabet() {
        assert!(Transducer::empty().alphabet().is_empty());
    }

    #[test]
    fn epsilon_only_machine_has_empty_alphabet() {
        let t = parse_att("0\t1\t@0@\t@_EPSILON_SYMBOL_@\n1\n").unwrap();
        assert!(t.alphabet().is_empty());
    }

    #[test]
    fn dangling_references_are_rejected() {
        let bad = Transducer::from_parts(
            2,
            0,
            BTreeMap::new(),
            vec![Transition {
                from: 0,
                to: 5,
                input: Symbol::from_char('a'),
                output: Symbol::from_char('a'),
                weight: 0.0,
            }],
        );
        assert!(matches!(bad, Err(FstError::Structure(_))));
        assert!(Transducer::from_parts(1, 3, BTreeMap::new(), vec![]).is_err());
    }

    #[test]
    fn trim_drops_dead_states() {
        let t = parse_att("0\t1\ta\ta\n0\t2\tb\tb\n2\t3\tc\tc\n1\n").unwrap();
        let trimmed = t.trim();
        assert_eq!(trimmed.num_states(), 2);
        assert_eq!(trimmed.transitions().len(), 1);
    }

    #[test]
    fn cycle_detection_ignores_dead_cycles() {
        let dead = parse_att("0\t1\ta\ta\n2\t2\tb\tb\n1\n").unwrap();
        assert!(!dead.has_useful_cycle());
        let live = parse_att("0\t0\ta\ta\n0\n").unwrap();
        assert!(live.has_useful_cycle());
    }
}
