//! A small, fully regular agglutinative language used as a test fixture:
//! nouns inflect for number and case, verbs for tense and person, twelve
//! forms each, and no two analyses share a surface form. Noun lemmas end in
//! `a` or `o` and verb lemmas in `e` or `u`, so every form of an unseen
//! lemma still has exactly one reading.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::dataset::{LexiconEntry, MorphEntry};
use crate::fst::{serialize_att, Symbol, Transducer, Transition};
use crate::pipeline::{PipelineConfig, PipelineError};
use crate::rng::SeededRng;

const CONSONANTS: &[char] = &['h', 'j', 'k', 'l', 'm', 'n', 'p', 'r', 's', 't', 'v'];
const VOWELS: &[char] = &['a', 'e', 'o', 'u'];
const NOUN_FINAL: &[char] = &['a', 'o'];
const VERB_FINAL: &[char] = &['e', 'u'];

const NOUN_NUMBER: [(&str, &str); 2] = [("+Sg", ""), ("+Pl", "i")];
const NOUN_CASE: [(&str, &str); 6] = [
    ("+Nom", ""),
    ("+Gen", "n"),
    ("+Ine", "ssa"),
    ("+Ela", "sta"),
    ("+Ade", "lla"),
    ("+Abl", "lta"),
];
const VERB_TENSE: [(&str, &str); 2] = [("+Prs", ""), ("+Pst", "i")];
const VERB_PERSON: [(&str, &str); 6] = [
    ("+Sg1", "n"),
    ("+Sg2", "t"),
    ("+Sg3", ""),
    ("+Pl1", "mme"),
    ("+Pl2", "tte"),
    ("+Pl3", "vat"),
];

/// Slots of a paradigm: each slot picks one (tag, suffix) pair.
fn slots(pos: &str) -> [&'static [(&'static str, &'static str)]; 2] {
    match pos {
        "+N" => [&NOUN_NUMBER, &NOUN_CASE],
        "+V" => [&VERB_TENSE, &VERB_PERSON],
        other => panic!("toy language has no part of speech {other}"),
    }
}

fn sym(s: &str) -> Symbol {
    Symbol::new(s).expect("valid symbol")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToyLanguage {
    pub lexicon: Vec<LexiconEntry>,
}

impl ToyLanguage {
    /// `nouns` nouns (the first is `kissa`) and `verbs` verbs built from
    /// random consonant-vowel syllables, the last vowel chosen by class. Lemmas whose forms would collide
    /// with an existing form are redrawn.
    pub fn generate(seed: u64, nouns: usize, verbs: usize) -> Self {
        let mut rng = SeededRng::derive(seed, "toy-language");
        let mut surfaces: HashSet<String> = HashSet::new();
        let mut lexicon = Vec::with_capacity(nouns + verbs);
        let mut admit = |entry: LexiconEntry, surfaces: &mut HashSet<String>| {
            let forms: Vec<String> = Self::forms(&entry).into_iter().map(|e| e.surface).collect();
            let distinct: HashSet<&String> = forms.iter().collect();
            if distinct.len() != forms.len() || forms.iter().any(|f| surfaces.contains(f)) {
                return false;
            }
            surfaces.extend(forms);
            lexicon.push(entry);
            true
        };
        admit(
            LexiconEntry::new("kissa", "+N").expect("valid"),
            &mut surfaces,
        );
        for (pos, count, finals) in [
            ("+N", nouns.saturating_sub(1), NOUN_FINAL),
            ("+V", verbs, VERB_FINAL),
        ] {
            let mut made = 0;
            while made < count {
                let syllables = 2 + rng.below(2) as usize;
                let lemma: String = (0..syllables)
                    .flat_map(|i| {
                        let vowels = if i + 1 == syllables { finals } else { VOWELS };
                        let c = CONSONANTS[rng.below(CONSONANTS.len() as u64) as usize];
                        let v = vowels[rng.below(vowels.len() as u64) as usize];
                        [c, v]
                    })
                    .collect();
                if admit(
                    LexiconEntry::new(&lemma, pos).expect("valid"),
                    &mut surfaces,
                ) {
                    made += 1;
                }
            }
        }
        ToyLanguage { lexicon }
    }

    /// 100 nouns and 100 verbs.
    pub fn standard(seed: u64) -> Self {
        Self::generate(seed, 100, 100)
    }

    /// All twelve forms of a lemma, in paradigm order.
    pub fn forms(entry: &LexiconEntry) -> Vec<MorphEntry> {
        let [first, second] = slots(entry.pos.as_str());
        let mut out = Vec::with_capacity(first.len() * second.len());
        for (t1, s1) in first {
            for (t2, s2) in second {
                out.push(MorphEntry {
                    lemma: entry.lemma.clone(),
                    pos: entry.pos.clone(),
                    tags: vec![sym(t1), sym(t2)],
                    surface: format!("{}{s1}{s2}", entry.lemma),
                });
            }
        }
        out
    }

    /// Every form of every lemma.
    pub fn all_forms(&self) -> Vec<MorphEntry> {
        self.lexicon.iter().flat_map(Self::forms).collect()
    }

    /// `lemma<TAB>pos` lines.
    pub fn lexicon_tsv(&self) -> String {
        self.lexicon
            .iter()
            .map(|e| format!("{}\t{}\n", e.lemma, e.pos))
            .collect()
    }

    /// Writes `toy.att` and `toy.lexicon.tsv` into `dir` and returns a
    /// default configuration reading them and writing under `dir/out`.
    pub fn write_fixture(&self, dir: &Path) -> Result<PipelineConfig, PipelineError> {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        let analyzer = dir.join("toy.att");
        let lexicon = dir.join("toy.lexicon.tsv");
        fs::write(&analyzer, serialize_att(&self.analyzer()))
            .map_err(|e| PipelineError::io(&analyzer, e))?;
        fs::write(&lexicon, self.lexicon_tsv()).map_err(|e| PipelineError::io(&lexicon, e))?;
        Ok(PipelineConfig {
            analyzer: Some(analyzer),
            lexicon: Some(lexicon),
            out: dir.join("out"),
            ..PipelineConfig::default()
        })
    }

    pub fn analyzer(&self) -> Transducer {
        Self::analyzer_for(&self.lexicon)
    }

    /// Analyzer (surface to analysis) covering exactly `entries`: a letter
    /// trie over the lemmas feeding one shared suffix network per part of
    /// speech.
    pub fn analyzer_for(entries: &[LexiconEntry]) -> Transducer {
        let mut arcs: Vec<Transition> = Vec::new();
        let mut num_states = 1;
        let mut new_state = || {
            num_states += 1;
            num_states - 1
        };
        let mut finals = BTreeMap::new();
        let eps = Symbol::epsilon();

        let mut paradigm_start: BTreeMap<String, usize> = BTreeMap::new();
        for pos in ["+N", "+V"] {
            let start = new_state();
            let middle = new_state();
            let end = new_state();
            finals.insert(end, 0.0);
            paradigm_start.insert(pos.to_string(), start);
            let [first, second] = slots(pos);
            for (slot, from, to) in [(first, start, middle), (second, middle, end)] {
                for (tag, suffix) in slot {
                    let chars: Vec<char> = suffix.chars().collect();
                    if chars.is_empty() {
                        arcs.push(Transition::new(from, to, eps.clone(), sym(tag), 0.0));
                        continue;
                    }
                    let mut at = from;
                    for (i, c) in chars.iter().enumerate() {
                        let next = if i + 1 == chars.len() {
                            to
                        } else {
                            new_state()
                        };
                        let output = if i == 0 { sym(tag) } else { eps.clone() };
                        arcs.push(Transition::new(
                            at,
                            next,
                            Symbol::from_char(*c),
                            output,
                            0.0,
                        ));
                        at = next;
                    }
                }
            }
        }

        let mut trie: HashMap<(usize, char), usize> = HashMap::new();
        let mut attached: HashSet<(usize, String)> = HashSet::new();
        for entry in entries {
            let mut at = 0;
            for c in entry.lemma.chars() {
                at = match trie.get(&(at, c)) {
                    Some(&s) => s,
                    None => {
                        let s = new_state();
                        trie.insert((at, c), s);
                        arcs.push(Transition::new(
                            at,
                            s,
                            Symbol::from_char(c),
                            Symbol::from_char(c),
                            0.0,
                        ));
                        s
                    }
                };
            }
            let pos = entry.pos.as_str().to_string();
            if attached.insert((at, pos.clone())) {
                let target = paradigm_start[&pos];
                arcs.push(Transition::new(
                    at,
                    target,
                    eps.clone(),
                    entry.pos.clone(),
                    0.0,
                ));
            }
        }
        Transducer::from_parts(num_states, 0, finals, arcs).expect("toy analyzer is well formed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::expand_lemma_default;
    use crate::fst::{join_symbols, lookup};

    #[test]
    fn standard_language_shape() {
        let toy = ToyLanguage::standard(3435);
        assert_eq!(toy.lexicon.len(), 200);
        assert_eq!(
            toy.lexicon
                .iter()
                .filter(|e| e.pos.as_str() == "+N")
                .count(),
            100
        );
        assert_eq!(toy.all_forms().len(), 2400);
        let surfaces: HashSet<String> = toy.all_forms().into_iter().map(|e| e.surface).collect();
        assert_eq!(surfaces.len(), 2400);
        assert_eq!(ToyLanguage::standard(3435), toy);
    }

    #[test]
    fn final_vowel_marks_the_class() {
        for entry in &ToyLanguage::standard(3435).lexicon {
            let last = entry.lemma.chars().last().unwrap();
            let allowed = if entry.pos.as_str() == "+N" {
                NOUN_FINAL
            } else {
                VERB_FINAL
            };
            assert!(allowed.contains(&last), "{}{}", entry.lemma, entry.pos);
        }
    }

    #[test]
    fn analyzer_reads_kissan() {
        let toy = ToyLanguage::generate(1, 5, 5);
        let fst = toy.analyzer();
        let got: Vec<String> = lookup(&fst, "kissan")
            .iter()
            .map(|a| join_symbols(a))
            .collect();
        assert_eq!(got, vec!["kissa+N+Sg+Gen"]);
        assert!(lookup(&fst, "kissat").is_empty());
    }

    #[test]
    fn expansion_matches_paradigm() {
        let toy = ToyLanguage::generate(2, 6, 6);
        let fst = toy.analyzer();
        for entry in &toy.lexicon {
            let mut got = expand_lemma_default(&fst, entry).unwrap().entries;
            let mut want = ToyLanguage::forms(entry);
            got.sort_by(|a, b| a.surface.cmp(&b.surface));
            want.sort_by(|a, b| a.surface.cmp(&b.surface));
            assert_eq!(got, want, "{}", entry.lemma);
        }
    }

    #[test]
    fn every_form_analyzes_to_itself_only() {
        let toy = ToyLanguage::generate(3, 8, 8);
        let fst = toy.analyzer();
        for form in toy.all_forms() {
            let got: Vec<String> = lookup(&fst, &form.surface)
                .iter()
                .map(|a| join_symbols(a))
                .collect();
            assert_eq!(got, vec![form.analysis()]);
        }
    }
}
