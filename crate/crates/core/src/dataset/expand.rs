use std::collections::BTreeSet;

use log::warn;

use super::{DatasetError, LexiconEntry, MorphEntry};
use crate::fst::{
    build_pattern, compose, enumerate_paths, excluded_symbols, is_tag, join_symbols, Symbol,
    Transducer, DEFAULT_MAX_PATH_LEN,
};

/// Alphabet substrings that mark compounds, derivations and error forms.
pub const DEFAULT_EXCLUSIONS: [&str; 4] = ["#", "Der", "Cmp", "Err"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expansion {
    pub entries: Vec<MorphEntry>,
    /// Path enumeration hit the arc bound for this lemma.
    pub truncated: bool,
}

/// Reusable expansion state for one analyzer: the generator direction and
/// the tag alphabet left after exclusion are computed once.
#[derive(Clone, Debug)]
pub struct Expander {
    generator: Transducer,
    allowed_tags: BTreeSet<Symbol>,
    max_path_len: usize,
}

impl Expander {
    pub fn new<S: AsRef<str>>(
        analyzer: &Transducer,
        exclusions: &[S],
        max_path_len: usize,
    ) -> Self {
        let excluded = excluded_symbols(analyzer, exclusions);
        let allowed_tags = analyzer
            .alphabet()
            .into_iter()
            .filter(|s| is_tag(s) && !excluded.contains(s))
            .collect();
        Expander {
            generator: analyzer.invert(),
            allowed_tags,
            max_path_len,
        }
    }

    pub fn allowed_tags(&self) -> &BTreeSet<Symbol> {
        &self.allowed_tags
    }

    /// Every (analysis, surface) pair the analyzer licenses for the lemma
    /// and part of speech, one entry per pair.
    pub fn expand(&self, entry: &LexiconEntry) -> Result<Expansion, DatasetError> {
        let pattern = build_pattern(&entry.lemma, &entry.pos, &self.allowed_tags)?;
        let composed = compose(&pattern, &self.generator).trim();
        let paths = enumerate_paths(&composed, self.max_path_len);
        if paths.truncated {
            warn!(
                "expansion of {}{} truncated at {} arcs",
                entry.lemma, entry.pos, self.max_path_len
            );
        }
        let lemma_len = entry.lemma.chars().count();
        let mut entries = Vec::with_capacity(paths.paths.len());
        for path in paths.paths {
            let surface = join_symbols(&path.output);
            if surface.is_empty() {
                warn!(
                    "skipping empty surface form for {}{}",
                    entry.lemma, entry.pos
                );
                continue;
            }
            // the pattern fixes the prefix: lemma characters then the POS
            debug_assert_eq!(path.input.get(lemma_len), Some(&entry.pos));
            entries.push(MorphEntry {
                lemma: entry.lemma.clone(),
                pos: entry.pos.clone(),
                tags: path.input[lemma_len + 1..].to_vec(),
                surface,
            });
        }
        Ok(Expansion {
            entries,
            truncated: paths.truncated,
        })
    }
}

/// One-shot expansion of a single lexicon entry.
pub fn expand_lemma<S: AsRef<str>>(
    analyzer: &Transducer,
    entry: &LexiconEntry,
    exclusions: &[S],
    max_path_len: usize,
) -> Result<Expansion, DatasetError> {
    Expander::new(analyzer, exclusions, max_path_len).expand(entry)
}

/// Expansion with the default exclusion list and arc bound.
pub fn expand_lemma_default(
    analyzer: &Transducer,
    entry: &LexiconEntry,
) -> Result<Expansion, DatasetError> {
    expand_lemma(analyzer, entry, &DEFAULT_EXCLUSIONS, DEFAULT_MAX_PATH_LEN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::parse_att;

    // oj: Sg/Pl x Nom/Gen, plus an unrelated lemma and a verb reading
    const OJ: &str = "0\t1\to\to\n1\t2\tj\tj\n2\t3\t@0@\t+N\n3\t4\t@0@\t+Sg\n3\t4\tt\t+Pl\n\
4\t5\t@0@\t+Nom\n4\t5\tn\t+Gen\n2\t6\t@0@\t+V\n6\t7\ta\t+Inf\n\
0\t8\tu\tu\n8\t9\t@0@\t+N\n9\t10\t@0@\t+Sg\n10\t11\t@0@\t+Nom\n5\n7\n11\n";

    // oj with a diminutive derivation loop back into the noun paradigm
    const OJ_DER: &str = "0\t1\to\to\n1\t2\tj\tj\n2\t3\t@0@\t+N\n3\t2\tk\t+Der/Dimin\n\
3\t4\t@0@\t+Sg\n3\t4\tt\t+Pl\n4\n";

    fn entry(lemma: &str, pos: &str) -> LexiconEntry {
        LexiconEntry::new(lemma, pos).unwrap()
    }

    fn analyses(exp: &Expansion) -> Vec<(String, String)> {
        exp.entries
            .iter()
            .map(|e| (e.analysis(), e.surface.clone()))
            .collect()
    }

    #[test]
    fn four_forms_for_oj() {
        let t = parse_att(OJ).unwrap();
        let exp = expand_lemma_default(&t, &entry("oj", "+N")).unwrap();
        assert!(!exp.truncated);
        // brute-force oracle: analyzer relation filtered on the analysis prefix
        let mut oracle: Vec<(String, String)> = enumerate_paths(&t, 64)
            .paths
            .iter()
            .map(|p| (join_symbols(&p.output), join_symbols(&p.input)))
            .filter(|(a, _)| a.starts_with("oj+N"))
            .collect();
        oracle.sort();
        let mut got = analyses(&exp);
        got.sort();
        assert_eq!(got, oracle);
        assert_eq!(got.len(), 4);
        let gen = exp.entries.iter().find(|e| e.surface == "ojtn").unwrap();
        assert_eq!(gen.analysis(), "oj+N+Pl+Gen");
        assert_eq!(gen.complexity(), 3);
    }

    #[test]
    fn pos_restricts_expansion() {
        let t = parse_att(OJ).unwrap();
        let exp = expand_lemma_default(&t, &entry("oj", "+V")).unwrap();
        assert_eq!(
            analyses(&exp),
            vec![("oj+V+Inf".to_string(), "oja".to_string())]
        );
    }

    #[test]
    fn absent_lemma_expands_to_nothing() {
        let t = parse_att(OJ).unwrap();
        let exp = expand_lemma_default(&t, &entry("xyz", "+N")).unwrap();
        assert!(exp.entries.is_empty());
        assert!(!exp.truncated);
    }

    #[test]
    fn derivation_loops_are_excluded() {
        let t = parse_att(OJ_DER).unwrap();
        let exp = expand_lemma_default(&t, &entry("oj", "+N")).unwrap();
        assert!(!exp.truncated);
        assert_eq!(exp.entries.len(), 2);
        assert!(exp
            .entries
            .iter()
            .all(|e| e.tags.iter().all(|t| !t.as_str().contains("Der"))));
    }

    #[test]
    fn without_exclusion_the_loop_is_truncated() {
        let t = parse_att(OJ_DER).unwrap();
        let exp = expand_lemma(&t, &entry("oj", "+N"), &["Zzz"], 16).unwrap();
        assert!(exp.truncated);
        assert!(exp.entries.len() > 2);
    }
}
