use std::collections::{BTreeMap, BTreeSet};

use super::{FstError, Symbol, Transducer, Transition, EPSILON, EPSILON_LONG};

/// Leading character of multicharacter morphological tags.
pub const TAG_DELIMITER: char = '+';

/// A tag is a multicharacter symbol starting with the tag delimiter.
pub fn is_tag(sym: &Symbol) -> bool {
    let s = sym.as_str();
    s.starts_with(TAG_DELIMITER) && s.chars().nth(1).is_some()
}

/// Alphabet symbols whose text contains any of `substrings`.
pub fn excluded_symbols<S: AsRef<str>>(t: &Transducer, substrings: &[S]) -> BTreeSet<Symbol> {
    t.alphabet()
        .into_iter()
        .filter(|sym| substrings.iter().any(|s| sym.as_str().contains(s.as_ref())))
        .collect()
}

/// Identity acceptor for `lemma · pos · allowed*`, with the lemma spelled one
/// character per symbol. Tags after the POS may repeat and come in any order;
/// the analyzer it is composed with decides which sequences exist.
pub fn build_pattern(
    lemma: &str,
    pos: &Symbol,
    allowed_tags: &BTreeSet<Symbol>,
) -> Result<Transducer, FstError> {
    if lemma.is_empty() {
        return Err(FstError::Input("empty lemma".into()));
    }
    if lemma.contains(EPSILON) || lemma.contains(EPSILON_LONG) {
        return Err(FstError::Input(format!(
            "lemma {lemma:?} contains the epsilon marker"
        )));
    }
    if pos.is_epsilon() {
        return Err(FstError::Input("part of speech cannot be epsilon".into()));
    }
    let identity = |from, to, sym: &Symbol| Transition {
        from,
        to,
        input: sym.clone(),
        output: sym.clone(),
        weight: 0.0,
    };
    let chars = Symbol::spell(lemma);
    let mut transitions: Vec<Transition> = chars
        .iter()
        .enumerate()
        .map(|(i, c)| identity(i, i + 1, c))
        .collect();
    let pos_state = chars.len();
    let tail = pos_state + 1;
    transitions.push(identity(pos_state, tail, pos));
    transitions.extend(
        allowed_tags
            .iter()
            .filter(|t| !t.is_epsilon())
            .map(|t| identity(tail, tail, t)),
    );
    let finals = BTreeMap::from([(tail, 0.0)]);
    Transducer::from_parts(tail + 1, 0, finals, transitions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::{compose, enumerate_paths, join_symbols, lookup, parse_att};

    fn sym(s: &str) -> Symbol {
        Symbol::new(s).unwrap()
    }

    fn accepts(t: &Transducer, analysis: &[&str]) -> bool {
        let text: String = analysis.concat();
        lookup(t, &text).iter().any(|o| join_symbols(o) == text)
    }

    #[test]
    fn exclusion_by_substring() {
        let t = parse_att(
            "0\t1\t+N\t+N\n1\t2\t+Der/Dimin\t+Der/Dimin\n2\t3\t+Cmp\t+Cmp\n3\t4\t+Err/Orth\t+Err/Orth\n4\t5\ta\ta\n5\n",
        )
        .unwrap();
        let ex = excluded_symbols(&t, &["#", "Der", "Cmp", "Err"]);
        let names: Vec<_> = ex.iter().map(Symbol::as_str).collect();
        assert_eq!(names, vec!["+Cmp", "+Der/Dimin", "+Err/Orth"]);
        assert!(excluded_symbols(&t, &["Zzz"]).is_empty());
    }

    #[test]
    fn boundary_symbol_is_excluded() {
        let t = parse_att("0\t1\ta\ta\n1\t2\t#\t@0@\n2\n").unwrap();
        let ex = excluded_symbols(&t, &["#", "Der", "Cmp", "Err"]);
        assert!(ex.contains(&sym("#")));
    }

    #[test]
    fn pattern_is_a_kleene_star_over_allowed_tags() {
        let allowed = BTreeSet::from([sym("+Sg"), sym("+Nom")]);
        let p = build_pattern("oj", &sym("+N"), &allowed).unwrap();
        assert!(accepts(&p, &["o", "j", "+N"]));
        assert!(accepts(&p, &["o", "j", "+N", "+Sg"]));
        assert!(accepts(&p, &["o", "j", "+N", "+Sg", "+Nom", "+Sg"]));
        assert!(accepts(&p, &["o", "j", "+N", "+Nom", "+Sg"]));
        assert!(!accepts(&p, &["o", "j"]));
        assert!(!accepts(&p, &["o", "j", "+V"]));
        assert!(!accepts(&p, &["o", "j", "a", "+N"]));
    }

    #[test]
    fn empty_allowed_set_accepts_lemma_and_pos_only() {
        let p = build_pattern("oj", &sym("+N"), &BTreeSet::new()).unwrap();
        let set = enumerate_paths(&p, 16);
        assert!(!set.truncated);
        assert_eq!(set.paths.len(), 1);
        assert_eq!(join_symbols(&set.paths[0].input), "oj+N");
    }

    #[test]
    fn bad_lemmas_are_rejected() {
        assert!(build_pattern("", &sym("+N"), &BTreeSet::new()).is_err());
        assert!(build_pattern("a@0@b", &sym("+N"), &BTreeSet::new()).is_err());
        assert!(build_pattern("a@_EPSILON_SYMBOL_@", &sym("+N"), &BTreeSet::new()).is_err());
    }

    #[test]
    fn pattern_selects_one_lemma_from_an_analyzer() {
        // analyzer over two lemmas and two POS readings
        let analyzer = parse_att(
            "0\t1\to\to\n1\t2\tj\tj\n2\t3\t@0@\t+N\n3\t4\t@0@\t+Sg\n3\t5\tt\t+Pl\n2\t6\t@0@\t+V\n\
0\t7\tu\tu\n7\t8\t@0@\t+N\n8\t9\t@0@\t+Sg\n4\n5\n6\n9\n",
        )
        .unwrap();
        let allowed: BTreeSet<Symbol> = analyzer.alphabet().into_iter().filter(is_tag).collect();
        let pattern = build_pattern("oj", &sym("+N"), &allowed).unwrap();
        let expanded = enumerate_paths(&compose(&pattern, &analyzer.invert()), 64);
        let got: Vec<_> = expanded
            .paths
            .iter()
            .map(|p| (join_symbols(&p.input), join_symbols(&p.output)))
            .collect();
        // brute-force filter of the analyzer's own relation
        let mut oracle: Vec<_> = enumerate_paths(&analyzer, 64)
            .paths
            .iter()
            .map(|p| (join_symbols(&p.output), join_symbols(&p.input)))
            .filter(|(analysis, _)| analysis.starts_with("oj+N"))
            .collect();
        oracle.sort();
        assert_eq!(got, oracle);
        assert_eq!(got.len(), 2);
    }
}
