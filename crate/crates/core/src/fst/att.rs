use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{FstError, Symbol, Transducer, Transition};

const SPACE: &str = "@_SPACE_@";
const TAB: &str = "@_TAB_@";

fn decode_symbol(field: &str, line: usize) -> Result<Symbol, FstError> {
    let text = match field {
        SPACE => " ",
        TAB => "\t",
        other => other,
    };
    Symbol::new(text).map_err(|_| FstError::Parse {
        line,
        message: "empty symbol field".into(),
    })
}

fn encode_symbol(sym: &Symbol) -> &str {
    match sym.as_str() {
        " " => SPACE,
        "\t" => TAB,
        other => other,
    }
}

fn parse_state(field: &str, line: usize) -> Result<usize, FstError> {
    field.parse().map_err(|_| FstError::Parse {
        line,
        message: format!("state {field:?} is not a non-negative integer"),
    })
}

fn parse_weight(field: &str, line: usize) -> Result<f64, FstError> {
    let w: f64 = field.parse().map_err(|_| FstError::Parse {
        line,
        message: format!("weight {field:?} is not a number"),
    })?;
    if !w.is_finite() {
        return Err(FstError::Parse {
            line,
            message: format!("weight {field:?} is not finite"),
        });
    }
    Ok(w)
}

/// Parses the tab-separated transducer text format.
///
/// Transition lines are `from\tto\tin\tout[\tweight]`, final lines are
/// `state[\tweight]`. State 0 is the start state. Blank lines are ignored.
/// Line numbers in errors are 1-based.
pub fn parse_att(text: &str) -> Result<Transducer, FstError> {
    let mut transitions = Vec::new();
    let mut finals = BTreeMap::new();
    let mut max_state = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        match fields.len() {
            1 | 2 => {
                let state = parse_state(fields[0], line)?;
                let weight = match fields.get(1) {
                    Some(w) => parse_weight(w, line)?,
                    None => 0.0,
                };
                max_state = max_state.max(state);
                finals.insert(state, weight);
            }
            4 | 5 => {
                let from = parse_state(fields[0], line)?;
                let to = parse_state(fields[1], line)?;
                let input = decode_symbol(fields[2], line)?;
                let output = decode_symbol(fields[3], line)?;
                let weight = match fields.get(4) {
                    Some(w) => parse_weight(w, line)?,
                    None => 0.0,
                };
                max_state = max_state.max(from).max(to);
                transitions.push(Transition {
                    from,
                    to,
                    input,
                    output,
                    weight,
                });
            }
            n => {
                return Err(FstError::Parse {
                    line,
                    message: format!("expected 1, 2, 4 or 5 tab-separated fields, found {n}"),
                })
            }
        }
    }
    Transducer::from_parts(max_state + 1, 0, finals, transitions)
}

/// Writes the text format. Transitions are sorted by (from, to, in, out) and
/// followed by final states in ascending order; zero weights are omitted.
pub fn serialize_att(t: &Transducer) -> String {
    assert_eq!(t.start(), 0, "the text format requires start state 0");
    let mut sorted: Vec<&Transition> = t.transitions().iter().collect();
    sorted.sort_by(|a, b| {
        (a.from, a.to, &a.input, &a.output)
            .cmp(&(b.from, b.to, &b.input, &b.output))
            .then(a.weight.total_cmp(&b.weight))
    });
    let mut out = String::new();
    for tr in sorted {
        let _ = write!(
            out,
            "{}\t{}\t{}\t{}",
            tr.from,
            tr.to,
            encode_symbol(&tr.input),
            encode_symbol(&tr.output)
        );
        if tr.weight != 0.0 {
            let _ = write!(out, "\t{}", tr.weight);
        }
        out.push('\n');
    }
    for (state, weight) in t.finals() {
        if *weight != 0.0 {
            let _ = writeln!(out, "{state}\t{weight}");
        } else {
            let _ = writeln!(out, "{state}");
        }
    }
    out
}
