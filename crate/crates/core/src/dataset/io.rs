use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{DatasetError, LexiconEntry, MorphEntry, Split, Task, TaskExample};
use crate::fst::{Symbol, TAG_DELIMITER};

pub fn examples_file_name(task: Task, split: Split) -> String {
    format!("{task}.{split}.tsv")
}

pub fn entries_file_name(split: Split) -> String {
    format!("entries.{split}.tsv")
}

/// Parses `lemma\tpos` lines. Blank lines and `#` comments are skipped.
pub fn parse_lexicon(text: &str) -> Result<Vec<LexiconEntry>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| DatasetError::Lexicon {
            line: i + 1,
            message,
        };
        let mut fields = line.split('\t');
        let (Some(lemma), Some(pos), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err("expected `lemma<TAB>pos`".into()));
        };
        out.push(LexiconEntry::new(lemma, pos).map_err(err)?);
    }
    Ok(out)
}

fn write_lines<I>(path: &Path, lines: I) -> Result<(), DatasetError>
where
    I: IntoIterator<Item = String>,
{
    let file = fs::File::create(path).map_err(|e| DatasetError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for line in lines {
        w.write_all(line.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| DatasetError::io(path, e))?;
    }
    w.flush().map_err(|e| DatasetError::io(path, e))
}

/// One example per line: space-separated source tokens, a tab, then
/// space-separated target tokens.
pub fn write_examples(path: &Path, examples: &[TaskExample]) -> Result<(), DatasetError> {
    write_lines(
        path,
        examples
            .iter()
            .map(|e| format!("{}\t{}", e.source.join(" "), e.target.join(" "))),
    )
}

pub fn read_examples(path: &Path, task: Task) -> Result<Vec<TaskExample>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let Some((src, tgt)) = line.split_once('\t') else {
            return Err(DatasetError::Format {
                path: path.display().to_string(),
                line: i + 1,
                message: "missing tab between source and target".into(),
            });
        };
        let tokens = |s: &str| {
            s.split(' ')
                .filter(|t| !t.is_empty())
                .map(String::from)
                .collect()
        };
        out.push(TaskExample {
            task,
            source: tokens(src),
            target: tokens(tgt),
        });
    }
    Ok(out)
}

/// `lemma\tpos\ttags\tsurface`, tags written as in the analysis string.
pub fn write_entries(path: &Path, entries: &[MorphEntry]) -> Result<(), DatasetError> {
    write_lines(
        path,
        entries.iter().map(|e| {
            let tags: String = e.tags.iter().map(Symbol::as_str).collect();
            format!("{}\t{}\t{}\t{}", e.lemma, e.pos, tags, e.surface)
        }),
    )
}

pub fn read_entries(path: &Path) -> Result<Vec<MorphEntry>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |message: &str| DatasetError::Format {
            path: path.display().to_string(),
            line: i + 1,
            message: message.to_string(),
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [lemma, pos, tags, surface] = fields[..] else {
            return Err(err("expected 4 tab-separated fields"));
        };
        let tags = tags
            .split(TAG_DELIMITER)
            .filter(|t| !t.is_empty())
            .map(|t| Symbol::new(format!("{TAG_DELIMITER}{t}")))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(MorphEntry {
            lemma: lemma.to_string(),
            pos: Symbol::new(pos).map_err(|_| err("empty part of speech"))?,
            tags,
            surface: surface.to_string(),
        });
    }
    Ok(out)
}
