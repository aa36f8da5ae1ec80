use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::ModelError;

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const BOS: usize = 2;
pub const EOS: usize = 3;

const RESERVED: [&str; 4] = ["<pad>", "<unk>", "<s>", "</s>"];

/// Token inventory with the reserved tokens at indices 0–3.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Reserved tokens followed by `tokens` ordered by frequency (descending)
    /// and then lexicographically.
    pub fn from_counts(counts: &BTreeMap<String, usize>) -> Self {
        let mut ordered: Vec<(&String, &usize)> = counts
            .iter()
            .filter(|(t, _)| !RESERVED.contains(&t.as_str()))
            .collect();
        ordered.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
        let tokens = RESERVED
            .iter()
            .map(|s| s.to_string())
            .chain(ordered.into_iter().map(|(t, _)| t.clone()))
            .collect();
        Self::from_list(tokens).expect("tokens are unique")
    }

    fn from_list(tokens: Vec<String>) -> Result<Self, ModelError> {
        if tokens.len() < RESERVED.len() || tokens[..4] != RESERVED {
            return Err(ModelError::Vocabulary(
                "reserved tokens missing or out of place".into(),
            ));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(ModelError::Vocabulary(format!("duplicate token {t:?}")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Maps tokens to ids; unseen tokens become the unknown token.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens
            .iter()
            .map(|t| self.id(t.as_ref()).unwrap_or(UNK))
            .collect()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().map(|&i| self.tokens[i].clone()).collect()
    }
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = ModelError;

    fn try_from(tokens: Vec<String>) -> Result<Self, Self::Error> {
        Self::from_list(tokens)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

/// Source and target vocabularies over a training set.
pub fn build_vocab<'a, I>(pairs: I) -> Result<(Vocabulary, Vocabulary), ModelError>
where
    I: IntoIterator<Item = (&'a [String], &'a [String])>,
{
    let mut src = BTreeMap::new();
    let mut tgt = BTreeMap::new();
    let mut seen = 0;
    for (s, t) in pairs {
        seen += 1;
        for tok in s {
            *src.entry(tok.clone()).or_insert(0) += 1;
        }
        for tok in t {
            *tgt.entry(tok.clone()).or_insert(0) += 1;
        }
    }
    if seen == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    Ok((Vocabulary::from_counts(&src), Vocabulary::from_counts(&tgt)))
}
