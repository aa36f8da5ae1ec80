//! Checkpoint container, little-endian throughout:
//!
//! ```text
//! magic      8 bytes  "MFCKPT\0\0"
//! version    u32
//! header_len u64
//! header     header_len bytes of JSON (task, seed, hyperparameters,
//!            vocabularies, tensor names and shapes)
//! header_crc u32      CRC-32 of the header bytes
//! per tensor, in header order:
//!   values   f64 x product(shape)
//!   crc      u32      CRC-32 of the value bytes
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{HyperParams, Seq2SeqModel};
use super::vocab::Vocabulary;
use super::ModelError;
use crate::dataset::Task;
use crate::nn::{ParameterSet, Scalar, Tensor};

pub const MAGIC: &[u8; 8] = b"MFCKPT\0\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    task: Task,
    seed: u64,
    hyper: HyperParams,
    src_vocab: Vocabulary,
    tgt_vocab: Vocabulary,
    tensors: Vec<TensorEntry>,
}

fn corrupt(field: &str, message: impl Into<String>) -> ModelError {
    ModelError::Checkpoint {
        field: field.to_string(),
        message: message.into(),
    }
}

pub fn to_bytes<T: Scalar>(model: &Seq2SeqModel<T>) -> Vec<u8> {
    let header = Header {
        task: model.task(),
        seed: model.seed(),
        hyper: model.hyper().clone(),
        src_vocab: model.src_vocab().clone(),
        tgt_vocab: model.tgt_vocab().clone(),
        tensors: model
            .params()
            .iter()
            .map(|(_, name, t)| TensorEntry {
                name: name.to_string(),
                shape: t.shape().to_vec(),
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(32 + json.len() + 8 * model.num_parameters());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&crc32fast::hash(&json).to_le_bytes());
    for (_, _, t) in model.params().iter() {
        let start = out.len();
        for v in t.values() {
            out.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
        }
        let crc = crc32fast::hash(&out[start..]);
        out.extend_from_slice(&crc.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8], ModelError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(corrupt(field, "file is truncated"));
        };
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self, field: &str) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(
            self.take(4, field)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self, field: &str) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(
            self.take(8, field)?.try_into().expect("8 bytes"),
        ))
    }
}

pub fn from_bytes<T: Scalar>(bytes: &[u8]) -> Result<Seq2SeqModel<T>, ModelError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len(), "magic")? != MAGIC {
        return Err(corrupt("magic", "not a checkpoint file"));
    }
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(corrupt(
            "version",
            format!("unsupported format version {version} (expected {FORMAT_VERSION})"),
        ));
    }
    let len = r.u64("header_len")?;
    let len = usize::try_from(len).map_err(|_| corrupt("header_len", "header too large"))?;
    let json = r.take(len, "header")?;
    if r.u32("header_crc")? != crc32fast::hash(json) {
        return Err(corrupt("header", "checksum mismatch"));
    }
    let header: Header =
        serde_json::from_slice(json).map_err(|e| corrupt("header", e.to_string()))?;
    let mut params = ParameterSet::new();
    for entry in &header.tensors {
        let count = entry
            .shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| corrupt(&entry.name, "shape overflows"))?;
        let block = r.take(count, &entry.name)?;
        if r.u32(&entry.name)? != crc32fast::hash(block) {
            return Err(corrupt(&entry.name, "checksum mismatch"));
        }
        let values = block
            .chunks_exact(8)
            .map(|c| T::from_f64_lossy(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect();
        let tensor = Tensor::new(entry.shape.clone(), values)
            .map_err(|e| corrupt(&entry.name, e.to_string()))?;
        params
            .add(&entry.name, tensor)
            .map_err(|e| corrupt(&entry.name, e.to_string()))?;
    }
    if r.pos != bytes.len() {
        return Err(corrupt("trailer", "unexpected bytes after the last tensor"));
    }
    Seq2SeqModel::from_parts(
        header.hyper,
        header.src_vocab,
        header.tgt_vocab,
        params,
        header.task,
        header.seed,
    )
}

pub fn save_checkpoint<T: Scalar>(model: &Seq2SeqModel<T>, path: &Path) -> Result<(), ModelError> {
    fs::write(path, to_bytes(model)).map_err(|e| ModelError::io(path, e))
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<Seq2SeqModel<T>, ModelError> {
    let bytes = fs::read(path).map_err(|e| ModelError::io(path, e))?;
    from_bytes(&bytes)
}
