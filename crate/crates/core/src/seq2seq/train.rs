use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::model::{HyperParams, Seq2SeqModel};
use super::ModelError;
use crate::nn::{adam_step, sgd_step, AdamState, Dropout, Gradients, Graph, ParameterSet, Scalar};
use crate::rng::SeededRng;

/// Named size and schedule presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 500-unit embeddings and LSTMs, dropout 0.3, batch 64.
    Faithful,
    /// Small model for a single CPU core.
    Desk,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Faithful => "faithful",
            Profile::Desk => "desk",
        }
    }

    pub fn hyper(self) -> HyperParams {
        match self {
            Profile::Faithful => HyperParams {
                embedding: 500,
                hidden: 500,
                layers: 2,
                dropout: 0.3,
                init_bound: 0.1,
            },
            Profile::Desk => HyperParams {
                embedding: 32,
                hidden: 64,
                layers: 1,
                dropout: 0.0,
                init_bound: 0.1,
            },
        }
    }

    pub fn train_config(self) -> TrainConfig {
        match self {
            Profile::Faithful => TrainConfig {
                optimizer: Optimizer::Sgd,
                steps: 100_000,
                batch_size: 64,
                learning_rate: 1.0,
                lr_decay: 0.5,
                clip_norm: 5.0,
                valid_interval: 10_000,
            },
            Profile::Desk => TrainConfig {
                optimizer: Optimizer::Adam,
                steps: 3000,
                batch_size: 16,
                learning_rate: 0.005,
                lr_decay: 0.5,
                clip_norm: 5.0,
                valid_interval: 500,
            },
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "faithful" => Ok(Profile::Faithful),
            "desk" => Ok(Profile::Desk),
            other => Err(format!(
                "unknown profile {other:?} (expected faithful or desk)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

impl FromStr for Optimizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sgd" => Ok(Optimizer::Sgd),
            "adam" => Ok(Optimizer::Adam),
            other => Err(format!(
                "unknown optimizer {other:?} (expected sgd or adam)"
            )),
        }
    }
}

/// Optimization schedule. The learning rate is multiplied by `lr_decay`
/// whenever validation loss fails to improve on the previous validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub clip_norm: f64,
    pub valid_interval: usize,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if self.valid_interval == 0 {
            return bad("validation interval must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad("learning rate must be finite and non-negative");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("learning-rate decay must lie in (0, 1]");
        }
        if !self.clip_norm.is_finite() {
            return bad("clip norm must be finite");
        }
        Ok(())
    }
}

/// A source/target pair as token strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pair {
    pub source: Vec<String>,
    pub target: Vec<String>,
}

impl From<&crate::dataset::TaskExample> for Pair {
    fn from(e: &crate::dataset::TaskExample) -> Self {
        Pair {
            source: e.source.clone(),
            target: e.target.clone(),
        }
    }
}

/// One validation record. Losses are summed token cross-entropy averaged
/// over examples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub step: usize,
    pub epoch: usize,
    pub lr: f64,
    pub loss: f64,
    pub val_loss: Option<f64>,
    pub val_acc: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    /// Parameters from the best validation point, or the last step when
    /// there is no validation data.
    pub model: Seq2SeqModel<T>,
    pub log: Vec<LogRecord>,
    pub best_step: usize,
    /// Set when training stopped on a non-finite loss or gradient; `model`
    /// then holds the last good parameters.
    pub aborted: Option<String>,
}

/// Serializes a log as one JSON object per line.
pub fn log_to_jsonl(log: &[LogRecord]) -> String {
    log.iter()
        .map(|r| serde_json::to_string(r).expect("log record serializes") + "\n")
        .collect()
}

struct Encoded {
    source: Vec<usize>,
    target: Vec<usize>,
}

fn encode_pairs<T: Scalar>(model: &Seq2SeqModel<T>, pairs: &[Pair]) -> Vec<Encoded> {
    pairs
        .iter()
        .map(|p| Encoded {
            source: model.encode_source(&p.source),
            target: model.tgt_vocab().encode(&p.target),
        })
        .collect()
}

/// Summed loss of a batch with gradients accumulated into `grads`.
fn batch_loss<T: Scalar>(
    model: &Seq2SeqModel<T>,
    batch: &[&Encoded],
    grads: &mut Gradients<T>,
    mut dropout: Option<&mut Dropout>,
) -> Result<f64, ModelError> {
    let mut total = 0.0;
    for ex in batch {
        let mut g = Graph::new(model.params());
        let (loss, _) =
            model.sequence_loss(&mut g, &ex.source, &ex.target, dropout.as_deref_mut())?;
        total += g.scalar(loss).to_f64_lossy();
        g.backward(loss, grads);
    }
    Ok(total)
}

/// Mean teacher-forced loss and greedy exact-match accuracy.
pub fn evaluate<T: Scalar>(
    model: &Seq2SeqModel<T>,
    pairs: &[Pair],
) -> Result<(f64, f64), ModelError> {
    if pairs.is_empty() {
        return Err(ModelError::Config("evaluation set is empty".into()));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (p, ex) in pairs.iter().zip(encode_pairs(model, pairs)) {
        let mut g = Graph::new(model.params());
        let (l, _) = model.sequence_loss(&mut g, &ex.source, &ex.target, None)?;
        loss += g.scalar(l).to_f64_lossy();
        let hyp = model.greedy_decode(&p.source, None);
        if hyp.finished && hyp.tokens == p.target {
            correct += 1;
        }
    }
    let n = pairs.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

/// Batches for one epoch: shuffle, bucket by source length, shuffle the
/// bucket order.
fn epoch_batches(data: &[Encoded], batch_size: usize, rng: &mut SeededRng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    rng.shuffle(&mut order);
    order.sort_by_key(|&i| data[i].source.len());
    let mut batches: Vec<Vec<usize>> = order.chunks(batch_size).map(<[usize]>::to_vec).collect();
    rng.shuffle(&mut batches);
    batches
}

/// Observer called with the training-set indices of every batch.
pub type BatchObserver<'a> = &'a mut dyn FnMut(&[usize]);

/// Mini-batch training with teacher forcing. Deterministic given the model seed,
/// the data and `config`.
pub fn train<T: Scalar>(
    model: Seq2SeqModel<T>,
    train_set: &[Pair],
    val_set: &[Pair],
    config: &TrainConfig,
    observer: Option<BatchObserver<'_>>,
) -> Result<TrainOutcome<T>, ModelError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let mut model = model;
    let mut observer = observer;
    let data = encode_pairs(&model, train_set);
    let seed = model.seed();
    let mut batch_rng = SeededRng::derive(seed, "batches");
    let mut dropout = Dropout {
        rate: model.hyper().dropout,
        rng: SeededRng::derive(seed, "dropout"),
    };
    let mut lr = config.learning_rate;
    let mut grads = Gradients::new(model.params());
    let mut adam = AdamState::new(model.params());
    let mut log = Vec::new();
    let mut best: Option<(f64, f64, usize, ParameterSet<T>)> = None;
    let mut prev_val_loss: Option<f64> = None;
    let mut interval_loss = 0.0;
    let mut interval_examples = 0usize;
    let mut aborted = None;
    let mut step = 0;
    let mut epoch = 0;

    'outer: while step < config.steps {
        epoch += 1;
        for batch in epoch_batches(&data, config.batch_size, &mut batch_rng) {
            if step >= config.steps {
                break;
            }
            if let Some(obs) = observer.as_mut() {
                obs(&batch);
            }
            let examples: Vec<&Encoded> = batch.iter().map(|&i| &data[i]).collect();
            grads.clear();
            let drop = (dropout.rate > 0.0).then_some(&mut dropout);
            let loss = batch_loss(&model, &examples, &mut grads, drop)?;
            if !loss.is_finite() {
                aborted = Some(format!("non-finite loss at step {}", step + 1));
                break 'outer;
            }
            let scale = T::from_f64_lossy(1.0 / batch.len() as f64);
            model.params_mut().accumulate(&grads, scale);
            let lr_t = T::from_f64_lossy(lr);
            let clip = T::from_f64_lossy(config.clip_norm);
            let stepped = match config.optimizer {
                Optimizer::Sgd => sgd_step(model.params_mut(), lr_t, clip),
                Optimizer::Adam => adam_step(model.params_mut(), &mut adam, lr_t, clip),
            };
            if let Err(e) = stepped {
                aborted = Some(format!("{e} at step {}", step + 1));
                break 'outer;
            }
            step += 1;
            interval_loss += loss;
            interval_examples += batch.len();

            if step % config.valid_interval == 0 || step == config.steps {
                let train_loss = interval_loss / interval_examples.max(1) as f64;
                interval_loss = 0.0;
                interval_examples = 0;
                let (val_loss, val_acc) = if val_set.is_empty() {
                    (None, None)
                } else {
                    let (l, a) = evaluate(&model, val_set)?;
                    (Some(l), Some(a))
                };
                log.push(LogRecord {
                    step,
                    epoch,
                    lr,
                    loss: train_loss,
                    val_loss,
                    val_acc,
                });
                if let (Some(l), Some(a)) = (val_loss, val_acc) {
                    if !l.is_finite() {
                        aborted = Some(format!("non-finite validation loss at step {step}"));
                        break 'outer;
                    }
                    let better = match &best {
                        None => true,
                        Some((ba, bl, _, _)) => a > *ba || (a == *ba && l < *bl),
                    };
                    if better {
                        best = Some((a, l, step, model.params().clone()));
                    }
                    if prev_val_loss.is_some_and(|p| l >= p) {
                        lr *= config.lr_decay;
                    }
                    prev_val_loss = Some(l);
                }
            }
        }
    }

    let best_step = match best {
        Some((_, _, s, params)) => {
            model.set_params(params);
            s
        }
        // an aborted step never reaches the parameters
        None => step,
    };
    Ok(TrainOutcome {
        model,
        log,
        best_step,
        aborted,
    })
}
