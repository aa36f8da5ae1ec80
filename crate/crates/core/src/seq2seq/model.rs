use serde::{Deserialize, Serialize};

use super::vocab::{Vocabulary, BOS, EOS};
use super::ModelError;
use crate::dataset::Task;
use crate::nn::{
    bidirectional_encode, global_attention, lookup, lstm_cell, maybe_dropout, Attention, BiEncoder,
    Dropout, Graph, Init, LstmLayer, LstmState, NodeId, ParamId, ParameterSet, Scalar, Tensor,
};
use crate::rng::SeededRng;

/// Architecture sizes. `hidden` is the decoder size; each encoder direction
/// uses `hidden / 2` so the concatenated annotations match it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub embedding: usize,
    pub hidden: usize,
    pub layers: usize,
    pub dropout: f64,
    pub init_bound: f64,
}

impl HyperParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.embedding == 0 {
            return bad("embedding size must be positive");
        }
        if self.hidden == 0 || !self.hidden.is_multiple_of(2) {
            return bad("hidden size must be positive and even");
        }
        if self.layers == 0 {
            return bad("at least one layer is required");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if !(self.init_bound.is_finite() && self.init_bound >= 0.0) {
            return bad("init bound must be finite and non-negative");
        }
        Ok(())
    }
}

/// Named parameter shapes in registration order.
pub fn parameter_shapes(
    hyper: &HyperParams,
    src_vocab: usize,
    tgt_vocab: usize,
) -> Vec<(String, Vec<usize>)> {
    let (e, h) = (hyper.embedding, hyper.hidden);
    let half = h / 2;
    let mut out = vec![
        ("src_embedding".to_string(), vec![src_vocab, e]),
        ("tgt_embedding".to_string(), vec![tgt_vocab, e]),
    ];
    let lstm = |out: &mut Vec<(String, Vec<usize>)>, name: String, input: usize, hidden: usize| {
        out.push((format!("{name}.weight"), vec![4 * hidden, input + hidden]));
        out.push((format!("{name}.bias"), vec![4 * hidden]));
    };
    for l in 0..hyper.layers {
        let input = if l == 0 { e } else { h };
        lstm(&mut out, format!("encoder.{l}.fwd"), input, half);
        lstm(&mut out, format!("encoder.{l}.bwd"), input, half);
    }
    for l in 0..hyper.layers {
        let input = if l == 0 { e + h } else { h };
        lstm(&mut out, format!("decoder.{l}"), input, h);
    }
    out.push(("attention.score".to_string(), vec![h, h]));
    out.push(("attention.combine".to_string(), vec![h, 2 * h]));
    out.push(("generator.weight".to_string(), vec![tgt_vocab, h]));
    out.push(("generator.bias".to_string(), vec![tgt_vocab]));
    out
}

#[derive(Clone, Debug, PartialEq)]
struct Net {
    src_embedding: ParamId,
    tgt_embedding: ParamId,
    encoder: BiEncoder,
    decoder: Vec<LstmLayer>,
    attention: Attention,
    generator: ParamId,
    generator_bias: ParamId,
}

impl Net {
    fn resolve<T: Scalar>(params: &ParameterSet<T>, layers: usize) -> Result<Self, ModelError> {
        let encoder = BiEncoder {
            layers: (0..layers)
                .map(|l| {
                    Ok((
                        LstmLayer::find(params, &format!("encoder.{l}.fwd"))?,
                        LstmLayer::find(params, &format!("encoder.{l}.bwd"))?,
                    ))
                })
                .collect::<Result<_, ModelError>>()?,
        };
        let decoder = (0..layers)
            .map(|l| LstmLayer::find(params, &format!("decoder.{l}")))
            .collect::<Result<_, _>>()?;
        Ok(Net {
            src_embedding: lookup(params, "src_embedding")?,
            tgt_embedding: lookup(params, "tgt_embedding")?,
            encoder,
            decoder,
            attention: Attention {
                score: lookup(params, "attention.score")?,
                combine: lookup(params, "attention.combine")?,
            },
            generator: lookup(params, "generator.weight")?,
            generator_bias: lookup(params, "generator.bias")?,
        })
    }
}

/// Decoder recurrent state plus the attentional output fed to the next step.
#[derive(Clone, Debug)]
pub struct DecoderState {
    layers: Vec<LstmState>,
    feed: NodeId,
}

/// Attentional encoder-decoder for one task.
#[derive(Clone, Debug, PartialEq)]
pub struct Seq2SeqModel<T> {
    hyper: HyperParams,
    src_vocab: Vocabulary,
    tgt_vocab: Vocabulary,
    params: ParameterSet<T>,
    seed: u64,
    task: Task,
    net: Net,
}

impl<T: Scalar> Seq2SeqModel<T> {
    /// Fresh model with parameters drawn uniformly from `±init_bound` using
    /// a stream derived from `seed`.
    pub fn new(
        hyper: HyperParams,
        src_vocab: Vocabulary,
        tgt_vocab: Vocabulary,
        task: Task,
        seed: u64,
    ) -> Result<Self, ModelError> {
        hyper.validate()?;
        let mut init = Init {
            bound: hyper.init_bound,
            rng: SeededRng::derive(seed, "init"),
        };
        let mut params = ParameterSet::new();
        for (name, shape) in parameter_shapes(&hyper, src_vocab.len(), tgt_vocab.len()) {
            params.add(&name, init.tensor(shape))?;
        }
        Self::from_parts(hyper, src_vocab, tgt_vocab, params, task, seed)
    }

    /// Assembles a model from existing parameters, checking every name and
    /// shape against the hyperparameters and vocabulary sizes.
    pub fn from_parts(
        hyper: HyperParams,
        src_vocab: Vocabulary,
        tgt_vocab: Vocabulary,
        params: ParameterSet<T>,
        task: Task,
        seed: u64,
    ) -> Result<Self, ModelError> {
        hyper.validate()?;
        let expected = parameter_shapes(&hyper, src_vocab.len(), tgt_vocab.len());
        if params.len() != expected.len() {
            return Err(ModelError::Shape {
                field: "parameters".into(),
                message: format!(
                    "expected {} tensors, found {}",
                    expected.len(),
                    params.len()
                ),
            });
        }
        for ((name, shape), (_, got_name, t)) in expected.iter().zip(params.iter()) {
            if name != got_name || shape.as_slice() != t.shape() {
                return Err(ModelError::Shape {
                    field: got_name.to_string(),
                    message: format!(
                        "expected {name} with shape {shape:?}, found {:?}",
                        t.shape()
                    ),
                });
            }
        }
        let net = Net::resolve(&params, hyper.layers)?;
        Ok(Seq2SeqModel {
            hyper,
            src_vocab,
            tgt_vocab,
            params,
            seed,
            task,
            net,
        })
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    pub fn src_vocab(&self) -> &Vocabulary {
        &self.src_vocab
    }

    pub fn tgt_vocab(&self) -> &Vocabulary {
        &self.tgt_vocab
    }

    pub fn params(&self) -> &ParameterSet<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParameterSet<T> {
        &mut self.params
    }

    pub(crate) fn set_params(&mut self, params: ParameterSet<T>) {
        debug_assert_eq!(params.len(), self.params.len());
        self.params = params;
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn task(&self) -> Task {
        self.task
    }

    /// Source ids; an empty source is read as a lone end-of-sequence token.
    pub fn encode_source<S: AsRef<str>>(&self, source: &[S]) -> Vec<usize> {
        if source.is_empty() {
            vec![EOS]
        } else {
            self.src_vocab.encode(source)
        }
    }

    /// Runs the encoder and returns the annotations with the initial decoder
    /// state taken from the encoder's final states.
    pub fn encode(
        &self,
        g: &mut Graph<'_, T>,
        source: &[usize],
        dropout: Option<&mut Dropout>,
    ) -> Result<(Vec<NodeId>, DecoderState), ModelError> {
        let embedded: Vec<NodeId> = source
            .iter()
            .map(|&id| g.embed(self.net.src_embedding, id))
            .collect();
        let encoded = bidirectional_encode(g, &embedded, &self.net.encoder, dropout)?;
        let feed = g.input(vec![T::zero(); self.hyper.hidden]);
        Ok((
            encoded.annotations,
            DecoderState {
                layers: encoded.finals,
                feed,
            },
        ))
    }

    /// One decoder step with input feeding: returns the next state and the
    /// output logits.
    pub fn step(
        &self,
        g: &mut Graph<'_, T>,
        annotations: &[NodeId],
        state: &DecoderState,
        input: usize,
        mut dropout: Option<&mut Dropout>,
    ) -> (DecoderState, NodeId) {
        let emb = g.embed(self.net.tgt_embedding, input);
        let mut x = g.concat(&[emb, state.feed]);
        let mut layers = Vec::with_capacity(self.net.decoder.len());
        for (l, (layer, prev)) in self.net.decoder.iter().zip(&state.layers).enumerate() {
            if l > 0 {
                x = maybe_dropout(g, x, &mut dropout);
            }
            let s = lstm_cell(g, x, *prev, layer);
            x = s.h;
            layers.push(s);
        }
        let attended = global_attention(g, x, annotations, &self.net.attention);
        let out = maybe_dropout(g, attended.state, &mut dropout);
        let projected = g.matvec(self.net.generator, out);
        let bias = g.param(self.net.generator_bias);
        let logits = g.add(projected, bias);
        (DecoderState { layers, feed: out }, logits)
    }

    /// Teacher-forced summed cross-entropy of `target` followed by
    /// end-of-sequence. Returns the loss node and the per-step logits.
    pub fn sequence_loss(
        &self,
        g: &mut Graph<'_, T>,
        source: &[usize],
        target: &[usize],
        mut dropout: Option<&mut Dropout>,
    ) -> Result<(NodeId, Vec<NodeId>), ModelError> {
        let (annotations, mut state) = self.encode(g, source, dropout.as_deref_mut())?;
        let mut input = BOS;
        let mut losses = Vec::with_capacity(target.len() + 1);
        let mut all_logits = Vec::with_capacity(target.len() + 1);
        for &gold in target.iter().chain(std::iter::once(&EOS)) {
            let (next, logits) = self.step(g, &annotations, &state, input, dropout.as_deref_mut());
            losses.push(g.cross_entropy(logits, gold));
            all_logits.push(logits);
            state = next;
            input = gold;
        }
        Ok((g.sum(&losses), all_logits))
    }

    /// Sum of per-step log-probabilities of `target`, including the closing
    /// end-of-sequence step when `finished`.
    pub fn score<S: AsRef<str>>(&self, source: &[S], target: &[S], finished: bool) -> f64 {
        let src = self.encode_source(source);
        let tgt = self.tgt_vocab.encode(target);
        let mut g = Graph::new(&self.params);
        let (annotations, mut state) = self.encode(&mut g, &src, None).expect("non-empty source");
        let mut input = BOS;
        let mut total = 0.0;
        let closing = if finished { Some(EOS) } else { None };
        for gold in tgt.iter().copied().chain(closing) {
            let (next, logits) = self.step(&mut g, &annotations, &state, input, None);
            let lp = crate::nn::log_softmax(g.value(logits));
            total += lp[gold].to_f64_lossy();
            state = next;
            input = gold;
        }
        total
    }

    pub fn num_parameters(&self) -> usize {
        self.params.num_values()
    }

    /// Copy of the parameters converted to another scalar type.
    pub fn convert<U: Scalar>(&self) -> Seq2SeqModel<U> {
        let mut params = ParameterSet::new();
        for (_, name, t) in self.params.iter() {
            let values = t
                .values()
                .iter()
                .map(|v| U::from_f64_lossy(v.to_f64_lossy()))
                .collect();
            params
                .add(
                    name,
                    Tensor::new(t.shape().to_vec(), values).expect("same shape"),
                )
                .expect("unique names");
        }
        Seq2SeqModel {
            hyper: self.hyper.clone(),
            src_vocab: self.src_vocab.clone(),
            tgt_vocab: self.tgt_vocab.clone(),
            params,
            seed: self.seed,
            task: self.task,
            net: self.net.clone(),
        }
    }
}
