//! Recurrent and attention building blocks on top of [`Graph`].

use super::{Graph, NnError, NodeId, ParamId, ParameterSet, Scalar, Tensor};
use crate::rng::SeededRng;

/// One LSTM layer: a fused `4H x (I + H)` weight over `[x; h]` and a `4H`
/// bias. Gate blocks are ordered input, forget, cell candidate, output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LstmLayer {
    pub weight: ParamId,
    pub bias: ParamId,
    pub input_size: usize,
    pub hidden: usize,
}

impl LstmLayer {
    pub fn register<T: Scalar>(
        params: &mut ParameterSet<T>,
        name: &str,
        input_size: usize,
        hidden: usize,
        init: &mut Init,
    ) -> Result<Self, NnError> {
        let weight = params.add(
            &format!("{name}.weight"),
            init.tensor(vec![4 * hidden, input_size + hidden]),
        )?;
        let bias = params.add(&format!("{name}.bias"), init.tensor(vec![4 * hidden]))?;
        Ok(LstmLayer {
            weight,
            bias,
            input_size,
            hidden,
        })
    }

    /// Looks up a layer registered under `name`, checking shapes.
    pub fn find<T: Scalar>(params: &ParameterSet<T>, name: &str) -> Result<Self, NnError> {
        let weight = lookup(params, &format!("{name}.weight"))?;
        let bias = lookup(params, &format!("{name}.bias"))?;
        let shape = params.get(weight).shape().to_vec();
        if shape.len() != 2 || !shape[0].is_multiple_of(4) || shape[1] < shape[0] / 4 {
            return Err(NnError::Shape(format!("{name}.weight has shape {shape:?}")));
        }
        let hidden = shape[0] / 4;
        if params.get(bias).shape() != [4 * hidden] {
            return Err(NnError::Shape(format!(
                "{name}.bias does not match {name}.weight"
            )));
        }
        Ok(LstmLayer {
            weight,
            bias,
            input_size: shape[1] - hidden,
            hidden,
        })
    }
}

pub(crate) fn lookup<T: Scalar>(params: &ParameterSet<T>, name: &str) -> Result<ParamId, NnError> {
    params
        .id(name)
        .ok_or_else(|| NnError::Shape(format!("missing parameter {name:?}")))
}

/// Uniform initializer in `[-bound, bound]` drawing from a seeded stream.
pub struct Init {
    pub bound: f64,
    pub rng: SeededRng,
}

impl Init {
    pub fn tensor<T: Scalar>(&mut self, shape: Vec<usize>) -> Tensor<T> {
        Tensor::uniform(shape, self.bound, &mut self.rng)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LstmState {
    pub h: NodeId,
    pub c: NodeId,
}

impl LstmState {
    pub fn zeros<T: Scalar>(g: &mut Graph<'_, T>, hidden: usize) -> Self {
        LstmState {
            h: g.input(vec![T::zero(); hidden]),
            c: g.input(vec![T::zero(); hidden]),
        }
    }
}

/// One LSTM step:
/// `i, f, o = σ(·)`, `ĉ = tanh(·)`, `c = f ⊙ c_prev + i ⊙ ĉ`, `h = o ⊙ tanh(c)`.
pub fn lstm_cell<T: Scalar>(
    g: &mut Graph<'_, T>,
    x: NodeId,
    prev: LstmState,
    layer: &LstmLayer,
) -> LstmState {
    let h = layer.hidden;
    assert_eq!(
        g.value(x).len(),
        layer.input_size,
        "lstm input size mismatch"
    );
    assert_eq!(g.value(prev.h).len(), h, "lstm hidden size mismatch");
    let xh = g.concat(&[x, prev.h]);
    let wx = g.matvec(layer.weight, xh);
    let b = g.param(layer.bias);
    let z = g.add(wx, b);
    let zi = g.slice(z, 0, h);
    let zf = g.slice(z, h, h);
    let zc = g.slice(z, 2 * h, h);
    let zo = g.slice(z, 3 * h, h);
    let i = g.sigmoid(zi);
    let f = g.sigmoid(zf);
    let cand = g.tanh(zc);
    let o = g.sigmoid(zo);
    let keep = g.mul(f, prev.c);
    let write = g.mul(i, cand);
    let c = g.add(keep, write);
    let tc = g.tanh(c);
    let h = g.mul(o, tc);
    LstmState { h, c }
}

/// Inverted dropout with masks drawn from a seeded stream.
pub struct Dropout {
    pub rate: f64,
    pub rng: SeededRng,
}

impl Dropout {
    pub fn apply<T: Scalar>(&mut self, g: &mut Graph<'_, T>, x: NodeId) -> NodeId {
        if self.rate <= 0.0 {
            return x;
        }
        let scale = T::from_f64_lossy(1.0 / (1.0 - self.rate));
        let mask = (0..g.value(x).len())
            .map(|_| {
                if self.rng.unit() < self.rate {
                    T::zero()
                } else {
                    scale
                }
            })
            .collect();
        g.mask(x, mask)
    }
}

pub(crate) fn maybe_dropout<T: Scalar>(
    g: &mut Graph<'_, T>,
    x: NodeId,
    dropout: &mut Option<&mut Dropout>,
) -> NodeId {
    match dropout {
        Some(d) => d.apply(g, x),
        None => x,
    }
}

/// Stacked bidirectional LSTM. Layer `k > 0` reads the concatenated outputs
/// of layer `k - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiEncoder {
    pub layers: Vec<(LstmLayer, LstmLayer)>,
}

#[derive(Clone, Debug)]
pub struct Encoded {
    /// `[forward; backward]` top-layer output per position.
    pub annotations: Vec<NodeId>,
    /// Per layer, final forward and backward states concatenated.
    pub finals: Vec<LstmState>,
}

pub fn bidirectional_encode<T: Scalar>(
    g: &mut Graph<'_, T>,
    embedded: &[NodeId],
    encoder: &BiEncoder,
    mut dropout: Option<&mut Dropout>,
) -> Result<Encoded, NnError> {
    if embedded.is_empty() {
        return Err(NnError::EmptySequence);
    }
    let n = embedded.len();
    let mut inputs = embedded.to_vec();
    let mut finals = Vec::with_capacity(encoder.layers.len());
    for (k, (fwd, bwd)) in encoder.layers.iter().enumerate() {
        if k > 0 {
            for x in &mut inputs {
                *x = maybe_dropout(g, *x, &mut dropout);
            }
        }
        let mut state = LstmState::zeros(g, fwd.hidden);
        let mut forward = Vec::with_capacity(n);
        for &x in &inputs {
            state = lstm_cell(g, x, state, fwd);
            forward.push(state.h);
        }
        let last_fwd = state;
        let mut state = LstmState::zeros(g, bwd.hidden);
        let mut backward = vec![state.h; n];
        for t in (0..n).rev() {
            state = lstm_cell(g, inputs[t], state, bwd);
            backward[t] = state.h;
        }
        let last_bwd = state;
        finals.push(LstmState {
            h: g.concat(&[last_fwd.h, last_bwd.h]),
            c: g.concat(&[last_fwd.c, last_bwd.c]),
        });
        inputs = forward
            .into_iter()
            .zip(backward)
            .map(|(f, b)| g.concat(&[f, b]))
            .collect();
    }
    Ok(Encoded {
        annotations: inputs,
        finals,
    })
}

/// General (bilinear) global attention parameters: `score` is `W_a`
/// (`H x H`), `combine` is `W_c` (`H x 2H`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Attention {
    pub score: ParamId,
    pub combine: ParamId,
}

#[derive(Clone, Debug)]
pub struct Attended {
    /// `tanh(W_c [context; query])`
    pub state: NodeId,
    pub context: NodeId,
    pub weights: NodeId,
}

/// Scores `s_i = qᵀ W_a a_i`, weights `softmax(s)`, context `Σ w_i a_i`.
pub fn global_attention<T: Scalar>(
    g: &mut Graph<'_, T>,
    query: NodeId,
    annotations: &[NodeId],
    attention: &Attention,
) -> Attended {
    assert!(!annotations.is_empty(), "attention over an empty sequence");
    let projected = g.matvec_t(attention.score, query);
    let scores: Vec<NodeId> = annotations.iter().map(|&a| g.dot(projected, a)).collect();
    let stacked = g.stack(&scores);
    let weights = g.softmax(stacked);
    let context = g.weighted_sum(weights, annotations);
    let joined = g.concat(&[context, query]);
    let combined = g.matvec(attention.combine, joined);
    let state = g.tanh(combined);
    Attended {
        state,
        context,
        weights,
    }
}
