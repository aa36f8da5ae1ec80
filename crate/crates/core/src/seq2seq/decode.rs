use std::cmp::Ordering;

use super::model::{DecoderState, Seq2SeqModel};
use super::vocab::{BOS, EOS, PAD};
use crate::nn::{log_softmax, Graph, NodeId, Scalar};

/// Next-token log-probabilities given a decoder state and the previous token.
pub trait StepScorer {
    type State: Clone;

    fn initial(&mut self) -> Self::State;

    /// Consumes `input` and returns the new state with log-probabilities over
    /// the whole target vocabulary.
    fn step(&mut self, state: &Self::State, input: usize) -> (Self::State, Vec<f64>);
}

/// A decoded token-id sequence. `finished` is false when the length cap was
/// reached before end-of-sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct IdHypothesis {
    pub ids: Vec<usize>,
    pub score: f64,
    pub finished: bool,
}

/// A decoded token sequence without the closing end-of-sequence token.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub tokens: Vec<String>,
    pub score: f64,
    pub finished: bool,
}

fn emittable(token: usize) -> bool {
    token != PAD && token != BOS
}

/// Score descending, then token ids ascending.
fn rank(a_score: f64, a_ids: &[usize], b_score: f64, b_ids: &[usize]) -> Ordering {
    b_score
        .partial_cmp(&a_score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a_ids.cmp(b_ids))
}

/// Arg-max decoding; ties go to the lowest token id.
pub fn greedy_search<S: StepScorer>(scorer: &mut S, max_len: usize) -> IdHypothesis {
    let mut state = scorer.initial();
    let mut input = BOS;
    let mut ids = Vec::new();
    let mut score = 0.0;
    for _ in 0..max_len {
        let (next, lp) = scorer.step(&state, input);
        let mut best: Option<usize> = None;
        for (k, &v) in lp.iter().enumerate() {
            if emittable(k) && best.is_none_or(|b| v > lp[b]) {
                best = Some(k);
            }
        }
        let Some(token) = best else { break };
        score += lp[token];
        if token == EOS {
            return IdHypothesis {
                ids,
                score,
                finished: true,
            };
        }
        ids.push(token);
        state = next;
        input = token;
    }
    IdHypothesis {
        ids,
        score,
        finished: false,
    }
}

struct Live<St> {
    ids: Vec<usize>,
    score: f64,
    state: St,
}

/// Beam search keeping `beam_width` live prefixes per step. Finished
/// hypotheses leave the beam; prefixes still live at `max_len` are returned
/// as unfinished. Returns at most `n_best` unique sequences ranked by score
/// and then token ids.
pub fn beam_search<S: StepScorer>(
    scorer: &mut S,
    beam_width: usize,
    n_best: usize,
    max_len: usize,
) -> Vec<IdHypothesis> {
    assert!(
        1 <= n_best && n_best <= beam_width,
        "beam search needs 1 <= n_best <= beam_width"
    );
    let mut live = vec![Live {
        ids: Vec::new(),
        score: 0.0,
        state: scorer.initial(),
    }];
    let mut done: Vec<IdHypothesis> = Vec::new();
    for _ in 0..max_len {
        if live.is_empty() {
            break;
        }
        // scores only fall as sequences grow
        if done.len() >= n_best {
            let best_live = live
                .iter()
                .map(|h| h.score)
                .fold(f64::NEG_INFINITY, f64::max);
            if done[n_best - 1].score > best_live {
                break;
            }
        }
        let mut candidates: Vec<(f64, Vec<usize>, usize)> = Vec::new();
        let mut next_states = Vec::with_capacity(live.len());
        for (b, hyp) in live.iter().enumerate() {
            let input = hyp.ids.last().copied().unwrap_or(BOS);
            let (next, lp) = scorer.step(&hyp.state, input);
            next_states.push(next);
            for (k, &v) in lp.iter().enumerate() {
                if emittable(k) && v.is_finite() {
                    let mut ids = hyp.ids.clone();
                    ids.push(k);
                    candidates.push((hyp.score + v, ids, b));
                }
            }
        }
        candidates.sort_by(|a, b| rank(a.0, &a.1, b.0, &b.1));
        candidates.truncate(beam_width);
        let mut next_live = Vec::with_capacity(candidates.len());
        for (score, mut ids, b) in candidates {
            if ids.last() == Some(&EOS) {
                ids.pop();
                done.push(IdHypothesis {
                    ids,
                    score,
                    finished: true,
                });
            } else {
                next_live.push(Live {
                    ids,
                    score,
                    state: next_states[b].clone(),
                });
            }
        }
        done.sort_by(|a, b| rank(a.score, &a.ids, b.score, &b.ids));
        live = next_live;
    }
    done.extend(live.into_iter().map(|h| IdHypothesis {
        ids: h.ids,
        score: h.score,
        finished: false,
    }));
    done.sort_by(|a, b| rank(a.score, &a.ids, b.score, &b.ids));
    let mut out: Vec<IdHypothesis> = Vec::with_capacity(n_best);
    for h in done {
        if out.len() == n_best {
            break;
        }
        if !out.iter().any(|o| o.ids == h.ids) {
            out.push(h);
        }
    }
    out
}

/// Step scorer over a model for one source sequence.
pub struct ModelScorer<'m, T: Scalar> {
    model: &'m Seq2SeqModel<T>,
    graph: Graph<'m, T>,
    annotations: Vec<NodeId>,
    start: DecoderState,
}

impl<'m, T: Scalar> ModelScorer<'m, T> {
    pub fn new<S: AsRef<str>>(model: &'m Seq2SeqModel<T>, source: &[S]) -> Self {
        let ids = model.encode_source(source);
        let mut graph = Graph::new(model.params());
        let (annotations, start) = model
            .encode(&mut graph, &ids, None)
            .expect("encoded source is never empty");
        ModelScorer {
            model,
            graph,
            annotations,
            start,
        }
    }
}

impl<T: Scalar> StepScorer for ModelScorer<'_, T> {
    type State = DecoderState;

    fn initial(&mut self) -> DecoderState {
        self.start.clone()
    }

    fn step(&mut self, state: &DecoderState, input: usize) -> (DecoderState, Vec<f64>) {
        let (next, logits) =
            self.model
                .step(&mut self.graph, &self.annotations, state, input, None);
        let lp = log_softmax(self.graph.value(logits))
            .into_iter()
            .map(|v| v.to_f64_lossy())
            .collect();
        (next, lp)
    }
}

/// Default output length cap: `2 * |source| + 10`.
pub fn default_max_len(source_len: usize) -> usize {
    2 * source_len + 10
}

impl<T: Scalar> Seq2SeqModel<T> {
    fn to_tokens(&self, h: IdHypothesis) -> Hypothesis {
        Hypothesis {
            tokens: self.tgt_vocab().decode(&h.ids),
            score: h.score,
            finished: h.finished,
        }
    }

    pub fn greedy_decode<S: AsRef<str>>(&self, source: &[S], max_len: Option<usize>) -> Hypothesis {
        let cap = max_len.unwrap_or_else(|| default_max_len(source.len()));
        let mut scorer = ModelScorer::new(self, source);
        let h = greedy_search(&mut scorer, cap);
        self.to_tokens(h)
    }

    pub fn beam_decode<S: AsRef<str>>(
        &self,
        source: &[S],
        beam_width: usize,
        n_best: usize,
        max_len: Option<usize>,
    ) -> Vec<Hypothesis> {
        let cap = max_len.unwrap_or_else(|| default_max_len(source.len()));
        let mut scorer = ModelScorer::new(self, source);
        beam_search(&mut scorer, beam_width, n_best, cap)
            .into_iter()
            .map(|h| self.to_tokens(h))
            .collect()
    }
}
