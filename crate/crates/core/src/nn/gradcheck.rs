//! Central finite-difference checks for graph gradients.

use super::{Gradients, Graph, NodeId, ParameterSet};

const STEP: f64 = 1e-3;

/// Fourth-order central difference of `f` at `x`.
fn stencil(mut f: impl FnMut(f64) -> f64, x: f64) -> f64 {
    let (m2, m1) = (f(x - 2.0 * STEP), f(x - STEP));
    let (p1, p2) = (f(x + STEP), f(x + 2.0 * STEP));
    (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * STEP)
}

/// Largest relative error between backprop and central differences over
/// every parameter and input value. `build` constructs a scalar loss from
/// the input nodes.
pub fn max_grad_error<F>(params: &ParameterSet<f64>, inputs: &[Vec<f64>], build: F) -> f64
where
    F: Fn(&mut Graph<'_, f64>, &[NodeId]) -> NodeId,
{
    let eval = |p: &ParameterSet<f64>, xs: &[Vec<f64>]| {
        let mut g = Graph::new(p);
        let ids: Vec<NodeId> = xs.iter().map(|x| g.input(x.clone())).collect();
        let loss = build(&mut g, &ids);
        g.scalar(loss)
    };
    let mut grads = Gradients::new(params);
    let mut g = Graph::new(params);
    let ids: Vec<NodeId> = inputs.iter().map(|x| g.input(x.clone())).collect();
    let loss = build(&mut g, &ids);
    let input_grads = g.backward(loss, &mut grads);

    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
    let mut worst: f64 = 0.0;
    let mut p = params.clone();
    for (id, _, t) in params.iter() {
        for k in 0..t.len() {
            let orig = t.values()[k];
            let numeric = stencil(
                |x| {
                    p.get_mut(id).values_mut()[k] = x;
                    eval(&p, inputs)
                },
                orig,
            );
            p.get_mut(id).values_mut()[k] = orig;
            let analytic = grads.get(id).map_or(0.0, |g| g[k]);
            worst = worst.max(rel(analytic, numeric));
        }
    }
    let mut xs = inputs.to_vec();
    for (i, &node) in ids.iter().enumerate() {
        for k in 0..xs[i].len() {
            let orig = xs[i][k];
            let numeric = stencil(
                |x| {
                    xs[i][k] = x;
                    eval(params, &xs)
                },
                orig,
            );
            xs[i][k] = orig;
            let analytic = input_grads.get(node).map_or(0.0, |g| g[k]);
            worst = worst.max(rel(analytic, numeric));
        }
    }
    worst
}
