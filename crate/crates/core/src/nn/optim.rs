use super::{NnError, ParameterSet, Scalar};

/// Global L2 norm of all accumulated gradients.
pub fn grad_norm<T: Scalar>(params: &ParameterSet<T>) -> T {
    params
        .iter()
        .filter_map(|(_, _, t)| t.grad())
        .flat_map(|g| g.iter())
        .fold(T::zero(), |acc, &v| acc + v * v)
        .sqrt()
}

/// Clips the global gradient norm to `clip_norm`, applies
/// `p ← p − lr · grad` and clears the gradients. Returns the norm before
/// clipping. A non-finite gradient leaves every parameter untouched.
pub fn sgd_step<T: Scalar>(
    params: &mut ParameterSet<T>,
    learning_rate: T,
    clip_norm: T,
) -> Result<T, NnError> {
    let (norm, scale) = clip_scale(params, clip_norm)?;
    let step = learning_rate * scale;
    for t in params.tensors_mut() {
        let Some(g) = t.grad().map(<[T]>::to_vec) else {
            continue;
        };
        for (p, gv) in t.values_mut().iter_mut().zip(g) {
            *p = *p - step * gv;
        }
        t.clear_grad();
    }
    Ok(norm)
}

/// Global norm and the factor that clips it to `clip_norm`. Clears the
/// gradients and fails when the norm is not finite.
fn clip_scale<T: Scalar>(params: &mut ParameterSet<T>, clip_norm: T) -> Result<(T, T), NnError> {
    let norm = grad_norm(params);
    if !norm.is_finite() {
        let culprit = params
            .iter()
            .find(|(_, _, t)| t.grad().is_some_and(|g| g.iter().any(|v| !v.is_finite())))
            .map(|(_, name, _)| name.to_string())
            .unwrap_or_default();
        params.clear_grads();
        return Err(NnError::NonFinite(format!("gradient of {culprit}")));
    }
    let scale = if clip_norm > T::zero() && norm > clip_norm {
        clip_norm / norm
    } else {
        T::one()
    };
    Ok((norm, scale))
}

/// First and second moment estimates for [`adam_step`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    steps: i32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &ParameterSet<T>) -> Self {
        let zeros = || {
            params
                .iter()
                .map(|(_, _, t)| vec![T::zero(); t.len()])
                .collect()
        };
        AdamState {
            beta1: T::from_f64_lossy(0.9),
            beta2: T::from_f64_lossy(0.999),
            epsilon: T::from_f64_lossy(1e-8),
            steps: 0,
            m: zeros(),
            v: zeros(),
        }
    }
}

/// Clipped Adam update with bias correction. Parameters without a gradient
/// are left alone. Returns the norm before clipping.
pub fn adam_step<T: Scalar>(
    params: &mut ParameterSet<T>,
    state: &mut AdamState<T>,
    learning_rate: T,
    clip_norm: T,
) -> Result<T, NnError> {
    let (norm, scale) = clip_scale(params, clip_norm)?;
    state.steps += 1;
    let one = T::one();
    let c1 = one - state.beta1.powi(state.steps);
    let c2 = one - state.beta2.powi(state.steps);
    for (k, t) in params.tensors_mut().enumerate() {
        let Some(g) = t.grad().map(<[T]>::to_vec) else {
            continue;
        };
        let (m, v) = (&mut state.m[k], &mut state.v[k]);
        for (i, p) in t.values_mut().iter_mut().enumerate() {
            let gi = g[i] * scale;
            m[i] = state.beta1 * m[i] + (one - state.beta1) * gi;
            v[i] = state.beta2 * v[i] + (one - state.beta2) * gi * gi;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            *p = *p - learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
        }
        t.clear_grad();
    }
    Ok(norm)
}
