use super::TrainingError;
use crate::network::NetworkParams;

/// Adam moments, flattened in the canonical parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(params: &NetworkParams) -> Self {
        let n = params.num_params();
        Self { m: vec![0.0; n], v: vec![0.0; n], step: 0, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// One bias-corrected Adam update. Refuses (and leaves everything
/// untouched) when a gradient entry is not finite.
pub fn adam_step(
    params: &mut NetworkParams,
    grads: &NetworkParams,
    state: &mut AdamState,
    lr: f64,
) -> Result<(), TrainingError> {
    if params.num_params() != state.m.len() || grads.num_params() != state.m.len() {
        return Err(TrainingError::Config("Adam state does not match the parameter shape".into()));
    }
    let gblocks = grads.blocks();
    if gblocks.iter().any(|b| b.iter().any(|g| !g.is_finite())) {
        return Err(TrainingError::NonFiniteGradient { step: state.step + 1 });
    }
    state.step += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let step = i32::try_from(state.step).unwrap_or(i32::MAX);
    let c1 = 1.0 - b1.powi(step);
    let c2 = 1.0 - b2.powi(step);
    let mut offset = 0;
    for (p, g) in params.blocks_mut().into_iter().zip(gblocks) {
        let m = &mut state.m[offset..offset + p.len()];
        let v = &mut state.v[offset..offset + p.len()];
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + state.eps);
        }
        offset += p.len();
    }
    Ok(())
}
