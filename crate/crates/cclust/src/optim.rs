//! SGD (optional momentum) and Adam, plus the step-decay schedule and an
//! opt-in max-norm gradient clip.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::MLPParams;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum OptimError {
    #[error("learning rate must be positive, got {0}")]
    InvalidLearningRate(f64),

    #[error("gradient contains a non-finite entry")]
    NonFiniteGradient,

    #[error("gradient shapes do not match parameter shapes")]
    ShapeMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// Optimizer kind, current learning rate, and per-parameter buffers.
///
/// For SGD `m` holds the momentum velocity; for Adam `m`/`v` hold the first
/// and second moment estimates. Buffers mirror the parameter shapes exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    /// SGD momentum coefficient; 0 disables the velocity buffer update term.
    pub momentum: f64,
    pub step: u64,
    m: MLPParams,
    v: MLPParams,
}

impl OptimizerState {
    pub fn new(
        kind: OptimizerKind,
        learning_rate: f64,
        momentum: f64,
        params: &MLPParams,
    ) -> Result<Self, OptimError> {
        if learning_rate < 0.0 || !learning_rate.is_finite() {
            return Err(OptimError::InvalidLearningRate(learning_rate));
        }
        Ok(OptimizerState {
            kind,
            learning_rate,
            momentum,
            step: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        })
    }

    pub fn sgd(learning_rate: f64, momentum: f64, params: &MLPParams) -> Result<Self, OptimError> {
        Self::new(OptimizerKind::Sgd, learning_rate, momentum, params)
    }

    pub fn adam(learning_rate: f64, params: &MLPParams) -> Result<Self, OptimError> {
        Self::new(OptimizerKind::Adam, learning_rate, 0.0, params)
    }
}

/// One parameter update in place. Rejects non-finite gradients so the
/// training loop can surface the failing epoch/batch.
pub fn optimizer_step(
    params: &mut MLPParams,
    grads: &MLPParams,
    state: &mut OptimizerState,
) -> Result<(), OptimError> {
    if params.layers.len() != grads.layers.len() {
        return Err(OptimError::ShapeMismatch);
    }
    for (p, g) in params.layers.iter().zip(&grads.layers) {
        if p.weights.rows() != g.weights.rows()
            || p.weights.cols() != g.weights.cols()
            || p.bias.len() != g.bias.len()
        {
            return Err(OptimError::ShapeMismatch);
        }
    }
    if !grads.is_finite() {
        return Err(OptimError::NonFiniteGradient);
    }

    let lr = state.learning_rate;
    match state.kind {
        OptimizerKind::Sgd => {
            let mu = state.momentum;
            for ((p, g), m) in params.layers.iter_mut().zip(&grads.layers).zip(&mut state.m.layers) {
                for ((pw, &gw), mw) in p
                    .weights
                    .data_mut()
                    .iter_mut()
                    .zip(g.weights.data())
                    .zip(m.weights.data_mut())
                {
                    *mw = mu * *mw + gw;
                    *pw -= lr * *mw;
                }
                for ((pb, &gb), mb) in p.bias.iter_mut().zip(&g.bias).zip(m.bias.iter_mut()) {
                    *mb = mu * *mb + gb;
                    *pb -= lr * *mb;
                }
            }
        }
        OptimizerKind::Adam => {
            let t = state.step + 1;
            let bc1 = 1.0 - ADAM_BETA1.powi(t as i32);
            let bc2 = 1.0 - ADAM_BETA2.powi(t as i32);
            for (((p, g), m), v) in params
                .layers
                .iter_mut()
                .zip(&grads.layers)
                .zip(&mut state.m.layers)
                .zip(&mut state.v.layers)
            {
                let update = |pv: &mut f64, gv: f64, mv: &mut f64, vv: &mut f64| {
                    *mv = ADAM_BETA1 * *mv + (1.0 - ADAM_BETA1) * gv;
                    *vv = ADAM_BETA2 * *vv + (1.0 - ADAM_BETA2) * gv * gv;
                    let m_hat = *mv / bc1;
                    let v_hat = *vv / bc2;
                    *pv -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                };
                for ((pw, &gw), (mw, vw)) in p
                    .weights
                    .data_mut()
                    .iter_mut()
                    .zip(g.weights.data())
                    .zip(m.weights.data_mut().iter_mut().zip(v.weights.data_mut()))
                {
                    update(pw, gw, mw, vw);
                }
                for ((pb, &gb), (mb, vb)) in p
                    .bias
                    .iter_mut()
                    .zip(&g.bias)
                    .zip(m.bias.iter_mut().zip(v.bias.iter_mut()))
                {
                    update(pb, gb, mb, vb);
                }
            }
        }
    }
    state.step += 1;
    Ok(())
}

/// Step-decay schedule: the base rate is multiplied by 0.1 for every
/// milestone at or below the current epoch.
pub fn lr_at_epoch(base: f64, milestones: &[usize], epoch: usize) -> f64 {
    let drops = milestones.iter().filter(|&&m| m <= epoch).count();
    base * 0.1f64.powi(drops as i32)
}

/// Scale the gradient down to `max_norm` if its global L2 norm exceeds it.
/// Returns the pre-clip norm.
pub fn clip_grad_norm(grads: &mut MLPParams, max_norm: f64) -> f64 {
    let norm = grads.l2_norm();
    if norm > max_norm && norm > 0.0 {
        grads.scale(max_norm / norm);
    }
    norm
}
