//! Pair losses over categorical cluster-assignment distributions.
//!
//! Two objectives share one interface:
//!
//! * the likelihood loss (`ccl_*`): a pair's probability of landing in the
//!   same cluster is the inner product of the two assignment distributions,
//!   and the loss is the negative log of that probability (or of its
//!   complement for dissimilar pairs);
//! * the KL-divergence contrastive loss (`kcl_*`): symmetric KL between the
//!   two distributions for similar pairs, hinged against a margin for
//!   dissimilar pairs.
//!
//! All arithmetic is `f64`. Log arguments and divisors are clamped to
//! `[LOG_EPS, 1]` so losses and gradients stay finite at the simplex
//! corners; gradients are hand-derived and checked against central finite
//! differences in the tests.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

/// Clamp floor applied inside every `ln` and before every division.
pub const LOG_EPS: f64 = 1e-12;

/// Tolerance on `sum(probs) == 1` when validating a [`ProbVector`].
pub const PROB_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum LossError {
    #[error("distribution lengths differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("pair batch is empty")]
    EmptyBatch,

    #[error("margin must be positive, got {0}")]
    InvalidMargin(f64),
}

/// A length-k categorical distribution: one sample's soft cluster assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates non-negativity and `sum == 1` within [`PROB_SUM_TOL`].
    pub fn new(probs: Vec<f64>) -> Result<Self, LossError> {
        if probs.is_empty() {
            return Err(LossError::InvalidProbability("empty vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(LossError::InvalidProbability(format!(
                "entry {p} is negative or not finite"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(LossError::InvalidProbability(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(ProbVector(probs))
    }

    /// Softmax of arbitrary logits; always produces a valid distribution.
    pub fn from_logits(logits: &[f64]) -> Self {
        let mut probs = logits.to_vec();
        softmax_row(&mut probs);
        ProbVector(probs)
    }

    pub fn uniform(k: usize) -> Self {
        ProbVector(vec![1.0 / k as f64; k])
    }

    pub fn one_hot(k: usize, index: usize) -> Self {
        let mut v = vec![0.0; k];
        v[index] = 1.0;
        ProbVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// In-place, numerically safe softmax (max subtraction before exp).
pub fn softmax_row(row: &mut [f64]) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Whether a pair must share a cluster or must not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairLabel {
    Similar,
    Dissimilar,
}

/// Loss value plus gradients with respect to both input distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct PairLossGrad {
    pub loss: f64,
    pub grad_p: Vec<f64>,
    pub grad_q: Vec<f64>,
}

/// Which pair objective a run trains with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Ccl,
    Kcl,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LossKind::Ccl => write!(f, "ccl"),
            LossKind::Kcl => write!(f, "kcl"),
        }
    }
}

/// A fully parameterized pair objective (kind + KCL margin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairObjective {
    kind: LossKind,
    margin: f64,
}

/// Conventional margin for the KL-contrastive baseline.
pub const DEFAULT_KCL_MARGIN: f64 = 2.0;

impl PairObjective {
    pub fn ccl() -> Self {
        PairObjective { kind: LossKind::Ccl, margin: DEFAULT_KCL_MARGIN }
    }

    pub fn kcl(margin: f64) -> Result<Self, LossError> {
        if margin <= 0.0 || !margin.is_finite() {
            return Err(LossError::InvalidMargin(margin));
        }
        Ok(PairObjective { kind: LossKind::Kcl, margin })
    }

    pub fn new(kind: LossKind, margin: f64) -> Result<Self, LossError> {
        match kind {
            LossKind::Ccl => Ok(Self::ccl()),
            LossKind::Kcl => Self::kcl(margin),
        }
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Loss and unscaled gradients for one pair, writing into `gp`/`gq`.
    fn pair_into(&self, p: &[f64], q: &[f64], label: PairLabel, gp: &mut [f64], gq: &mut [f64]) -> f64 {
        match self.kind {
            LossKind::Ccl => ccl_pair_into(p, q, label, gp, gq),
            LossKind::Kcl => kcl_pair_into(p, q, label, self.margin, gp, gq),
        }
    }
}

/// How per-pair losses are reduced over a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairWeighting {
    /// Unweighted mean over all pairs.
    #[default]
    Mean,
    /// Similar and dissimilar sets each get total weight 1/2, countering the
    /// roughly (k-1):1 dissimilar majority under dense enumeration.
    ClassBalanced,
}

fn check_lens(p: &[f64], q: &[f64]) -> Result<(), LossError> {
    if p.len() != q.len() {
        return Err(LossError::DimensionMismatch { left: p.len(), right: q.len() });
    }
    Ok(())
}

fn dot(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * b).sum()
}

/// Probability that two samples land in the same cluster: the inner product
/// of their assignment distributions. Always in `[0, 1]` for simplex inputs.
pub fn pair_similarity_prob(p: &ProbVector, q: &ProbVector) -> Result<f64, LossError> {
    check_lens(p.as_slice(), q.as_slice())?;
    Ok(dot(p.as_slice(), q.as_slice()))
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(LOG_EPS, 1.0)
}

/// Kernel: likelihood loss for one pair, gradients written unscaled.
fn ccl_pair_into(p: &[f64], q: &[f64], label: PairLabel, gp: &mut [f64], gq: &mut [f64]) -> f64 {
    let s = dot(p, q);
    match label {
        PairLabel::Similar => {
            let sc = clamp_unit(s);
            for (g, &qc) in gp.iter_mut().zip(q) {
                *g = -qc / sc;
            }
            for (g, &pc) in gq.iter_mut().zip(p) {
                *g = -pc / sc;
            }
            // + 0.0 normalizes the -0.0 that -ln(1) produces
            -sc.ln() + 0.0
        }
        PairLabel::Dissimilar => {
            let tc = clamp_unit(1.0 - s);
            for (g, &qc) in gp.iter_mut().zip(q) {
                *g = qc / tc;
            }
            for (g, &pc) in gq.iter_mut().zip(p) {
                *g = pc / tc;
            }
            -tc.ln() + 0.0
        }
    }
}

/// Likelihood pair loss. Similar pairs pay `-ln(p·q)`, dissimilar pairs pay
/// `-ln(1 - p·q)`; gradients follow the clamped expressions.
pub fn ccl_pair_loss(p: &ProbVector, q: &ProbVector, label: PairLabel) -> Result<PairLossGrad, LossError> {
    check_lens(p.as_slice(), q.as_slice())?;
    let k = p.len();
    let mut grad_p = vec![0.0; k];
    let mut grad_q = vec![0.0; k];
    let loss = ccl_pair_into(p.as_slice(), q.as_slice(), label, &mut grad_p, &mut grad_q);
    Ok(PairLossGrad { loss, grad_p, grad_q })
}

/// `KL(p‖q)` with the standard clamp inside both logs.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&pc, &qc)| pc * (clamp_unit(pc).ln() - clamp_unit(qc).ln()))
        .sum()
}

/// Kernel: KL-contrastive loss for one pair, gradients written unscaled.
/// `lp`/`lq` carry `ln(clamp(p_c))`/`ln(clamp(q_c))`, precomputed so batch
/// callers pay for the logs once per sample instead of once per pair.
///
/// Similar: `KL(p‖q) + KL(q‖p)`. Dissimilar: each KL term hinged as
/// `max(0, margin - KL)`. Gradients are zero wherever a hinge is inactive
/// and wherever the log clamp has flattened a term.
fn kcl_pair_with_logs(
    p: &[f64],
    q: &[f64],
    lp: &[f64],
    lq: &[f64],
    label: PairLabel,
    margin: f64,
    gp: &mut [f64],
    gq: &mut [f64],
) -> f64 {
    let kl_pq: f64 = p.iter().zip(lp).zip(lq).map(|((&pc, &a), &b)| pc * (a - b)).sum();
    let kl_qp: f64 = q.iter().zip(lq).zip(lp).map(|((&qc, &a), &b)| qc * (a - b)).sum();
    gp.fill(0.0);
    gq.fill(0.0);

    // d/dp KL(p‖q) = ln p - ln q + 1 (clamped); d/dp KL(q‖p) = -q/p.
    // Terms whose argument sits below the clamp have zero derivative.
    let add_sym_kl = |sign: f64, active_pq: bool, active_qp: bool, gp: &mut [f64], gq: &mut [f64]| {
        for c in 0..p.len() {
            let (pc, qc) = (p[c], q[c]);
            if active_pq {
                if pc > LOG_EPS {
                    gp[c] += sign * (lp[c] - lq[c] + 1.0);
                }
                if qc > LOG_EPS {
                    gq[c] += sign * (-pc / qc);
                }
            }
            if active_qp {
                if qc > LOG_EPS {
                    gq[c] += sign * (lq[c] - lp[c] + 1.0);
                }
                if pc > LOG_EPS {
                    gp[c] += sign * (-qc / pc);
                }
            }
        }
    };

    match label {
        PairLabel::Similar => {
            add_sym_kl(1.0, true, true, gp, gq);
            kl_pq + kl_qp
        }
        PairLabel::Dissimilar => {
            let active_pq = margin - kl_pq > 0.0;
            let active_qp = margin - kl_qp > 0.0;
            add_sym_kl(-1.0, active_pq, active_qp, gp, gq);
            (margin - kl_pq).max(0.0) + (margin - kl_qp).max(0.0)
        }
    }
}

fn clamped_logs(row: &[f64]) -> Vec<f64> {
    row.iter().map(|&v| clamp_unit(v).ln()).collect()
}

fn kcl_pair_into(p: &[f64], q: &[f64], label: PairLabel, margin: f64, gp: &mut [f64], gq: &mut [f64]) -> f64 {
    kcl_pair_with_logs(p, q, &clamped_logs(p), &clamped_logs(q), label, margin, gp, gq)
}

/// KL-contrastive pair loss with hinge margin (the baseline objective).
pub fn kcl_pair_loss(
    p: &ProbVector,
    q: &ProbVector,
    label: PairLabel,
    margin: f64,
) -> Result<PairLossGrad, LossError> {
    check_lens(p.as_slice(), q.as_slice())?;
    if margin <= 0.0 || !margin.is_finite() {
        return Err(LossError::InvalidMargin(margin));
    }
    let k = p.len();
    let mut grad_p = vec![0.0; k];
    let mut grad_q = vec![0.0; k];
    let loss = kcl_pair_into(p.as_slice(), q.as_slice(), label, margin, &mut grad_p, &mut grad_q);
    Ok(PairLossGrad { loss, grad_p, grad_q })
}

/// Per-pair weights for a reduction mode. Weights always sum to 1.
fn pair_weights(labels: &[PairLabel], weighting: PairWeighting) -> Vec<f64> {
    let n = labels.len();
    match weighting {
        PairWeighting::Mean => vec![1.0 / n as f64; n],
        PairWeighting::ClassBalanced => {
            let n_sim = labels.iter().filter(|l| **l == PairLabel::Similar).count();
            let n_dis = n - n_sim;
            let (w_sim, w_dis) = match (n_sim, n_dis) {
                (0, d) => (0.0, 1.0 / d as f64),
                (s, 0) => (1.0 / s as f64, 0.0),
                (s, d) => (0.5 / s as f64, 0.5 / d as f64),
            };
            labels
                .iter()
                .map(|l| match l {
                    PairLabel::Similar => w_sim,
                    PairLabel::Dissimilar => w_dis,
                })
                .collect()
        }
    }
}

/// Reduce a batch of pairs to one loss plus per-pair gradients, each already
/// scaled by its reduction weight (1/|pairs| for the mean).
pub fn batch_loss(
    pair_probs: &[(ProbVector, ProbVector, PairLabel)],
    objective: PairObjective,
    weighting: PairWeighting,
) -> Result<(f64, Vec<PairLossGrad>), LossError> {
    if pair_probs.is_empty() {
        return Err(LossError::EmptyBatch);
    }
    let labels: Vec<PairLabel> = pair_probs.iter().map(|(_, _, l)| *l).collect();
    let weights = pair_weights(&labels, weighting);

    let mut total = 0.0;
    let mut grads = Vec::with_capacity(pair_probs.len());
    for ((p, q, label), &w) in pair_probs.iter().zip(&weights) {
        check_lens(p.as_slice(), q.as_slice())?;
        let k = p.len();
        let mut grad_p = vec![0.0; k];
        let mut grad_q = vec![0.0; k];
        let loss = objective.pair_into(p.as_slice(), q.as_slice(), *label, &mut grad_p, &mut grad_q);
        total += w * loss;
        for g in &mut grad_p {
            *g *= w;
        }
        for g in &mut grad_q {
            *g *= w;
        }
        grads.push(PairLossGrad { loss, grad_p, grad_q });
    }
    Ok((total, grads))
}

/// Fused batch reduction over rows of a probability matrix: computes the
/// same weighted loss as [`batch_loss`] and accumulates the scaled pair
/// gradients straight into an `n×k` gradient-of-probabilities matrix,
/// skipping the per-pair allocations. Used by the training loop.
pub fn batch_loss_dense(
    probs: &Matrix,
    pairs: &[(usize, usize)],
    labels: &[PairLabel],
    objective: PairObjective,
    weighting: PairWeighting,
) -> Result<(f64, Matrix), LossError> {
    if pairs.is_empty() {
        return Err(LossError::EmptyBatch);
    }
    assert_eq!(pairs.len(), labels.len(), "one label per pair");
    let k = probs.cols();
    let weights = pair_weights(labels, weighting);

    // logs are per-sample, not per-pair; hoist them out of the pair loop
    let log_probs: Option<Matrix> = match objective.kind {
        LossKind::Ccl => None,
        LossKind::Kcl => {
            let mut m = probs.clone();
            m.map_inplace(|v| clamp_unit(v).ln());
            Some(m)
        }
    };

    let mut dprobs = Matrix::zeros(probs.rows(), k);
    let mut gp = vec![0.0; k];
    let mut gq = vec![0.0; k];
    let mut total = 0.0;
    for ((&(i, j), label), &w) in pairs.iter().zip(labels).zip(&weights) {
        let loss = match &log_probs {
            None => ccl_pair_into(probs.row(i), probs.row(j), *label, &mut gp, &mut gq),
            Some(logs) => kcl_pair_with_logs(
                probs.row(i),
                probs.row(j),
                logs.row(i),
                logs.row(j),
                *label,
                objective.margin,
                &mut gp,
                &mut gq,
            ),
        };
        total += w * loss;
        for (d, &g) in dprobs.row_mut(i).iter_mut().zip(&gp) {
            *d += g * w;
        }
        for (d, &g) in dprobs.row_mut(j).iter_mut().zip(&gq) {
            *d += g * w;
        }
    }
    Ok((total, dprobs))
}
