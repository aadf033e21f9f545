//! Pairwise similar/dissimilar constraint generation.
//!
//! Constraints come either straight from ground-truth class labels or from
//! a corrupted oracle that flips labels at configured false-positive /
//! false-negative rates. Corruption is a pure hash of (seed, i, j), so a
//! given pair always receives the same noisy label: the oracle behaves like
//! a fixed, imperfect similarity function rather than fresh coin flips per
//! visit, and results are independent of pair order and thread count.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loss::PairLabel;
use crate::rng::{splitmix64, unit_from_hash};

#[derive(Debug, Error, PartialEq)]
pub enum ConstraintError {
    #[error("pair ({i}, {j}) references an index outside 0..{len}")]
    IndexOutOfRange { i: usize, j: usize, len: usize },

    #[error("noise rate must lie in [0, 1], got {0}")]
    InvalidRate(f64),

    #[error("apply_noise expects ground-truth constraints, got an already-noisy set")]
    AlreadyNoisy,

    #[error("constraint sets cover different pair universes")]
    UniverseMismatch,

    #[error("constraint file line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

/// Where a constraint set's labels came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSource {
    GroundTruth,
    NoisyOracle,
}

/// Disjoint similar/dissimilar pair sets over some index universe.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub similar: Vec<(usize, usize)>,
    pub dissimilar: Vec<(usize, usize)>,
    pub source: ConstraintSource,
}

impl ConstraintSet {
    pub fn len(&self) -> usize {
        self.similar.len() + self.dissimilar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.similar.is_empty() && self.dissimilar.is_empty()
    }

    /// Per-pair labels aligned with `pairs` order. Pairs absent from the
    /// set yield `None`.
    pub fn labels_for(&self, pairs: &[(usize, usize)]) -> Vec<Option<PairLabel>> {
        let similar: HashSet<(usize, usize)> = self.similar.iter().copied().collect();
        let dissimilar: HashSet<(usize, usize)> = self.dissimilar.iter().copied().collect();
        pairs
            .iter()
            .map(|p| {
                if similar.contains(p) {
                    Some(PairLabel::Similar)
                } else if dissimilar.contains(p) {
                    Some(PairLabel::Dissimilar)
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Two-parameter flip model standing in for a learned similarity oracle:
/// a truly-similar pair is reported dissimilar with probability
/// `false_negative_rate`, a truly-dissimilar pair reported similar with
/// probability `false_positive_rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(false_positive_rate: f64, false_negative_rate: f64, seed: u64) -> Result<Self, ConstraintError> {
        for rate in [false_positive_rate, false_negative_rate] {
            if !(0.0..=1.0).contains(&rate) || !rate.is_finite() {
                return Err(ConstraintError::InvalidRate(rate));
            }
        }
        Ok(NoiseModel { false_positive_rate, false_negative_rate, seed })
    }

    /// Uniform draw in [0,1) attached to a specific pair identity,
    /// independent of the order the pair is written in.
    fn pair_draw(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let h = splitmix64(self.seed ^ splitmix64((lo as u64) << 32 | hi as u64));
        unit_from_hash(h)
    }
}

/// Label each pair from class labels: same class ⇒ similar, else dissimilar.
/// Every input pair lands in exactly one set.
pub fn constraints_from_labels(
    labels: &[usize],
    pairs: &[(usize, usize)],
) -> Result<ConstraintSet, ConstraintError> {
    let mut similar = Vec::new();
    let mut dissimilar = Vec::new();
    for &(i, j) in pairs {
        if i >= labels.len() || j >= labels.len() {
            return Err(ConstraintError::IndexOutOfRange { i, j, len: labels.len() });
        }
        if labels[i] == labels[j] {
            similar.push((i, j));
        } else {
            dissimilar.push((i, j));
        }
    }
    Ok(ConstraintSet { similar, dissimilar, source: ConstraintSource::GroundTruth })
}

/// Corrupt a ground-truth constraint set with the flip model. Deterministic
/// for a given (set, seed); each pair flips independently.
pub fn apply_noise(cs: &ConstraintSet, noise: &NoiseModel) -> Result<ConstraintSet, ConstraintError> {
    if cs.source != ConstraintSource::GroundTruth {
        return Err(ConstraintError::AlreadyNoisy);
    }
    let mut similar = Vec::new();
    let mut dissimilar = Vec::new();
    for &(i, j) in &cs.similar {
        if noise.pair_draw(i, j) < noise.false_negative_rate {
            dissimilar.push((i, j));
        } else {
            similar.push((i, j));
        }
    }
    for &(i, j) in &cs.dissimilar {
        if noise.pair_draw(i, j) < noise.false_positive_rate {
            similar.push((i, j));
        } else {
            dissimilar.push((i, j));
        }
    }
    Ok(ConstraintSet { similar, dissimilar, source: ConstraintSource::NoisyOracle })
}

/// Precision/recall of a noisy constraint set against the ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintQuality {
    pub similar_precision: f64,
    pub similar_recall: f64,
    pub dissimilar_precision: f64,
    pub dissimilar_recall: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0 // vacuously perfect
    } else {
        num as f64 / den as f64
    }
}

/// Standard precision/recall per label kind, truth as reference. Both sets
/// must cover the same pairs.
pub fn constraint_quality(
    noisy: &ConstraintSet,
    truth: &ConstraintSet,
) -> Result<ConstraintQuality, ConstraintError> {
    let universe =
        |cs: &ConstraintSet| -> HashSet<(usize, usize)> { cs.similar.iter().chain(&cs.dissimilar).copied().collect() };
    let noisy_universe = universe(noisy);
    if noisy_universe != universe(truth) || noisy_universe.len() != noisy.len() {
        return Err(ConstraintError::UniverseMismatch);
    }

    let true_similar: HashSet<(usize, usize)> = truth.similar.iter().copied().collect();
    let sim_tp = noisy.similar.iter().filter(|p| true_similar.contains(p)).count();
    let dis_tp = noisy.dissimilar.iter().filter(|p| !true_similar.contains(p)).count();

    Ok(ConstraintQuality {
        similar_precision: ratio(sim_tp, noisy.similar.len()),
        similar_recall: ratio(sim_tp, truth.similar.len()),
        dissimilar_precision: ratio(dis_tp, noisy.dissimilar.len()),
        dissimilar_recall: ratio(dis_tp, truth.dissimilar.len()),
    })
}

/// Serialize as one pair per line: `i j {+|-}`.
pub fn dump_constraints(cs: &ConstraintSet) -> String {
    let mut out = String::new();
    for &(i, j) in &cs.similar {
        let _ = writeln!(out, "{i} {j} +");
    }
    for &(i, j) in &cs.dissimilar {
        let _ = writeln!(out, "{i} {j} -");
    }
    out
}

pub fn write_constraints(cs: &ConstraintSet, path: &Path) -> Result<(), ConstraintError> {
    std::fs::write(path, dump_constraints(cs)).map_err(|e| ConstraintError::Io(e.to_string()))
}

/// Parse the `i j {+|-}` text format. The result is marked as oracle-sourced
/// since provenance is not stored in the file.
pub fn parse_constraints(text: &str) -> Result<ConstraintSet, ConstraintError> {
    let mut similar = Vec::new();
    let mut dissimilar = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let parse_idx = |tok: Option<&str>| -> Result<usize, ConstraintError> {
            tok.ok_or_else(|| ConstraintError::ParseError { line, message: "expected `i j {+|-}`".into() })?
                .parse()
                .map_err(|e| ConstraintError::ParseError { line, message: format!("bad index: {e}") })
        };
        let i = parse_idx(parts.next())?;
        let j = parse_idx(parts.next())?;
        let sign = parts
            .next()
            .ok_or_else(|| ConstraintError::ParseError { line, message: "missing label".into() })?;
        if parts.next().is_some() {
            return Err(ConstraintError::ParseError { line, message: "trailing tokens".into() });
        }
        match sign {
            "+" => similar.push((i, j)),
            "-" => dissimilar.push((i, j)),
            other => {
                return Err(ConstraintError::ParseError {
                    line,
                    message: format!("label must be + or -, got {other:?}"),
                })
            }
        }
    }
    Ok(ConstraintSet { similar, dissimilar, source: ConstraintSource::NoisyOracle })
}

pub fn read_constraints(path: &Path) -> Result<ConstraintSet, ConstraintError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConstraintError::Io(e.to_string()))?;
    parse_constraints(&text)
}
