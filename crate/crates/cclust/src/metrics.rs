//! Clustering evaluation: Hungarian-matched accuracy and normalized mutual
//! information, both computed from a contingency table.
//!
//! Accuracy solves the maximum-weight one-to-one assignment between
//! predicted clusters and true classes (Kuhn–Munkres on the zero-padded
//! square table), so it is invariant to any relabeling on either side and
//! handles the over-clustered case where the network has more outputs than
//! there are classes: unmatched predicted clusters simply contribute
//! nothing. NMI uses natural-log entropies normalized by the geometric mean
//! `sqrt(H(U) H(V))`.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("prediction and truth lengths differ: {pred} vs {truth}")]
    LengthMismatch { pred: usize, truth: usize },

    #[error("cannot evaluate an empty labeling")]
    EmptyInput,

    #[error("brute-force oracle supports dimensions up to {max}, got {got}")]
    OracleBound { max: usize, got: usize },
}

/// Contingency counts between predicted clusters (rows) and true classes
/// (columns), over densely re-indexed, observed labels only.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<usize>>,
    /// Original predicted-cluster id per row.
    row_labels: Vec<usize>,
    /// Original true-class id per column.
    col_labels: Vec<usize>,
    n: usize,
}

impl ConfusionMatrix {
    pub fn k_pred(&self) -> usize {
        self.counts.len()
    }

    pub fn k_true(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn row_labels(&self) -> &[usize] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[usize] {
        &self.col_labels
    }

    /// Build directly from counts (test helper and oracle entry point).
    pub fn from_counts(counts: Vec<Vec<usize>>) -> Self {
        let n = counts.iter().flatten().sum();
        let row_labels = (0..counts.len()).collect();
        let col_labels = (0..counts.first().map_or(0, Vec::len)).collect();
        ConfusionMatrix { counts, row_labels, col_labels, n }
    }

    /// Transposed table (used by the NMI symmetry property).
    pub fn transposed(&self) -> ConfusionMatrix {
        let mut counts = vec![vec![0usize; self.k_pred()]; self.k_true()];
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                counts[j][i] = c;
            }
        }
        ConfusionMatrix {
            counts,
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            n: self.n,
        }
    }
}

fn dense_index(labels: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let index: Vec<usize> = labels
        .iter()
        .map(|l| distinct.binary_search(l).unwrap())
        .collect();
    (distinct, index)
}

/// Count co-occurrences of predicted cluster ids and true class ids.
pub fn confusion(pred: &[usize], truth: &[usize]) -> Result<ConfusionMatrix, MetricsError> {
    if pred.len() != truth.len() {
        return Err(MetricsError::LengthMismatch { pred: pred.len(), truth: truth.len() });
    }
    if pred.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let (row_labels, pred_idx) = dense_index(pred);
    let (col_labels, truth_idx) = dense_index(truth);
    let mut counts = vec![vec![0usize; col_labels.len()]; row_labels.len()];
    for (&r, &c) in pred_idx.iter().zip(&truth_idx) {
        counts[r][c] += 1;
    }
    Ok(ConfusionMatrix { counts, row_labels, col_labels, n: pred.len() })
}

/// Minimum-cost assignment on a square cost matrix (Kuhn–Munkres with
/// potentials, O(n³)). Returns `assignment[row] = col`.
fn hungarian_min_cost(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-indexed potentials with a virtual 0th column as sentinel
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut match_col = vec![0usize; n + 1]; // row matched to each column
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        match_col[0] = i;
        let mut j0 = 0usize;
        let mut min_v = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = match_col[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < min_v[j] {
                        min_v[j] = cur;
                        way[j] = j0;
                    }
                    if min_v[j] < delta {
                        delta = min_v[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[match_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if match_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            match_col[j0] = match_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if match_col[j] > 0 {
            assignment[match_col[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Clustering accuracy: the best one-to-one matching between predicted
/// clusters and true classes, as a fraction of all samples. Also returns
/// the matched (predicted id → true id) pairs that share at least one
/// sample, in original label values.
pub fn clustering_accuracy(cm: &ConfusionMatrix) -> (f64, Vec<(usize, usize)>) {
    let k = cm.k_pred().max(cm.k_true());
    // maximize counts == minimize negated counts on the zero-padded square
    let cost: Vec<Vec<i64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let c = cm
                        .counts
                        .get(i)
                        .and_then(|row| row.get(j))
                        .copied()
                        .unwrap_or(0);
                    -(c as i64)
                })
                .collect()
        })
        .collect();
    let assignment = hungarian_min_cost(&cost);

    let mut matched = 0usize;
    let mut mapping = Vec::new();
    for (i, &j) in assignment.iter().enumerate() {
        if i < cm.k_pred() && j < cm.k_true() && cm.counts[i][j] > 0 {
            matched += cm.counts[i][j];
            mapping.push((cm.row_labels[i], cm.col_labels[j]));
        }
    }
    (matched as f64 / cm.n as f64, mapping)
}

/// Exhaustive assignment search; the verification oracle for
/// [`clustering_accuracy`]. Only feasible for small tables.
pub fn brute_force_accuracy(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    const MAX_DIM: usize = 8;
    let k = cm.k_pred().max(cm.k_true());
    if k > MAX_DIM {
        return Err(MetricsError::OracleBound { max: MAX_DIM, got: k });
    }
    let mut cols: Vec<usize> = (0..k).collect();
    let mut best = 0usize;
    permute(&mut cols, 0, &mut |perm| {
        let score: usize = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                cm.counts
                    .get(i)
                    .and_then(|row| row.get(j))
                    .copied()
                    .unwrap_or(0)
            })
            .sum();
        if score > best {
            best = score;
        }
    });
    Ok(best as f64 / cm.n as f64)
}

fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

fn entropy_from_marginals(marginals: impl Iterator<Item = usize>, n: f64) -> f64 {
    marginals
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `I(U;V) / sqrt(H(U) H(V))` in `[0, 1]`.
///
/// Degenerate partitions are pinned: both sides single-cluster → 1.0,
/// exactly one side single-cluster → 0.0.
pub fn nmi(cm: &ConfusionMatrix) -> f64 {
    let n = cm.n as f64;
    let row_sums: Vec<usize> = cm.counts.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..cm.k_true())
        .map(|j| cm.counts.iter().map(|r| r[j]).sum())
        .collect();
    let h_u = entropy_from_marginals(row_sums.iter().copied(), n);
    let h_v = entropy_from_marginals(col_sums.iter().copied(), n);
    if h_u == 0.0 && h_v == 0.0 {
        return 1.0;
    }
    if h_u == 0.0 || h_v == 0.0 {
        return 0.0;
    }
    // Bijective support means the partitions are identical up to relabeling,
    // where I(U;V) = H(U) = H(V) holds exactly; return 1 without rounding.
    let bijective = cm.counts.iter().all(|r| r.iter().filter(|&&c| c > 0).count() <= 1)
        && (0..cm.k_true()).all(|j| cm.counts.iter().filter(|r| r[j] > 0).count() <= 1);
    if bijective {
        return 1.0;
    }
    let mut mi = 0.0;
    for (i, row) in cm.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let p = c as f64 / n;
                mi += p * ((c as f64 * n) / (row_sums[i] as f64 * col_sums[j] as f64)).ln();
            }
        }
    }
    (mi / (h_u * h_v).sqrt()).clamp(0.0, 1.0)
}

/// One evaluation: accuracy, NMI, how many predicted clusters were actually
/// used, and the accuracy matching in original label values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub acc: f64,
    pub nmi: f64,
    pub k_pred_used: usize,
    pub mapping: Vec<(usize, usize)>,
}

/// Evaluate hard cluster assignments against true class labels.
pub fn evaluate(pred: &[usize], truth: &[usize]) -> Result<EvalReport, MetricsError> {
    let cm = confusion(pred, truth)?;
    let (acc, mapping) = clustering_accuracy(&cm);
    Ok(EvalReport { acc, nmi: nmi(&cm), k_pred_used: cm.k_pred(), mapping })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{splitmix64, unit_from_hash};

    #[test]
    fn confusion_basics() {
        let cm = confusion(&[0, 1], &[0, 1]).unwrap();
        assert_eq!(cm.counts(), &[vec![1, 0], vec![0, 1]]);
        let cm = confusion(&[0, 0], &[0, 1]).unwrap();
        assert_eq!(cm.counts(), &[vec![1, 1]]);
        let cm = confusion(&[0, 0, 1, 1, 2, 2], &[0, 0, 0, 1, 1, 1]).unwrap();
        assert_eq!(cm.counts(), &[vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(cm.n(), 6);
    }

    #[test]
    fn confusion_densely_reindexes_sparse_ids() {
        let cm = confusion(&[7, 7, 30], &[100, 100, 2]).unwrap();
        assert_eq!(cm.row_labels(), &[7, 30]);
        assert_eq!(cm.col_labels(), &[2, 100]);
        assert_eq!(cm.counts(), &[vec![0, 2], vec![1, 0]]);
    }

    #[test]
    fn confusion_errors() {
        assert_eq!(
            confusion(&[0], &[0, 1]).unwrap_err(),
            MetricsError::LengthMismatch { pred: 1, truth: 2 }
        );
        assert_eq!(confusion(&[], &[]).unwrap_err(), MetricsError::EmptyInput);
    }

    #[test]
    fn accuracy_examples() {
        // permuted diagonal is perfect
        let cm = ConfusionMatrix::from_counts(vec![vec![0, 3, 0], vec![0, 0, 2], vec![4, 0, 0]]);
        let (acc, mapping) = clustering_accuracy(&cm);
        assert_eq!(acc, 1.0);
        assert_eq!(mapping.len(), 3);

        // the 3x2 rectangular example: best matching covers 4 of 6
        let cm = ConfusionMatrix::from_counts(vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let (acc, mapping) = clustering_accuracy(&cm);
        assert!((acc - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(mapping.len(), 2);

        // single predicted cluster over two balanced classes
        let cm = ConfusionMatrix::from_counts(vec![vec![5, 5]]);
        let (acc, _) = clustering_accuracy(&cm);
        assert!((acc - 0.5).abs() < 1e-15);
    }

    #[test]
    fn accuracy_mapping_is_injective() {
        let cm = ConfusionMatrix::from_counts(vec![vec![3, 1, 0], vec![2, 2, 1], vec![0, 1, 4]]);
        let (_, mapping) = clustering_accuracy(&cm);
        let mut targets: Vec<usize> = mapping.iter().map(|&(_, t)| t).collect();
        targets.sort_unstable();
        targets.dedup();
        assert_eq!(targets.len(), mapping.len());
    }

    fn random_counts(rows: usize, cols: usize, seed: u64) -> Vec<Vec<usize>> {
        let mut state = seed;
        let mut next = move || {
            state = splitmix64(state);
            (unit_from_hash(state) * 10.0) as usize
        };
        loop {
            let counts: Vec<Vec<usize>> = (0..rows).map(|_| (0..cols).map(|_| next()).collect()).collect();
            if counts.iter().flatten().sum::<usize>() > 0 {
                return counts;
            }
        }
    }

    #[test]
    fn hungarian_agrees_with_brute_force() {
        // random tables, square and rectangular both ways
        let mut checked = 0;
        for seed in 0..100u64 {
            let rows = 1 + (splitmix64(seed * 3 + 1) % 8) as usize;
            let cols = 1 + (splitmix64(seed * 7 + 2) % 8) as usize;
            let cm = ConfusionMatrix::from_counts(random_counts(rows, cols, seed));
            let (acc, _) = clustering_accuracy(&cm);
            let oracle = brute_force_accuracy(&cm).unwrap();
            assert_eq!(acc, oracle, "seed {seed}: hungarian {acc} vs brute force {oracle}");
            checked += 1;
        }
        assert_eq!(checked, 100);
    }

    #[test]
    fn brute_force_respects_dimension_bound() {
        let cm = ConfusionMatrix::from_counts(vec![vec![1; 9]; 2]);
        assert_eq!(
            brute_force_accuracy(&cm).unwrap_err(),
            MetricsError::OracleBound { max: 8, got: 9 }
        );
    }

    #[test]
    fn accuracy_invariant_to_relabeling() {
        let pred = vec![0, 0, 1, 1, 2, 2, 2];
        let truth = vec![1, 1, 0, 0, 2, 2, 0];
        let base = clustering_accuracy(&confusion(&pred, &truth).unwrap()).0;
        // relabel predictions 0->5, 1->3, 2->9 and truth 0->2, 1->0, 2->1
        let pred2: Vec<usize> = pred.iter().map(|&p| [5, 3, 9][p]).collect();
        let truth2: Vec<usize> = truth.iter().map(|&t| [2, 0, 1][t]).collect();
        let relabeled = clustering_accuracy(&confusion(&pred2, &truth2).unwrap()).0;
        assert_eq!(base, relabeled);
    }

    #[test]
    fn zero_row_changes_nothing() {
        let base = ConfusionMatrix::from_counts(vec![vec![3, 0], vec![1, 4]]);
        let padded = ConfusionMatrix::from_counts(vec![vec![3, 0], vec![1, 4], vec![0, 0]]);
        assert_eq!(clustering_accuracy(&base).0, clustering_accuracy(&padded).0);
        assert!((nmi(&base) - nmi(&padded)).abs() < 1e-15);
    }

    #[test]
    fn nmi_identical_partitions_is_one() {
        // identical up to relabeling
        let pred = vec![2, 2, 0, 0, 1, 1];
        let truth = vec![0, 0, 1, 1, 2, 2];
        let cm = confusion(&pred, &truth).unwrap();
        assert_eq!(nmi(&cm), 1.0);
    }

    #[test]
    fn nmi_independent_partitions_is_zero() {
        // exact product contingency: every cell n/(k1*k2)
        let cm = ConfusionMatrix::from_counts(vec![vec![5, 5], vec![5, 5]]);
        assert_eq!(nmi(&cm), 0.0);
    }

    #[test]
    fn nmi_frozen_reference_value() {
        // independently evaluated: I = (2/3) ln 2, H_U = ln 3, H_V = ln 2
        let cm = ConfusionMatrix::from_counts(vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let expected = (2.0 / 3.0) * 2f64.ln() / ((3f64.ln()) * (2f64.ln())).sqrt();
        assert!((nmi(&cm) - expected).abs() < 1e-12);
        assert!((nmi(&cm) - 0.529_540_578_057_561_7).abs() < 1e-12);
    }

    #[test]
    fn nmi_symmetric_under_transpose() {
        for seed in 0..20u64 {
            let cm = ConfusionMatrix::from_counts(random_counts(4, 6, seed + 1000));
            assert!((nmi(&cm) - nmi(&cm.transposed())).abs() < 1e-12);
        }
    }

    #[test]
    fn nmi_degenerate_cases() {
        // both single-cluster
        let cm = confusion(&[0, 0, 0], &[5, 5, 5]).unwrap();
        assert_eq!(nmi(&cm), 1.0);
        // one side single-cluster
        let cm = confusion(&[0, 0, 0], &[0, 1, 2]).unwrap();
        assert_eq!(nmi(&cm), 0.0);
    }

    #[test]
    fn evaluate_combines_everything() {
        let report = evaluate(&[0, 0, 1, 1, 2, 2], &[0, 0, 0, 1, 1, 1]).unwrap();
        assert!((report.acc - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(report.k_pred_used, 3);
        assert!(report.nmi > 0.0 && report.nmi < 1.0);
    }
}
