//! Lloyd's k-means with k-means++ seeding: the fixed-metric baseline every
//! learned run is compared against.

use rand::Rng;

use crate::data::Dataset;
use crate::matrix::Matrix;
use crate::metrics::{evaluate, EvalReport};
use crate::rng::seeded_rng;

use super::config::HarnessError;

const MAX_ITERS: usize = 300;
const SHIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Matrix,
    pub iterations: usize,
    /// Sum of squared distances to assigned centroids.
    pub inertia: f64,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cluster rows of `features` into `k` groups. Converges when the largest
/// centroid shift drops below 1e-6 or after 300 iterations; a cluster left
/// empty is re-seeded to the point farthest from its assigned centroid.
pub fn kmeans(features: &Matrix, k: usize, seed: u64) -> Result<KMeansResult, HarnessError> {
    let n = features.rows();
    if k < 1 {
        return Err(HarnessError::Config("k must be >= 1".into()));
    }
    if k > n {
        return Err(HarnessError::Config(format!("k = {k} exceeds the {n} data points")));
    }
    let d = features.cols();
    let mut rng = seeded_rng(seed);

    // k-means++ seeding: D^2-weighted draws
    let mut centroids = Matrix::zeros(k, d);
    let first = rng.gen_range(0..n);
    centroids.row_mut(0).copy_from_slice(features.row(first));
    let mut min_d2: Vec<f64> = (0..n).map(|i| dist2(features.row(i), centroids.row(0))).collect();
    for c in 1..k {
        let total: f64 = min_d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.gen_range(0.0..total);
            let mut chosen = n - 1;
            for (i, &w) in min_d2.iter().enumerate() {
                r -= w;
                if r <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.row_mut(c).copy_from_slice(features.row(pick));
        for (i, slot) in min_d2.iter_mut().enumerate() {
            let dd = dist2(features.row(i), centroids.row(c));
            if dd < *slot {
                *slot = dd;
            }
        }
    }

    let mut assignments = vec![0usize; n];
    let mut iterations = 0;
    for iter in 0..MAX_ITERS {
        iterations = iter + 1;
        for i in 0..n {
            let row = features.row(i);
            let mut best = 0usize;
            let mut best_d = dist2(row, centroids.row(0));
            for c in 1..k {
                let dd = dist2(row, centroids.row(c));
                if dd < best_d {
                    best = c;
                    best_d = dd;
                }
            }
            assignments[i] = best;
        }

        let mut sums = Matrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, &c) in assignments.iter().enumerate() {
            counts[c] += 1;
            for (s, &v) in sums.row_mut(c).iter_mut().zip(features.row(i)) {
                *s += v;
            }
        }
        // re-seed empty clusters to the globally farthest point
        for c in 0..k {
            if counts[c] == 0 {
                let farthest = (0..n)
                    .max_by(|&a, &b| {
                        let da = dist2(features.row(a), centroids.row(assignments[a]));
                        let db = dist2(features.row(b), centroids.row(assignments[b]));
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                sums.row_mut(c).copy_from_slice(features.row(farthest));
                counts[c] = 1;
                assignments[farthest] = c;
            }
        }

        let mut max_shift = 0.0f64;
        for c in 0..k {
            let inv = 1.0 / counts[c] as f64;
            let mut shift2 = 0.0;
            for (old, s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                let new = s * inv;
                shift2 += (new - *old) * (new - *old);
                *old = new;
            }
            max_shift = max_shift.max(shift2.sqrt());
        }
        if max_shift < SHIFT_TOL {
            break;
        }
    }

    let inertia = (0..n).map(|i| dist2(features.row(i), centroids.row(assignments[i]))).sum();
    Ok(KMeansResult { assignments, centroids, iterations, inertia })
}

/// Run k-means on a labeled dataset and score it with the shared metrics.
pub fn kmeans_eval(ds: &Dataset, k: usize, seed: u64) -> Result<EvalReport, HarnessError> {
    let labels = ds
        .labels
        .as_ref()
        .ok_or_else(|| HarnessError::Config("k-means evaluation requires a labeled dataset".into()))?;
    let result = kmeans(&ds.features, k, seed)?;
    Ok(evaluate(&result.assignments, labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_blobs, gen_two_moons};

    #[test]
    fn k1_groups_everything() {
        let ds = gen_blobs(2, 10, 2, 8.0, 1).unwrap();
        let report = kmeans_eval(&ds, 1, 0).unwrap();
        // single cluster on balanced classes: accuracy is the largest-class share
        assert!((report.acc - 0.5).abs() < 1e-12);
        assert_eq!(report.k_pred_used, 1);
    }

    #[test]
    fn well_separated_blobs_are_recovered() {
        let ds = gen_blobs(4, 250, 2, 8.0, 42).unwrap();
        let report = kmeans_eval(&ds, 4, 0).unwrap();
        assert!(report.acc >= 0.99, "separation 8 blobs should be clean, got {}", report.acc);
        assert!(report.nmi >= 0.95);
    }

    #[test]
    fn two_moons_defeat_the_fixed_metric() {
        let ds = gen_two_moons(1000, 0.1, 3).unwrap();
        let report = kmeans_eval(&ds, 2, 0).unwrap();
        assert!(report.acc < 0.9, "interleaved moons are not linearly separable, got {}", report.acc);
    }

    #[test]
    fn kmeans_is_deterministic_per_seed() {
        let ds = gen_blobs(3, 40, 2, 6.0, 9).unwrap();
        let a = kmeans(&ds.features, 3, 5).unwrap();
        let b = kmeans(&ds.features, 3, 5).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.centroids, b.centroids);
    }

    #[test]
    fn k_larger_than_n_is_rejected() {
        let ds = gen_blobs(2, 2, 2, 5.0, 0).unwrap();
        assert!(kmeans(&ds.features, 10, 0).is_err());
    }

    #[test]
    fn requires_labels_for_eval() {
        let mut ds = gen_blobs(2, 5, 2, 5.0, 0).unwrap();
        ds.labels = None;
        assert!(kmeans_eval(&ds, 2, 0).is_err());
    }
}
