//! Synthetic datasets with controllable separability.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{DataError, Dataset};
use crate::matrix::Matrix;
use crate::rng::seeded_rng;

/// How many candidate draws per center before giving up on placement.
const PLACEMENT_ATTEMPTS_PER_CENTER: usize = 10_000;

/// `k` isotropic unit-variance Gaussian clusters whose centers are at least
/// `separation` apart (rejection sampling on the minimum distance).
/// Deterministic per seed.
pub fn gen_blobs(
    k: usize,
    per_cluster: usize,
    d: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset, DataError> {
    if k < 2 {
        return Err(DataError::InvalidParams(format!("need k >= 2 clusters, got {k}")));
    }
    if per_cluster < 1 || d < 1 {
        return Err(DataError::InvalidParams("per_cluster and d must be >= 1".into()));
    }
    if separation <= 0.0 || !separation.is_finite() {
        return Err(DataError::InvalidParams(format!("separation must be > 0, got {separation}")));
    }

    let mut rng = seeded_rng(seed);
    // centers drawn along random directions with enough spread that the
    // minimum-distance rejection rarely triggers
    let scale = 1.5 * separation;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut placed = false;
        for _ in 0..PLACEMENT_ATTEMPTS_PER_CENTER {
            let candidate: Vec<f64> =
                (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
            let ok = centers.iter().all(|c| {
                let dist2: f64 = c.iter().zip(&candidate).map(|(a, b)| (a - b) * (a - b)).sum();
                dist2 >= separation * separation
            });
            if ok {
                centers.push(candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(DataError::CenterPlacement { k, d, separation });
        }
    }

    let n = k * per_cluster;
    let mut features = Matrix::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    for (c, center) in centers.iter().enumerate() {
        for s in 0..per_cluster {
            let row = features.row_mut(c * per_cluster + s);
            for (v, &m) in row.iter_mut().zip(center) {
                *v = m + rng.sample::<f64, _>(StandardNormal);
            }
            labels.push(c);
        }
    }
    Dataset::new(
        features,
        Some(labels),
        format!("blobs(k={k},per={per_cluster},d={d},sep={separation},seed={seed})"),
    )
}

/// Two interleaved half-circle classes with Gaussian coordinate noise.
/// `n` must be even so the classes stay balanced. Deterministic per seed.
pub fn gen_two_moons(n: usize, noise_sigma: f64, seed: u64) -> Result<Dataset, DataError> {
    if n < 2 || n % 2 != 0 {
        return Err(DataError::InvalidParams(format!("n must be even and >= 2, got {n}")));
    }
    if noise_sigma < 0.0 {
        return Err(DataError::InvalidParams(format!("noise_sigma must be >= 0, got {noise_sigma}")));
    }
    let half = n / 2;
    let mut rng = seeded_rng(seed);
    let mut features = Matrix::zeros(n, 2);
    let mut labels = Vec::with_capacity(n);
    for i in 0..half {
        let t = std::f64::consts::PI * i as f64 / (half - 1).max(1) as f64;
        let row = features.row_mut(i);
        row[0] = t.cos();
        row[1] = t.sin();
        labels.push(0);
    }
    for i in 0..half {
        let t = std::f64::consts::PI * i as f64 / (half - 1).max(1) as f64;
        let row = features.row_mut(half + i);
        row[0] = 1.0 - t.cos();
        row[1] = 0.5 - t.sin();
        labels.push(1);
    }
    if noise_sigma > 0.0 {
        for v in features.data_mut() {
            *v += noise_sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Dataset::new(features, Some(labels), format!("two_moons(n={n},sigma={noise_sigma},seed={seed})"))
}
