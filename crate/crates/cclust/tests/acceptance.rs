//! Acceptance suite: one test per claim, each printing a PASS line with its
//! measured numbers (visible with `--nocapture`; failures always show).
//!
//! The two sweep-based tests (depth stability, over-clustering) train real
//! networks and take a few minutes each; everything else is fast. The MNIST
//! test runs only when the IDX files are present (see `mnist_dir`).

use std::path::PathBuf;

use cclust::constraints::{apply_noise, constraints_from_labels, NoiseModel};
use cclust::data::{gen_blobs, gen_two_moons};
use cclust::harness::{
    kmeans_eval, run_sweep, train, train_to_dir, DatasetSpec, EvalSplit, LossConfig, NoiseConfig,
    OptimizerConfig, RunConfig, SweepAxes, SweepConfig, SweepRow,
};
use cclust::loss::{
    batch_loss_dense, ccl_pair_loss, kcl_pair_loss, LossKind, PairLabel, PairObjective,
    PairWeighting, ProbVector,
};
use cclust::metrics::{brute_force_accuracy, clustering_accuracy, confusion, evaluate, nmi, ConfusionMatrix};
use cclust::network::{enumerate_pairs, Activation, LayerSpec, Network};
use cclust::rng::{splitmix64, unit_from_hash};
use cclust::Matrix;

/// Simple deterministic value stream for test-case generation.
struct Stream(u64);

impl Stream {
    fn next_u64(&mut self) -> u64 {
        self.0 = splitmix64(self.0);
        self.0
    }

    fn unit(&mut self) -> f64 {
        unit_from_hash(self.next_u64())
    }

    fn range(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.next_u64() % (hi_inclusive - lo + 1) as u64) as usize
    }
}

fn tmp_out(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cclust-acceptance-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

/// A1: analytic parameter gradients match central finite differences over
/// 50 random (architecture, batch, loss, labels) configurations.
#[test]
fn a1_gradient_correctness() {
    let mut stream = Stream(0xA1A1_2024);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut worst_detail = String::new();
    let mut checked_coords = 0usize;

    for case in 0..50 {
        let k = stream.range(2, 8);
        let batch_size = stream.range(2, 6);
        let n_hidden = stream.range(1, 3);
        let hidden: Vec<usize> = (0..n_hidden).map(|_| stream.range(2, 8)).collect();
        let input_dim = stream.range(2, 6);
        let objective = if case % 2 == 0 {
            PairObjective::ccl()
        } else {
            PairObjective::kcl(2.0).unwrap()
        };

        // tanh keeps the network C^1 everywhere, so central differences are
        // valid at every coordinate (relu kinks would corrupt the probe
        // wherever a pre-activation crosses zero inside the +-h interval;
        // the relu path is gradient-checked in the network module tests)
        let spec = LayerSpec::new(input_dim, hidden, k, Activation::Tanh).unwrap();
        let net = Network::init(spec, stream.next_u64());
        let rows: Vec<Vec<f64>> = (0..batch_size)
            .map(|_| (0..input_dim).map(|_| stream.unit() * 2.0 - 1.0).collect())
            .collect();
        let batch = Matrix::from_rows(&rows);
        let pairs = enumerate_pairs(batch_size).unwrap();
        // both labels appear whenever there is more than one pair
        let labels: Vec<PairLabel> = (0..pairs.len())
            .map(|i| if (i + case) % 2 == 0 { PairLabel::Similar } else { PairLabel::Dissimilar })
            .collect();

        let loss_at = |net: &Network| -> f64 {
            let trace = net.forward(&batch).unwrap();
            batch_loss_dense(&trace.probs, &pairs, &labels, objective, PairWeighting::Mean)
                .unwrap()
                .0
        };
        let trace = net.forward(&batch).unwrap();
        let (_, dprobs) =
            batch_loss_dense(&trace.probs, &pairs, &labels, objective, PairWeighting::Mean).unwrap();
        let analytic = net.backward_from_prob_grad(&trace, &dprobs).unwrap().flatten();

        for idx in 0..net.params.param_count() {
            let eval = |delta: f64| {
                let mut perturbed = net.clone();
                let mut i = 0;
                perturbed.params.for_each_mut(|v| {
                    if i == idx {
                        *v += delta;
                    }
                    i += 1;
                });
                loss_at(&perturbed)
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            let a = analytic[idx];
            if a.abs() > 1e-8 {
                let rel = (a - fd).abs() / a.abs();
                if rel > worst {
                    worst = rel;
                    worst_detail = format!(
                        "case {case} ({:?}, k={k}, batch={batch_size}), param {idx}: analytic {a:.6e} vs fd {fd:.6e}",
                        objective.kind()
                    );
                }
                checked_coords += 1;
            }
        }
    }
    println!(
        "A1 gradient-correctness: {} (50 configs, {checked_coords} coordinates, max rel err {worst:.3e})",
        if worst < 1e-4 { "PASS" } else { "FAIL" }
    );
    assert!(worst < 1e-4, "max relative error {worst} at {worst_detail}");
}

/// A2: supervised convergence on four well-separated blobs.
#[test]
fn a2_supervised_ccl_convergence() {
    let mut successes = 0;
    let mut results = Vec::new();
    for seed in 1..=5u64 {
        let config = RunConfig {
            dataset: DatasetSpec::Blobs { k: 4, per_cluster: 250, d: 2, separation: 8.0, seed: 1 },
            hidden_dims: vec![32, 32],
            activation: Activation::Relu,
            k_out: 4,
            loss: LossConfig::ccl(),
            optimizer: Some(OptimizerConfig::sgd(0.1, vec![150])),
            epochs: 200,
            batch_size: 100,
            stratified: false,
            standardize: false,
            noise: None,
            seed,
            eval_split: None,
        };
        let outcome = train(&config).unwrap();
        let r = &outcome.result.report;
        if r.acc >= 0.99 && r.nmi >= 0.95 {
            successes += 1;
        }
        results.push((seed, r.acc, r.nmi));
    }
    println!(
        "A2 supervised-ccl-convergence: {} ({successes}/5 seeds reached acc >= 0.99 and nmi >= 0.95: {results:?})",
        if successes >= 4 { "PASS" } else { "FAIL" }
    );
    assert!(successes >= 4, "only {successes} of 5 seeds converged: {results:?}");
}

/// A3: the Hungarian accuracy equals exhaustive search on 200 random
/// tables, and NMI behaves exactly at the boundary cases.
#[test]
fn a3_metric_oracle_equivalence() {
    let mut stream = Stream(0xA3A3_0001);
    for case in 0..200 {
        let rows = stream.range(1, 8);
        let cols = stream.range(1, 8);
        let counts: Vec<Vec<usize>> = (0..rows)
            .map(|_| (0..cols).map(|_| stream.range(0, 9)).collect())
            .collect();
        if counts.iter().flatten().sum::<usize>() == 0 {
            continue;
        }
        let cm = ConfusionMatrix::from_counts(counts);
        let (acc, _) = clustering_accuracy(&cm);
        let oracle = brute_force_accuracy(&cm).unwrap();
        assert_eq!(acc, oracle, "case {case}: {}x{} table", cm.k_pred(), cm.k_true());
    }

    // identical partitions, arbitrary relabeling: exactly 1.0
    let pred: Vec<usize> = (0..3000).map(|i| (i * 7 + 3) % 6).collect();
    let truth: Vec<usize> = pred.iter().map(|&p| (p + 4) % 6).collect();
    let cm = confusion(&pred, &truth).unwrap();
    assert_eq!(nmi(&cm), 1.0, "identical partitions must score exactly 1.0");

    // independent partitions at n = 10_000: near zero
    let mut stream = Stream(0xA3A3_0002);
    let pred: Vec<usize> = (0..10_000).map(|_| stream.range(0, 9)).collect();
    let truth: Vec<usize> = (0..10_000).map(|_| stream.range(0, 9)).collect();
    let independent_nmi = nmi(&confusion(&pred, &truth).unwrap());
    assert!(independent_nmi < 0.05, "independent partitions scored {independent_nmi}");

    println!(
        "A3 metric-oracle-equivalence: PASS (200 tables exact, nmi(identical) = 1.0, nmi(independent) = {independent_nmi:.4})"
    );
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn accs_for(rows: &[SweepRow], kind: LossKind, pick: impl Fn(&SweepRow) -> bool) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.loss_kind == kind && pick(r))
        .map(|r| r.acc.expect("run succeeded"))
        .collect()
}

/// A4: the likelihood objective stays stable when the network gets deeper,
/// and is no worse than the KL baseline at depth 8.
#[test]
fn a4_depth_stability_trend() {
    let sweep = SweepConfig {
        base: RunConfig {
            dataset: DatasetSpec::TwoMoons { n: 2000, noise_sigma: 0.1, seed: 1 },
            hidden_dims: vec![64, 64],
            activation: Activation::Relu,
            k_out: 2,
            loss: LossConfig::ccl(),
            optimizer: Some(OptimizerConfig::sgd(0.1, vec![150])),
            epochs: 200,
            batch_size: 100,
            stratified: false,
            standardize: false,
            noise: None,
            seed: 1,
            eval_split: None,
        },
        axes: SweepAxes {
            loss_kind: vec![LossKind::Ccl, LossKind::Kcl],
            depth: vec![2, 8],
            k_out: vec![],
            noise: vec![],
            seed: vec![1, 2, 3, 4, 5],
        },
    };
    let out = tmp_out("a4");
    let rows = run_sweep(&sweep, &out, 2).unwrap();
    assert!(rows.iter().all(|r| r.error.is_none()), "all 20 runs must finish");

    let ccl_d2 = median(accs_for(&rows, LossKind::Ccl, |r| r.depth == 2));
    let ccl_d8 = median(accs_for(&rows, LossKind::Ccl, |r| r.depth == 8));
    let kcl_d8 = median(accs_for(&rows, LossKind::Kcl, |r| r.depth == 8));
    let stable = ccl_d8 >= ccl_d2 - 0.03;
    let no_worse = ccl_d8 >= kcl_d8;
    println!(
        "A4 depth-stability-trend: {} (median acc: ccl d2 {ccl_d2:.4}, ccl d8 {ccl_d8:.4}, kcl d8 {kcl_d8:.4})",
        if stable && no_worse { "PASS" } else { "FAIL" }
    );
    let _ = std::fs::remove_dir_all(out);
    assert!(stable, "ccl depth-8 median {ccl_d8} fell more than 0.03 below depth-2 median {ccl_d2}");
    assert!(no_worse, "ccl depth-8 median {ccl_d8} below kcl depth-8 median {kcl_d8}");
}

/// A5: with noisy constraints and five times more output heads than true
/// classes, the likelihood objective degrades no more than the KL baseline
/// and stays accurate in absolute terms.
#[test]
fn a5_overclustering_robustness_trend() {
    let sweep = SweepConfig {
        base: RunConfig {
            dataset: DatasetSpec::Blobs { k: 10, per_cluster: 200, d: 16, separation: 6.0, seed: 1 },
            hidden_dims: vec![64, 64],
            activation: Activation::Relu,
            k_out: 50,
            loss: LossConfig::ccl(),
            optimizer: Some(OptimizerConfig::adam(0.001, vec![220])),
            epochs: 300,
            batch_size: 200,
            stratified: false,
            standardize: false,
            noise: Some(NoiseConfig { false_positive_rate: 0.1, false_negative_rate: 0.1, seed: None }),
            seed: 1,
            eval_split: None,
        },
        axes: SweepAxes {
            loss_kind: vec![LossKind::Ccl, LossKind::Kcl],
            depth: vec![],
            k_out: vec![10, 50],
            noise: vec![],
            seed: vec![1, 2, 3, 4, 5],
        },
    };
    let out = tmp_out("a5");
    let rows = run_sweep(&sweep, &out, 2).unwrap();
    assert!(rows.iter().all(|r| r.error.is_none()), "all 20 runs must finish");

    let drop_for = |kind: LossKind| -> f64 {
        let drops: Vec<f64> = (1..=5u64)
            .map(|seed| {
                let at = |k: usize| {
                    rows.iter()
                        .find(|r| r.loss_kind == kind && r.k_out == k && r.seed == seed)
                        .and_then(|r| r.acc)
                        .expect("run exists")
                };
                at(10) - at(50)
            })
            .collect();
        median(drops)
    };
    let ccl_drop = drop_for(LossKind::Ccl);
    let kcl_drop = drop_for(LossKind::Kcl);
    let ccl_at_50 = median(accs_for(&rows, LossKind::Ccl, |r| r.k_out == 50));
    let robust = ccl_drop <= kcl_drop;
    let accurate = ccl_at_50 >= 0.85;
    println!(
        "A5 overclustering-robustness-trend: {} (median drop: ccl {ccl_drop:.4} vs kcl {kcl_drop:.4}; ccl acc@50 {ccl_at_50:.4})",
        if robust && accurate { "PASS" } else { "FAIL" }
    );
    let _ = std::fs::remove_dir_all(out);
    assert!(robust, "ccl over-clustering drop {ccl_drop} exceeds kcl drop {kcl_drop}");
    assert!(accurate, "ccl acc at k_out=50 is {ccl_at_50}, below 0.85");
}

fn mnist_dir() -> Option<PathBuf> {
    let candidates = [
        std::env::var("MNIST_DIR").ok().map(PathBuf::from),
        Some(PathBuf::from("data/mnist")),
        Some(PathBuf::from("../../data/mnist")),
    ];
    candidates.into_iter().flatten().find(|d| {
        d.join("train-images-idx3-ubyte").exists()
            && d.join("train-labels-idx1-ubyte").exists()
            && d.join("t10k-images-idx3-ubyte").exists()
            && d.join("t10k-labels-idx1-ubyte").exists()
    })
}

/// A6: supervised clustering on MNIST with the 784-512-256-10 recipe.
/// Requires the IDX files locally (see README); skipped with a notice when
/// they are absent, since this environment cannot download them.
#[test]
fn a6_mnist_supervised_clustering() {
    let Some(dir) = mnist_dir() else {
        println!(
            "A6 mnist-supervised-clustering: SKIPPED (MNIST IDX files not found; set MNIST_DIR or place them under data/mnist/ and rerun)"
        );
        return;
    };
    let config = RunConfig {
        dataset: DatasetSpec::Idx {
            images: dir.join("train-images-idx3-ubyte"),
            labels: dir.join("train-labels-idx1-ubyte"),
            test_images: Some(dir.join("t10k-images-idx3-ubyte")),
            test_labels: Some(dir.join("t10k-labels-idx1-ubyte")),
        },
        hidden_dims: vec![512, 256],
        activation: Activation::Relu,
        k_out: 10,
        loss: LossConfig::ccl(),
        optimizer: Some(OptimizerConfig::sgd(0.1, vec![10])),
        epochs: 15,
        batch_size: 100,
        stratified: false,
        standardize: false,
        noise: None,
        seed: 1,
        eval_split: Some(EvalSplit::TestSplit),
    };
    let outcome = train(&config).unwrap();
    let acc = outcome.result.report.acc;
    println!(
        "A6 mnist-supervised-clustering: {} (test acc {acc:.4}, nmi {:.4}, {:.0}s)",
        if acc >= 0.93 { "PASS" } else { "FAIL" },
        outcome.result.report.nmi,
        outcome.result.duration_secs
    );
    assert!(acc >= 0.93, "test-set clustering accuracy {acc} below 0.93");
}

/// A7: byte-identical reports for identical (config, seed), the likelihood
/// complement identity, and margin-independence of the KCL similar loss.
#[test]
fn a7_determinism_and_loss_identities() {
    // byte-identical artifacts
    let config = RunConfig {
        dataset: DatasetSpec::Blobs { k: 3, per_cluster: 40, d: 2, separation: 8.0, seed: 2 },
        hidden_dims: vec![16],
        activation: Activation::Relu,
        k_out: 3,
        loss: LossConfig::ccl(),
        optimizer: Some(OptimizerConfig::sgd(0.1, vec![])),
        epochs: 8,
        batch_size: 40,
        stratified: false,
        standardize: false,
        noise: Some(NoiseConfig { false_positive_rate: 0.05, false_negative_rate: 0.05, seed: None }),
        seed: 9,
        eval_split: None,
    };
    let out_a = tmp_out("a7-first");
    let out_b = tmp_out("a7-second");
    let (_, dir_a) = train_to_dir(&config, &out_a).unwrap();
    let (_, dir_b) = train_to_dir(&config, &out_b).unwrap();
    for file in ["report.json", "history.csv", "checkpoint.json"] {
        let a = std::fs::read(dir_a.join(file)).unwrap();
        let b = std::fs::read(dir_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    let _ = std::fs::remove_dir_all(out_a);
    let _ = std::fs::remove_dir_all(out_b);

    // exp(-l_sim) + exp(-l_dis) = 1 away from the clamp
    let mut stream = Stream(0xA7A7_0001);
    let mut max_dev: f64 = 0.0;
    let mut tested = 0;
    while tested < 1000 {
        let k = stream.range(2, 10);
        let logits_p: Vec<f64> = (0..k).map(|_| stream.unit() * 6.0 - 3.0).collect();
        let logits_q: Vec<f64> = (0..k).map(|_| stream.unit() * 6.0 - 3.0).collect();
        let p = ProbVector::from_logits(&logits_p);
        let q = ProbVector::from_logits(&logits_q);
        let s: f64 = p.as_slice().iter().zip(q.as_slice()).map(|(a, b)| a * b).sum();
        if s < 1e-9 || s > 1.0 - 1e-9 {
            continue;
        }
        let ls = ccl_pair_loss(&p, &q, PairLabel::Similar).unwrap().loss;
        let ld = ccl_pair_loss(&p, &q, PairLabel::Dissimilar).unwrap().loss;
        max_dev = max_dev.max(((-ls).exp() + (-ld).exp() - 1.0).abs());
        tested += 1;
    }
    assert!(max_dev < 1e-9, "complement identity deviation {max_dev}");

    // KCL similar loss ignores the margin
    let mut stream = Stream(0xA7A7_0002);
    for _ in 0..100 {
        let k = stream.range(2, 10);
        let p = ProbVector::from_logits(&(0..k).map(|_| stream.unit() * 4.0 - 2.0).collect::<Vec<_>>());
        let q = ProbVector::from_logits(&(0..k).map(|_| stream.unit() * 4.0 - 2.0).collect::<Vec<_>>());
        let margin_a = 0.1 + stream.unit() * 5.0;
        let margin_b = 0.1 + stream.unit() * 5.0;
        let a = kcl_pair_loss(&p, &q, PairLabel::Similar, margin_a).unwrap();
        let b = kcl_pair_loss(&p, &q, PairLabel::Similar, margin_b).unwrap();
        assert_eq!(a.loss, b.loss);
        assert_eq!(a.grad_p, b.grad_p);
        assert_eq!(a.grad_q, b.grad_q);
    }

    println!(
        "A7 determinism-and-loss-identities: PASS (3 artifacts byte-identical, complement deviation {max_dev:.2e}, 100 margin-independent pairs)"
    );
}

/// The controlled-comparison discipline: a loss ablation pair differs in
/// the loss field alone, and supporting baselines hold (k-means solves the
/// separated blobs, two moons defeat it).
#[test]
fn supporting_baselines_and_controlled_comparison() {
    use cclust::harness::config_field_diff;

    let base = RunConfig {
        dataset: DatasetSpec::TwoMoons { n: 500, noise_sigma: 0.1, seed: 4 },
        hidden_dims: vec![32, 32],
        activation: Activation::Relu,
        k_out: 2,
        loss: LossConfig::ccl(),
        optimizer: Some(OptimizerConfig::sgd(0.1, vec![])),
        epochs: 60,
        batch_size: 100,
        stratified: false,
        standardize: false,
        noise: None,
        seed: 4,
        eval_split: None,
    };
    let sweep = SweepConfig {
        base: base.clone(),
        axes: SweepAxes {
            loss_kind: vec![LossKind::Ccl, LossKind::Kcl],
            depth: vec![],
            k_out: vec![],
            noise: vec![],
            seed: vec![],
        },
    };
    let configs = sweep.expand();
    assert_eq!(configs.len(), 2);
    assert_eq!(config_field_diff(&configs[0], &configs[1]), vec!["loss".to_string()]);

    let blobs = gen_blobs(4, 250, 2, 8.0, 7).unwrap();
    let km_blobs = kmeans_eval(&blobs, 4, 0).unwrap();
    assert!(km_blobs.acc >= 0.99, "k-means on separated blobs: {}", km_blobs.acc);

    let moons = gen_two_moons(1000, 0.1, 7).unwrap();
    let km_moons = kmeans_eval(&moons, 2, 0).unwrap();
    let outcome = train(&RunConfig { dataset: DatasetSpec::TwoMoons { n: 1000, noise_sigma: 0.1, seed: 7 }, ..base }).unwrap();
    assert!(km_moons.acc < 0.9, "k-means should fail on moons, got {}", km_moons.acc);
    assert!(
        outcome.result.report.acc >= 0.95,
        "trained net should solve moons, got {}",
        outcome.result.report.acc
    );
    println!(
        "controlled-comparison & baselines: PASS (kmeans blobs {:.3}, kmeans moons {:.3}, trained moons {:.3})",
        km_blobs.acc, km_moons.acc, outcome.result.report.acc
    );
}

/// Oracle corruption statistics converge to the configured rates.
#[test]
fn noise_rates_match_quality_statistics() {
    use cclust::constraints::constraint_quality;

    let labels: Vec<usize> = (0..100).map(|i| i / 10).collect();
    let pairs = enumerate_pairs(100).unwrap();
    let truth = constraints_from_labels(&labels, &pairs).unwrap();
    let (fp, fn_) = (0.15, 0.08);
    let noisy = apply_noise(&truth, &NoiseModel::new(fp, fn_, 777).unwrap()).unwrap();
    let quality = constraint_quality(&noisy, &truth).unwrap();

    // recall(similar) -> 1 - fn within 3 sigma of the binomial
    let n_sim = truth.similar.len() as f64;
    let sigma_sim = (fn_ * (1.0 - fn_) / n_sim).sqrt();
    assert!((quality.similar_recall - (1.0 - fn_)).abs() <= 3.0 * sigma_sim);
    let n_dis = truth.dissimilar.len() as f64;
    let sigma_dis = (fp * (1.0 - fp) / n_dis).sqrt();
    assert!((quality.dissimilar_recall - (1.0 - fp)).abs() <= 3.0 * sigma_dis);
    println!(
        "noise-quality statistics: PASS (similar recall {:.4} ~ {:.2}, dissimilar recall {:.4} ~ {:.2})",
        quality.similar_recall,
        1.0 - fn_,
        quality.dissimilar_recall,
        1.0 - fp
    );
}

/// Final input check: predicted-over-true evaluation flows through the
/// rectangular assignment path when the net has more heads than classes.
#[test]
fn rectangular_evaluation_path() {
    let pred: Vec<usize> = (0..60).map(|i| i % 12).collect();
    let truth: Vec<usize> = (0..60).map(|i| i % 3).collect();
    let report = evaluate(&pred, &truth).unwrap();
    assert_eq!(report.k_pred_used, 12);
    assert!(report.mapping.len() <= 3, "injective into 3 classes");
    assert!(report.acc <= 1.0 / 4.0 + 1e-12, "only 3 of 12 clusters can match");
}
