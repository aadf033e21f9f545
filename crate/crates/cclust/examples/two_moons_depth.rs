//! Depth stability: the likelihood objective vs the KL baseline at 2 and 8
//! hidden layers on two moons, a few seeds each.
//!
//! ```bash
//! cargo run --release -p cclust --example two_moons_depth
//! ```

use cclust::harness::{run_sweep, DatasetSpec, LossConfig, OptimizerConfig, RunConfig, SweepAxes, SweepConfig};
use cclust::loss::LossKind;
use cclust::network::Activation;

fn main() {
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
            seed: vec![1, 2, 3],
        },
    };

    let out = std::env::temp_dir().join("cclust-example-depth");
    println!("running {} configurations (4 workers)...", sweep.expand().len());
    let rows = run_sweep(&sweep, &out, 4).expect("sweep succeeds");

    println!("\n{:<6} {:<6} {:<6} {:>8} {:>8}", "loss", "depth", "seed", "acc", "nmi");
    for row in &rows {
        println!(
            "{:<6} {:<6} {:<6} {:>8.4} {:>8.4}",
            row.loss_kind.to_string(),
            row.depth,
            row.seed,
            row.acc.unwrap_or(f64::NAN),
            row.nmi.unwrap_or(f64::NAN)
        );
    }
    for kind in [LossKind::Ccl, LossKind::Kcl] {
        for depth in [2usize, 8] {
            let mut accs: Vec<f64> = rows
                .iter()
                .filter(|r| r.loss_kind == kind && r.depth == depth)
                .filter_map(|r| r.acc)
                .collect();
            accs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = accs[accs.len() / 2];
            println!("{kind} depth {depth}: median acc {median:.4}");
        }
    }
    println!("\nfull table: {}", out.join("sweep.csv").display());
}
