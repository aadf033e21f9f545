//! Fixed-metric baseline vs the learned objective on data a fixed metric
//! cannot separate: k-means carves the two moons linearly, the constrained
//! network learns the curved boundary.
//!
//! ```bash
//! cargo run --release -p cclust --example kmeans_baseline
//! ```

use cclust::harness::{kmeans_eval, load_dataset, train, DatasetSpec, LossConfig, OptimizerConfig, RunConfig};
use cclust::network::Activation;

fn main() {
    let spec = DatasetSpec::TwoMoons { n: 1000, noise_sigma: 0.1, seed: 5 };
    let ds = load_dataset(&spec).unwrap();

    let km = kmeans_eval(&ds, 2, 0).expect("kmeans runs");
    println!("k-means:        acc {:.4}, nmi {:.4}", km.acc, km.nmi);

    let config = RunConfig {
        dataset: spec,
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
        seed: 5,
        eval_split: None,
    };
    let outcome = train(&config).expect("training succeeds");
    let r = &outcome.result.report;
    println!("trained net:    acc {:.4}, nmi {:.4}", r.acc, r.nmi);
}
