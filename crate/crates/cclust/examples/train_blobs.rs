//! End-to-end supervised constrained clustering on Gaussian blobs: generate
//! data, train with ground-truth constraints, report accuracy and NMI.
//!
//! ```bash
//! cargo run --release -p cclust --example train_blobs
//! ```

use cclust::harness::{train, DatasetSpec, LossConfig, OptimizerConfig, RunConfig};
use cclust::network::Activation;

fn main() {
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
        seed: 7,
        eval_split: None,
    };

    let outcome = train(&config).expect("training succeeds");
    println!("run {}", outcome.result.fingerprint);
    for row in outcome.result.history.iter().step_by(25) {
        println!("epoch {:>3}  loss {:.5}  acc {:.4}  nmi {:.4}", row.epoch, row.loss, row.acc, row.nmi);
    }
    let report = &outcome.result.report;
    println!(
        "\nfinal: acc {:.4}, nmi {:.4}, {} of {} output clusters used",
        report.acc, report.nmi, report.k_pred_used, config.k_out
    );
    println!("cluster -> class mapping: {:?}", report.mapping);
}
