//! Training against a corrupted constraint oracle: sweep the flip rates and
//! watch constraint quality and final clustering accuracy.
//!
//! ```bash
//! cargo run --release -p cclust --example noisy_oracle
//! ```

use cclust::constraints::{apply_noise, constraint_quality, constraints_from_labels, NoiseModel};
use cclust::harness::{train, DatasetSpec, LossConfig, NoiseConfig, OptimizerConfig, RunConfig};
use cclust::network::{enumerate_pairs, Activation};

fn main() {
    // first, what the flip model does to a dense batch of constraints
    let labels: Vec<usize> = (0..100).map(|i| i / 10).collect();
    let pairs = enumerate_pairs(100).unwrap();
    let truth = constraints_from_labels(&labels, &pairs).unwrap();
    println!("constraint quality under the flip model (batch of 100, 10 classes):");
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "rate", "sim prec", "sim rec", "dis prec", "dis rec");
    for rate in [0.0, 0.05, 0.1, 0.2] {
        let noisy = apply_noise(&truth, &NoiseModel::new(rate, rate, 99).unwrap()).unwrap();
        let q = constraint_quality(&noisy, &truth).unwrap();
        println!(
            "{rate:>6.2} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            q.similar_precision, q.similar_recall, q.dissimilar_precision, q.dissimilar_recall
        );
    }

    // then, what the corruption costs end to end
    println!("\ntraining on 10 blobs with corrupted constraints:");
    println!("{:>6} {:>8} {:>8} {:>8}", "rate", "acc", "nmi", "k_used");
    for rate in [0.0, 0.05, 0.1] {
        let config = RunConfig {
            dataset: DatasetSpec::Blobs { k: 10, per_cluster: 200, d: 16, separation: 6.0, seed: 1 },
            hidden_dims: vec![64, 64],
            activation: Activation::Relu,
            k_out: 10,
            loss: LossConfig::ccl(),
            optimizer: Some(OptimizerConfig::adam(0.001, vec![180])),
            epochs: 250,
            batch_size: 200,
            stratified: false,
            standardize: false,
            noise: (rate > 0.0).then_some(NoiseConfig {
                false_positive_rate: rate,
                false_negative_rate: rate,
                seed: None,
            }),
            seed: 5,
            eval_split: None,
        };
        let outcome = train(&config).expect("training succeeds");
        let r = &outcome.result.report;
        println!("{rate:>6.2} {:>8.4} {:>8.4} {:>8}", r.acc, r.nmi, r.k_pred_used);
    }
}
