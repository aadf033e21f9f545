//! Check the hand-derived backprop against central finite differences on a
//! small random network, for both objectives.
//!
//! ```bash
//! cargo run --release -p cclust --example gradient_check
//! ```

use cclust::loss::{batch_loss_dense, PairLabel, PairObjective, PairWeighting};
use cclust::network::{enumerate_pairs, Activation, LayerSpec, Network};
use cclust::Matrix;

fn batch_loss_at(net: &Network, batch: &Matrix, labels: &[PairLabel], objective: PairObjective) -> f64 {
    let trace = net.forward(batch).unwrap();
    let pairs = enumerate_pairs(batch.rows()).unwrap();
    batch_loss_dense(&trace.probs, &pairs, labels, objective, PairWeighting::Mean)
        .unwrap()
        .0
}

fn main() {
    let spec = LayerSpec::new(4, vec![8, 6], 3, Activation::Relu).unwrap();
    let net = Network::init(spec, 2024);
    let batch = Matrix::from_rows(&[
        vec![0.5, -0.2, 0.1, 0.8],
        vec![-0.4, 0.3, 0.9, -0.1],
        vec![1.2, 0.0, -0.7, 0.3],
        vec![0.0, 0.8, 0.2, -0.6],
        vec![-0.9, -0.3, 0.5, 0.2],
    ]);
    let labels = vec![
        PairLabel::Similar,
        PairLabel::Dissimilar,
        PairLabel::Dissimilar,
        PairLabel::Similar,
        PairLabel::Dissimilar,
        PairLabel::Similar,
        PairLabel::Dissimilar,
        PairLabel::Dissimilar,
        PairLabel::Similar,
        PairLabel::Dissimilar,
    ];

    let h = 1e-5;
    for objective in [PairObjective::ccl(), PairObjective::kcl(2.0).unwrap()] {
        let trace = net.forward(&batch).unwrap();
        let pairs = enumerate_pairs(batch.rows()).unwrap();
        let (_, dprobs) =
            batch_loss_dense(&trace.probs, &pairs, &labels, objective, PairWeighting::Mean).unwrap();
        let analytic = net.backward_from_prob_grad(&trace, &dprobs).unwrap().flatten();

        let n_params = net.params.param_count();
        let mut max_rel: f64 = 0.0;
        let mut checked = 0;
        for idx in 0..n_params {
            let eval = |delta: f64| {
                let mut perturbed = net.clone();
                let mut i = 0;
                perturbed.params.for_each_mut(|v| {
                    if i == idx {
                        *v += delta;
                    }
                    i += 1;
                });
                batch_loss_at(&perturbed, &batch, &labels, objective)
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            if analytic[idx].abs() > 1e-8 {
                max_rel = max_rel.max((analytic[idx] - fd).abs() / analytic[idx].abs());
                checked += 1;
            }
        }
        println!(
            "{:?}: checked {checked}/{n_params} coordinates, max relative error {max_rel:.3e}",
            objective.kind()
        );
    }
}
