//! Constrained clustering with pairwise similar/dissimilar constraints,
//! trained end-to-end through a softmax cluster-assignment network.
//!
//! The centerpiece is a likelihood objective over in-batch sample pairs:
//! the probability that two samples share a cluster is the inner product of
//! their assignment distributions, and training minimizes the negative
//! log-likelihood of all pairwise constraints. A KL-divergence contrastive
//! baseline with a hinge margin is provided under the same interface, so
//! the two objectives can be compared with everything else held fixed.
//!
//! Organization:
//!
//! * [`loss`] — the pair objectives and batch reductions, with analytic
//!   gradients;
//! * [`network`] — the feedforward assignment network, manual backprop, and
//!   dense in-batch pair enumeration;
//! * [`optim`] — SGD/Adam, step-decay schedule, gradient clipping;
//! * [`constraints`] — constraint generation from labels and the noisy
//!   oracle model;
//! * [`metrics`] — Hungarian-matched clustering accuracy (including the
//!   over-clustered rectangular case) and NMI;
//! * [`data`] — synthetic generators, IDX/CSV loaders, batch sampling;
//! * [`harness`] — configs, the training loop, k-means baseline, sweeps,
//!   and run artifacts.
//!
//! Start with the runnable examples (`cargo run --release -p cclust
//! --example <name>`):
//!
//! * `pair_losses` — the two objectives on hand-picked distributions
//! * `gradient_check` — finite-difference verification of backprop
//! * `train_blobs` — supervised constrained clustering on Gaussian blobs
//! * `two_moons_depth` — depth stability, likelihood vs KL baseline
//! * `noisy_oracle` — training against corrupted constraints
//! * `overclustering` — more outputs than classes (unknown cluster count)
//! * `kmeans_baseline` — fixed-metric baseline vs the learned objective
//! * `mnist_supervised` — the full MNIST recipe (needs local IDX files)
//!
//! The `cclust` binary wraps the same machinery as `train`, `eval`,
//! `kmeans`, and `sweep` subcommands.

pub mod constraints;
pub mod data;
pub mod harness;
pub mod loss;
pub mod matrix;
pub mod metrics;
pub mod network;
pub mod optim;
pub mod rng;

pub use loss::{LossKind, PairLabel, PairObjective, ProbVector};
pub use matrix::Matrix;
pub use metrics::EvalReport;
pub use network::{Activation, LayerSpec, Network};
