//! Supervised clustering on MNIST: 784-512-256-10 MLP, batch 100, SGD with
//! step decay, likelihood loss over dense in-batch pairs, accuracy on the
//! test split.
//!
//! Expects the four standard IDX files (uncompressed) under `data/mnist/`
//! or a directory given by the `MNIST_DIR` environment variable:
//!
//!   train-images-idx3-ubyte   train-labels-idx1-ubyte
//!   t10k-images-idx3-ubyte    t10k-labels-idx1-ubyte
//!
//! ```bash
//! MNIST_DIR=/path/to/mnist cargo run --release -p cclust --example mnist_supervised
//! ```

use std::path::PathBuf;

use cclust::harness::{train, DatasetSpec, EvalSplit, LossConfig, OptimizerConfig, RunConfig};
use cclust::network::Activation;

fn mnist_dir() -> Option<PathBuf> {
    let candidates = [
        std::env::var("MNIST_DIR").ok().map(PathBuf::from),
        Some(PathBuf::from("data/mnist")),
    ];
    candidates
        .into_iter()
        .flatten()
        .find(|dir| dir.join("train-images-idx3-ubyte").exists())
}

fn main() {
    let Some(dir) = mnist_dir() else {
        eprintln!("MNIST not found. Place the uncompressed IDX files under data/mnist/");
        eprintln!("or set MNIST_DIR. Download (then `gunzip *.gz`):");
        eprintln!("  https://storage.googleapis.com/cvdf-datasets/mnist/train-images-idx3-ubyte.gz");
        eprintln!("  https://storage.googleapis.com/cvdf-datasets/mnist/train-labels-idx1-ubyte.gz");
        eprintln!("  https://storage.googleapis.com/cvdf-datasets/mnist/t10k-images-idx3-ubyte.gz");
        eprintln!("  https://storage.googleapis.com/cvdf-datasets/mnist/t10k-labels-idx1-ubyte.gz");
        std::process::exit(1);
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

    println!("training 784-512-256-10 on 60k digits; expect a few minutes per epoch on CPU");
    let outcome = train(&config).expect("training succeeds");
    for row in &outcome.result.history {
        println!("epoch {:>2}  loss {:.5}  test acc {:.4}  nmi {:.4}", row.epoch, row.loss, row.acc, row.nmi);
    }
    let r = &outcome.result.report;
    println!("\nfinal test-set clustering: acc {:.4}, nmi {:.4} ({:.1} s)", r.acc, r.nmi, outcome.result.duration_secs);
}
