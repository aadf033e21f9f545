//! Experiment driver: run configuration, the training loop, the k-means
//! baseline, checkpoints, and sweeps.

mod checkpoint;
mod config;
mod kmeans;
mod sweep;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, RngState, CHECKPOINT_VERSION};
pub use config::{
    config_field_diff, fingerprint, DatasetSpec, EvalSplit, HarnessError, LossConfig, NoiseConfig,
    OptimizerConfig, RunConfig, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL,
};
pub use kmeans::{kmeans, kmeans_eval, KMeansResult};
pub use sweep::{run_sweep, sweep_csv_header, SweepAxes, SweepConfig, SweepRow};
pub use train::{
    eval_checkpoint, load_dataset, predict_in_chunks, render_history_csv, render_report,
    resolve_eval_dataset, resume_training, train, train_to_dir, EpochRow, RunResult, TrainOutcome,
};
