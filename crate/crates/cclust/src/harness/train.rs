//! The training loop: forward → pair enumeration → constraints (optionally
//! corrupted) → pair loss → backprop → optimizer step, epoch after epoch,
//! with per-epoch evaluation and reproducible artifacts on disk.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::constraints::{apply_noise, constraints_from_labels, NoiseModel};
use crate::data::{
    gen_blobs, gen_two_moons, iterate_batches, load_csv, load_idx, BatchSampler, Dataset,
    Standardizer,
};
use crate::loss::{batch_loss_dense, PairLabel, PairObjective};
use crate::matrix::Matrix;
use crate::metrics::{evaluate, EvalReport};
use crate::network::{enumerate_pairs, LayerSpec, Network};
use crate::optim::{clip_grad_norm, lr_at_epoch, optimizer_step, OptimError, OptimizerState};
use crate::rng::mix_seed;

use super::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, RngState, CHECKPOINT_VERSION};
use super::config::{fingerprint, DatasetSpec, EvalSplit, HarnessError, RunConfig};

/// Stream tags for seed derivation; distinct consumers never share a stream.
const STREAM_INIT: u64 = 1;
const STREAM_BATCHES: u64 = 2;
const STREAM_NOISE: u64 = 3;
const STREAM_TEST_SPLIT: u64 = 4;

/// One row of the per-epoch history CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRow {
    pub epoch: usize,
    pub loss: f64,
    pub acc: f64,
    pub nmi: f64,
}

/// Everything a finished run reports.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub fingerprint: String,
    /// Mean pair loss per epoch.
    pub loss_curve: Vec<f64>,
    pub history: Vec<EpochRow>,
    pub report: EvalReport,
    pub duration_secs: f64,
}

/// A finished run plus the state needed to continue it.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub result: RunResult,
    pub network: Network,
    pub checkpoint: Checkpoint,
}

/// Materialize a dataset spec (generators run, files load).
pub fn load_dataset(spec: &DatasetSpec) -> Result<Dataset, HarnessError> {
    Ok(match spec {
        DatasetSpec::Blobs { k, per_cluster, d, separation, seed } => {
            gen_blobs(*k, *per_cluster, *d, *separation, *seed)?
        }
        DatasetSpec::TwoMoons { n, noise_sigma, seed } => gen_two_moons(*n, *noise_sigma, *seed)?,
        DatasetSpec::Idx { images, labels, .. } => load_idx(images, labels)?,
        DatasetSpec::Csv { path, label_column } => load_csv(path, label_column.as_ref())?,
    })
}

/// The dataset the final metrics are computed on, per the eval policy:
/// the target (training) set itself, the IDX test files, or a freshly
/// generated sample with a derived seed for the synthetic datasets.
pub fn resolve_eval_dataset(config: &RunConfig, train_ds: &Dataset) -> Result<Dataset, HarnessError> {
    match config.resolved_eval_split() {
        EvalSplit::TargetSet => Ok(train_ds.clone()),
        EvalSplit::TestSplit => match &config.dataset {
            DatasetSpec::Blobs { k, per_cluster, d, separation, seed } => {
                Ok(gen_blobs(*k, *per_cluster, *d, *separation, mix_seed(*seed, STREAM_TEST_SPLIT))?)
            }
            DatasetSpec::TwoMoons { n, noise_sigma, seed } => {
                Ok(gen_two_moons(*n, *noise_sigma, mix_seed(*seed, STREAM_TEST_SPLIT))?)
            }
            DatasetSpec::Idx { test_images, test_labels, .. } => {
                let (img, lbl) = test_images
                    .as_ref()
                    .zip(test_labels.as_ref())
                    .ok_or_else(|| {
                        HarnessError::Config(
                            "eval_split = test_split needs test_images/test_labels".into(),
                        )
                    })?;
                Ok(load_idx(img, lbl)?)
            }
            DatasetSpec::Csv { .. } => Err(HarnessError::Config(
                "csv datasets have no test split; use eval_split = target_set".into(),
            )),
        },
    }
}

/// Forward a large matrix through the network in fixed-size chunks, so
/// evaluation never holds a full trace of the whole dataset.
pub fn predict_in_chunks(network: &Network, features: &Matrix) -> Result<Vec<usize>, HarnessError> {
    const CHUNK: usize = 1024;
    let n = features.rows();
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let indices: Vec<usize> = (start..end).collect();
        let block = features.select_rows(&indices);
        out.extend(network.predict_clusters(&block)?);
        start = end;
    }
    Ok(out)
}

struct Session {
    network: Network,
    state: OptimizerState,
    objective: PairObjective,
    noise: Option<NoiseModel>,
    sampler: BatchSampler,
    base_lr: f64,
    milestones: Vec<usize>,
    grad_clip: Option<f64>,
}

fn build_session(config: &RunConfig, train_ds: &Dataset, resume: Option<&Checkpoint>) -> Result<Session, HarnessError> {
    let spec = LayerSpec::new(
        train_ds.dim(),
        config.hidden_dims.clone(),
        config.k_out,
        config.activation,
    )?;
    let opt = config.resolved_optimizer();
    let objective = PairObjective::new(config.loss.kind, config.loss.margin)?;
    let noise = match &config.noise {
        None => None,
        Some(nc) => Some(NoiseModel::new(
            nc.false_positive_rate,
            nc.false_negative_rate,
            nc.seed.unwrap_or_else(|| mix_seed(config.seed, STREAM_NOISE)),
        )?),
    };
    let sampler = BatchSampler::new(
        config.batch_size.min(train_ds.n()),
        mix_seed(config.seed, STREAM_BATCHES),
        config.stratified,
    )?;

    let (network, state) = match resume {
        None => {
            let network = Network::init(spec, mix_seed(config.seed, STREAM_INIT));
            let state = OptimizerState::new(opt.kind, opt.learning_rate, opt.momentum, &network.params)?;
            (network, state)
        }
        Some(ckpt) => {
            if ckpt.spec != spec {
                return Err(HarnessError::Config(format!(
                    "checkpoint architecture {:?} does not match the config ({:?})",
                    ckpt.spec, spec
                )));
            }
            let network = Network::from_parts(ckpt.spec.clone(), ckpt.params.clone())?;
            (network, ckpt.optimizer.clone())
        }
    };

    Ok(Session {
        network,
        state,
        objective,
        noise,
        sampler,
        base_lr: opt.learning_rate,
        milestones: opt.milestones,
        grad_clip: opt.grad_clip,
    })
}

/// Per-pair labels for one batch, from ground truth plus optional oracle
/// corruption. Pairs are identified by their dataset-global indices so a
/// noisy oracle labels a given pair the same way every time it is seen.
fn batch_pair_labels(
    labels: &[usize],
    batch: &[usize],
    pairs_local: &[(usize, usize)],
    noise: Option<&NoiseModel>,
) -> Result<Vec<PairLabel>, HarnessError> {
    let global_pairs: Vec<(usize, usize)> =
        pairs_local.iter().map(|&(i, j)| (batch[i], batch[j])).collect();
    let truth = constraints_from_labels(labels, &global_pairs)?;
    let cs = match noise {
        None => truth,
        Some(model) => apply_noise(&truth, model)?,
    };
    Ok(cs
        .labels_for(&global_pairs)
        .into_iter()
        .map(|l| l.expect("every enumerated pair is labeled"))
        .collect())
}

fn train_core(
    config: &RunConfig,
    train_ds: &Dataset,
    eval_ds: &Dataset,
    resume: Option<&Checkpoint>,
) -> Result<TrainOutcome, HarnessError> {
    let started = Instant::now();
    let fp = fingerprint(config);
    let labels = train_ds
        .labels
        .as_ref()
        .ok_or_else(|| HarnessError::Config("training requires labels to derive constraints".into()))?;
    let eval_labels = eval_ds
        .labels
        .as_ref()
        .ok_or_else(|| HarnessError::Config("evaluation dataset has no labels".into()))?;

    let mut session = build_session(config, train_ds, resume)?;
    let start_epoch = resume.map_or(0, |c| c.rng.next_epoch);

    let mut history = Vec::new();
    let mut loss_curve = Vec::new();
    for epoch in start_epoch..config.epochs {
        session.state.learning_rate = lr_at_epoch(session.base_lr, &session.milestones, epoch);
        let batches = iterate_batches(train_ds, &session.sampler, epoch)?;
        let mut epoch_loss = 0.0;
        for (batch_no, batch) in batches.iter().enumerate() {
            let x = train_ds.features.select_rows(batch);
            let trace = session.network.forward(&x)?;
            let pairs = enumerate_pairs(batch.len())?;
            let pair_labels = batch_pair_labels(labels, batch, &pairs, session.noise.as_ref())?;
            let (loss, dprobs) = batch_loss_dense(
                &trace.probs,
                &pairs,
                &pair_labels,
                session.objective,
                config.loss.weighting,
            )?;
            if !loss.is_finite() {
                return Err(HarnessError::Numerical {
                    epoch,
                    batch: batch_no,
                    message: format!("loss is {loss}"),
                });
            }
            let mut grads = session.network.backward_from_prob_grad(&trace, &dprobs)?;
            if let Some(max_norm) = session.grad_clip {
                clip_grad_norm(&mut grads, max_norm);
            }
            match optimizer_step(&mut session.network.params, &grads, &mut session.state) {
                Ok(()) => {}
                Err(OptimError::NonFiniteGradient) => {
                    return Err(HarnessError::Numerical {
                        epoch,
                        batch: batch_no,
                        message: "gradient contains a non-finite entry".into(),
                    })
                }
                Err(e) => return Err(e.into()),
            }
            epoch_loss += loss;
        }
        let mean_loss = epoch_loss / batches.len() as f64;
        let pred = predict_in_chunks(&session.network, &eval_ds.features)?;
        let eval = evaluate(&pred, eval_labels)?;
        loss_curve.push(mean_loss);
        history.push(EpochRow { epoch, loss: mean_loss, acc: eval.acc, nmi: eval.nmi });
    }

    let pred = predict_in_chunks(&session.network, &eval_ds.features)?;
    let report = evaluate(&pred, eval_labels)?;

    let checkpoint = Checkpoint {
        version: CHECKPOINT_VERSION,
        spec: session.network.spec.clone(),
        params: session.network.params.clone(),
        optimizer: session.state.clone(),
        rng: RngState { seed: config.seed, next_epoch: config.epochs },
        config_fingerprint: fp.clone(),
    };
    Ok(TrainOutcome {
        result: RunResult {
            fingerprint: fp,
            loss_curve,
            history,
            report,
            duration_secs: started.elapsed().as_secs_f64(),
        },
        network: session.network,
        checkpoint,
    })
}

/// Train from scratch per the config.
pub fn train(config: &RunConfig) -> Result<TrainOutcome, HarnessError> {
    config.validate()?;
    let raw_train = load_dataset(&config.dataset)?;
    let raw_eval = resolve_eval_dataset(config, &raw_train)?;
    let (train_ds, eval_ds) = if config.standardize {
        let scaler = Standardizer::fit(&raw_train.features);
        (scaler.transform_dataset(&raw_train), scaler.transform_dataset(&raw_eval))
    } else {
        (raw_train, raw_eval)
    };
    train_core(config, &train_ds, &eval_ds, None)
}

/// Continue a checkpointed run up to `config.epochs`. Bit-exact: training
/// N epochs straight equals training M, checkpointing, and resuming for
/// the remaining N−M.
pub fn resume_training(config: &RunConfig, checkpoint: &Checkpoint) -> Result<TrainOutcome, HarnessError> {
    config.validate()?;
    if checkpoint.rng.seed != config.seed {
        return Err(HarnessError::Config(format!(
            "checkpoint was produced with seed {}, config says {}",
            checkpoint.rng.seed, config.seed
        )));
    }
    let raw_train = load_dataset(&config.dataset)?;
    let raw_eval = resolve_eval_dataset(config, &raw_train)?;
    let (train_ds, eval_ds) = if config.standardize {
        let scaler = Standardizer::fit(&raw_train.features);
        (scaler.transform_dataset(&raw_train), scaler.transform_dataset(&raw_eval))
    } else {
        (raw_train, raw_eval)
    };
    train_core(config, &train_ds, &eval_ds, Some(checkpoint))
}

/// The deterministic final report written to disk. Wall-clock timing lives
/// in a separate file so identical (config, seed) runs are byte-identical.
#[derive(Debug, Serialize)]
struct FinalReport<'a> {
    fingerprint: &'a str,
    config: &'a RunConfig,
    epochs_completed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_loss: Option<f64>,
    acc: f64,
    nmi: f64,
    k_pred_used: usize,
    mapping: &'a [(usize, usize)],
}

pub fn render_report(config: &RunConfig, result: &RunResult) -> String {
    let report = FinalReport {
        fingerprint: &result.fingerprint,
        config,
        epochs_completed: result.history.len(),
        final_loss: result.loss_curve.last().copied(),
        acc: result.report.acc,
        nmi: result.report.nmi,
        k_pred_used: result.report.k_pred_used,
        mapping: &result.report.mapping,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    text
}

pub fn render_history_csv(history: &[EpochRow]) -> String {
    let mut out = String::from("epoch,loss,acc,nmi\n");
    for row in history {
        out.push_str(&format!("{},{:.9},{:.6},{:.6}\n", row.epoch, row.loss, row.acc, row.nmi));
    }
    out
}

/// Train and write the run directory `out_root/<fingerprint>/` containing
/// the config copy, per-epoch CSV, final report, checkpoint, and timing.
pub fn train_to_dir(config: &RunConfig, out_root: &Path) -> Result<(TrainOutcome, PathBuf), HarnessError> {
    let outcome = train(config)?;
    let run_dir = out_root.join(&outcome.result.fingerprint);
    std::fs::create_dir_all(&run_dir).map_err(|e| HarnessError::io(&run_dir, e))?;

    let write = |name: &str, contents: &str| -> Result<(), HarnessError> {
        let path = run_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| HarnessError::io(&path, e))
    };
    write("config.json", &config.to_json())?;
    write("history.csv", &render_history_csv(&outcome.result.history))?;
    write("report.json", &render_report(config, &outcome.result))?;
    save_checkpoint(&outcome.checkpoint, &run_dir.join("checkpoint.json"))?;
    write("timing.txt", &format!("duration_secs {:.3}\n", outcome.result.duration_secs))?;
    Ok((outcome, run_dir))
}

/// Score a checkpointed network on a dataset; parameters are not touched.
pub fn eval_checkpoint(checkpoint_path: &Path, ds: &Dataset) -> Result<EvalReport, HarnessError> {
    let checkpoint = load_checkpoint(checkpoint_path)?;
    let labels = ds
        .labels
        .as_ref()
        .ok_or_else(|| HarnessError::Config("evaluation requires a labeled dataset".into()))?;
    if ds.dim() != checkpoint.spec.input_dim {
        return Err(HarnessError::Config(format!(
            "dataset has {} features but the checkpoint expects {}",
            ds.dim(),
            checkpoint.spec.input_dim
        )));
    }
    let network = Network::from_parts(checkpoint.spec, checkpoint.params)?;
    let pred = predict_in_chunks(&network, &ds.features)?;
    Ok(evaluate(&pred, labels)?)
}
