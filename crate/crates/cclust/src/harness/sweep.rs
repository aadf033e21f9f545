//! Grid sweeps: vary one or more axes over a base config, one run per
//! combination, aggregated into a CSV. Each run is self-contained, so
//! workers can execute them concurrently without shared state.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::config::{HarnessError, NoiseConfig, RunConfig};
use super::train::train_to_dir;
use crate::loss::LossKind;

/// Sweepable axes. Empty lists leave the base config untouched on that
/// axis, so an all-empty sweep is a single baseline run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    /// Pair objective.
    #[serde(default)]
    pub loss_kind: Vec<LossKind>,
    /// Hidden-layer count; widths are copied from the base config's first
    /// hidden dim.
    #[serde(default)]
    pub depth: Vec<usize>,
    /// Network output width.
    #[serde(default)]
    pub k_out: Vec<usize>,
    /// Constraint corruption settings.
    #[serde(default)]
    pub noise: Vec<NoiseConfig>,
    /// Run seeds.
    #[serde(default)]
    pub seed: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: RunConfig,
    #[serde(default)]
    pub axes: SweepAxes,
}

impl SweepConfig {
    pub fn from_file(path: &Path) -> Result<SweepConfig, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let config: SweepConfig =
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.base.validate()?;
        Ok(config)
    }

    /// Cross product of all non-empty axes, in a fixed nesting order.
    pub fn expand(&self) -> Vec<RunConfig> {
        let one_or = |len: usize| if len == 0 { 1 } else { len };
        let axes = &self.axes;
        let mut configs = Vec::with_capacity(
            one_or(axes.loss_kind.len())
                * one_or(axes.depth.len())
                * one_or(axes.k_out.len())
                * one_or(axes.noise.len())
                * one_or(axes.seed.len()),
        );
        let opt = |list: &[usize]| -> Vec<Option<usize>> {
            if list.is_empty() {
                vec![None]
            } else {
                list.iter().map(|&v| Some(v)).collect()
            }
        };
        let loss_kinds: Vec<Option<LossKind>> = if axes.loss_kind.is_empty() {
            vec![None]
        } else {
            axes.loss_kind.iter().map(|&k| Some(k)).collect()
        };
        let noises: Vec<Option<NoiseConfig>> = if axes.noise.is_empty() {
            vec![None]
        } else {
            axes.noise.iter().map(|&n| Some(n)).collect()
        };
        let seeds: Vec<Option<u64>> = if axes.seed.is_empty() {
            vec![None]
        } else {
            axes.seed.iter().map(|&s| Some(s)).collect()
        };

        for loss_kind in &loss_kinds {
            for depth in &opt(&axes.depth) {
                for k_out in &opt(&axes.k_out) {
                    for noise in &noises {
                        for seed in &seeds {
                            let mut config = self.base.clone();
                            if let Some(kind) = loss_kind {
                                config.loss.kind = *kind;
                            }
                            if let Some(layers) = depth {
                                let width = self.base.hidden_dims.first().copied().unwrap_or(64);
                                config.hidden_dims = vec![width; *layers];
                            }
                            if let Some(k) = k_out {
                                config.k_out = *k;
                            }
                            if let Some(n) = noise {
                                config.noise = Some(*n);
                            }
                            if let Some(s) = seed {
                                config.seed = *s;
                            }
                            configs.push(config);
                        }
                    }
                }
            }
        }
        configs
    }
}

/// One sweep run's outcome. Failures are recorded, not propagated, so a bad
/// combination cannot abort the rest of the grid.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub loss_kind: LossKind,
    pub depth: usize,
    pub k_out: usize,
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub seed: u64,
    pub acc: Option<f64>,
    pub nmi: Option<f64>,
    pub final_loss: Option<f64>,
    pub duration_secs: f64,
    pub error: Option<String>,
}

pub fn sweep_csv_header() -> &'static str {
    "loss_kind,depth,k_out,fp_rate,fn_rate,seed,acc,nmi,final_loss,duration_s,status\n"
}

fn render_row(row: &SweepRow) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6}"));
    format!(
        "{},{},{},{},{},{},{},{},{},{:.3},{}\n",
        row.loss_kind,
        row.depth,
        row.k_out,
        row.fp_rate,
        row.fn_rate,
        row.seed,
        opt(row.acc),
        opt(row.nmi),
        opt(row.final_loss),
        row.duration_secs,
        row.error.as_deref().map_or("ok".to_string(), |e| format!("error:{}", e.replace(',', ";")))
    )
}

fn run_one(config: &RunConfig, out_root: &Path) -> SweepRow {
    let noise = config.noise.unwrap_or(NoiseConfig {
        false_positive_rate: 0.0,
        false_negative_rate: 0.0,
        seed: None,
    });
    let mut row = SweepRow {
        loss_kind: config.loss.kind,
        depth: config.hidden_dims.len(),
        k_out: config.k_out,
        fp_rate: noise.false_positive_rate,
        fn_rate: noise.false_negative_rate,
        seed: config.seed,
        acc: None,
        nmi: None,
        final_loss: None,
        duration_secs: 0.0,
        error: None,
    };
    match train_to_dir(config, out_root) {
        Ok((outcome, _)) => {
            row.acc = Some(outcome.result.report.acc);
            row.nmi = Some(outcome.result.report.nmi);
            row.final_loss = outcome.result.loss_curve.last().copied();
            row.duration_secs = outcome.result.duration_secs;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Execute the sweep with `workers` threads (1 = sequential), write
/// `sweep.csv` under `out_root`, and return the rows in grid order.
pub fn run_sweep(
    sweep: &SweepConfig,
    out_root: &Path,
    workers: usize,
) -> Result<Vec<SweepRow>, HarnessError> {
    let configs = sweep.expand();
    std::fs::create_dir_all(out_root).map_err(|e| HarnessError::io(out_root, e))?;

    let workers = workers.max(1).min(configs.len().max(1));
    let mut rows: Vec<Option<SweepRow>> = vec![None; configs.len()];
    if workers <= 1 {
        for (slot, config) in rows.iter_mut().zip(&configs) {
            *slot = Some(run_one(config, out_root));
        }
    } else {
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<(usize, SweepRow)>> = Mutex::new(Vec::with_capacity(configs.len()));
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let idx = next.fetch_add(1, Ordering::Relaxed);
                    if idx >= configs.len() {
                        break;
                    }
                    let row = run_one(&configs[idx], out_root);
                    results.lock().unwrap().push((idx, row));
                });
            }
        });
        for (idx, row) in results.into_inner().unwrap() {
            rows[idx] = Some(row);
        }
    }
    let rows: Vec<SweepRow> = rows.into_iter().map(|r| r.expect("every run produced a row")).collect();

    let mut csv = String::from(sweep_csv_header());
    for row in &rows {
        csv.push_str(&render_row(row));
    }
    let csv_path = out_root.join("sweep.csv");
    std::fs::write(&csv_path, csv).map_err(|e| HarnessError::io(&csv_path, e))?;
    Ok(rows)
}
