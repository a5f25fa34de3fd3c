//! Executes a manifest: every (dataset, config, seed) cell runs on its own
//! and writes `steps_<id>.csv`, `weights_<id>.csv` and `holdout_<id>.csv`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use condor_core::condor::BOOTSTRAP_ITEMS;
use condor_core::streams::sample_batch;
use condor_core::{
    holdout_accuracy, prequential_accuracy, read_csv_stream, regret_summary, Condor, CondorConfig, LabeledInstance,
    RegretLedger, RegretSummary, RunTrace, SyntheticStream,
};
use rayon::prelude::*;

use crate::config::{sanitize, DatasetSource, RunManifest};
use crate::format::fmt_g;
use crate::report::{summarize, write_summary, SummaryRow};

/// Iterations logged at each end of an epoch in the weights file.
pub const WEIGHT_EDGE: usize = 5;

/// Holdout batch seed for checkpoint `k` of a run.
pub fn derive_seed(run_seed: u64, checkpoint: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = run_seed ^ checkpoint.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_id(dataset: &str, config: &str, seed: u64) -> String {
    format!("{}_{}_{seed}", sanitize(dataset), sanitize(config))
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub dataset: String,
    pub config: String,
    pub seed: u64,
    pub outcome: std::result::Result<CellStats, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub accuracy: f64,
    pub regret: Option<RegretSummary>,
}

#[derive(Debug)]
pub struct MatrixOutcome {
    pub cells: Vec<CellResult>,
    pub summary: Vec<SummaryRow>,
    pub summary_path: PathBuf,
}

impl MatrixOutcome {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }
}

enum Loaded {
    Synthetic(condor_core::StreamSpec),
    Csv(Arc<Vec<LabeledInstance>>),
    Broken(String),
}

pub fn run_matrix(manifest: &RunManifest) -> Result<MatrixOutcome> {
    let out = &manifest.output_dir;
    std::fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))?;

    let loaded: Vec<Loaded> = manifest
        .datasets
        .iter()
        .map(|d| match &d.source {
            DatasetSource::Synthetic(spec) => Loaded::Synthetic(spec.clone()),
            DatasetSource::Csv { path, label_column } => match read_csv_stream(path, label_column) {
                Ok(items) if !items.is_empty() => Loaded::Csv(Arc::new(items)),
                Ok(_) => Loaded::Broken(format!("{} has no rows", path.display())),
                Err(e) => Loaded::Broken(e.to_string()),
            },
        })
        .collect();

    let configs = manifest.expanded_configs();
    let mut jobs = Vec::new();
    for (di, d) in manifest.datasets.iter().enumerate() {
        for c in &configs {
            for &seed in &manifest.seeds {
                jobs.push((di, d, c, seed));
            }
        }
    }

    let cells: Vec<CellResult> = jobs
        .par_iter()
        .map(|&(di, d, c, seed)| {
            let mut config = c.config.clone();
            if let Some(p) = d.epoch_cap {
                config.epoch_cap_p = p;
            }
            let id = run_id(&d.name, &c.name, seed);
            let outcome = run_cell(&loaded[di], &config, seed, &id, out, manifest.holdout_size).map_err(|e| format!("{e:#}"));
            CellResult {
                dataset: d.name.clone(),
                config: c.name.clone(),
                seed,
                outcome,
            }
        })
        .collect();

    let summary = summarize(&cells);
    let summary_path = out.join("summary.csv");
    write_summary(&summary_path, &summary)?;
    Ok(MatrixOutcome {
        cells,
        summary,
        summary_path,
    })
}

fn run_cell(data: &Loaded, config: &CondorConfig, seed: u64, id: &str, out: &Path, holdout_size: usize) -> Result<CellStats> {
    let (items, stream) = match data {
        Loaded::Synthetic(spec) => {
            let stream = SyntheticStream::new(spec.clone().with_seed(seed))?;
            (Arc::new(stream.to_vec()), Some(stream))
        }
        Loaded::Csv(items) => (Arc::clone(items), None),
        Loaded::Broken(message) => anyhow::bail!("dataset unavailable: {message}"),
    };

    let n_boot = BOOTSTRAP_ITEMS.min(config.epoch_cap_p).min(items.len());
    let mut condor = Condor::new(config.clone(), &items[..n_boot])?;
    let mut records = Vec::with_capacity(items.len());
    let mut holdout = Vec::new();
    for item in items.iter() {
        let record = condor.step(item)?;
        let t = record.t;
        records.push(record);
        if let Some(stream) = &stream {
            if t.is_multiple_of(config.epoch_cap_p) {
                let k = holdout.len() as u64;
                let batch = sample_batch(stream.concept_at(t - 1), holdout_size, derive_seed(seed, k), stream.spec().noise_rate);
                holdout.push((t, holdout_accuracy(condor.pool(), &batch)?));
            }
        }
    }
    let trace = condor.finish(records);

    write_steps(&out.join(format!("steps_{id}.csv")), &trace)?;
    write_weights(&out.join(format!("weights_{id}.csv")), &trace)?;
    write_holdout(&out.join(format!("holdout_{id}.csv")), &holdout)?;

    let regret = RegretLedger::from_epochs(&trace.epochs)
        .ok()
        .and_then(|ledger| regret_summary(&ledger).ok());
    Ok(CellStats {
        accuracy: prequential_accuracy(&trace.records)?,
        regret,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_steps(path: &Path, trace: &RunTrace) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,true_label,pred_label,score,loss,drift_fired,pool_size")?;
    for r in &trace.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.t,
            r.true_label,
            r.predicted_label,
            fmt_g(r.prediction_score),
            fmt_g(r.loss),
            u8::from(r.drift_fired),
            r.pool_size_after
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_weights(path: &Path, trace: &RunTrace) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,epoch,iteration,model,weight,cum_loss")?;
    for epoch in &trace.epochs {
        let records = &trace.records[epoch.start_t - 1..epoch.end_t];
        let len = records.len();
        let mut cum = vec![0.0; epoch.model_ids.len()];
        for (i, r) in records.iter().enumerate() {
            for (c, l) in cum.iter_mut().zip(&r.per_model_losses) {
                *c += l;
            }
            let iteration = i + 1;
            if iteration > WEIGHT_EDGE && iteration + WEIGHT_EDGE <= len {
                continue;
            }
            for (j, id) in epoch.model_ids.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{iteration},{id},{},{}",
                    r.t,
                    epoch.index,
                    fmt_g(r.weights[j]),
                    fmt_g(cum[j])
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_holdout(path: &Path, checkpoints: &[(usize, f64)]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "checkpoint,t,accuracy")?;
    for (k, (t, acc)) in checkpoints.iter().enumerate() {
        writeln!(w, "{},{t},{}", k + 1, fmt_g(*acc))?;
    }
    w.flush()?;
    Ok(())
}
