//! Accuracy, regret and weight diagnostics over completed runs.

use crate::condor::{pool_predict, EpochSummary, ModelPool, RunTrace, StepRecord};
use crate::error::{invalid, Error, Result};
use crate::streams::LabeledInstance;

/// Cumulative-loss accounting of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    /// `L_T`.
    pub global_loss: f64,
    /// `L_{S_k}`, epoch 1 first.
    pub per_epoch_loss: Vec<f64>,
    /// `L^{(j)}_{S_k}`; row `k` has one entry per model in the pool during epoch `k`.
    pub per_model_per_epoch_loss: Vec<Vec<f64>>,
    /// `j*_k`, `None` for an epoch without models.
    pub best_model_index_per_epoch: Vec<Option<usize>>,
    pub epoch_lengths: Vec<usize>,
}

impl RegretLedger {
    pub fn new(per_epoch_loss: Vec<f64>, per_model_per_epoch_loss: Vec<Vec<f64>>, epoch_lengths: Vec<usize>) -> Result<Self> {
        let k = per_epoch_loss.len();
        if per_model_per_epoch_loss.len() != k || epoch_lengths.len() != k {
            return Err(invalid("ledger", "per-epoch vectors differ in length"));
        }
        let best_model_index_per_epoch = per_model_per_epoch_loss
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(j, _)| j)
            })
            .collect();
        Ok(Self {
            global_loss: per_epoch_loss.iter().sum(),
            per_epoch_loss,
            per_model_per_epoch_loss,
            best_model_index_per_epoch,
            epoch_lengths,
        })
    }

    pub fn from_epochs(epochs: &[EpochSummary]) -> Result<Self> {
        Self::new(
            epochs.iter().map(|e| e.ensemble_loss).collect(),
            epochs.iter().map(|e| e.model_losses.clone()).collect(),
            epochs.iter().map(EpochSummary::len).collect(),
        )
    }

    pub fn epochs(&self) -> usize {
        self.per_epoch_loss.len()
    }

    pub fn total_length(&self) -> usize {
        self.epoch_lengths.iter().sum()
    }

    /// `min_j L^{(j)}_{S_k}`.
    pub fn best_loss(&self, epoch: usize) -> Option<f64> {
        let j = self.best_model_index_per_epoch.get(epoch).copied().flatten()?;
        Some(self.per_model_per_epoch_loss[epoch][j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretSummary {
    pub dynamic_regret: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Dynamic regret against the best pool model of every epoch after the
/// first, with the bound `sqrt(sum_{k=1}^{K-1} ln k * T / 2)`.
pub fn regret_summary(ledger: &RegretLedger) -> Result<RegretSummary> {
    let k = ledger.epochs();
    if k < 2 {
        return Err(invalid("ledger", format!("{k} epochs, need at least 2")));
    }
    let best: f64 = (1..k).filter_map(|e| ledger.best_loss(e)).sum();
    let dynamic_regret = ledger.global_loss - best;
    let log_sum: f64 = (1..k).map(|i| (i as f64).ln()).sum();
    let bound = (log_sum * ledger.total_length() as f64 / 2.0).sqrt();
    Ok(RegretSummary {
        dynamic_regret,
        bound,
        holds: dynamic_regret <= bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalRegret {
    pub epoch: usize,
    pub experts: usize,
    pub regret: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Per-epoch check of `L_{S_k} <= min_j L^{(j)}_{S_k} + sqrt(m_k / 2 * ln N_k)`
/// on epochs with at least two models.
pub fn local_regret(ledger: &RegretLedger) -> Vec<LocalRegret> {
    (0..ledger.epochs())
        .filter_map(|e| {
            let experts = ledger.per_model_per_epoch_loss[e].len();
            if experts < 2 {
                return None;
            }
            let regret = ledger.per_epoch_loss[e] - ledger.best_loss(e)?;
            let bound = (ledger.epoch_lengths[e] as f64 / 2.0 * (experts as f64).ln()).sqrt();
            Some(LocalRegret {
                epoch: e + 1,
                experts,
                regret,
                bound,
                holds: regret <= bound,
            })
        })
        .collect()
}

/// Fraction of records predicted correctly.
pub fn prequential_accuracy(records: &[StepRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Empty("step records"));
    }
    let hits = records.iter().filter(|r| r.predicted_label == r.true_label).count();
    Ok(hits as f64 / records.len() as f64)
}

pub fn holdout_accuracy(pool: &ModelPool, test_set: &[LabeledInstance]) -> Result<f64> {
    if test_set.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let mut hits = 0usize;
    for item in test_set {
        if pool_predict(pool, &item.features)?.1 == item.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / test_set.len() as f64)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    /// One prequential accuracy per trial.
    pub trial_accuracies: Vec<f64>,
    pub holdout_accuracy_per_checkpoint: Vec<f64>,
    pub mean: f64,
    pub stddev: f64,
}

impl AccuracyReport {
    pub fn new(trial_accuracies: Vec<f64>, holdout_accuracy_per_checkpoint: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = trial_accuracies
            .iter()
            .chain(&holdout_accuracy_per_checkpoint)
            .find(|a| !(0.0..=1.0).contains(*a))
        {
            return Err(Error::ValueOutOfRange(bad));
        }
        let (mean, stddev) = mean_std(&trial_accuracies)?;
        Ok(Self {
            trial_accuracies,
            holdout_accuracy_per_checkpoint,
            mean,
            stddev,
        })
    }
}

/// Normalized weights of one epoch at selected iterations, one row per model.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub epoch: usize,
    pub model_ids: Vec<usize>,
    /// 1-based iterations within the epoch (iteration 0 is the reset value).
    pub iterations: Vec<usize>,
    /// `rows[j][i]`: weight of `model_ids[j]` at `iterations[i]`.
    pub rows: Vec<Vec<f64>>,
}

impl WeightTable {
    pub fn final_weights(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.last().copied().unwrap_or(0.0)).collect()
    }

    pub fn weight_of(&self, model_id: usize) -> Option<f64> {
        let j = self.model_ids.iter().position(|&id| id == model_id)?;
        self.rows[j].last().copied()
    }

    /// Tab-separated table in the style `model  it0  it1 ...`.
    pub fn render(&self) -> String {
        let mut out = String::from("model");
        for it in &self.iterations {
            out.push_str(&format!("\t{it}"));
        }
        out.push('\n');
        for (id, row) in self.model_ids.iter().zip(&self.rows) {
            out.push_str(&format!("h{id}"));
            for w in row {
                out.push_str(&format!("\t{w:.3e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Weight trajectories for every epoch that had at least two models.
/// `iterations` selects within-epoch iterations; `0` is the reset value and
/// iterations past the end of an epoch are skipped.
pub fn weight_concentration_report(trace: &RunTrace, iterations: &[usize]) -> Vec<WeightTable> {
    let mut tables = Vec::new();
    for epoch in &trace.epochs {
        if epoch.model_ids.len() < 2 {
            continue;
        }
        let records = &trace.records[epoch.start_t - 1..epoch.end_t];
        let its: Vec<usize> = iterations.iter().copied().filter(|&i| i <= records.len()).collect();
        let rows = (0..epoch.model_ids.len())
            .map(|j| {
                its.iter()
                    .map(|&i| if i == 0 { epoch.initial_weights[j] } else { records[i - 1].weights[j] })
                    .collect()
            })
            .collect();
        tables.push(WeightTable {
            epoch: epoch.index,
            model_ids: epoch.model_ids.clone(),
            iterations: its,
            rows,
        });
    }
    tables
}

/// Closed-form weights `beta_1 exp(-eta L_j)`, normalized, from per-model
/// cumulative losses.
pub fn closed_form_weights(initial: &[f64], cumulative_losses: &[f64], eta: f64) -> Vec<f64> {
    // shift by the smallest exponent so nothing underflows
    let min_loss = cumulative_losses.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = initial
        .iter()
        .zip(cumulative_losses)
        .map(|(b, l)| b * (-eta * (l - min_loss)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Per-algorithm sums of `acc / min_algo acc` over datasets.
/// Rows are algorithms, columns datasets.
pub fn robustness_scores(accuracy_table: &[Vec<f64>]) -> Result<Vec<f64>> {
    if accuracy_table.len() < 2 {
        return Err(invalid("accuracy_table", "need at least 2 algorithms"));
    }
    let datasets = accuracy_table[0].len();
    if accuracy_table.iter().any(|row| row.len() != datasets) {
        return Err(invalid("accuracy_table", "ragged table"));
    }
    if let Some(&bad) = accuracy_table.iter().flatten().find(|a| !(**a > 0.0)) {
        return Err(Error::ValueOutOfRange(bad));
    }
    let worst: Vec<f64> = (0..datasets)
        .map(|d| accuracy_table.iter().map(|row| row[d]).fold(f64::INFINITY, f64::min))
        .collect();
    Ok(accuracy_table
        .iter()
        .map(|row| row.iter().zip(&worst).map(|(a, w)| a / w).sum())
        .collect())
}
