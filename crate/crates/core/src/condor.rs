//! The drift-triggered model-reuse learner.
//!
//! Per item: the pool predicts by weighted vote, the label is revealed,
//! every pool weight is multiplied by `exp(-eta * loss)`, the 0-1 loss of
//! the ensemble is fed to the drift detector, and when the detector fires
//! or `t % p == 0` a new model is fitted on the current epoch by biased
//! regularization towards the weight-normalized pool. The new model joins
//! the pool (evicting the oldest beyond capacity) and all weights restart
//! at `1/|pool|`.
//!
//! `t` is 1-based. Before the first model update the pool holds a provisional
//! model fitted on the first `min(p, 10)` items; the first update replaces it
//! by the fit on the whole first epoch, so the model created at the end of
//! epoch `k` carries id `k`.

use std::str::FromStr;

use crate::detector::{Adwin, DEFAULT_DELTA, DEFAULT_MAX_BUCKETS};
use crate::error::{invalid, Error, Result};
use crate::reuse::{build_model, fit_plain, LinearModel, ReuseTarget};
use crate::streams::{EpochBuffer, Label, LabeledInstance};

/// Number of leading items the provisional model is fitted on (capped by `p`).
pub const BOOTSTRAP_ITEMS: usize = 10;
/// Weights are rescaled to sum 1 once the largest drops below this.
const UNDERFLOW_GUARD: f64 = 1e-200;

/// Per-item loss with values in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Loss {
    /// `1[sign(score) != y]`, with `sign(0) = +1`.
    #[default]
    ZeroOne,
    /// `min(1, (clip(score, -1, 1) - y)^2 / 4)`.
    SquaredClipped,
}

impl Loss {
    pub fn eval(self, score: f64, label: Label) -> f64 {
        match self {
            Loss::ZeroOne => {
                if Label::from_score(score) == label {
                    0.0
                } else {
                    1.0
                }
            }
            Loss::SquaredClipped => {
                let d = score.clamp(-1.0, 1.0) - label.value();
                (d * d / 4.0).min(1.0)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Loss::ZeroOne => "zero_one",
            Loss::SquaredClipped => "squared_clipped",
        }
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero_one" => Ok(Loss::ZeroOne),
            "squared_clipped" => Ok(Loss::SquaredClipped),
            other => Err(invalid("loss", format!("unknown loss `{other}`"))),
        }
    }
}

/// How the exponential-weights step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// Use `CondorConfig::eta` throughout.
    #[default]
    Fixed,
    /// Per epoch, `theory_step_size(|pool| + 1, p)`.
    Theory,
}

impl FromStr for StepRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(StepRule::Fixed),
            "theory" => Ok(StepRule::Theory),
            other => Err(invalid("step_rule", format!("unknown step rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetectorMode {
    #[default]
    Adwin,
    /// Model updates only every `p` items.
    Off,
}

impl FromStr for DetectorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adwin" => Ok(DetectorMode::Adwin),
            "off" | "none" => Ok(DetectorMode::Off),
            other => Err(invalid("detector", format!("unknown detector `{other}`"))),
        }
    }
}

/// Ablations of the full learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Full,
    /// New models are plain LS-SVM fits (`w_p = 0`).
    NoReuse,
    /// Pool of one: each epoch's plain fit replaces the previous model.
    WindowOnly,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoReuse => "no-reuse",
            Variant::WindowOnly => "window-only",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "no-reuse" | "no_reuse" => Ok(Variant::NoReuse),
            "window-only" | "window_only" => Ok(Variant::WindowOnly),
            other => Err(invalid("variant", format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondorConfig {
    /// Trade-off of the reuse fit; the ridge of the bordered system is `m / mu`.
    pub mu: f64,
    pub eta: f64,
    pub step_rule: StepRule,
    /// Maximum epoch length `p`.
    pub epoch_cap_p: usize,
    /// Pool capacity `K`.
    pub capacity_k: usize,
    pub detector: DetectorMode,
    pub detector_delta: f64,
    pub detector_max_buckets: usize,
    pub loss: Loss,
    pub variant: Variant,
}

impl Default for CondorConfig {
    fn default() -> Self {
        Self {
            mu: 200.0,
            eta: 0.75,
            step_rule: StepRule::Fixed,
            epoch_cap_p: 50,
            capacity_k: 25,
            detector: DetectorMode::Adwin,
            detector_delta: DEFAULT_DELTA,
            detector_max_buckets: DEFAULT_MAX_BUCKETS,
            loss: Loss::ZeroOne,
            variant: Variant::Full,
        }
    }
}

impl CondorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(invalid("mu", format!("{} must be positive", self.mu)));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(invalid("eta", format!("{} must be non-negative", self.eta)));
        }
        if self.epoch_cap_p == 0 {
            return Err(invalid("p", "must be positive"));
        }
        if self.capacity_k == 0 {
            return Err(invalid("k", "must be positive"));
        }
        if !(self.detector_delta > 0.0 && self.detector_delta < 1.0) {
            return Err(invalid("delta", format!("{} not in (0, 1)", self.detector_delta)));
        }
        if self.detector_max_buckets < 2 {
            return Err(invalid("max_buckets", "must be at least 2"));
        }
        Ok(())
    }

    fn effective_capacity(&self) -> usize {
        match self.variant {
            Variant::WindowOnly => 1,
            _ => self.capacity_k,
        }
    }

    fn reuses(&self) -> bool {
        self.variant == Variant::Full
    }
}

/// Ordered model pool, oldest first, with one positive weight per model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPool {
    models: Vec<LinearModel>,
    ids: Vec<usize>,
    weights: Vec<f64>,
    capacity: usize,
}

impl ModelPool {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(invalid("capacity", "must be at least 1"));
        }
        Ok(Self {
            models: Vec::new(),
            ids: Vec::new(),
            weights: Vec::new(),
            capacity,
        })
    }

    /// Pool from explicit models and weights; ids are `1..=n`.
    pub fn from_parts(models: Vec<LinearModel>, weights: Vec<f64>, capacity: usize) -> Result<Self> {
        if models.len() != weights.len() {
            return Err(invalid("weights", "one weight per model required"));
        }
        if models.len() > capacity {
            return Err(invalid("capacity", "more models than capacity"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid("weights", "must be positive and finite"));
        }
        let ids = (1..=models.len()).collect();
        let mut pool = Self::new(capacity)?;
        pool.models = models;
        pool.ids = ids;
        pool.weights = weights;
        Ok(pool)
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn models(&self) -> &[LinearModel] {
        &self.models
    }

    /// Stable model ids, aligned with [`ModelPool::models`].
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    /// Raw (unnormalized) weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn normalized_weights(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }

    pub fn clear(&mut self) {
        self.models.clear();
        self.ids.clear();
        self.weights.clear();
    }

    /// Appends a model, evicts the oldest beyond capacity, and resets all
    /// weights to `1/|pool|`.
    pub fn insert(&mut self, model: LinearModel, id: usize) {
        self.models.push(model);
        self.ids.push(id);
        while self.models.len() > self.capacity {
            self.models.remove(0);
            self.ids.remove(0);
        }
        let w = 1.0 / self.models.len() as f64;
        self.weights = vec![w; self.models.len()];
    }

    /// The reuse target: pool models with weights normalized to sum 1.
    pub fn reuse_target(&self) -> ReuseTarget {
        ReuseTarget {
            models: self.models.clone(),
            betas: self.normalized_weights(),
        }
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.models.iter().map(|m| m.score(x)).collect()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        match self.models.first() {
            Some(m) if m.dim() != x.len() => Err(Error::DimensionMismatch {
                expected: m.dim(),
                got: x.len(),
            }),
            _ => Ok(()),
        }
    }
}

/// Weighted vote `sum_k beta_k h_k(x) / sum_k beta_k` and its sign.
pub fn pool_predict(pool: &ModelPool, x: &[f64]) -> Result<(f64, Label)> {
    if pool.is_empty() {
        return Err(Error::Empty("model pool"));
    }
    pool.check_dim(x)?;
    let score = weighted_score(&pool.weights, &pool.scores(x));
    Ok((score, Label::from_score(score)))
}

fn weighted_score(weights: &[f64], scores: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    weights.iter().zip(scores).map(|(w, s)| w * s).sum::<f64>() / total
}

/// Multiplies each weight by `exp(-eta * loss_k)` and returns the per-model losses.
pub fn weight_update(pool: &mut ModelPool, x: &[f64], y: Label, eta: f64, loss: Loss) -> Result<Vec<f64>> {
    if pool.is_empty() {
        return Err(Error::Empty("model pool"));
    }
    pool.check_dim(x)?;
    let losses: Vec<f64> = pool.scores(x).into_iter().map(|s| loss.eval(s, y)).collect();
    apply_losses(pool, &losses, eta);
    Ok(losses)
}

fn apply_losses(pool: &mut ModelPool, losses: &[f64], eta: f64) {
    for (w, l) in pool.weights.iter_mut().zip(losses) {
        *w *= (-eta * l).exp();
    }
    let max = pool.weights.iter().copied().fold(0.0, f64::max);
    if max < UNDERFLOW_GUARD {
        let total: f64 = pool.weights.iter().sum();
        pool.weights.iter_mut().for_each(|w| *w /= total);
    }
}

/// Fits a model on `epoch`, reusing the pool (normalized weights as betas),
/// and inserts it under `id`.
pub fn model_update(pool: &mut ModelPool, epoch: &EpochBuffer, config: &CondorConfig, id: usize) -> Result<()> {
    if epoch.is_empty() {
        return Err(Error::Empty("epoch buffer"));
    }
    let model = if config.reuses() && !pool.is_empty() {
        build_model(epoch, &pool.reuse_target(), config.mu)?
    } else {
        fit_plain(epoch, config.mu)?
    };
    pool.insert(model, id);
    Ok(())
}

/// `sqrt(8 ln(k - 1) / m)`, the exponential-weights step size for `k - 1`
/// experts over `m` rounds.
pub fn theory_step_size(k: usize, m: usize) -> Result<f64> {
    if k < 2 {
        return Err(invalid("k", format!("{k} < 2")));
    }
    if m == 0 {
        return Err(invalid("m", "must be positive"));
    }
    Ok((8.0 * ((k - 1) as f64).ln() / m as f64).sqrt())
}

/// `ln(1 + sqrt(2 ln(k - 1) / best_loss))`, tuned to the loss of the best
/// expert. Diverges for `best_loss = 0`; callers fall back to
/// [`theory_step_size`].
pub fn improved_step_size(k: usize, best_loss: f64) -> Result<f64> {
    if k < 3 {
        return Err(invalid("k", format!("{k} < 3")));
    }
    if !(best_loss > 0.0 && best_loss.is_finite()) {
        return Err(invalid("best_loss", format!("{best_loss} must be positive")));
    }
    Ok((1.0 + (2.0 * ((k - 1) as f64).ln() / best_loss).sqrt()).ln())
}

/// Everything observed at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based time index.
    pub t: usize,
    /// 1-based epoch the item belongs to.
    pub epoch: usize,
    pub prediction_score: f64,
    pub predicted_label: Label,
    pub true_label: Label,
    /// Loss of the ensemble score under the configured loss.
    pub loss: f64,
    /// One entry per pool model at time `t`.
    pub per_model_losses: Vec<f64>,
    /// Pool ids at time `t`, aligned with the losses and weights.
    pub model_ids: Vec<usize>,
    /// Normalized weights after this item's weight update.
    pub weights: Vec<f64>,
    pub drift_fired: bool,
    pub model_updated: bool,
    pub pool_size_after: usize,
}

/// Loss accounting for one completed (or trailing) epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSummary {
    pub index: usize,
    pub start_t: usize,
    pub end_t: usize,
    pub eta: f64,
    pub model_ids: Vec<usize>,
    pub initial_weights: Vec<f64>,
    /// `L_{S_k}`.
    pub ensemble_loss: f64,
    /// `L^{(j)}_{S_k}`, aligned with `model_ids`.
    pub model_losses: Vec<f64>,
    /// Whether the epoch ended on a detector firing.
    pub ended_by_drift: bool,
}

impl EpochSummary {
    pub fn len(&self) -> usize {
        self.end_t + 1 - self.start_t
    }

    pub fn is_empty(&self) -> bool {
        self.end_t < self.start_t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<StepRecord>,
    pub epochs: Vec<EpochSummary>,
    pub final_pool: ModelPool,
    pub config: CondorConfig,
}

/// Streaming learner state.
#[derive(Debug, Clone)]
pub struct Condor {
    config: CondorConfig,
    pool: ModelPool,
    detector: Option<Adwin>,
    buffer: EpochBuffer,
    bootstrapping: bool,
    t: usize,
    eta: f64,
    next_id: usize,
    epoch: Option<EpochSummary>,
    finished: Vec<EpochSummary>,
}

impl Condor {
    /// Starts a learner whose provisional model is fitted on `bootstrap`.
    pub fn new(config: CondorConfig, bootstrap: &[LabeledInstance]) -> Result<Self> {
        config.validate()?;
        if bootstrap.is_empty() {
            return Err(Error::Empty("bootstrap items"));
        }
        let initial = fit_plain(&EpochBuffer::from_instances(0, bootstrap.to_vec()), config.mu)?;
        let mut pool = ModelPool::new(config.effective_capacity())?;
        pool.insert(initial, 0);
        let detector = match config.detector {
            DetectorMode::Adwin => Some(Adwin::with_max_buckets(
                config.detector_delta,
                config.detector_max_buckets,
            )?),
            DetectorMode::Off => None,
        };
        let mut condor = Self {
            pool,
            detector,
            buffer: EpochBuffer::new(1),
            bootstrapping: true,
            t: 0,
            eta: config.eta,
            next_id: 1,
            epoch: None,
            finished: Vec::new(),
            config,
        };
        condor.eta = condor.epoch_eta()?;
        Ok(condor)
    }

    pub fn config(&self) -> &CondorConfig {
        &self.config
    }

    pub fn pool(&self) -> &ModelPool {
        &self.pool
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn current_eta(&self) -> f64 {
        self.eta
    }

    pub fn epochs(&self) -> &[EpochSummary] {
        &self.finished
    }

    fn epoch_eta(&self) -> Result<f64> {
        match self.config.step_rule {
            StepRule::Fixed => Ok(self.config.eta),
            StepRule::Theory => theory_step_size(self.pool.len() + 1, self.config.epoch_cap_p),
        }
    }

    /// Processes one item: predict, reveal, weight update, detector, model update.
    pub fn step(&mut self, item: &LabeledInstance) -> Result<StepRecord> {
        self.t += 1;
        let t = self.t;
        let config = &self.config;

        let scores = self.pool.scores(&item.features);
        self.pool.check_dim(&item.features)?;
        let score = weighted_score(&self.pool.weights, &scores);
        let predicted = Label::from_score(score);
        let loss = config.loss.eval(score, item.label);
        let losses: Vec<f64> = scores.iter().map(|&s| config.loss.eval(s, item.label)).collect();
        apply_losses(&mut self.pool, &losses, self.eta);

        let epoch = self.epoch.get_or_insert_with(|| EpochSummary {
            index: self.buffer.epoch_index,
            start_t: t,
            end_t: t,
            eta: self.eta,
            model_ids: self.pool.ids.clone(),
            initial_weights: vec![1.0 / self.pool.len() as f64; self.pool.len()],
            ensemble_loss: 0.0,
            model_losses: vec![0.0; self.pool.len()],
            ended_by_drift: false,
        });
        epoch.end_t = t;
        epoch.ensemble_loss += loss;
        for (acc, l) in epoch.model_losses.iter_mut().zip(&losses) {
            *acc += l;
        }

        let record_ids = self.pool.ids.clone();
        let record_weights = self.pool.normalized_weights();
        let epoch_index = self.buffer.epoch_index;
        self.buffer.push(item.clone());

        let zero_one = if predicted == item.label { 0.0 } else { 1.0 };
        let drift_fired = match self.detector.as_mut() {
            Some(d) => d.insert(zero_one)?.detected,
            None => false,
        };

        let model_updated = drift_fired || t.is_multiple_of(self.config.epoch_cap_p);
        if model_updated {
            self.update_model(drift_fired)?;
        }

        Ok(StepRecord {
            t,
            epoch: epoch_index,
            prediction_score: score,
            predicted_label: predicted,
            true_label: item.label,
            loss,
            per_model_losses: losses,
            model_ids: record_ids,
            weights: record_weights,
            drift_fired,
            model_updated,
            pool_size_after: self.pool.len(),
        })
    }

    fn update_model(&mut self, drift_fired: bool) -> Result<()> {
        if self.bootstrapping {
            self.pool.clear();
            self.bootstrapping = false;
        }
        let id = self.next_id;
        model_update(&mut self.pool, &self.buffer, &self.config, id)?;
        self.next_id += 1;

        if let Some(mut done) = self.epoch.take() {
            done.ended_by_drift = drift_fired;
            self.finished.push(done);
        }
        self.buffer = EpochBuffer::new(self.buffer.epoch_index + 1);
        if let Some(d) = self.detector.as_mut() {
            d.reset();
        }
        self.eta = self.epoch_eta()?;
        Ok(())
    }

    /// Closes the trailing partial epoch and returns the run trace.
    pub fn finish(mut self, records: Vec<StepRecord>) -> RunTrace {
        if let Some(open) = self.epoch.take() {
            self.finished.push(open);
        }
        RunTrace {
            records,
            epochs: self.finished,
            final_pool: self.pool,
            config: self.config,
        }
    }
}

/// Runs the learner over a whole stream. The provisional model is fitted
/// on the first `min(p, 10)` items, which are then predicted like any other.
pub fn run_stream(stream: &[LabeledInstance], config: &CondorConfig) -> Result<RunTrace> {
    if stream.is_empty() {
        return Err(Error::Empty("stream"));
    }
    let n_boot = BOOTSTRAP_ITEMS.min(config.epoch_cap_p).min(stream.len());
    let mut condor = Condor::new(config.clone(), &stream[..n_boot])?;
    let records = stream
        .iter()
        .map(|item| condor.step(item))
        .collect::<Result<Vec<_>>>()?;
    Ok(condor.finish(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{Preset, SyntheticStream};

    fn constant_model(score: f64) -> LinearModel {
        LinearModel::new(vec![0.0], score)
    }

    #[test]
    fn pool_predict_weighted_mean() {
        let pool = ModelPool::from_parts(vec![constant_model(0.7)], vec![0.3], 5).unwrap();
        assert_eq!(pool_predict(&pool, &[1.0]).unwrap(), (0.7, Label::Positive));

        let pool = ModelPool::from_parts(vec![constant_model(1.0), constant_model(-1.0)], vec![3.0, 1.0], 5).unwrap();
        let (score, label) = pool_predict(&pool, &[0.0]).unwrap();
        assert_eq!(score, 0.5);
        assert_eq!(label, Label::Positive);

        let scaled = ModelPool::from_parts(vec![constant_model(1.0), constant_model(-1.0)], vec![30.0, 10.0], 5).unwrap();
        assert_eq!(pool_predict(&scaled, &[0.0]).unwrap(), (score, label));

        let tie = ModelPool::from_parts(vec![constant_model(1.0), constant_model(-1.0)], vec![1.0, 1.0], 5).unwrap();
        assert_eq!(pool_predict(&tie, &[0.0]).unwrap().1, Label::Positive);

        assert!(matches!(pool_predict(&ModelPool::new(3).unwrap(), &[0.0]), Err(Error::Empty(_))));
    }

    #[test]
    fn weight_update_cases() {
        let models = vec![constant_model(1.0), constant_model(-1.0)];
        let mut pool = ModelPool::from_parts(models.clone(), vec![0.5, 0.5], 5).unwrap();
        let losses = weight_update(&mut pool, &[0.0], Label::Positive, std::f64::consts::LN_2, Loss::ZeroOne).unwrap();
        assert_eq!(losses, [0.0, 1.0]);
        assert_eq!(pool.weights()[0], 0.5);
        assert!((pool.weights()[1] - 0.25).abs() < 1e-16);

        let mut pool = ModelPool::from_parts(models.clone(), vec![0.5, 0.5], 5).unwrap();
        weight_update(&mut pool, &[0.0], Label::Negative, 0.0, Loss::ZeroOne).unwrap();
        assert_eq!(pool.weights(), [0.5, 0.5]);

        let both_right = vec![constant_model(2.0), constant_model(0.1)];
        let mut pool = ModelPool::from_parts(both_right, vec![0.2, 0.8], 5).unwrap();
        weight_update(&mut pool, &[0.0], Label::Positive, 0.75, Loss::ZeroOne).unwrap();
        assert_eq!(pool.weights(), [0.2, 0.8]);
    }

    #[test]
    fn losses_are_bounded() {
        for &s in &[-5.0, -1.0, -0.3, 0.0, 0.4, 1.0, 7.0] {
            for y in [Label::Positive, Label::Negative] {
                for loss in [Loss::ZeroOne, Loss::SquaredClipped] {
                    let l = loss.eval(s, y);
                    assert!((0.0..=1.0).contains(&l));
                }
            }
        }
        assert_eq!(Loss::SquaredClipped.eval(0.0, Label::Positive), 0.25);
        assert_eq!(Loss::SquaredClipped.eval(3.0, Label::Positive), 0.0);
        assert_eq!(Loss::SquaredClipped.eval(-3.0, Label::Positive), 1.0);
    }

    fn small_epoch(n: usize) -> EpochBuffer {
        let items = (0..n)
            .map(|i| {
                let x = i as f64 / n as f64;
                LabeledInstance::new(vec![x], Label::from_score(x - 0.5))
            })
            .collect();
        EpochBuffer::from_instances(1, items)
    }

    #[test]
    fn model_update_first_fit_and_reinit() {
        let config = CondorConfig::default();
        let mut pool = ModelPool::new(25).unwrap();
        let e = small_epoch(20);
        model_update(&mut pool, &e, &config, 1).unwrap();
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.weights(), [1.0]);
        assert_eq!(pool.models()[0], fit_plain(&e, config.mu).unwrap());

        let mut pool = ModelPool::from_parts(vec![constant_model(0.1); 3], vec![0.9, 0.05, 0.05], 25).unwrap();
        model_update(&mut pool, &e, &config, 4).unwrap();
        assert_eq!(pool.weights(), [0.25; 4]);
    }

    #[test]
    fn eviction_removes_oldest() {
        let config = CondorConfig::default();
        let models: Vec<_> = (0..25).map(|i| constant_model(i as f64)).collect();
        let mut pool = ModelPool::from_parts(models, vec![1.0; 25], 25).unwrap();
        let oldest = pool.models()[0].clone();
        model_update(&mut pool, &small_epoch(10), &config, 26).unwrap();
        assert_eq!(pool.len(), 25);
        assert!(!pool.models().contains(&oldest));
        assert_eq!(pool.ids()[0], 2);
        assert_eq!(*pool.ids().last().unwrap(), 26);
        assert!(pool.weights().iter().all(|&w| w == 1.0 / 25.0));
        assert!(model_update(&mut pool, &EpochBuffer::new(2), &config, 27).is_err());
    }

    #[test]
    fn step_sizes() {
        assert!((theory_step_size(26, 50).unwrap() - 0.718).abs() < 1e-3);
        assert_eq!(theory_step_size(2, 10).unwrap(), 0.0);
        assert!((theory_step_size(3, 8).unwrap() - 2f64.ln().sqrt()).abs() < 1e-15);
        assert!((theory_step_size(3, 8).unwrap() - 0.832_554_611_157_697_7).abs() < 1e-12);
        assert!(theory_step_size(1, 10).is_err());

        let ln2 = 2f64.ln();
        assert!((improved_step_size(3, 2.0 * ln2).unwrap() - ln2).abs() < 1e-15);
        let direct = (1.0 + (2.0 * 4f64.ln() / 100.0).sqrt()).ln();
        assert_eq!(improved_step_size(5, 100.0).unwrap(), direct);
        assert!((direct - 0.154_017_175_685_868).abs() < 1e-12);
        assert!(improved_step_size(5, 0.0).is_err());
        assert!(improved_step_size(2, 1.0).is_err());
        let grid: Vec<f64> = (1..50).map(|i| improved_step_size(10, i as f64).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn single_item_stream() {
        let stream = SyntheticStream::new(Preset::Sea200A.spec(1)).unwrap();
        let item = stream.instance(0).unwrap();
        let trace = run_stream(std::slice::from_ref(&item), &CondorConfig::default()).unwrap();
        assert_eq!(trace.records.len(), 1);
        let initial = fit_plain(&EpochBuffer::from_instances(0, vec![item.clone()]), 200.0).unwrap();
        assert_eq!(trace.records[0].prediction_score, initial.score(&item.features));
        assert_eq!(trace.epochs.len(), 1);
        assert!(run_stream(&[], &CondorConfig::default()).is_err());
    }

    #[test]
    fn updates_only_on_drift_or_period() {
        let spec = Preset::Sea200A.spec(3);
        let stream: Vec<_> = SyntheticStream::new(spec).unwrap().iter().take(3000).collect();
        let config = CondorConfig::default();
        let trace = run_stream(&stream, &config).unwrap();
        for r in &trace.records {
            assert_eq!(r.model_updated, r.drift_fired || r.t % config.epoch_cap_p == 0, "t={}", r.t);
            assert!(r.pool_size_after <= config.capacity_k);
            assert_eq!(r.per_model_losses.len(), r.weights.len());
        }
        let total: usize = trace.epochs.iter().map(EpochSummary::len).sum();
        assert_eq!(total, stream.len());
        assert_eq!(trace.final_pool.len(), config.capacity_k);
    }

    #[test]
    fn window_only_keeps_one_model() {
        let stream: Vec<_> = SyntheticStream::new(Preset::Sea200G.spec(2)).unwrap().iter().take(600).collect();
        let config = CondorConfig {
            variant: Variant::WindowOnly,
            ..CondorConfig::default()
        };
        let trace = run_stream(&stream, &config).unwrap();
        assert!(trace.records.iter().all(|r| r.pool_size_after == 1));
    }

    #[test]
    fn config_validation() {
        assert!(CondorConfig::default().validate().is_ok());
        for bad in [
            CondorConfig { mu: 0.0, ..Default::default() },
            CondorConfig { eta: -1.0, ..Default::default() },
            CondorConfig { epoch_cap_p: 0, ..Default::default() },
            CondorConfig { capacity_k: 0, ..Default::default() },
            CondorConfig { detector_delta: 1.5, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
