//! Concept-drift learning by model reuse.
//!
//! A stream is split into epochs by an ADWIN drift detector (or a maximum
//! epoch length). At the end of each epoch a least-squares SVM is fitted on
//! the epoch, regularized towards the weighted combination of the models
//! kept so far. Predictions come from an exponentially weighted vote over
//! the pool.
//!
//! ```
//! use condor_core::{run_stream, CondorConfig, Preset, SyntheticStream};
//!
//! let stream = SyntheticStream::new(Preset::Sea200G.spec(1)).unwrap();
//! let items: Vec<_> = stream.iter().take(1000).collect();
//! let trace = run_stream(&items, &CondorConfig::default()).unwrap();
//! assert_eq!(trace.records.len(), 1000);
//! ```

pub mod condor;
pub mod detector;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod reuse;
pub mod streams;

pub use condor::{
    improved_step_size, model_update, pool_predict, run_stream, theory_step_size, weight_update, Condor,
    CondorConfig, DetectorMode, EpochSummary, Loss, ModelPool, RunTrace, StepRecord, StepRule, Variant,
};
pub use detector::{Adwin, DriftSignal};
pub use error::{Error, Result};
pub use eval::{
    holdout_accuracy, local_regret, mean_std, prequential_accuracy, regret_summary, robustness_scores,
    weight_concentration_report, AccuracyReport, LocalRegret, RegretLedger, RegretSummary, WeightTable,
};
pub use reuse::{build_model, fit_plain, LinearModel, ReuseTarget};
pub use streams::{
    read_csv_stream, write_csv_stream, EpochBuffer, Family, Label, LabeledInstance, Preset, StreamSpec,
    SyntheticStream,
};
