//! Labeled data streams: synthetic drift generators and CSV ingestion.
//!
//! Every synthetic stream is a pure function of its [`StreamSpec`]. Item `t`
//! is drawn from its own ChaCha8 stream (key = `seed` expanded through
//! `seed_from_u64`, stream id = `t`), so any index can be generated without
//! replaying the prefix and two implementations that agree on ChaCha8 agree
//! on every emitted value. Uniform reals are built from the top 53 bits of a
//! `u64` draw.

mod csv_io;
mod synthetic;

pub use csv_io::{read_csv_stream, write_csv_stream};
pub use synthetic::{
    generate, generate_cir, generate_sea, generate_sin, generate_sta, sample_batch, stagger_features, Concept,
    StaggerColor, StaggerShape, StaggerSize, SyntheticStream,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Binary class label. Internally the alphabet is {-1, +1} so that the sign
/// of a linear score is the prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// Label of a raw score; a score of exactly zero maps to `Positive`.
    pub fn from_score(score: f64) -> Label {
        if score >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// One stream item.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledInstance {
    pub features: Vec<f64>,
    pub label: Label,
}

impl LabeledInstance {
    pub fn new(features: Vec<f64>, label: Label) -> Self {
        Self { features, label }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

/// The data items of one epoch, in arrival order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpochBuffer {
    pub instances: Vec<LabeledInstance>,
    /// 1-based epoch index.
    pub epoch_index: usize,
}

impl EpochBuffer {
    pub fn new(epoch_index: usize) -> Self {
        Self {
            instances: Vec::new(),
            epoch_index,
        }
    }

    pub fn from_instances(epoch_index: usize, instances: Vec<LabeledInstance>) -> Self {
        Self {
            instances,
            epoch_index,
        }
    }

    pub fn push(&mut self, instance: LabeledInstance) {
        self.instances.push(instance);
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Feature dimension, or `None` for an empty buffer.
    pub fn dim(&self) -> Option<usize> {
        self.instances.first().map(LabeledInstance::dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Sea,
    Cir,
    Sin,
    Sta,
    Csv,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Sea => "sea",
            Family::Cir => "cir",
            Family::Sin => "sin",
            Family::Sta => "sta",
            Family::Csv => "csv",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sea" => Ok(Family::Sea),
            "cir" => Ok(Family::Cir),
            "sin" => Ok(Family::Sin),
            "sta" => Ok(Family::Sta),
            "csv" => Ok(Family::Csv),
            other => Err(invalid("family", format!("unknown stream family `{other}`"))),
        }
    }
}

/// Which decision boundary the CIR family uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CirBoundary {
    /// `x1 + x2^2 <= r`, as published for CIR500G.
    #[default]
    Printed,
    /// `x1^2 + x2^2 <= r`.
    Circle,
}

impl FromStr for CirBoundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(CirBoundary::Printed),
            "circle" => Ok(CirBoundary::Circle),
            other => Err(invalid(
                "cir_boundary",
                format!("expected `printed` or `circle`, got `{other}`"),
            )),
        }
    }
}

/// SEA threshold schedule `A`.
pub const SEA_SCHEDULE_A: [f64; 8] = [10.0, 7.0, 3.0, 7.0, 10.0, 13.0, 16.0, 13.0];
/// SEA threshold schedule `G`.
pub const SEA_SCHEDULE_G: [f64; 8] = [10.0, 8.0, 6.0, 8.0, 10.0, 12.0, 14.0, 12.0];
/// CIR radius schedule.
pub const CIR_SCHEDULE: [f64; 8] = [3.0, 2.5, 2.0, 2.5, 3.0, 3.5, 4.0, 3.5];
/// Threshold schedule of the recurring-SEA weight-concentration stream.
pub const SEA_RECUR_SCHEDULE: [f64; 8] = [10.0, 10.0, 20.0, 20.0, 20.0, 20.0, 10.0, 10.0];
/// Per-period phase increment of the SIN family.
pub const SIN_THETA_STEP: f64 = std::f64::consts::PI / 60.0;

/// Full description of a stream.
///
/// For synthetic families the concept active at item `t` (0-based) is
/// `schedule[(t / drift_period) % schedule.len()]`; a stream longer than one
/// pass over the schedule cycles through it again. For SIN the schedule
/// holds phase angles θ, for STA the rule number (1, 2 or 3).
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSpec {
    pub family: Family,
    pub drift_period: usize,
    pub schedule: Vec<f64>,
    pub total_length: usize,
    pub seed: u64,
    pub noise_rate: f64,
    pub cir_boundary: CirBoundary,
}

impl StreamSpec {
    pub fn new(family: Family, drift_period: usize, schedule: Vec<f64>, total_length: usize) -> Self {
        Self {
            family,
            drift_period,
            schedule,
            total_length,
            seed: 0,
            noise_rate: 0.0,
            cir_boundary: CirBoundary::Printed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_noise(mut self, noise_rate: f64) -> Self {
        self.noise_rate = noise_rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.family == Family::Csv {
            return Err(Error::NotSynthetic("csv"));
        }
        if self.schedule.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if self.drift_period == 0 {
            return Err(invalid("drift_period", "must be positive"));
        }
        if self.total_length == 0 {
            return Err(invalid("total_length", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(invalid("noise_rate", format!("{} not in [0, 1)", self.noise_rate)));
        }
        if self.schedule.iter().any(|v| !v.is_finite()) {
            return Err(invalid("schedule", "entries must be finite"));
        }
        if self.family == Family::Sta {
            if let Some(bad) = self.schedule.iter().find(|&&r| !matches!(r, 1.0 | 2.0 | 3.0)) {
                return Err(invalid("schedule", format!("STAGGER rule {bad} not in {{1, 2, 3}}")));
            }
        }
        Ok(())
    }

    /// Index into the schedule for 0-based item `t`.
    pub fn concept_index(&self, t: usize) -> usize {
        (t / self.drift_period) % self.schedule.len()
    }

    /// Feature dimension of the emitted instances.
    pub fn dim(&self) -> usize {
        match self.family {
            Family::Sea => 3,
            Family::Cir | Family::Sin => 2,
            Family::Sta => 9,
            Family::Csv => 0,
        }
    }
}

/// The built-in synthetic streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Sea200A,
    Sea200G,
    Sea500G,
    Cir500G,
    Sin500G,
    Sta500G,
    SeaRecur,
}

impl Preset {
    /// The six benchmark streams, in the order they appear in reports.
    pub const BENCHMARK: [Preset; 6] = [
        Preset::Sea200A,
        Preset::Sea200G,
        Preset::Sea500G,
        Preset::Cir500G,
        Preset::Sin500G,
        Preset::Sta500G,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Sea200A => "SEA200A",
            Preset::Sea200G => "SEA200G",
            Preset::Sea500G => "SEA500G",
            Preset::Cir500G => "CIR500G",
            Preset::Sin500G => "SIN500G",
            Preset::Sta500G => "STA500G",
            Preset::SeaRecur => "SEA-recur",
        }
    }

    pub fn from_name(name: &str) -> Option<Preset> {
        let lower = name.to_ascii_lowercase();
        [
            Preset::Sea200A,
            Preset::Sea200G,
            Preset::Sea500G,
            Preset::Cir500G,
            Preset::Sin500G,
            Preset::Sta500G,
            Preset::SeaRecur,
        ]
        .into_iter()
        .find(|p| p.name().to_ascii_lowercase() == lower || (lower == "sine500g" && *p == Preset::Sin500G))
    }

    pub fn spec(self, seed: u64) -> StreamSpec {
        let spec = match self {
            Preset::Sea200A => StreamSpec::new(Family::Sea, 200, SEA_SCHEDULE_A.to_vec(), 24_000),
            Preset::Sea200G => StreamSpec::new(Family::Sea, 200, SEA_SCHEDULE_G.to_vec(), 24_000),
            Preset::Sea500G => StreamSpec::new(Family::Sea, 500, SEA_SCHEDULE_G.to_vec(), 60_000),
            Preset::Cir500G => StreamSpec::new(Family::Cir, 500, CIR_SCHEDULE.to_vec(), 60_000),
            Preset::Sin500G => {
                let theta = (0..120).map(|k| k as f64 * SIN_THETA_STEP).collect();
                StreamSpec::new(Family::Sin, 500, theta, 60_000)
            }
            Preset::Sta500G => StreamSpec::new(Family::Sta, 500, vec![1.0, 2.0, 3.0], 60_000),
            Preset::SeaRecur => StreamSpec::new(Family::Sea, 100, SEA_RECUR_SCHEDULE.to_vec(), 800),
        };
        spec.with_seed(seed)
    }
}
