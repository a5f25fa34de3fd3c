use std::f64::consts::TAU;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CirBoundary, Family, Label, LabeledInstance, StreamSpec};
use crate::error::{Error, Result};

const SEA_BOX: f64 = 10.0;
const CIR_BOX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaggerSize {
    Small,
    Medium,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaggerColor {
    Red,
    Green,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaggerShape {
    Square,
    Circle,
    Triangle,
}

const SIZES: [StaggerSize; 3] = [StaggerSize::Small, StaggerSize::Medium, StaggerSize::Large];
const COLORS: [StaggerColor; 3] = [StaggerColor::Red, StaggerColor::Green, StaggerColor::Blue];
const SHAPES: [StaggerShape; 3] = [StaggerShape::Square, StaggerShape::Circle, StaggerShape::Triangle];

/// One-hot layout: `[small, medium, large, red, green, blue, square, circle, triangle]`.
pub fn stagger_features(size: StaggerSize, color: StaggerColor, shape: StaggerShape) -> Vec<f64> {
    let mut x = vec![0.0; 9];
    x[size as usize] = 1.0;
    x[3 + color as usize] = 1.0;
    x[6 + shape as usize] = 1.0;
    x
}

fn decode_stagger(x: &[f64]) -> (StaggerSize, StaggerColor, StaggerShape) {
    let hot = |offset: usize| (0..3).find(|&i| x[offset + i] > 0.5).unwrap_or(0);
    (SIZES[hot(0)], COLORS[hot(3)], SHAPES[hot(6)])
}

/// A single noiseless labeling function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Concept {
    /// `+1` iff `x1 + x2 <= b`.
    Sea { b: f64 },
    /// `+1` iff `x1 + x2^2 <= r` (printed) or `x1^2 + x2^2 <= r` (circle).
    Cir { r: f64, boundary: CirBoundary },
    /// `+1` iff `sin(x1 + theta) <= x2`.
    Sin { theta: f64 },
    /// STAGGER rule 1, 2 or 3 over one-hot encoded features.
    Sta { rule: u8 },
}

impl Concept {
    pub fn label(&self, x: &[f64]) -> Label {
        let positive = match *self {
            Concept::Sea { b } => x[0] + x[1] <= b,
            Concept::Cir { r, boundary } => match boundary {
                CirBoundary::Printed => x[0] + x[1] * x[1] <= r,
                CirBoundary::Circle => x[0] * x[0] + x[1] * x[1] <= r,
            },
            Concept::Sin { theta } => (x[0] + theta).sin() <= x[1],
            Concept::Sta { rule } => {
                let (size, color, shape) = decode_stagger(x);
                match rule {
                    1 => size == StaggerSize::Small && color == StaggerColor::Red,
                    2 => color == StaggerColor::Green || shape == StaggerShape::Circle,
                    _ => size == StaggerSize::Medium || size == StaggerSize::Large,
                }
            }
        };
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    fn sample_features(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            Concept::Sea { .. } => (0..3).map(|_| SEA_BOX * unit(rng)).collect(),
            Concept::Cir { .. } => (0..2).map(|_| CIR_BOX * unit(rng)).collect(),
            Concept::Sin { .. } => {
                let x1 = TAU * unit(rng);
                let x2 = 2.0 * unit(rng) - 1.0;
                vec![x1, x2]
            }
            Concept::Sta { .. } => {
                let size = SIZES[category(rng)];
                let color = COLORS[category(rng)];
                let shape = SHAPES[category(rng)];
                stagger_features(size, color, shape)
            }
        }
    }

    /// Draws features, labels them, and flips the label with probability `noise_rate`.
    pub fn sample(&self, rng: &mut ChaCha8Rng, noise_rate: f64) -> LabeledInstance {
        let features = self.sample_features(rng);
        let mut label = self.label(&features);
        if noise_rate > 0.0 && unit(rng) < noise_rate {
            label = label.flipped();
        }
        LabeledInstance { features, label }
    }
}

/// Uniform in `[0, 1)` from the top 53 bits of one draw.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn category(rng: &mut ChaCha8Rng) -> usize {
    ((unit(rng) * 3.0) as usize).min(2)
}

fn item_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}

/// Random-access view over a validated synthetic [`StreamSpec`].
#[derive(Debug, Clone)]
pub struct SyntheticStream {
    spec: StreamSpec,
}

impl SyntheticStream {
    pub fn new(spec: StreamSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &StreamSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.spec.total_length
    }

    pub fn is_empty(&self) -> bool {
        self.spec.total_length == 0
    }

    /// Concept for schedule position `index` (wraps around).
    pub fn concept(&self, index: usize) -> Concept {
        let value = self.spec.schedule[index % self.spec.schedule.len()];
        match self.spec.family {
            Family::Sea => Concept::Sea { b: value },
            Family::Cir => Concept::Cir {
                r: value,
                boundary: self.spec.cir_boundary,
            },
            Family::Sin => Concept::Sin { theta: value },
            Family::Sta => Concept::Sta { rule: value as u8 },
            Family::Csv => unreachable!("validated spec is synthetic"),
        }
    }

    /// Concept active at 0-based item `t`.
    pub fn concept_at(&self, t: usize) -> Concept {
        self.concept(self.spec.concept_index(t))
    }

    pub fn instance(&self, t: usize) -> Result<LabeledInstance> {
        if t >= self.spec.total_length {
            return Err(Error::IndexOutOfRange {
                index: t,
                len: self.spec.total_length,
            });
        }
        let mut rng = item_rng(self.spec.seed, t);
        Ok(self.concept_at(t).sample(&mut rng, self.spec.noise_rate))
    }

    pub fn iter(&self) -> impl Iterator<Item = LabeledInstance> + '_ {
        (0..self.spec.total_length).map(move |t| {
            let mut rng = item_rng(self.spec.seed, t);
            self.concept_at(t).sample(&mut rng, self.spec.noise_rate)
        })
    }

    pub fn to_vec(&self) -> Vec<LabeledInstance> {
        self.iter().collect()
    }
}

/// `n` fresh instances from one concept, drawn sequentially from a ChaCha8
/// stream seeded with `seed`. Used for holdout test batches.
pub fn sample_batch(concept: Concept, n: usize, seed: u64, noise_rate: f64) -> Vec<LabeledInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| concept.sample(&mut rng, noise_rate)).collect()
}

/// Item `t` of any synthetic family.
pub fn generate(spec: &StreamSpec, t: usize) -> Result<LabeledInstance> {
    SyntheticStream::new(spec.clone())?.instance(t)
}

fn generate_family(spec: &StreamSpec, t: usize, family: Family) -> Result<LabeledInstance> {
    if spec.family != family {
        return Err(crate::error::invalid(
            "family",
            format!("expected {}, got {}", family.name(), spec.family.name()),
        ));
    }
    generate(spec, t)
}

pub fn generate_sea(spec: &StreamSpec, t: usize) -> Result<LabeledInstance> {
    generate_family(spec, t, Family::Sea)
}

pub fn generate_cir(spec: &StreamSpec, t: usize) -> Result<LabeledInstance> {
    generate_family(spec, t, Family::Cir)
}

pub fn generate_sin(spec: &StreamSpec, t: usize) -> Result<LabeledInstance> {
    generate_family(spec, t, Family::Sin)
}

pub fn generate_sta(spec: &StreamSpec, t: usize) -> Result<LabeledInstance> {
    generate_family(spec, t, Family::Sta)
}
