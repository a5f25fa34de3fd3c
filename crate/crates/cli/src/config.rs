//! Run-manifest parsing.
//!
//! ```text
//! # top level
//! output_dir = results
//! trials = 10            # seeds 1..=trials unless `seeds` is given
//! seeds = 1, 2, 3
//! ablations = false      # add no-reuse and window-only runs per config
//! holdout_size = 500
//!
//! [dataset.sea]
//! preset = SEA200G       # or family/period/schedule/length, or csv
//! p = 200                # epoch cap for this dataset only
//!
//! [config.default]
//! mu = 200
//! eta = 0.75
//! ```

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use condor_core::streams::CirBoundary;
use condor_core::{CondorConfig, Family, Preset, StreamSpec};

pub const DEFAULT_TRIALS: u64 = 10;
pub const DEFAULT_HOLDOUT_SIZE: usize = 500;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}` in {section}")]
    UnknownKey { line: usize, key: String, section: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    Value { line: usize, key: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    /// The seed of the spec is replaced per run.
    Synthetic(StreamSpec),
    Csv { path: PathBuf, label_column: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    pub name: String,
    pub source: DatasetSource,
    /// Overrides the epoch cap of every config on this dataset.
    pub epoch_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigEntry {
    pub name: String,
    pub config: CondorConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub datasets: Vec<DatasetEntry>,
    pub configs: Vec<ConfigEntry>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub ablations: bool,
    pub holdout_size: usize,
}

impl RunManifest {
    /// The six benchmark streams, the default config and seeds `1..=10`.
    pub fn defaults(output_dir: impl Into<PathBuf>) -> Self {
        Self {
            datasets: Preset::BENCHMARK.iter().map(|&p| preset_entry(p)).collect(),
            configs: vec![ConfigEntry {
                name: "default".into(),
                config: CondorConfig::default(),
            }],
            seeds: (1..=DEFAULT_TRIALS).collect(),
            output_dir: output_dir.into(),
            ablations: false,
            holdout_size: DEFAULT_HOLDOUT_SIZE,
        }
    }

    /// Configs to run, with the ablations appended when enabled.
    pub fn expanded_configs(&self) -> Vec<ConfigEntry> {
        let mut out = self.configs.clone();
        if self.ablations {
            for entry in &self.configs {
                for variant in [condor_core::Variant::NoReuse, condor_core::Variant::WindowOnly] {
                    out.push(ConfigEntry {
                        name: format!("{}-{}", entry.name, variant.name()),
                        config: CondorConfig {
                            variant,
                            ..entry.config.clone()
                        },
                    });
                }
            }
        }
        out
    }
}

fn preset_entry(preset: Preset) -> DatasetEntry {
    DatasetEntry {
        name: preset.name().to_string(),
        source: DatasetSource::Synthetic(preset.spec(0)),
        epoch_cap: None,
    }
}

/// Replaces every character other than ASCII alphanumerics and `-` by `-`,
/// so run ids `<dataset>_<config>_<seed>` split unambiguously.
pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '-' })
        .collect()
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunManifest, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, path.parent().unwrap_or(Path::new(".")))
}

#[derive(Default)]
struct DatasetDraft {
    line: usize,
    preset: Option<Preset>,
    family: Option<Family>,
    period: Option<usize>,
    schedule: Option<Vec<f64>>,
    length: Option<usize>,
    noise: Option<f64>,
    cir_boundary: Option<CirBoundary>,
    csv: Option<PathBuf>,
    label_column: Option<String>,
    epoch_cap: Option<usize>,
}

enum Section {
    Top,
    Dataset(usize),
    Config(usize),
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: Display,
{
    raw.parse().map_err(|e: T::Err| ConfigError::Value {
        line,
        key: key.into(),
        message: e.to_string(),
    })
}

fn list<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: Display,
{
    raw.split(',').map(|v| value(line, key, v.trim())).collect()
}

fn range_error(line: usize, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        line,
        key: key.into(),
        message: message.into(),
    }
}

/// Parses manifest text; relative CSV paths resolve against `base_dir`.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<RunManifest, ConfigError> {
    let mut output_dir = PathBuf::from("results");
    let mut trials: Option<u64> = None;
    let mut seeds: Option<Vec<u64>> = None;
    let mut ablations = false;
    let mut holdout_size = DEFAULT_HOLDOUT_SIZE;
    let mut datasets: Vec<(String, DatasetDraft)> = Vec::new();
    let mut configs: Vec<(String, usize, CondorConfig)> = Vec::new();
    let mut section = Section::Top;

    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let header = header.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("unterminated section header `{content}`"),
            })?;
            let (kind, name) = header.split_once('.').ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("section `{header}` must be `dataset.NAME` or `config.NAME`"),
            })?;
            let name = name.trim();
            if name.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    message: "empty section name".into(),
                });
            }
            section = match kind.trim() {
                "dataset" => {
                    if datasets.iter().any(|(n, _)| n == name) {
                        return Err(ConfigError::Parse {
                            line,
                            message: format!("duplicate dataset `{name}`"),
                        });
                    }
                    datasets.push((name.to_string(), DatasetDraft { line, ..Default::default() }));
                    Section::Dataset(datasets.len() - 1)
                }
                "config" => {
                    if configs.iter().any(|(n, _, _)| n == name) {
                        return Err(ConfigError::Parse {
                            line,
                            message: format!("duplicate config `{name}`"),
                        });
                    }
                    configs.push((name.to_string(), line, CondorConfig::default()));
                    Section::Config(configs.len() - 1)
                }
                other => {
                    return Err(ConfigError::Parse {
                        line,
                        message: format!("unknown section kind `{other}`"),
                    })
                }
            };
            continue;
        }

        let (key, raw) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let key = key.trim();
        let raw = raw.trim();
        let unknown = |section: &str| ConfigError::UnknownKey {
            line,
            key: key.into(),
            section: section.into(),
        };

        match section {
            Section::Top => match key {
                "output_dir" => output_dir = PathBuf::from(raw),
                "trials" => {
                    let n: u64 = value(line, key, raw)?;
                    if n == 0 {
                        return Err(range_error(line, key, "must be at least 1"));
                    }
                    trials = Some(n);
                }
                "seeds" => {
                    let s: Vec<u64> = list(line, key, raw)?;
                    seeds = Some(s);
                }
                "ablations" => ablations = value(line, key, raw)?,
                "holdout_size" => {
                    holdout_size = value(line, key, raw)?;
                    if holdout_size == 0 {
                        return Err(range_error(line, key, "must be at least 1"));
                    }
                }
                _ => return Err(unknown("the top level")),
            },
            Section::Dataset(idx) => {
                let d = &mut datasets[idx].1;
                match key {
                    "preset" => {
                        d.preset = Some(
                            Preset::from_name(raw).ok_or_else(|| range_error(line, key, format!("unknown preset `{raw}`")))?,
                        )
                    }
                    "family" => d.family = Some(value(line, key, raw)?),
                    "period" => d.period = Some(value(line, key, raw)?),
                    "schedule" => d.schedule = Some(list(line, key, raw)?),
                    "length" => d.length = Some(value(line, key, raw)?),
                    "noise" => {
                        let v: f64 = value(line, key, raw)?;
                        if !(0.0..1.0).contains(&v) {
                            return Err(range_error(line, key, format!("{v} not in [0, 1)")));
                        }
                        d.noise = Some(v);
                    }
                    "cir_boundary" => d.cir_boundary = Some(value(line, key, raw)?),
                    "csv" => d.csv = Some(base_dir.join(raw)),
                    "label_column" => d.label_column = Some(raw.to_string()),
                    "p" => {
                        let p: usize = value(line, key, raw)?;
                        if p == 0 {
                            return Err(range_error(line, key, "must be at least 1"));
                        }
                        d.epoch_cap = Some(p);
                    }
                    _ => return Err(unknown(&format!("[dataset.{}]", datasets[idx].0))),
                }
            }
            Section::Config(idx) => {
                let c = &mut configs[idx].2;
                match key {
                    "mu" => c.mu = value(line, key, raw)?,
                    "eta" => c.eta = value(line, key, raw)?,
                    "step" => c.step_rule = value(line, key, raw)?,
                    "p" => c.epoch_cap_p = value(line, key, raw)?,
                    "k" | "K" => c.capacity_k = value(line, key, raw)?,
                    "detector" => c.detector = value(line, key, raw)?,
                    "delta" => c.detector_delta = value(line, key, raw)?,
                    "max_buckets" => c.detector_max_buckets = value(line, key, raw)?,
                    "loss" => c.loss = value(line, key, raw)?,
                    "variant" => c.variant = value(line, key, raw)?,
                    _ => return Err(unknown(&format!("[config.{}]", configs[idx].0))),
                }
                if let Err(e) = c.validate() {
                    return Err(range_error(line, key, e.to_string()));
                }
            }
        }
    }

    let seeds = match (seeds, trials) {
        (Some(s), Some(n)) if s.len() as u64 != n => {
            return Err(ConfigError::Invalid(format!("{} seeds listed but trials = {n}", s.len())))
        }
        (Some(s), _) => s,
        (None, n) => (1..=n.unwrap_or(DEFAULT_TRIALS)).collect(),
    };
    if seeds.is_empty() {
        return Err(ConfigError::Invalid("no seeds".into()));
    }

    let datasets = if datasets.is_empty() {
        Preset::BENCHMARK.iter().map(|&p| preset_entry(p)).collect()
    } else {
        datasets
            .into_iter()
            .map(|(name, draft)| finish_dataset(name, draft))
            .collect::<Result<_, _>>()?
    };
    let configs = if configs.is_empty() {
        vec![ConfigEntry {
            name: "default".into(),
            config: CondorConfig::default(),
        }]
    } else {
        configs
            .into_iter()
            .map(|(name, _, config)| ConfigEntry { name, config })
            .collect()
    };

    Ok(RunManifest {
        datasets,
        configs,
        seeds,
        output_dir,
        ablations,
        holdout_size,
    })
}

fn finish_dataset(name: String, d: DatasetDraft) -> Result<DatasetEntry, ConfigError> {
    let line = d.line;
    let bad = |message: String| ConfigError::Parse { line, message };
    let source = if let Some(path) = d.csv {
        if d.preset.is_some() || d.family.is_some() {
            return Err(bad(format!("dataset `{name}`: `csv` cannot be combined with `preset` or `family`")));
        }
        DatasetSource::Csv {
            path,
            label_column: d.label_column.unwrap_or_else(|| "label".into()),
        }
    } else {
        let mut spec = match (d.preset, d.family) {
            (Some(p), None) => p.spec(0),
            (None, Some(family)) => {
                let (period, schedule) = d
                    .period
                    .zip(d.schedule.clone())
                    .ok_or_else(|| bad(format!("dataset `{name}`: `family` needs `period` and `schedule`")))?;
                let length = d.length.unwrap_or(period * schedule.len());
                StreamSpec::new(family, period, schedule, length)
            }
            (Some(_), Some(_)) => return Err(bad(format!("dataset `{name}`: give `preset` or `family`, not both"))),
            (None, None) => return Err(bad(format!("dataset `{name}`: needs `preset`, `family` or `csv`"))),
        };
        if d.preset.is_some() {
            if let Some(period) = d.period {
                spec.drift_period = period;
            }
            if let Some(schedule) = d.schedule {
                spec.schedule = schedule;
            }
        }
        if let Some(length) = d.length {
            spec.total_length = length;
        }
        if let Some(noise) = d.noise {
            spec.noise_rate = noise;
        }
        if let Some(b) = d.cir_boundary {
            spec.cir_boundary = b;
        }
        spec.validate().map_err(|e| bad(format!("dataset `{name}`: {e}")))?;
        DatasetSource::Synthetic(spec)
    };
    Ok(DatasetEntry {
        name,
        source,
        epoch_cap: d.epoch_cap,
    })
}
