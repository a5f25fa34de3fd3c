//! `summary.csv`: one row per (dataset, config), aggregated over seeds.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use condor_core::{mean_std, regret_summary, RegretLedger, RegretSummary};

use crate::format::fmt_g;
use crate::matrix::{CellResult, CellStats};

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub config: String,
    pub mean_acc: Option<f64>,
    pub std_acc: Option<f64>,
    /// Mean over seeds.
    pub dynamic_regret: Option<f64>,
    pub regret_bound: Option<f64>,
    /// Whether the bound held on every seed.
    pub bound_holds: Option<bool>,
    pub status: String,
}

pub const SUMMARY_HEADER: [&str; 8] = [
    "dataset",
    "config",
    "mean_acc",
    "std_acc",
    "dynamic_regret",
    "regret_bound",
    "bound_holds",
    "status",
];

/// Groups cells by (dataset, config) in order of first appearance.
pub fn summarize(cells: &[CellResult]) -> Vec<SummaryRow> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for c in cells {
        let key = (c.dataset.as_str(), c.config.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(dataset, config)| {
            let group: Vec<&CellResult> = cells
                .iter()
                .filter(|c| c.dataset == dataset && c.config == config)
                .collect();
            let ok: Vec<CellStats> = group.iter().filter_map(|c| c.outcome.as_ref().ok().copied()).collect();
            let errors: Vec<String> = group
                .iter()
                .filter_map(|c| c.outcome.as_ref().err().map(|e| format!("seed {}: {e}", c.seed)))
                .collect();
            let status = match (errors.first(), ok.is_empty()) {
                (None, _) => "ok".to_string(),
                (Some(e), true) => format!("failed: {e}"),
                (Some(e), false) => format!("partial {}/{} failed: {e}", errors.len(), group.len()),
            };
            aggregate(dataset, config, &ok, status)
        })
        .collect()
}

fn aggregate(dataset: &str, config: &str, ok: &[CellStats], status: String) -> SummaryRow {
    let accs: Vec<f64> = ok.iter().map(|s| s.accuracy).collect();
    let (mean_acc, std_acc) = match mean_std(&accs) {
        Ok((m, s)) => (Some(m), Some(s)),
        Err(_) => (None, None),
    };
    let regrets: Vec<RegretSummary> = ok.iter().filter_map(|s| s.regret).collect();
    let complete = !regrets.is_empty() && regrets.len() == ok.len();
    let mean = |f: fn(&RegretSummary) -> f64| regrets.iter().map(f).sum::<f64>() / regrets.len() as f64;
    SummaryRow {
        dataset: dataset.to_string(),
        config: config.to_string(),
        mean_acc,
        std_acc,
        dynamic_regret: complete.then(|| mean(|r| r.dynamic_regret)),
        regret_bound: complete.then(|| mean(|r| r.bound)),
        bound_holds: complete.then(|| regrets.iter().all(|r| r.holds)),
        status,
    }
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(SUMMARY_HEADER)?;
    let opt = |v: Option<f64>| v.map(fmt_g).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.config.clone(),
            opt(r.mean_acc),
            opt(r.std_acc),
            opt(r.dynamic_regret),
            opt(r.regret_bound),
            r.bound_holds.map(|b| b.to_string()).unwrap_or_default(),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

struct StepRow {
    t: usize,
    correct: bool,
    loss: f64,
}

fn read_steps(path: &Path) -> Result<Vec<StepRow>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), i + 2))?;
        let field = |k: usize| rec.get(k).with_context(|| format!("{}: row {} is short", path.display(), i + 2));
        rows.push(StepRow {
            t: field(0)?.parse()?,
            correct: field(1)? == field(2)?,
            loss: field(4)?.parse()?,
        });
    }
    Ok(rows)
}

/// Rebuilds the epoch ledger from a weights log and the step losses.
fn ledger_from_logs(weights_path: &Path, steps: &[StepRow]) -> Result<RegretLedger> {
    #[derive(Default)]
    struct Epoch {
        start: usize,
        end: usize,
        last_iteration: usize,
        losses: Vec<f64>,
    }
    let mut epochs: BTreeMap<usize, Epoch> = BTreeMap::new();
    let mut reader =
        csv::Reader::from_path(weights_path).with_context(|| format!("cannot read {}", weights_path.display()))?;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", weights_path.display(), i + 2))?;
        let num = |k: usize| -> Result<f64> { Ok(rec.get(k).context("short row")?.parse()?) };
        let (t, epoch, iteration) = (num(0)? as usize, num(1)? as usize, num(2)? as usize);
        let cum_loss = num(5)?;
        let e = epochs.entry(epoch).or_default();
        e.start = t + 1 - iteration;
        if iteration > e.last_iteration {
            e.last_iteration = iteration;
            e.end = t;
            e.losses.clear();
        }
        if iteration == e.last_iteration {
            e.losses.push(cum_loss);
        }
    }
    if epochs.is_empty() {
        bail!("{} has no rows", weights_path.display());
    }
    let mut per_epoch = Vec::new();
    let mut per_model = Vec::new();
    let mut lengths = Vec::new();
    for e in epochs.values() {
        let loss: f64 = steps.iter().filter(|s| (e.start..=e.end).contains(&s.t)).map(|s| s.loss).sum();
        per_epoch.push(loss);
        per_model.push(e.losses.clone());
        lengths.push(e.end + 1 - e.start);
    }
    Ok(RegretLedger::new(per_epoch, per_model, lengths)?)
}

/// Recomputes the summary from the step and weight logs in `dir` and
/// rewrites `summary.csv`.
pub fn report(dir: &Path) -> Result<Vec<SummaryRow>> {
    let mut ids = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("cannot read {}", dir.display()))? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if let Some(id) = name.strip_prefix("steps_").and_then(|n| n.strip_suffix(".csv")) {
            ids.push(id.to_string());
        }
    }
    if ids.is_empty() {
        bail!("no steps_*.csv files in {}", dir.display());
    }
    ids.sort();

    let mut cells = Vec::new();
    for id in &ids {
        let parts: Vec<&str> = id.split('_').collect();
        let [dataset, config, seed] = parts[..] else {
            bail!("malformed run id `{id}`");
        };
        let outcome = (|| -> Result<CellStats> {
            let steps = read_steps(&dir.join(format!("steps_{id}.csv")))?;
            if steps.is_empty() {
                bail!("empty step log");
            }
            let accuracy = steps.iter().filter(|s| s.correct).count() as f64 / steps.len() as f64;
            let regret = ledger_from_logs(&dir.join(format!("weights_{id}.csv")), &steps)
                .ok()
                .and_then(|l| regret_summary(&l).ok());
            Ok(CellStats { accuracy, regret })
        })()
        .map_err(|e| format!("{e:#}"));
        cells.push(CellResult {
            dataset: dataset.to_string(),
            config: config.to_string(),
            seed: seed.parse().with_context(|| format!("bad seed in `{id}`"))?,
            outcome,
        });
    }
    let rows = summarize(&cells);
    write_summary(&dir.join("summary.csv"), &rows)?;
    Ok(rows)
}
