//! Acceptance criteria, one line per criterion. Exits non-zero if any fails.

mod common;

use common::{observation_one_error, oracle_for, random_case, uniform};
use condor_core::reuse::{assemble_system, build_model, solve_system, ReuseTarget};
use condor_core::{
    local_regret, prequential_accuracy, regret_summary, run_stream, theory_step_size, weight_concentration_report,
    Adwin, CondorConfig, DetectorMode, Family, Loss, Preset, RegretLedger, RunTrace, StepRule, StreamSpec,
    SyntheticStream, Variant,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn run(preset_or_spec: StreamSpec, config: &CondorConfig) -> RunTrace {
    let items = SyntheticStream::new(preset_or_spec).unwrap().to_vec();
    run_stream(&items, config).unwrap()
}

fn accuracy(trace: &RunTrace) -> f64 {
    prequential_accuracy(&trace.records).unwrap()
}

fn recur_config() -> CondorConfig {
    CondorConfig {
        epoch_cap_p: 100,
        detector: DetectorMode::Off,
        ..CondorConfig::default()
    }
}

fn c1_sea_accuracy(traces: &mut Vec<RunTrace>) -> Outcome {
    let config = CondorConfig::default();
    let accs: Vec<f64> = SEEDS
        .map(|s| {
            let t = run(Preset::Sea200G.spec(s), &config);
            let a = accuracy(&t);
            traces.push(t);
            a
        })
        .collect();
    let mean = 100.0 * accs.iter().sum::<f64>() / accs.len() as f64;
    Outcome {
        id: "C1 SEA200G accuracy",
        pass: mean >= 84.5,
        detail: format!("mean {mean:.2}% over {} trials (need >= 84.5%)", accs.len()),
    }
}

fn c2_easy_streams(traces: &mut Vec<RunTrace>) -> Outcome {
    let config = CondorConfig::default();
    let sta: Vec<f64> = SEEDS
        .map(|s| {
            let t = run(Preset::Sta500G.spec(s), &config);
            let a = accuracy(&t);
            traces.push(t);
            a
        })
        .collect();
    let sta_mean = 100.0 * sta.iter().sum::<f64>() / sta.len() as f64;
    let flat = StreamSpec::new(Family::Sea, 24_000, vec![10.0], 24_000).with_seed(1);
    let t = run(flat, &config);
    let flat_acc = 100.0 * accuracy(&t);
    traces.push(t);
    Outcome {
        id: "C2 easy streams",
        pass: sta_mean >= 85.0 && flat_acc >= 95.0,
        detail: format!("STA500G mean {sta_mean:.2}% (need >= 85%), drift-free SEA {flat_acc:.2}% (need >= 95%)"),
    }
}

fn c3_weight_concentration(traces: &mut Vec<RunTrace>) -> Outcome {
    let config = recur_config();
    let mut sums = Vec::new();
    for s in SEEDS {
        let t = run(Preset::SeaRecur.spec(s), &config);
        let tables = weight_concentration_report(&t, &[config.epoch_cap_p]);
        let sum = tables
            .iter()
            .find(|tab| tab.epoch == 8)
            .map(|tab| [1, 2, 7].iter().filter_map(|&id| tab.weight_of(id)).sum::<f64>())
            .unwrap_or(0.0);
        sums.push(sum);
        traces.push(t);
    }
    let min = sums.iter().copied().fold(f64::INFINITY, f64::min);
    Outcome {
        id: "C3 weight concentration",
        pass: min >= 0.9,
        detail: format!("epoch 8 weight on models 1,2,7: min {min:.6} over {} seeds (need >= 0.9)", sums.len()),
    }
}

fn c4_observation_one(traces: &[RunTrace]) -> Outcome {
    let worst = traces.iter().map(observation_one_error).fold(0.0, f64::max);
    Outcome {
        id: "C4 closed-form weights",
        pass: worst <= 1e-12,
        detail: format!("max relative error {worst:.3e} over {} runs (need <= 1e-12)", traces.len()),
    }
}

fn c5_solver_oracle() -> Outcome {
    let mut worst_pred: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for seed in 0..50 {
        let case = random_case(seed);
        let target = ReuseTarget::new(case.previous.clone(), case.betas.clone()).unwrap();
        let model = build_model(&case.epoch, &target, case.mu).unwrap();
        let system = assemble_system(&case.epoch, &target, case.mu).unwrap();
        worst_res = worst_res.max(solve_system(&system).unwrap().residual_inf);
        let (w, c) = oracle_for(&case);
        for x in &case.probes {
            let oracle: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + c;
            worst_pred = worst_pred.max((model.score(x) - oracle).abs());
        }
    }
    Outcome {
        id: "C5 solver oracle",
        pass: worst_pred <= 1e-4 && worst_res <= 1e-8,
        detail: format!("max |pred - oracle| {worst_pred:.3e} (need <= 1e-4), max residual {worst_res:.3e} (need <= 1e-8)"),
    }
}

fn c6_regret(traces: &mut Vec<RunTrace>) -> Outcome {
    let config = CondorConfig {
        step_rule: StepRule::Theory,
        loss: Loss::SquaredClipped,
        detector: DetectorMode::Off,
        ..CondorConfig::default()
    };
    let mut local_checked = 0;
    let mut local_failed = 0;
    let mut global_failed = 0;
    let mut runs = 0;
    let mut worst_ratio = f64::NEG_INFINITY;
    for preset in [Preset::Sea500G, Preset::Sin500G] {
        for s in 1..=3 {
            let t = run(preset.spec(s), &config);
            let ledger = RegretLedger::from_epochs(&t.epochs).unwrap();
            for r in local_regret(&ledger) {
                local_checked += 1;
                if !r.holds {
                    local_failed += 1;
                }
            }
            let g = regret_summary(&ledger).unwrap();
            worst_ratio = worst_ratio.max(g.dynamic_regret / g.bound);
            if !g.holds {
                global_failed += 1;
            }
            runs += 1;
            traces.push(t);
        }
    }
    Outcome {
        id: "C6 regret bounds",
        pass: local_failed == 0 && global_failed == 0,
        detail: format!(
            "local bound violated on {local_failed}/{local_checked} epochs, global on {global_failed}/{runs} runs (max regret/bound {worst_ratio:.3})"
        ),
    }
}

fn bernoulli(rng: &mut ChaCha8Rng, q: f64) -> f64 {
    if uniform(rng, 0.0, 1.0) < q {
        1.0
    } else {
        0.0
    }
}

fn c7_detector() -> Outcome {
    let mut max_delay = 0;
    let mut missed = 0;
    let mut early = 0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut d = Adwin::new(0.002).unwrap();
        for _ in 0..1000 {
            if d.insert(bernoulli(&mut rng, 0.2)).unwrap().detected {
                early += 1;
            }
        }
        match (1..=150).find(|_| d.insert(bernoulli(&mut rng, 0.8)).unwrap().detected) {
            Some(delay) => max_delay = max_delay.max(delay),
            None => missed += 1,
        }
    }
    let mut worst_false = 0;
    for seed in 100..110 {
        for q in [0.05, 0.2, 0.5] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut d = Adwin::new(0.002).unwrap();
            let fired = (0..10_000).filter(|_| d.insert(bernoulli(&mut rng, q)).unwrap().detected).count();
            worst_false = worst_false.max(fired);
        }
    }
    Outcome {
        id: "C7 detector",
        pass: missed == 0 && early == 0 && worst_false <= 5,
        detail: format!(
            "20 shift streams: max delay {max_delay}, missed {missed}, pre-change {early}; iid 1e4: max {worst_false} false detections (need <= 5)"
        ),
    }
}

fn c8_reuse_ablation(traces: &mut Vec<RunTrace>) -> Outcome {
    let full = recur_config();
    let ablated = CondorConfig {
        variant: Variant::NoReuse,
        ..recur_config()
    };
    let mut wins = 0;
    let mut ties = 0;
    let mut diffs = Vec::new();
    for s in SEEDS {
        let a = run(Preset::SeaRecur.spec(s), &full);
        let b = run(Preset::SeaRecur.spec(s), &ablated);
        let d = accuracy(&a) - accuracy(&b);
        if d > 0.0 {
            wins += 1;
        } else if d == 0.0 {
            ties += 1;
        }
        diffs.push(d);
        traces.push(a);
        traces.push(b);
    }
    let n = diffs.len();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    Outcome {
        id: "C8 reuse ablation",
        pass: wins == n,
        detail: format!("full beats no-reuse on {wins}/{n} seeds ({ties} ties, mean diff {:+.4} points)", 100.0 * mean),
    }
}

fn c9_step_size() -> Outcome {
    let eta = theory_step_size(26, 50).unwrap();
    Outcome {
        id: "C9 step size",
        pass: (eta - 0.718).abs() <= 0.001,
        detail: format!("theory_step_size(26, 50) = {eta:.6} (need 0.718 +- 0.001)"),
    }
}

fn main() {
    let mut traces = Vec::new();
    let mut outcomes = vec![
        c1_sea_accuracy(&mut traces),
        c2_easy_streams(&mut traces),
        c3_weight_concentration(&mut traces),
    ];
    let c5 = c5_solver_oracle();
    let c6 = c6_regret(&mut traces);
    let c7 = c7_detector();
    let c8 = c8_reuse_ablation(&mut traces);
    outcomes.push(c4_observation_one(&traces));
    outcomes.extend([c5, c6, c7, c8, c9_step_size()]);

    println!("\nacceptance criteria");
    for o in &outcomes {
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} passed, {failed} failed\n", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
