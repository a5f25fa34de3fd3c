#![allow(dead_code)]

use condor_core::reuse::LinearModel;
use condor_core::{EpochBuffer, Label, LabeledInstance, RunTrace};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
}

/// A random epoch with previous models and betas.
pub struct RandomCase {
    pub epoch: EpochBuffer,
    pub previous: Vec<LinearModel>,
    pub betas: Vec<f64>,
    pub mu: f64,
    pub probes: Vec<Vec<f64>>,
}

pub fn random_case(seed: u64) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 1 + (rng.next_u64() % 30) as usize;
    let d = 1 + (rng.next_u64() % 5) as usize;
    let n_prev = (rng.next_u64() % 4) as usize;
    let mu = uniform(&mut rng, 0.5, 50.0);
    let truth: Vec<f64> = (0..d).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
    let items = (0..m)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
            let s: f64 = x.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>() + uniform(&mut rng, -0.3, 0.3);
            LabeledInstance::new(x, Label::from_score(s))
        })
        .collect();
    let previous: Vec<LinearModel> = (0..n_prev)
        .map(|_| {
            let w = (0..d).map(|_| uniform(&mut rng, -2.0, 2.0)).collect();
            LinearModel::new(w, uniform(&mut rng, -1.0, 1.0))
        })
        .collect();
    let raw: Vec<f64> = (0..n_prev).map(|_| uniform(&mut rng, 0.05, 1.0)).collect();
    let total: f64 = raw.iter().sum();
    let betas = raw.iter().map(|b| b / total).collect();
    let probes = (0..100)
        .map(|_| (0..d).map(|_| uniform(&mut rng, -1.5, 1.5)).collect())
        .collect();
    RandomCase {
        epoch: EpochBuffer::from_instances(1, items),
        previous,
        betas,
        mu,
        probes,
    }
}

/// Minimizes `1/2 |w - w_p|^2 + mu/(2m) sum (w.x_i + c - y_i)^2` over `(w, c)`
/// by steepest descent with exact line search. Returns `(w, c)`.
pub fn gradient_descent_oracle(
    xs: &[Vec<f64>],
    ys: &[f64],
    previous: &[(Vec<f64>, f64)],
    mu: f64,
) -> (Vec<f64>, f64) {
    let d = xs[0].len();
    let m = xs.len() as f64;
    let scale = mu / m;
    let mut wp = vec![0.0; d];
    for (w, beta) in previous {
        for k in 0..d {
            wp[k] += beta * w[k];
        }
    }
    let mut w = wp.clone();
    let mut c = 0.0;
    for _ in 0..5_000_000 {
        let residuals: Vec<f64> = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + c - y)
            .collect();
        let mut gw: Vec<f64> = (0..d).map(|k| w[k] - wp[k]).collect();
        let mut gc = 0.0;
        for (x, r) in xs.iter().zip(&residuals) {
            for k in 0..d {
                gw[k] += scale * r * x[k];
            }
            gc += scale * r;
        }
        let gnorm2: f64 = gw.iter().map(|g| g * g).sum::<f64>() + gc * gc;
        if gnorm2 < 1e-26 {
            break;
        }
        // curvature along the gradient
        let mut curv: f64 = gw.iter().map(|g| g * g).sum();
        for x in xs {
            let dir = x.iter().zip(&gw).map(|(a, b)| a * b).sum::<f64>() + gc;
            curv += scale * dir * dir;
        }
        let step = gnorm2 / curv;
        for k in 0..d {
            w[k] -= step * gw[k];
        }
        c -= step * gc;
    }
    (w, c)
}

pub fn oracle_for(case: &RandomCase) -> (Vec<f64>, f64) {
    let xs: Vec<Vec<f64>> = case.epoch.instances.iter().map(|i| i.features.clone()).collect();
    let ys: Vec<f64> = case.epoch.instances.iter().map(|i| i.label.value()).collect();
    let prev: Vec<(Vec<f64>, f64)> = case
        .previous
        .iter()
        .zip(&case.betas)
        .map(|(m, b)| (m.weights.clone(), *b))
        .collect();
    gradient_descent_oracle(&xs, &ys, &prev, case.mu)
}

/// Largest relative error between recorded normalized weights and
/// `beta_1 exp(-eta * running loss)`, normalized, over all epochs of a run.
pub fn observation_one_error(trace: &RunTrace) -> f64 {
    let mut worst: f64 = 0.0;
    for epoch in &trace.epochs {
        let n = epoch.model_ids.len();
        let mut cum = vec![0.0; n];
        for r in &trace.records[epoch.start_t - 1..epoch.end_t] {
            for (c, l) in cum.iter_mut().zip(&r.per_model_losses) {
                *c += l;
            }
            // independent closed form in the log domain
            let logs: Vec<f64> = epoch
                .initial_weights
                .iter()
                .zip(&cum)
                .map(|(b, l)| b.ln() - epoch.eta * l)
                .collect();
            let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = logs.iter().map(|l| (l - top).exp()).sum();
            for (j, l) in logs.iter().enumerate() {
                let expected = (l - top).exp() / total;
                let got = r.weights[j];
                let rel = (got - expected).abs() / expected;
                worst = worst.max(rel);
            }
        }
    }
    worst
}
