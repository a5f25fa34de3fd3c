//! Model reuse by biased regularization.
//!
//! A new linear model is fitted on one epoch `S = {(x_i, y_i)}` while being
//! pulled towards the weighted combination of previous models
//! `h_p(x) = sum_j beta_j h_j(x)`. The fit is the LS-SVM problem
//!
//! ```text
//! min_{v, b}  (1/m) sum_i 1/2 (h_p(x_i) + <v, x_i> + b - y_i)^2  +  (1/mu) 1/2 ||v||^2
//! ```
//!
//! whose optimum is `v = sum_i alpha_i x_i` with `(alpha, b)` solving the
//! bordered system
//!
//! ```text
//! [ K + (m/mu) I   1 ] [alpha]   [ y - sum_j beta_j yhat_j ]
//! [ 1^T            0 ] [  b  ] = [           0             ]
//! ```
//!
//! with `K_ij = <x_i, x_j>`. The delivered model is the reuse combination
//! plus the solved residual: `w = sum_j beta_j w_j + sum_i alpha_i x_i`,
//! `offset = sum_j beta_j b_j + b`. The ridge scales with `m`, so
//! duplicating every item of an epoch leaves the model unchanged, and for a
//! single item the ridge is exactly `1/mu`.

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, Cholesky};
use crate::streams::EpochBuffer;

/// Condition estimate beyond which the system is reported as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Affine predictor `x -> <weights, x> + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub offset: f64,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, offset: f64) -> Self {
        Self { weights, offset }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            offset: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Raw score without a dimension check.
    #[inline]
    pub fn score(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        dot(&self.weights, x) + self.offset
    }

    /// Raw score; its sign is the predicted class.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(self.score(x))
    }

    pub fn is_finite(&self) -> bool {
        self.offset.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

/// Previous models and their (non-negative) reuse weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReuseTarget {
    pub models: Vec<LinearModel>,
    pub betas: Vec<f64>,
}

impl ReuseTarget {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(models: Vec<LinearModel>, betas: Vec<f64>) -> Result<Self> {
        if models.len() != betas.len() {
            return Err(invalid(
                "betas",
                format!("{} betas for {} models", betas.len(), models.len()),
            ));
        }
        if betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(invalid("betas", "must be finite and non-negative"));
        }
        Ok(Self { models, betas })
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    /// `sum_j beta_j h_j(x)`.
    pub fn combined_score(&self, x: &[f64]) -> f64 {
        self.models
            .iter()
            .zip(&self.betas)
            .map(|(m, b)| b * m.score(x))
            .sum()
    }

    /// The reuse combination as a single linear model.
    pub fn combined_model(&self, dim: usize) -> LinearModel {
        let mut out = LinearModel::zeros(dim);
        for (model, &beta) in self.models.iter().zip(&self.betas) {
            for (w, v) in out.weights.iter_mut().zip(&model.weights) {
                *w += beta * v;
            }
            out.offset += beta * model.offset;
        }
        out
    }
}

/// The bordered `(m+1) x (m+1)` system for one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSystem {
    /// Row-major, `size() * size()` entries.
    pub matrix: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ridge: f64,
    pub epoch_index: usize,
}

impl GramSystem {
    /// Side length `m + 1`.
    pub fn size(&self) -> usize {
        self.rhs.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.size() + j]
    }

    /// `||A z - rhs||_inf` for a candidate `z = (alpha, b)`.
    pub fn residual_inf(&self, alphas: &[f64], offset: f64) -> f64 {
        let n = self.size();
        (0..n)
            .map(|i| {
                let row = &self.matrix[i * n..(i + 1) * n];
                let az = dot(&row[..n - 1], alphas) + row[n - 1] * offset;
                (az - self.rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Solution `(alpha, b)` of a [`GramSystem`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSolution {
    pub alphas: Vec<f64>,
    pub offset: f64,
    pub residual_inf: f64,
}

fn check_dims(epoch: &EpochBuffer, target: &ReuseTarget) -> Result<usize> {
    let dim = epoch.dim().ok_or(Error::Empty("epoch buffer"))?;
    for inst in &epoch.instances {
        if inst.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: inst.dim(),
            });
        }
    }
    for model in &target.models {
        if model.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: model.dim(),
            });
        }
    }
    if target.models.len() != target.betas.len() {
        return Err(invalid("betas", "one beta per model required"));
    }
    Ok(dim)
}

pub fn assemble_system(epoch: &EpochBuffer, target: &ReuseTarget, mu: f64) -> Result<GramSystem> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(invalid("mu", format!("{mu} is not a positive finite number")));
    }
    check_dims(epoch, target)?;
    let m = epoch.len();
    let n = m + 1;
    let ridge = m as f64 / mu;
    let xs: Vec<&[f64]> = epoch.instances.iter().map(|i| i.features.as_slice()).collect();

    let mut matrix = vec![0.0; n * n];
    for i in 0..m {
        for j in 0..=i {
            let k = dot(xs[i], xs[j]);
            matrix[i * n + j] = k;
            matrix[j * n + i] = k;
        }
        matrix[i * n + i] += ridge;
        matrix[i * n + m] = 1.0;
        matrix[m * n + i] = 1.0;
    }

    let mut rhs: Vec<f64> = epoch
        .instances
        .iter()
        .map(|inst| inst.label.value() - target.combined_score(&inst.features))
        .collect();
    rhs.push(0.0);

    Ok(GramSystem {
        matrix,
        rhs,
        ridge,
        epoch_index: epoch.epoch_index,
    })
}

/// Solves the bordered system by block elimination: with `A = K + ridge I`
/// (positive definite), `b = 1^T A^-1 r / 1^T A^-1 1` and
/// `alpha = A^-1 (r - b 1)`, followed by one step of iterative refinement
/// on the full system.
pub fn solve_system(system: &GramSystem) -> Result<SystemSolution> {
    let n = system.size();
    if n < 2 {
        return Err(Error::Empty("bordered system"));
    }
    let m = n - 1;
    let singular = |condition: f64| Error::Singular {
        epoch: system.epoch_index,
        condition,
    };
    let chol = Cholesky::factor(&system.matrix, m, n).ok_or_else(|| singular(f64::INFINITY))?;
    let condition = chol.condition_estimate();
    if !(condition <= CONDITION_LIMIT) {
        return Err(singular(condition));
    }
    let ones = vec![1.0; m];
    let a_inv_ones = chol.solve(&ones);
    let schur: f64 = a_inv_ones.iter().sum();
    if !(schur > 0.0) {
        return Err(singular(f64::INFINITY));
    }

    let block_solve = |r: &[f64], c: f64| -> (Vec<f64>, f64) {
        // [A 1; 1^T 0] [a; b] = [r; c]
        let u = chol.solve(r);
        let b = (u.iter().sum::<f64>() - c) / schur;
        let a = u.iter().zip(&a_inv_ones).map(|(ui, vi)| ui - b * vi).collect();
        (a, b)
    };

    let (mut alphas, mut offset) = block_solve(&system.rhs[..m], system.rhs[m]);

    // one refinement step
    let residual: Vec<f64> = (0..n)
        .map(|i| {
            let row = &system.matrix[i * n..(i + 1) * n];
            system.rhs[i] - (dot(&row[..m], &alphas) + row[m] * offset)
        })
        .collect();
    let (da, db) = block_solve(&residual[..m], residual[m]);
    for (a, d) in alphas.iter_mut().zip(&da) {
        *a += d;
    }
    offset += db;

    if alphas.iter().any(|a| !a.is_finite()) || !offset.is_finite() {
        return Err(singular(condition));
    }
    let residual_inf = system.residual_inf(&alphas, offset);
    Ok(SystemSolution {
        alphas,
        offset,
        residual_inf,
    })
}

/// Fits the new model for `epoch` on top of the reuse combination `target`.
pub fn build_model(epoch: &EpochBuffer, target: &ReuseTarget, mu: f64) -> Result<LinearModel> {
    let system = assemble_system(epoch, target, mu)?;
    let solution = solve_system(&system)?;
    let dim = epoch.dim().expect("assembled epoch is non-empty");
    let mut model = target.combined_model(dim);
    for (inst, alpha) in epoch.instances.iter().zip(&solution.alphas) {
        for (w, x) in model.weights.iter_mut().zip(&inst.features) {
            *w += alpha * x;
        }
    }
    model.offset += solution.offset;
    Ok(model)
}

/// Square-loss fit of the epoch with no reuse.
pub fn fit_plain(epoch: &EpochBuffer, mu: f64) -> Result<LinearModel> {
    build_model(epoch, &ReuseTarget::empty(), mu)
}

pub fn predict(model: &LinearModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}
