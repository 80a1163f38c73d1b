//! Exponential decay fits by Levenberg-Marquardt.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::SequenceFunctionEstimate;

const MAX_ITER: usize = 200;
const STEP_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `c₀ λ^{m-1}`
    Single,
    /// `b₀ + a₀ λ^{m-1}`
    Offset,
}

impl FitModel {
    pub fn parse(s: &str) -> Result<FitModel> {
        match s {
            "single" => Ok(FitModel::Single),
            "offset" => Ok(FitModel::Offset),
            other => Err(Error::config(format!("unknown fit model '{other}'; valid: single, offset"))),
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            FitModel::Single => 2,
            FitModel::Offset => 3,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FitModel::Single => &["c0", "lambda"],
            FitModel::Offset => &["b0", "a0", "lambda"],
        }
    }

    /// Model value and gradient with respect to the parameters.
    fn eval(self, m: f64, p: &[f64]) -> (f64, Vec<f64>) {
        let k = m as i32 - 1;
        match self {
            FitModel::Single => {
                let (c, l) = (p[0], p[1]);
                let lk = l.powi(k);
                let dl = if k == 0 { 0.0 } else { c * k as f64 * l.powi(k - 1) };
                (c * lk, vec![lk, dl])
            }
            FitModel::Offset => {
                let (b, a, l) = (p[0], p[1], p[2]);
                let lk = l.powi(k);
                let dl = if k == 0 { 0.0 } else { a * k as f64 * l.powi(k - 1) };
                (b + a * lk, vec![1.0, lk, dl])
            }
        }
    }

    pub fn value(self, m: usize, p: &[f64]) -> f64 {
        self.eval(m as f64, p).0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    /// Per-m weights `1/stderr²`.
    InverseVariance,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub model: FitModel,
    pub params: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// λ outside [-1, 1] by more than its standard error.
    pub degenerate: bool,
}

impl DecayFit {
    pub fn lambda(&self) -> f64 {
        *self.params.last().unwrap()
    }

    pub fn lambda_sigma(&self) -> f64 {
        let n = self.params.len() - 1;
        self.cov[n][n].max(0.0).sqrt()
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.model.param_names().iter().position(|n| *n == name).map(|i| self.params[i])
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        let i = self.model.param_names().iter().position(|n| *n == name)?;
        Some(self.cov[i][i].max(0.0).sqrt())
    }
}

struct Problem<'a> {
    model: FitModel,
    ms: &'a [f64],
    ys: &'a [f64],
    sw: Vec<f64>,
}

impl Problem<'_> {
    fn residuals(&self, p: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.ms.len();
        let np = self.model.n_params();
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, np);
        for i in 0..n {
            let (f, g) = self.model.eval(self.ms[i], p);
            r[i] = self.sw[i] * (self.ys[i] - f);
            for k in 0..np {
                j[(i, k)] = self.sw[i] * g[k];
            }
        }
        (r, j)
    }

    fn cost(&self, p: &[f64]) -> f64 {
        let (r, _) = self.residuals(p);
        0.5 * r.norm_squared()
    }
}

struct Solution {
    params: Vec<f64>,
    cost: f64,
    iterations: usize,
    converged: bool,
}

/// Damped Gauss-Newton with multiplicative damping updates; the cost never
/// increases between accepted iterates.
fn levenberg_marquardt(prob: &Problem, init: &[f64]) -> Solution {
    let mut p = init.to_vec();
    let mut cost = prob.cost(&p);
    let mut mu = 1e-3;
    let np = p.len();
    for it in 0..MAX_ITER {
        if !cost.is_finite() {
            return Solution { params: p, cost, iterations: it, converged: false };
        }
        if cost < 1e-32 {
            return Solution { params: p, cost, iterations: it, converged: true };
        }
        let (r, j) = prob.residuals(&p);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        loop {
            let mut a = jtj.clone();
            for k in 0..np {
                a[(k, k)] += mu * jtj[(k, k)].max(1e-12);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&g),
                None => {
                    mu *= 10.0;
                    if mu > 1e20 {
                        return Solution { params: p, cost, iterations: it, converged: true };
                    }
                    continue;
                }
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let tc = prob.cost(&trial);
            let pnorm: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            let rel = step.norm() / (pnorm + STEP_TOL);
            if tc.is_finite() && tc <= cost {
                p = trial;
                cost = tc;
                mu = (mu / 3.0).max(1e-15);
                if rel < STEP_TOL {
                    return Solution { params: p, cost, iterations: it + 1, converged: true };
                }
                break;
            }
            mu *= 2.0;
            // the damped step can no longer move the parameters: stationary point
            if rel < STEP_TOL || mu > 1e20 {
                return Solution { params: p, cost, iterations: it + 1, converged: true };
            }
        }
    }
    Solution { params: p, cost, iterations: MAX_ITER, converged: false }
}

/// Starting point from a log-linear regression on |y|.
pub fn initial_guess(model: FitModel, ms: &[f64], ys: &[f64]) -> Vec<f64> {
    let (offset, ys_adj): (f64, Vec<f64>) = match model {
        FitModel::Single => (0.0, ys.to_vec()),
        FitModel::Offset => {
            let max_m = ms.iter().cloned().fold(f64::MIN, f64::max);
            let tail: Vec<f64> = ms.iter().zip(ys).filter(|(m, _)| **m == max_m).map(|(_, y)| *y).collect();
            let b = tail.iter().sum::<f64>() / tail.len() as f64;
            (b, ys.iter().map(|y| y - b).collect())
        }
    };
    let max_m = ms.iter().cloned().fold(f64::MIN, f64::max);
    let pts: Vec<(f64, f64)> = ms
        .iter()
        .zip(&ys_adj)
        .filter(|(m, y)| y.abs() > 1e-12 && (model == FitModel::Single || **m < max_m))
        .map(|(m, y)| (*m - 1.0, y.abs().ln()))
        .collect();
    let (amp, mut lam) = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let den = n * sxx - sx * sx;
        if den.abs() < 1e-300 {
            (ys_adj[0].abs(), 0.9)
        } else {
            let slope = (n * sxy - sx * sy) / den;
            let icpt = (sy - slope * sx) / n;
            (icpt.exp(), slope.exp().min(1.0))
        }
    } else {
        (ys_adj.first().map(|y| y.abs()).unwrap_or(1.0), 0.9)
    };
    // sign of λ from consecutive-length ratios
    let mut order: Vec<usize> = (0..ms.len()).collect();
    order.sort_by(|&a, &b| ms[a].total_cmp(&ms[b]));
    let mut neg = 0;
    let mut pos = 0;
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dm = ms[b] - ms[a];
        if dm == 1.0 && ys_adj[a].abs() > 1e-12 && ys_adj[b].abs() > 1e-12 {
            if ys_adj[b] / ys_adj[a] < 0.0 {
                neg += 1;
            } else {
                pos += 1;
            }
        }
    }
    if neg > pos {
        lam = -lam;
    }
    let first = order.first().map(|&i| ys_adj[i]).unwrap_or(1.0);
    let m0 = order.first().map(|&i| ms[i]).unwrap_or(1.0);
    let sign = if first < 0.0 { -1.0 } else { 1.0 };
    // amplitude referenced to m = 1
    let mut a = sign * amp;
    if m0 > 1.0 && lam.abs() > 1e-12 {
        a = first / lam.powi(m0 as i32 - 1);
    }
    match model {
        FitModel::Single => vec![a, lam],
        FitModel::Offset => vec![offset, a, lam],
    }
}

/// Fit `(m, y)` points; `weights` are per-point multipliers of squared residuals.
pub fn fit_points(model: FitModel, ms: &[usize], ys: &[f64], weights: Option<&[f64]>, init: Option<&[f64]>) -> Result<DecayFit> {
    if ms.len() != ys.len() {
        return Err(Error::config("fit needs one value per length"));
    }
    let mut distinct = ms.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let need = match model {
        FitModel::Single => 3,
        FitModel::Offset => 4,
    };
    if distinct.len() < need {
        return Err(Error::config(format!(
            "{model:?} decay fit needs at least {need} distinct lengths, got {}",
            distinct.len()
        )));
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::numerical("non-finite sequence-function value"));
    }
    let msf: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let sw: Vec<f64> = match weights {
        Some(w) => w.iter().map(|x| x.max(0.0).sqrt()).collect(),
        None => vec![1.0; ms.len()],
    };
    let prob = Problem { model, ms: &msf, ys, sw };

    let first = match init {
        Some(p) => p.to_vec(),
        None => initial_guess(model, &msf, ys),
    };
    let mut best = levenberg_marquardt(&prob, &first);
    let bad = |s: &Solution| !s.converged || !s.cost.is_finite() || s.params.last().map_or(true, |l| l.abs() > 1.0 + 1e-6);
    if bad(&best) {
        for lam in [0.5, 0.0, -0.5, 0.99] {
            let mut start = first.clone();
            *start.last_mut().unwrap() = lam;
            let s = levenberg_marquardt(&prob, &start);
            let better = s.cost.is_finite() && (!best.cost.is_finite() || s.cost < best.cost || (!best.converged && s.converged));
            if better {
                best = s;
            }
        }
    }
    if !best.converged || !best.cost.is_finite() {
        return Err(Error::numerical(format!(
            "decay fit did not converge in {MAX_ITER} iterations (cost {:.3e})",
            best.cost
        )));
    }

    let (r, j) = prob.residuals(&best.params);
    let np = model.n_params();
    let dof = ms.len().saturating_sub(np);
    let s2 = if dof > 0 { r.norm_squared() / dof as f64 } else { 0.0 };
    let jtj = j.transpose() * &j;
    let cov = match jtj.clone().try_inverse() {
        Some(inv) => inv * s2,
        None => match jtj.pseudo_inverse(1e-14) {
            Ok(pinv) => pinv * s2,
            Err(_) => DMatrix::from_element(np, np, f64::NAN),
        },
    };
    let cov = (cov.clone() + cov.transpose()) * 0.5;
    let lam = *best.params.last().unwrap();
    let sig = cov[(np - 1, np - 1)].max(0.0).sqrt();
    let degenerate = lam.abs() > 1.0 + sig;
    Ok(DecayFit {
        model,
        params: best.params,
        cov: (0..np).map(|i| (0..np).map(|k| cov[(i, k)]).collect()).collect(),
        residual_norm: r.norm(),
        iterations: best.iterations,
        degenerate,
    })
}

/// Fit a sequence-function estimate.
pub fn fit_decay(est: &SequenceFunctionEstimate, model: FitModel, weighting: Weighting) -> Result<DecayFit> {
    fit_decay_from(est, model, weighting, None)
}

/// As [`fit_decay`], starting from given parameters.
pub fn fit_decay_from(est: &SequenceFunctionEstimate, model: FitModel, weighting: Weighting, init: Option<&[f64]>) -> Result<DecayFit> {
    let ms: Vec<usize> = est.per_m.iter().map(|p| p.m).collect();
    let ys: Vec<f64> = est.per_m.iter().map(|p| p.k).collect();
    let w: Option<Vec<f64>> = match weighting {
        Weighting::Uniform => None,
        Weighting::InverseVariance => {
            let floor = est
                .per_m
                .iter()
                .map(|p| p.stderr)
                .filter(|s| *s > 0.0)
                .fold(f64::INFINITY, f64::min);
            let floor = if floor.is_finite() { floor } else { 1.0 };
            Some(est.per_m.iter().map(|p| 1.0 / p.stderr.max(floor).powi(2)).collect())
        }
    };
    fit_points(model, &ms, &ys, w.as_deref(), init)
}
