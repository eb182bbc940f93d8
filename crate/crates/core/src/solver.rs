//! Nonconvex least-squares recovery over the box `||g||_inf <= r`.
//!
//! The objective is `F(g) = sum_{t,i} (<A^t g, phi_i>^2 - y(t,i))^2`. Each
//! descent is projected gradient with Armijo backtracking along the
//! projection arc; several restarts from uniform random points are run and
//! the lowest final objective wins.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::measurements::{sample_inner_products, MeasurementRecord};
use crate::rng::{stream, TAG_RESTART};
use crate::spectral::OperatorSpec;

/// Success cutoff for noise-free records.
pub const NOISE_FREE_THRESHOLD: f64 = 1e-8;

/// How the first trial step of each iteration is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Always start backtracking from `initial_step`.
    Fixed,
    /// Start from the Barzilai-Borwein step `<s,s>/<s,d>` of the previous
    /// iteration, falling back to `initial_step`.
    BarzilaiBorwein,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub radius: f64,
    pub max_iters: usize,
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    pub max_backtracks: usize,
    /// Stop when the projected gradient step `||P(g - grad) - g||` is below this.
    pub gradient_tol: f64,
    pub step_rule: StepRule,
    pub objective_threshold: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            radius: 4.0,
            max_iters: 5000,
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 200,
            gradient_tol: 1e-10,
            step_rule: StepRule::BarzilaiBorwein,
            objective_threshold: NOISE_FREE_THRESHOLD,
            restarts: 1,
            seed: 0,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.radius) {
            return Err(Error::Config(format!(
                "radius must be positive, got {}",
                self.radius
            )));
        }
        if !pos(self.objective_threshold) {
            return Err(Error::Config(format!(
                "objective threshold must be positive, got {}",
                self.objective_threshold
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Config("at least one restart is required".into()));
        }
        if !pos(self.initial_step) {
            return Err(Error::Config("initial step must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Config(
                "backtracking factor must lie in (0, 1)".into(),
            ));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(Error::Config(
                "sufficient-decrease constant must lie in (0, 1)".into(),
            ));
        }
        if !(self.gradient_tol >= 0.0) {
            return Err(Error::Config(
                "gradient tolerance must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Why a descent stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Stationary,
    MaxIters,
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub g_rec: Vec<f64>,
    pub final_objective: f64,
    /// Objective at the start point and after every accepted step.
    pub objective_trace: Vec<f64>,
    /// Recovery error along the same iterates, when the truth is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub err_trace: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub err: Option<f64>,
    pub success: bool,
    pub restart_index: usize,
    pub iterations: usize,
    pub stop: StopReason,
    pub config: SolveConfig,
}

fn check_dims(g: &[f64], record: &MeasurementRecord, spec: &OperatorSpec) -> Result<()> {
    if g.len() != spec.n() || record.n != spec.n() {
        return Err(dim_mismatch(format!(
            "point has length {}, record n = {}, operator n = {}",
            g.len(),
            record.n,
            spec.n()
        )));
    }
    Ok(())
}

fn residuals(s: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    s.iter()
        .zip(y)
        .flat_map(|(sr, yr)| sr.iter().zip(yr).map(|(v, y)| (v * v - y) * (v * v - y)))
        .sum()
}

pub fn objective(g: &[f64], record: &MeasurementRecord, spec: &OperatorSpec) -> Result<f64> {
    check_dims(g, record, spec)?;
    let s = sample_inner_products(spec, g, &record.functionals, record.max_time)?;
    Ok(residuals(&s, &record.y))
}

/// Objective and gradient in one pass.
///
/// `grad = sum_t (A^T)^t w_t` with `w_t = sum_i 4 (s^2 - y) s phi_i`, summed
/// backwards in Horner form.
pub fn objective_and_gradient(
    g: &[f64],
    record: &MeasurementRecord,
    spec: &OperatorSpec,
) -> Result<(f64, Vec<f64>)> {
    check_dims(g, record, spec)?;
    let s = sample_inner_products(spec, g, &record.functionals, record.max_time)?;
    let n = spec.n();
    let mut acc = vec![0.0; n];
    for t in (0..record.times()).rev() {
        if t + 1 < record.times() {
            acc = spec.apply_transpose(&acc);
        }
        for (k, phi) in record.functionals.vectors.iter().enumerate() {
            let v = s[t][k];
            let c = 4.0 * (v * v - record.y[t][k]) * v;
            for (a, p) in acc.iter_mut().zip(phi) {
                *a += c * p;
            }
        }
    }
    Ok((residuals(&s, &record.y), acc))
}

pub fn gradient(g: &[f64], record: &MeasurementRecord, spec: &OperatorSpec) -> Result<Vec<f64>> {
    objective_and_gradient(g, record, spec).map(|(_, d)| d)
}

/// `min(||f - f_rec||, ||f + f_rec||) / ||f||`.
pub fn recovery_error(f: &[f64], f_rec: &[f64]) -> Result<f64> {
    if f.len() != f_rec.len() {
        return Err(dim_mismatch(format!(
            "truth has length {}, estimate {}",
            f.len(),
            f_rec.len()
        )));
    }
    let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArgument(
            "recovery error needs a nonzero truth".into(),
        ));
    }
    let minus = f
        .iter()
        .zip(f_rec)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();
    let plus = f
        .iter()
        .zip(f_rec)
        .map(|(a, b)| (a + b) * (a + b))
        .sum::<f64>();
    Ok(minus.min(plus).sqrt() / norm)
}

fn project(x: &mut [f64], r: f64) {
    for v in x {
        *v = v.clamp(-r, r);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One projected descent from `start`.
pub fn descend(
    start: &[f64],
    record: &MeasurementRecord,
    spec: &OperatorSpec,
    config: &SolveConfig,
    truth: Option<&[f64]>,
) -> Result<SolveResult> {
    config.validate()?;
    let r = config.radius;
    let mut g = start.to_vec();
    project(&mut g, r);
    let (mut fval, mut grad) = objective_and_gradient(&g, record, spec)?;
    let mut trace = vec![fval];
    let err_of = |x: &[f64]| truth.map(|f| recovery_error(f, x)).transpose();
    let mut err_trace = err_of(&g)?.map(|e| vec![e]);
    let mut step = config.initial_step;
    let mut stop = StopReason::MaxIters;
    let mut iterations = 0;
    let mut trial = vec![0.0; g.len()];

    while iterations < config.max_iters {
        for ((t, x), d) in trial.iter_mut().zip(&g).zip(&grad) {
            *t = x - d;
        }
        project(&mut trial, r);
        let pg = trial
            .iter()
            .zip(&g)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if pg < config.gradient_tol || fval == 0.0 {
            stop = StopReason::Stationary;
            break;
        }

        let mut alpha = step;
        let mut accepted = None;
        for _ in 0..=config.max_backtracks {
            for ((t, x), d) in trial.iter_mut().zip(&g).zip(&grad) {
                *t = x - alpha * d;
            }
            project(&mut trial, r);
            let moved: Vec<f64> = trial.iter().zip(&g).map(|(a, b)| a - b).collect();
            let decrease = dot(&grad, &moved);
            let f_new = objective(&trial, record, spec)?;
            if f_new <= fval + config.sufficient_decrease * decrease && decrease < 0.0 {
                accepted = Some((f_new, moved));
                break;
            }
            alpha *= config.shrink;
        }
        let Some((f_new, moved)) = accepted else {
            stop = StopReason::LineSearchFailed;
            break;
        };

        let (f_check, grad_new) = objective_and_gradient(&trial, record, spec)?;
        debug_assert_eq!(f_check, f_new);
        step = match config.step_rule {
            StepRule::Fixed => config.initial_step,
            StepRule::BarzilaiBorwein => {
                let dg: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
                let sy = dot(&moved, &dg);
                let ss = dot(&moved, &moved);
                if sy > 0.0 && (ss / sy).is_finite() {
                    ss / sy
                } else {
                    config.initial_step
                }
            }
        };
        g.copy_from_slice(&trial);
        fval = f_new;
        grad = grad_new;
        iterations += 1;
        trace.push(fval);
        if let (Some(et), Some(e)) = (err_trace.as_mut(), err_of(&g)?) {
            et.push(e);
        }
    }

    let err = err_of(&g)?;
    Ok(SolveResult {
        success: fval < config.objective_threshold,
        g_rec: g,
        final_objective: fval,
        objective_trace: trace,
        err_trace,
        err,
        restart_index: 0,
        iterations,
        stop,
        config: config.clone(),
    })
}

/// Uniform start in `[-r, r]^n` for restart `index`.
pub fn random_start(n: usize, radius: f64, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = stream(seed, &[TAG_RESTART, index as u64]);
    (0..n).map(|_| rng.random_range(-radius..=radius)).collect()
}

/// Best of `config.restarts` descents from independent random starts.
///
/// Ties in the final objective go to the lowest restart index.
pub fn solve(
    record: &MeasurementRecord,
    spec: &OperatorSpec,
    config: &SolveConfig,
    truth: Option<&[f64]>,
) -> Result<SolveResult> {
    config.validate()?;
    if record.n != spec.n() {
        return Err(dim_mismatch(format!(
            "record n = {}, operator n = {}",
            record.n,
            spec.n()
        )));
    }
    if let Some(f) = truth {
        if f.len() != spec.n() {
            return Err(dim_mismatch("truth length does not match the operator"));
        }
    }
    let results: Vec<SolveResult> = (0..config.restarts)
        .into_par_iter()
        .map(|k| {
            let start = random_start(spec.n(), config.radius, config.seed, k);
            descend(&start, record, spec, config, truth).map(|mut res| {
                res.restart_index = k;
                res
            })
        })
        .collect::<Result<_>>()?;
    let best = results
        .into_iter()
        .reduce(|a, b| {
            if b.final_objective < a.final_objective {
                b
            } else {
                a
            }
        })
        .expect("at least one restart");
    Ok(best)
}
