//! Damped Newton iteration with admissibility safeguarding.
//!
//! Each step tries the fractions `1, 1/2, …, 2^-max_halvings` of the Newton
//! direction and accepts the first candidate that is admissible (inside the
//! ellipticity cone and the allowed range) and strictly lowers the max-norm
//! residual.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{BandedMatrix, LinalgError};

/// Why a candidate state was not admissible.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Rejection {
    #[error("node {node} leaves the Garding cone (sigma_{order} = {value:e})")]
    Cone {
        node: usize,
        order: usize,
        value: f64,
    },
    #[error("node {node} value {value} outside [{lo}, {hi}]")]
    Range {
        node: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("node {node}: {message}")]
    Invalid { node: usize, message: String },
}

pub trait NewtonProblem: Sync {
    fn dim(&self) -> usize;
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>, Rejection>;
    fn jacobian(&self, x: &[f64]) -> Result<BandedMatrix, Rejection>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonConfig {
    /// Convergence threshold on the max-norm residual.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Smallest tried step fraction is `2^-max_halvings`.
    #[serde(default = "default_halvings")]
    pub max_halvings: u32,
}

fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    30
}
fn default_halvings() -> u32 {
    6
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: default_max_iter(),
            max_halvings: default_halvings(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NewtonReport {
    /// Accepted Newton steps.
    pub iterations: usize,
    /// Max-norm residual before each step and after the last one.
    pub residual_history: Vec<f64>,
    pub step_fractions: Vec<f64>,
    pub final_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NewtonError {
    #[error("starting state is not admissible: {0}")]
    InvalidStart(Rejection),
    #[error("residual did not decrease for any step fraction (max residual {})", report.final_residual)]
    Diverged {
        last: Vec<f64>,
        report: NewtonReport,
    },
    #[error("every step fraction left the admissible set: {rejection}")]
    ConeExit {
        last: Vec<f64>,
        report: NewtonReport,
        rejection: Rejection,
    },
    #[error("no convergence within {} iterations (max residual {})", report.iterations, report.final_residual)]
    IterationLimit {
        last: Vec<f64>,
        report: NewtonReport,
    },
    #[error("linearized system is singular: {error}")]
    Singular {
        last: Vec<f64>,
        report: NewtonReport,
        error: LinalgError,
    },
}

impl NewtonError {
    pub fn last_iterate(&self) -> Option<&[f64]> {
        match self {
            NewtonError::InvalidStart(_) => None,
            NewtonError::Diverged { last, .. }
            | NewtonError::ConeExit { last, .. }
            | NewtonError::IterationLimit { last, .. }
            | NewtonError::Singular { last, .. } => Some(last),
        }
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Runs damped Newton from `x0`. `on_accept` sees every accepted iterate.
pub fn solve<P: NewtonProblem + ?Sized>(
    problem: &P,
    x0: Vec<f64>,
    config: &NewtonConfig,
    mut on_accept: impl FnMut(&[f64]),
) -> Result<(Vec<f64>, NewtonReport), NewtonError> {
    let mut x = x0;
    let mut r = problem.residual(&x).map_err(NewtonError::InvalidStart)?;
    let mut report = NewtonReport::default();
    loop {
        let res = max_abs(&r);
        report.residual_history.push(res);
        report.final_residual = res;
        if res <= config.tol {
            return Ok((x, report));
        }
        if report.iterations >= config.max_iter {
            return Err(NewtonError::IterationLimit { last: x, report });
        }
        let jac = match problem.jacobian(&x) {
            Ok(j) => j,
            Err(rejection) => {
                return Err(NewtonError::ConeExit {
                    last: x,
                    report,
                    rejection,
                })
            }
        };
        let lu = match jac.factor() {
            Ok(lu) => lu,
            Err(error) => {
                return Err(NewtonError::Singular {
                    last: x,
                    report,
                    error,
                })
            }
        };
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = lu.solve(&neg);

        let mut frac = 1.0;
        let mut accepted = None;
        let mut rejection = None;
        let mut saw_increase = false;
        for _ in 0..=config.max_halvings {
            let cand: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + frac * d).collect();
            match problem.residual(&cand) {
                Ok(rc) if max_abs(&rc) < res => {
                    accepted = Some((cand, rc));
                    break;
                }
                Ok(_) => saw_increase = true,
                Err(rej) => rejection = Some(rej),
            }
            frac *= 0.5;
        }
        match accepted {
            Some((cand, rc)) => {
                on_accept(&cand);
                x = cand;
                r = rc;
                report.iterations += 1;
                report.step_fractions.push(frac);
            }
            None if saw_increase || rejection.is_none() => {
                return Err(NewtonError::Diverged { last: x, report });
            }
            None => {
                return Err(NewtonError::ConeExit {
                    last: x,
                    report,
                    rejection: rejection.expect("checked above"),
                });
            }
        }
    }
}
