//! The curvature equation `σ_k(λ(η)) = f(X, ν)` for radial graphs.
//!
//! [`newton_solve`] solves one instance by damped Newton iteration.
//! [`continue_to_target`] deforms the round unit sphere into a solution for
//! the target data along the blended family `f^t`.

mod conditions;
mod continuation;
mod residual;
mod rhs;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conditions::{validate_conditions, ConditionReport};
pub use continuation::{continue_to_target, HomotopyRun, TSchedule, TraceRecord};
pub use residual::{CurvedProblem, EquationForm, JacobianMode};
pub(crate) use rhs::interpolate;
pub use rhs::{BuiltinRhs, CurvatureRhs, HomotopyRhs, StartRhs};

use crate::geometry::{GeometryError, RadialField, SphereGrid};
use crate::newton::{self, NewtonConfig, NewtonError, NewtonReport, Rejection};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("newton iteration failed: {0}")]
    Newton(#[from] NewtonError),
    #[error("continuation stuck at t = {t} (step {dt:e} below minimum): {cause}")]
    Stuck {
        t: f64,
        dt: f64,
        cause: String,
        /// Last accepted state.
        last: RadialField,
        run: Box<HomotopyRun>,
    },
}

/// Right-hand side and barrier radii.
#[derive(Debug, Clone)]
pub struct PrescribedData {
    pub f: Arc<dyn CurvatureRhs>,
    pub r1: f64,
    pub r2: f64,
}

impl PrescribedData {
    pub fn new(f: Arc<dyn CurvatureRhs>, r1: f64, r2: f64) -> Result<Self, SolverError> {
        if !(0.0 < r1 && r1 < 1.0 && 1.0 < r2 && r2.is_finite()) {
            return Err(SolverError::Config(format!(
                "barrier radii must satisfy 0 < r1 < 1 < r2, got r1 = {r1}, r2 = {r2}"
            )));
        }
        Ok(Self { f, r1, r2 })
    }

    /// First sampled point of the closed annulus × direction sphere with `f ≤ 0`.
    pub fn positivity_violation(
        &self,
        dim: usize,
        samples: usize,
        seed: u64,
    ) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = |rng: &mut ChaCha8Rng| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if r > 1e-2 && r <= 1.0 {
                return v.into_iter().map(|a| a / r).collect::<Vec<f64>>();
            }
        };
        for s in 0..samples {
            let omega = unit(&mut rng);
            let nu = if s % 2 == 0 {
                omega.clone()
            } else {
                unit(&mut rng)
            };
            let frac = s as f64 / (samples.max(2) - 1) as f64;
            let r = self.r1 + (self.r2 - self.r1) * frac;
            let x: Vec<f64> = omega.iter().map(|w| r * w).collect();
            let v = self.f.eval(&x, &nu);
            if !(v > 0.0) {
                return Some((x, nu, v));
            }
        }
        None
    }
}

fn check_order(n: usize, k: usize) -> Result<(), SolverError> {
    if k == 0 || k > n {
        return Err(SolverError::Config(format!(
            "k = {k} must lie in 1..=n = {n}"
        )));
    }
    Ok(())
}

/// Blended data `t f + (1 − t) C_n^k (n−1)^k [|X|^{-k} + ε(|X|^{-k} − 1)]`.
pub fn homotopy_f(
    data: &PrescribedData,
    n: usize,
    k: usize,
    epsilon: f64,
    t: f64,
) -> Result<PrescribedData, SolverError> {
    check_order(n, k)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(SolverError::Config(format!(
            "homotopy parameter t = {t} outside [0, 1]"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(SolverError::Config(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    // the bracket decreases in |X|, so its minimum over [r1, r2] sits at r2
    let inv = data.r2.powi(-(k as i32));
    let floor = inv + epsilon * (inv - 1.0);
    if !(floor > 0.0) {
        return Err(SolverError::Config(format!(
            "epsilon = {epsilon} too large for r2 = {}: start data reaches {floor:e} <= 0",
            data.r2
        )));
    }
    Ok(PrescribedData {
        f: Arc::new(HomotopyRhs {
            target: data.f.clone(),
            t,
            epsilon,
            n,
            k,
        }),
        r1: data.r1,
        r2: data.r2,
    })
}

fn rejection_error(r: Rejection) -> SolverError {
    match r {
        Rejection::Cone { node, order, value } => {
            GeometryError::NotEtaConvex { node, order, value }.into()
        }
        Rejection::Range { node, value, .. } => {
            GeometryError::NonPositiveRadius { node, value }.into()
        }
        Rejection::Invalid { node, message } => {
            SolverError::Precondition(format!("node {node}: {message}"))
        }
    }
}

/// Per-node `σ_k(λ(η)) − f(X, ν)`.
pub fn residual(
    grid: &SphereGrid,
    rho: &RadialField,
    data: &PrescribedData,
    k: usize,
) -> Result<Vec<f64>, SolverError> {
    check_order(grid.n(), k)?;
    if rho.values().len() != grid.len() {
        return Err(GeometryError::LengthMismatch {
            expected: grid.len(),
            got: rho.values().len(),
        }
        .into());
    }
    let problem = CurvedProblem {
        grid,
        data,
        k,
        form: EquationForm::Raw,
        jacobian: JacobianMode::Analytic,
        bounds: (0.0, f64::INFINITY),
    };
    newton::NewtonProblem::residual(&problem, rho.values()).map_err(rejection_error)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSettings {
    #[serde(default)]
    pub form: EquationForm,
    #[serde(default)]
    pub jacobian: JacobianMode,
    /// Iterates must stay in `[r1 (1 − m), r2 (1 + m)]`.
    #[serde(default = "default_range_margin")]
    pub range_margin: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_halvings")]
    pub max_halvings: u32,
}

fn default_tol() -> f64 {
    NewtonConfig::default().tol
}
fn default_max_iter() -> usize {
    NewtonConfig::default().max_iter
}
fn default_halvings() -> u32 {
    NewtonConfig::default().max_halvings
}

impl NewtonSettings {
    pub fn config(&self) -> NewtonConfig {
        NewtonConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            max_halvings: self.max_halvings,
        }
    }
}

fn default_range_margin() -> f64 {
    0.1
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            form: EquationForm::default(),
            jacobian: JacobianMode::default(),
            range_margin: default_range_margin(),
            tol: default_tol(),
            max_iter: default_max_iter(),
            max_halvings: default_halvings(),
        }
    }
}

const POSITIVITY_SAMPLES: usize = 256;

/// Damped Newton solve of one instance starting from `rho0`.
pub fn newton_solve(
    grid: &SphereGrid,
    rho0: &RadialField,
    data: &PrescribedData,
    k: usize,
    settings: &NewtonSettings,
) -> Result<(RadialField, NewtonReport), SolverError> {
    check_order(grid.n(), k)?;
    if let Some((x, nu, v)) = data.positivity_violation(grid.n() + 1, POSITIVITY_SAMPLES, 0) {
        return Err(SolverError::Precondition(format!(
            "f must be positive on the annulus; f(X = {x:?}, nu = {nu:?}) = {v:e}"
        )));
    }
    let m = settings.range_margin;
    let problem = CurvedProblem {
        grid,
        data,
        k,
        form: settings.form,
        jacobian: settings.jacobian,
        bounds: (data.r1 * (1.0 - m), data.r2 * (1.0 + m)),
    };
    let x0 = rho0.values().to_vec();
    let start = newton::NewtonProblem::residual(&problem, &x0);
    if let Err(r) = start {
        return Err(SolverError::Precondition(format!(
            "initial state is not admissible: {r}"
        )));
    }
    let (x, report) = newton::solve(&problem, x0, &settings.config(), |cand| {
        debug_assert!(cand.iter().all(|v| *v > 0.0));
    })?;
    Ok((RadialField::new(x)?, report))
}
