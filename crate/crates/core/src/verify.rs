//! Estimate quantities evaluated on a discrete surface.
//!
//! All functions are pure reductions over a [`SurfaceJet`]; they never
//! modify state and give bit-identical results on identical inputs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::SurfaceJet;
use crate::solver::CurvatureRhs;
use crate::symm::SpectrumVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("support function must be positive; node {node} has u = {value:e}")]
    NonPositiveSupport { node: usize, value: f64 },
    #[error("node {node} is outside the ellipticity cone: {message}")]
    Cone { node: usize, message: String },
    #[error("right-hand side not positive at node {node}: {value:e}")]
    NonPositiveRhs { node: usize, value: f64 },
}

/// Constants of the two auxiliary functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorParams {
    /// Weight of `|X|²` in `Q`.
    #[serde(default = "default_a")]
    pub a_const: f64,
    /// Weight of `1/|X|²` in `w`; `None` means `2 max |X|²`.
    #[serde(default)]
    pub alpha: Option<f64>,
}

fn default_a() -> f64 {
    2.0
}

impl Default for MonitorParams {
    fn default() -> Self {
        Self {
            a_const: default_a(),
            alpha: None,
        }
    }
}

/// A monitor maximum and the node where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorValue {
    pub value: f64,
    pub node: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientBound {
    pub max_grad_rho: f64,
    pub min_u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub max_abs_kappa: f64,
    pub max_grad_rho: f64,
    pub min_u: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// `None` when no node has `κ_max > 0`.
    pub q_value: Option<f64>,
    pub q_node: Option<usize>,
    pub w_value: f64,
    pub w_node: usize,
    pub identity_defect: f64,
}

fn argmax(values: impl Iterator<Item = (usize, f64)>) -> Option<MonitorValue> {
    values.fold(
        None,
        |best: Option<MonitorValue>, (node, value)| match best {
            Some(b) if b.value >= value => Some(b),
            _ => Some(MonitorValue { value, node }),
        },
    )
}

pub fn curvature_bound(jet: &SurfaceJet) -> f64 {
    jet.nodes()
        .iter()
        .flat_map(|g| g.kappa.iter())
        .fold(0.0f64, |m, k| m.max(k.abs()))
}

pub fn gradient_bound(jet: &SurfaceJet) -> GradientBound {
    let mut out = GradientBound {
        max_grad_rho: 0.0,
        min_u: f64::INFINITY,
    };
    for g in jet.nodes() {
        out.max_grad_rho = out.max_grad_rho.max(g.grad_norm);
        out.min_u = out.min_u.min(g.support);
    }
    out
}

/// `max log κ_max − log(u − a) + (A/2)|X|²` over nodes with `κ_max > 0`, `a = ½ min u`.
pub fn q_monitor(jet: &SurfaceJet, a_const: f64) -> Option<MonitorValue> {
    let a = 0.5 * gradient_bound(jet).min_u;
    argmax(
        jet.nodes()
            .iter()
            .enumerate()
            .filter(|(_, g)| g.kappa_max() > 0.0)
            .map(|(p, g)| {
                let r2 = g.radius().powi(2);
                (
                    p,
                    g.kappa_max().ln() - (g.support - a).ln() + 0.5 * a_const * r2,
                )
            }),
    )
}

/// `max −log u + α/|X|²`.
pub fn w_monitor(jet: &SurfaceJet, alpha: f64) -> Result<MonitorValue, VerifyError> {
    if let Some((node, g)) = jet
        .nodes()
        .iter()
        .enumerate()
        .find(|(_, g)| !(g.support > 0.0))
    {
        return Err(VerifyError::NonPositiveSupport {
            node,
            value: g.support,
        });
    }
    Ok(argmax(
        jet.nodes()
            .iter()
            .enumerate()
            .map(|(p, g)| (p, -g.support.ln() + alpha / g.radius().powi(2))),
    )
    .expect("grids are nonempty"))
}

/// Default `α = 2 max |X|²`.
pub fn default_alpha(jet: &SurfaceJet) -> f64 {
    2.0 * jet
        .nodes()
        .iter()
        .fold(0.0f64, |m, g| m.max(g.radius().powi(2)))
}

/// `max |Σ F^{ii} h_ii − f^{1/k}| / f^{1/k}`, with `h_ii = κ_i` in the principal frame.
pub fn identity_check(
    jet: &SurfaceJet,
    f: &dyn CurvatureRhs,
    k: usize,
) -> Result<f64, VerifyError> {
    let mut worst = 0.0f64;
    for (node, g) in jet.nodes().iter().enumerate() {
        let cone = |e: crate::symm::SymmError| VerifyError::Cone {
            node,
            message: e.to_string(),
        };
        let spec = SpectrumVector::new(g.eta.values.clone(), k).map_err(cone)?;
        let oc = spec.operator_coefficients().map_err(cone)?;
        let lhs: f64 = g
            .eta
            .permutation
            .iter()
            .enumerate()
            .map(|(pos, &i)| oc.f_coeffs[pos] * g.kappa[i])
            .sum();
        let fv = f.eval(&g.position, &g.normal);
        if !(fv > 0.0) {
            return Err(VerifyError::NonPositiveRhs { node, value: fv });
        }
        let target = fv.powf(1.0 / k as f64);
        worst = worst.max((lhs - target).abs() / target);
    }
    Ok(worst)
}

pub fn estimate_report(
    jet: &SurfaceJet,
    f: &dyn CurvatureRhs,
    k: usize,
    params: &MonitorParams,
) -> Result<EstimateReport, VerifyError> {
    let grad = gradient_bound(jet);
    let q = q_monitor(jet, params.a_const);
    let alpha = params.alpha.unwrap_or_else(|| default_alpha(jet));
    let w = w_monitor(jet, alpha)?;
    let (rho_min, rho_max) = jet
        .nodes()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| {
            (lo.min(g.rho), hi.max(g.rho))
        });
    Ok(EstimateReport {
        max_abs_kappa: curvature_bound(jet),
        max_grad_rho: grad.max_grad_rho,
        min_u: grad.min_u,
        rho_min,
        rho_max,
        q_value: q.map(|m| m.value),
        q_node: q.map(|m| m.node),
        w_value: w.value,
        w_node: w.node,
        identity_defect: identity_check(jet, f, k)?,
    })
}
