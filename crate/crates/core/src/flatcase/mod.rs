//! Dirichlet problem `σ_k(λ(Δφ I − D²φ)) = f(x, φ, ∇φ)` in Ω, `φ = 0` on ∂Ω.
//!
//! Unknowns live at Cartesian lattice nodes inside Ω. Neighbours outside Ω
//! are replaced by the linear extrapolation of the centre value through
//! `φ = 0` at the point where the stencil ray leaves Ω.

mod domain;

use std::fmt;
use std::io::{self, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) use domain::hess_slot;
pub use domain::{DomainGrid, DomainShape, FlatStencil};

use crate::format::fmt17;
use crate::linalg::{symmetric_eigen_sorted, BandedMatrix, LinalgError};
use crate::newton::{self, max_abs, NewtonError, NewtonProblem, NewtonReport, Rejection};
use crate::solver::{EquationForm, JacobianMode, NewtonSettings};
use crate::symm::{self, eta_spectrum_from_kappa, EtaSpectrum, SpectrumVector};

#[derive(Debug, Error)]
pub enum FlatError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("state is not (eta,k)-convex at node {node}: sigma_{order} = {value:e}")]
    NotEtaConvex {
        node: usize,
        order: usize,
        value: f64,
    },
    #[error("initial guess: {0}")]
    Linalg(#[from] LinalgError),
    #[error("newton iteration failed: {0}")]
    Newton(#[from] NewtonError),
}

/// Right-hand side `f(x, φ, ∇φ)`.
pub trait FlatRhs: Send + Sync + fmt::Debug {
    fn eval(&self, x: &[f64], phi: f64, grad: &[f64]) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinFlatRhs {
    Constant {
        value: f64,
    },
    /// `c0 + c1 |∇φ|²`
    GradQuadratic {
        c0: f64,
        c1: f64,
    },
    /// Piecewise-linear in `|x|`, clamped outside the table.
    Tabulated {
        radii: Vec<f64>,
        values: Vec<f64>,
    },
}

impl BuiltinFlatRhs {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            BuiltinFlatRhs::Tabulated { radii, values } => {
                if radii.len() < 2 || radii.len() != values.len() {
                    return Err("tabulated needs >= 2 radii and one value per radius".into());
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err("tabulated radii must be strictly increasing".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl FlatRhs for BuiltinFlatRhs {
    fn eval(&self, x: &[f64], _phi: f64, grad: &[f64]) -> f64 {
        match self {
            BuiltinFlatRhs::Constant { value } => *value,
            BuiltinFlatRhs::GradQuadratic { c0, c1 } => {
                c0 + c1 * grad.iter().map(|g| g * g).sum::<f64>()
            }
            BuiltinFlatRhs::Tabulated { radii, values } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                crate::solver::interpolate(radii, values, r)
            }
        }
    }
}

/// Derivatives of `φ` at one interior node.
#[derive(Debug, Clone)]
pub struct FlatNode {
    pub phi: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
    pub laplacian: f64,
    /// Eigenvalues of `D²φ`, descending.
    pub hess_eigen: Vec<f64>,
    pub hess_vectors: DMatrix<f64>,
    /// `λ(η)` ascending; `permutation` refers to `hess_eigen`.
    pub eta: EtaSpectrum,
}

fn decode(grid: &DomainGrid, jet: &[f64]) -> (f64, Vec<f64>, DMatrix<f64>) {
    let n = grid.n();
    let grad = jet[1..=n].to_vec();
    let hess = DMatrix::from_fn(n, n, |a, b| jet[hess_slot(n, a, b)]);
    (jet[0], grad, hess)
}

fn flat_node(grid: &DomainGrid, p: usize, phi: &[f64]) -> FlatNode {
    let (v, grad, hess) = decode(grid, &grid.jet_vars(p, phi));
    let (hess_eigen, hess_vectors) = symmetric_eigen_sorted(&hess);
    let eta = eta_spectrum_from_kappa(&hess_eigen);
    FlatNode {
        phi: v,
        laplacian: hess.trace(),
        grad,
        hess,
        hess_eigen,
        hess_vectors,
        eta,
    }
}

/// A discrete `φ` with its derived fields.
#[derive(Debug, Clone)]
pub struct FlatState {
    pub phi: Vec<f64>,
    pub nodes: Vec<FlatNode>,
    pub pogorelov_beta: f64,
}

impl FlatState {
    pub fn evaluate(grid: &DomainGrid, phi: Vec<f64>, beta: f64) -> Result<Self, FlatError> {
        if phi.len() != grid.len() {
            return Err(FlatError::Config(format!(
                "expected {} interior values, got {}",
                grid.len(),
                phi.len()
            )));
        }
        let nodes = (0..grid.len())
            .into_par_iter()
            .map(|p| flat_node(grid, p, &phi))
            .collect();
        Ok(Self {
            phi,
            nodes,
            pogorelov_beta: beta,
        })
    }

    /// Largest `φ` over interior nodes; positive values break the maximum principle.
    pub fn max_phi(&self) -> f64 {
        self.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The discrete Dirichlet problem as a Newton system.
pub struct FlatProblem<'a> {
    pub grid: &'a DomainGrid,
    pub f: &'a dyn FlatRhs,
    pub k: usize,
    pub form: EquationForm,
    pub jacobian: JacobianMode,
}

impl FlatProblem<'_> {
    fn cone(&self, p: usize, node: &FlatNode) -> Result<(), Rejection> {
        match symm::first_cone_failure(&node.eta.values, self.k, 0.0) {
            Some((order, value)) => Err(Rejection::Cone {
                node: p,
                order,
                value,
            }),
            None => Ok(()),
        }
    }

    fn node_residual(&self, p: usize, phi: &[f64]) -> Result<f64, Rejection> {
        let node = flat_node(self.grid, p, phi);
        self.cone(p, &node)?;
        let f = self.f.eval(self.grid.point(p), node.phi, &node.grad);
        if !(f > 0.0) {
            return Err(Rejection::Invalid {
                node: p,
                message: format!("right-hand side not positive: {f}"),
            });
        }
        let sk = symm::sigma_all(&node.eta.values, self.k)[self.k];
        Ok(match self.form {
            EquationForm::Raw => sk - f,
            EquationForm::Root => {
                let kf = self.k as f64;
                sk.powf(1.0 / kf) - f.powf(1.0 / kf)
            }
        })
    }

    fn node_jet_gradient(&self, p: usize, phi: &[f64]) -> Result<Vec<f64>, Rejection> {
        let grid = self.grid;
        let n = grid.n();
        let k = self.k;
        let node = flat_node(grid, p, phi);
        self.cone(p, &node)?;

        // dS = tr(C dD) with C = V diag(c) Vᵀ, c_j the weight of μ_j
        let mut c = vec![0.0; n];
        match self.form {
            EquationForm::Raw => {
                let s = symm::sigma_gradient(&node.eta.values, k);
                let total: f64 = s.iter().sum();
                for (pos, &j) in node.eta.permutation.iter().enumerate() {
                    c[j] = total - s[pos];
                }
            }
            EquationForm::Root => {
                let oc = SpectrumVector::new(node.eta.values.clone(), k)
                    .and_then(|s| s.operator_coefficients())
                    .map_err(|e| Rejection::Invalid {
                        node: p,
                        message: e.to_string(),
                    })?;
                for (pos, &j) in node.eta.permutation.iter().enumerate() {
                    c[j] = oc.f_coeffs[pos];
                }
            }
        }
        let v = &node.hess_vectors;
        let cm = DMatrix::from_fn(n, n, |a, b| {
            (0..n).map(|j| c[j] * v[(a, j)] * v[(b, j)]).sum::<f64>()
        });

        let x = grid.point(p);
        let f0 = self.f.eval(x, node.phi, &node.grad);
        let fscale = match self.form {
            EquationForm::Raw => 1.0,
            EquationForm::Root => f0.powf(1.0 / k as f64 - 1.0) / k as f64,
        };
        let mut out = vec![0.0; grid.jet_dim()];
        for slot in 0..=n {
            let base = if slot == 0 {
                node.phi
            } else {
                node.grad[slot - 1]
            };
            let h = 1e-6 * base.abs().max(1.0);
            let eval = |delta: f64| {
                let mut v0 = node.phi;
                let mut g = node.grad.clone();
                if slot == 0 {
                    v0 += delta;
                } else {
                    g[slot - 1] += delta;
                }
                self.f.eval(x, v0, &g)
            };
            out[slot] = -fscale * (eval(h) - eval(-h)) / (2.0 * h);
        }
        for a in 0..n {
            for b in a..n {
                out[hess_slot(n, a, b)] = if a == b { cm[(a, a)] } else { 2.0 * cm[(a, b)] };
            }
        }
        Ok(out)
    }

    fn analytic_jacobian(&self, phi: &[f64]) -> Result<BandedMatrix, Rejection> {
        let grid = self.grid;
        let jd = grid.jet_dim();
        let rows: Vec<Vec<(usize, f64)>> = (0..grid.len())
            .into_par_iter()
            .map(|p| {
                let dr = self.node_jet_gradient(p, phi)?;
                let st = grid.stencil(p);
                Ok(st
                    .neighbors
                    .iter()
                    .enumerate()
                    .map(|(slot, &q)| (q, (0..jd).map(|a| dr[a] * st.weights[slot * jd + a]).sum()))
                    .collect())
            })
            .collect::<Result<_, Rejection>>()?;
        let bw = grid.bandwidth();
        let mut m = BandedMatrix::zeros(grid.len(), bw, bw);
        for (p, row) in rows.iter().enumerate() {
            m.set_row(p, row);
        }
        Ok(m)
    }

    fn fd_jacobian(&self, phi: &[f64]) -> Result<BandedMatrix, Rejection> {
        let grid = self.grid;
        let reverse = grid.reverse_stencils();
        let cols: Vec<Vec<(usize, f64)>> = (0..grid.len())
            .into_par_iter()
            .map(|q| {
                let h = 1e-6 * phi[q].abs().max(1.0);
                let mut xp = phi.to_vec();
                let mut xm = phi.to_vec();
                xp[q] += h;
                xm[q] -= h;
                reverse[q]
                    .iter()
                    .map(|&p| {
                        Ok((
                            p,
                            (self.node_residual(p, &xp)? - self.node_residual(p, &xm)?) / (2.0 * h),
                        ))
                    })
                    .collect()
            })
            .collect::<Result<_, Rejection>>()?;
        let bw = grid.bandwidth();
        let mut m = BandedMatrix::zeros(grid.len(), bw, bw);
        for (q, col) in cols.iter().enumerate() {
            for &(p, v) in col {
                m.add(p, q, v);
            }
        }
        Ok(m)
    }

    pub fn assemble(&self, phi: &[f64]) -> Result<BandedMatrix, Rejection> {
        match self.jacobian {
            JacobianMode::Analytic => self.analytic_jacobian(phi),
            JacobianMode::FiniteDifference => self.fd_jacobian(phi),
        }
    }
}

impl NewtonProblem for FlatProblem<'_> {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn residual(&self, phi: &[f64]) -> Result<Vec<f64>, Rejection> {
        if let Some((node, &value)) = phi.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Rejection::Range {
                node,
                value,
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            });
        }
        (0..self.grid.len())
            .into_par_iter()
            .map(|p| self.node_residual(p, phi))
            .collect()
    }

    fn jacobian(&self, phi: &[f64]) -> Result<BandedMatrix, Rejection> {
        self.assemble(phi)
    }
}

fn check_order(n: usize, k: usize) -> Result<(), FlatError> {
    if k == 0 || k > n {
        return Err(FlatError::Config(format!(
            "k = {k} must lie in 1..=n = {n}"
        )));
    }
    Ok(())
}

/// Per-interior-node `σ_k(λ(η)) − f(x, φ, ∇φ)`.
pub fn flat_residual(
    grid: &DomainGrid,
    state: &FlatState,
    f: &dyn FlatRhs,
    k: usize,
) -> Result<Vec<f64>, FlatError> {
    check_order(grid.n(), k)?;
    state
        .nodes
        .iter()
        .enumerate()
        .map(|(p, node)| {
            if let Some((order, value)) = symm::first_cone_failure(&node.eta.values, k, 0.0) {
                return Err(FlatError::NotEtaConvex {
                    node: p,
                    order,
                    value,
                });
            }
            let sk = symm::sigma_all(&node.eta.values, k)[k];
            Ok(sk - f.eval(grid.point(p), node.phi, &node.grad))
        })
        .collect()
}

/// `max (−φ)^β Δφ` over interior nodes; nodes with `φ > 0` contribute 0.
pub fn pogorelov_monitor(state: &FlatState) -> f64 {
    state
        .nodes
        .iter()
        .map(|n| (-n.phi).max(0.0).powf(state.pogorelov_beta) * n.laplacian)
        .fold(0.0, f64::max)
}

/// `max |D²φ|` (spectral norm) over interior nodes.
pub fn max_hessian_norm(state: &FlatState) -> f64 {
    state
        .nodes
        .iter()
        .flat_map(|n| n.hess_eigen.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Ratio of `max |D²φ|` on a refined solution to that on a coarse one.
pub fn hessian_growth(coarse: &FlatState, fine: &FlatState) -> f64 {
    max_hessian_norm(fine) / max_hessian_norm(coarse)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatReport {
    pub newton: NewtonReport,
    pub max_residual: f64,
    pub pogorelov_beta: f64,
    pub pogorelov: f64,
    pub max_hessian: f64,
    pub max_phi: f64,
    /// `φ < 0` at every interior node.
    pub maximum_principle_ok: bool,
}

/// Discrete Laplacian solve `Δψ = n` with the same boundary closure.
fn poisson_guess(grid: &DomainGrid) -> Result<Vec<f64>, FlatError> {
    let n = grid.n();
    let jd = grid.jet_dim();
    let bw = grid.bandwidth();
    let mut m = BandedMatrix::zeros(grid.len(), bw, bw);
    for p in 0..grid.len() {
        let st = grid.stencil(p);
        for (slot, &q) in st.neighbors.iter().enumerate() {
            let w: f64 = (0..n)
                .map(|a| st.weights[slot * jd + hess_slot(n, a, a)])
                .sum();
            m.add(p, q, w);
        }
    }
    Ok(m.factor()?.solve(&vec![n as f64; grid.len()]))
}

/// `−(Π (a_i² − (x_i − c_i)²))^{1/n}` on a box of half-widths `a`: convex,
/// zero on the faces, scaled so `σ_k(η)` at the center equals `target`.
fn box_guess(grid: &DomainGrid, lo: &[f64], hi: &[f64], k: usize, target: f64) -> Vec<f64> {
    let n = grid.n();
    let nf = n as f64;
    let half: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| 0.5 * (h - l)).collect();
    let center: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| 0.5 * (h + l)).collect();
    // D²(Π u_i)^{1/n} at the center is diag(−2 G0 / (n a_i²))
    let g0 = half.iter().map(|a| a * a).product::<f64>().powf(1.0 / nf);
    let d: Vec<f64> = half.iter().map(|a| 2.0 * g0 / (nf * a * a)).collect();
    let tr: f64 = d.iter().sum();
    let eta: Vec<f64> = d.iter().map(|di| tr - di).collect();
    let s = (target / symm::sigma_all(&eta, k)[k]).powf(1.0 / k as f64);
    grid.points()
        .iter()
        .map(|x| {
            let prod: f64 = (0..n)
                .map(|i| (half[i] * half[i] - (x[i] - center[i]).powi(2)).max(0.0))
                .product();
            -s * prod.powf(1.0 / nf)
        })
        .collect()
}

/// Newton solve from a scaled Poisson guess on balls and a product guess on boxes.
pub fn dirichlet_solve(
    grid: &DomainGrid,
    f: &dyn FlatRhs,
    k: usize,
    settings: &NewtonSettings,
    beta: f64,
) -> Result<(FlatState, FlatReport), FlatError> {
    let n = grid.n();
    check_order(n, k)?;
    if !(beta > 0.0) {
        return Err(FlatError::Config(format!(
            "pogorelov beta = {beta} must be positive"
        )));
    }
    let zero = vec![0.0; n];
    let fref = grid
        .points()
        .iter()
        .map(|x| f.eval(x, 0.0, &zero))
        .sum::<f64>()
        / grid.len() as f64;
    if !(fref > 0.0) {
        return Err(FlatError::Precondition(format!(
            "f must be positive; mean f(x, 0, 0) = {fref:e}"
        )));
    }
    let s = (fref / symm::unit_sphere_sigma(n, k)).powf(1.0 / k as f64);
    let problem = FlatProblem {
        grid,
        f,
        k,
        form: settings.form,
        jacobian: settings.jacobian,
    };
    let phi0: Vec<f64> = match grid.shape() {
        DomainShape::Ball { .. } => poisson_guess(grid)?.into_iter().map(|v| s * v).collect(),
        DomainShape::Rectangle { lo, hi } => box_guess(grid, lo, hi, k, fref),
    };
    if let Err(r) = problem.residual(&phi0) {
        return Err(FlatError::Precondition(format!(
            "initial guess is not admissible: {r}"
        )));
    }
    let (phi, rep) = newton::solve(&problem, phi0, &settings.config(), |_| {})?;
    let state = FlatState::evaluate(grid, phi, beta)?;
    let max_residual = max_abs(&flat_residual(grid, &state, f, k)?);
    let max_phi = state.max_phi();
    if !(max_phi < 0.0) {
        log::warn!("maximum principle violated: max phi = {max_phi:e}");
    }
    let report = FlatReport {
        newton: rep,
        max_residual,
        pogorelov_beta: beta,
        pogorelov: pogorelov_monitor(&state),
        max_hessian: max_hessian_norm(&state),
        max_phi,
        maximum_principle_ok: max_phi < 0.0,
    };
    Ok((state, report))
}

/// Columns `x0.., phi, laplacian, lambda0.., residual, pogorelov`.
pub fn write_flat_csv<W: Write>(
    out: &mut W,
    grid: &DomainGrid,
    state: &FlatState,
    f: &dyn FlatRhs,
    k: usize,
) -> io::Result<()> {
    let n = grid.n();
    let mut cols: Vec<String> = (0..n).map(|a| format!("x{a}")).collect();
    cols.extend(["phi".to_string(), "laplacian".to_string()]);
    cols.extend((0..n).map(|a| format!("lambda{a}")));
    cols.extend(["residual".to_string(), "pogorelov".to_string()]);
    writeln!(out, "{}", cols.join(","))?;
    for (p, node) in state.nodes.iter().enumerate() {
        let mut row: Vec<String> = grid.point(p).iter().map(|v| fmt17(*v)).collect();
        row.push(fmt17(node.phi));
        row.push(fmt17(node.laplacian));
        row.extend(node.eta.values.iter().map(|v| fmt17(*v)));
        let sk = symm::sigma_all(&node.eta.values, k)[k];
        row.push(fmt17(sk - f.eval(grid.point(p), node.phi, &node.grad)));
        row.push(fmt17(
            (-node.phi).max(0.0).powf(state.pogorelov_beta) * node.laplacian,
        ));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(n: usize, h: f64) -> DomainGrid {
        DomainGrid::build(n, DomainShape::Ball { radius: 1.0 }, h).unwrap()
    }

    fn quadratic(grid: &DomainGrid) -> Vec<f64> {
        grid.points()
            .iter()
            .map(|x| 0.5 * (x.iter().map(|v| v * v).sum::<f64>() - 1.0))
            .collect()
    }

    #[test]
    fn quadratic_residual_is_constant_in_the_interior() {
        let g = ball(3, 0.125);
        let st = FlatState::evaluate(&g, quadratic(&g), 4.0).unwrap();
        let r = flat_residual(&g, &st, &BuiltinFlatRhs::Constant { value: 5.0 }, 2).unwrap();
        for p in 0..g.len() {
            if g.boundary_distance(p) > 0.3 {
                // σ_2(2, 2, 2) = 12
                assert!((r[p] - 7.0).abs() < 1e-9, "{}", r[p]);
            }
        }
    }

    #[test]
    fn eta_spectrum_matches_hessian_eigenvalues() {
        let g = ball(2, 0.125);
        let phi: Vec<f64> = g
            .points()
            .iter()
            .map(|x| x[0].powi(2) + 0.3 * x[0] * x[1] + 0.6 * x[1].powi(4) - 1.0)
            .collect();
        let st = FlatState::evaluate(&g, phi, 4.0).unwrap();
        for node in &st.nodes {
            let tr = node.hess.trace();
            let mut direct: Vec<f64> = node.hess_eigen.iter().map(|m| tr - m).collect();
            direct.sort_by(f64::total_cmp);
            for (a, b) in direct.iter().zip(&node.eta.values) {
                assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn pogorelov_examples() {
        let g = ball(2, 0.0625);
        let st = FlatState::evaluate(&g, quadratic(&g), 1.0).unwrap();
        // the origin is a lattice node away from the boundary
        assert!((pogorelov_monitor(&st) - 1.0).abs() < 1e-12);
        let zero = FlatState::evaluate(&g, vec![0.0; g.len()], 4.0).unwrap();
        assert_eq!(pogorelov_monitor(&zero), 0.0);
    }

    #[test]
    fn solves_unit_hessian_problem() {
        let g = ball(2, 0.0625);
        let f = BuiltinFlatRhs::Constant { value: 1.0 };
        let (st, rep) = dirichlet_solve(&g, &f, 2, &NewtonSettings::default(), 4.0).unwrap();
        assert!(rep.max_residual <= 1e-10);
        assert!(rep.maximum_principle_ok);
        let exact = quadratic(&g);
        let err = st
            .phi
            .iter()
            .zip(&exact)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn solves_three_dimensional_problem() {
        let g = ball(3, 0.125);
        let f = BuiltinFlatRhs::Constant { value: 12.0 };
        let (st, _) = dirichlet_solve(&g, &f, 2, &NewtonSettings::default(), 4.0).unwrap();
        let exact = quadratic(&g);
        let err = st
            .phi
            .iter()
            .zip(&exact)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 2e-2, "{err}");
    }

    #[test]
    fn root_form_agrees() {
        let g = ball(2, 0.125);
        let f = BuiltinFlatRhs::GradQuadratic { c0: 1.0, c1: 1.0 };
        let raw = dirichlet_solve(&g, &f, 2, &NewtonSettings::default(), 4.0)
            .unwrap()
            .0;
        let settings = NewtonSettings {
            form: EquationForm::Root,
            ..Default::default()
        };
        let root = dirichlet_solve(&g, &f, 2, &settings, 4.0).unwrap().0;
        for (a, b) in raw.phi.iter().zip(&root.phi) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_order_and_sign() {
        let g = ball(2, 0.25);
        let f = BuiltinFlatRhs::Constant { value: 1.0 };
        assert!(matches!(
            dirichlet_solve(&g, &f, 3, &NewtonSettings::default(), 4.0),
            Err(FlatError::Config(_))
        ));
        let neg = BuiltinFlatRhs::Constant { value: -1.0 };
        assert!(matches!(
            dirichlet_solve(&g, &neg, 2, &NewtonSettings::default(), 4.0),
            Err(FlatError::Precondition(_))
        ));
    }
}
