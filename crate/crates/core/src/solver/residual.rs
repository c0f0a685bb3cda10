use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PrescribedData;
use crate::geometry::{
    node_geometry, GeometryError, LocalJet, NodeFrame, NodeGeometry, SphereGrid,
};
use crate::linalg::BandedMatrix;
use crate::newton::{NewtonProblem, Rejection};
use crate::symm::{self, SpectrumVector};

/// Which algebraic form of the equation Newton works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationForm {
    /// `σ_k(λ(η)) − f`
    #[default]
    Raw,
    /// `σ_k(λ(η))^{1/k} − f^{1/k}`
    Root,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    /// Chain rule through the σ_k derivative coefficients.
    #[default]
    Analytic,
    /// Column-wise central differences of the residual map.
    FiniteDifference,
}

/// The discrete curvature equation on a sphere grid.
pub struct CurvedProblem<'a> {
    pub grid: &'a SphereGrid,
    pub data: &'a PrescribedData,
    pub k: usize,
    pub form: EquationForm,
    pub jacobian: JacobianMode,
    /// Admissible range of ρ.
    pub bounds: (f64, f64),
}

/// `f(X, ν)` for a node frame and the `(ρ, ∇ρ)` part of a jet.
pub(crate) fn rhs_at(data: &PrescribedData, frame: &NodeFrame, rho: f64, grad: &[f64]) -> f64 {
    let dim = frame.point.len();
    let grad_sq: f64 = grad.iter().zip(&frame.ghat).map(|(p, g)| p * p / g).sum();
    let w = (rho * rho + grad_sq).sqrt();
    let x: Vec<f64> = frame.point.iter().map(|a| rho * a).collect();
    let mut nu = x.clone();
    for (i, t) in frame.tangents.iter().enumerate() {
        let c = grad[i] / frame.ghat[i];
        for a in 0..dim {
            nu[a] -= c * t[a];
        }
    }
    for v in &mut nu {
        *v /= w;
    }
    data.f.eval(&x, &nu)
}

fn cone_rejection(node: usize, geom: &NodeGeometry, k: usize) -> Option<Rejection> {
    symm::first_cone_failure(&geom.eta.values, k, 0.0).map(|(order, value)| Rejection::Cone {
        node,
        order,
        value,
    })
}

fn geometry_rejection(e: GeometryError) -> Rejection {
    match e {
        GeometryError::NonPositiveRadius { node, value } => Rejection::Range {
            node,
            value,
            lo: 0.0,
            hi: f64::INFINITY,
        },
        GeometryError::Eigen { node, source } => Rejection::Invalid {
            node,
            message: source.to_string(),
        },
        other => Rejection::Invalid {
            node: 0,
            message: other.to_string(),
        },
    }
}

impl<'a> CurvedProblem<'a> {
    fn check_range(&self, x: &[f64]) -> Result<(), Rejection> {
        let (lo, hi) = self.bounds;
        match x
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= lo && **v <= hi))
        {
            Some((node, &value)) => Err(Rejection::Range {
                node,
                value,
                lo,
                hi,
            }),
            None => Ok(()),
        }
    }

    fn node_residual(&self, p: usize, x: &[f64]) -> Result<f64, Rejection> {
        let geom = node_geometry(self.grid, p, x).map_err(geometry_rejection)?;
        if let Some(r) = cone_rejection(p, &geom, self.k) {
            return Err(r);
        }
        let f = self.data.f.eval(&geom.position, &geom.normal);
        if !(f > 0.0) {
            return Err(Rejection::Invalid {
                node: p,
                message: format!("right-hand side not positive: {f}"),
            });
        }
        let sk = symm::sigma_all(&geom.eta.values, self.k)[self.k];
        Ok(match self.form {
            EquationForm::Raw => sk - f,
            EquationForm::Root => {
                let kf = self.k as f64;
                sk.powf(1.0 / kf) - f.powf(1.0 / kf)
            }
        })
    }

    /// Derivatives of the node residual with respect to its jet variables.
    fn node_jet_gradient(&self, p: usize, x: &[f64]) -> Result<Vec<f64>, Rejection> {
        let grid = self.grid;
        let frame = grid.frame(p);
        let geom = node_geometry(grid, p, x).map_err(geometry_rejection)?;
        if let Some(r) = cone_rejection(p, &geom, self.k) {
            return Err(r);
        }
        let n = grid.n();
        let k = self.k;
        let kf = k as f64;

        // dS = Σ_j c_j dκ_j; c_j in κ order
        let perm = &geom.eta.permutation;
        let mut coeff = vec![0.0; n];
        match self.form {
            EquationForm::Raw => {
                let s = symm::sigma_gradient(&geom.eta.values, k);
                let total: f64 = s.iter().sum();
                for (pos, &j) in perm.iter().enumerate() {
                    coeff[j] = total - s[pos];
                }
            }
            EquationForm::Root => {
                let spec = SpectrumVector::new(geom.eta.values.clone(), k).map_err(|e| {
                    Rejection::Invalid {
                        node: p,
                        message: e.to_string(),
                    }
                })?;
                let oc = spec
                    .operator_coefficients()
                    .map_err(|e| Rejection::Invalid {
                        node: p,
                        message: e.to_string(),
                    })?;
                for (pos, &j) in perm.iter().enumerate() {
                    coeff[j] = oc.f_coeffs[pos];
                }
            }
        }

        // f through (ρ, ∇ρ) by central differences
        let f0 = self.data.f.eval(&geom.position, &geom.normal);
        let fscale = match self.form {
            EquationForm::Raw => 1.0,
            EquationForm::Root => f0.powf(1.0 / kf - 1.0) / kf,
        };
        let mut df_rho_grad = vec![0.0; 1 + n];
        for (slot, d) in df_rho_grad.iter_mut().enumerate() {
            let base = if slot == 0 {
                geom.rho
            } else {
                geom.grad[slot - 1]
            };
            let h = 1e-6 * base.abs().max(1.0);
            let eval = |delta: f64| {
                let mut rho = geom.rho;
                let mut grad = geom.grad.clone();
                if slot == 0 {
                    rho += delta;
                } else {
                    grad[slot - 1] += delta;
                }
                rhs_at(self.data, frame, rho, &grad)
            };
            *d = (eval(h) - eval(-h)) / (2.0 * h);
        }

        let jd = grid.jet_dim();
        let mut unit = vec![0.0; jd];
        let mut out = vec![0.0; jd];
        for a in 0..jd {
            unit.fill(0.0);
            unit[a] = 1.0;
            let dj: LocalJet = grid.decode(p, &unit);
            let (dg, dh) = geom.form_derivatives(frame, &dj);
            let dk = geom.kappa_derivatives(&dg, &dh);
            let ds: f64 = coeff.iter().zip(&dk).map(|(c, d)| c * d).sum();
            let df = df_rho_grad[0] * dj.rho
                + (0..n).map(|i| df_rho_grad[1 + i] * dj.grad[i]).sum::<f64>();
            out[a] = ds - fscale * df;
        }
        Ok(out)
    }

    fn analytic_jacobian(&self, x: &[f64]) -> Result<BandedMatrix, Rejection> {
        let grid = self.grid;
        let jd = grid.jet_dim();
        let rows: Vec<Vec<(usize, f64)>> = (0..grid.len())
            .into_par_iter()
            .map(|p| {
                let dr = self.node_jet_gradient(p, x)?;
                let st = grid.stencil(p);
                Ok(st
                    .neighbors
                    .iter()
                    .enumerate()
                    .map(|(slot, &q)| (q, (0..jd).map(|a| dr[a] * st.weight(slot, a, jd)).sum()))
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

    fn fd_jacobian(&self, x: &[f64]) -> Result<BandedMatrix, Rejection> {
        let grid = self.grid;
        let reverse = grid.reverse_stencils();
        let cols: Vec<Vec<(usize, f64)>> = (0..grid.len())
            .into_par_iter()
            .map(|q| {
                let h = 1e-6 * x[q].abs().max(1.0);
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[q] += h;
                xm[q] -= h;
                let mut entries = Vec::with_capacity(reverse[q].len());
                for &p in &reverse[q] {
                    let rp = self.node_residual(p, &xp)?;
                    let rm = self.node_residual(p, &xm)?;
                    entries.push((p, (rp - rm) / (2.0 * h)));
                }
                Ok(entries)
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

    /// Jacobian assembled with the configured mode.
    pub fn assemble(&self, x: &[f64]) -> Result<BandedMatrix, Rejection> {
        match self.jacobian {
            JacobianMode::Analytic => self.analytic_jacobian(x),
            JacobianMode::FiniteDifference => self.fd_jacobian(x),
        }
    }

    /// Dense copy of the Jacobian, for inspection in small problems.
    pub fn dense_jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, Rejection> {
        Ok(self.assemble(x)?.to_dense())
    }
}

impl NewtonProblem for CurvedProblem<'_> {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>, Rejection> {
        self.check_range(x)?;
        (0..self.grid.len())
            .into_par_iter()
            .map(|p| self.node_residual(p, x))
            .collect()
    }

    fn jacobian(&self, x: &[f64]) -> Result<BandedMatrix, Rejection> {
        self.assemble(x)
    }
}
