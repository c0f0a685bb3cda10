use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::grid::{LocalJet, NodeFrame, SphereGrid};
use super::GeometryError;
use crate::linalg::generalized_symmetric_eigen;
use crate::symm::{self, EtaSpectrum};

/// Positive radial function on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField(Vec<f64>);

impl RadialField {
    pub fn new(values: Vec<f64>) -> Result<Self, GeometryError> {
        if let Some((node, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(GeometryError::NonPositiveRadius { node, value });
        }
        Ok(Self(values))
    }

    pub fn constant(grid: &SphereGrid, r: f64) -> Result<Self, GeometryError> {
        Self::new(vec![r; grid.len()])
    }

    pub fn from_fn(
        grid: &SphereGrid,
        f: impl Fn(&NodeFrame) -> f64,
    ) -> Result<Self, GeometryError> {
        Self::new(grid.frames().iter().map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Geometric state of the radial graph at one node.
#[derive(Debug, Clone)]
pub struct NodeGeometry {
    pub rho: f64,
    /// Coordinate partials of ρ.
    pub grad: Vec<f64>,
    /// Covariant Hessian of ρ on the round sphere.
    pub hess: DMatrix<f64>,
    /// `|∇ρ|` measured in the round metric.
    pub grad_norm: f64,
    /// `√(ρ² + |∇ρ|²)`.
    pub w: f64,
    pub position: Vec<f64>,
    pub normal: Vec<f64>,
    pub metric: DMatrix<f64>,
    pub second_form: DMatrix<f64>,
    /// `ρ²/√(ρ² + |∇ρ|²)`.
    pub support: f64,
    /// Principal curvatures, descending.
    pub kappa: Vec<f64>,
    /// `g`-orthonormal principal directions, columns ordered like `kappa`.
    pub directions: DMatrix<f64>,
    pub mean_curvature: f64,
    pub eta: EtaSpectrum,
}

impl NodeGeometry {
    /// `⟨X, ν⟩` computed from the vectors rather than the closed form.
    pub fn support_from_vectors(&self) -> f64 {
        self.position
            .iter()
            .zip(&self.normal)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn radius(&self) -> f64 {
        self.position.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa[0]
    }

    /// First-order change of `(g, h)` along a jet direction.
    pub fn form_derivatives(
        &self,
        frame: &NodeFrame,
        d: &LocalJet,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.grad.len();
        let rho = self.rho;
        let p = DVector::from_column_slice(&self.grad);
        let dp = DVector::from_column_slice(&d.grad);
        let ghat = DMatrix::from_diagonal(&DVector::from_column_slice(&frame.ghat));
        let outer = &dp * p.transpose() + &p * dp.transpose();
        let dg = &ghat * (2.0 * rho * d.rho) + &outer;
        let numer = &ghat * (rho * rho) + (&p * p.transpose()) * 2.0 - &self.hess * rho;
        let dnumer =
            &ghat * (2.0 * rho * d.rho) + &outer * 2.0 - &self.hess * d.rho - &d.hess * rho;
        let pdp: f64 = (0..n)
            .map(|i| self.grad[i] * d.grad[i] / frame.ghat[i])
            .sum();
        let dw = (rho * d.rho + pdp) / self.w;
        let dh = dnumer / self.w - numer * (dw / (self.w * self.w));
        (dg, dh)
    }

    /// `dκ_j = v_jᵀ(dh − κ_j dg)v_j` for each principal direction.
    pub fn kappa_derivatives(&self, dg: &DMatrix<f64>, dh: &DMatrix<f64>) -> Vec<f64> {
        self.kappa
            .iter()
            .enumerate()
            .map(|(j, &kj)| {
                let v = self.directions.column(j);
                let m = dh - dg * kj;
                (v.transpose() * m * v)[(0, 0)]
            })
            .collect()
    }
}

/// Evaluate g, h, ν, u, κ and the η-spectrum from a local jet.
pub fn evaluate_point(
    frame: &NodeFrame,
    jet: &LocalJet,
) -> Result<NodeGeometry, crate::linalg::LinalgError> {
    let n = jet.grad.len();
    let rho = jet.rho;
    let grad_sq: f64 = (0..n)
        .map(|i| jet.grad[i] * jet.grad[i] / frame.ghat[i])
        .sum();
    let w = (rho * rho + grad_sq).sqrt();

    let mut metric = DMatrix::zeros(n, n);
    let mut second_form = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let ghat_ij = if i == j { frame.ghat[i] } else { 0.0 };
            let pp = jet.grad[i] * jet.grad[j];
            metric[(i, j)] = rho * rho * ghat_ij + pp;
            second_form[(i, j)] = (rho * rho * ghat_ij + 2.0 * pp - rho * jet.hess[(i, j)]) / w;
        }
    }

    let dim = frame.point.len();
    let position: Vec<f64> = frame.point.iter().map(|x| rho * x).collect();
    let mut normal: Vec<f64> = position.clone();
    for (i, t) in frame.tangents.iter().enumerate() {
        let c = jet.grad[i] / frame.ghat[i];
        for a in 0..dim {
            normal[a] -= c * t[a];
        }
    }
    for v in &mut normal {
        *v /= w;
    }

    let eig = generalized_symmetric_eigen(&second_form, &metric)?;
    let kappa = eig.values;
    let mean_curvature = kappa.iter().sum();
    let eta = symm::eta_spectrum_from_kappa(&kappa);

    Ok(NodeGeometry {
        rho,
        grad: jet.grad.clone(),
        hess: jet.hess.clone(),
        grad_norm: grad_sq.sqrt(),
        w,
        position,
        normal,
        metric,
        second_form,
        support: rho * rho / w,
        kappa,
        directions: eig.vectors,
        mean_curvature,
        eta,
    })
}

/// Per-node geometry of a radial graph.
#[derive(Debug, Clone)]
pub struct SurfaceJet {
    n: usize,
    nodes: Vec<NodeGeometry>,
}

impl SurfaceJet {
    /// Wraps precomputed node geometry.
    pub fn from_nodes(n: usize, nodes: Vec<NodeGeometry>) -> Self {
        Self { n, nodes }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[NodeGeometry] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeGeometry {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Per-node `σ_k(λ(η))`; fails at the first node outside Γ_k.
    pub fn sigma_k_of_eta(&self, k: usize) -> Result<Vec<f64>, GeometryError> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(node, g)| {
                let e = symm::sigma_all(&g.eta.values, k);
                match (1..=k).find(|&j| !(e[j] > 0.0)) {
                    Some(order) => Err(GeometryError::NotEtaConvex {
                        node,
                        order,
                        value: e[order],
                    }),
                    None => Ok(e[k]),
                }
            })
            .collect()
    }
}

/// Geometry of `X = ρ(x) x` at every node.
pub fn surface_jet(grid: &SphereGrid, rho: &RadialField) -> Result<SurfaceJet, GeometryError> {
    surface_jet_from_values(grid, rho.values())
}

pub(crate) fn surface_jet_from_values(
    grid: &SphereGrid,
    rho: &[f64],
) -> Result<SurfaceJet, GeometryError> {
    if rho.len() != grid.len() {
        return Err(GeometryError::LengthMismatch {
            expected: grid.len(),
            got: rho.len(),
        });
    }
    if let Some((node, &value)) = rho.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(GeometryError::NonPositiveRadius { node, value });
    }
    let nodes = (0..grid.len())
        .into_par_iter()
        .map(|p| node_geometry(grid, p, rho))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SurfaceJet { n: grid.n(), nodes })
}

pub(crate) fn node_geometry(
    grid: &SphereGrid,
    p: usize,
    rho: &[f64],
) -> Result<NodeGeometry, GeometryError> {
    let jet = grid.decode(p, &grid.jet_vars(p, rho));
    evaluate_point(grid.frame(p), &jet).map_err(|source| GeometryError::Eigen { node: p, source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Resolution;

    #[test]
    fn round_sphere_is_exact() {
        for (n, res) in [
            (
                2,
                Resolution::Full2d {
                    n_lon: 16,
                    n_lat: 8,
                },
            ),
            (2, Resolution::Axisym1d { n_theta: 16 }),
            (3, Resolution::Axisym1d { n_theta: 16 }),
            (5, Resolution::Axisym1d { n_theta: 16 }),
        ] {
            let grid = SphereGrid::build(n, res).unwrap();
            let r = 1.3;
            let jet = surface_jet(&grid, &RadialField::constant(&grid, r).unwrap()).unwrap();
            for g in jet.nodes() {
                for k in &g.kappa {
                    assert!((k - 1.0 / r).abs() < 1e-14);
                }
                assert!((g.support - r).abs() < 1e-14);
                for l in &g.eta.values {
                    assert!((l - (n as f64 - 1.0) / r).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn sigma_of_round_spheres() {
        let grid = SphereGrid::build(3, Resolution::Axisym1d { n_theta: 16 }).unwrap();
        let r = 0.7;
        let jet = surface_jet(&grid, &RadialField::constant(&grid, r).unwrap()).unwrap();
        for s in jet.sigma_k_of_eta(2).unwrap() {
            assert!((s - 12.0 / (r * r)).abs() < 1e-12);
        }
        for n in 2..=5 {
            let grid = SphereGrid::build(n, Resolution::Axisym1d { n_theta: 8 }).unwrap();
            let jet = surface_jet(&grid, &RadialField::constant(&grid, 1.0).unwrap()).unwrap();
            for k in 1..=n {
                let s = jet.sigma_k_of_eta(k).unwrap();
                assert!((s[3] - symm::unit_sphere_sigma(n, k)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn nonpositive_radius_rejected() {
        assert!(RadialField::new(vec![1.0, 0.0]).is_err());
        let grid = SphereGrid::build(2, Resolution::Axisym1d { n_theta: 8 }).unwrap();
        let mut v = vec![1.0; 8];
        v[5] = -0.1;
        match surface_jet_from_values(&grid, &v) {
            Err(GeometryError::NonPositiveRadius { node, .. }) => assert_eq!(node, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn support_and_normal_are_consistent() {
        let grid = SphereGrid::build(
            2,
            Resolution::Full2d {
                n_lon: 32,
                n_lat: 16,
            },
        )
        .unwrap();
        let rho = RadialField::from_fn(&grid, |f| {
            1.0 + 0.2 * f.point[0] + 0.1 * f.point[1] * f.point[2]
        })
        .unwrap();
        let jet = surface_jet(&grid, &rho).unwrap();
        for g in jet.nodes() {
            let nn: f64 = g.normal.iter().map(|v| v * v).sum();
            assert!((nn.sqrt() - 1.0).abs() < 1e-12);
            assert!((g.support_from_vectors() - g.support).abs() < 1e-12);
            let lam: f64 = g.eta.values.iter().sum();
            assert!((lam - g.mean_curvature).abs() < 1e-10 * g.mean_curvature.abs().max(1.0));
            assert!(g.metric.clone().cholesky().is_some());
        }
    }

    #[test]
    fn gauss_curvature_is_sigma_two_when_n_is_two() {
        let grid = SphereGrid::build(
            2,
            Resolution::Full2d {
                n_lon: 32,
                n_lat: 16,
            },
        )
        .unwrap();
        let rho = RadialField::from_fn(&grid, |f| 1.0 + 0.15 * f.point[2] * f.point[2]).unwrap();
        let jet = surface_jet(&grid, &rho).unwrap();
        let s2 = jet.sigma_k_of_eta(2).unwrap();
        for (g, s) in jet.nodes().iter().zip(s2) {
            // det(h)/det(g) is the product of the pencil eigenvalues
            let gauss = g.second_form.determinant() / g.metric.determinant();
            assert!((s - gauss).abs() < 1e-10 * gauss.abs().max(1.0));
        }
    }

    #[test]
    fn form_derivatives_match_differences() {
        let grid = SphereGrid::build(
            2,
            Resolution::Full2d {
                n_lon: 16,
                n_lat: 8,
            },
        )
        .unwrap();
        let frame = grid.frame(21);
        let base = LocalJet {
            rho: 1.1,
            grad: vec![0.2, -0.1],
            hess: DMatrix::from_row_slice(2, 2, &[0.3, 0.05, 0.05, -0.2]),
        };
        let dir = LocalJet {
            rho: 0.7,
            grad: vec![-0.4, 0.3],
            hess: DMatrix::from_row_slice(2, 2, &[0.1, -0.6, -0.6, 0.9]),
        };
        let g0 = evaluate_point(frame, &base).unwrap();
        let (dg, dh) = g0.form_derivatives(frame, &dir);
        let s = 1e-6;
        let shift = |t: f64| LocalJet {
            rho: base.rho + t * dir.rho,
            grad: vec![
                base.grad[0] + t * dir.grad[0],
                base.grad[1] + t * dir.grad[1],
            ],
            hess: &base.hess + &dir.hess * t,
        };
        let gp = evaluate_point(frame, &shift(s)).unwrap();
        let gm = evaluate_point(frame, &shift(-s)).unwrap();
        let fd_g = (&gp.metric - &gm.metric) / (2.0 * s);
        let fd_h = (&gp.second_form - &gm.second_form) / (2.0 * s);
        assert!((fd_g - &dg).amax() < 1e-8);
        assert!((fd_h - &dh).amax() < 1e-8);
        let dk = g0.kappa_derivatives(&dg, &dh);
        for j in 0..2 {
            let fd = (gp.kappa[j] - gm.kappa[j]) / (2.0 * s);
            assert!((fd - dk[j]).abs() < 1e-7, "{fd} vs {}", dk[j]);
        }
    }
}
