use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// How the sphere is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridMode {
    /// Latitude–longitude grid on S², `ρ(θ, φ)`.
    #[serde(rename = "full-2d")]
    Full2d,
    /// `ρ(θ)` on S^n, rotationally symmetric about the last axis.
    #[serde(rename = "axisym-1d")]
    Axisym1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Full2d { n_lon: usize, n_lat: usize },
    Axisym1d { n_theta: usize },
}

impl Resolution {
    pub fn mode(&self) -> GridMode {
        match self {
            Resolution::Full2d { .. } => GridMode::Full2d,
            Resolution::Axisym1d { .. } => GridMode::Axisym1d,
        }
    }

    pub fn refined(&self) -> Self {
        match *self {
            Resolution::Full2d { n_lon, n_lat } => Resolution::Full2d {
                n_lon: 2 * n_lon,
                n_lat: 2 * n_lat,
            },
            Resolution::Axisym1d { n_theta } => Resolution::Axisym1d {
                n_theta: 2 * n_theta,
            },
        }
    }
}

/// Per-node coordinate data: angles, the point on the unit sphere and the
/// coordinate tangent vectors `∂x/∂θ^i` in R^{n+1}.
#[derive(Debug, Clone)]
pub struct NodeFrame {
    pub theta: f64,
    pub phi: f64,
    pub point: Vec<f64>,
    pub tangents: Vec<Vec<f64>>,
    /// Diagonal of the round metric in these coordinates.
    pub ghat: Vec<f64>,
}

/// Neighbor indices and the weights that turn their ρ values into the
/// node's jet variables (one weight per jet variable per neighbor).
#[derive(Debug, Clone)]
pub struct Stencil {
    pub neighbors: Vec<usize>,
    pub weights: Vec<f64>,
}

impl Stencil {
    fn accumulate(&mut self, node: usize, var: usize, w: f64, jet_dim: usize) {
        let slot = match self.neighbors.iter().position(|&q| q == node) {
            Some(s) => s,
            None => {
                self.neighbors.push(node);
                self.weights.extend(std::iter::repeat_n(0.0, jet_dim));
                self.neighbors.len() - 1
            }
        };
        self.weights[slot * jet_dim + var] += w;
    }

    pub fn weight(&self, slot: usize, var: usize, jet_dim: usize) -> f64 {
        self.weights[slot * jet_dim + var]
    }
}

/// Discretized S^n with finite-difference stencils.
///
/// Latitudes sit half a cell away from the poles; θ-derivatives at the first
/// and last rows reach across the pole to the node half a period away in
/// longitude.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    n: usize,
    resolution: Resolution,
    frames: Vec<NodeFrame>,
    stencils: Vec<Stencil>,
    quadrature: Vec<f64>,
    spacing: f64,
    bandwidth: usize,
}

pub const FULL_JET: usize = 6;
pub const AXISYM_JET: usize = 3;

fn sphere_area(dim: usize) -> f64 {
    // |S^dim|
    match dim {
        0 => 2.0,
        1 => 2.0 * PI,
        d => 2.0 * PI / (d as f64 - 1.0) * sphere_area(d - 2),
    }
}

impl SphereGrid {
    pub fn build(n: usize, resolution: Resolution) -> Result<Self, GeometryError> {
        if n < 2 {
            return Err(GeometryError::UnsupportedDimension(n));
        }
        match resolution {
            Resolution::Full2d { n_lon, n_lat } => {
                if n != 2 {
                    return Err(GeometryError::UnsupportedDimension(n));
                }
                if n_lon < 8 || n_lat < 8 || n_lon % 2 != 0 {
                    return Err(GeometryError::Resolution(format!(
                        "full-2d needs n_lon, n_lat >= 8 with n_lon even (got {n_lon} x {n_lat})"
                    )));
                }
                Ok(Self::build_full(n_lon, n_lat))
            }
            Resolution::Axisym1d { n_theta } => {
                if n_theta < 8 {
                    return Err(GeometryError::Resolution(format!(
                        "axisym-1d needs n_theta >= 8 (got {n_theta})"
                    )));
                }
                Ok(Self::build_axisym(n, n_theta))
            }
        }
    }

    fn build_full(n_lon: usize, n_lat: usize) -> Self {
        let ht = PI / n_lat as f64;
        let hp = 2.0 * PI / n_lon as f64;
        let idx = |i: isize, j: isize| -> usize {
            let (mut i, mut j) = (i, j);
            if i < 0 {
                i = -1 - i;
                j += n_lon as isize / 2;
            } else if i >= n_lat as isize {
                i = 2 * n_lat as isize - 1 - i;
                j += n_lon as isize / 2;
            }
            let j = j.rem_euclid(n_lon as isize) as usize;
            i as usize * n_lon + j
        };

        let mut frames = Vec::with_capacity(n_lon * n_lat);
        let mut stencils = Vec::with_capacity(n_lon * n_lat);
        let mut quadrature = Vec::with_capacity(n_lon * n_lat);
        for i in 0..n_lat {
            let theta = (i as f64 + 0.5) * ht;
            let (st, ct) = theta.sin_cos();
            for j in 0..n_lon {
                let phi = j as f64 * hp;
                let (sp, cp) = phi.sin_cos();
                frames.push(NodeFrame {
                    theta,
                    phi,
                    point: vec![st * cp, st * sp, ct],
                    tangents: vec![vec![ct * cp, ct * sp, -st], vec![-st * sp, st * cp, 0.0]],
                    ghat: vec![1.0, st * st],
                });
                quadrature.push(st * ht * hp);

                let (ii, jj) = (i as isize, j as isize);
                let mut s = Stencil {
                    neighbors: Vec::with_capacity(9),
                    weights: Vec::with_capacity(9 * FULL_JET),
                };
                let d = FULL_JET;
                let c = idx(ii, jj);
                s.accumulate(c, 0, 1.0, d);
                s.accumulate(c, 3, -2.0 / (ht * ht), d);
                s.accumulate(c, 5, -2.0 / (hp * hp), d);
                for sgn in [-1isize, 1] {
                    let sf = sgn as f64;
                    let q = idx(ii + sgn, jj);
                    s.accumulate(q, 1, sf / (2.0 * ht), d);
                    s.accumulate(q, 3, 1.0 / (ht * ht), d);
                    let q = idx(ii, jj + sgn);
                    s.accumulate(q, 2, sf / (2.0 * hp), d);
                    s.accumulate(q, 5, 1.0 / (hp * hp), d);
                }
                let wm = 1.0 / (4.0 * ht * hp);
                for (di, dj, sg) in [(1, 1, 1.0), (-1, -1, 1.0), (1, -1, -1.0), (-1, 1, -1.0)] {
                    s.accumulate(idx(ii + di, jj + dj), 4, sg * wm, d);
                }
                stencils.push(s);
            }
        }
        let bandwidth = band_of(&stencils);
        Self {
            n: 2,
            resolution: Resolution::Full2d { n_lon, n_lat },
            frames,
            stencils,
            quadrature,
            spacing: ht.max(hp),
            bandwidth,
        }
    }

    fn build_axisym(n: usize, n_theta: usize) -> Self {
        let h = PI / n_theta as f64;
        let idx = |i: isize| -> usize {
            if i < 0 {
                (-1 - i) as usize
            } else if i >= n_theta as isize {
                (2 * n_theta as isize - 1 - i) as usize
            } else {
                i as usize
            }
        };
        let parallel_area = sphere_area(n - 1);
        let mut frames = Vec::with_capacity(n_theta);
        let mut stencils = Vec::with_capacity(n_theta);
        let mut quadrature = Vec::with_capacity(n_theta);
        for i in 0..n_theta {
            let theta = (i as f64 + 0.5) * h;
            let (st, ct) = theta.sin_cos();
            let mut point = vec![0.0; n + 1];
            point[0] = st;
            point[n] = ct;
            let mut tangents = Vec::with_capacity(n);
            let mut t0 = vec![0.0; n + 1];
            t0[0] = ct;
            t0[n] = -st;
            tangents.push(t0);
            for m in 1..n {
                let mut t = vec![0.0; n + 1];
                t[m] = st;
                tangents.push(t);
            }
            let mut ghat = vec![st * st; n];
            ghat[0] = 1.0;
            frames.push(NodeFrame {
                theta,
                phi: 0.0,
                point,
                tangents,
                ghat,
            });
            quadrature.push(st.powi(n as i32 - 1) * h * parallel_area);

            let d = AXISYM_JET;
            let mut s = Stencil {
                neighbors: Vec::with_capacity(3),
                weights: Vec::with_capacity(3 * d),
            };
            let ii = i as isize;
            s.accumulate(i, 0, 1.0, d);
            s.accumulate(i, 2, -2.0 / (h * h), d);
            for sgn in [-1isize, 1] {
                let q = idx(ii + sgn);
                s.accumulate(q, 1, sgn as f64 / (2.0 * h), d);
                s.accumulate(q, 2, 1.0 / (h * h), d);
            }
            stencils.push(s);
        }
        let bandwidth = band_of(&stencils);
        Self {
            n,
            resolution: Resolution::Axisym1d { n_theta },
            frames,
            stencils,
            quadrature,
            spacing: h,
            bandwidth,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> GridMode {
        self.resolution.mode()
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[NodeFrame] {
        &self.frames
    }

    pub fn frame(&self, node: usize) -> &NodeFrame {
        &self.frames[node]
    }

    pub fn stencil(&self, node: usize) -> &Stencil {
        &self.stencils[node]
    }

    pub fn quadrature_weights(&self) -> &[f64] {
        &self.quadrature
    }

    /// Largest angular grid spacing.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Max `|p - q|` over all stencil couplings.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn jet_dim(&self) -> usize {
        match self.resolution {
            Resolution::Full2d { .. } => FULL_JET,
            Resolution::Axisym1d { .. } => AXISYM_JET,
        }
    }

    /// Raw finite-difference jet variables at `node`:
    /// full-2d `[ρ, ρ_θ, ρ_φ, ρ_θθ, ρ_θφ, ρ_φφ]`, axisym `[ρ, ρ', ρ'']`.
    pub fn jet_vars(&self, node: usize, rho: &[f64]) -> Vec<f64> {
        let d = self.jet_dim();
        let s = &self.stencils[node];
        let mut out = vec![0.0; d];
        for (slot, &q) in s.neighbors.iter().enumerate() {
            let v = rho[q];
            for (a, o) in out.iter_mut().enumerate() {
                *o += s.weights[slot * d + a] * v;
            }
        }
        out
    }

    /// Map jet variables to `(ρ, coordinate gradient, covariant Hessian)`.
    /// The map is linear, so it also maps jet directions to jet derivatives.
    pub fn decode(&self, node: usize, jet: &[f64]) -> LocalJet {
        let fr = &self.frames[node];
        let (st, ct) = fr.theta.sin_cos();
        match self.resolution {
            Resolution::Full2d { .. } => {
                let cot = ct / st;
                let mut hess = nalgebra::DMatrix::zeros(2, 2);
                hess[(0, 0)] = jet[3];
                let mixed = jet[4] - cot * jet[2];
                hess[(0, 1)] = mixed;
                hess[(1, 0)] = mixed;
                hess[(1, 1)] = jet[5] + st * ct * jet[1];
                LocalJet {
                    rho: jet[0],
                    grad: vec![jet[1], jet[2]],
                    hess,
                }
            }
            Resolution::Axisym1d { .. } => {
                let n = self.n;
                let mut grad = vec![0.0; n];
                grad[0] = jet[1];
                let mut hess = nalgebra::DMatrix::zeros(n, n);
                hess[(0, 0)] = jet[2];
                for m in 1..n {
                    hess[(m, m)] = st * ct * jet[1];
                }
                LocalJet {
                    rho: jet[0],
                    grad,
                    hess,
                }
            }
        }
    }

    /// Nodes whose stencils read `node`.
    pub fn reverse_stencils(&self) -> Vec<Vec<usize>> {
        let mut rev = vec![Vec::new(); self.len()];
        for (p, s) in self.stencils.iter().enumerate() {
            for &q in &s.neighbors {
                rev[q].push(p);
            }
        }
        rev
    }
}

fn band_of(stencils: &[Stencil]) -> usize {
    stencils
        .iter()
        .enumerate()
        .flat_map(|(p, s)| s.neighbors.iter().map(move |&q| p.abs_diff(q)))
        .max()
        .unwrap_or(0)
}

/// ρ with its first and covariant second derivatives at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalJet {
    pub rho: f64,
    pub grad: Vec<f64>,
    pub hess: nalgebra::DMatrix<f64>,
}
