use serde::{Deserialize, Serialize};

use super::FlatError;

/// Shape of Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainShape {
    /// Ball of the given radius centred at the origin.
    Ball {
        #[serde(default = "unit")]
        radius: f64,
    },
    /// Axis-aligned box; every side must be a multiple of the spacing.
    Rectangle { lo: Vec<f64>, hi: Vec<f64> },
}

fn unit() -> f64 {
    1.0
}

impl DomainShape {
    fn contains(&self, x: &[f64]) -> bool {
        match self {
            DomainShape::Ball { radius } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                r2 < radius * radius * (1.0 - 1e-12)
            }
            DomainShape::Rectangle { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| *v > a + 1e-12 * (b - a) && *v < b - 1e-12 * (b - a)),
        }
    }

    /// Fraction `t ∈ (0, 1]` at which the segment from interior `x` to `y` meets ∂Ω.
    fn crossing(&self, x: &[f64], y: &[f64]) -> f64 {
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        match self {
            DomainShape::Ball { radius } => {
                let a: f64 = d.iter().map(|v| v * v).sum();
                let b: f64 = 2.0 * x.iter().zip(&d).map(|(p, q)| p * q).sum::<f64>();
                let c: f64 = x.iter().map(|v| v * v).sum::<f64>() - radius * radius;
                let t = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
                t.clamp(0.0, 1.0)
            }
            DomainShape::Rectangle { lo, hi } => {
                let mut t = 1.0f64;
                for i in 0..x.len() {
                    if d[i] > 0.0 {
                        t = t.min((hi[i] - x[i]) / d[i]);
                    } else if d[i] < 0.0 {
                        t = t.min((lo[i] - x[i]) / d[i]);
                    }
                }
                t.clamp(0.0, 1.0)
            }
        }
    }

    fn bounds(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            DomainShape::Ball { radius } => (vec![-radius; n], vec![*radius; n]),
            DomainShape::Rectangle { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    /// Length scale used to bound the ghost extrapolation factor.
    fn scale(&self) -> f64 {
        match self {
            DomainShape::Ball { radius } => *radius,
            DomainShape::Rectangle { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| b - a)
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Coupling of one interior node to the unknowns it reads.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatStencil {
    pub neighbors: Vec<usize>,
    /// `weights[slot * jet_dim + var]`.
    pub weights: Vec<f64>,
}

/// Cartesian lattice over Ω with the unknowns at interior nodes.
#[derive(Debug, Clone)]
pub struct DomainGrid {
    n: usize,
    h: f64,
    shape: DomainShape,
    dims: Vec<usize>,
    origin: Vec<f64>,
    interior_mask: Vec<bool>,
    boundary_mask: Vec<bool>,
    /// Lattice index of each unknown.
    unknowns: Vec<usize>,
    points: Vec<Vec<f64>>,
    stencils: Vec<FlatStencil>,
    bandwidth: usize,
}

fn offsets(n: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![0; n]];
    for a in 0..n {
        for s in [1, -1] {
            let mut o = vec![0; n];
            o[a] = s;
            out.push(o);
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mut o = vec![0; n];
                o[a] = sa;
                o[b] = sb;
                out.push(o);
            }
        }
    }
    out
}

/// Position of `D_ab` (a ≤ b) in the jet, after `φ` and `∇φ`.
pub(crate) fn hess_slot(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    1 + n + a * n - a * (a + 1) / 2 + b
}

/// Finite-difference weights of one lattice offset on each jet variable.
fn offset_weights(o: &[i64], h: f64, jd: usize) -> Vec<f64> {
    let n = o.len();
    let mut w = vec![0.0; jd];
    let nz: Vec<usize> = (0..n).filter(|&a| o[a] != 0).collect();
    match nz.len() {
        0 => {
            w[0] = 1.0;
            for a in 0..n {
                w[hess_slot(n, a, a)] = -2.0 / (h * h);
            }
        }
        1 => {
            let a = nz[0];
            w[1 + a] = o[a] as f64 / (2.0 * h);
            w[hess_slot(n, a, a)] = 1.0 / (h * h);
        }
        _ => {
            let (a, b) = (nz[0], nz[1]);
            w[hess_slot(n, a, b)] = (o[a] * o[b]) as f64 / (4.0 * h * h);
        }
    }
    w
}

impl DomainGrid {
    pub fn build(n: usize, shape: DomainShape, h: f64) -> Result<Self, FlatError> {
        if n < 2 {
            return Err(FlatError::Config(format!(
                "dimension n = {n} must be at least 2"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(FlatError::Config(format!(
                "spacing h = {h} must be positive"
            )));
        }
        match &shape {
            DomainShape::Ball { radius } if !(*radius > 0.0) => {
                return Err(FlatError::Config(format!(
                    "ball radius {radius} must be positive"
                )));
            }
            DomainShape::Rectangle { lo, hi } => {
                if lo.len() != n || hi.len() != n {
                    return Err(FlatError::Config(format!(
                        "rectangle corners need {n} coordinates"
                    )));
                }
                for (a, b) in lo.iter().zip(hi) {
                    let cells = (b - a) / h;
                    if !(cells >= 2.0) || (cells - cells.round()).abs() > 1e-9 * cells {
                        return Err(FlatError::Config(format!(
                            "rectangle side [{a}, {b}] is not a multiple (>= 2) of h = {h}"
                        )));
                    }
                }
            }
            _ => {}
        }

        let (lo, hi) = shape.bounds(n);
        let mut dims = Vec::with_capacity(n);
        let mut origin = Vec::with_capacity(n);
        for a in 0..n {
            match &shape {
                DomainShape::Ball { radius } => {
                    let m = (radius / h).ceil() as usize;
                    dims.push(2 * m + 1);
                    origin.push(-(m as f64) * h);
                }
                DomainShape::Rectangle { .. } => {
                    dims.push(((hi[a] - lo[a]) / h).round() as usize + 1);
                    origin.push(lo[a]);
                }
            }
        }
        let total: usize = dims.iter().product();
        let coords = |idx: usize| -> Vec<f64> {
            let mut rem = idx;
            let mut x = vec![0.0; n];
            for a in (0..n).rev() {
                x[a] = origin[a] + (rem % dims[a]) as f64 * h;
                rem /= dims[a];
            }
            x
        };
        let mut strides = vec![1usize; n];
        for a in (0..n - 1).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }

        let mut interior_mask = vec![false; total];
        let mut unknown_of = vec![usize::MAX; total];
        let mut unknowns = Vec::new();
        let mut points = Vec::new();
        for (idx, mask) in interior_mask.iter_mut().enumerate() {
            let x = coords(idx);
            if shape.contains(&x) {
                *mask = true;
                unknown_of[idx] = unknowns.len();
                unknowns.push(idx);
                points.push(x);
            }
        }
        if unknowns.is_empty() {
            return Err(FlatError::Config(
                "domain has no interior nodes at this spacing".into(),
            ));
        }

        let jd = 1 + n + n * (n + 1) / 2;
        let t_min = (h / shape.scale()).min(1.0);
        let offs = offsets(n);
        let mut boundary_mask = vec![false; total];
        let mut stencils = Vec::with_capacity(unknowns.len());
        let mut bandwidth = 0;
        for (p, &idx) in unknowns.iter().enumerate() {
            let x = &points[p];
            let mut neighbors: Vec<usize> = Vec::new();
            let mut weights: Vec<f64> = Vec::new();
            let mut push = |q: usize, w: &[f64], scale: f64| {
                let slot = match neighbors.iter().position(|&v| v == q) {
                    Some(s) => s,
                    None => {
                        neighbors.push(q);
                        weights.extend(std::iter::repeat_n(0.0, jd));
                        neighbors.len() - 1
                    }
                };
                for (a, v) in w.iter().enumerate() {
                    weights[slot * jd + a] += scale * v;
                }
            };
            for o in &offs {
                let w = offset_weights(o, h, jd);
                let target = (0..n).try_fold(0i64, |acc, a| {
                    let i = ((idx / strides[a]) % dims[a]) as i64 + o[a];
                    (0..dims[a] as i64)
                        .contains(&i)
                        .then_some(acc + i * strides[a] as i64)
                });
                match target.map(|t| t as usize) {
                    Some(t) if interior_mask[t] => push(unknown_of[t], &w, 1.0),
                    other => {
                        // ghost value on the line through x with φ = 0 where it meets ∂Ω
                        let y: Vec<f64> = (0..n).map(|a| x[a] + o[a] as f64 * h).collect();
                        if let Some(t) = other {
                            boundary_mask[t] = true;
                        }
                        let t = shape.crossing(x, &y).max(t_min);
                        push(p, &w, 1.0 - 1.0 / t);
                    }
                }
            }
            for &q in &neighbors {
                bandwidth = bandwidth.max(p.abs_diff(q));
            }
            stencils.push(FlatStencil { neighbors, weights });
        }

        Ok(Self {
            n,
            h,
            shape,
            dims,
            origin,
            interior_mask,
            boundary_mask,
            unknowns,
            points,
            stencils,
            bandwidth,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn shape(&self) -> &DomainShape {
        &self.shape
    }

    /// Number of unknowns (interior nodes).
    pub fn len(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unknowns.is_empty()
    }

    pub fn lattice_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn lattice_origin(&self) -> &[f64] {
        &self.origin
    }

    /// Lattice nodes carrying an unknown.
    pub fn interior_mask(&self) -> &[bool] {
        &self.interior_mask
    }

    /// Lattice nodes outside Ω read by some interior stencil.
    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary_mask
    }

    /// Lattice index of unknown `p`.
    pub fn lattice_index(&self, p: usize) -> usize {
        self.unknowns[p]
    }

    pub fn point(&self, p: usize) -> &[f64] {
        &self.points[p]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn stencil(&self, p: usize) -> &FlatStencil {
        &self.stencils[p]
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// `1 + n + n(n+1)/2`: value, gradient, Hessian upper triangle.
    pub fn jet_dim(&self) -> usize {
        1 + self.n + self.n * (self.n + 1) / 2
    }

    pub fn jet_vars(&self, p: usize, phi: &[f64]) -> Vec<f64> {
        let jd = self.jet_dim();
        let s = &self.stencils[p];
        let mut out = vec![0.0; jd];
        for (slot, &q) in s.neighbors.iter().enumerate() {
            for (a, o) in out.iter_mut().enumerate() {
                *o += s.weights[slot * jd + a] * phi[q];
            }
        }
        out
    }

    pub fn reverse_stencils(&self) -> Vec<Vec<usize>> {
        let mut rev = vec![Vec::new(); self.len()];
        for (p, s) in self.stencils.iter().enumerate() {
            for &q in &s.neighbors {
                rev[q].push(p);
            }
        }
        rev
    }

    /// Distance from the interior node to ∂Ω, for the ball and the box.
    pub fn boundary_distance(&self, p: usize) -> f64 {
        let x = &self.points[p];
        match &self.shape {
            DomainShape::Ball { radius } => radius - x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            DomainShape::Rectangle { lo, hi } => (0..self.n)
                .map(|a| (x[a] - lo[a]).min(hi[a] - x[a]))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hessian_slots_are_packed() {
        assert_eq!(hess_slot(2, 0, 0), 3);
        assert_eq!(hess_slot(2, 0, 1), 4);
        assert_eq!(hess_slot(2, 1, 1), 5);
        assert_eq!(hess_slot(3, 2, 2), 9);
        assert_eq!(hess_slot(3, 1, 0), 5);
        assert_eq!(hess_slot(3, 1, 2), 8);
    }

    #[test]
    fn ball_masks() {
        let g = DomainGrid::build(2, DomainShape::Ball { radius: 1.0 }, 0.25).unwrap();
        assert_eq!(g.lattice_dims(), &[9, 9]);
        // interior: |x| < 1 on the 0.25 lattice
        let count = (-4i32..=4)
            .flat_map(|i| (-4i32..=4).map(move |j| (i, j)))
            .filter(|(i, j)| i * i + j * j < 16)
            .count();
        assert_eq!(g.len(), count);
        for (m, b) in g.interior_mask().iter().zip(g.boundary_mask()) {
            assert!(!(m & b));
        }
        assert!(g.boundary_mask().iter().any(|b| *b));
    }

    #[test]
    fn quadratic_jet_exact_away_from_boundary() {
        let g = DomainGrid::build(2, DomainShape::Ball { radius: 1.0 }, 0.125).unwrap();
        let phi: Vec<f64> = g
            .points()
            .iter()
            .map(|x| 0.5 * x[0] * x[0] + x[0] * x[1] - 0.25 * x[1])
            .collect();
        for p in 0..g.len() {
            if g.boundary_distance(p) > 2.0 * 0.125 {
                let j = g.jet_vars(p, &phi);
                let x = g.point(p);
                assert!((j[1] - (x[0] + x[1])).abs() < 1e-12);
                assert!((j[2] - (x[0] - 0.25)).abs() < 1e-12);
                assert!(
                    (j[3] - 1.0).abs() < 1e-10 && (j[4] - 1.0).abs() < 1e-10 && j[5].abs() < 1e-10
                );
            }
        }
    }

    #[test]
    fn ghost_values_vanish_on_the_boundary_line() {
        // linear φ vanishing on ∂Ω of a slab is reproduced exactly
        let shape = DomainShape::Rectangle {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
        };
        let g = DomainGrid::build(2, shape, 0.25).unwrap();
        assert_eq!(g.len(), 9);
        let phi: Vec<f64> = g
            .points()
            .iter()
            .map(|x| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]))
            .collect();
        let j = g.jet_vars(4, &phi);
        assert!((j[0] - 0.0625).abs() < 1e-15);
        assert!(j[1].abs() < 1e-12 && j[2].abs() < 1e-12);
    }

    #[test]
    fn rejects_misaligned_rectangle() {
        let shape = DomainShape::Rectangle {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 0.3],
        };
        assert!(DomainGrid::build(2, shape, 0.25).is_err());
    }
}
