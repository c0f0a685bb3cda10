//! Small dense and banded linear algebra used by the Newton solvers.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular at column {0}")]
    Singular(usize),
    #[error("metric is not positive definite")]
    NotPositiveDefinite,
    #[error("eigen-decomposition produced non-finite values")]
    NonFinite,
}

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
///
/// Each row stores the window of columns `i - kl ..= i + kl + ku`, which leaves
/// room for the fill-in produced by partial pivoting.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        // column j sits at position j - (i - kl) in row i's window
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.offset(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` at `(i, j)`. Panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let o = self.offset(i, j);
        self.data[o] += v;
    }

    pub fn set_row(&mut self, i: usize, entries: &[(usize, f64)]) {
        let lo = i * self.width;
        self.data[lo..lo + self.width].fill(0.0);
        for &(j, v) in entries {
            self.add(i, j, v);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// LU factorization with partial pivoting, consuming the matrix.
    pub fn factor(mut self) -> Result<BandedLu, LinalgError> {
        let n = self.n;
        let reach = self.kl + self.ku;
        let mut pivots = vec![0usize; n];
        let scale = self
            .data
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-300);
        for c in 0..n {
            let last = (c + self.kl).min(n - 1);
            let mut p = c;
            let mut best = self.data[self.offset(c, c)].abs();
            for r in (c + 1)..=last {
                let v = self.data[self.offset(r, c)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > scale * 1e-15) {
                return Err(LinalgError::Singular(c));
            }
            pivots[c] = p;
            let right = (c + reach).min(n - 1);
            if p != c {
                for j in c..=right {
                    let a = self.offset(c, j);
                    let b = self.offset(p, j);
                    self.data.swap(a, b);
                }
            }
            let diag = self.data[self.offset(c, c)];
            for r in (c + 1)..=last {
                let orc = self.offset(r, c);
                let l = self.data[orc] / diag;
                self.data[orc] = l;
                if l == 0.0 {
                    continue;
                }
                for j in (c + 1)..=right {
                    let u = self.data[self.offset(c, j)];
                    if u != 0.0 {
                        let orj = self.offset(r, j);
                        self.data[orj] -= l * u;
                    }
                }
            }
        }
        Ok(BandedLu { lu: self, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    lu: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let a = &self.lu;
        let n = a.n;
        let mut x = rhs.to_vec();
        for c in 0..n {
            x.swap(c, self.pivots[c]);
            let xc = x[c];
            if xc != 0.0 {
                for r in (c + 1)..=(c + a.kl).min(n - 1) {
                    x[r] -= a.data[a.offset(r, c)] * xc;
                }
            }
        }
        let reach = a.kl + a.ku;
        for c in (0..n).rev() {
            let mut s = x[c];
            for j in (c + 1)..=(c + reach).min(n - 1) {
                s -= a.data[a.offset(c, j)] * x[j];
            }
            x[c] = s / a.data[a.offset(c, c)];
        }
        x
    }
}

/// Eigenpairs of the pencil `h v = κ g v` with `g` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Eigenvalues sorted descending.
    pub values: Vec<f64>,
    /// `g`-orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

pub fn generalized_symmetric_eigen(
    h: &DMatrix<f64>,
    g: &DMatrix<f64>,
) -> Result<GeneralizedEigen, LinalgError> {
    let n = g.nrows();
    let chol = g
        .clone()
        .cholesky()
        .ok_or(LinalgError::NotPositiveDefinite)?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or(LinalgError::NotPositiveDefinite)?;
    let mut c = &l_inv * h * l_inv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let l_inv_t = l_inv.transpose();
    let vectors = DMatrix::from_fn(n, n, |r, col| {
        let src = order[col];
        (0..n)
            .map(|m| l_inv_t[(r, m)] * eig.eigenvectors[(m, src)])
            .sum()
    });
    Ok(GeneralizedEigen { values, vectors })
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix.
pub fn symmetric_eigen_sorted(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}
