//! Elementary symmetric functions, Gårding cone membership, and the
//! derivative coefficients of `G = σ_k^{1/k}`.
//!
//! Everything here is a pure function of an eigenvalue vector. Values are
//! evaluated with the prefix recurrence
//! `e_j ← e_j + x·e_{j-1}` (one eigenvalue at a time), which costs `O(n·m)`.

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmError {
    #[error("order {m} out of range for a vector of length {n}")]
    OrderOutOfRange { m: usize, n: usize },
    #[error("index {index} out of range for a vector of length {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("spectrum needs n >= 2 and 1 <= k <= n (got n = {n}, k = {k})")]
    BadShape { n: usize, k: usize },
    #[error("spectrum outside the Garding cone: sigma_{order} = {value:e}")]
    ConeViolation { order: usize, value: f64 },
}

/// `[σ_0, σ_1, …, σ_upto]` of `values`, with `σ_j = 0` for `j > len`.
pub fn sigma_all(values: &[f64], upto: usize) -> Vec<f64> {
    let mut e = vec![0.0; upto + 1];
    e[0] = 1.0;
    for (idx, &x) in values.iter().enumerate() {
        let top = (idx + 1).min(upto);
        for j in (1..=top).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// σ_m over the entries whose indices are not in `skip`.
fn sigma_skipping(values: &[f64], m: usize, skip: &[usize]) -> f64 {
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    let mut seen = 0usize;
    for (idx, &x) in values.iter().enumerate() {
        if skip.contains(&idx) {
            continue;
        }
        seen += 1;
        let top = seen.min(m);
        for j in (1..=top).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e[m]
}

/// The m-th elementary symmetric function, `σ_0 = 1`.
pub fn sigma(values: &[f64], m: usize) -> Result<f64, SymmError> {
    let n = values.len();
    if m > n {
        return Err(SymmError::OrderOutOfRange { m, n });
    }
    Ok(sigma_all(values, m)[m])
}

/// `σ_m(λ | i)`: σ_m of the vector with entry `i` removed.
pub fn sigma_excl(values: &[f64], m: usize, i: usize) -> Result<f64, SymmError> {
    let n = values.len();
    if i >= n {
        return Err(SymmError::IndexOutOfRange { index: i, n });
    }
    if m + 1 > n {
        return Err(SymmError::OrderOutOfRange { m, n: n - 1 });
    }
    Ok(sigma_skipping(values, m, &[i]))
}

/// `σ_m(λ | i j)` with two distinct entries removed. Negative orders are zero.
fn sigma_excl2(values: &[f64], m: isize, i: usize, j: usize) -> f64 {
    if m < 0 {
        return 0.0;
    }
    sigma_skipping(values, m as usize, &[i, j])
}

/// `∂σ_k/∂λ_i = σ_{k-1}(λ | i)` for every `i`.
pub fn sigma_gradient(values: &[f64], k: usize) -> Vec<f64> {
    if k == 0 {
        return vec![0.0; values.len()];
    }
    (0..values.len())
        .map(|i| sigma_skipping(values, k - 1, &[i]))
        .collect()
}

/// Membership in the open cone Γ_k: `σ_j > 0` for `j = 1..=k`.
pub fn gamma_k_contains(values: &[f64], k: usize) -> bool {
    first_cone_failure(values, k, 0.0).is_none()
}

/// First order `j ≤ k` with `σ_j ≤ margin`, together with that σ_j.
pub fn first_cone_failure(values: &[f64], k: usize, margin: f64) -> Option<(usize, f64)> {
    let e = sigma_all(values, k);
    (1..=k).find(|&j| !(e[j] > margin)).map(|j| (j, e[j]))
}

/// An eigenvalue vector together with the order `k` of the equation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumVector {
    values: Vec<f64>,
    k: usize,
}

impl SpectrumVector {
    pub fn new(values: Vec<f64>, k: usize) -> Result<Self, SymmError> {
        let n = values.len();
        if n < 2 || k == 0 || k > n {
            return Err(SymmError::BadShape { n, k });
        }
        Ok(Self { values, k })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn sigma(&self, m: usize) -> Result<f64, SymmError> {
        sigma(&self.values, m)
    }

    pub fn sigma_k(&self) -> f64 {
        sigma_all(&self.values, self.k)[self.k]
    }

    pub fn sigma_excl(&self, m: usize, i: usize) -> Result<f64, SymmError> {
        sigma_excl(&self.values, m, i)
    }

    pub fn gamma_k_contains(&self) -> bool {
        gamma_k_contains(&self.values, self.k)
    }

    /// Cone test with `σ_j > margin` instead of `σ_j > 0`.
    pub fn contains_with_margin(&self, margin: f64) -> bool {
        first_cone_failure(&self.values, self.k, margin).is_none()
    }

    pub fn check_cone(&self) -> Result<(), SymmError> {
        match first_cone_failure(&self.values, self.k, 0.0) {
            None => Ok(()),
            Some((order, value)) => Err(SymmError::ConeViolation { order, value }),
        }
    }

    /// Value, gradient, Hessian and pair coefficients of `G = σ_k^{1/k}`.
    pub fn operator_coefficients(&self) -> Result<OperatorCoefficients, SymmError> {
        self.check_cone()?;
        let lam = &self.values;
        let n = lam.len();
        let k = self.k;
        let kf = k as f64;
        let sk = self.sigma_k();
        let value = sk.powf(1.0 / kf);

        // G^i = c1 σ_{k-1}(λ|i), c1 = (1/k) σ_k^{1/k - 1}
        let c1 = value / (kf * sk);
        let c2 = c1 * (1.0 / kf - 1.0) / sk;
        let s = sigma_gradient(lam, k);
        let gradient: Vec<f64> = s.iter().map(|si| c1 * si).collect();
        let total: f64 = gradient.iter().sum();
        let f_coeffs = gradient.iter().map(|gi| total - gi).collect();

        let mut hessian = DMatrix::zeros(n, n);
        let mut pair = DMatrix::zeros(n, n);
        for i in 0..n {
            hessian[(i, i)] = c2 * s[i] * s[i];
            for j in (i + 1)..n {
                let s2 = sigma_excl2(lam, k as isize - 2, i, j);
                let hij = c1 * s2 + c2 * s[i] * s[j];
                hessian[(i, j)] = hij;
                hessian[(j, i)] = hij;
                // (G^i - G^j)/(λ_i - λ_j) = -c1 σ_{k-2}(λ|ij) exactly, ties included
                pair[(i, j)] = -c1 * s2;
                pair[(j, i)] = -c1 * s2;
            }
        }
        for i in 0..n {
            pair[(i, i)] = hessian[(i, i)];
        }

        Ok(OperatorCoefficients {
            value,
            gradient,
            hessian,
            pair,
            f_coeffs,
        })
    }
}

/// Derivative data of `G = σ_k^{1/k}` at a point of Γ_k.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorCoefficients {
    /// `G(λ)`.
    pub value: f64,
    /// `G^{ii} = ∂G/∂λ_i`.
    pub gradient: Vec<f64>,
    /// `∂²G/∂λ_i∂λ_j`.
    pub hessian: DMatrix<f64>,
    /// Off-diagonal entries are the matrix-argument coefficients
    /// `G^{ij,ji} = (G^{ii} - G^{jj})/(λ_i - λ_j)`; the diagonal repeats
    /// `G^{ii,ii}`.
    pub pair: DMatrix<f64>,
    /// `F^{ii} = Σ_{j≠i} G^{jj}`.
    pub f_coeffs: Vec<f64>,
}

impl OperatorCoefficients {
    /// `-G^{ij,ji}` evaluated through the divided difference of the gradient.
    /// Falls back to the limit `G^{ii,ii} - G^{ii,jj}` at near ties.
    pub fn divided_difference(&self, values: &[f64], i: usize, j: usize) -> f64 {
        let (li, lj) = (values[i], values[j]);
        if (li - lj).abs() < 1e-9 * (1.0 + li.abs() + lj.abs()) {
            self.hessian[(i, j)] - self.hessian[(i, i)]
        } else {
            (self.gradient[j] - self.gradient[i]) / (li - lj)
        }
    }
}

/// The η-spectrum of a curvature vector, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaSpectrum {
    pub values: Vec<f64>,
    /// `permutation[p]` is the index into the input κ that produced `values[p]`.
    pub permutation: Vec<usize>,
}

impl EtaSpectrum {
    pub fn with_order(&self, k: usize) -> Result<SpectrumVector, SymmError> {
        SpectrumVector::new(self.values.clone(), k)
    }
}

/// `λ_i = Σ_{j≠i} κ_j`, sorted ascending with the sorting permutation kept.
pub fn eta_spectrum_from_kappa(kappa: &[f64]) -> EtaSpectrum {
    let raw: Vec<f64> = (0..kappa.len())
        .map(|i| {
            kappa
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v)
                .sum()
        })
        .collect();
    let mut permutation: Vec<usize> = (0..kappa.len()).collect();
    permutation.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]).then(a.cmp(&b)));
    let values = permutation.iter().map(|&p| raw[p]).collect();
    EtaSpectrum {
        values,
        permutation,
    }
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `C_n^k (n-1)^k`: σ_k of the η-spectrum of the unit sphere in R^{n+1}.
pub fn unit_sphere_sigma(n: usize, k: usize) -> f64 {
    binomial(n, k) * ((n - 1) as f64).powi(k as i32)
}
