use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::PrescribedData;
use crate::symm::unit_sphere_sigma;

/// Sampled check of the annulus barrier and radial monotonicity conditions.
///
/// Every margin is a worst-case violation amount: `≤ 0` passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `max (C_n^k (n−1)^k / r1^k − f(X, X/|X|))` over `|X| = r1`.
    pub inner_barrier_margin: f64,
    /// `max (f(X, X/|X|) − C_n^k (n−1)^k / r2^k)` over `|X| = r2`.
    pub outer_barrier_margin: f64,
    /// `max ∂_ρ(ρ^k f(ρω, ν))` over sampled rays, radii and directions ν.
    pub monotonicity_margin: f64,
    /// Largest of the three margins.
    pub worst_margin: f64,
    pub inner_barrier_ok: bool,
    pub outer_barrier_ok: bool,
    pub monotonicity_ok: bool,
    /// Monotonicity holds only with equality somewhere, so uniqueness is not implied.
    pub monotonicity_degenerate: bool,
    pub passed: bool,
    pub samples: usize,
}

impl ConditionReport {
    /// Human-readable list of the conditions that failed.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.inner_barrier_ok {
            out.push(format!(
                "inner barrier f(X, X/|X|) >= C/r1^k violated by {:e}",
                self.inner_barrier_margin
            ));
        }
        if !self.outer_barrier_ok {
            out.push(format!(
                "outer barrier f(X, X/|X|) <= C/r2^k violated by {:e}",
                self.outer_barrier_margin
            ));
        }
        if !self.monotonicity_ok {
            out.push(format!(
                "radial monotonicity d/drho(rho^k f) <= 0 violated, max derivative {:e}",
                self.monotonicity_margin
            ));
        }
        out
    }
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|a| a * a).sum();
        if r2 > 1e-4 && r2 <= 1.0 {
            let r = r2.sqrt();
            return v.into_iter().map(|a| a / r).collect();
        }
    }
}

/// Relative size below which a sampled derivative counts as exactly zero.
const ZERO_DERIVATIVE: f64 = 1e-8;
const RADIAL_SAMPLES: usize = 9;
/// Relative size below which a barrier difference counts as equality.
const ZERO_BARRIER: f64 = 1e-12;

fn snap(diff: f64, scale: f64) -> f64 {
    if diff.abs() <= ZERO_BARRIER * scale {
        0.0
    } else {
        diff
    }
}

/// Samples the two barrier inequalities and the radial monotonicity condition.
pub fn validate_conditions(
    data: &PrescribedData,
    n: usize,
    k: usize,
    samples: usize,
    seed: u64,
) -> ConditionReport {
    let dim = n + 1;
    let c = unit_sphere_sigma(n, k);
    let kk = k as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut rays: Vec<Vec<f64>> = Vec::new();
    for a in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[a] = s;
            rays.push(e);
        }
    }
    while rays.len() < samples {
        rays.push(random_unit(&mut rng, dim));
    }

    let f = &data.f;
    let mut inner = f64::NEG_INFINITY;
    let mut outer = f64::NEG_INFINITY;
    let mut mono = f64::NEG_INFINITY;
    let mut degenerate = false;
    for omega in &rays {
        let at = |r: f64| -> Vec<f64> { omega.iter().map(|w| r * w).collect() };
        let lo = c / data.r1.powi(kk);
        let hi = c / data.r2.powi(kk);
        inner = inner.max(snap(lo - f.eval(&at(data.r1), omega), lo));
        outer = outer.max(snap(f.eval(&at(data.r2), omega) - hi, hi));

        let nus = [
            omega.clone(),
            omega.iter().map(|v| -v).collect(),
            random_unit(&mut rng, dim),
        ];
        for nu in &nus {
            for s in 0..RADIAL_SAMPLES {
                let rho = data.r1 + (data.r2 - data.r1) * s as f64 / (RADIAL_SAMPLES - 1) as f64;
                let h = 1e-4 * rho;
                let g = |r: f64| r.powi(kk) * f.eval(&at(r), nu);
                let d = (g(rho + h) - g(rho - h)) / (2.0 * h);
                let scale = g(rho).abs() / rho;
                let d = if d.abs() <= ZERO_DERIVATIVE * scale {
                    degenerate = true;
                    0.0
                } else {
                    d
                };
                mono = mono.max(d);
            }
        }
    }

    let inner_ok = inner <= 0.0;
    let outer_ok = outer <= 0.0;
    let mono_ok = mono <= 0.0;
    ConditionReport {
        inner_barrier_margin: inner,
        outer_barrier_margin: outer,
        monotonicity_margin: mono,
        worst_margin: inner.max(outer).max(mono),
        inner_barrier_ok: inner_ok,
        outer_barrier_ok: outer_ok,
        monotonicity_ok: mono_ok,
        monotonicity_degenerate: mono_ok && degenerate,
        passed: inner_ok && outer_ok && mono_ok,
        samples: rays.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::BuiltinRhs;
    use std::sync::Arc;

    fn data(f: BuiltinRhs) -> PrescribedData {
        PrescribedData::new(Arc::new(f), 0.5, 2.0).unwrap()
    }

    #[test]
    fn decaying_rhs_passes_with_negative_margin() {
        let rep = validate_conditions(
            &data(BuiltinRhs::PowerDecay { c: 1.25, p: 3.0 }),
            2,
            2,
            64,
            7,
        );
        assert!(rep.passed, "{rep:?}");
        assert!(!rep.monotonicity_degenerate);
        // ρ² · c/ρ³ = c/ρ, derivative −c/ρ², largest at ρ = r2
        assert!(
            (rep.monotonicity_margin + 1.25 / 4.0).abs() < 1e-6,
            "{}",
            rep.monotonicity_margin
        );
    }

    #[test]
    fn constant_rhs_fails_monotonicity() {
        let rep = validate_conditions(&data(BuiltinRhs::Constant { value: 1.0 }), 2, 2, 32, 7);
        assert!(!rep.passed);
        assert!(!rep.monotonicity_ok);
        assert!(rep.monotonicity_margin > 0.0);
        assert!(!rep.failures().is_empty());
    }

    #[test]
    fn scale_invariant_rhs_has_zero_margin() {
        let rep = validate_conditions(
            &data(BuiltinRhs::PowerDecay { c: 1.0, p: 2.0 }),
            2,
            2,
            32,
            7,
        );
        assert!(rep.passed);
        assert_eq!(rep.monotonicity_margin, 0.0);
        assert!(rep.monotonicity_degenerate);
    }

    #[test]
    fn anisotropic_rhs_passes() {
        let f = BuiltinRhs::AnisoPower {
            c: 1.25,
            p: 3.0,
            delta: 0.2,
            axis: None,
        };
        let rep = validate_conditions(&data(f), 2, 2, 64, 3);
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn barrier_failure_detected() {
        // 0.4/ρ³ at ρ = r1 is 3.2 < C/r1² = 4
        let rep = validate_conditions(
            &data(BuiltinRhs::PowerDecay { c: 0.4, p: 3.0 }),
            2,
            2,
            16,
            1,
        );
        assert!(!rep.inner_barrier_ok);
        assert!(rep.outer_barrier_ok);
    }
}
