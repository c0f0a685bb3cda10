use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::symm::unit_sphere_sigma;

/// Right-hand side `f(X, ν)` of the curvature equation.
pub trait CurvatureRhs: Send + Sync + fmt::Debug {
    fn eval(&self, x: &[f64], nu: &[f64]) -> f64;
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Built-in right-hand sides, selected by `name` in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinRhs {
    /// `c / |X|^p`
    PowerDecay {
        c: f64,
        p: f64,
    },
    /// `c (1 + δ⟨ν, e⟩) / |X|^p`; `e` defaults to the last coordinate axis.
    AnisoPower {
        c: f64,
        p: f64,
        delta: f64,
        #[serde(default)]
        axis: Option<Vec<f64>>,
    },
    Constant {
        value: f64,
    },
    /// Piecewise-linear in `|X|`, clamped outside the table.
    Tabulated {
        radii: Vec<f64>,
        values: Vec<f64>,
    },
}

impl BuiltinRhs {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            BuiltinRhs::Tabulated { radii, values } => {
                if radii.len() < 2 || radii.len() != values.len() {
                    return Err("tabulated needs >= 2 radii and one value per radius".into());
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err("tabulated radii must be strictly increasing".into());
                }
                Ok(())
            }
            BuiltinRhs::AnisoPower { axis: Some(a), .. } if !(norm(a) > 0.0) => {
                Err("aniso_power axis must be nonzero".into())
            }
            _ => Ok(()),
        }
    }
}

pub(crate) fn interpolate(radii: &[f64], values: &[f64], r: f64) -> f64 {
    if r <= radii[0] {
        return values[0];
    }
    let last = radii.len() - 1;
    if r >= radii[last] {
        return values[last];
    }
    let i = radii.partition_point(|&x| x <= r) - 1;
    let t = (r - radii[i]) / (radii[i + 1] - radii[i]);
    values[i] + t * (values[i + 1] - values[i])
}

impl CurvatureRhs for BuiltinRhs {
    fn eval(&self, x: &[f64], nu: &[f64]) -> f64 {
        let r = norm(x);
        match self {
            BuiltinRhs::PowerDecay { c, p } => c / r.powf(*p),
            BuiltinRhs::AnisoPower { c, p, delta, axis } => {
                let dot = match axis {
                    Some(a) => a.iter().zip(nu).map(|(e, v)| e * v).sum::<f64>() / norm(a),
                    None => nu[nu.len() - 1],
                };
                c * (1.0 + delta * dot) / r.powf(*p)
            }
            BuiltinRhs::Constant { value } => *value,
            BuiltinRhs::Tabulated { radii, values } => interpolate(radii, values, r),
        }
    }
}

/// `t f + (1 − t) C_n^k (n−1)^k [|X|^{-k} + ε(|X|^{-k} − 1)]`.
#[derive(Debug, Clone)]
pub struct HomotopyRhs {
    pub target: Arc<dyn CurvatureRhs>,
    pub t: f64,
    pub epsilon: f64,
    pub n: usize,
    pub k: usize,
}

impl HomotopyRhs {
    /// The `t = 0` right-hand side.
    pub fn start_value(n: usize, k: usize, epsilon: f64, r: f64) -> f64 {
        let inv = r.powi(-(k as i32));
        unit_sphere_sigma(n, k) * (inv + epsilon * (inv - 1.0))
    }
}

impl CurvatureRhs for HomotopyRhs {
    fn eval(&self, x: &[f64], nu: &[f64]) -> f64 {
        let start = Self::start_value(self.n, self.k, self.epsilon, norm(x));
        if self.t == 0.0 {
            return start;
        }
        if self.t == 1.0 {
            return self.target.eval(x, nu);
        }
        self.t * self.target.eval(x, nu) + (1.0 - self.t) * start
    }
}

/// The `t = 0` right-hand side as a standalone function.
#[derive(Debug, Clone, Copy)]
pub struct StartRhs {
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
}

impl CurvatureRhs for StartRhs {
    fn eval(&self, x: &[f64], _nu: &[f64]) -> f64 {
        HomotopyRhs::start_value(self.n, self.k, self.epsilon, norm(x))
    }
}
