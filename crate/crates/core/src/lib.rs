//! Numerical solver and a priori estimate monitors for the equation
//! `σ_k(λ(η)) = f(X, ν)` on star-shaped hypersurfaces, where `η = Hg − h`,
//! and for its flat Dirichlet analogue `σ_k(λ(Δφ I − D²φ)) = f(x, φ, ∇φ)`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::result_large_err, clippy::too_many_arguments)]

pub mod cli;
pub mod flatcase;
pub mod format;
pub mod geometry;
pub mod linalg;
pub mod newton;
pub mod solver;
pub mod symm;
pub mod verify;
