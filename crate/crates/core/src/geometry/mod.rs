//! Discretized S^n and the geometry of radial graphs `X = ρ(x) x`.

mod grid;
mod surface;

use std::io::{self, BufRead, Write};

use thiserror::Error;

pub use grid::{
    GridMode, LocalJet, NodeFrame, Resolution, SphereGrid, Stencil, AXISYM_JET, FULL_JET,
};
pub(crate) use surface::node_geometry;
pub use surface::{evaluate_point, surface_jet, NodeGeometry, RadialField, SurfaceJet};

use crate::format::fmt17;
use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("unsupported dimension n = {0} (need n >= 2, and n = 2 for full-2d grids)")]
    UnsupportedDimension(usize),
    #[error("bad resolution: {0}")]
    Resolution(String),
    #[error("radial function must be positive; node {node} has {value}")]
    NonPositiveRadius { node: usize, value: f64 },
    #[error("expected {expected} node values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("principal curvature solve failed at node {node}: {source}")]
    Eigen { node: usize, source: LinalgError },
    #[error("surface is not (eta,k)-convex at node {node}: sigma_{order} = {value:e}")]
    NotEtaConvex {
        node: usize,
        order: usize,
        value: f64,
    },
    #[error("malformed surface file: {0}")]
    Parse(String),
}

/// Header of the surface dump for a grid of dimension `n`.
pub fn surface_csv_header(grid: &SphereGrid) -> Vec<String> {
    let n = grid.n();
    let mut cols = vec!["node".to_string(), "theta".to_string()];
    if grid.mode() == GridMode::Full2d {
        cols.push("phi".into());
    }
    cols.push("rho".into());
    cols.extend((0..=n).map(|a| format!("x{a}")));
    cols.push("u".into());
    cols.extend((0..n).map(|a| format!("kappa{a}")));
    cols.extend((0..n).map(|a| format!("lambda{a}")));
    cols.push("sigma_k".into());
    cols
}

/// One row per node: id, angles, ρ, X, u, κ (descending), λ(η) (ascending), σ_k(λ(η)).
pub fn write_surface_csv<W: Write>(
    out: &mut W,
    grid: &SphereGrid,
    jet: &SurfaceJet,
    k: usize,
) -> io::Result<()> {
    writeln!(out, "{}", surface_csv_header(grid).join(","))?;
    for (p, g) in jet.nodes().iter().enumerate() {
        let fr = grid.frame(p);
        let mut row = vec![p.to_string(), fmt17(fr.theta)];
        if grid.mode() == GridMode::Full2d {
            row.push(fmt17(fr.phi));
        }
        row.push(fmt17(g.rho));
        row.extend(g.position.iter().map(|v| fmt17(*v)));
        row.push(fmt17(g.support));
        row.extend(g.kappa.iter().map(|v| fmt17(*v)));
        row.extend(g.eta.values.iter().map(|v| fmt17(*v)));
        row.push(fmt17(crate::symm::sigma_all(&g.eta.values, k)[k]));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads the `rho` column of a surface dump back into node order.
pub fn read_surface_rho<R: BufRead>(
    input: R,
    grid: &SphereGrid,
) -> Result<RadialField, GeometryError> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| GeometryError::Parse("empty file".into()))?
        .map_err(|e| GeometryError::Parse(e.to_string()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let node_col = cols.iter().position(|c| *c == "node");
    let rho_col = cols
        .iter()
        .position(|c| *c == "rho")
        .ok_or_else(|| GeometryError::Parse("no rho column".into()))?;
    let mut values = vec![f64::NAN; grid.len()];
    let mut count = 0usize;
    for (row, line) in lines.enumerate() {
        let line = line.map_err(|e| GeometryError::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let node = match node_col {
            Some(c) => fields
                .get(c)
                .and_then(|s| s.trim().parse::<usize>().ok())
                .ok_or_else(|| GeometryError::Parse(format!("bad node id on row {}", row + 2)))?,
            None => row,
        };
        let rho = fields
            .get(rho_col)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| GeometryError::Parse(format!("bad rho on row {}", row + 2)))?;
        if node >= grid.len() {
            return Err(GeometryError::Parse(format!("node {node} outside grid")));
        }
        values[node] = rho;
        count += 1;
    }
    if count != grid.len() || values.iter().any(|v| v.is_nan()) {
        return Err(GeometryError::LengthMismatch {
            expected: grid.len(),
            got: count,
        });
    }
    RadialField::new(values)
}
