use eta_hessian::geometry::{surface_jet, RadialField, Resolution, SphereGrid};

const AXES: [f64; 3] = [1.2, 1.0, 0.9];

fn rotation(yaw: f64, pitch: f64) -> [[f64; 3]; 3] {
    let (sy, cy) = yaw.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    // R = Rz(yaw) Rx(pitch)
    [
        [cy, -sy * cp, sy * sp],
        [sy, cy * cp, -cy * sp],
        [0.0, sp, cp],
    ]
}

fn apply_t(r: &[[f64; 3]; 3], x: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|j| r[j][i] * x[j]).sum();
    }
    out
}

/// Radial function and analytic (H, K) of the ellipsoid `R(E)` with semi-axes `AXES`.
struct Ellipsoid {
    rot: [[f64; 3]; 3],
}

impl Ellipsoid {
    fn rho(&self, omega: &[f64]) -> f64 {
        let b = apply_t(&self.rot, omega);
        1.0 / (0..3)
            .map(|i| b[i] * b[i] / (AXES[i] * AXES[i]))
            .sum::<f64>()
            .sqrt()
    }

    fn curvatures(&self, x: &[f64]) -> (f64, f64) {
        let y = apply_t(&self.rot, x);
        let [a, b, c] = AXES;
        let abc2 = (a * b * c).powi(2);
        let s: f64 = (0..3).map(|i| y[i] * y[i] / AXES[i].powi(4)).sum();
        let r2: f64 = y.iter().map(|v| v * v).sum();
        let mean = (a * a + b * b + c * c - r2) / (abc2 * s.powf(1.5));
        let gauss = 1.0 / (abc2 * s * s);
        (mean, gauss)
    }
}

/// Max error in (κ1 + κ2, κ1κ2) over nodes at least `cap` away from the poles.
fn ellipsoid_error(e: &Ellipsoid, n_lon: usize, n_lat: usize, cap: f64) -> f64 {
    let grid = SphereGrid::build(2, Resolution::Full2d { n_lon, n_lat }).unwrap();
    let rho = RadialField::from_fn(&grid, |f| e.rho(&f.point)).unwrap();
    let jet = surface_jet(&grid, &rho).unwrap();
    jet.nodes()
        .iter()
        .zip(grid.frames())
        .filter(|(_, f)| f.theta > cap && f.theta < std::f64::consts::PI - cap)
        .map(|(g, _)| {
            let (mean, gauss) = e.curvatures(&g.position);
            let sum_err = (g.kappa[0] + g.kappa[1] - mean).abs();
            let prod_err = (g.kappa[0] * g.kappa[1] - gauss).abs();
            sum_err.max(prod_err)
        })
        .fold(0.0, f64::max)
}

const LEVELS: [(usize, usize); 3] = [(32, 16), (64, 32), (128, 64)];

fn orders(errs: &[f64]) -> Vec<f64> {
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn ellipsoid_curvatures_converge_at_second_order() {
    for rot in [rotation(0.0, 0.0), rotation(0.7, 0.4)] {
        let e = Ellipsoid { rot };
        let errs: Vec<f64> = LEVELS
            .iter()
            .map(|&(a, b)| ellipsoid_error(&e, a, b, 0.3))
            .collect();
        assert!(errs[2] < 5e-3, "{errs:?}");
        assert!(orders(&errs).iter().all(|o| *o > 1.7), "{errs:?}");
    }
}

#[test]
fn polar_rows_still_converge() {
    // the polar rows lose accuracy when the surface has no symmetry about the axis
    let e = Ellipsoid {
        rot: rotation(0.7, 0.4),
    };
    let errs: Vec<f64> = LEVELS
        .iter()
        .map(|&(a, b)| ellipsoid_error(&e, a, b, 0.0))
        .collect();
    assert!(errs[2] < 5e-3, "{errs:?}");
    assert!(orders(&errs).iter().all(|o| *o > 1.0), "{errs:?}");
}

#[test]
fn invariants_of_the_rotated_surface_agree() {
    // the same ellipsoid in two orientations has the same curvature range
    let range = |rot| {
        let e = Ellipsoid { rot };
        let grid = SphereGrid::build(
            2,
            Resolution::Full2d {
                n_lon: 128,
                n_lat: 64,
            },
        )
        .unwrap();
        let rho = RadialField::from_fn(&grid, |f| e.rho(&f.point)).unwrap();
        let jet = surface_jet(&grid, &rho).unwrap();
        let k: Vec<f64> = jet.nodes().iter().flat_map(|g| g.kappa.clone()).collect();
        (
            k.iter().cloned().fold(f64::INFINITY, f64::min),
            k.iter().cloned().fold(0.0, f64::max),
        )
    };
    let (lo_a, hi_a) = range(rotation(0.0, 0.0));
    let (lo_b, hi_b) = range(rotation(0.3, 1.1));
    // extremes sit at the axis tips, which the grid samples differently
    assert!(
        (lo_a - lo_b).abs() < 2e-2 && (hi_a - hi_b).abs() < 5e-2,
        "{lo_a} {lo_b} {hi_a} {hi_b}"
    );
}

#[test]
fn sphere_of_any_radius_is_umbilic() {
    for r in [0.6, 1.0, 1.7] {
        let grid = SphereGrid::build(
            2,
            Resolution::Full2d {
                n_lon: 16,
                n_lat: 8,
            },
        )
        .unwrap();
        let jet = surface_jet(&grid, &RadialField::constant(&grid, r).unwrap()).unwrap();
        for g in jet.nodes() {
            for k in &g.kappa {
                assert!((k - 1.0 / r).abs() < 1e-12);
            }
            assert!((g.support - r).abs() < 1e-14);
        }
    }
}

#[test]
fn axisym_and_full_grids_agree_on_surfaces_of_revolution() {
    let profile = |theta: f64| 1.0 + 0.1 * theta.cos() + 0.05 * theta.cos().powi(2);
    let n_lat = 24;
    let full = SphereGrid::build(2, Resolution::Full2d { n_lon: 32, n_lat }).unwrap();
    let axi = SphereGrid::build(2, Resolution::Axisym1d { n_theta: n_lat }).unwrap();
    let jf = surface_jet(
        &full,
        &RadialField::from_fn(&full, |f| profile(f.theta)).unwrap(),
    )
    .unwrap();
    let ja = surface_jet(
        &axi,
        &RadialField::from_fn(&axi, |f| profile(f.theta)).unwrap(),
    )
    .unwrap();
    for (node, frame) in full.frames().iter().enumerate() {
        let partner = axi
            .frames()
            .iter()
            .position(|a| (a.theta - frame.theta).abs() < 1e-12)
            .unwrap();
        let (a, b) = (&jf.node(node).kappa, &ja.node(partner).kappa);
        for (x, y) in a.iter().zip(b) {
            assert!(
                (x - y).abs() < 1e-10,
                "theta {}: {a:?} vs {b:?}",
                frame.theta
            );
        }
        assert!((jf.node(node).grad_norm - ja.node(partner).grad_norm).abs() < 1e-12);
    }
}

#[test]
fn support_closed_form_matches_vectors() {
    let e = Ellipsoid {
        rot: rotation(0.2, 0.5),
    };
    let grid = SphereGrid::build(
        2,
        Resolution::Full2d {
            n_lon: 32,
            n_lat: 16,
        },
    )
    .unwrap();
    let jet = surface_jet(
        &grid,
        &RadialField::from_fn(&grid, |f| e.rho(&f.point)).unwrap(),
    )
    .unwrap();
    for g in jet.nodes() {
        assert!((g.support - g.support_from_vectors()).abs() < 1e-12);
        assert!(g.support > 0.0 && g.support <= g.rho + 1e-15);
    }
}
