use serde::{Deserialize, Serialize};

use super::{homotopy_f, newton_solve, NewtonSettings, PrescribedData, SolverError};
use crate::geometry::{surface_jet, RadialField, SphereGrid};
use crate::verify::{estimate_report, EstimateReport, MonitorParams};

/// Step-size control for the homotopy parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TSchedule {
    #[serde(default = "default_dt0")]
    pub dt0: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
}

fn default_dt0() -> f64 {
    0.25
}
fn default_dt_min() -> f64 {
    1e-4
}
fn default_dt_max() -> f64 {
    0.5
}

impl Default for TSchedule {
    fn default() -> Self {
        Self {
            dt0: default_dt0(),
            dt_min: default_dt_min(),
            dt_max: default_dt_max(),
        }
    }
}

/// One accepted value of `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: f64,
    pub newton_iterations: usize,
    pub max_residual: f64,
    pub report: EstimateReport,
}

/// Settings and history of a continuation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotopyRun {
    pub epsilon: f64,
    pub t_schedule: TSchedule,
    pub newton: NewtonSettings,
    pub monitors: MonitorParams,
    pub trace: Vec<TraceRecord>,
}

impl HomotopyRun {
    pub fn new(
        epsilon: f64,
        t_schedule: TSchedule,
        newton: NewtonSettings,
        monitors: MonitorParams,
    ) -> Self {
        Self {
            epsilon,
            t_schedule,
            newton,
            monitors,
            trace: Vec::new(),
        }
    }
}

impl Default for HomotopyRun {
    fn default() -> Self {
        Self::new(
            0.01,
            TSchedule::default(),
            NewtonSettings::default(),
            MonitorParams::default(),
        )
    }
}

/// A solve that needed at most this many Newton steps lets `dt` grow.
const EASY_ITERATIONS: usize = 4;
const GROWTH: f64 = 1.5;

fn record(
    grid: &SphereGrid,
    rho: &RadialField,
    data: &PrescribedData,
    k: usize,
    t: f64,
    iterations: usize,
    max_residual: f64,
    monitors: &MonitorParams,
) -> Result<TraceRecord, SolverError> {
    let jet = surface_jet(grid, rho)?;
    let report = estimate_report(&jet, data.f.as_ref(), k, monitors).map_err(|e| {
        SolverError::Precondition(format!("monitor evaluation failed at t = {t}: {e}"))
    })?;
    Ok(TraceRecord {
        t,
        newton_iterations: iterations,
        max_residual,
        report,
    })
}

/// Marches `t` from 0 to 1 starting at the unit sphere.
///
/// The caller is expected to have checked the data with
/// [`validate_conditions`](super::validate_conditions).
pub fn continue_to_target(
    grid: &SphereGrid,
    data: &PrescribedData,
    mut run: HomotopyRun,
    k: usize,
) -> Result<(RadialField, HomotopyRun), SolverError> {
    let sched = run.t_schedule;
    if !(sched.dt_min > 0.0
        && sched.dt_min <= sched.dt0
        && sched.dt0 <= sched.dt_max
        && sched.dt_max <= 1.0)
    {
        return Err(SolverError::Config(format!(
            "t_schedule needs 0 < dt_min <= dt0 <= dt_max <= 1, got {sched:?}"
        )));
    }
    let start = homotopy_f(data, grid.n(), k, run.epsilon, 0.0)?;
    let mut rho = RadialField::constant(grid, 1.0)?;
    let r0 = super::residual(grid, &rho, &start, k)?;
    let res0 = crate::newton::max_abs(&r0);
    run.trace
        .push(record(grid, &rho, &start, k, 0.0, 0, res0, &run.monitors)?);

    let mut t = 0.0;
    let mut dt = sched.dt0;
    while t < 1.0 {
        let t_try = if t + dt >= 1.0 { 1.0 } else { t + dt };
        let blended = homotopy_f(data, grid.n(), k, run.epsilon, t_try)?;
        match newton_solve(grid, &rho, &blended, k, &run.newton) {
            Ok((next, rep)) => {
                log::debug!(
                    "t = {t_try}: {} newton steps, residual {:e}",
                    rep.iterations,
                    rep.final_residual
                );
                run.trace.push(record(
                    grid,
                    &next,
                    &blended,
                    k,
                    t_try,
                    rep.iterations,
                    rep.final_residual,
                    &run.monitors,
                )?);
                rho = next;
                t = t_try;
                if rep.iterations <= EASY_ITERATIONS {
                    dt = (dt * GROWTH).min(sched.dt_max);
                }
            }
            Err(e @ (SolverError::Config(_) | SolverError::Precondition(_))) => return Err(e),
            Err(e) => {
                dt *= 0.5;
                log::debug!("t = {t_try} rejected ({e}); dt -> {dt:e}");
                if dt < sched.dt_min {
                    return Err(SolverError::Stuck {
                        t,
                        dt,
                        cause: e.to_string(),
                        last: rho,
                        run: Box::new(run),
                    });
                }
            }
        }
    }
    Ok((rho, run))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Resolution;
    use crate::solver::{BuiltinRhs, StartRhs};
    use std::sync::Arc;

    fn grid() -> SphereGrid {
        SphereGrid::build(
            2,
            Resolution::Full2d {
                n_lon: 16,
                n_lat: 8,
            },
        )
        .unwrap()
    }

    #[test]
    fn round_target_reached() {
        let g = grid();
        let data = PrescribedData::new(
            Arc::new(BuiltinRhs::PowerDecay { c: 1.25, p: 3.0 }),
            0.5,
            2.0,
        )
        .unwrap();
        let (rho, run) = continue_to_target(&g, &data, HomotopyRun::default(), 2).unwrap();
        assert!(rho.values().iter().all(|v| (v - 1.25).abs() < 1e-6));
        assert_eq!(run.trace.first().unwrap().t, 0.0);
        assert_eq!(run.trace.last().unwrap().t, 1.0);
        for w in run.trace.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn start_data_is_trivial_at_every_t() {
        let g = grid();
        let f = StartRhs {
            n: 2,
            k: 2,
            epsilon: 0.01,
        };
        let data = PrescribedData::new(Arc::new(f), 0.5, 2.0).unwrap();
        let (rho, run) = continue_to_target(&g, &data, HomotopyRun::default(), 2).unwrap();
        assert!(rho.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(run.trace.iter().all(|r| r.newton_iterations == 0));
    }

    #[test]
    fn stuck_run_keeps_trace() {
        let g = grid();
        let data = PrescribedData::new(
            Arc::new(BuiltinRhs::PowerDecay { c: 1.25, p: 3.0 }),
            0.5,
            2.0,
        )
        .unwrap();
        let mut run = HomotopyRun::default();
        // one Newton step cannot converge to 1e-10 from a step away
        run.newton.max_iter = 1;
        run.t_schedule = TSchedule {
            dt0: 0.5,
            dt_min: 0.2,
            dt_max: 0.5,
        };
        match continue_to_target(&g, &data, run, 2) {
            Err(SolverError::Stuck { run, t, .. }) => {
                assert_eq!(t, 0.0);
                assert_eq!(run.trace.len(), 1);
            }
            other => panic!("expected stuck, got {other:?}"),
        }
    }
}
