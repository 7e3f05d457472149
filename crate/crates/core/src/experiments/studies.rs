use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::galerkin::ElementState;
use crate::schemes::Scheme;

use super::report::{ExperimentReport, ReportRow, SeriesRow, SweepReport, SweepRow};
use super::{run, RunConfig, RunFailure, RunOutcome};

/// Run every (scheme, q) block at `levels` step sizes starting from
/// `base.tau` and halving. Cells run in parallel; rows come back ordered by
/// scheme, q and level. Failed runs are kept as rows without metrics.
pub fn convergence_study(
    base: &RunConfig,
    schemes: &[Scheme],
    qs: &[usize],
    levels: usize,
) -> Result<ExperimentReport> {
    if levels == 0 || schemes.is_empty() || qs.is_empty() {
        return Err(Error::Parameter(
            "a convergence study needs at least one scheme, degree and level".into(),
        ));
    }
    let (problem, _) = base.prepare()?;
    problem.exact()?;
    let mut cells = Vec::new();
    for &scheme in schemes {
        for &q in qs {
            problem.validate(scheme, q)?;
            for level in 0..levels {
                cells.push((scheme, q, level));
            }
        }
    }
    cells.sort_unstable();
    cells.dedup();
    let rows = cells
        .par_iter()
        .map(|&(scheme, q, level)| {
            let cfg = RunConfig {
                scheme,
                q,
                tau: base.tau / 2f64.powi(level as i32),
                ..base.clone()
            };
            let outcome = run(&cfg)?;
            let metrics = match outcome.succeeded() {
                true => Some(outcome.metrics(cfg.l2_points)?),
                false => None,
            };
            Ok(ReportRow {
                problem: base.problem.clone(),
                scheme,
                q,
                tau: cfg.tau,
                n_elements: outcome.trajectory.mesh().n_elements(),
                metrics,
                eoc: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = ExperimentReport { rows };
    for i in 1..report.rows.len() {
        let (prev, cur) = (&report.rows[i - 1], &report.rows[i]);
        if prev.scheme != cur.scheme || prev.q != cur.q {
            continue;
        }
        if let (Some(a), Some(b)) = (prev.metrics, cur.metrics) {
            if a.l2_error > 0.0 && b.l2_error > 0.0 {
                let e = (b.l2_error / a.l2_error).ln() / (cur.tau / prev.tau).ln();
                report.rows[i].eoc = Some(e);
            }
        }
    }
    Ok(report)
}

/// Which schemes complete the whole domain at each step size. `base`
/// supplies the problem, degree, domain and solver settings.
pub fn solvability_sweep(
    base: &RunConfig,
    schemes: &[Scheme],
    taus: &[f64],
) -> Result<SweepReport> {
    let mut cells = Vec::new();
    for &scheme in schemes {
        for &tau in taus {
            cells.push(RunConfig {
                scheme,
                tau,
                ..base.clone()
            });
        }
    }
    let rows = cells
        .par_iter()
        .map(|cfg| {
            Ok(SweepRow {
                scheme: cfg.scheme,
                tau: cfg.tau,
                solved: run(cfg)?.succeeded(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { rows })
}

/// Sampled absolute errors of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub rows: Vec<SeriesRow>,
    /// Set when the run stopped early; the rows cover the solved part.
    pub failure: Option<RunFailure>,
}

impl ErrorSeries {
    /// Largest error at each sample time, in time order.
    pub fn max_over_components(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some((t, e)) if *t == r.t => *e = e.max(r.abs_error),
                _ => out.push((r.t, r.abs_error)),
            }
        }
        out
    }
}

/// Absolute error per component at `samples_per_element` equispaced points of
/// every solved element (left endpoint included) and at the final node.
pub fn pointwise_error_series(cfg: &RunConfig, samples_per_element: usize) -> Result<ErrorSeries> {
    error_series(&run(cfg)?, samples_per_element)
}

/// [`pointwise_error_series`] of a finished run.
pub fn error_series(outcome: &RunOutcome, samples_per_element: usize) -> Result<ErrorSeries> {
    if samples_per_element == 0 {
        return Err(Error::Parameter(
            "need at least one sample per element".into(),
        ));
    }
    let exact = outcome.problem.exact()?;
    let traj = &outcome.trajectory;
    let n_eq = traj.n_eq();
    let (mut u, mut du) = (vec![0.0; n_eq], vec![0.0; n_eq]);
    let mut rows = Vec::new();
    let mut push = |t: f64, u: &[f64]| {
        for (i, (a, b)) in u.iter().zip(exact.value(t)).enumerate() {
            rows.push(SeriesRow {
                t,
                component: i,
                abs_error: (a - b).abs(),
            });
        }
    };
    for n in 0..traj.completed() {
        let ctx = traj.element_context(n);
        let (a, b) = traj.mesh().element(n);
        for j in 0..samples_per_element {
            let t = a + (b - a) * j as f64 / samples_per_element as f64;
            ctx.eval(t, &mut u, &mut du)?;
            push(t, &u);
        }
    }
    let (t_last, u_last) = traj
        .nodal_series()
        .pop()
        .expect("at least the initial node");
    push(t_last, &u_last);
    Ok(ErrorSeries {
        rows,
        failure: outcome.failure.clone(),
    })
}

/// `max_n |½(U_n² + V_n²) − ½|` of the standard scheme for `y_tt + y = 0`
/// with data `(1, 0)`.
pub fn energy_drift(q: usize, tau: f64, t_end: f64) -> Result<f64> {
    let mut cfg = RunConfig::new("oscillator", Scheme::Standard, q, tau);
    cfg.t_end = Some(t_end);
    let outcome = run(&cfg)?;
    if let Some(f) = outcome.failure {
        return Err(f.cause);
    }
    Ok(outcome
        .trajectory
        .nodal_series()
        .iter()
        .map(|(_, u)| (0.5 * (u[0] * u[0] + u[1] * u[1]) - 0.5).abs())
        .fold(0.0, f64::max))
}

/// Largest nodal difference between the standard and invariant schemes when
/// both are assembled with `points` Gauss points (`q + 1` by default).
pub fn quadrature_equivalence(
    problem: &str,
    q: usize,
    tau: f64,
    t_end: f64,
    points: Option<usize>,
) -> Result<f64> {
    let mut traj = Vec::new();
    for scheme in [Scheme::Standard, Scheme::Invariant] {
        let mut cfg = RunConfig::new(problem, scheme, q, tau);
        cfg.t_end = Some(t_end);
        cfg.quad_points = points.unwrap_or(q + 1);
        let outcome = run(&cfg)?;
        if let Some(f) = outcome.failure {
            return Err(f.cause);
        }
        traj.push(outcome.trajectory.nodal_series());
    }
    Ok(traj[0]
        .iter()
        .zip(&traj[1])
        .flat_map(|((_, a), (_, b))| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max))
}
