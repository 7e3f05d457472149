//! Error metrics, single runs and the studies built on them: convergence
//! tables, solvability sweeps, sampled error series and the property suite.

mod properties;
mod report;
mod studies;

pub use properties::{
    augmented_convergence, energy_property, frame_property, invariance_property,
    perturbed_exact_curve, pointwise_property, property_suite, quadrature_property,
    superposition_property, trapezoid_property, PropertyOutcome,
};
pub use report::{ExperimentReport, ReportRow, SeriesRow, SweepReport, SweepRow};
pub use studies::{
    convergence_study, energy_drift, error_series, pointwise_error_series, quadrature_equivalence,
    solvability_sweep, ErrorSeries,
};

use crate::error::{Error, Result};
use crate::galerkin::{
    integrate, Assembler, ElementState, NewtonConfig, TimeMesh, Trajectory,
    DEFAULT_QUADRATURE_POINTS,
};
use crate::invariance::integrate_augmented;
use crate::numerics::{gauss_legendre, QuadratureRule};
use crate::schemes::{by_name, ExactSolution, ProblemInstance, Scheme};

/// Points per element of the Gauss rule used for L2 errors.
pub const DEFAULT_L2_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    /// `√(Σᵢ ∫ (Uᵢ − uᵢ)² dt)` over the solved part of the domain.
    pub l2_error: f64,
    /// Largest absolute error over mesh nodes and components.
    pub max_nodal_error: f64,
}

/// L2 error of `traj` against `exact` over its solved elements.
pub fn l2_error(traj: &Trajectory, exact: &ExactSolution, quad: &QuadratureRule) -> f64 {
    let n_eq = traj.n_eq();
    let mut u = vec![0.0; n_eq];
    let mut du = vec![0.0; n_eq];
    let mut sum = 0.0;
    for n in 0..traj.completed() {
        let ctx = traj.element_context(n);
        let (a, b) = traj.mesh().element(n);
        sum += quad.integrate(a, b, |t| {
            if ctx.eval(t, &mut u, &mut du).is_err() {
                return f64::NAN;
            }
            let e = exact.value(t);
            u.iter()
                .zip(&e)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
        });
    }
    sum.sqrt()
}

/// Maximum absolute error at the solved mesh nodes.
pub fn max_nodal_error(traj: &Trajectory, exact: &ExactSolution) -> f64 {
    traj.nodal_series()
        .iter()
        .flat_map(|(t, u)| {
            let e = exact.value(*t);
            u.iter()
                .zip(e)
                .map(|(a, b)| (a - b).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

pub fn metrics(traj: &Trajectory, exact: &ExactSolution, quad: &QuadratureRule) -> ErrorMetrics {
    ErrorMetrics {
        l2_error: l2_error(traj, exact, quad),
        max_nodal_error: max_nodal_error(traj, exact),
    }
}

/// Experimental orders of convergence `log(e₂/e₁)/log(τ₂/τ₁)` of consecutive
/// pairs.
pub fn eoc(errors: &[f64], taus: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != taus.len() || errors.len() < 2 {
        return Err(Error::Parameter(format!(
            "EOC needs two or more errors and step sizes of equal length (got {} and {})",
            errors.len(),
            taus.len()
        )));
    }
    if let Some(bad) = errors.iter().chain(taus).find(|v| !(**v > 0.0)) {
        return Err(Error::Parameter(format!(
            "EOC input must be positive, got {bad}"
        )));
    }
    Ok(errors
        .windows(2)
        .zip(taus.windows(2))
        .map(|(e, t)| (e[1] / e[0]).ln() / (t[1] / t[0]).ln())
        .collect())
}

/// One run of one scheme on one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub scheme: Scheme,
    pub q: usize,
    pub tau: f64,
    /// Defaults to the problem's own domain.
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    /// Gauss points per element for assembling the residual.
    pub quad_points: usize,
    /// Gauss points per element for the L2 error.
    pub l2_points: usize,
    pub newton: NewtonConfig,
    /// Seed for randomized checks.
    pub seed: u64,
}

impl RunConfig {
    pub fn new(problem: &str, scheme: Scheme, q: usize, tau: f64) -> Self {
        Self {
            problem: problem.to_string(),
            scheme,
            q,
            tau,
            t_start: None,
            t_end: None,
            quad_points: DEFAULT_QUADRATURE_POINTS,
            l2_points: DEFAULT_L2_POINTS,
            newton: NewtonConfig::default(),
            seed: 0,
        }
    }

    /// Problem instance and mesh after checking the configuration.
    pub fn prepare(&self) -> Result<(ProblemInstance, TimeMesh)> {
        let problem = by_name(&self.problem)?;
        problem.validate(self.scheme, self.q)?;
        self.newton.validate()?;
        gauss_legendre(self.quad_points)?;
        gauss_legendre(self.l2_points)?;
        let t_start = self.t_start.unwrap_or(problem.t_start);
        let t_end = self.t_end.unwrap_or(problem.t_end);
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::Parameter(format!(
                "step size must be positive, got {}",
                self.tau
            )));
        }
        let mesh = TimeMesh::covering(t_start, t_end, self.tau)?;
        Ok((problem, mesh))
    }
}

/// Element at which a run stopped, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub element: usize,
    pub t: f64,
    pub cause: Error,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub problem: ProblemInstance,
    /// Complete on success, otherwise the elements solved before the failure.
    pub trajectory: Trajectory,
    pub failure: Option<RunFailure>,
}

impl RunOutcome {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    /// Errors against the exact solution over the solved part.
    pub fn metrics(&self, l2_points: usize) -> Result<ErrorMetrics> {
        let quad = gauss_legendre(l2_points)?;
        Ok(metrics(&self.trajectory, self.problem.exact()?, &quad))
    }
}

/// Integrate the configured scheme. Configuration problems are errors;
/// solver failures are reported in the outcome.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let (problem, mesh) = cfg.prepare()?;
    let wf = problem.weak_form(cfg.scheme, cfg.q)?;
    let result = if cfg.scheme == Scheme::Augmented {
        let frame = problem.frame()?;
        let quad = gauss_legendre(cfg.quad_points)?;
        integrate_augmented(
            wf.as_ref(),
            problem.action.as_ref(),
            &frame.cross_section(),
            Some(frame.as_ref()),
            &mesh,
            cfg.q,
            &problem.initial,
            &cfg.newton,
            &quad,
        )
        .map(|r| r.trajectory)
    } else {
        let asm = Assembler::with_points(cfg.q, cfg.quad_points)?;
        integrate(
            wf.as_ref(),
            &mesh,
            cfg.q,
            &problem.initial,
            &cfg.newton,
            &asm,
        )
    };
    let (trajectory, failure) = match result {
        Ok(traj) => (traj, None),
        Err(f) => {
            let t = f.partial.mesh().element(f.element).0;
            let failure = RunFailure {
                element: f.element,
                t,
                cause: f.cause,
            };
            (f.partial, Some(failure))
        }
    };
    Ok(RunOutcome {
        problem,
        trajectory,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn eoc_of_exact_powers() {
        let e = eoc(&[4e-2, 1e-2, 2.5e-3], &[0.4, 0.2, 0.1]).unwrap();
        assert!(e.iter().all(|v| (v - 2.0).abs() < 1e-12));
        let e = eoc(&[1.70e-3, 4.25e-4], &[0.15625, 0.078125]).unwrap();
        assert!((e[0] - 2.0).abs() < 5e-3);
        let e = eoc(&[2.19e-5, 2.74e-6], &[0.15625, 0.078125]).unwrap();
        assert!((e[0] - 3.0).abs() < 5e-3);
    }

    #[test]
    fn eoc_rejects_bad_input() {
        assert!(eoc(&[1.0, 0.0], &[0.2, 0.1]).is_err());
        assert!(eoc(&[1.0, 0.5], &[0.2, -0.1]).is_err());
        assert!(eoc(&[1.0], &[0.2]).is_err());
        assert!(eoc(&[1.0, 0.5], &[0.2]).is_err());
    }

    #[test]
    fn l2_of_zero_against_one() {
        let mesh = TimeMesh::uniform(0.0, 2.0, 4).unwrap();
        let traj = Trajectory::interpolate(mesh, 0, |_| vec![0.0]);
        let one = ExactSolution::new(|_| (vec![1.0], vec![0.0]));
        let quad = gauss_legendre(16).unwrap();
        assert!(close(l2_error(&traj, &one, &quad), 2f64.sqrt(), 1e-14));
        assert_eq!(max_nodal_error(&traj, &one), 1.0);
    }

    #[test]
    fn interpolant_of_representable_solution_has_no_error() {
        // Degree q + 1 = 2 polynomial in both components.
        let exact =
            ExactSolution::new(|t| (vec![t * t - t, 3.0 * t + 1.0], vec![2.0 * t - 1.0, 3.0]));
        let mesh = TimeMesh::uniform(0.0, 3.0, 7).unwrap();
        let ex = exact.clone();
        let traj = Trajectory::interpolate(mesh, 1, move |t| ex.value(t));
        let m = metrics(&traj, &exact, &gauss_legendre(16).unwrap());
        assert!(m.l2_error <= 1e-12 && m.max_nodal_error <= 1e-12);
    }

    #[test]
    fn working_example_single_values() {
        let mut cfg = RunConfig::new("working", Scheme::Standard, 1, 0.15625);
        cfg.l2_points = 4;
        let out = run(&cfg).unwrap();
        assert!(out.succeeded());
        let m = out.metrics(4).unwrap();
        assert!(close(m.l2_error, 2.19e-5, 0.01), "{m:?}");

        cfg.q = 0;
        let m = run(&cfg).unwrap().metrics(4).unwrap();
        assert!(close(m.max_nodal_error, 7.49e-4, 0.01), "{m:?}");

        cfg.scheme = Scheme::Invariant;
        let m = run(&cfg).unwrap().metrics(4).unwrap();
        assert!(m.max_nodal_error <= 1e-10, "{m:?}");
    }

    #[test]
    fn configuration_errors() {
        assert!(run(&RunConfig::new("nope", Scheme::Standard, 0, 0.1)).is_err());
        assert!(run(&RunConfig::new("working", Scheme::Naive, 0, 0.1)).is_err());
        assert!(run(&RunConfig::new("naive", Scheme::Naive, 1, 0.1)).is_err());
        assert!(run(&RunConfig::new("working", Scheme::Standard, 0, -0.1)).is_err());
        let mut cfg = RunConfig::new("working", Scheme::Standard, 0, 0.1);
        cfg.quad_points = 0;
        assert!(run(&cfg).is_err());
    }

    #[test]
    fn solver_failure_keeps_partial_trajectory() {
        let mut cfg = RunConfig::new("noproject", Scheme::Standard, 0, 6.25);
        cfg.t_end = Some(12.5);
        let out = run(&cfg).unwrap();
        let f = out
            .failure
            .clone()
            .expect("standard scheme fails at this step size");
        assert_eq!(out.trajectory.completed(), f.element);
    }
}
