use crate::error::{Error, Result};
use crate::numerics::{lu_solve, DenseMatrix};

/// How the per-element Newton iteration is started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialGuess {
    /// Every unknown node takes the incoming left-endpoint value.
    #[default]
    Constant,
    /// Linear extension with the slope of the previous element at its right
    /// endpoint (constant on the first element).
    LinearExtrapolation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Absolute tolerance on the residual ∞-norm.
    pub tolerance: f64,
    /// Each component of the last correction must also satisfy
    /// `|δ_j| ≤ step_tolerance |x_j| + 4ε (1 + ‖x‖∞)`.
    pub step_tolerance: f64,
    pub max_iterations: usize,
    /// Residual norms above this count as divergence.
    pub divergence_threshold: f64,
    /// Step halvings allowed when a trial iterate cannot be evaluated.
    pub max_halvings: usize,
    /// Accept a residual no larger than `stall_residual` once the Newton
    /// correction drops to roundoff (`‖δ‖∞ ≤ 4ε(1 + ‖x‖∞)`).
    pub stall_residual: f64,
    pub guess: InitialGuess,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            step_tolerance: 1e-12,
            max_iterations: 50,
            divergence_threshold: 1e10,
            max_halvings: 10,
            stall_residual: 1e-9,
            guess: InitialGuess::Constant,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !(self.divergence_threshold > self.tolerance) {
            return Err(Error::Parameter(format!(
                "Newton tolerance must be positive and below the divergence threshold \
                 (tol={}, threshold={})",
                self.tolerance, self.divergence_threshold
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Parameter(
                "Newton needs at least one iteration".into(),
            ));
        }
        Ok(())
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(
        0.0,
        |m: f64, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) },
    )
}

fn non_convergence(iterations: usize, residual: f64, reason: impl Into<String>) -> Error {
    Error::NonConvergence {
        iterations,
        residual,
        reason: reason.into(),
    }
}

/// Forward-difference Jacobian with step `1e-7 (1 + |x_j|)`; a backward step is
/// tried where the forward point cannot be evaluated.
pub fn fd_jacobian<F>(f: &mut F, x: &[f64], fx: &[f64]) -> Result<DenseMatrix>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let m = fx.len();
    let mut jac = DenseMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = 1e-7 * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let (fp, step) = match f(&xp) {
            Ok(v) => (v, h),
            Err(_) => {
                xp[j] = x[j] - h;
                (f(&xp)?, -h)
            }
        };
        xp[j] = x[j];
        let col: Vec<f64> = fp.iter().zip(fx).map(|(a, b)| (a - b) / step).collect();
        jac.set_column(j, &col);
    }
    Ok(jac)
}

/// Damped Newton iteration for a square system `f(x) = 0`.
///
/// Fails with [`Error::NonConvergence`] on iteration exhaustion, divergence,
/// non-finite iterates or a singular Jacobian.
pub fn newton_solve<F>(mut f: F, x0: &[f64], cfg: &NewtonConfig) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut x = x0.to_vec();
    let mut fx = f(&x).map_err(|e| non_convergence(0, f64::NAN, format!("initial guess: {e}")))?;
    if fx.len() != x.len() {
        return Err(Error::Parameter(format!(
            "Newton system is not square: {} equations, {} unknowns",
            fx.len(),
            x.len()
        )));
    }
    let mut res = norm_inf(&fx);
    let mut settled = true;
    for it in 0..cfg.max_iterations {
        if res <= cfg.tolerance && settled {
            return Ok(x);
        }
        if !res.is_finite() || res > cfg.divergence_threshold {
            return Err(non_convergence(it, res, "residual diverged"));
        }
        let jac = fd_jacobian(&mut f, &x, &fx)
            .map_err(|e| non_convergence(it, res, format!("Jacobian evaluation: {e}")))?;
        let rhs: Vec<f64> = fx.iter().map(|v| -v).collect();
        let delta = lu_solve(&jac, &rhs)
            .map_err(|e| non_convergence(it, res, format!("linear solve: {e}")))?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            if trial.iter().all(|v| v.is_finite()) {
                if let Ok(ft) = f(&trial) {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((xn, fxn)) = accepted else {
            return Err(non_convergence(
                it + 1,
                res,
                "no evaluable point along the Newton direction",
            ));
        };
        let step = lambda * norm_inf(&delta);
        let floor = 4.0 * f64::EPSILON * (1.0 + norm_inf(&xn));
        settled = delta
            .iter()
            .zip(&xn)
            .all(|(d, v)| (lambda * d).abs() <= cfg.step_tolerance * v.abs() + floor);
        x = xn;
        fx = fxn;
        res = norm_inf(&fx);
        if res > cfg.tolerance
            && res <= cfg.stall_residual
            && step <= 4.0 * f64::EPSILON * (1.0 + norm_inf(&x))
        {
            return Ok(x);
        }
    }
    if res <= cfg.tolerance {
        return Ok(x);
    }
    Err(non_convergence(
        cfg.max_iterations,
        res,
        "iteration limit reached",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_scalar_quadratic() {
        let x = newton_solve(
            |x| Ok(vec![x[0] * x[0] - 2.0]),
            &[1.0],
            &NewtonConfig::default(),
        )
        .unwrap();
        assert!((x[0] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn solves_coupled_system() {
        // x + y = 3, x y = 2 near (0.8, 2.2) -> (1, 2).
        let x = newton_solve(
            |x| Ok(vec![x[0] + x[1] - 3.0, x[0] * x[1] - 2.0]),
            &[0.8, 2.2],
            &NewtonConfig::default(),
        )
        .unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reports_iteration_exhaustion() {
        let cfg = NewtonConfig {
            max_iterations: 3,
            ..NewtonConfig::default()
        };
        // No real root.
        let err = newton_solve(|x| Ok(vec![x[0] * x[0] + 1.0]), &[0.3], &cfg).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn halving_recovers_from_domain_violation() {
        // sqrt(x) - 1 from x = 4 overshoots to a negative first step without damping.
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                Err(Error::Evaluation {
                    t: 0.0,
                    u: x.to_vec(),
                })
            } else {
                Ok(vec![x[0].sqrt() - 1.5 + 0.5 * x[0] * x[0]])
            }
        };
        let x = newton_solve(f, &[0.01], &NewtonConfig::default()).unwrap();
        assert!((x[0].sqrt() - 1.5 + 0.5 * x[0] * x[0]).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = NewtonConfig {
            tolerance: 0.0,
            ..NewtonConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(NewtonConfig::default().validate().is_ok());
    }
}
