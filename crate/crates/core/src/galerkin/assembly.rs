use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, LagrangeBasis, QuadratureRule};

use super::weak_form::{ElementContext, ElementState, WeakForm};

/// Default number of Gauss points per element.
pub const DEFAULT_QUADRATURE_POINTS: usize = 16;

/// Element assembler for test degree `q` (trial degree `q + 1`) with a fixed
/// quadrature rule. Basis tables at the quadrature points are built once.
#[derive(Debug, Clone)]
pub struct Assembler {
    q: usize,
    quad: QuadratureRule,
    test: LagrangeBasis,
    trial_values: Vec<Vec<f64>>,
    trial_derivatives: Vec<Vec<f64>>,
    test_values: Vec<Vec<f64>>,
}

impl Assembler {
    pub fn new(q: usize, quad: QuadratureRule) -> Self {
        let trial = LagrangeBasis::equispaced(q + 1);
        let test = LagrangeBasis::equispaced(q);
        let trial_values = quad.nodes().iter().map(|&s| trial.values(s)).collect();
        let trial_derivatives = quad.nodes().iter().map(|&s| trial.derivatives(s)).collect();
        let test_values = quad.nodes().iter().map(|&s| test.values(s)).collect();
        Self {
            q,
            quad,
            test,
            trial_values,
            trial_derivatives,
            test_values,
        }
    }

    /// Assembler with `points` Gauss–Legendre points.
    pub fn with_points(q: usize, points: usize) -> Result<Self> {
        Ok(Self::new(q, gauss_legendre(points)?))
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn test_basis(&self) -> &LagrangeBasis {
        &self.test
    }

    /// Element residual on polynomial trial data, length `n_eq * (q + 1)`,
    /// entry `i * (q + 1) + k`.
    pub fn residual(&self, wf: &dyn WeakForm, ctx: &ElementContext) -> Result<Vec<f64>> {
        if ctx.q() != self.q {
            return Err(Error::Parameter(format!(
                "element has q = {}, assembler q = {}",
                ctx.q(),
                self.q
            )));
        }
        self.accumulate(wf, ctx, ctx.t_left, ctx.tau, |g, _t, u, du| {
            ctx.eval_tabulated(&self.trial_values[g], &self.trial_derivatives[g], u, du);
            Ok(())
        })
    }

    /// Element residual on an arbitrary state (smooth curve, transformed curve).
    pub fn residual_on(&self, wf: &dyn WeakForm, state: &dyn ElementState) -> Result<Vec<f64>> {
        let (a, b) = state.interval();
        self.accumulate(wf, state, a, b - a, |_g, t, u, du| state.eval(t, u, du))
    }

    fn accumulate<F>(
        &self,
        wf: &dyn WeakForm,
        state: &dyn ElementState,
        t_left: f64,
        tau: f64,
        mut eval: F,
    ) -> Result<Vec<f64>>
    where
        F: FnMut(usize, f64, &mut [f64], &mut [f64]) -> Result<()>,
    {
        let n_eq = wf.n_eq();
        let nt = self.q + 1;
        let mut out = vec![0.0; n_eq * nt];
        let mut u = vec![0.0; n_eq];
        let mut du = vec![0.0; n_eq];
        let mut r = vec![0.0; n_eq];
        let mut w = vec![0.0; nt];
        let custom = wf.custom_test_weights();
        for (g, (s, wq)) in self.quad.iter().enumerate() {
            let t = t_left + tau * s;
            eval(g, t, &mut u, &mut du)?;
            wf.residual(t, &u, &du, &mut r)?;
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::Evaluation { t, u: u.clone() });
            }
            for k in 0..nt {
                let std = self.test_values[g][k];
                w[k] = if custom {
                    wf.test_weight(k, t, &u, state, std)?
                } else {
                    std
                };
            }
            let scale = wq * tau;
            for i in 0..n_eq {
                let ri = r[i] * scale;
                for k in 0..nt {
                    out[i * nt + k] += ri * w[k];
                }
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation { t: t_left, u });
        }
        Ok(out)
    }
}

/// Assemble the element residual of `wf` on `ctx` with quadrature `quad`.
pub fn assemble_element_residual(
    wf: &dyn WeakForm,
    ctx: &ElementContext,
    quad: &QuadratureRule,
) -> Result<Vec<f64>> {
    Assembler::new(ctx.q(), quad.clone()).residual(wf, ctx)
}
