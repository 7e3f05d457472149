//! Pointwise integrands of the model problems. Each struct is one weak form;
//! rows are ordered as the components.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::galerkin::{test_node_times, ElementState, WeakForm};
use crate::numerics::lagrange_value;

/// `{V_t − V²/U, U_t − V}`: the standard form for `y_tt = y_t²/y`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalingStandard;

impl WeakForm for ScalingStandard {
    fn n_eq(&self) -> usize {
        2
    }
    fn residual(&self, _t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = u_t[1] - u[1] * u[1] / u[0];
        out[1] = u_t[0] - u[1];
        Ok(())
    }
}

/// `U⁻¹{V_t − V²/U, U_t − V}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalingInvariant;

impl WeakForm for ScalingInvariant {
    fn n_eq(&self) -> usize {
        2
    }
    fn residual(&self, _t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        let inv = 1.0 / u[0];
        out[0] = inv * (u_t[1] - inv * u[1] * u[1]);
        out[1] = inv * (u_t[0] - u[1]);
        Ok(())
    }
}

/// Schwarzian equation `W_t/V − 3/2 (W/V)² = F` with `U_t = V`, `V_t = W`.
#[derive(Clone)]
pub struct SchwarzianStandard {
    pub forcing: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

/// Invariantized Schwarzian rows.
#[derive(Clone)]
pub struct SchwarzianInvariant {
    pub forcing: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for SchwarzianStandard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SchwarzianStandard")
    }
}

impl fmt::Debug for SchwarzianInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SchwarzianInvariant")
    }
}

impl WeakForm for SchwarzianStandard {
    fn n_eq(&self) -> usize {
        3
    }
    fn residual(&self, t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        let (v, w) = (u[1], u[2]);
        let r = w / v;
        out[0] = u_t[2] / v - 1.5 * r * r - (self.forcing)(t);
        out[1] = u_t[0] - v;
        out[2] = u_t[1] - w;
        Ok(())
    }
}

impl WeakForm for SchwarzianInvariant {
    fn n_eq(&self) -> usize {
        3
    }
    fn residual(&self, t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        let (v, w) = (u[1], u[2]);
        let (v2, v3) = (v * v, v * v * v);
        out[0] = u_t[2] / v - 2.0 * u_t[1] * w / v2 + 0.5 * u_t[0] * w * w / v3 - (self.forcing)(t);
        out[1] = (u_t[0] - v) / v;
        out[2] = (u_t[1] - w) / v + w * (v2 - v * u_t[0]) / v3;
        Ok(())
    }
}

/// `{t²V_t + 4tU_t + 2U − (2tU + t²U_t)^{1/2}, U_t − V}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuasiLinearStandard;

impl WeakForm for QuasiLinearStandard {
    fn n_eq(&self) -> usize {
        2
    }
    fn residual(&self, t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        let root = (2.0 * t * u[0] + t * t * u_t[0]).sqrt();
        out[0] = t * t * u_t[1] + 4.0 * t * u_t[0] + 2.0 * u[0] - root;
        out[1] = u_t[0] - u[1];
        Ok(())
    }
}

/// Invariant quasi-linear rows with `S = U + tV/2`:
/// `U/S⁴ [U(t²V_t + 4tU_t + 2U − (t²U_t + 2tU)^{1/2}) − t²V(V − U_t)]`, `U⁻¹(U_t − V)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuasiLinearInvariant;

impl WeakForm for QuasiLinearInvariant {
    fn n_eq(&self) -> usize {
        2
    }
    fn residual(&self, t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        let (uu, v) = (u[0], u[1]);
        let s = uu + 0.5 * t * v;
        let s2 = s * s;
        let root = (t * t * u_t[0] + 2.0 * t * uu).sqrt();
        let bracket =
            uu * (t * t * u_t[1] + 4.0 * t * u_t[0] + 2.0 * uu - root) - t * t * v * (v - u_t[0]);
        out[0] = uu / (s2 * s2) * bracket;
        out[1] = (u_t[0] - v) / uu;
        Ok(())
    }
}

/// `U_t/(U − tU_t) − C`.
#[derive(Debug, Clone, Copy)]
pub struct NonProjectableStandard {
    pub c: f64,
}

impl WeakForm for NonProjectableStandard {
    fn n_eq(&self) -> usize {
        1
    }
    fn residual(&self, t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = u_t[0] / (u[0] - t * u_t[0]) - self.c;
        Ok(())
    }
}

/// `(U_t − C(U − tU_t))/U`. For `q ≥ 1` the test functions are the modified
/// weights `M_k(t) = ℓ_k(0)` on the nodes `t_j − t U(t_j)/U(t)`.
#[derive(Debug, Clone, Copy)]
pub struct NonProjectableInvariant {
    pub c: f64,
    pub q: usize,
}

impl NonProjectableInvariant {
    /// Modified weight `M_k` at `t` for the element held by `state`.
    pub fn modified_weight(
        &self,
        k: usize,
        t: f64,
        u_at_t: f64,
        state: &dyn ElementState,
    ) -> Result<f64> {
        let (a, b) = state.interval();
        let mut shifted = Vec::with_capacity(self.q + 1);
        for tj in test_node_times(self.q, a, b) {
            let uj = state.value(tj)?[0];
            shifted.push(tj - t * uj / u_at_t);
        }
        Ok(lagrange_value(&shifted, k, 0.0))
    }
}

impl WeakForm for NonProjectableInvariant {
    fn n_eq(&self) -> usize {
        1
    }
    fn residual(&self, t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = (u_t[0] - self.c * (u[0] - t * u_t[0])) / u[0];
        Ok(())
    }
    fn test_weight(
        &self,
        k: usize,
        t: f64,
        u: &[f64],
        state: &dyn ElementState,
        standard: f64,
    ) -> Result<f64> {
        if self.q == 0 {
            return Ok(standard);
        }
        self.modified_weight(k, t, u[0], state)
    }
    fn custom_test_weights(&self) -> bool {
        self.q > 0
    }
}

/// `{V_t − U, U_t − V}`: deliberately inconsistent discretization of
/// `y_tt = y⁻³`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveLinearized;

impl WeakForm for NaiveLinearized {
    fn n_eq(&self) -> usize {
        2
    }
    fn residual(&self, _t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = u_t[1] - u[0];
        out[1] = u_t[0] - u[1];
        Ok(())
    }
}

/// `{V_t U − U⁻² + V(V − U_t), (U_t − V)/U}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveInvariant;

impl WeakForm for NaiveInvariant {
    fn n_eq(&self) -> usize {
        2
    }
    fn residual(&self, _t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        let (uu, v) = (u[0], u[1]);
        out[0] = u_t[1] * uu - 1.0 / (uu * uu) + v * (v - u_t[0]);
        out[1] = (u_t[0] - v) / uu;
        Ok(())
    }
}

/// `{V_t − U⁻³, U_t − V}`: consistent discretization of `y_tt = y⁻³`.
#[derive(Debug, Clone, Copy, Default)]
pub struct InverseCubeStandard;

impl WeakForm for InverseCubeStandard {
    fn n_eq(&self) -> usize {
        2
    }
    fn residual(&self, _t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        let uu = u[0];
        out[0] = u_t[1] - 1.0 / (uu * uu * uu);
        out[1] = u_t[0] - u[1];
        Ok(())
    }
}

pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `{V_t + p(t)V + q(t)U − f(t), U_t − V}`.
#[derive(Clone)]
pub struct LinearSecondOrder {
    pub p: Coefficient,
    pub q: Coefficient,
    pub f: Coefficient,
}

impl fmt::Debug for LinearSecondOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LinearSecondOrder")
    }
}

impl WeakForm for LinearSecondOrder {
    fn n_eq(&self) -> usize {
        2
    }
    fn residual(&self, t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = u_t[1] + (self.p)(t) * u[1] + (self.q)(t) * u[0] - (self.f)(t);
        out[1] = u_t[0] - u[1];
        Ok(())
    }
}
