//! Lifted weak-form functionals and invariance defects, plus the two generic
//! invariantization routes: substituting a moving frame pointwise, and
//! solving per-element normalizations together with the nodal unknowns.
//!
//! The lift of an element functional by `g` integrates the residual at the
//! prolonged point `g·Z⁽¹⁾`, times the test function on the node images
//! `g·t_j` and the measure `ω = (dt̂/dt) dt`. All quadrature is pulled back
//! to the original element.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::galerkin::{
    initial_guess, newton_solve, test_node_times, ElementContext, ElementState, IntegrationFailure,
    NewtonConfig, TimeMesh, Trajectory, WeakForm,
};
use crate::group::{prolong_point, CrossSection, GroupAction, GroupElement, MovingFrame};
use crate::numerics::{lagrange_value, QuadratureRule};
use crate::schemes::Reduction;

type CurveFn = dyn Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync;

/// Closed-form curve `t ↦ (u(t), u_t(t))` on an interval.
#[derive(Clone)]
pub struct SmoothCurve {
    n_eq: usize,
    interval: (f64, f64),
    f: Arc<CurveFn>,
}

impl fmt::Debug for SmoothCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothCurve")
            .field("n_eq", &self.n_eq)
            .field("interval", &self.interval)
            .finish()
    }
}

impl SmoothCurve {
    /// Builds the curve after checking the supplied derivative against
    /// central differences of the value at interior sample points.
    pub fn new<F>(n_eq: usize, interval: (f64, f64), f: F) -> Result<Self>
    where
        F: Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static,
    {
        let (a, b) = interval;
        if !(b > a) {
            return Err(Error::Parameter(format!("empty curve interval [{a}, {b}]")));
        }
        let h = 1e-5 * (b - a);
        for i in 1..=5 {
            let t = a + (b - a) * i as f64 / 6.0;
            let (u, du) = f(t);
            if u.len() != n_eq || du.len() != n_eq {
                return Err(Error::Parameter(format!(
                    "curve returns {} values and {} derivatives, expected {n_eq}",
                    u.len(),
                    du.len()
                )));
            }
            let (up, _) = f(t + h);
            let (um, _) = f(t - h);
            for j in 0..n_eq {
                let fd = (up[j] - um[j]) / (2.0 * h);
                if (fd - du[j]).abs() > 1e-6 * (1.0 + du[j].abs()) {
                    return Err(Error::Parameter(format!(
                        "curve derivative of component {j} at t = {t} is {} but differences give {fd}",
                        du[j]
                    )));
                }
            }
        }
        Ok(Self {
            n_eq,
            interval,
            f: Arc::new(f),
        })
    }

    pub fn on(&self, interval: (f64, f64)) -> Self {
        Self {
            interval,
            ..self.clone()
        }
    }
}

impl ElementState for SmoothCurve {
    fn n_eq(&self) -> usize {
        self.n_eq
    }

    fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn eval(&self, t: f64, u: &mut [f64], u_t: &mut [f64]) -> Result<()> {
        let (v, d) = (self.f)(t);
        u.copy_from_slice(&v);
        u_t.copy_from_slice(&d);
        Ok(())
    }
}

/// The image `g·Z` of an element state, parametrized by the transformed time.
pub struct TransformedState<'a> {
    base: &'a dyn ElementState,
    action: &'a dyn GroupAction,
    g: &'a GroupElement,
    interval: (f64, f64),
}

impl<'a> TransformedState<'a> {
    pub fn new(
        base: &'a dyn ElementState,
        action: &'a dyn GroupAction,
        g: &'a GroupElement,
    ) -> Result<Self> {
        let (a, b) = base.interval();
        let ta = action.act(g, a, &base.value(a)?)?.0;
        let tb = action.act(g, b, &base.value(b)?)?.0;
        if !(tb > ta) {
            return Err(Error::Fold {
                t: a,
                rate: tb - ta,
            });
        }
        Ok(Self {
            base,
            action,
            g,
            interval: (ta, tb),
        })
    }

    /// Original time `t` with `t̂(t) = t_hat`, by safeguarded Newton on the
    /// monotone map `t ↦ t̂`.
    pub fn preimage(&self, t_hat: f64) -> Result<f64> {
        let (a, b) = self.base.interval();
        let (ta, tb) = self.interval;
        if t_hat <= ta {
            return Ok(a);
        }
        if t_hat >= tb {
            return Ok(b);
        }
        let (mut lo, mut hi) = (a, b);
        let mut t = a + (b - a) * (t_hat - ta) / (tb - ta);
        let n = self.base.n_eq();
        let (mut u, mut du) = (vec![0.0; n], vec![0.0; n]);
        for _ in 0..100 {
            self.base.eval(t, &mut u, &mut du)?;
            let p = prolong_point(self.action, self.g, t, &u, &du)?;
            let f = p.t - t_hat;
            if f.abs() <= 4.0 * f64::EPSILON * t_hat.abs().max(1.0) {
                return Ok(t);
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let next = t - f / p.rate;
            t = if next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                return Ok(t);
            }
        }
        Ok(t)
    }
}

impl ElementState for TransformedState<'_> {
    fn n_eq(&self) -> usize {
        self.base.n_eq()
    }

    fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn eval(&self, t_hat: f64, u: &mut [f64], u_t: &mut [f64]) -> Result<()> {
        let t = self.preimage(t_hat)?;
        let n = self.base.n_eq();
        let (mut v, mut dv) = (vec![0.0; n], vec![0.0; n]);
        self.base.eval(t, &mut v, &mut dv)?;
        let p = prolong_point(self.action, self.g, t, &v, &dv)?;
        u.copy_from_slice(&p.u);
        u_t.copy_from_slice(&p.u_t);
        Ok(())
    }
}

/// Lifted element functional and the transformed element endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedFunctionalResult {
    /// Entry `i * (q + 1) + k`.
    pub residual: Vec<f64>,
    pub endpoints: (f64, f64),
}

/// Lift of the element functional of `wf` on `state` by `g`.
///
/// Fails with [`Error::Fold`] where `dt̂/dt ≤ 0` on the element.
pub fn lifted_functional(
    wf: &dyn WeakForm,
    action: &dyn GroupAction,
    g: &GroupElement,
    state: &dyn ElementState,
    q: usize,
    quad: &QuadratureRule,
) -> Result<LiftedFunctionalResult> {
    let n_eq = wf.n_eq();
    if state.n_eq() != n_eq {
        return Err(Error::Parameter(format!(
            "state has {} components, weak form {n_eq}",
            state.n_eq()
        )));
    }
    let (a, b) = state.interval();
    let tau = b - a;
    let nt = q + 1;
    let mut images = Vec::with_capacity(nt);
    for tj in test_node_times(q, a, b) {
        images.push(action.act(g, tj, &state.value(tj)?)?.0);
    }
    let transformed = if wf.custom_test_weights() {
        Some(TransformedState::new(state, action, g)?)
    } else {
        None
    };
    let mut out = vec![0.0; n_eq * nt];
    let (mut u, mut du) = (vec![0.0; n_eq], vec![0.0; n_eq]);
    let mut r = vec![0.0; n_eq];
    let mut w = vec![0.0; nt];
    for (s, wq) in quad.iter() {
        let t = a + tau * s;
        state.eval(t, &mut u, &mut du)?;
        let p = prolong_point(action, g, t, &u, &du)?;
        wf.residual(p.t, &p.u, &p.u_t, &mut r)?;
        for (k, wk) in w.iter_mut().enumerate() {
            let lifted = if q == 0 {
                1.0
            } else {
                lagrange_value(&images, k, p.t)
            };
            *wk = match &transformed {
                Some(ts) => wf.test_weight(k, p.t, &p.u, ts, lifted)?,
                None => lifted,
            };
        }
        let scale = wq * tau * p.rate;
        for i in 0..n_eq {
            for k in 0..nt {
                out[i * nt + k] += r[i] * w[k] * scale;
            }
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation {
            t: a,
            u: state.value(a)?,
        });
    }
    let ta = action.act(g, a, &state.value(a)?)?.0;
    let tb = action.act(g, b, &state.value(b)?)?.0;
    Ok(LiftedFunctionalResult {
        residual: out,
        endpoints: (ta, tb),
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
}

/// `max_g ‖R·lift_g − lift_id‖∞` over the samples, where `R` is the row
/// recombination `reduction` for `g`.
#[allow(clippy::too_many_arguments)]
pub fn invariance_defect(
    wf: &dyn WeakForm,
    action: &dyn GroupAction,
    reduction: Reduction,
    state: &dyn ElementState,
    q: usize,
    quad: &QuadratureRule,
    samples: &[GroupElement],
) -> Result<f64> {
    let base = lifted_functional(wf, action, &action.identity(), state, q, quad)?.residual;
    let mut worst = 0.0f64;
    for g in samples {
        let mut lifted = lifted_functional(wf, action, g, state, q, quad)?.residual;
        reduction.apply(g, &mut lifted, q + 1);
        worst = worst.max(max_abs_diff(&lifted, &base));
    }
    Ok(worst)
}

/// Up to `count` group elements within `radius` of the identity for which
/// the lift of `wf` on `state` can be evaluated. Inadmissible draws are
/// rejected; gives up after `50 * count` draws.
#[allow(clippy::too_many_arguments)]
pub fn admissible_samples(
    wf: &dyn WeakForm,
    action: &dyn GroupAction,
    state: &dyn ElementState,
    q: usize,
    quad: &QuadratureRule,
    rng: &mut dyn RngCore,
    radius: f64,
    count: usize,
) -> Vec<GroupElement> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..50 * count {
        if out.len() == count {
            break;
        }
        let g = action.sample_near_identity(rng, radius);
        if lifted_functional(wf, action, &g, state, q, quad).is_ok() {
            out.push(g);
        }
    }
    out
}

/// Weak form whose integrand at `t` is the lift of `base` by the moving
/// frame evaluated at `(t, u(t))`, including `ω` and the lifted test
/// functions.
#[derive(Clone)]
pub struct InvariantizedWeakForm {
    base: Arc<dyn WeakForm>,
    frame: Arc<dyn MovingFrame>,
    reduction: Reduction,
    q: usize,
}

impl fmt::Debug for InvariantizedWeakForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InvariantizedWeakForm")
            .field("frame", &self.frame.name())
            .field("q", &self.q)
            .finish()
    }
}

/// Substitute the frame of `frame` into the lift of `base`.
pub fn invariantize_pointwise(
    base: Arc<dyn WeakForm>,
    frame: Arc<dyn MovingFrame>,
    reduction: Reduction,
    q: usize,
) -> InvariantizedWeakForm {
    InvariantizedWeakForm {
        base,
        frame,
        reduction,
        q,
    }
}

impl WeakForm for InvariantizedWeakForm {
    fn n_eq(&self) -> usize {
        self.base.n_eq()
    }

    fn residual(&self, t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        let g = self.frame.frame(t, u)?;
        let p = prolong_point(self.frame.as_ref(), &g, t, u, u_t)?;
        self.base.residual(p.t, &p.u, &p.u_t, out)?;
        for v in out.iter_mut() {
            *v *= p.rate;
        }
        self.reduction.apply(&g, out, 1);
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
        let g = self.frame.frame(t, u)?;
        let (a, b) = state.interval();
        let mut images = Vec::with_capacity(self.q + 1);
        for tj in test_node_times(self.q, a, b) {
            images.push(self.frame.act(&g, tj, &state.value(tj)?)?.0);
        }
        let t_hat = self.frame.act(&g, t, u)?.0;
        Ok(lagrange_value(&images, k, t_hat))
    }

    fn custom_test_weights(&self) -> bool {
        self.q > 0
    }
}

/// Parameters `g` with `g·(t, u)` on the cross-section, found by Newton
/// from `guess` (constraints such as `det = 1` are solved alongside).
pub fn solve_normalization(
    action: &dyn GroupAction,
    cs: &CrossSection,
    t: f64,
    u: &[f64],
    guess: &GroupElement,
    cfg: &NewtonConfig,
) -> Result<GroupElement> {
    check_square(action, cs)?;
    let z: Vec<f64> = std::iter::once(t).chain(u.iter().copied()).collect();
    let x = newton_solve(
        |p| {
            let g = action.element_from(p)?;
            let mut eq = normalization_equations(action, cs, &z, &g)?;
            eq.extend(action.constraints(&GroupElement::new(action.name(), p.to_vec())));
            Ok(eq)
        },
        &guess.params,
        cfg,
    )?;
    action.element_from(&x)
}

fn check_square(action: &dyn GroupAction, cs: &CrossSection) -> Result<()> {
    let n_constraints = action.constraints(&action.identity()).len();
    if cs.len() + n_constraints != action.n_params() {
        return Err(Error::Parameter(format!(
            "{} normalizations and {n_constraints} constraints do not determine {} parameters",
            cs.len(),
            action.n_params()
        )));
    }
    Ok(())
}

fn normalization_equations(
    action: &dyn GroupAction,
    cs: &CrossSection,
    z: &[f64],
    g: &GroupElement,
) -> Result<Vec<f64>> {
    let (th, uh) = action.act(g, z[0], &z[1..])?;
    let image: Vec<f64> = std::iter::once(th).chain(uh).collect();
    Ok(cs.residuals(z, &image))
}

/// Trajectory of an augmented solve with the recovered group element of every
/// element.
#[derive(Debug, Clone)]
pub struct AugmentedRun {
    pub trajectory: Trajectory,
    pub params: Vec<GroupElement>,
}

/// March the lift of `wf` with the frame frozen at each element's left
/// endpoint. Every element solves the lifted residual, the normalizations at
/// `t_n` and the parameter constraints jointly for the nodal values and the
/// group parameters.
///
/// The parameter iteration starts from the previous element's parameters
/// (the identity on the first element), or from `seed` evaluated at the left
/// endpoint when a closed-form frame is supplied.
#[allow(clippy::too_many_arguments)]
pub fn integrate_augmented(
    wf: &dyn WeakForm,
    action: &dyn GroupAction,
    cs: &CrossSection,
    seed: Option<&dyn MovingFrame>,
    mesh: &TimeMesh,
    q: usize,
    initial: &[f64],
    cfg: &NewtonConfig,
    quad: &QuadratureRule,
) -> std::result::Result<AugmentedRun, Box<IntegrationFailure>> {
    let mut traj = Trajectory::new(mesh.clone(), q, initial);
    let fail = |traj: Trajectory, element, cause| {
        Box::new(IntegrationFailure {
            element,
            partial: traj,
            cause,
        })
    };
    if initial.len() != wf.n_eq() {
        let cause = Error::Parameter(format!(
            "{} initial values for a {}-component system",
            initial.len(),
            wf.n_eq()
        ));
        return Err(fail(traj, 0, cause));
    }
    if let Err(cause) = check_square(action, cs).and_then(|_| cfg.validate()) {
        return Err(fail(traj, 0, cause));
    }
    let mut params = Vec::with_capacity(mesh.n_elements());
    let mut g_prev = action.identity();
    for n in 0..mesh.n_elements() {
        let guess = initial_guess(&traj, n, cfg.guess);
        let g_guess = seed
            .and_then(|mf| mf.frame(guess.t_left, &guess.left_values()).ok())
            .unwrap_or_else(|| g_prev.clone());
        match solve_augmented_element(wf, action, cs, &guess, &g_guess, cfg, quad) {
            Ok((ctx, g)) => {
                traj.store_element(&ctx);
                g_prev = g.clone();
                params.push(g);
            }
            Err(cause) => return Err(fail(traj, n, cause)),
        }
    }
    Ok(AugmentedRun {
        trajectory: traj,
        params,
    })
}

fn solve_augmented_element(
    wf: &dyn WeakForm,
    action: &dyn GroupAction,
    cs: &CrossSection,
    guess: &ElementContext,
    g_guess: &GroupElement,
    cfg: &NewtonConfig,
    quad: &QuadratureRule,
) -> Result<(ElementContext, GroupElement)> {
    let q = guess.q();
    let n_nodal = guess.unknowns().len();
    let z: Vec<f64> = std::iter::once(guess.t_left)
        .chain(guess.left_values())
        .collect();
    // The normalizations involve only the known left values; solving them
    // first gives the joint iteration a consistent starting point.
    let g_start = solve_normalization(action, cs, z[0], &z[1..], g_guess, cfg)
        .unwrap_or_else(|_| g_guess.clone());
    let mut work = guess.clone();
    let mut x0 = guess.unknowns();
    x0.extend_from_slice(&g_start.params);
    let x = newton_solve(
        |x| {
            work.set_unknowns(&x[..n_nodal]);
            let raw = &x[n_nodal..];
            let g = action.element_from(raw)?;
            let mut eq = lifted_functional(wf, action, &g, &work, q, quad)?.residual;
            eq.extend(normalization_equations(action, cs, &z, &g)?);
            eq.extend(action.constraints(&GroupElement::new(action.name(), raw.to_vec())));
            Ok(eq)
        },
        &x0,
        cfg,
    )?;
    let mut ctx = guess.clone();
    ctx.set_unknowns(&x[..n_nodal]);
    Ok((ctx, action.element_from(&x[n_nodal..])?))
}

/// Invariance defect of the augmented scheme on one element:
/// `max_h ‖A(h·Z) − A(Z)‖∞` with `A(Z) = lift_{g*(Z)}(Z)` and `g*` the
/// normalization at the left endpoint. `A(h·Z)` is evaluated as the lift of
/// `Z` by `g*(h·Z)∘h`. As in [`integrate_augmented`], `seed` supplies
/// starting points for the normalization solves.
#[allow(clippy::too_many_arguments)]
pub fn augmented_defect(
    wf: &dyn WeakForm,
    action: &dyn GroupAction,
    cs: &CrossSection,
    seed: Option<&dyn MovingFrame>,
    state: &dyn ElementState,
    q: usize,
    quad: &QuadratureRule,
    samples: &[GroupElement],
    cfg: &NewtonConfig,
) -> Result<f64> {
    let (a, _) = state.interval();
    let ua = state.value(a)?;
    let start = |t: f64, u: &[f64], fallback: &GroupElement| {
        seed.and_then(|mf| mf.frame(t, u).ok())
            .unwrap_or_else(|| fallback.clone())
    };
    let g0 = solve_normalization(action, cs, a, &ua, &start(a, &ua, &action.identity()), cfg)?;
    let base = lifted_functional(wf, action, &g0, state, q, quad)?.residual;
    let mut worst = 0.0f64;
    for h in samples {
        let (ta, uah) = action.act(h, a, &ua)?;
        let gh = solve_normalization(action, cs, ta, &uah, &start(ta, &uah, &g0), cfg)?;
        let composed = action.compose(&gh, h);
        let lifted = lifted_functional(wf, action, &composed, state, q, quad)?.residual;
        worst = worst.max(max_abs_diff(&lifted, &base));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::Assembler;
    use crate::group::{ExponentialScaling, MobiusAction, NonProjectableAction};
    use crate::numerics::gauss_legendre;
    use crate::schemes::forms::{NonProjectableStandard, ScalingInvariant, ScalingStandard};
    use crate::schemes::working_example;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wavy(interval: (f64, f64), amp: f64) -> SmoothCurve {
        SmoothCurve::new(2, interval, move |t: f64| {
            let e = (-t).exp();
            (
                vec![e + amp * (3.0 * t).sin(), -e + amp * (2.0 * t).cos()],
                vec![
                    -e + 3.0 * amp * (3.0 * t).cos(),
                    e - 2.0 * amp * (2.0 * t).sin(),
                ],
            )
        })
        .unwrap()
    }

    fn g(action: &dyn GroupAction, p: &[f64]) -> GroupElement {
        GroupElement::new(action.name(), p.to_vec())
    }

    #[test]
    fn curve_derivative_is_checked() {
        let bad = SmoothCurve::new(1, (0.0, 1.0), |t| (vec![t * t], vec![t]));
        assert!(bad.is_err());
        assert!(SmoothCurve::new(1, (1.0, 1.0), |t| (vec![t], vec![1.0])).is_err());
    }

    #[test]
    fn identity_lift_matches_assembled_residual() {
        let quad = gauss_legendre(16).unwrap();
        for q in 0..=2 {
            let vals: Vec<Vec<f64>> = vec![
                (0..q + 2).map(|j| 1.0 + 0.1 * j as f64).collect(),
                (0..q + 2).map(|j| -1.0 + 0.05 * (j * j) as f64).collect(),
            ];
            let ctx = ElementContext::new(0, 0.3, 0.2, q, vals);
            let asm = Assembler::new(q, quad.clone());
            let expected = asm.residual(&ScalingStandard, &ctx).unwrap();
            let lifted = lifted_functional(
                &ScalingStandard,
                &ExponentialScaling,
                &ExponentialScaling.identity(),
                &ctx,
                q,
                &quad,
            )
            .unwrap();
            assert!(max_abs_diff(&lifted.residual, &expected) <= 1e-13);
            assert_eq!(lifted.endpoints, (0.3, 0.5));
        }
    }

    #[test]
    fn scaling_lift_has_closed_form_integrand() {
        // Rows become e^{at+b} (r₀ + a r₁, r₁).
        let act = ExponentialScaling;
        let (a, b) = (0.3, 0.1);
        let quad = gauss_legendre(16).unwrap();
        let curve = wavy((0.2, 0.6), 0.1);
        let lifted = lifted_functional(&ScalingStandard, &act, &g(&act, &[a, b]), &curve, 0, &quad)
            .unwrap()
            .residual;
        let (mut u, mut du, mut r) = (vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]);
        let mut expected = [0.0; 2];
        for (s, w) in quad.iter() {
            let t = 0.2 + 0.4 * s;
            curve.eval(t, &mut u, &mut du).unwrap();
            ScalingStandard.residual(t, &u, &du, &mut r).unwrap();
            let e = (a * t + b).exp();
            expected[0] += 0.4 * w * e * (r[0] + a * r[1]);
            expected[1] += 0.4 * w * e * r[1];
        }
        assert!(
            max_abs_diff(&lifted, &expected) <= 1e-11,
            "{lifted:?} {expected:?}"
        );
    }

    #[test]
    fn non_projectable_lift_picks_up_rate() {
        // Lifting by (α, β) multiplies the standard integrand by 1 + α U_t.
        let act = NonProjectableAction;
        let wf = NonProjectableStandard { c: 1.0 };
        let alpha = 0.2;
        let quad = gauss_legendre(16).unwrap();
        let curve = SmoothCurve::new(1, (0.0, 0.5), |t: f64| {
            (
                vec![0.5 + 0.4 * t + 0.05 * t.sin()],
                vec![0.4 + 0.05 * t.cos()],
            )
        })
        .unwrap();
        let lifted = lifted_functional(&wf, &act, &g(&act, &[alpha, 0.3]), &curve, 0, &quad)
            .unwrap()
            .residual;
        let expected = quad.integrate(0.0, 0.5, |t| {
            let (u, du) = (curve.value(t).unwrap()[0], 0.4 + 0.05 * t.cos());
            let mut r = [0.0];
            wf.residual(t, &[u], &[du], &mut r).unwrap();
            r[0] * (1.0 + alpha * du)
        });
        assert!((lifted[0] - expected).abs() <= 1e-13 * expected.abs().max(1.0));
    }

    #[test]
    fn transformed_state_inverts_time_map() {
        let act = NonProjectableAction;
        let curve = SmoothCurve::new(1, (0.0, 1.0), |t: f64| (vec![1.0 + t], vec![1.0])).unwrap();
        let h = g(&act, &[0.5, 0.0]);
        let ts = TransformedState::new(&curve, &act, &h).unwrap();
        assert_eq!(ts.interval(), (0.5, 2.0));
        for t in [0.1, 0.45, 0.9] {
            let t_hat = t + 0.5 * (1.0 + t);
            assert!((ts.preimage(t_hat).unwrap() - t).abs() < 1e-14);
            let u = ts.value(t_hat).unwrap();
            assert!((u[0] - (1.0 + t)).abs() < 1e-14);
        }
        // t̂ = t − 2(1 + t) reverses orientation.
        let fold = g(&act, &[-2.0, 0.0]);
        assert!(matches!(
            TransformedState::new(&curve, &act, &fold),
            Err(Error::Fold { .. })
        ));
    }

    #[test]
    fn defects_separate_the_schemes() {
        let act = ExponentialScaling;
        let quad = gauss_legendre(16).unwrap();
        let p = working_example();
        let curve = wavy((0.0, 0.5), 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples =
            admissible_samples(&ScalingInvariant, &act, &curve, 1, &quad, &mut rng, 0.5, 10);
        assert_eq!(samples.len(), 10);
        let inv = invariance_defect(
            &ScalingInvariant,
            &act,
            p.reduction,
            &curve,
            1,
            &quad,
            &samples,
        );
        let std = invariance_defect(
            &ScalingStandard,
            &act,
            p.reduction,
            &curve,
            1,
            &quad,
            &samples,
        );
        assert!(inv.unwrap() <= 1e-12);
        assert!(std.unwrap() >= 1e-3);
    }

    #[test]
    fn pointwise_route_reproduces_scaling_rows() {
        let p = working_example();
        let generic = invariantize_pointwise(
            Arc::new(ScalingStandard),
            Arc::new(ExponentialScaling),
            p.reduction,
            0,
        );
        let (t, u, du) = (0.7, [1.3, -0.4], [0.2, 0.9]);
        let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
        ScalingInvariant.residual(t, &u, &du, &mut a).unwrap();
        generic.residual(t, &u, &du, &mut b).unwrap();
        assert!(max_abs_diff(&a, &b) <= 1e-14);
    }

    #[test]
    fn normalization_reaches_cross_section() {
        let act = MobiusAction;
        let cs = act.cross_section();
        let cfg = NewtonConfig::default();
        let (t, u) = (0.4, [0.7, -1.2, 0.5]);
        let gm = solve_normalization(&act, &cs, t, &u, &act.identity(), &cfg).unwrap();
        let (_, image) = act.act(&gm, t, &u).unwrap();
        assert!(image[0].abs() < 1e-12 && (image[1] + 1.0).abs() < 1e-12 && image[2].abs() < 1e-12);
        let closed = act.frame(t, &u).unwrap();
        assert!(crate::group::param_distance(&act, &gm, &closed) < 1e-10);
    }

    #[test]
    fn augmented_elements_are_normalized_at_left_endpoints() {
        let p = working_example();
        let act = ExponentialScaling;
        let mesh = TimeMesh::uniform(0.0, 1.0, 8).unwrap();
        let quad = gauss_legendre(16).unwrap();
        let run = integrate_augmented(
            &ScalingStandard,
            &act,
            &act.cross_section(),
            None,
            &mesh,
            0,
            &p.initial,
            &NewtonConfig::default(),
            &quad,
        )
        .unwrap();
        assert_eq!(run.params.len(), 8);
        for (n, gn) in run.params.iter().enumerate() {
            let (t, _) = mesh.element(n);
            let (_, image) = act.act(gn, t, &run.trajectory.mesh_values(n)).unwrap();
            assert!(
                (image[0] - 1.0).abs() < 1e-12 && image[1].abs() < 1e-12,
                "{image:?}"
            );
        }
        // q = 0 with exponential scaling is exact at the nodes.
        let ex = p.exact().unwrap();
        for (t, u) in run.trajectory.nodal_series() {
            assert!((u[0] - ex.value(t)[0]).abs() < 1e-13);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn invariant_scaling_rows_have_no_defect(
            a in -0.5f64..0.5, b in -0.5f64..0.5, amp in 0.0f64..0.2, q in 0usize..3
        ) {
            let act = ExponentialScaling;
            let quad = gauss_legendre(16).unwrap();
            let curve = wavy((0.1, 0.4), amp);
            let d = invariance_defect(
                &ScalingInvariant,
                &act,
                working_example().reduction,
                &curve,
                q,
                &quad,
                &[g(&act, &[a, b])],
            )
            .unwrap();
            prop_assert!(d <= 1e-12, "defect {}", d);
        }
    }
}
