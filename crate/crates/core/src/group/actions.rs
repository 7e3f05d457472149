use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{CrossSection, GroupAction, GroupElement, MovingFrame, PointJacobian, Target};
use crate::error::{Error, Result};

fn check(action: &dyn GroupAction, g: &GroupElement, u: &[f64]) -> Result<()> {
    if u.len() != action.n_components() {
        return Err(Error::Parameter(format!(
            "{} acts on {} components, got {}",
            action.name(),
            action.n_components(),
            u.len()
        )));
    }
    action.validate(g)
}

fn sample_box(rng: &mut dyn RngCore, radius: f64, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-radius..=radius)).collect()
}

/// `(t, U, V) ↦ (t, e^{at+b} U, (aU + V) e^{at+b})` with parameters `(a, b)`.
///
/// Composition is additive: the factors `e^{a₁t+b₁}` and `e^{a₂t+b₂}` multiply
/// and the shifted derivative picks up `a₁ + a₂`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExponentialScaling;

impl GroupAction for ExponentialScaling {
    fn name(&self) -> &'static str {
        "exponential-scaling"
    }
    fn dim(&self) -> usize {
        2
    }
    fn n_components(&self) -> usize {
        2
    }
    fn identity(&self) -> GroupElement {
        GroupElement::new(self.name(), vec![0.0, 0.0])
    }
    fn compose(&self, g2: &GroupElement, g1: &GroupElement) -> GroupElement {
        GroupElement::new(
            self.name(),
            vec![g1.params[0] + g2.params[0], g1.params[1] + g2.params[1]],
        )
    }
    fn inverse(&self, g: &GroupElement) -> GroupElement {
        GroupElement::new(self.name(), vec![-g.params[0], -g.params[1]])
    }
    fn act(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        check(self, g, u)?;
        let (a, b) = (g.params[0], g.params[1]);
        let e = (a * t + b).exp();
        Ok((t, vec![e * u[0], (a * u[0] + u[1]) * e]))
    }
    fn jacobian(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<PointJacobian> {
        let (th, uh) = self.act(g, t, u)?;
        let (a, b) = (g.params[0], g.params[1]);
        let e = (a * t + b).exp();
        Ok(PointJacobian {
            t: th,
            dt_dt: 1.0,
            dt_du: vec![0.0, 0.0],
            du_dt: vec![a * uh[0], a * uh[1]],
            du_du: vec![e, 0.0, a * e, e],
            u: uh,
        })
    }
    fn sample_near_identity(&self, rng: &mut dyn RngCore, radius: f64) -> GroupElement {
        GroupElement::new(self.name(), sample_box(rng, radius, 2))
    }
}

impl MovingFrame for ExponentialScaling {
    /// `a = −V/U`, `b = tV/U − ln|U|`.
    fn frame(&self, t: f64, u: &[f64]) -> Result<GroupElement> {
        if u[0] == 0.0 || !u[0].is_finite() {
            return Err(Error::Domain(format!("frame needs U != 0, got {}", u[0])));
        }
        let r = u[1] / u[0];
        Ok(GroupElement::new(
            self.name(),
            vec![-r, t * r - u[0].abs().ln()],
        ))
    }
    fn cross_section(&self) -> CrossSection {
        CrossSection::new(vec![(1, Target::SignOf(1)), (2, Target::Value(0.0))])
    }
}

/// Linear fractional action on the dependent variable of a third-order
/// equation written as `(U, V, W) = (u, u_t, u_tt)`:
/// `Û = (αU + β)/D`, `V̂ = V/D²`, `Ŵ = W/D² − 2γV²/D³`, `D = γU + δ`,
/// `αδ − βγ = 1`. Parameters `(α, β, γ, δ)`; composition is the matrix
/// product `M₂M₁`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MobiusAction;

fn mat_mul(m2: &[f64], m1: &[f64]) -> Vec<f64> {
    vec![
        m2[0] * m1[0] + m2[1] * m1[2],
        m2[0] * m1[1] + m2[1] * m1[3],
        m2[2] * m1[0] + m2[3] * m1[2],
        m2[2] * m1[1] + m2[3] * m1[3],
    ]
}

fn mat_inverse(m: &[f64]) -> Vec<f64> {
    let det = m[0] * m[3] - m[1] * m[2];
    vec![m[3] / det, -m[1] / det, -m[2] / det, m[0] / det]
}

/// Rescale a 2×2 matrix with positive determinant to determinant one.
fn sl2_from(name: &'static str, params: &[f64]) -> Result<GroupElement> {
    let det = params[0] * params[3] - params[1] * params[2];
    if !(det > 0.0) || params.len() != 4 {
        return Err(Error::Domain(format!(
            "{params:?} is not a positive-determinant 2x2 matrix"
        )));
    }
    let s = det.sqrt().recip();
    Ok(GroupElement::new(
        name,
        params.iter().map(|p| p * s).collect(),
    ))
}

fn sample_sl2(rng: &mut dyn RngCore, radius: f64) -> Vec<f64> {
    let r = radius.min(0.5);
    let p = sample_box(rng, r, 3);
    let (alpha, beta, gamma) = (1.0 + p[0], p[1], p[2]);
    vec![alpha, beta, gamma, (1.0 + beta * gamma) / alpha]
}

impl GroupAction for MobiusAction {
    fn name(&self) -> &'static str {
        "sl2-mobius"
    }
    fn dim(&self) -> usize {
        3
    }
    fn n_params(&self) -> usize {
        4
    }
    fn n_components(&self) -> usize {
        3
    }
    fn identity(&self) -> GroupElement {
        GroupElement::new(self.name(), vec![1.0, 0.0, 0.0, 1.0])
    }
    fn compose(&self, g2: &GroupElement, g1: &GroupElement) -> GroupElement {
        GroupElement::new(self.name(), mat_mul(&g2.params, &g1.params))
    }
    fn inverse(&self, g: &GroupElement) -> GroupElement {
        GroupElement::new(self.name(), mat_inverse(&g.params))
    }
    fn constraints(&self, g: &GroupElement) -> Vec<f64> {
        let m = &g.params;
        vec![m[0] * m[3] - m[1] * m[2] - 1.0]
    }
    fn double_cover(&self) -> bool {
        true
    }
    fn element_from(&self, params: &[f64]) -> Result<GroupElement> {
        sl2_from(self.name(), params)
    }
    fn act(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        check(self, g, u)?;
        let [al, be, ga, de] = [g.params[0], g.params[1], g.params[2], g.params[3]];
        let d = ga * u[0] + de;
        if d == 0.0 {
            return Err(Error::Domain(format!("γU + δ vanishes at U = {}", u[0])));
        }
        let d2 = d * d;
        Ok((
            t,
            vec![
                (al * u[0] + be) / d,
                u[1] / d2,
                u[2] / d2 - 2.0 * ga * u[1] * u[1] / (d2 * d),
            ],
        ))
    }
    fn jacobian(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<PointJacobian> {
        let (th, uh) = self.act(g, t, u)?;
        let [al, be, ga, de] = [g.params[0], g.params[1], g.params[2], g.params[3]];
        let d = ga * u[0] + de;
        let (d2, d3) = (d * d, d * d * d);
        let det = al * de - be * ga;
        let (v, w) = (u[1], u[2]);
        Ok(PointJacobian {
            t: th,
            dt_dt: 1.0,
            dt_du: vec![0.0; 3],
            du_dt: vec![0.0; 3],
            du_du: vec![
                det / d2,
                0.0,
                0.0,
                -2.0 * ga * v / d3,
                1.0 / d2,
                0.0,
                -2.0 * ga * w / d3 + 6.0 * ga * ga * v * v / (d3 * d),
                -4.0 * ga * v / d3,
                1.0 / d2,
            ],
            u: uh,
        })
    }
    fn sample_near_identity(&self, rng: &mut dyn RngCore, radius: f64) -> GroupElement {
        GroupElement::new(self.name(), sample_sl2(rng, radius))
    }
}

impl MovingFrame for MobiusAction {
    /// With `s = |V|^{1/2}`: `α = 1/s`, `β = −U/s`, `γ = ½Ws/V²`, `δ = s − γU`,
    /// which normalizes `(U, V, W)` to `(0, sign V, 0)`.
    fn frame(&self, _t: f64, u: &[f64]) -> Result<GroupElement> {
        let (uu, v, w) = (u[0], u[1], u[2]);
        if v == 0.0 || !v.is_finite() {
            return Err(Error::Domain(format!("frame needs V != 0, got {v}")));
        }
        let s = v.abs().sqrt();
        let gamma = 0.5 * w * s / (v * v);
        Ok(GroupElement::new(
            self.name(),
            vec![1.0 / s, -uu / s, gamma, s - uu * gamma],
        ))
    }
    fn cross_section(&self) -> CrossSection {
        CrossSection::new(vec![
            (1, Target::Value(0.0)),
            (2, Target::SignOf(2)),
            (3, Target::Value(0.0)),
        ])
    }
}

/// Affine time change with a compensating weight for a second-order equation,
/// `(U, V) = (u, u_t)`, parameters `(a, b)`:
/// `t̂ = eᵃt + b`, `Û = e^{3a} t² U / t̂²`, `V̂ = e^{2a} t² V / t̂² + 2 e^{2a} b t U / t̂³`.
///
/// Composing the time maps gives `(a₁ + a₂, e^{a₂} b₁ + b₂)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuasiLinearAction;

impl GroupAction for QuasiLinearAction {
    fn name(&self) -> &'static str {
        "quasi-linear-affine"
    }
    fn dim(&self) -> usize {
        2
    }
    fn n_components(&self) -> usize {
        2
    }
    fn identity(&self) -> GroupElement {
        GroupElement::new(self.name(), vec![0.0, 0.0])
    }
    fn compose(&self, g2: &GroupElement, g1: &GroupElement) -> GroupElement {
        let (a1, b1) = (g1.params[0], g1.params[1]);
        let (a2, b2) = (g2.params[0], g2.params[1]);
        GroupElement::new(self.name(), vec![a1 + a2, a2.exp() * b1 + b2])
    }
    fn inverse(&self, g: &GroupElement) -> GroupElement {
        let (a, b) = (g.params[0], g.params[1]);
        GroupElement::new(self.name(), vec![-a, -(-a).exp() * b])
    }
    fn act(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        check(self, g, u)?;
        let (a, b) = (g.params[0], g.params[1]);
        let e = a.exp();
        let d = e * t + b;
        if d == 0.0 {
            return Err(Error::Domain(format!(
                "transformed time vanishes at t = {t}"
            )));
        }
        let e2 = e * e;
        let d2 = d * d;
        Ok((
            d,
            vec![
                e2 * e * t * t * u[0] / d2,
                e2 * t * t * u[1] / d2 + 2.0 * e2 * b * t * u[0] / (d2 * d),
            ],
        ))
    }
    fn jacobian(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<PointJacobian> {
        let (th, uh) = self.act(g, t, u)?;
        let (a, b) = (g.params[0], g.params[1]);
        let e = a.exp();
        let e2 = e * e;
        let d = th;
        let (d2, d3) = (d * d, d * d * d);
        Ok(PointJacobian {
            t: th,
            dt_dt: e,
            dt_du: vec![0.0, 0.0],
            du_dt: vec![
                e2 * e * u[0] * 2.0 * t * b / d3,
                e2 * (2.0 * t * b * u[1] / d3 + 2.0 * b * u[0] * (d - 3.0 * e * t) / (d3 * d)),
            ],
            du_du: vec![
                e2 * e * t * t / d2,
                0.0,
                2.0 * e2 * b * t / d3,
                e2 * t * t / d2,
            ],
            u: uh,
        })
    }
    fn sample_near_identity(&self, rng: &mut dyn RngCore, radius: f64) -> GroupElement {
        GroupElement::new(self.name(), sample_box(rng, radius, 2))
    }
}

impl MovingFrame for QuasiLinearAction {
    /// With `S = U + ½tV`: `a = ln(|U|/S²)`, `b = −|U| t² V / (2S³)`.
    fn frame(&self, t: f64, u: &[f64]) -> Result<GroupElement> {
        let s = u[0] + 0.5 * t * u[1];
        if u[0] == 0.0 || s == 0.0 || t == 0.0 {
            return Err(Error::Domain(format!(
                "frame needs t != 0, U != 0 and U + tV/2 != 0 (t={t}, U={}, V={})",
                u[0], u[1]
            )));
        }
        let au = u[0].abs();
        Ok(GroupElement::new(
            self.name(),
            vec![(au / (s * s)).ln(), -au * t * t * u[1] / (2.0 * s * s * s)],
        ))
    }
    fn cross_section(&self) -> CrossSection {
        CrossSection::new(vec![(1, Target::SignOf(1)), (2, Target::Value(0.0))])
    }
}

/// Non-projectable action on `(t, U)`, parameters `(α, β)`:
/// `t̂ = t + αU`, `Û = e^β U`. Composition `(α₁ + α₂e^{β₁}, β₁ + β₂)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NonProjectableAction;

impl GroupAction for NonProjectableAction {
    fn name(&self) -> &'static str {
        "non-projectable"
    }
    fn dim(&self) -> usize {
        2
    }
    fn n_components(&self) -> usize {
        1
    }
    fn identity(&self) -> GroupElement {
        GroupElement::new(self.name(), vec![0.0, 0.0])
    }
    fn compose(&self, g2: &GroupElement, g1: &GroupElement) -> GroupElement {
        let (a1, b1) = (g1.params[0], g1.params[1]);
        let (a2, b2) = (g2.params[0], g2.params[1]);
        GroupElement::new(self.name(), vec![a1 + a2 * b1.exp(), b1 + b2])
    }
    fn inverse(&self, g: &GroupElement) -> GroupElement {
        let (a, b) = (g.params[0], g.params[1]);
        GroupElement::new(self.name(), vec![-a * (-b).exp(), -b])
    }
    fn act(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        check(self, g, u)?;
        let (a, b) = (g.params[0], g.params[1]);
        Ok((t + a * u[0], vec![b.exp() * u[0]]))
    }
    fn jacobian(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<PointJacobian> {
        let (th, uh) = self.act(g, t, u)?;
        Ok(PointJacobian {
            t: th,
            dt_dt: 1.0,
            dt_du: vec![g.params[0]],
            du_dt: vec![0.0],
            du_du: vec![g.params[1].exp()],
            u: uh,
        })
    }
    fn sample_near_identity(&self, rng: &mut dyn RngCore, radius: f64) -> GroupElement {
        GroupElement::new(self.name(), sample_box(rng, radius, 2))
    }
}

impl MovingFrame for NonProjectableAction {
    /// `α = −t/U`, `β = −ln|U|`.
    fn frame(&self, t: f64, u: &[f64]) -> Result<GroupElement> {
        if u[0] == 0.0 || !u[0].is_finite() {
            return Err(Error::Domain(format!("frame needs U != 0, got {}", u[0])));
        }
        Ok(GroupElement::new(
            self.name(),
            vec![-t / u[0], -u[0].abs().ln()],
        ))
    }
    fn cross_section(&self) -> CrossSection {
        CrossSection::new(vec![(0, Target::Value(0.0)), (1, Target::SignOf(1))])
    }
}

/// Projective time change on `(t, U, V)`, parameters `(α, β, γ, δ)` with
/// `αδ − βγ = 1`: `t̂ = (αt + β)/D`, `Û = U/D`, `V̂ = DV − γU`, `D = γt + δ`.
/// Composition is the matrix product `M₂M₁`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProjectiveTime;

impl GroupAction for ProjectiveTime {
    fn name(&self) -> &'static str {
        "sl2-projective-time"
    }
    fn dim(&self) -> usize {
        3
    }
    fn n_params(&self) -> usize {
        4
    }
    fn n_components(&self) -> usize {
        2
    }
    fn identity(&self) -> GroupElement {
        GroupElement::new(self.name(), vec![1.0, 0.0, 0.0, 1.0])
    }
    fn compose(&self, g2: &GroupElement, g1: &GroupElement) -> GroupElement {
        GroupElement::new(self.name(), mat_mul(&g2.params, &g1.params))
    }
    fn inverse(&self, g: &GroupElement) -> GroupElement {
        GroupElement::new(self.name(), mat_inverse(&g.params))
    }
    fn constraints(&self, g: &GroupElement) -> Vec<f64> {
        let m = &g.params;
        vec![m[0] * m[3] - m[1] * m[2] - 1.0]
    }
    fn double_cover(&self) -> bool {
        true
    }
    fn element_from(&self, params: &[f64]) -> Result<GroupElement> {
        sl2_from(self.name(), params)
    }
    fn act(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        check(self, g, u)?;
        let [al, be, ga, de] = [g.params[0], g.params[1], g.params[2], g.params[3]];
        let d = ga * t + de;
        if d == 0.0 {
            return Err(Error::Domain(format!("γt + δ vanishes at t = {t}")));
        }
        Ok(((al * t + be) / d, vec![u[0] / d, d * u[1] - ga * u[0]]))
    }
    fn jacobian(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<PointJacobian> {
        let (th, uh) = self.act(g, t, u)?;
        let [al, be, ga, de] = [g.params[0], g.params[1], g.params[2], g.params[3]];
        let d = ga * t + de;
        let det = al * de - be * ga;
        Ok(PointJacobian {
            t: th,
            dt_dt: det / (d * d),
            dt_du: vec![0.0, 0.0],
            du_dt: vec![-ga * u[0] / (d * d), ga * u[1]],
            du_du: vec![1.0 / d, 0.0, -ga, d],
            u: uh,
        })
    }
    fn sample_near_identity(&self, rng: &mut dyn RngCore, radius: f64) -> GroupElement {
        GroupElement::new(self.name(), sample_sl2(rng, radius))
    }
}

impl MovingFrame for ProjectiveTime {
    /// `α = 1/U`, `β = −t/U`, `γ = V`, `δ = U − tV`.
    fn frame(&self, t: f64, u: &[f64]) -> Result<GroupElement> {
        if u[0] == 0.0 || !u[0].is_finite() {
            return Err(Error::Domain(format!("frame needs U != 0, got {}", u[0])));
        }
        Ok(GroupElement::new(
            self.name(),
            vec![1.0 / u[0], -t / u[0], u[1], u[0] - t * u[1]],
        ))
    }
    fn cross_section(&self) -> CrossSection {
        CrossSection::new(vec![
            (0, Target::Value(0.0)),
            (1, Target::Value(1.0)),
            (2, Target::Value(0.0)),
        ])
    }
}

/// A solution of the homogeneous linear equation, returning
/// `[y(t), y'(t), y''(t)]`.
#[derive(Clone)]
pub struct HomogeneousSolution(pub Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>);

impl HomogeneousSolution {
    pub fn new<F: Fn(f64) -> [f64; 3] + Send + Sync + 'static>(f: F) -> Self {
        Self(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> [f64; 3] {
        (self.0)(t)
    }
}

impl fmt::Debug for HomogeneousSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("HomogeneousSolution(..)")
    }
}

/// Superposition of two homogeneous solutions on `(t, U, V)`, parameters
/// `(ε₁, ε₂)`: `Û = U + ε₁α + ε₂γ`, `V̂ = V + ε₁α_t + ε₂γ_t`.
#[derive(Debug, Clone)]
pub struct Superposition {
    pub alpha: HomogeneousSolution,
    pub gamma: HomogeneousSolution,
}

impl GroupAction for Superposition {
    fn name(&self) -> &'static str {
        "superposition"
    }
    fn dim(&self) -> usize {
        2
    }
    fn n_components(&self) -> usize {
        2
    }
    fn identity(&self) -> GroupElement {
        GroupElement::new(self.name(), vec![0.0, 0.0])
    }
    fn compose(&self, g2: &GroupElement, g1: &GroupElement) -> GroupElement {
        GroupElement::new(
            self.name(),
            vec![g1.params[0] + g2.params[0], g1.params[1] + g2.params[1]],
        )
    }
    fn inverse(&self, g: &GroupElement) -> GroupElement {
        GroupElement::new(self.name(), vec![-g.params[0], -g.params[1]])
    }
    fn act(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        check(self, g, u)?;
        let (e1, e2) = (g.params[0], g.params[1]);
        let a = self.alpha.eval(t);
        let c = self.gamma.eval(t);
        Ok((
            t,
            vec![u[0] + e1 * a[0] + e2 * c[0], u[1] + e1 * a[1] + e2 * c[1]],
        ))
    }
    fn jacobian(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<PointJacobian> {
        let (th, uh) = self.act(g, t, u)?;
        let (e1, e2) = (g.params[0], g.params[1]);
        let a = self.alpha.eval(t);
        let c = self.gamma.eval(t);
        Ok(PointJacobian {
            t: th,
            dt_dt: 1.0,
            dt_du: vec![0.0, 0.0],
            du_dt: vec![e1 * a[1] + e2 * c[1], e1 * a[2] + e2 * c[2]],
            du_du: vec![1.0, 0.0, 0.0, 1.0],
            u: uh,
        })
    }
    fn sample_near_identity(&self, rng: &mut dyn RngCore, radius: f64) -> GroupElement {
        GroupElement::new(self.name(), sample_box(rng, radius, 2))
    }
}
