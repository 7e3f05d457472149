//! Lie point transformation groups acting on `(t, u)`, their prolongation to
//! curves, and moving frames defined by coordinate cross-sections.
//!
//! Composition follows the "apply `g1` first" convention:
//! `act(compose(g2, g1), z) == act(g2, act(g1, z))`.

mod actions;

pub use actions::{
    ExponentialScaling, HomogeneousSolution, MobiusAction, NonProjectableAction, ProjectiveTime,
    QuasiLinearAction, Superposition,
};

use rand::RngCore;

use crate::error::{Error, Result};

/// Group parameters tagged with the group they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub group: &'static str,
    pub params: Vec<f64>,
}

impl GroupElement {
    pub fn new(group: &'static str, params: Vec<f64>) -> Self {
        Self { group, params }
    }
}

/// Image of a point together with the Jacobian of the point map.
#[derive(Debug, Clone, PartialEq)]
pub struct PointJacobian {
    pub t: f64,
    pub u: Vec<f64>,
    /// ∂t̂/∂t
    pub dt_dt: f64,
    /// ∂t̂/∂u_j
    pub dt_du: Vec<f64>,
    /// ∂û_i/∂t
    pub du_dt: Vec<f64>,
    /// ∂û_i/∂u_j, row-major `n × n`.
    pub du_du: Vec<f64>,
}

/// A finite-dimensional group of point transformations of `(t, u_0, ..., u_m)`.
pub trait GroupAction: Send + Sync {
    fn name(&self) -> &'static str;

    /// Group dimension `r`.
    fn dim(&self) -> usize;

    /// Length of the parameter vector (larger than `r` when the parameters
    /// satisfy constraints, as for SL(2)).
    fn n_params(&self) -> usize {
        self.dim()
    }

    /// Number of dependent coordinates acted on.
    fn n_components(&self) -> usize;

    fn identity(&self) -> GroupElement;

    /// `g2 ∘ g1`: the transformation applying `g1` first.
    fn compose(&self, g2: &GroupElement, g1: &GroupElement) -> GroupElement;

    fn inverse(&self, g: &GroupElement) -> GroupElement;

    fn act(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<(f64, Vec<f64>)>;

    /// Image and closed-form partial derivatives of the point map.
    fn jacobian(&self, g: &GroupElement, t: f64, u: &[f64]) -> Result<PointJacobian>;

    /// Constraint values that vanish on valid parameters (e.g. `αδ − βγ − 1`).
    fn constraints(&self, _g: &GroupElement) -> Vec<f64> {
        Vec::new()
    }

    /// Element from unconstrained parameters, projected onto the constraint
    /// set. Used when parameters are iterated as free unknowns.
    fn element_from(&self, params: &[f64]) -> Result<GroupElement> {
        Ok(GroupElement::new(self.name(), params.to_vec()))
    }

    /// Parameters agree up to sign (SL(2) acting through its quotient).
    fn double_cover(&self) -> bool {
        false
    }

    /// Random element with parameters within `radius` of the identity.
    fn sample_near_identity(&self, rng: &mut dyn RngCore, radius: f64) -> GroupElement;

    fn validate(&self, g: &GroupElement) -> Result<()> {
        if g.group != self.name() || g.params.len() != self.n_params() {
            return Err(Error::Parameter(format!(
                "{} element with {} parameters does not belong to {} ({} parameters)",
                g.group,
                g.params.len(),
                self.name(),
                self.n_params()
            )));
        }
        if g.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parameter(format!(
                "non-finite group parameters {:?}",
                g.params
            )));
        }
        if let Some(c) = self.constraints(g).iter().find(|c| c.abs() > 1e-10) {
            return Err(Error::Parameter(format!(
                "group constraint violated by {c:e} for {:?}",
                g.params
            )));
        }
        Ok(())
    }
}

/// Normalization target of one cross-section coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Value(f64),
    /// The sign of the given coordinate of the untransformed point.
    SignOf(usize),
}

/// Coordinate cross-section: `(index into (t, u_0, ..., u_m), target)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub entries: Vec<(usize, Target)>,
}

impl CrossSection {
    pub fn new(entries: Vec<(usize, Target)>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Normalization residuals `(g·z)_j − target_j` given the point `z` and
    /// its image, both as `(t, u...)`.
    pub fn residuals(&self, z: &[f64], image: &[f64]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|&(j, target)| {
                let want = match target {
                    Target::Value(c) => c,
                    Target::SignOf(k) => {
                        if z[k] < 0.0 {
                            -1.0
                        } else {
                            1.0
                        }
                    }
                };
                image[j] - want
            })
            .collect()
    }
}

/// Closed-form right moving frame `ρ` with `ρ(z)·z ∈ K`.
pub trait MovingFrame: GroupAction {
    fn frame(&self, t: f64, u: &[f64]) -> Result<GroupElement>;

    fn cross_section(&self) -> CrossSection;

    fn admissible(&self, t: f64, u: &[f64]) -> bool {
        self.frame(t, u).is_ok()
    }
}

/// A point of a prolonged curve: `(t̂, û, dû/dt̂)` and the rate `dt̂/dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProlongedPoint {
    pub t: f64,
    pub u: Vec<f64>,
    pub u_t: Vec<f64>,
    pub rate: f64,
    /// `dû/dt` along the original parametrization.
    pub du_dt: Vec<f64>,
}

/// Transform the first-order jet `(t, u, u_t)` by `g` using implicit
/// differentiation: `û_t̂ = (dû/dt) / (dt̂/dt)`.
pub fn prolong_point(
    action: &dyn GroupAction,
    g: &GroupElement,
    t: f64,
    u: &[f64],
    u_t: &[f64],
) -> Result<ProlongedPoint> {
    let jac = action.jacobian(g, t, u)?;
    let n = u.len();
    let rate = jac.dt_dt + jac.dt_du.iter().zip(u_t).map(|(a, b)| a * b).sum::<f64>();
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::Fold { t, rate });
    }
    let du_dt: Vec<f64> = (0..n)
        .map(|i| jac.du_dt[i] + (0..n).map(|j| jac.du_du[i * n + j] * u_t[j]).sum::<f64>())
        .collect();
    let u_hat_t = du_dt.iter().map(|d| d / rate).collect();
    Ok(ProlongedPoint {
        t: jac.t,
        u: jac.u,
        u_t: u_hat_t,
        rate,
        du_dt,
    })
}

/// The transformed curve as a parametric map of the original time.
pub fn prolong_curve<'a, C>(
    action: &'a dyn GroupAction,
    g: &'a GroupElement,
    curve: C,
) -> impl Fn(f64) -> Result<ProlongedPoint> + 'a
where
    C: Fn(f64) -> Result<(Vec<f64>, Vec<f64>)> + 'a,
{
    move |t| {
        let (u, du) = curve(t)?;
        prolong_point(action, g, t, &u, &du)
    }
}

/// Central-difference Jacobian of the point map, for cross-checking the
/// closed forms.
pub fn fd_point_jacobian(
    action: &dyn GroupAction,
    g: &GroupElement,
    t: f64,
    u: &[f64],
    h: f64,
) -> Result<PointJacobian> {
    let n = u.len();
    let (t0, u0) = action.act(g, t, u)?;
    let (tp, up) = action.act(g, t + h, u)?;
    let (tm, um) = action.act(g, t - h, u)?;
    let dt_dt = (tp - tm) / (2.0 * h);
    let du_dt = (0..n).map(|i| (up[i] - um[i]) / (2.0 * h)).collect();
    let mut dt_du = vec![0.0; n];
    let mut du_du = vec![0.0; n * n];
    for j in 0..n {
        let mut p = u.to_vec();
        let mut m = u.to_vec();
        p[j] += h;
        m[j] -= h;
        let (tp, up) = action.act(g, t, &p)?;
        let (tm, um) = action.act(g, t, &m)?;
        dt_du[j] = (tp - tm) / (2.0 * h);
        for i in 0..n {
            du_du[i * n + j] = (up[i] - um[i]) / (2.0 * h);
        }
    }
    Ok(PointJacobian {
        t: t0,
        u: u0,
        dt_dt,
        dt_du,
        du_dt,
        du_du,
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
}

/// Distance between parameter vectors, modulo sign for double covers.
pub fn param_distance(action: &dyn GroupAction, a: &GroupElement, b: &GroupElement) -> f64 {
    let d = max_abs_diff(&a.params, &b.params);
    if action.double_cover() {
        let neg: Vec<f64> = b.params.iter().map(|v| -v).collect();
        d.min(max_abs_diff(&a.params, &neg))
    } else {
        d
    }
}

/// `‖ρ(g·z) − ρ(z)·g⁻¹‖∞`.
pub fn check_equivariance(
    mf: &dyn MovingFrame,
    t: f64,
    u: &[f64],
    g: &GroupElement,
) -> Result<f64> {
    let (tg, ug) = mf.act(g, t, u)?;
    let lhs = mf.frame(tg, &ug)?;
    let rhs = mf.compose(&mf.frame(t, u)?, &mf.inverse(g));
    Ok(param_distance(mf, &lhs, &rhs))
}

/// Largest deviation of `ρ(z)·z` from the cross-section targets.
pub fn check_cross_section(mf: &dyn MovingFrame, t: f64, u: &[f64]) -> Result<f64> {
    let g = mf.frame(t, u)?;
    let (th, uh) = mf.act(&g, t, u)?;
    let z: Vec<f64> = std::iter::once(t).chain(u.iter().copied()).collect();
    let image: Vec<f64> = std::iter::once(th).chain(uh).collect();
    Ok(mf
        .cross_section()
        .residuals(&z, &image)
        .iter()
        .fold(0.0, |m: f64, r| m.max(r.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_targets_follow_original_point() {
        let cs = CrossSection::new(vec![(1, Target::SignOf(1)), (2, Target::Value(0.0))]);
        assert_eq!(
            cs.residuals(&[0.0, -3.0, 1.0], &[0.0, -1.0, 0.0]),
            vec![0.0, 0.0]
        );
        assert_eq!(
            cs.residuals(&[0.0, 3.0, 1.0], &[0.0, -1.0, 0.5]),
            vec![-2.0, 0.5]
        );
    }

    #[test]
    fn fold_is_reported() {
        let act = NonProjectableAction;
        let g = GroupElement::new(act.name(), vec![-1.0, 0.0]);
        // dt̂/dt = 1 + α u_t = 0.
        let err = prolong_point(&act, &g, 0.0, &[1.0], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::Fold { .. }));
    }
}
