//! Catalog of model problems: weak forms, symmetry groups, frames, initial
//! data and exact solutions.

pub mod forms;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::galerkin::WeakForm;
use crate::group::{
    ExponentialScaling, GroupAction, GroupElement, HomogeneousSolution, MobiusAction, MovingFrame,
    NonProjectableAction, ProjectiveTime, QuasiLinearAction, Superposition,
};

use forms::{
    Coefficient, InverseCubeStandard, LinearSecondOrder, NaiveInvariant, NaiveLinearized,
    NonProjectableInvariant, NonProjectableStandard, QuasiLinearInvariant, QuasiLinearStandard,
    ScalingInvariant, ScalingStandard, SchwarzianInvariant, SchwarzianStandard,
};

/// Highest test degree accepted by the catalog.
pub const MAX_Q: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Standard,
    Invariant,
    /// Lifted base form solved together with frozen per-element normalizations.
    Augmented,
    Naive,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Standard => "standard",
            Scheme::Invariant => "invariant",
            Scheme::Augmented => "augmented",
            Scheme::Naive => "naive",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Scheme::Standard),
            "invariant" => Ok(Scheme::Invariant),
            "augmented" => Ok(Scheme::Augmented),
            "naive" => Ok(Scheme::Naive),
            other => Err(Error::Parameter(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Closed-form solution returning `(u(t), u'(t))`.
#[derive(Clone)]
pub struct ExactSolution(Arc<dyn Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync>);

impl ExactSolution {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    pub fn value(&self, t: f64) -> Vec<f64> {
        (self.0)(t).0
    }

    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        (self.0)(t)
    }
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ExactSolution(..)")
    }
}

/// Group-dependent row recombination applied after lifting. Invertible, so the
/// zero set of the functional is unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reduction {
    None,
    /// `row[target] −= params[param] · row[source]`.
    SubtractScaledRow {
        target: usize,
        source: usize,
        param: usize,
    },
}

impl Reduction {
    /// Recombine the rows of a residual laid out as `row * stride + k`.
    pub fn apply(&self, g: &GroupElement, residual: &mut [f64], stride: usize) {
        if let Reduction::SubtractScaledRow {
            target,
            source,
            param,
        } = *self
        {
            let s = g.params[param];
            for k in 0..stride {
                residual[target * stride + k] -= s * residual[source * stride + k];
            }
        }
    }
}

#[derive(Clone)]
enum Kind {
    Scaling,
    Schwarzian(Coefficient),
    QuasiLinear,
    NonProjectable { c: f64 },
    Naive,
    Linear(LinearSecondOrder),
}

/// One model problem with its schemes and symmetry data.
#[derive(Clone)]
pub struct ProblemInstance {
    pub name: &'static str,
    pub n_eq: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub initial: Vec<f64>,
    pub exact: Option<ExactSolution>,
    pub action: Arc<dyn GroupAction>,
    pub frame: Option<Arc<dyn MovingFrame>>,
    pub reduction: Reduction,
    pub warning: Option<&'static str>,
    kind: Kind,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("n_eq", &self.n_eq)
            .field("domain", &(self.t_start, self.t_end))
            .field("initial", &self.initial)
            .field("action", &self.action.name())
            .finish()
    }
}

/// Problem names understood by [`by_name`].
pub const PROBLEM_NAMES: &[&str] = &[
    "working",
    "working-growth",
    "schwarzian",
    "quasilinear",
    "noproject",
    "naive",
    "linear2",
    "oscillator",
];

pub fn by_name(name: &str) -> Result<ProblemInstance> {
    match name {
        "working" => Ok(working_example()),
        "working-growth" => Ok(working_growth()),
        "schwarzian" => Ok(schwarzian()),
        "quasilinear" => Ok(quasi_linear()),
        "noproject" => Ok(non_projectable(1.0, 0.5)),
        "naive" => Ok(naive_linearised()),
        "linear2" => Ok(linear_default()),
        "oscillator" => Ok(harmonic_oscillator()),
        other => Err(Error::Parameter(format!(
            "unknown problem '{other}' (expected one of {})",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}

fn working_with(name: &'static str, initial: Vec<f64>, sign: f64, growth: bool) -> ProblemInstance {
    let rate = if growth { 1.0 } else { -1.0 };
    ProblemInstance {
        name,
        n_eq: 2,
        t_start: 0.0,
        t_end: 10.0,
        initial,
        exact: Some(ExactSolution::new(move |t| {
            let e = sign * (rate * t).exp();
            (vec![e, rate * e], vec![rate * e, e])
        })),
        action: Arc::new(ExponentialScaling),
        frame: Some(Arc::new(ExponentialScaling)),
        reduction: Reduction::SubtractScaledRow {
            target: 0,
            source: 1,
            param: 0,
        },
        warning: None,
        kind: Kind::Scaling,
    }
}

/// `y_tt = y_t²/y` as `{V_t = V²/U, U_t = V}`; decay data `(1, −1)` on `[0, 10]`,
/// exact `u = e^{−t}`.
pub fn working_example() -> ProblemInstance {
    working_with("working", vec![1.0, -1.0], 1.0, false)
}

/// Growth data `(−1, −1)`: exact `u = v = −e^{t}`.
pub fn working_growth() -> ProblemInstance {
    let mut p = working_with("working-growth", vec![-1.0, -1.0], -1.0, true);
    p.warning = Some(
        "solution grows exponentially; the element size must shrink exponentially with the end \
         time or Newton may diverge",
    );
    p
}

/// Schwarzian equation with `F = 0`, data `(1, −1, 1)` on `[0, 1000]`,
/// exact `u = 4/(2+t) − 1`.
pub fn schwarzian() -> ProblemInstance {
    ProblemInstance {
        name: "schwarzian",
        n_eq: 3,
        t_start: 0.0,
        t_end: 1000.0,
        initial: vec![1.0, -1.0, 1.0],
        exact: Some(ExactSolution::new(|t| {
            let s = 2.0 + t;
            let (s2, s3) = (s * s, s * s * s);
            (
                vec![4.0 / s - 1.0, -4.0 / s2, 8.0 / s3],
                vec![-4.0 / s2, 8.0 / s3, -24.0 / (s3 * s)],
            )
        })),
        action: Arc::new(MobiusAction),
        frame: Some(Arc::new(MobiusAction)),
        reduction: Reduction::None,
        warning: None,
        kind: Kind::Schwarzian(Arc::new(|_| 0.0)),
    }
}

/// Quasi-linear second-order problem, data `(1, 2)` at `t = 1` on `[1, 1000]`.
pub fn quasi_linear() -> ProblemInstance {
    ProblemInstance {
        name: "quasilinear",
        n_eq: 2,
        t_start: 1.0,
        t_end: 1000.0,
        initial: vec![1.0, 2.0],
        exact: Some(ExactSolution::new(|t| {
            let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
            let u = (t3 + 9.0 * t2 + 27.0 * t - 25.0) / (12.0 * t2);
            let v = (t3 - 27.0 * t + 50.0) / (12.0 * t3);
            let v_t = (27.0 * t - 75.0) / (6.0 * t4);
            (vec![u, v], vec![v, v_t])
        })),
        action: Arc::new(QuasiLinearAction),
        frame: Some(Arc::new(QuasiLinearAction)),
        reduction: Reduction::None,
        warning: None,
        kind: Kind::QuasiLinear,
    }
}

/// `u_t/(u − tu_t) = C`, `u(0) = y₀`, exact `u = y₀(Ct + 1)`.
pub fn non_projectable(c: f64, y0: f64) -> ProblemInstance {
    ProblemInstance {
        name: "noproject",
        n_eq: 1,
        t_start: 0.0,
        t_end: 10.0,
        initial: vec![y0],
        exact: Some(ExactSolution::new(move |t| {
            (vec![y0 * (c * t + 1.0)], vec![y0 * c])
        })),
        action: Arc::new(NonProjectableAction),
        frame: Some(Arc::new(NonProjectableAction)),
        reduction: Reduction::None,
        warning: None,
        kind: Kind::NonProjectable { c },
    }
}

/// `y_tt = y⁻³` with data `(√2, 1/√2)` on `[0, 10]`, exact `u = √(t² + 2t + 2)`.
pub fn naive_linearised() -> ProblemInstance {
    ProblemInstance {
        name: "naive",
        n_eq: 2,
        t_start: 0.0,
        t_end: 10.0,
        initial: vec![2f64.sqrt(), 0.5f64.sqrt()],
        exact: Some(ExactSolution::new(|t| {
            let r2 = t * t + 2.0 * t + 2.0;
            let r = r2.sqrt();
            let v = (t + 1.0) / r;
            (vec![r, v], vec![v, 1.0 / (r2 * r)])
        })),
        action: Arc::new(ProjectiveTime),
        frame: Some(Arc::new(ProjectiveTime)),
        reduction: Reduction::None,
        warning: None,
        kind: Kind::Naive,
    }
}

/// `y_tt + p y_t + q y = f` with superposition symmetry along the homogeneous
/// solutions `alpha`, `gamma`.
#[allow(clippy::too_many_arguments)]
pub fn linear_second_order(
    p: Coefficient,
    q: Coefficient,
    f: Coefficient,
    alpha: HomogeneousSolution,
    gamma: HomogeneousSolution,
    initial: Vec<f64>,
    domain: (f64, f64),
    exact: Option<ExactSolution>,
) -> ProblemInstance {
    ProblemInstance {
        name: "linear2",
        n_eq: 2,
        t_start: domain.0,
        t_end: domain.1,
        initial,
        exact,
        action: Arc::new(Superposition { alpha, gamma }),
        frame: None,
        reduction: Reduction::None,
        warning: None,
        kind: Kind::Linear(LinearSecondOrder { p, q, f }),
    }
}

/// `y_tt = 2`, `y(0) = y_t(0) = 0`, exact `u = t²`, with `α = 1`, `γ = t`.
pub fn linear_default() -> ProblemInstance {
    linear_second_order(
        Arc::new(|_| 0.0),
        Arc::new(|_| 0.0),
        Arc::new(|_| 2.0),
        HomogeneousSolution::new(|_| [1.0, 0.0, 0.0]),
        HomogeneousSolution::new(|t| [t, 1.0, 0.0]),
        vec![0.0, 0.0],
        (0.0, 10.0),
        Some(ExactSolution::new(|t| {
            (vec![t * t, 2.0 * t], vec![2.0 * t, 2.0])
        })),
    )
}

/// `y_tt + y = 0`, data `(1, 0)`, exact `u = cos t`.
pub fn harmonic_oscillator() -> ProblemInstance {
    let mut p = linear_second_order(
        Arc::new(|_| 0.0),
        Arc::new(|_| 1.0),
        Arc::new(|_| 0.0),
        HomogeneousSolution::new(|t: f64| [t.cos(), -t.sin(), -t.cos()]),
        HomogeneousSolution::new(|t: f64| [t.sin(), t.cos(), -t.sin()]),
        vec![1.0, 0.0],
        (0.0, 100.0),
        Some(ExactSolution::new(|t: f64| {
            (vec![t.cos(), -t.sin()], vec![-t.sin(), -t.cos()])
        })),
    );
    p.name = "oscillator";
    p
}

impl ProblemInstance {
    /// Schemes this problem provides.
    pub fn schemes(&self) -> Vec<Scheme> {
        match self.kind {
            Kind::Naive => vec![
                Scheme::Standard,
                Scheme::Invariant,
                Scheme::Augmented,
                Scheme::Naive,
            ],
            Kind::Linear(_) => vec![Scheme::Standard, Scheme::Invariant],
            _ => vec![Scheme::Standard, Scheme::Invariant, Scheme::Augmented],
        }
    }

    /// Check that `scheme` at test degree `q` is available.
    pub fn validate(&self, scheme: Scheme, q: usize) -> Result<()> {
        if !self.schemes().contains(&scheme) {
            return Err(Error::Parameter(format!(
                "problem '{}' has no {scheme} scheme",
                self.name
            )));
        }
        if q > MAX_Q {
            return Err(Error::Parameter(format!(
                "q = {q} exceeds the supported maximum {MAX_Q}"
            )));
        }
        let fixed_zero = matches!(self.kind, Kind::Naive)
            && matches!(
                scheme,
                Scheme::Naive | Scheme::Invariant | Scheme::Augmented
            );
        if fixed_zero && q != 0 {
            return Err(Error::Parameter(format!(
                "the {scheme} scheme of '{}' is defined for q = 0 only",
                self.name
            )));
        }
        if matches!(self.kind, Kind::NonProjectable { .. }) && scheme == Scheme::Invariant && q > 1
        {
            return Err(Error::Parameter(
                "the non-projectable invariant scheme is defined for q = 0 and q = 1".into(),
            ));
        }
        Ok(())
    }

    /// Weak form of `scheme`. For [`Scheme::Augmented`] this is the base form
    /// that gets lifted.
    pub fn weak_form(&self, scheme: Scheme, q: usize) -> Result<Arc<dyn WeakForm>> {
        self.validate(scheme, q)?;
        let wf: Arc<dyn WeakForm> = match (scheme, &self.kind) {
            (Scheme::Augmented, _) => return self.base_form(),
            (Scheme::Standard, Kind::Scaling) => Arc::new(ScalingStandard),
            (Scheme::Invariant, Kind::Scaling) => Arc::new(ScalingInvariant),
            (Scheme::Standard, Kind::Schwarzian(f)) => {
                Arc::new(SchwarzianStandard { forcing: f.clone() })
            }
            (Scheme::Invariant, Kind::Schwarzian(f)) => {
                Arc::new(SchwarzianInvariant { forcing: f.clone() })
            }
            (Scheme::Standard, Kind::QuasiLinear) => Arc::new(QuasiLinearStandard),
            (Scheme::Invariant, Kind::QuasiLinear) => Arc::new(QuasiLinearInvariant),
            (Scheme::Standard, Kind::NonProjectable { c }) => {
                Arc::new(NonProjectableStandard { c: *c })
            }
            (Scheme::Invariant, Kind::NonProjectable { c }) => {
                Arc::new(NonProjectableInvariant { c: *c, q })
            }
            (Scheme::Standard, Kind::Naive) => Arc::new(InverseCubeStandard),
            (Scheme::Invariant, Kind::Naive) => Arc::new(NaiveInvariant),
            (Scheme::Naive, Kind::Naive) => Arc::new(NaiveLinearized),
            (Scheme::Standard | Scheme::Invariant, Kind::Linear(l)) => Arc::new(l.clone()),
            _ => unreachable!("validated above"),
        };
        Ok(wf)
    }

    /// The non-invariant form that the invariant scheme is derived from.
    pub fn base_form(&self) -> Result<Arc<dyn WeakForm>> {
        match self.kind {
            Kind::Naive => Ok(Arc::new(NaiveLinearized)),
            _ => self.weak_form(Scheme::Standard, 0),
        }
    }

    /// Scheme whose lack of invariance is compared against the invariant one.
    pub fn non_invariant_scheme(&self) -> Option<Scheme> {
        match self.kind {
            Kind::Naive => Some(Scheme::Naive),
            Kind::Linear(_) => None,
            _ => Some(Scheme::Standard),
        }
    }

    /// Apply the problem's row recombination for group element `g` to a
    /// residual laid out as `row * stride + k`.
    pub fn reduce(&self, g: &GroupElement, residual: &mut [f64], stride: usize) {
        self.reduction.apply(g, residual, stride);
    }

    /// Exact solution, or a parameter error if none is known.
    pub fn exact(&self) -> Result<&ExactSolution> {
        self.exact.as_ref().ok_or_else(|| {
            Error::Parameter(format!("problem '{}' has no exact solution", self.name))
        })
    }

    pub fn frame(&self) -> Result<&Arc<dyn MovingFrame>> {
        self.frame
            .as_ref()
            .ok_or_else(|| Error::Parameter(format!("problem '{}' has no moving frame", self.name)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_row(wf: &dyn WeakForm, t: f64, u: &[f64], du: &[f64]) -> f64 {
        let mut out = vec![0.0; wf.n_eq()];
        wf.residual(t, u, du, &mut out).unwrap();
        out.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    #[test]
    fn exact_solutions_match_initial_data() {
        for name in PROBLEM_NAMES {
            let p = by_name(name).unwrap();
            let u0 = p.exact().unwrap().value(p.t_start);
            for (a, b) in u0.iter().zip(&p.initial) {
                assert!((a - b).abs() < 1e-14, "{name}");
            }
        }
        assert_eq!(schwarzian().exact().unwrap().value(0.0)[0], 1.0);
        assert!((quasi_linear().exact().unwrap().value(1.0)[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn every_scheme_is_consistent_except_naive() {
        for name in PROBLEM_NAMES {
            let p = by_name(name).unwrap();
            let exact = p.exact().unwrap();
            // The augmented entry is the raw base form before lifting.
            for scheme in p.schemes().into_iter().filter(|s| *s != Scheme::Augmented) {
                let wf = p.weak_form(scheme, 0).unwrap();
                for i in 0..=20 {
                    let t = p.t_start + (p.t_end - p.t_start).min(20.0) * i as f64 / 20.0;
                    let (u, du) = exact.eval(t);
                    let r = max_row(wf.as_ref(), t, &u, &du);
                    if scheme == Scheme::Naive {
                        if i == 0 {
                            assert!(r >= 0.1, "naive residual {r}");
                        }
                    } else {
                        assert!(r < 1e-10, "{name} {scheme} t={t} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn capability_checks() {
        let naive = naive_linearised();
        assert!(naive.validate(Scheme::Naive, 1).is_err());
        assert!(naive.validate(Scheme::Standard, 2).is_ok());
        assert!(working_example().validate(Scheme::Naive, 0).is_err());
        assert!(non_projectable(1.0, 0.5)
            .validate(Scheme::Invariant, 2)
            .is_err());
        assert!(linear_default().validate(Scheme::Augmented, 0).is_err());
        assert!("bogus".parse::<Scheme>().is_err());
        assert!(by_name("nope").is_err());
    }

    #[test]
    fn working_invariant_rows_are_scaled_standard_rows() {
        let (s, i) = (ScalingStandard, ScalingInvariant);
        let (u, du) = ([1.7, -0.4], [0.3, 2.2]);
        let mut a = [0.0; 2];
        let mut b = [0.0; 2];
        s.residual(0.5, &u, &du, &mut a).unwrap();
        i.residual(0.5, &u, &du, &mut b).unwrap();
        for k in 0..2 {
            assert!((b[k] - a[k] / u[0]).abs() < 1e-12);
        }
    }
}
