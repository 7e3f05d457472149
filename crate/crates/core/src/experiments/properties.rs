//! Property checks for claims that have no tabulated reference values.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::galerkin::{integrate, Assembler, NewtonConfig, TimeMesh, WeakForm};
use crate::group::{
    check_cross_section, check_equivariance, ExponentialScaling, MobiusAction, MovingFrame,
    NonProjectableAction, ProjectiveTime, QuasiLinearAction,
};
use crate::invariance::{
    admissible_samples, augmented_defect, invariance_defect, invariantize_pointwise, SmoothCurve,
};
use crate::numerics::gauss_legendre;
use crate::schemes::{by_name, linear_default, ProblemInstance, Scheme, PROBLEM_NAMES};

use super::{convergence_study, energy_drift, quadrature_equivalence, RunConfig};

/// Result of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl PropertyOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }

    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

impl fmt::Display for PropertyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {}: {}", self.name, self.detail)
    }
}

/// The problem's exact solution plus `0.05 (1 + j) sin(3t + j)` in component
/// `j`, scaled by the size of the initial data, on `[t_start, t_start + length]`.
pub fn perturbed_exact_curve(problem: &ProblemInstance, length: f64) -> Result<SmoothCurve> {
    let exact = problem.exact()?.clone();
    let t0 = problem.t_start;
    let scale: Vec<f64> = exact.value(t0).iter().map(|v| v.abs().max(1e-3)).collect();
    SmoothCurve::new(problem.n_eq, (t0, t0 + length), move |t| {
        let (mut u, mut du) = exact.eval(t);
        for j in 0..u.len() {
            let (amp, phase) = (0.05 * (1.0 + j as f64) * scale[j], 3.0 * t + j as f64);
            u[j] += amp * phase.sin();
            du[j] += 3.0 * amp * phase.cos();
        }
        (u, du)
    })
}

fn frames() -> Vec<Box<dyn MovingFrame>> {
    vec![
        Box::new(ExponentialScaling),
        Box::new(MobiusAction),
        Box::new(QuasiLinearAction),
        Box::new(NonProjectableAction),
        Box::new(ProjectiveTime),
    ]
}

/// Cross-section and equivariance defects of every closed-form frame over
/// 100 random points and group elements each.
pub fn frame_property(seed: u64) -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = (|| {
        let mut detail = Vec::new();
        let mut worst = 0.0f64;
        for mf in frames() {
            let (mut cs, mut eq) = (0.0f64, 0.0f64);
            for _ in 0..100 {
                let t = rng.gen_range(0.5..2.0);
                let u: Vec<f64> = (0..mf.n_components())
                    .map(|_| rng.gen_range(0.5..2.0))
                    .collect();
                let g = mf.sample_near_identity(&mut rng, 0.2);
                cs = cs.max(check_cross_section(mf.as_ref(), t, &u)?);
                eq = eq.max(check_equivariance(mf.as_ref(), t, &u, &g)?);
            }
            worst = worst.max(cs).max(eq);
            detail.push(format!("{} {:.1e}/{:.1e}", mf.name(), cs, eq));
        }
        Ok((worst <= 1e-9, detail.join(", ")))
    })();
    PropertyOutcome::from_result("frame cross-section and equivariance", r)
}

/// Largest invariance defect of `scheme` at degree `q` over two sub-intervals
/// of the perturbed exact curve.
fn scheme_defect(
    p: &ProblemInstance,
    curve: &SmoothCurve,
    scheme: Scheme,
    q: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let quad = gauss_legendre(16)?;
    let wf = p.weak_form(scheme, q)?;
    let t0 = p.t_start;
    let mut worst = 0.0f64;
    for (lo, hi) in [(0.0, 0.5), (0.3, 1.0)] {
        let state = curve.on((t0 + lo, t0 + hi));
        let samples = admissible_samples(
            wf.as_ref(),
            p.action.as_ref(),
            &state,
            q,
            &quad,
            rng,
            0.5,
            20,
        );
        if samples.is_empty() {
            return Err(crate::Error::Domain(format!(
                "no admissible group samples for {} {scheme}",
                p.name
            )));
        }
        let d = invariance_defect(
            wf.as_ref(),
            p.action.as_ref(),
            p.reduction,
            &state,
            q,
            &quad,
            &samples,
        )?;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Every invariant scheme has a defect below 1e-9; every non-invariant
/// counterpart shows a defect of at least 1e-3 somewhere.
pub fn invariance_property(seed: u64) -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = (|| {
        let mut invariant_worst = 0.0f64;
        let mut witness_least = f64::INFINITY;
        let mut detail = Vec::new();
        for name in PROBLEM_NAMES {
            let p = by_name(name)?;
            let curve = perturbed_exact_curve(&p, 1.0)?;
            for q in 0..=1 {
                if p.validate(Scheme::Invariant, q).is_ok() {
                    let d = scheme_defect(&p, &curve, Scheme::Invariant, q, &mut rng)?;
                    invariant_worst = invariant_worst.max(d);
                    detail.push(format!("{name} invariant q={q} {d:.1e}"));
                }
                if let Some(s) = p
                    .non_invariant_scheme()
                    .filter(|s| p.validate(*s, q).is_ok())
                {
                    let d = scheme_defect(&p, &curve, s, q, &mut rng)?;
                    witness_least = witness_least.min(d);
                    detail.push(format!("{name} {s} q={q} {d:.1e}"));
                }
            }
        }
        let passed = invariant_worst <= 1e-9 && witness_least >= 1e-3;
        Ok((
            passed,
            format!(
                "invariant max {invariant_worst:.1e}, non-invariant min {witness_least:.1e} ({})",
                detail.join("; ")
            ),
        ))
    })();
    PropertyOutcome::from_result("invariance defects", r)
}

/// Pointwise substitution of the moving frame into the base form against the
/// printed invariant rows at 100 random first-order jets per problem.
pub fn pointwise_property(seed: u64) -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = (|| {
        let mut worst = 0.0f64;
        let mut detail = Vec::new();
        for name in ["working", "schwarzian", "noproject"] {
            let p = by_name(name)?;
            let printed = p.weak_form(Scheme::Invariant, 0)?;
            let generic =
                invariantize_pointwise(p.base_form()?, p.frame()?.clone(), p.reduction, 0);
            let n = p.n_eq;
            let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
            let mut rel = 0.0f64;
            let mut accepted = 0;
            while accepted < 100 {
                let t = rng.gen_range(0.5..3.0);
                let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
                let du: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                // The non-projectable frame exists only where u − t u_t > 0.
                if name == "noproject" && u[0] - t * du[0] <= 0.0 {
                    continue;
                }
                printed.residual(t, &u, &du, &mut a)?;
                generic.residual(t, &u, &du, &mut b)?;
                let diff = a
                    .iter()
                    .zip(&b)
                    .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                let size = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                rel = rel.max(diff / size);
                accepted += 1;
            }
            worst = worst.max(rel);
            detail.push(format!("{name} {rel:.1e}"));
        }
        Ok((worst <= 1e-11, detail.join(", ")))
    })();
    PropertyOutcome::from_result("pointwise invariantization", r)
}

/// Solutions of `y_tt = 2` from shifted data differ by exactly
/// `a + b t` at every trial node.
pub fn superposition_property() -> PropertyOutcome {
    let r = (|| {
        let p = linear_default();
        let (a, b) = (0.7, -0.4);
        let mut worst = 0.0f64;
        for q in 0..=1 {
            let wf = p.weak_form(Scheme::Invariant, q)?;
            let mesh = TimeMesh::covering(0.0, 10.0, 0.1)?;
            let asm = Assembler::with_points(q, 16)?;
            let cfg = NewtonConfig::default();
            let solve = |init: &[f64]| integrate(wf.as_ref(), &mesh, q, init, &cfg, &asm);
            let base = solve(&p.initial).map_err(|f| f.cause)?;
            let shifted_init: Vec<f64> = vec![p.initial[0] + a, p.initial[1] + b];
            let shifted = solve(&shifted_init).map_err(|f| f.cause)?;
            for n in 0..mesh.n_elements() {
                let (c0, c1) = (base.element_context(n), shifted.element_context(n));
                for (j, t) in c0.node_times().into_iter().enumerate() {
                    let du = c1.component(0)[j] - c0.component(0)[j] - (a + b * t);
                    let dv = c1.component(1)[j] - c0.component(1)[j] - b;
                    let scale = c0.component(0)[j].abs().max(1.0);
                    worst = worst.max(du.abs().max(dv.abs()) / scale);
                }
            }
        }
        Ok((
            worst <= 1e-12,
            format!("max relative nodal deviation {worst:.1e}"),
        ))
    })();
    PropertyOutcome::from_result("superposition invariance", r)
}

pub fn energy_property() -> PropertyOutcome {
    let r = (|| {
        let d0 = energy_drift(0, 0.1, 100.0)?;
        let d1 = energy_drift(1, 0.1, 100.0)?;
        Ok((d0.max(d1) <= 1e-9, format!("q=0 {d0:.1e}, q=1 {d1:.1e}")))
    })();
    PropertyOutcome::from_result("oscillator energy drift", r)
}

pub fn quadrature_property() -> PropertyOutcome {
    let r = (|| {
        let d0 = quadrature_equivalence("working", 0, 0.1, 5.0, None)?;
        let d1 = quadrature_equivalence("working", 1, 0.1, 5.0, None)?;
        Ok((d0.max(d1) <= 1e-9, format!("q=0 {d0:.1e}, q=1 {d1:.1e}")))
    })();
    PropertyOutcome::from_result("low-order quadrature equivalence", r)
}

struct Exponential(f64);

impl WeakForm for Exponential {
    fn n_eq(&self) -> usize {
        1
    }
    fn residual(&self, _t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = u_t[0] - self.0 * u[0];
        Ok(())
    }
}

/// `q = 0` on `u_t = λu` against the trapezoidal recurrence.
pub fn trapezoid_property() -> PropertyOutcome {
    let r = (|| {
        let mut worst = 0.0f64;
        for (lambda, tau) in [(-1.3, 0.1), (0.7, 0.25), (-20.0, 0.05)] {
            let mesh = TimeMesh::uniform(0.0, 40.0 * tau, 40)?;
            let asm = Assembler::with_points(0, 16)?;
            let traj = integrate(
                &Exponential(lambda),
                &mesh,
                0,
                &[1.0],
                &NewtonConfig::default(),
                &asm,
            )
            .map_err(|f| f.cause)?;
            let ratio = (1.0 + lambda * tau / 2.0) / (1.0 - lambda * tau / 2.0);
            let mut y = 1.0f64;
            for (_, u) in traj.nodal_series() {
                worst = worst.max((u[0] - y).abs() / y.abs().max(1.0));
                y *= ratio;
            }
        }
        Ok((
            worst <= 1e-12,
            format!("max relative deviation {worst:.1e}"),
        ))
    })();
    PropertyOutcome::from_result("trapezoidal oracle", r)
}

/// Augmented run of the working example at `q = 0`: L2 orders of four
/// halvings from τ = 0.15625, plus the augmented invariance defect.
pub fn augmented_convergence(seed: u64) -> PropertyOutcome {
    let r = (|| {
        let base = RunConfig::new("working", Scheme::Augmented, 0, 0.15625);
        let report = convergence_study(&base, &[Scheme::Augmented], &[0], 4)?;
        let orders: Vec<f64> = report.rows.iter().filter_map(|r| r.eoc).collect();
        let finest = orders.last().copied().unwrap_or(f64::NAN);
        let failed = report.rows.iter().any(|r| r.metrics.is_none());

        let p = by_name("working")?;
        let wf = p.base_form()?;
        let quad = gauss_legendre(16)?;
        let cs = p.frame()?.cross_section();
        let curve = perturbed_exact_curve(&p, 1.0)?;
        let state = curve.on((0.0, 0.5));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = admissible_samples(
            wf.as_ref(),
            p.action.as_ref(),
            &state,
            0,
            &quad,
            &mut rng,
            0.5,
            20,
        );
        let defect = augmented_defect(
            wf.as_ref(),
            p.action.as_ref(),
            &cs,
            None,
            &state,
            0,
            &quad,
            &samples,
            &NewtonConfig::default(),
        )?;
        let passed =
            !failed && (finest - 2.0).abs() <= 0.05 && defect <= 1e-9 && !samples.is_empty();
        let orders: Vec<String> = orders.iter().map(|e| format!("{e:.3}")).collect();
        Ok((
            passed,
            format!("EOC [{}], defect {defect:.1e}", orders.join(", ")),
        ))
    })();
    PropertyOutcome::from_result("augmented invariantization", r)
}

/// All property checks, in a fixed order.
pub fn property_suite(seed: u64) -> Vec<PropertyOutcome> {
    vec![
        frame_property(seed),
        invariance_property(seed),
        pointwise_property(seed),
        superposition_property(),
        energy_property(),
        quadrature_property(),
        trapezoid_property(),
        augmented_convergence(seed),
    ]
}
