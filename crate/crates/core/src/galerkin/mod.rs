//! Continuous Galerkin time stepping: trial space of continuous piecewise
//! polynomials of degree `q + 1`, discontinuous test space of degree `q`,
//! solved element by element with Newton's method.

mod assembly;
mod mesh;
mod newton;
mod trajectory;
mod weak_form;

use std::fmt;

pub use assembly::{assemble_element_residual, Assembler, DEFAULT_QUADRATURE_POINTS};
pub use mesh::TimeMesh;
pub use newton::{fd_jacobian, newton_solve, InitialGuess, NewtonConfig};
pub use trajectory::Trajectory;
pub use weak_form::{test_node_times, ElementContext, ElementState, WeakForm};

use crate::error::{Error, Result};

/// Solve one element. The left-endpoint values of `guess` are held fixed;
/// the remaining `q + 1` nodes per component are the unknowns.
pub fn newton_solve_element(
    wf: &dyn WeakForm,
    guess: &ElementContext,
    cfg: &NewtonConfig,
    asm: &Assembler,
) -> Result<ElementContext> {
    let mut work = guess.clone();
    let x = newton_solve(
        |x| {
            work.set_unknowns(x);
            asm.residual(wf, &work)
        },
        &guess.unknowns(),
        cfg,
    )?;
    let mut out = guess.clone();
    out.set_unknowns(&x);
    Ok(out)
}

/// A march that stopped at `element`; `partial` holds every element solved
/// before it.
#[derive(Debug, Clone)]
pub struct IntegrationFailure {
    pub element: usize,
    pub partial: Trajectory,
    pub cause: Error,
}

impl fmt::Display for IntegrationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.partial.mesh().element(self.element);
        write!(
            f,
            "element {} on [{a}, {b}] failed: {}",
            self.element, self.cause
        )
    }
}

impl std::error::Error for IntegrationFailure {}

/// Starting point for element `n` of `traj` under the configured guess rule.
pub fn initial_guess(traj: &Trajectory, n: usize, rule: InitialGuess) -> ElementContext {
    let mut ctx = traj.element_context(n);
    let left = ctx.left_values();
    let q = traj.q();
    let times = ctx.node_times();
    let slope = match rule {
        InitialGuess::LinearExtrapolation if n > 0 => traj
            .evaluate(times[0])
            .map(|(_, du)| du)
            .unwrap_or_else(|_| vec![0.0; left.len()]),
        _ => vec![0.0; left.len()],
    };
    let x: Vec<f64> = (0..left.len())
        .flat_map(|i| {
            let (l, s, t0) = (left[i], slope[i], times[0]);
            times[1..=q + 1].iter().map(move |&t| l + s * (t - t0))
        })
        .collect();
    ctx.set_unknowns(&x);
    ctx
}

/// March `wf` over `mesh` from `initial`.
pub fn integrate(
    wf: &dyn WeakForm,
    mesh: &TimeMesh,
    q: usize,
    initial: &[f64],
    cfg: &NewtonConfig,
    asm: &Assembler,
) -> std::result::Result<Trajectory, Box<IntegrationFailure>> {
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
    if asm.q() != q {
        let cause = Error::Parameter(format!(
            "assembler built for q = {}, run uses q = {q}",
            asm.q()
        ));
        return Err(fail(traj, 0, cause));
    }
    if let Err(cause) = cfg.validate() {
        return Err(fail(traj, 0, cause));
    }
    for n in 0..mesh.n_elements() {
        let guess = initial_guess(&traj, n, cfg.guess);
        match newton_solve_element(wf, &guess, cfg, asm) {
            Ok(ctx) => traj.store_element(&ctx),
            Err(cause) => return Err(fail(traj, n, cause)),
        }
    }
    Ok(traj)
}
