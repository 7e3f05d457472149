use crate::error::{Error, Result};
use crate::numerics::LagrangeBasis;

use super::mesh::TimeMesh;
use super::weak_form::ElementContext;

/// Continuous piecewise polynomial of degree `q + 1` on a mesh.
///
/// Each component stores one global array of `N (q + 1) + 1` nodal values;
/// neighbouring elements share their common endpoint entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    mesh: TimeMesh,
    q: usize,
    trial: LagrangeBasis,
    values: Vec<Vec<f64>>,
    completed: usize,
}

impl Trajectory {
    /// Trajectory holding only the initial values.
    pub fn new(mesh: TimeMesh, q: usize, initial: &[f64]) -> Self {
        let len = mesh.n_elements() * (q + 1) + 1;
        let values = initial
            .iter()
            .map(|&v| {
                let mut c = vec![f64::NAN; len];
                c[0] = v;
                c
            })
            .collect();
        Self {
            mesh,
            q,
            trial: LagrangeBasis::equispaced(q + 1),
            values,
            completed: 0,
        }
    }

    /// Trajectory interpolating `f` at every trial node.
    pub fn interpolate<F>(mesh: TimeMesh, q: usize, f: F) -> Self
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let first = f(mesh.t_start());
        let mut traj = Self::new(mesh, q, &first);
        for n in 0..traj.mesh.n_elements() {
            let mut ctx = traj.element_context(n);
            let x: Vec<f64> = {
                let times = ctx.node_times();
                let samples: Vec<Vec<f64>> = times[1..].iter().map(|&t| f(t)).collect();
                (0..traj.n_eq())
                    .flat_map(|i| samples.iter().map(move |s| s[i]).collect::<Vec<_>>())
                    .collect()
            };
            ctx.set_unknowns(&x);
            traj.store_element(&ctx);
        }
        traj
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n_eq(&self) -> usize {
        self.values.len()
    }

    /// Number of elements solved so far.
    pub fn completed(&self) -> usize {
        self.completed
    }

    pub fn is_complete(&self) -> bool {
        self.completed == self.mesh.n_elements()
    }

    /// Global nodal array of component `i`.
    pub fn component(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    /// Values at mesh node `n` (element boundary).
    pub fn mesh_values(&self, n: usize) -> Vec<f64> {
        let k = n * (self.q + 1);
        self.values.iter().map(|c| c[k]).collect()
    }

    /// Mesh node times paired with their values, up to the last solved node.
    pub fn nodal_series(&self) -> Vec<(f64, Vec<f64>)> {
        (0..=self.completed)
            .map(|n| (self.mesh.nodes()[n], self.mesh_values(n)))
            .collect()
    }

    /// Element `n` as a standalone context (copy of its nodal values).
    pub fn element_context(&self, n: usize) -> ElementContext {
        let m = self.q + 2;
        let start = n * (self.q + 1);
        let vals = self
            .values
            .iter()
            .map(|c| c[start..start + m].to_vec())
            .collect();
        let (a, _) = self.mesh.element(n);
        ElementContext::new(n, a, self.mesh.tau(n), self.q, vals)
    }

    /// Write back a solved element. Its left endpoint must already be stored.
    pub fn store_element(&mut self, ctx: &ElementContext) {
        let n = ctx.index;
        let start = n * (self.q + 1);
        for (i, c) in self.values.iter_mut().enumerate() {
            c[start + 1..start + self.q + 2].copy_from_slice(&ctx.component(i)[1..]);
        }
        self.completed = self.completed.max(n + 1);
    }

    /// Value and one-sided derivative at `t`. At interior mesh nodes the
    /// element to the left is used, so derivatives are left limits.
    pub fn evaluate(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.mesh.locate(t)?;
        if n >= self.completed {
            let (a, _) = self.mesh.element(n);
            return Err(Error::Range {
                t,
                start: self.mesh.t_start(),
                end: if self.completed == 0 {
                    a
                } else {
                    self.mesh.nodes()[self.completed]
                },
            });
        }
        let (a, _) = self.mesh.element(n);
        let tau = self.mesh.tau(n);
        let s = ((t - a) / tau).clamp(0.0, 1.0);
        let phi = self.trial.values(s);
        let dphi = self.trial.derivatives(s);
        let start = n * (self.q + 1);
        let mut u = vec![0.0; self.n_eq()];
        let mut du = vec![0.0; self.n_eq()];
        for (i, c) in self.values.iter().enumerate() {
            let c = &c[start..start + self.q + 2];
            u[i] = c.iter().zip(&phi).map(|(x, p)| x * p).sum();
            du[i] = c.iter().zip(&dphi).map(|(x, p)| x * p).sum::<f64>() / tau;
        }
        Ok((u, du))
    }

    /// Largest jump between the shared endpoint values of neighbours. Zero by
    /// construction; exposed for checks.
    pub fn max_continuity_jump(&self) -> f64 {
        let mut jump: f64 = 0.0;
        for n in 1..self.completed {
            let left = self.element_context(n - 1).right_values();
            let right = self.element_context(n).left_values();
            for (a, b) in left.iter().zip(&right) {
                jump = jump.max((a - b).abs());
            }
        }
        jump
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_trajectory() {
        let mesh = TimeMesh::uniform(0.0, 1.0, 3).unwrap();
        let traj = Trajectory::interpolate(mesh, 1, |_| vec![2.5]);
        let (u, du) = traj.evaluate(0.4).unwrap();
        assert_eq!(u, vec![2.5]);
        assert!(du[0].abs() < 1e-12);
    }

    #[test]
    fn linear_trajectory_and_nodes() {
        let mesh = TimeMesh::uniform(0.0, 1.0, 4).unwrap();
        let traj = Trajectory::interpolate(mesh, 0, |t| vec![t]);
        let (u, du) = traj.evaluate(0.5).unwrap();
        assert!((u[0] - 0.5).abs() < 1e-15 && (du[0] - 1.0).abs() < 1e-14);
        assert_eq!(traj.evaluate(0.25).unwrap().0[0], traj.mesh_values(1)[0]);
        assert_eq!(traj.max_continuity_jump(), 0.0);
        assert!(traj.evaluate(1.2).is_err());
    }

    #[test]
    fn left_limit_derivative_at_nodes() {
        // |t - 0.5| has slope -1 on the left element.
        let mesh = TimeMesh::uniform(0.0, 1.0, 2).unwrap();
        let traj = Trajectory::interpolate(mesh, 0, |t| vec![(t - 0.5).abs()]);
        let (_, du) = traj.evaluate(0.5).unwrap();
        assert!((du[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn unsolved_elements_are_out_of_range() {
        let mesh = TimeMesh::uniform(0.0, 1.0, 2).unwrap();
        let traj = Trajectory::new(mesh, 0, &[1.0]);
        assert!(traj.evaluate(0.1).is_err());
        assert_eq!(traj.nodal_series().len(), 1);
    }
}
