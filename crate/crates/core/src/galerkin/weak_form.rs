use crate::error::Result;
use crate::numerics::LagrangeBasis;

/// Pointwise residual of an `n_eq`-component first-order system together with
/// its test functions.
///
/// The element functional is `∫_{I_n} residual_i(t, U, U_t) w_k(t) dt` for every
/// component `i` and test index `k = 0..=q`. Unless overridden, `w_k` is the
/// degree-`q` Lagrange basis on equispaced element nodes.
pub trait WeakForm: Send + Sync {
    fn n_eq(&self) -> usize;

    fn residual(&self, t: f64, u: &[f64], u_t: &[f64], out: &mut [f64]) -> Result<()>;

    /// Solution-dependent test weight. `standard` is the value of the plain
    /// Lagrange test function at `t`.
    fn test_weight(
        &self,
        _k: usize,
        _t: f64,
        _u: &[f64],
        _state: &dyn ElementState,
        standard: f64,
    ) -> Result<f64> {
        Ok(standard)
    }

    /// Whether [`WeakForm::test_weight`] is overridden.
    fn custom_test_weights(&self) -> bool {
        false
    }
}

/// Anything that can be evaluated as `(u, u_t)` on one element.
pub trait ElementState {
    fn n_eq(&self) -> usize;

    fn interval(&self) -> (f64, f64);

    fn eval(&self, t: f64, u: &mut [f64], u_t: &mut [f64]) -> Result<()>;

    /// Values only.
    fn value(&self, t: f64) -> Result<Vec<f64>> {
        let mut u = vec![0.0; self.n_eq()];
        let mut du = vec![0.0; self.n_eq()];
        self.eval(t, &mut u, &mut du)?;
        Ok(u)
    }
}

/// Equispaced test nodes of a degree-`q` test space on `[a, b]`.
pub fn test_node_times(q: usize, a: f64, b: f64) -> Vec<f64> {
    LagrangeBasis::equispaced(q)
        .nodes()
        .iter()
        .map(|s| a + (b - a) * s)
        .collect()
}

/// Trial data on one element: `q + 2` equispaced nodes per component, the
/// first at `t_n` and the last at `t_{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementContext {
    pub index: usize,
    pub t_left: f64,
    pub tau: f64,
    n_eq: usize,
    trial: LagrangeBasis,
    /// Component-major nodal values, `values[i * (q + 2) + j]`.
    values: Vec<f64>,
}

impl ElementContext {
    pub fn new(index: usize, t_left: f64, tau: f64, q: usize, values: Vec<Vec<f64>>) -> Self {
        let n_eq = values.len();
        let trial = LagrangeBasis::equispaced(q + 1);
        debug_assert!(values.iter().all(|v| v.len() == q + 2));
        Self {
            index,
            t_left,
            tau,
            n_eq,
            trial,
            values: values.concat(),
        }
    }

    /// Constant extension of `left` over the element.
    pub fn constant(index: usize, t_left: f64, tau: f64, q: usize, left: &[f64]) -> Self {
        let values = left.iter().map(|&v| vec![v; q + 2]).collect();
        Self::new(index, t_left, tau, q, values)
    }

    pub fn q(&self) -> usize {
        self.trial.degree() - 1
    }

    pub fn nodes_per_component(&self) -> usize {
        self.trial.len()
    }

    pub fn trial_basis(&self) -> &LagrangeBasis {
        &self.trial
    }

    pub fn node_times(&self) -> Vec<f64> {
        self.trial
            .nodes()
            .iter()
            .map(|s| self.t_left + self.tau * s)
            .collect()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        let m = self.nodes_per_component();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn left_values(&self) -> Vec<f64> {
        (0..self.n_eq).map(|i| self.component(i)[0]).collect()
    }

    pub fn right_values(&self) -> Vec<f64> {
        let m = self.nodes_per_component();
        (0..self.n_eq).map(|i| self.component(i)[m - 1]).collect()
    }

    /// Unknown nodal values (all but the left endpoint), component-major.
    pub fn unknowns(&self) -> Vec<f64> {
        (0..self.n_eq)
            .flat_map(|i| self.component(i)[1..].to_vec())
            .collect()
    }

    pub fn set_unknowns(&mut self, x: &[f64]) {
        let m = self.nodes_per_component();
        for i in 0..self.n_eq {
            self.values[i * m + 1..(i + 1) * m].copy_from_slice(&x[i * (m - 1)..(i + 1) * (m - 1)]);
        }
    }

    /// Evaluate from precomputed reference-basis tables.
    pub(crate) fn eval_tabulated(&self, phi: &[f64], dphi: &[f64], u: &mut [f64], u_t: &mut [f64]) {
        let m = self.nodes_per_component();
        let inv_tau = 1.0 / self.tau;
        for i in 0..self.n_eq {
            let c = &self.values[i * m..(i + 1) * m];
            let mut v = 0.0;
            let mut d = 0.0;
            for j in 0..m {
                v += c[j] * phi[j];
                d += c[j] * dphi[j];
            }
            u[i] = v;
            u_t[i] = d * inv_tau;
        }
    }
}

impl ElementState for ElementContext {
    fn n_eq(&self) -> usize {
        self.n_eq
    }

    fn interval(&self) -> (f64, f64) {
        (self.t_left, self.t_left + self.tau)
    }

    fn eval(&self, t: f64, u: &mut [f64], u_t: &mut [f64]) -> Result<()> {
        let s = (t - self.t_left) / self.tau;
        let phi = self.trial.values(s);
        let dphi = self.trial.derivatives(s);
        self.eval_tabulated(&phi, &dphi, u, u_t);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_round_trip() {
        let mut ctx = ElementContext::constant(0, 1.0, 0.5, 1, &[2.0, -1.0]);
        assert_eq!(ctx.unknowns(), vec![2.0, 2.0, -1.0, -1.0]);
        ctx.set_unknowns(&[3.0, 4.0, 5.0, 6.0]);
        assert_eq!(ctx.component(0), &[2.0, 3.0, 4.0]);
        assert_eq!(ctx.component(1), &[-1.0, 5.0, 6.0]);
        assert_eq!(ctx.right_values(), vec![4.0, 6.0]);
        assert_eq!(ctx.node_times(), vec![1.0, 1.25, 1.5]);
    }

    #[test]
    fn evaluates_linear_function() {
        // U(t) = t on [0, 1], q = 0.
        let ctx = ElementContext::new(0, 0.0, 1.0, 0, vec![vec![0.0, 1.0]]);
        let mut u = [0.0];
        let mut du = [0.0];
        ctx.eval(0.5, &mut u, &mut du).unwrap();
        assert_eq!((u[0], du[0]), (0.5, 1.0));
    }

    #[test]
    fn test_nodes() {
        assert_eq!(test_node_times(0, 0.0, 2.0), vec![1.0]);
        assert_eq!(test_node_times(2, 0.0, 2.0), vec![0.0, 1.0, 2.0]);
    }
}
