use crate::error::{Error, Result};

/// Lagrange nodal basis on the reference interval `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    // 1 / prod_{j != i} (x_i - x_j)
    denominators: Vec<f64>,
}

impl LagrangeBasis {
    /// Basis of the given degree through `nodes`.
    pub fn new(degree: usize, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() != degree + 1 {
            return Err(Error::Parameter(format!(
                "degree {degree} basis needs {} nodes, got {}",
                degree + 1,
                nodes.len()
            )));
        }
        if nodes.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Parameter(format!(
                "basis nodes must lie in [0, 1]: {nodes:?}"
            )));
        }
        for (i, a) in nodes.iter().enumerate() {
            if nodes[i + 1..].iter().any(|b| (a - b).abs() < 1e-14) {
                return Err(Error::Parameter(format!("duplicate basis node {a}")));
            }
        }
        let denominators = (0..nodes.len())
            .map(|i| {
                let p: f64 = (0..nodes.len())
                    .filter(|&j| j != i)
                    .map(|j| nodes[i] - nodes[j])
                    .product();
                1.0 / p
            })
            .collect();
        Ok(Self {
            nodes,
            denominators,
        })
    }

    /// Equispaced nodes including both endpoints; degree 0 uses the midpoint.
    pub fn equispaced(degree: usize) -> Self {
        let nodes = if degree == 0 {
            vec![0.5]
        } else {
            (0..=degree).map(|i| i as f64 / degree as f64).collect()
        };
        Self::new(degree, nodes).expect("equispaced nodes are distinct")
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Values of every basis function at `s`.
    pub fn values(&self, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.values_into(s, &mut out);
        out
    }

    pub fn values_into(&self, s: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut p = self.denominators[i];
            for (j, xj) in self.nodes.iter().enumerate() {
                if j != i {
                    p *= s - xj;
                }
            }
            *o = p;
        }
    }

    /// Derivatives `dℓ_i/ds` of every basis function at `s`.
    pub fn derivatives(&self, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.derivatives_into(s, &mut out);
        out
    }

    pub fn derivatives_into(&self, s: f64, out: &mut [f64]) {
        let n = self.len();
        for (i, o) in out.iter_mut().enumerate() {
            let mut sum = 0.0;
            for m in 0..n {
                if m == i {
                    continue;
                }
                let mut p = 1.0;
                for j in 0..n {
                    if j != i && j != m {
                        p *= s - self.nodes[j];
                    }
                }
                sum += p;
            }
            *o = sum * self.denominators[i];
        }
    }
}

/// Value at `x` of the `k`-th Lagrange polynomial through arbitrary distinct
/// `nodes` (not restricted to the reference interval).
pub fn lagrange_value(nodes: &[f64], k: usize, x: f64) -> f64 {
    let xk = nodes[k];
    nodes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, &xj)| (x - xj) / (xk - xj))
        .product()
}
