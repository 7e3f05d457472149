use crate::error::{Error, Result};

/// Partition `t_0 < t_1 < ... < t_N` of a time interval into elements
/// `I_n = (t_n, t_{n+1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMesh {
    nodes: Vec<f64>,
}

impl TimeMesh {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Parameter("a mesh needs at least one element".into()));
        }
        if nodes.iter().any(|t| !t.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter(
                "mesh nodes must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self { nodes })
    }

    /// `n` equal elements on `[t_start, t_end]`.
    pub fn uniform(t_start: f64, t_end: f64, n: usize) -> Result<Self> {
        if n == 0 || !(t_end > t_start) {
            return Err(Error::Parameter(format!(
                "uniform mesh needs n > 0 and t_end > t_start (n={n}, [{t_start}, {t_end}])"
            )));
        }
        let len = t_end - t_start;
        let mut nodes: Vec<f64> = (0..=n)
            .map(|i| t_start + len * (i as f64) / (n as f64))
            .collect();
        nodes[n] = t_end;
        Self::new(nodes)
    }

    /// Uniform mesh with element size `tau`; `(t_end - t_start) / tau` must be
    /// an integer up to rounding.
    pub fn with_step(t_start: f64, t_end: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::Parameter(format!(
                "element size must be positive, got {tau}"
            )));
        }
        let ratio = (t_end - t_start) / tau;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Parameter(format!(
                "tau = {tau} does not divide [{t_start}, {t_end}] into whole elements"
            )));
        }
        Self::uniform(t_start, t_end, n as usize)
    }

    /// Elements of size `tau` from `t_start`, with the last element shortened
    /// to end exactly at `t_end` when `tau` does not divide the interval.
    pub fn covering(t_start: f64, t_end: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !(t_end > t_start) {
            return Err(Error::Parameter(format!(
                "covering mesh needs tau > 0 and t_end > t_start (tau={tau}, [{t_start}, {t_end}])"
            )));
        }
        let ratio = (t_end - t_start) / tau;
        let whole = ratio.round();
        if (ratio - whole).abs() <= 1e-9 * ratio.max(1.0) {
            return Self::uniform(t_start, t_end, whole.max(1.0) as usize);
        }
        let full = ratio.floor() as usize;
        let mut nodes: Vec<f64> = (0..=full).map(|i| t_start + tau * i as f64).collect();
        nodes.push(t_end);
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn t_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn element(&self, n: usize) -> (f64, f64) {
        (self.nodes[n], self.nodes[n + 1])
    }

    pub fn tau(&self, n: usize) -> f64 {
        self.nodes[n + 1] - self.nodes[n]
    }

    /// Index of the element containing `t` under the half-open convention;
    /// `t_0` itself belongs to the first element.
    pub fn locate(&self, t: f64) -> Result<usize> {
        if !(t >= self.t_start() && t <= self.t_end()) {
            return Err(Error::Range {
                t,
                start: self.t_start(),
                end: self.t_end(),
            });
        }
        // First node index >= t, minus one.
        let i = self.nodes.partition_point(|&x| x < t);
        Ok(i.saturating_sub(1).min(self.n_elements() - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_sizes_are_equal() {
        let m = TimeMesh::uniform(0.0, 10.0, 64).unwrap();
        for n in 0..m.n_elements() {
            assert!((m.tau(n) - 0.15625).abs() <= 1e-12 * 10.0);
        }
        assert_eq!(m.t_end(), 10.0);
    }

    #[test]
    fn step_must_divide_interval() {
        assert_eq!(
            TimeMesh::with_step(0.0, 10.0, 0.15625)
                .unwrap()
                .n_elements(),
            64
        );
        assert!(TimeMesh::with_step(0.0, 1.0, 0.3).is_err());
        assert!(TimeMesh::with_step(0.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn rejects_non_increasing_nodes() {
        assert!(TimeMesh::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeMesh::new(vec![0.0]).is_err());
    }

    #[test]
    fn half_open_location() {
        let m = TimeMesh::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(m.locate(0.0).unwrap(), 0);
        assert_eq!(m.locate(0.25).unwrap(), 0);
        assert_eq!(m.locate(0.2500001).unwrap(), 1);
        assert_eq!(m.locate(1.0).unwrap(), 3);
        assert!(matches!(m.locate(1.5), Err(Error::Range { .. })));
    }
}
