use crate::diffusion::spec::Interval;
use crate::error::{Error, Result};

/// Discretisation of the triangle `{i <= s}` over a truncation. Both axes
/// share the same nodes; cell `(k, m)` is active when `k <= m`, so the
/// diagonal is included.
#[derive(Clone, Debug)]
pub struct TriangleGrid {
    nodes: Vec<f64>,
}

impl TriangleGrid {
    pub fn uniform(truncation: Interval, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("grid needs at least 3 nodes, got {n}")));
        }
        let h = truncation.width() / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|k| truncation.lo + k as f64 * h).collect();
        nodes[n - 1] = truncation.hi;
        Ok(Self { nodes })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "grid nodes must be strictly increasing, at least 3".into(),
            ));
        }
        Ok(Self { nodes })
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

    pub fn node(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Largest spacing between neighbouring nodes.
    pub fn max_step(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of the cell `(k, m)` in row-major (i-major) order.
    pub fn index(&self, k: usize, m: usize) -> usize {
        k * self.nodes.len() + m
    }

    /// Active cells `(k, m)` with `k <= m`, i-major.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.nodes.len();
        (0..n).flat_map(move |k| (k..n).map(move |m| (k, m)))
    }

    /// Index `k` with `node(k) <= x < node(k+1)`, clamped.
    pub fn locate(&self, x: f64) -> usize {
        crate::numerics::interp::bracket(&self.nodes, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_endpoints() {
        let g = TriangleGrid::uniform(Interval::new(-3.0, 3.0).unwrap(), 257).unwrap();
        assert_eq!(g.lo(), -3.0);
        assert_eq!(g.hi(), 3.0);
        assert_eq!(g.node(128), 0.0);
        assert_eq!(g.cells().count(), 257 * 258 / 2);
        assert!(g.cells().all(|(k, m)| g.node(k) <= g.node(m)));
    }

    #[test]
    fn too_small_grid_rejected() {
        assert!(TriangleGrid::uniform(Interval::new(0.0, 1.0).unwrap(), 2).is_err());
        assert!(TriangleGrid::from_nodes(vec![0.0, 0.0, 1.0]).is_err());
    }
}
