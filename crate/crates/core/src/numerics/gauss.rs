//! Gauss–Legendre nodes and an indefinite-integration matrix on them.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1],
/// ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Collocation rule: for samples `v_j = g(t_j)` at the Gauss nodes,
/// `(S v)_i` approximates the integral of `g` from -1 to `t_i` and
/// `w . v` the integral over [-1, 1].
#[derive(Clone, Debug)]
pub struct SpectralPanel {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub cumulative: Vec<Vec<f64>>,
}

impl SpectralPanel {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        let mut cumulative = vec![vec![0.0; n]; n];
        for (i, row) in cumulative.iter_mut().enumerate() {
            let hi = nodes[i];
            let half = 0.5 * (hi + 1.0);
            let mid = 0.5 * (hi - 1.0);
            for (q, &tq) in nodes.iter().enumerate() {
                let s = mid + half * tq;
                let wq = weights[q] * half;
                for (j, r) in row.iter_mut().enumerate() {
                    *r += wq * lagrange_basis(&nodes, j, s);
                }
            }
        }
        Self {
            nodes,
            weights,
            cumulative,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate_to_nodes(&self, v: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.cumulative) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn integrate_all(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

fn lagrange_basis(nodes: &[f64], j: usize, t: f64) -> f64 {
    let mut p = 1.0;
    for (m, &xm) in nodes.iter().enumerate() {
        if m != j {
            p *= (t - xm) / (nodes[j] - xm);
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let (x, w) = gauss_legendre(12);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn exact_for_high_degree() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_integral_of_exp() {
        let p = SpectralPanel::new(12);
        let v: Vec<f64> = p.nodes.iter().map(|t| t.exp()).collect();
        let mut out = vec![0.0; 12];
        p.integrate_to_nodes(&v, &mut out);
        for (t, o) in p.nodes.iter().zip(&out) {
            assert!((o - (t.exp() - (-1f64).exp())).abs() < 1e-11);
        }
    }
}
