use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `(0, 1)`, nodes increasing.
pub fn legendre_unit(m: usize) -> Vec<(f64, f64)> {
    let Some(m) = NonZeroUsize::new(m) else {
        return Vec::new();
    };
    let rule = GaussLegendre::new(m);
    let mut v: Vec<(f64, f64)> = rule.as_node_weight_pairs().iter().map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// Scale of the rational map `u -> s + L u / (1 - u)`.
pub const MAP_SCALE: f64 = 6.0;

/// Nodes and weights on `[s, inf)` from an `M`-point Gauss-Legendre rule
/// mapped by `u -> s + L u / (1 - u)`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub s: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(s: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("M", "quadrature order must be positive"));
        }
        let (nodes, weights) = legendre_unit(m)
            .into_iter()
            .map(|(u, w)| (s + MAP_SCALE * u / (1.0 - u), w * MAP_SCALE / ((1.0 - u) * (1.0 - u))))
            .unzip();
        Ok(Self { s, nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants_and_exponential_integral() {
        let g = QuadratureGrid::new(-1.0, 60).unwrap();
        assert!(g.weights.iter().all(|&w| w > 0.0));
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        let v = g.integrate(|x| (-x).exp());
        assert!((v - 1f64.exp()).abs() < 1e-10);
        assert!(QuadratureGrid::new(0.0, 0).is_err());
    }
}
