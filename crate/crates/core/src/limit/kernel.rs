use super::airy::{airy, airy_pair};
use super::quadrature::QuadratureGrid;
use crate::error::Result;
use crate::linalg::Matrix;

/// Quadrature order of the `lambda` integral in [`airy_kernel`].
const LAMBDA_ORDER: usize = 120;

/// `K(x, y) = int_0^inf Ai(x + lambda + shift) Ai(y + lambda + shift) d lambda`
/// by mapped Gauss-Legendre quadrature.
pub fn airy_kernel(x: f64, y: f64, shift: f64) -> f64 {
    let g = QuadratureGrid::new(0.0, LAMBDA_ORDER).expect("positive order");
    g.integrate(|l| airy(x + l + shift) * airy(y + l + shift))
}

/// Christoffel-Darboux form `(Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y)` of the
/// unshifted kernel, with the diagonal `Ai'(x)^2 - x Ai(x)^2`.
pub fn airy_kernel_closed(x: f64, y: f64) -> f64 {
    let (ax, dx) = airy_pair(x);
    if (x - y).abs() < 1e-7 {
        let m = 0.5 * (x + y);
        let (a, d) = airy_pair(m);
        return d * d - m * a * a;
    }
    let (ay, dy) = airy_pair(y);
    (ax * dy - dx * ay) / (x - y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalflineDet {
    pub value: f64,
    /// `|det_M - det_2M|` plus a rounding allowance.
    pub error_estimate: f64,
    pub order: usize,
}

/// Nystrom approximation of `det(I - K)` on `L^2(s, inf)`:
/// `det(I - W^{1/2} K W^{1/2})` at orders `M` and `2M`; the `2M` value is reported.
pub fn fredholm_halfline(kernel: impl Fn(f64, f64) -> f64, s: f64, m: usize) -> Result<HalflineDet> {
    let at = |order: usize| -> Result<f64> {
        let g = QuadratureGrid::new(s, order)?;
        let r: Vec<f64> = g.weights.iter().map(|w| w.sqrt()).collect();
        let a = Matrix::from_fn(order, |i, j| {
            let k = if j < i {
                // symmetric kernel: reuse the mirrored evaluation order
                kernel(g.nodes[j], g.nodes[i])
            } else {
                kernel(g.nodes[i], g.nodes[j])
            };
            (if i == j { 1.0 } else { 0.0 }) - r[i] * k * r[j]
        });
        Ok(a.lu().det())
    };
    let coarse = at(m)?;
    let fine = at(2 * m)?;
    Ok(HalflineDet { value: fine, error_estimate: (coarse - fine).abs() + 1e-15 * m as f64, order: 2 * m })
}
