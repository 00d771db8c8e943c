use std::io::Write;

use super::htable::{h_recursion_on, HTable};
use super::{psi_raw, r_op, WalkKernelContext};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Factorial-weighted difference sum `q_k(z) = sum_i (-t)^i Delta^i p(0, z) / i!`.
fn q_sum(t: f64, table: &HTable, z: i64) -> f64 {
    let mut s = 0.0;
    let mut w = 1.0;
    for i in 0..=table.level() {
        s += w * table.p0_difference(i, z);
        w *= -t / (i + 1) as f64;
    }
    s
}

/// Conjugated `Phi^n_{rho,k}(z) = sum_{y >= z} ((1-rho)/rho) h^n_k(0, y) R^{-1}(y, z)`,
/// evaluated in closed form: `((1-rho)/rho) (1-rho)^{-z} q_k(z)`.
pub fn phi(ctx: &WalkKernelContext, table: &HTable, z: i64) -> f64 {
    let rho = ctx.rho();
    (1.0 - rho) / rho * (1.0 - rho).powi(-z as i32) * q_sum(ctx.t(), table, z)
}

/// Unconjugated `Phi^n_k`, a polynomial in `z` of degree at most `k`.
pub fn phi_raw(ctx: &WalkKernelContext, table: &HTable, z: i64) -> f64 {
    let rho = ctx.rho();
    let k = table.level();
    let xk = ctx.x0(ctx.n() - k);
    ((1.0 - rho) / rho).powi(k as i32 + 1) * (1.0 - rho).powi(-xk as i32) * q_sum(ctx.t(), table, z)
}

/// Direct evaluation of the defining series, stopping once the terms stay
/// below `1e-16` of the partial sum for 20 consecutive terms. Loses accuracy
/// to cancellation for large `t`; kept as an independent check of [`phi`].
pub fn phi_series(ctx: &WalkKernelContext, table: &HTable, z: i64) -> Result<f64> {
    let rho = ctx.rho();
    let max_terms = (20.0 * ctx.t() + 400.0) as i64;
    let mut sum = 0.0;
    let mut quiet = 0;
    let mut last = 0.0f64;
    for j in 0..max_terms {
        let y = z + j;
        let term = (1.0 - rho) / rho * table.h(0, y) * r_op(ctx, y, z, true);
        sum += term;
        last = term.abs();
        if last < 1e-16 * sum.abs() || (term == 0.0 && j > ctx.t() as i64) {
            quiet += 1;
            if quiet >= 20 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence { last_term: last })
}

/// `h` tables for levels `0..n` on a window covering `[X_0(n), hi]`.
fn tables_for(ctx: &WalkKernelContext, hi: i64) -> Result<Vec<HTable>> {
    let n = ctx.n();
    let lo = ctx.x0(n) - 2;
    let hi = hi.max(ctx.x0(1)) + n as i64 + 2;
    (0..n).map(|k| h_recursion_on(ctx, k, lo, hi)).collect()
}

/// The kernel `K_t(x1, x2) = sum_k Psi^n_k(x1) Phi^n_k(x2)` on `[lo, hi]`,
/// stored unconjugated; `conjugated` applies the `(1-rho)^{x1-x2}` gauge.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub lo: i64,
    pub hi: i64,
    pub rho: f64,
    entries: Matrix,
}

impl KernelMatrix {
    pub fn build(ctx: &WalkKernelContext, hi: i64) -> Result<Self> {
        let n = ctx.n();
        let lo = ctx.x0(n);
        let w = (hi - lo + 1).max(0) as usize;
        let tables = tables_for(ctx, hi)?;
        let psi: Vec<Vec<f64>> = (0..n).map(|k| (0..w).map(|i| psi_raw(ctx, k, lo + i as i64)).collect()).collect();
        let phi: Vec<Vec<f64>> =
            tables.iter().map(|tab| (0..w).map(|i| phi_raw(ctx, tab, lo + i as i64)).collect()).collect();
        let entries = Matrix::from_fn(w, |i, j| (0..n).map(|k| psi[k][i] * phi[k][j]).sum());
        Ok(Self { lo, hi, rho: ctx.rho(), entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    pub fn raw(&self, x1: i64, x2: i64) -> f64 {
        self.entries[((x1 - self.lo) as usize, (x2 - self.lo) as usize)]
    }

    pub fn conjugated(&self, x1: i64, x2: i64) -> f64 {
        (1.0 - self.rho).powi((x1 - x2) as i32) * self.raw(x1, x2)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    /// Writes the conjugated matrix with lattice sites as row and column headers.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["x1\\x2".to_string()];
        header.extend((self.lo..=self.hi).map(|x| x.to_string()));
        w.write_record(&header)?;
        for x1 in self.lo..=self.hi {
            let mut row = vec![x1.to_string()];
            row.extend((self.lo..=self.hi).map(|x2| format!("{:e}", self.conjugated(x1, x2))));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FredholmResult {
    /// Determinant before clamping.
    pub raw: f64,
    /// `raw` clamped to `[0, 1]`.
    pub probability: f64,
    /// Rounding error bound from the LU growth factor.
    pub error_estimate: f64,
    pub growth: f64,
    pub dim: usize,
}

/// `P(X_t(n) > a) = det(I - 1_{<=a} K_t 1_{<=a})`, computed exactly on
/// `[X_0(n), a]` (rows below `X_0(n)` vanish).
pub fn fredholm_prob(ctx: &WalkKernelContext, a: i64) -> Result<FredholmResult> {
    let n = ctx.n();
    let trivial = |p: f64| FredholmResult { raw: p, probability: p, error_estimate: 0.0, growth: 1.0, dim: 0 };
    if n == 0 {
        return Ok(trivial(1.0));
    }
    if ctx.t() == 0.0 || a < ctx.x0(n) {
        return Ok(trivial(if ctx.x0(n) > a { 1.0 } else { 0.0 }));
    }
    let km = KernelMatrix::build(ctx, a)?;
    let w = km.dim();
    let m = Matrix::from_fn(w, |i, j| if i == j { 1.0 } else { 0.0 } - km.entries[(i, j)]);
    let lu = m.lu();
    if lu.growth > 1e12 {
        return Err(Error::IllConditioned { growth: lu.growth });
    }
    let raw = lu.det();
    let error_estimate = f64::EPSILON * (w * w) as f64 * lu.growth * m.max_abs().max(1.0);
    Ok(FredholmResult { raw, probability: raw.clamp(0.0, 1.0), error_estimate, growth: lu.growth, dim: w })
}

/// Same probability through the `n x n` identity `det(I - U V^T) = det(I_n - V^T U)`.
pub fn fredholm_prob_low_rank(ctx: &WalkKernelContext, a: i64) -> Result<f64> {
    let n = ctx.n();
    if n == 0 {
        return Ok(1.0);
    }
    if ctx.t() == 0.0 || a < ctx.x0(n) {
        return Ok(if ctx.x0(n) > a { 1.0 } else { 0.0 });
    }
    let lo = ctx.x0(n);
    let tables = tables_for(ctx, a)?;
    let m = Matrix::from_fn(n, |l, k| {
        let s: f64 = (lo..=a).map(|x| phi_raw(ctx, &tables[l], x) * psi_raw(ctx, k, x)).sum();
        if l == k {
            1.0 - s
        } else {
            -s
        }
    });
    Ok(m.lu().det())
}

#[cfg(test)]
mod tests {
    use super::super::h_recursion;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_particle_poisson() {
        let ctx = WalkKernelContext::new(0.5, 1.0, vec![0]).unwrap();
        let r = fredholm_prob(&ctx, 1).unwrap();
        assert_abs_diff_eq!(r.raw, 1.0 - 2.0 * (-1.0f64).exp(), epsilon = 1e-12);
        assert_eq!(fredholm_prob(&ctx, -1).unwrap().probability, 1.0);
    }

    #[test]
    fn zero_time_indicator() {
        let ctx = WalkKernelContext::new(0.5, 0.0, vec![3, 1]).unwrap();
        assert_eq!(fredholm_prob(&ctx, 0).unwrap().raw, 1.0);
        assert_eq!(fredholm_prob(&ctx, 1).unwrap().raw, 0.0);
    }

    #[test]
    fn closed_form_matches_series() {
        let ctx = WalkKernelContext::new(0.4, 1.5, vec![5, 2, 1, -2]).unwrap();
        for k in 0..4 {
            let tab = h_recursion(&ctx, k).unwrap();
            for z in -4..8 {
                let a = phi(&ctx, &tab, z);
                let b = phi_series(&ctx, &tab, z).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-9 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn low_rank_identity() {
        let ctx = WalkKernelContext::new(0.3, 2.0, vec![4, 2, -1]).unwrap();
        for a in -1..8 {
            let full = fredholm_prob(&ctx, a).unwrap().raw;
            let low = fredholm_prob_low_rank(&ctx, a).unwrap();
            assert_abs_diff_eq!(full, low, epsilon = 1e-10);
        }
    }
}
