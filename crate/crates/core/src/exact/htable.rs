use std::io::Write;

use super::WalkKernelContext;
use crate::error::{Error, Result};

/// Solution `h^n_k(l, z)`, `l = 0..=k`, of the backward heat equation
/// `(Q^*)^{-1} h(l, .) = h(l+1, .)` with boundary row
/// `h(k, z) = rho (1-rho)^{X_0(n-k) - z - 1}` and zeros `h(l, X_0(n-l)) = 0`.
///
/// Stored in the gauge `p(l, z) = (1-rho)^z h(l, z)`, where every row is a
/// polynomial in `z` of degree `k - l`; values outside the window are obtained
/// by exact polynomial extrapolation.
#[derive(Debug, Clone)]
pub struct HTable {
    rho: f64,
    n: usize,
    k: usize,
    zlo: i64,
    zhi: i64,
    p: Vec<Vec<f64>>,
}

/// Table on a default window spanning the initial positions with a margin.
pub fn h_recursion(ctx: &WalkKernelContext, k: usize) -> Result<HTable> {
    let n = ctx.n() as i64;
    h_recursion_on(ctx, k, ctx.x0(ctx.n()) - 2 * n - 8, ctx.x0(1) + 2 * n + 8)
}

pub fn h_recursion_on(ctx: &WalkKernelContext, k: usize, zlo: i64, zhi: i64) -> Result<HTable> {
    let n = ctx.n();
    if k >= n {
        return Err(Error::invalid("k", format!("level {k} must be below n = {n}")));
    }
    // anchors X_0(n-l) for l < k, and enough room for a degree-k stencil
    let need_lo = ctx.x0(n).min(zhi - k as i64);
    let need_hi = ctx.x0(n - k).max(zlo + k as i64);
    if zlo > need_lo || zhi < need_hi {
        return Err(Error::WindowTooSmall { lo: zlo, hi: zhi, need_lo: need_lo.min(zlo), need_hi: need_hi.max(zhi) });
    }
    let rho = ctx.rho();
    let c = rho / (1.0 - rho);
    let width = (zhi - zlo + 1) as usize;
    let mut p = vec![vec![0.0; width]; k + 1];
    let top = rho * (1.0 - rho).powi((ctx.x0(n - k) - 1) as i32);
    p[k].iter_mut().for_each(|v| *v = top);
    for l in (1..=k).rev() {
        let anchor = ctx.x0(n - l + 1);
        let a = (anchor - zlo) as usize;
        let (lower, upper) = p.split_at_mut(l);
        let (prev, next) = (&mut lower[l - 1], &upper[0]);
        prev[a] = 0.0;
        for i in (a + 1)..width {
            prev[i] = prev[i - 1] - c * next[i];
        }
        for i in (0..a).rev() {
            prev[i] = prev[i + 1] + c * next[i + 1];
        }
    }
    Ok(HTable { rho, n, k, zlo, zhi, p })
}

impl HTable {
    pub fn level(&self) -> usize {
        self.k
    }

    pub fn particles(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> (i64, i64) {
        (self.zlo, self.zhi)
    }

    /// `(1-rho)^z h(l, z)` for any `z`.
    pub fn p(&self, l: usize, z: i64) -> f64 {
        let row = &self.p[l];
        if z >= self.zlo && z <= self.zhi {
            return row[(z - self.zlo) as usize];
        }
        // Newton interpolation through the degree+1 nearest window points
        let deg = self.k - l;
        let base = if z < self.zlo { self.zlo } else { self.zhi - deg as i64 };
        let mut diffs: Vec<f64> = (0..=deg).map(|i| row[(base - self.zlo) as usize + i]).collect();
        let mut coef = Vec::with_capacity(deg + 1);
        for order in 0..=deg {
            coef.push(diffs[0]);
            for i in 0..(deg - order) {
                diffs[i] = diffs[i + 1] - diffs[i];
            }
        }
        let s = (z - base) as f64;
        let mut acc = 0.0;
        let mut binom = 1.0;
        for (j, c) in coef.iter().enumerate() {
            acc += c * binom;
            binom *= (s - j as f64) / (j + 1) as f64;
        }
        acc
    }

    pub fn h(&self, l: usize, z: i64) -> f64 {
        self.p(l, z) * (1.0 - self.rho).powi(-z as i32)
    }

    /// Forward difference `Delta^j p(0, .)` at `z`.
    pub fn p0_difference(&self, j: usize, z: i64) -> f64 {
        let mut v: Vec<f64> = (0..=j as i64).map(|i| self.p(0, z + i)).collect();
        for order in 0..j {
            for i in 0..(j - order) {
                v[i] = v[i + 1] - v[i];
            }
        }
        v[0]
    }

    /// Writes `l, z, h` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["level", "site", "h"])?;
        for l in 0..=self.k {
            for z in self.zlo..=self.zhi {
                w.write_record(&[l.to_string(), z.to_string(), format!("{:e}", self.h(l, z))])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
