//! Exact finite-time distribution of a tagged particle for deterministic
//! initial data: geometric walk operators, the backward heat equation table,
//! hitting probabilities and the lattice Fredholm determinant.

mod hitting;
mod htable;
mod kernel;

pub use hitting::{g_formula, g_hit, h_tables, hitting_dp, splitting_check, splitting_sides};
pub use htable::{h_recursion, h_recursion_on, HTable};
pub use kernel::{fredholm_prob, fredholm_prob_low_rank, phi, phi_raw, phi_series, FredholmResult, KernelMatrix};

use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

/// Density, time and initial positions `X_0(1) > ... > X_0(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkKernelContext {
    rho: f64,
    t: f64,
    x0: Vec<i64>,
}

impl WalkKernelContext {
    pub fn new(rho: f64, t: f64, x0: Vec<i64>) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::invalid("rho", format!("must lie in (0, 1), got {rho}")));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid("t", format!("must be finite and non-negative, got {t}")));
        }
        if x0.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::invalid("x0", "positions must be strictly decreasing"));
        }
        Ok(Self { rho, t, x0 })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.x0.len()
    }

    pub fn positions(&self) -> &[i64] {
        &self.x0
    }

    /// `X_0(i)` with 1-based label.
    pub fn x0(&self, label: usize) -> i64 {
        self.x0[label - 1]
    }

    /// Context with the same density and time and the labels `range` (1-based, inclusive).
    pub fn sub(&self, first: usize, last: usize) -> Result<Self> {
        if first == 0 || last > self.n() || first > last {
            return Err(Error::invalid("labels", format!("bad range {first}..={last}")));
        }
        Self::new(self.rho, self.t, self.x0[first - 1..last].to_vec())
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(rho, self.t, self.x0.clone())
    }
}

/// Generalized binomial `a (a-1) ... (a-r+1) / r!`, a polynomial of degree `r` in `a`.
pub fn binom_poly(a: i64, r: u64) -> f64 {
    let mut v = 1.0;
    for i in 0..r {
        v *= (a - i as i64) as f64 / (i + 1) as f64;
    }
    v
}

/// Poisson probability `e^{-t} t^m / m!`, zero for `m < 0`.
pub fn poisson_pmf(m: i64, t: f64) -> f64 {
    if m < 0 {
        0.0
    } else if t == 0.0 {
        if m == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (m as f64 * t.ln() - t - ln_factorial(m as u64)).exp()
    }
}

/// `m`-step transition probability of the leftward `Geom(rho)` walk.
pub fn q_pow(ctx: &WalkKernelContext, m: u64, x: i64, y: i64) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("m", "step count must be at least 1"));
    }
    let d = x - y;
    if d < m as i64 {
        return Ok(0.0);
    }
    Ok(q_bar_unchecked(ctx.rho, m, d))
}

/// Polynomial-in-`y` extension of `q_pow` (times `(1 - rho)^{-y}` weights),
/// agreeing with it whenever `x - y >= 1`.
pub fn q_bar(ctx: &WalkKernelContext, m: u64, x: i64, y: i64) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("m", "step count must be at least 1"));
    }
    Ok(q_bar_unchecked(ctx.rho, m, x - y))
}

pub(crate) fn q_bar_unchecked(rho: f64, m: u64, d: i64) -> f64 {
    let ln = m as f64 * rho.ln() + (d - m as i64) as f64 * (1.0 - rho).ln();
    ln.exp() * binom_poly(d - 1, m - 1)
}

/// `R_{rho,t}(x, y) = e^{-t} (1-rho)^{x-y} t^{x-y} / (x-y)!` or its inverse
/// `e^{t} (1-rho)^{x-y} (-t)^{x-y} / (x-y)!`; both vanish for `x < y`.
pub fn r_op(ctx: &WalkKernelContext, x: i64, y: i64, inverse: bool) -> f64 {
    let d = x - y;
    if d < 0 {
        return 0.0;
    }
    let (rho, t) = (ctx.rho, ctx.t);
    let w = (1.0 - rho).powi(d as i32);
    if inverse {
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        sign * w * poisson_pmf(d, t) * (2.0 * t).exp()
    } else {
        w * poisson_pmf(d, t)
    }
}

/// Unconjugated `Psi^n_k(x) = e^{-t} sum_j (-1)^j C(k, j) t^{m-j} / (m-j)!`
/// with `m = x + k - X_0(n-k)`.
pub fn psi_raw(ctx: &WalkKernelContext, k: usize, x: i64) -> f64 {
    let n = ctx.n();
    let m = x + k as i64 - ctx.x0(n - k);
    if m < 0 {
        return 0.0;
    }
    let mut s = 0.0;
    let jmax = (k as i64).min(m);
    for j in 0..=jmax {
        let c = binom_poly(k as i64, j as u64);
        let term = c * poisson_pmf(m - j, ctx.t);
        s += if j % 2 == 0 { term } else { -term };
    }
    s
}

/// Conjugated `Psi^n_{rho,k}(x) = ((1-rho)/rho)^k (1-rho)^{x - X_0(n-k)} Psi^n_k(x)`.
pub fn psi(ctx: &WalkKernelContext, k: usize, x: i64) -> Result<f64> {
    let n = ctx.n();
    if k >= n {
        return Err(Error::invalid("k", format!("level {k} must be below n = {n}")));
    }
    let rho = ctx.rho;
    let conj = ((1.0 - rho) / rho).powi(k as i32) * (1.0 - rho).powi((x - ctx.x0(n - k)) as i32);
    Ok(conj * psi_raw(ctx, k, x))
}
