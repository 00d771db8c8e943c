use super::htable::{h_recursion, HTable};
use super::{q_bar_unchecked, q_pow, WalkKernelContext};
use crate::error::{Error, Result};

/// Probability that the rightward `Geom(rho)` walk started at `z` at time
/// `l - 1` first exceeds the curve `m -> X_0(n-m)` at time `m = k`.
///
/// Exact dynamic programming: surviving positions are confined between the
/// start and the curve, so no truncation is needed. This probability equals
/// `((1-rho)/rho) h^n_k(l, z)`.
pub fn hitting_dp(ctx: &WalkKernelContext, k: usize, l: usize, z: i64) -> Result<f64> {
    let n = ctx.n();
    if !(l <= k && k < n) {
        return Err(Error::invalid("levels", format!("need l <= k < n, got l = {l}, k = {k}, n = {n}")));
    }
    let curve_l = ctx.x0(n - l);
    if z > curve_l {
        return Err(Error::Domain(format!(
            "start {z} lies above the curve value {curve_l}; the hitting interpretation needs z <= X_0(n-l)"
        )));
    }
    let q = 1.0 - ctx.rho();
    let rho = ctx.rho();
    // mass[i] at position lo + i, all positions <= current curve value
    let mut lo = z;
    let mut mass = vec![1.0];
    for m in l..=k {
        let curve = ctx.x0(n - m);
        if m == k {
            let p: f64 = mass
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    let b = lo + i as i64;
                    w * if b >= curve { 1.0 } else { q.powi((curve - b) as i32) }
                })
                .sum();
            return Ok(p);
        }
        // survivors at b' in [lo + 1, curve]
        let new_lo = lo + 1;
        if new_lo > curve {
            return Ok(0.0);
        }
        let len = (curve - new_lo + 1) as usize;
        let mut next = vec![0.0; len];
        let mut s = 0.0;
        for (i, slot) in next.iter_mut().enumerate() {
            // s = sum_{b < b'} mass(b) rho q^{b' - b - 1}
            let b = new_lo + i as i64 - 1;
            let w = if b >= lo && ((b - lo) as usize) < mass.len() { mass[(b - lo) as usize] } else { 0.0 };
            s = q * s + rho * w;
            *slot = s;
        }
        lo = new_lo;
        mass = next;
    }
    unreachable!("loop returns at m == k")
}

/// `G_{0,m}(z1, z2) = E_{B_0 = z1}[ Qbar^{(m - tau)}(B_tau, z2) 1_{tau < m} ]` for the
/// leftward walk `B` and `tau = min{j >= 0 : B_j > X_0(j+1)}`.
///
/// Positions at or below `X_0(m)` can no longer hit the curve before time `m`
/// and are dropped, which makes the recursion finite and exact.
pub fn g_hit(ctx: &WalkKernelContext, m: usize, z1: i64, z2: i64) -> Result<f64> {
    if m == 0 || m > ctx.n() {
        return Err(Error::invalid("m", format!("need 1 <= m <= n = {}, got {m}", ctx.n())));
    }
    let rho = ctx.rho();
    let q = 1.0 - rho;
    if z1 > ctx.x0(1) {
        return Ok(q_bar_unchecked(rho, m as u64, z1 - z2));
    }
    let floor = ctx.x0(m);
    if z1 <= floor {
        return Ok(0.0);
    }
    // mass on (floor, hi], stored from the top: mass[i] at hi - i
    let mut hi = z1;
    let mut mass = vec![1.0];
    let mut total = 0.0;
    for j in 1..m {
        let curve = ctx.x0(j + 1);
        let top = hi - 1;
        if top <= floor {
            break;
        }
        let len = (top - floor) as usize;
        let mut next = vec![0.0; len];
        let mut s = 0.0;
        for (i, slot) in next.iter_mut().enumerate() {
            let b_above = top - i as i64 + 1;
            let idx = hi - b_above;
            let w = if idx >= 0 && (idx as usize) < mass.len() { mass[idx as usize] } else { 0.0 };
            s = q * s + rho * w;
            *slot = s;
        }
        // split into hits (b' > curve) and survivors
        let mut survivors = Vec::with_capacity(len);
        let mut survivor_hi = None;
        for (i, &w) in next.iter().enumerate() {
            let b = top - i as i64;
            if b > curve {
                total += w * q_bar_unchecked(rho, (m - j) as u64, b - z2);
            } else {
                if survivor_hi.is_none() {
                    survivor_hi = Some(b);
                }
                survivors.push(w);
            }
        }
        match survivor_hi {
            Some(b) => {
                hi = b;
                mass = survivors;
            }
            None => break,
        }
    }
    Ok(total)
}

/// `G_{0,n}(z1, z2) = sum_k ((1-rho)/rho) Q^{n-k}(z1, X_0(n-k)) h^n_k(0, z2)` using
/// precomputed tables for `k = 0..n`.
pub fn g_formula(ctx: &WalkKernelContext, tables: &[HTable], z1: i64, z2: i64) -> Result<f64> {
    let n = ctx.n();
    if tables.len() != n {
        return Err(Error::invalid("tables", format!("need {n} tables, got {}", tables.len())));
    }
    let rho = ctx.rho();
    let mut s = 0.0;
    for (k, tab) in tables.iter().enumerate() {
        s += (1.0 - rho) / rho * q_pow(ctx, (n - k) as u64, z1, ctx.x0(n - k))? * tab.h(0, z2);
    }
    Ok(s)
}

/// `h` tables for every level of `ctx`.
pub fn h_tables(ctx: &WalkKernelContext) -> Result<Vec<HTable>> {
    (0..ctx.n()).map(|k| h_recursion(ctx, k)).collect()
}

/// Residual of the splitting identity
/// `h^{N1+N2}_{k+N2}(0, z) = sum_{z3} (Q^{N2}(z3, z) - G_{0,N2}(z3, z)) h^{N1}_k(0, z3)`,
/// where `h^{N1}` uses the particles `1..=N1` and `G_{0,N2}` the particles `N1+1..=n`.
///
/// The level must satisfy `k <= N1 - 1`; `k = N1` has no table on the left piece.
pub fn splitting_check(ctx: &WalkKernelContext, n1: usize, n2: usize, k: usize, z: i64) -> Result<f64> {
    let (lhs, rhs) = splitting_sides(ctx, n1, n2, k, z)?;
    Ok((lhs - rhs).abs())
}

pub fn splitting_sides(ctx: &WalkKernelContext, n1: usize, n2: usize, k: usize, z: i64) -> Result<(f64, f64)> {
    let n = ctx.n();
    if n1 + n2 != n || n1 == 0 {
        return Err(Error::invalid("N1, N2", format!("need N1 >= 1 and N1 + N2 = n = {n}")));
    }
    if k >= n1 {
        return Err(Error::invalid(
            "k",
            format!("level {k} must be at most N1 - 1 = {}; h^N1_N1 is not defined", n1 - 1),
        ));
    }
    let left = ctx.sub(1, n1)?;
    let h_left = h_recursion(&left, k)?;
    if n2 == 0 {
        let v = h_left.h(0, z);
        return Ok((v, v));
    }
    let full = h_recursion(ctx, k + n2)?;
    let right = ctx.sub(n1 + 1, n)?;
    let lhs = full.h(0, z);
    let lo = z.min(ctx.x0(n)) + n2 as i64 - 3;
    let hi = z.max(ctx.x0(n1 + 1)) + 3;
    let mut rhs = 0.0;
    for z3 in lo..=hi {
        let d = q_pow(ctx, n2 as u64, z3, z)? - g_hit(&right, n2, z3, z)?;
        rhs += d * h_left.h(0, z3);
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_step_hit() {
        let ctx = WalkKernelContext::new(0.5, 1.0, vec![4, 0, -2]).unwrap();
        // l = k: (1-rho)^{X_0(n-k) - z}
        let p = hitting_dp(&ctx, 1, 1, -3).unwrap();
        assert_abs_diff_eq!(p, 0.5f64.powi(3), epsilon = 1e-15);
        assert!(hitting_dp(&ctx, 1, 1, 1).is_err());
    }

    #[test]
    fn hit_probabilities_sum_below_one() {
        let ctx = WalkKernelContext::new(0.35, 1.0, vec![9, 5, 4, 0, -1, -7]).unwrap();
        for z in -15..=-7 {
            let s: f64 = (0..6).map(|k| hitting_dp(&ctx, k, 0, z).unwrap()).sum();
            assert!(s <= 1.0 + 1e-12);
            assert!(s > 0.0);
        }
    }

    #[test]
    fn g_immediate_and_impossible_hits() {
        let ctx = WalkKernelContext::new(0.4, 1.0, vec![6, 2, -1]).unwrap();
        assert_abs_diff_eq!(g_hit(&ctx, 3, 9, 1).unwrap(), q_bar_unchecked(0.4, 3, 8), epsilon = 1e-15);
        assert_eq!(g_hit(&ctx, 3, -1, 1).unwrap(), 0.0);
    }

    #[test]
    fn splitting_rejects_top_level() {
        let ctx = WalkKernelContext::new(0.4, 1.0, vec![6, 2, -1, -3]).unwrap();
        assert!(splitting_check(&ctx, 2, 2, 2, 0).is_err());
        assert!(splitting_check(&ctx, 4, 0, 1, 0).unwrap() == 0.0);
    }
}
