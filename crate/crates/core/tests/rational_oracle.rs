//! Hitting probabilities by exact path enumeration in rational arithmetic,
//! against the floating-point dynamic program and the heat-equation table.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use shocklab::exact::{h_recursion, hitting_dp, WalkKernelContext};

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn pow(x: &BigRational, e: i64) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

/// Sum over all step sequences `B_m = B_{m-1} + 1 + Geom` from `b` at time `m`
/// that stay at or below `curve[m]` before `k` and exceed `curve[k]` at `k`.
fn enumerate(b: i64, m: usize, k: usize, curve: &[i64], rho: &BigRational, q: &BigRational) -> BigRational {
    if m == k {
        // P(b + 1 + Geom > curve) = q^{curve - b} for b <= curve
        return if b >= curve[k] { BigRational::one() } else { pow(q, curve[k] - b) };
    }
    let mut total = BigRational::zero();
    for next in (b + 1)..=curve[m] {
        let p = rho * pow(q, next - b - 1);
        total += p * enumerate(next, m + 1, k, curve, rho, q);
    }
    total
}

#[test]
fn hitting_probability_matches_rational_enumeration() {
    let configs: [(i64, i64, Vec<i64>); 4] =
        [(1, 2, vec![0, -2]), (3, 10, vec![2, 0, -1]), (7, 10, vec![5, 1, 0, -3]), (2, 5, vec![3, 2, -1, -2, -4])];
    for (num, den, x0) in configs {
        let rho = ratio(num, den);
        let q = BigRational::one() - &rho;
        let ctx = WalkKernelContext::new(num as f64 / den as f64, 1.0, x0.clone()).unwrap();
        let n = x0.len();
        for k in 0..n {
            let table = h_recursion(&ctx, k).unwrap();
            for l in 0..=k {
                // curve indexed by walk time m: X_0(n - m)
                let curve: Vec<i64> = (0..n).map(|m| x0[n - m - 1]).collect();
                for z in (curve[l] - 6)..=curve[l] {
                    let exact = enumerate(z, l, k, &curve, &rho, &q).to_f64().unwrap();
                    let dp = hitting_dp(&ctx, k, l, z).unwrap();
                    assert!(
                        (dp - exact).abs() <= 1e-14 * exact.max(1e-300) + 1e-16,
                        "rho {num}/{den} k {k} l {l} z {z}: {dp} vs {exact}"
                    );
                    let rho_f = num as f64 / den as f64;
                    let h = table.h(l, z) * (1.0 - rho_f) / rho_f;
                    assert!((h - exact).abs() <= 1e-10, "table: {h} vs {exact}");
                }
            }
        }
    }
}
