use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use shocklab::exact::*;

fn random_positions(rng: &mut Xoshiro256PlusPlus, n: usize) -> Vec<i64> {
    let mut x = rng.gen_range(-3..6);
    let mut v = vec![x];
    for _ in 1..n {
        x -= rng.gen_range(1..4);
        v.push(x);
    }
    v
}

fn poisson_tail(t: f64, a: i64) -> f64 {
    // P(Poisson(t) > a) by summing the upper tail directly
    if a < 0 {
        return 1.0;
    }
    let mut s = 0.0;
    let mut m = a + 1;
    loop {
        let p = poisson_pmf(m, t);
        s += p;
        if p < 1e-18 && m as f64 > t {
            break;
        }
        m += 1;
    }
    s
}

#[test]
fn one_particle_law_is_the_poisson_tail() {
    for &t in &[0.5, 1.0, 5.0, 20.0] {
        let ctx = WalkKernelContext::new(0.5, t, vec![0]).unwrap();
        let amax = (t + 12.0 * t.sqrt() + 15.0) as i64;
        for a in -2..=amax {
            let p = fredholm_prob(&ctx, a).unwrap().raw;
            assert_abs_diff_eq!(p, poisson_tail(t, a), epsilon = 1e-8);
        }
    }
}

#[test]
fn biorthogonality() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(17);
    for trial in 0..50 {
        let n = 1 + trial % 6;
        let rho = [0.3, 0.5, 0.7][trial % 3];
        let t = [0.5, 1.0, 3.0][(trial / 3) % 3];
        let ctx = WalkKernelContext::new(rho, t, random_positions(&mut rng, n)).unwrap();
        let tables = h_tables(&ctx).unwrap();
        let lo = ctx.x0(n) - 1;
        let hi = ctx.x0(1) + n as i64 + (t + 20.0 * t.sqrt() + 40.0) as i64;
        for k in 0..n {
            for (l, table) in tables.iter().enumerate() {
                let s: f64 = (lo..=hi).map(|x| psi(&ctx, k, x).unwrap() * phi(&ctx, table, x)).sum();
                assert_abs_diff_eq!(s, if k == l { 1.0 } else { 0.0 }, epsilon = 1e-8);
            }
        }
    }
}

#[test]
fn heat_table_equals_hitting_probability() {
    // the walk hitting probability carries an extra factor (1-rho)/rho
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(23);
    for trial in 0..40 {
        let n = 1 + trial % 8;
        let rho = [0.3, 0.5, 0.7][trial % 3];
        let ctx = WalkKernelContext::new(rho, 1.0, random_positions(&mut rng, n)).unwrap();
        for k in 0..n {
            let tab = h_recursion(&ctx, k).unwrap();
            for l in 0..=k {
                let curve = ctx.x0(n - l);
                for z in (curve - 12)..=curve {
                    let p = hitting_dp(&ctx, k, l, z).unwrap();
                    let h = tab.h(l, z) * (1.0 - rho) / rho;
                    assert_abs_diff_eq!(p, h, epsilon = 1e-10);
                }
            }
        }
    }
}

#[test]
fn hitting_probability_monte_carlo() {
    // n = 2, l = 0, k = 1, rho = 1/2, X_0 = (0, -2), z = -3
    let ctx = WalkKernelContext::new(0.5, 1.0, vec![0, -2]).unwrap();
    let p = hitting_dp(&ctx, 1, 0, -3).unwrap();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(4);
    let trials = 1_000_000;
    let mut hits = 0u64;
    for _ in 0..trials {
        let mut b = -3i64;
        // step m = 0 must stay at or below X_0(2) = -2, step m = 1 must exceed X_0(1) = 0
        b += 1 + geometric(&mut rng, 0.5);
        if b > -2 {
            continue;
        }
        b += 1 + geometric(&mut rng, 0.5);
        if b > 0 {
            hits += 1;
        }
    }
    let est = hits as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((est - p).abs() < 3.0 * se, "dp {p} mc {est}");
}

fn geometric(rng: &mut Xoshiro256PlusPlus, rho: f64) -> i64 {
    let mut k = 0;
    while !rng.gen_bool(rho) {
        k += 1;
    }
    k
}

#[test]
fn hitting_operator_two_representations_agree() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
    for trial in 0..30 {
        let n = 1 + trial % 6;
        let rho = [0.3, 0.5, 0.7][trial % 3];
        let ctx = WalkKernelContext::new(rho, 1.0, random_positions(&mut rng, n)).unwrap();
        let tables = h_tables(&ctx).unwrap();
        for z1 in (ctx.x0(n) - 3)..(ctx.x0(1) + 4) {
            for z2 in (ctx.x0(n) - 6)..(ctx.x0(1) + 6) {
                let a = g_hit(&ctx, n, z1, z2).unwrap();
                let b = g_formula(&ctx, &tables, z1, z2).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-9 * b.abs().max(1.0));
            }
        }
    }
}

#[test]
fn hitting_operator_below_curve_is_path_probability() {
    // z2 <= X_0(n): G(z1, z2) = P_{z2}(hit before n, end at z1), by walk simulation
    let ctx = WalkKernelContext::new(0.5, 1.0, vec![2, 0, -1]).unwrap();
    let z2 = -3;
    let trials = 400_000;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(8);
    let mut counts = std::collections::HashMap::new();
    for _ in 0..trials {
        let mut b = z2;
        let mut hit = false;
        for m in 0..3 {
            b += 1 + geometric(&mut rng, 0.5);
            if b > ctx.x0(3 - m) {
                hit = true;
            }
        }
        if hit {
            *counts.entry(b).or_insert(0u64) += 1;
        }
    }
    for z1 in -2..8 {
        let g = g_hit(&ctx, 3, z1, z2).unwrap();
        let est = *counts.get(&z1).unwrap_or(&0) as f64 / trials as f64;
        let se = (g * (1.0 - g) / trials as f64).sqrt().max(1e-6);
        assert!((g - est).abs() < 4.0 * se, "z1 {z1}: {g} vs {est}");
    }
}

#[test]
fn splitting_identity() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(31);
    let mut worst = 0.0f64;
    for trial in 0..12 {
        let n = 6;
        let rho = [0.4, 0.3, 0.5, 0.7][trial % 4];
        let ctx = WalkKernelContext::new(rho, 1.0, random_positions(&mut rng, n)).unwrap();
        for n1 in 1..n {
            let n2 = n - n1;
            for k in 0..n1 {
                for z in (ctx.x0(n) - 20)..(ctx.x0(n) + 20) {
                    let r = splitting_check(&ctx, n1, n2, k, z).unwrap();
                    let (lhs, _) = splitting_sides(&ctx, n1, n2, k, z).unwrap();
                    worst = worst.max(r / lhs.abs().max(1.0));
                }
            }
        }
    }
    assert!(worst < 1e-8, "worst residual {worst}");
}

#[test]
fn polynomial_degrees() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(41);
    for trial in 0..20 {
        let n = 1 + trial % 6;
        let rho = [0.3, 0.5, 0.7][trial % 3];
        let ctx = WalkKernelContext::new(rho, 1.5, random_positions(&mut rng, n)).unwrap();
        for k in 0..n {
            let tab = h_recursion(&ctx, k).unwrap();
            let (lo, hi) = tab.window();
            let scale = (lo..=hi).map(|z| tab.p(0, z).abs()).fold(0.0, f64::max).max(1e-300);
            for z in lo..(hi - k as i64) {
                assert!(tab.p0_difference(k + 1, z).abs() <= 1e-6 * scale);
            }
            // unconjugated Phi is a polynomial of degree at most n - 1
            let vals: Vec<f64> = (lo..lo + n as i64 + 6).map(|z| phi_raw(&ctx, &tab, z)).collect();
            let s = vals.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
            let mut d = vals.clone();
            for order in 0..n {
                for i in 0..(d.len() - order - 1) {
                    d[i] = d[i + 1] - d[i];
                }
            }
            for v in &d[..d.len() - n] {
                assert!(v.abs() <= 1e-6 * s);
            }
        }
    }
}

#[test]
fn determinant_is_monotone_bounded_and_density_free() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(53);
    for trial in 0..20 {
        let n = 1 + trial % 5;
        let t = [0.5, 1.0, 2.5][trial % 3];
        let x0 = random_positions(&mut rng, n);
        let a_ctx = WalkKernelContext::new(0.5, t, x0.clone()).unwrap();
        let b_ctx = WalkKernelContext::new(0.3, t, x0.clone()).unwrap();
        let mut prev = 1.0 + 1e-9;
        for a in (x0[n - 1] - 2)..(x0[0] + 12) {
            let p = fredholm_prob(&a_ctx, a).unwrap().raw;
            assert!((-1e-9..=1.0 + 1e-9).contains(&p));
            assert!(p <= prev + 1e-9);
            prev = p;
            let q = fredholm_prob(&b_ctx, a).unwrap().raw;
            assert_abs_diff_eq!(p, q, epsilon = 1e-9);
        }
    }
}
