//! Per-replica samplers on the infinite lattice.
//!
//! The right half-line is cut behind a leader particle: everything ahead of
//! it is unsampled Bernoulli(`rho_+`), so by Burke's theorem the leader jumps
//! as a Poisson process of rate `1 - rho_+` and the particles behind it are
//! sampled exactly by the jump-time recursion.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::scaling::ScalingFrame;
use crate::sim::{second_class_split, Boundary, Passage};

/// Poisson-tail margin used for light cones: `t + 10 sqrt(t) + 50`.
pub fn light_cone(t: f64) -> i64 {
    (t + 10.0 * t.sqrt() + 50.0).ceil() as i64
}

/// Initial data of one shock replica.
#[derive(Debug, Clone)]
pub struct ShockInit {
    /// Particles at sites `>= 1` up to and including the leader, decreasing.
    pub right: Vec<i64>,
    /// Particles at sites `<= 0`, decreasing.
    pub left: Vec<i64>,
    pub n_right: f64,
    pub n_left: f64,
}

/// Samples Bernoulli data with site 0 drawn from `rho_0`.
///
/// The right side extends until the first particle at or beyond
/// `max(span, reach)`; the left side covers `[lo, 0]`.
fn sample_shock(frame: &ScalingFrame, rho_0: f64, lo: i64, reach: i64, rng: &mut StreamRng) -> Result<ShockInit> {
    let (rm, rp) = (frame.rho_minus, frame.rho_plus);
    let t_char = frame.char_time();
    let span = frame.delta_rho() * t_char;
    let r_hi = span.ceil() as i64 - 1;
    let l_lo = (-span).ceil() as i64;
    if lo > l_lo {
        return Err(Error::invalid("window", "left extent must cover the N_l stretch"));
    }
    let site0 = rng.gen_bool(rho_0);
    let mut count_r = site0 as i64;
    let mut right = Vec::new();
    let stop = reach.max(r_hi + 1).max(1);
    let mut x = 1i64;
    loop {
        if rng.gen_bool(rp) {
            right.push(x);
            if x <= r_hi {
                count_r += 1;
            }
            if x >= stop {
                break;
            }
        }
        x += 1;
        if rp == 0.0 && x > stop {
            break;
        }
    }
    right.reverse();
    let mut left = Vec::new();
    let mut count_l = 0i64;
    if site0 {
        left.push(0);
    }
    for x in (lo..0).rev() {
        if rng.gen_bool(rm) {
            left.push(x);
            if x >= l_lo {
                count_l += 1;
            }
        }
    }
    Ok(ShockInit {
        right,
        left,
        n_right: -frame.delta_rho() * rp * t_char + count_r as f64,
        n_left: -frame.delta_rho() * rm * t_char + count_l as f64,
    })
}

/// Heights at the shock and centre sites and the label count `n*` of one
/// replica of the two-sided Bernoulli system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockSample {
    pub n_right: f64,
    pub n_left: f64,
    pub height_shock: i64,
    pub height_center: i64,
    /// Number of particles initially at negative sites ending `>= a_target`.
    pub n_star: i64,
}

pub fn shock_replica(frame: &ScalingFrame, init_rng: &mut StreamRng, dyn_rng: &mut StreamRng) -> Result<ShockSample> {
    let t = frame.y_eps();
    let cone = light_cone(t);
    let center = frame.gaussian_site();
    // The shock site moves with N_r + N_l, whose spread is far below the cone.
    let lo = (center.min(0) - cone - cone / 2).min((-frame.delta_rho() * frame.char_time()).floor() as i64 - 1);
    let reach = center.max(0) + cone / 2 + 1 - ((1.0 - frame.rho_plus) * t).floor() as i64;
    let init = sample_shock(frame, frame.rho_minus, lo, reach, init_rng)?;
    let z_shock = frame.shock_site(init.n_right, init.n_left);
    let z_low = z_shock.min(center) - 1;

    let mut p = Passage::with_boundary(t, Boundary::Stationary(frame.rho_plus))?;
    let mut finals = Vec::with_capacity(init.right.len() + 64);
    for &x in &init.right {
        finals.push(p.advance(x, dyn_rng));
    }
    if finals.first().is_some_and(|&f| f <= z_low) {
        return Err(Error::Domain(format!("leader ended at {} <= {z_low}", finals[0])));
    }
    let b = init.right.len() as i64;
    let mut tail_closed = false;
    let mut left_finals = Vec::new();
    for &x in &init.left {
        let f = p.advance(x, dyn_rng);
        left_finals.push((x, f));
        if f <= z_low {
            tail_closed = true;
            break;
        }
    }
    if !tail_closed && frame.rho_minus > 0.0 {
        return Err(Error::WindowTooSmall { lo, hi: 0, need_lo: lo - cone, need_hi: 0 });
    }
    let right_past = |z: i64| finals.iter().filter(|&&f| f > z).count() as i64;
    let left_past = |z: i64| left_finals.iter().filter(|&&(_, f)| f > z).count() as i64;
    let height = |z: i64| z + 2 * (right_past(z) + left_past(z) - b);
    let n_star = left_finals.iter().filter(|&&(x, f)| x < 0 && f >= z_shock).count() as i64;
    Ok(ShockSample {
        n_right: init.n_right,
        n_left: init.n_left,
        height_shock: height(z_shock),
        height_center: height(center),
        n_star,
    })
}

/// Second class particle started at the empty origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondClassSample {
    pub n_right: f64,
    pub n_left: f64,
    pub position: i64,
}

pub fn second_class_replica(
    frame: &ScalingFrame,
    init_rng: &mut StreamRng,
    dyn_rng: &mut StreamRng,
) -> Result<SecondClassSample> {
    let t = frame.y_eps();
    let cone = light_cone(t);
    let center = frame.gaussian_site();
    let lo = (center.min(0) - cone - cone / 2).min((-frame.delta_rho() * frame.char_time()).floor() as i64 - 1);
    let init = sample_shock(frame, 0.0, lo, 1, init_rng)?;
    let left: Vec<i64> = init.left.iter().copied().filter(|&x| x < 0).collect();
    let position = second_class_split(&init.right, &left, Boundary::Stationary(frame.rho_plus), t, dyn_rng)?;
    if position <= lo + cone {
        return Err(Error::WindowTooSmall { lo, hi: 0, need_lo: lo - cone, need_hi: 0 });
    }
    Ok(SecondClassSample { n_right: init.n_right, n_left: init.n_left, position })
}

/// Label and time of the stationary observable `X_t(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryTarget {
    pub rho: f64,
    pub t: f64,
    pub n: u64,
}

/// `X_t(n)` for Bernoulli(`rho`) data on the whole line, labels counted from
/// the first particle left of the origin.
pub fn stationary_replica(target: &StationaryTarget, init_rng: &mut StreamRng, dyn_rng: &mut StreamRng) -> Result<i64> {
    let StationaryTarget { rho, t, n } = *target;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid("rho", "must lie in (0, 1)"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "label must be at least 1"));
    }
    let mut leader = 0i64;
    while !init_rng.gen_bool(rho) {
        leader += 1;
    }
    let mut p = Passage::with_boundary(t, Boundary::Stationary(rho))?;
    p.advance(leader, dyn_rng);
    let mut x = 0i64;
    let mut last = 0;
    for _ in 0..n {
        loop {
            x -= 1;
            if init_rng.gen_bool(rho) {
                break;
            }
        }
        last = p.advance(x, dyn_rng);
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;

    #[test]
    fn counts_match_their_definition() {
        let f = ScalingFrame::at_time(0.3, 0.7, 50.0).unwrap();
        let mut r = from_seed(3);
        let s = sample_shock(&f, 0.3, -80, 40, &mut r).unwrap();
        let span = 0.4 * 50.0;
        let cr = s.right.iter().filter(|&&x| (x as f64) < span).count() as f64
            + s.left.first().map_or(0.0, |&x| (x == 0) as u8 as f64);
        assert!((s.n_right - (-0.4 * 0.7 * 50.0 + cr)).abs() < 1e-12);
        let cl = s.left.iter().filter(|&&x| x < 0 && x as f64 >= -span).count() as f64;
        assert!((s.n_left - (-0.4 * 0.3 * 50.0 + cl)).abs() < 1e-12);
        assert!(*s.right.first().unwrap() >= 40);
    }

    #[test]
    fn degenerate_wedge() {
        // rho = (0, 1): nothing can move
        let f = ScalingFrame::at_time(0.0, 1.0, 30.0).unwrap();
        let mut a = from_seed(1);
        let mut b = from_seed(2);
        let s = shock_replica(&f, &mut a, &mut b).unwrap();
        assert_eq!(s.height_center, 0);
        // N_r = -1 (site 0 is empty), so the shock site is 1 where h = -1
        assert_eq!((s.n_right, s.n_left), (-1.0, 0.0));
        assert_eq!(s.height_shock, -1);
    }
}
