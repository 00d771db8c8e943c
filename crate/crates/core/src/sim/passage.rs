//! Exact sampling of TASEP through jump-time recursions.
//!
//! With particles labelled right to left, the `j`-th jump time of particle `i`
//! is `T(i, j) = max(T(i, j-1), T(i-1, m)) + E` where `m` is the number of jumps
//! particle `i-1` must have made to vacate the target site. Rows only need the
//! row to their right, and a row stops as soon as a jump time passes the
//! horizon, so the cost is proportional to the number of jumps actually made.

use super::config::Configuration;
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// What the first (rightmost) processed particle sees ahead of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Closed boundary at this site (rightmost admissible position).
    Wall(i64),
    /// Empty half-line.
    Free,
    /// Product Bernoulli(`rho`) half-line. By Burke's theorem the particle then
    /// jumps as a Poisson process of rate `1 - rho`, which gives the exact
    /// infinite-volume law of everything behind it.
    Stationary(f64),
}

impl From<Option<i64>> for Boundary {
    fn from(wall: Option<i64>) -> Self {
        wall.map_or(Boundary::Free, Boundary::Wall)
    }
}

/// Row-by-row jump-time sampler, processing particles from right to left.
#[derive(Debug)]
pub struct Passage {
    horizon: f64,
    boundary: Boundary,
    prev: Vec<f64>,
    cur: Vec<f64>,
    prev_x: Option<i64>,
    rows: usize,
}

impl Passage {
    /// `wall` is the rightmost admissible site (closed boundary); `None` means the
    /// first particle moves freely.
    pub fn new(horizon: f64, wall: Option<i64>) -> Result<Self> {
        Self::with_boundary(horizon, wall.into())
    }

    pub fn with_boundary(horizon: f64, boundary: Boundary) -> Result<Self> {
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::invalid("t", "must be finite and non-negative"));
        }
        if let Boundary::Stationary(rho) = boundary {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::invalid("rho", "must lie in [0, 1]"));
            }
        }
        Ok(Self { horizon, boundary, prev: Vec::new(), cur: Vec::new(), prev_x: None, rows: 0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Jump times of the most recently processed particle.
    pub fn last_row(&self) -> &[f64] {
        &self.prev
    }

    /// Jump times of the particle before the most recent one.
    pub fn previous_row(&self) -> &[f64] {
        &self.cur
    }

    /// Processes the next particle (initially at `x`, left of all earlier ones)
    /// and returns its position at the horizon.
    pub fn advance(&mut self, x: i64, rng: &mut StreamRng) -> i64 {
        std::mem::swap(&mut self.prev, &mut self.cur);
        // `cur` now holds the row to the right; fill `prev` with the new row
        let right = &self.cur;
        let row = &mut self.prev;
        row.clear();
        let t = self.horizon;
        let mut last = 0.0f64;
        match self.prev_x {
            None => {
                let (limit, rate) = match self.boundary {
                    Boundary::Wall(w) => ((w - x).max(0) as u64, 1.0),
                    Boundary::Free => (u64::MAX, 1.0),
                    Boundary::Stationary(rho) => (if rho < 1.0 { u64::MAX } else { 0 }, 1.0 - rho),
                };
                let mut j = 0u64;
                while j < limit {
                    last += rng::exp1(rng) / rate;
                    if last > t {
                        break;
                    }
                    row.push(last);
                    j += 1;
                }
            }
            Some(xr) => {
                // jump j needs the right neighbour to have made m = x + j - xr + 1 jumps
                let offset = x - xr + 1;
                let free = (-offset).max(0);
                for _ in 0..free {
                    last += rng::exp1(rng);
                    if last > t {
                        return self.finish(x);
                    }
                    row.push(last);
                }
                let start = (offset + free) as usize;
                for &gate in right.get(start..).unwrap_or(&[]) {
                    last = last.max(gate) + rng::exp1(rng);
                    if last > t {
                        break;
                    }
                    row.push(last);
                }
            }
        }
        self.finish(x)
    }

    fn finish(&mut self, x: i64) -> i64 {
        self.prev_x = Some(x);
        self.rows += 1;
        x + self.prev.len() as i64
    }
}

/// Positions at time `t` of all particles of `config`, with a closed boundary at
/// the right end of its window. Same law as the event-driven evolution.
pub fn evolve_passage(config: &Configuration, t: f64, rng: &mut StreamRng) -> Result<Vec<i64>> {
    let mut p = Passage::new(t, Some(config.window().hi))?;
    Ok(config.positions().iter().map(|&x| p.advance(x, rng)).collect())
}

/// Number of particles strictly right of `z` at time `t`, for particles
/// initially at `positions` (decreasing) and the given right wall.
pub fn count_right_of(positions: &[i64], boundary: Boundary, t: f64, z: i64, rng: &mut StreamRng) -> Result<i64> {
    let mut p = Passage::with_boundary(t, boundary)?;
    let mut n = 0i64;
    for &x in positions {
        if p.advance(x, rng) > z {
            n += 1;
        } else {
            break;
        }
    }
    Ok(n)
}

/// Height `h(t, z)` of a configuration evolved for time `t`, using
/// `h(t, z) = z + 2 (#{i: X_t(i) > z} - #{i: X_0(i) >= 1})`.
pub fn height_passage(config: &Configuration, t: f64, z: i64, rng: &mut StreamRng) -> Result<i64> {
    let w = config.window();
    if !w.contains(z) {
        return Err(Error::SiteOutsideWindow { site: z, lo: w.lo, hi: w.hi });
    }
    let b = config.positions().iter().take_while(|&&x| x >= 1).count() as i64;
    let n = count_right_of(config.positions(), Boundary::Wall(w.hi), t, z, rng)?;
    Ok(z + 2 * (n - b) + 2 * config.crossings())
}

/// Position at time `t` of a second class particle started at the origin.
///
/// `config` must have site 0 empty. The second class particle is replaced by
/// a hole-particle pair: sites `x < 0` keep their content, site 0 becomes a
/// hole, site 1 a particle, and site `x >= 2` carries the content of `x - 1`.
/// The pair particle label moves one step left whenever the next particle
/// jumps into the pair's hole, and the second class particle sits at the
/// hole, one site left of the pair particle. Coordinates left of the pair
/// coincide with the original ones.
pub fn second_class_passage(config: &Configuration, t: f64, rng: &mut StreamRng) -> Result<i64> {
    if config.eta(0) != 0 {
        return Err(Error::invalid("config", "site 0 must be empty"));
    }
    let pos = config.positions();
    let split = pos.partition_point(|&x| x > 0);
    second_class_split(&pos[..split], &pos[split..], Boundary::Wall(config.window().hi + 1), t, rng)
}

/// Second class particle at the origin between `right` (positive sites,
/// decreasing) and `left` (negative sites, decreasing). `boundary` applies to
/// the expanded system, where the right particles sit one site further right.
pub fn second_class_split(right: &[i64], left: &[i64], boundary: Boundary, t: f64, rng: &mut StreamRng) -> Result<i64> {
    if right.iter().any(|&x| x <= 0) || left.iter().any(|&x| x >= 0) {
        return Err(Error::invalid("positions", "right must be positive and left negative"));
    }
    let mut expanded: Vec<i64> = Vec::with_capacity(right.len() + left.len() + 1);
    expanded.extend(right.iter().map(|&x| x + 1));
    let k0 = expanded.len();
    expanded.push(1);
    expanded.extend_from_slice(left);

    let mut p = Passage::with_boundary(t, boundary)?;
    for &x in &expanded[..k0] {
        p.advance(x, rng);
    }
    let mut k = k0;
    let mut xk = p.advance(expanded[k], rng);
    let mut tau = 0.0f64;
    while let Some(&xn) = expanded.get(k + 1) {
        let x_pair0 = expanded[k];
        p.advance(xn, rng);
        let (row_pair, row_next) = (p.previous_row(), p.last_row());
        let mut ptr = 0usize;
        let mut switched = None;
        for (j, &s) in row_next.iter().enumerate() {
            while ptr < row_pair.len() && row_pair[ptr] <= s {
                ptr += 1;
            }
            if s <= tau {
                continue;
            }
            let pos_next = xn + j as i64 + 1;
            let pos_pair = x_pair0 + ptr as i64;
            if pos_next == pos_pair - 1 {
                switched = Some(s);
                break;
            }
        }
        match switched {
            Some(s) => {
                tau = s;
                k += 1;
                xk = xn + row_next.len() as i64;
            }
            None => break,
        }
    }
    Ok(xk - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;
    use crate::sim::config::Window;

    #[test]
    fn free_particle_is_poisson() {
        let mut rng = from_seed(5);
        let n = 20000;
        let t = 4.0;
        let mut s = 0.0;
        for _ in 0..n {
            let mut p = Passage::new(t, None).unwrap();
            s += p.advance(0, &mut rng) as f64;
        }
        let mean = s / n as f64;
        assert!((mean - t).abs() < 4.0 * (t / n as f64).sqrt());
    }

    #[test]
    fn order_and_wall_respected() {
        let c = Configuration::from_positions(Window::new(-30, 10).unwrap(), &[8, 5, 4, 0, -3, -20]).unwrap();
        let mut rng = from_seed(9);
        for _ in 0..200 {
            let xs = evolve_passage(&c, 6.0, &mut rng).unwrap();
            assert!(xs[0] <= 10);
            assert!(xs.windows(2).all(|w| w[0] > w[1]));
            assert!(xs.iter().zip(c.positions()).all(|(a, b)| a >= b));
        }
    }
}
