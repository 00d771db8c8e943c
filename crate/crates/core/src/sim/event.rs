//! Continuous-time event-driven dynamics on a closed window.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::config::{Configuration, Window};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, Copy)]
struct Ring {
    time: f64,
    site: i64,
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ring {}
impl PartialOrd for Ring {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ring {
    // min-heap on time
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.site.cmp(&self.site))
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t", format!("must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// Runs TASEP (rate-1 right jumps, exclusion, closed window boundaries) from
/// `config` for time `t`.
pub fn evolve(config: &Configuration, t: f64, seed: u64) -> Result<Configuration> {
    let mut rng = rng::from_seed(seed);
    evolve_with(config, t, &mut rng)
}

pub fn evolve_with(config: &Configuration, t: f64, rng: &mut StreamRng) -> Result<Configuration> {
    check_horizon(t)?;
    let mut out = config.clone();
    let w = out.window();
    let t0 = out.time();
    let mut heap: BinaryHeap<Ring> =
        out.positions().iter().rev().map(|&site| Ring { time: t0 + rng::exp1(rng), site }).collect();
    {
        let (eta, _, crossings, _) = out.parts_mut();
        while let Some(Ring { time, site }) = heap.pop() {
            if time > t0 + t {
                break;
            }
            let mut at = site;
            if site < w.hi && eta[w.index(site + 1)] == 0 {
                eta[w.index(site)] = 0;
                eta[w.index(site + 1)] = 1;
                if site == 0 {
                    *crossings += 1;
                }
                at = site + 1;
            }
            let e = rng::exp1(rng);
            heap.push(Ring { time: time + e, site: at });
        }
    }
    out.rebuild_positions();
    out.parts_mut().3.clone_from(&(t0 + t));
    Ok(out)
}

/// Two configurations under the basic coupling that differ at exactly one site,
/// where `tagged` has a particle and `base` does not.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub base: Configuration,
    pub tagged: Configuration,
    pub discrepancy: i64,
}

impl CoupledPair {
    /// Builds the pair from `base` by adding a particle at the empty site `x`.
    pub fn with_extra_particle(base: Configuration, x: i64) -> Result<Self> {
        let w = base.window();
        if !w.contains(x) {
            return Err(Error::SiteOutsideWindow { site: x, lo: w.lo, hi: w.hi });
        }
        if base.eta(x) == 1 {
            return Err(Error::invalid("x", format!("site {x} is already occupied")));
        }
        let mut eta = base.occupation().to_vec();
        eta[w.index(x)] = 1;
        let mut tagged = Configuration::from_occupation(w, eta)?;
        tagged.parts_mut().2.clone_from(&base.crossings());
        tagged.parts_mut().3.clone_from(&base.time());
        Ok(Self { base, tagged, discrepancy: x })
    }

    pub fn check_invariants(&self) -> Result<()> {
        let w = self.base.window();
        let mut diff = Vec::new();
        for x in w.lo..=w.hi {
            match (self.base.eta(x), self.tagged.eta(x)) {
                (a, b) if a == b => {}
                (0, 1) => diff.push(x),
                _ => return Err(Error::Domain(format!("base exceeds tagged at {x}"))),
            }
        }
        if diff != [self.discrepancy] {
            return Err(Error::Domain(format!("discrepancy set {diff:?} but recorded {}", self.discrepancy)));
        }
        Ok(())
    }
}

/// Evolves both configurations with shared clocks. Each clock sits on a
/// particle of `tagged`; when the clock at `x` rings, `tagged` attempts
/// `x -> x + 1` and `base` attempts the same jump if it has a particle at `x`.
/// The discrepancy then moves exactly like a second class particle.
pub fn evolve_coupled(pair: &CoupledPair, t: f64, seed: u64) -> Result<CoupledPair> {
    let mut rng = rng::from_seed(seed);
    evolve_coupled_with(pair, t, &mut rng)
}

pub fn evolve_coupled_with(pair: &CoupledPair, t: f64, rng: &mut StreamRng) -> Result<CoupledPair> {
    check_horizon(t)?;
    let w: Window = pair.tagged.window();
    let mut base = pair.base.clone();
    let mut tagged = pair.tagged.clone();
    let mut d = pair.discrepancy;
    let t0 = tagged.time();
    let mut heap: BinaryHeap<Ring> =
        tagged.positions().iter().rev().map(|&site| Ring { time: t0 + rng::exp1(rng), site }).collect();
    {
        let (be, _, bj, _) = base.parts_mut();
        let (te, _, tj, _) = tagged.parts_mut();
        while let Some(Ring { time, site }) = heap.pop() {
            if time > t0 + t {
                break;
            }
            let mut at = site;
            if site < w.hi {
                let (i, j) = (w.index(site), w.index(site + 1));
                let base_moves = be[i] == 1 && be[j] == 0;
                if te[j] == 0 {
                    te[i] = 0;
                    te[j] = 1;
                    if site == 0 {
                        *tj += 1;
                    }
                    at = site + 1;
                }
                if base_moves {
                    be[i] = 0;
                    be[j] = 1;
                    if site == 0 {
                        *bj += 1;
                    }
                }
                if site == d && at == site + 1 {
                    d = site + 1;
                } else if site + 1 == d && base_moves {
                    d = site;
                }
            }
            let e = rng::exp1(rng);
            heap.push(Ring { time: time + e, site: at });
        }
    }
    base.rebuild_positions();
    tagged.rebuild_positions();
    base.parts_mut().3.clone_from(&(t0 + t));
    tagged.parts_mut().3.clone_from(&(t0 + t));
    Ok(CoupledPair { base, tagged, discrepancy: d })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(lo: i64, hi: i64, xs: &[i64]) -> Configuration {
        Configuration::from_positions(Window::new(lo, hi).unwrap(), xs).unwrap()
    }

    #[test]
    fn particle_count_and_order_preserved() {
        let c = cfg(-20, 20, &[10, 3, 2, 1, -4, -9, -10]);
        for seed in 0..30 {
            let e = evolve(&c, 5.0, seed).unwrap();
            assert_eq!(e.particle_count(), 7);
            e.check_invariants().unwrap();
        }
    }

    #[test]
    fn zero_time_is_identity_and_seed_is_deterministic() {
        let c = cfg(-10, 10, &[5, 0, -1, -7]);
        assert_eq!(evolve(&c, 0.0, 3).unwrap().positions(), c.positions());
        assert_eq!(evolve(&c, 4.0, 3).unwrap(), evolve(&c, 4.0, 3).unwrap());
        assert!(evolve(&c, -1.0, 3).is_err());
    }

    #[test]
    fn single_particle_moves_poisson() {
        let c = cfg(-5, 200, &[0]);
        let n = 4000;
        let t = 3.0;
        let mean: f64 = (0..n).map(|s| evolve(&c, t, s).unwrap().positions()[0] as f64).sum::<f64>() / n as f64;
        assert!((mean - t).abs() < 4.0 * (t / n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn closed_boundary_blocks() {
        let c = cfg(0, 3, &[3, 2, 1, 0]);
        let e = evolve(&c, 10.0, 1).unwrap();
        assert_eq!(e.positions(), &[3, 2, 1, 0]);
    }

    #[test]
    fn coupling_keeps_single_discrepancy() {
        let base = cfg(-15, 15, &[9, 4, 3, -1, -2, -6]);
        let pair = CoupledPair::with_extra_particle(base, 0).unwrap();
        for seed in 0..50 {
            let p = evolve_coupled(&pair, 3.0, seed).unwrap();
            p.check_invariants().unwrap();
        }
    }
}
