use crate::error::{Error, Result};

/// Closed finite window of sites `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::invalid("window", format!("lo {lo} > hi {hi}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn symmetric(radius: i64) -> Self {
        Self { lo: -radius, hi: radius }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: i64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.lo <= other.lo && self.hi >= other.hi
    }

    #[inline]
    pub(crate) fn index(&self, x: i64) -> usize {
        (x - self.lo) as usize
    }
}

/// Radius a window needs so that particles entering from outside cannot affect
/// observations up to time `horizon`, for disturbances travelling at most at
/// speed `1 + v_max` relative to the observation point.
pub fn required_radius(horizon: f64, v_max: f64) -> i64 {
    let h = horizon.max(0.0);
    ((1.0 + v_max) * h + 10.0 * h.sqrt() + 50.0).ceil() as i64
}

/// Exclusion configuration on a window, with particle positions kept sorted in
/// decreasing order (index 0 is the rightmost particle) and the number of jumps
/// across the bond from 0 to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    window: Window,
    eta: Vec<u8>,
    positions: Vec<i64>,
    crossings: i64,
    time: f64,
}

impl Configuration {
    pub fn from_occupation(window: Window, eta: Vec<u8>) -> Result<Self> {
        if eta.len() != window.len() {
            return Err(Error::invalid(
                "eta",
                format!("length {} does not match window length {}", eta.len(), window.len()),
            ));
        }
        if eta.iter().any(|&b| b > 1) {
            return Err(Error::invalid("eta", "occupation values must be 0 or 1"));
        }
        let positions = positions_of(window, &eta);
        Ok(Self { window, eta, positions, crossings: 0, time: 0.0 })
    }

    pub fn from_positions(window: Window, positions: &[i64]) -> Result<Self> {
        let mut eta = vec![0u8; window.len()];
        for &x in positions {
            if !window.contains(x) {
                return Err(Error::SiteOutsideWindow { site: x, lo: window.lo, hi: window.hi });
            }
            let i = window.index(x);
            if eta[i] == 1 {
                return Err(Error::invalid("positions", format!("site {x} listed twice")));
            }
            eta[i] = 1;
        }
        Self::from_occupation(window, eta)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn occupation(&self) -> &[u8] {
        &self.eta
    }

    /// Occupation at `x`; sites outside the window read as empty.
    pub fn eta(&self, x: i64) -> u8 {
        if self.window.contains(x) {
            self.eta[self.window.index(x)]
        } else {
            0
        }
    }

    /// Positions in decreasing order.
    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn particle_count(&self) -> usize {
        self.positions.len()
    }

    pub fn crossings(&self) -> i64 {
        self.crossings
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Vec<u8>, &mut Vec<i64>, &mut i64, &mut f64) {
        (&mut self.eta, &mut self.positions, &mut self.crossings, &mut self.time)
    }

    pub(crate) fn rebuild_positions(&mut self) {
        self.positions = positions_of(self.window, &self.eta);
    }

    /// Height with the origin anchored at zero at time 0:
    /// `h(x) = 2J + sum_{1..x} (1 - 2 eta)` for `x >= 0` and
    /// `h(x) = 2J - sum_{x+1..0} (1 - 2 eta)` for `x < 0`.
    pub fn height(&self, x: i64) -> Result<i64> {
        let w = self.window;
        if !w.contains(x) {
            return Err(Error::SiteOutsideWindow { site: x, lo: w.lo, hi: w.hi });
        }
        let step = |y: i64| 1 - 2 * self.eta(y) as i64;
        let h = if x >= 0 { (1..=x).map(step).sum::<i64>() } else { -((x + 1)..=0).map(step).sum::<i64>() };
        Ok(2 * self.crossings + h)
    }

    /// Checks the structural invariants; used by tests.
    pub fn check_invariants(&self) -> Result<()> {
        if self.eta.len() != self.window.len() {
            return Err(Error::Domain("occupation length mismatch".into()));
        }
        if self.positions != positions_of(self.window, &self.eta) {
            return Err(Error::Domain("positions out of sync with occupation".into()));
        }
        Ok(())
    }
}

fn positions_of(window: Window, eta: &[u8]) -> Vec<i64> {
    eta.iter().enumerate().rev().filter(|(_, &b)| b == 1).map(|(i, _)| window.lo + i as i64).collect()
}
