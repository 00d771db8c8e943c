use rand::Rng;

use super::config::{required_radius, Configuration, Window};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Law of the occupation at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroSite {
    /// Site 0 belongs to the left (density `rho_minus`) half-line.
    #[default]
    BernoulliMinus,
    /// Site 0 belongs to the right (density `rho_plus`) half-line.
    BernoulliPlus,
    /// Site 0 is empty, as needed when a second class particle starts there.
    ForcedEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliInit {
    pub rho_minus: f64,
    pub rho_plus: f64,
    /// Time scale `T` entering the fluctuation counts `N_r` and `N_l`, which
    /// look at the initial data on `[-(rho_plus - rho_minus) T, (rho_plus - rho_minus) T)`.
    pub char_time: f64,
    pub zero_site: ZeroSite,
    /// When set, the window must be large enough for an evolution up to this time.
    pub horizon: Option<f64>,
}

impl BernoulliInit {
    pub fn new(rho_minus: f64, rho_plus: f64, char_time: f64) -> Self {
        Self { rho_minus, rho_plus, char_time, zero_site: ZeroSite::default(), horizon: None }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.rho_minus, self.rho_plus);
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a >= b {
            return Err(Error::invalid("rho", format!("need 0 <= rho_minus < rho_plus <= 1, got {a}, {b}")));
        }
        if !(self.char_time.is_finite() && self.char_time >= 0.0) {
            return Err(Error::invalid("char_time", "must be finite and non-negative"));
        }
        Ok(())
    }

    /// Half-width `(rho_plus - rho_minus) T` of the stretch used by `N_r`, `N_l`.
    pub fn span(&self) -> f64 {
        (self.rho_plus - self.rho_minus) * self.char_time
    }
}

/// Two-sided Bernoulli initial data with its fluctuation counts.
#[derive(Debug, Clone)]
pub struct InitialSample {
    pub config: Configuration,
    pub params: BernoulliInit,
    /// `N_r = -(rho_plus - rho_minus) rho_plus T + sum_{0 <= x < span} eta(x)`.
    pub n_right: f64,
    /// `N_l = -(rho_plus - rho_minus) rho_minus T + sum_{-span <= x < 0} eta(x)`.
    pub n_left: f64,
}

impl InitialSample {
    /// Number of particles at sites `>= 0`; particle labels of the left
    /// half-line are offsets from this count.
    pub fn n_nonnegative(&self) -> usize {
        self.config.positions().iter().take_while(|&&x| x >= 0).count()
    }
}

pub fn init_bernoulli(params: &BernoulliInit, window: Window, seed: u64) -> Result<InitialSample> {
    let mut rng = rng::from_seed(seed);
    init_bernoulli_with(params, window, &mut rng)
}

pub fn init_bernoulli_with(params: &BernoulliInit, window: Window, rng: &mut StreamRng) -> Result<InitialSample> {
    params.validate()?;
    let span = params.span();
    let m = span.ceil() as i64;
    let mut need = Window { lo: -m, hi: m.max(0) };
    if let Some(h) = params.horizon {
        let r = required_radius(h, 1.0);
        need = Window { lo: need.lo.min(-r), hi: need.hi.max(r) };
    }
    if !window.contains_window(&need) {
        return Err(Error::WindowTooSmall { lo: window.lo, hi: window.hi, need_lo: need.lo, need_hi: need.hi });
    }

    let mut eta = vec![0u8; window.len()];
    for x in window.lo..=window.hi {
        let p = match x.cmp(&0) {
            std::cmp::Ordering::Less => params.rho_minus,
            std::cmp::Ordering::Greater => params.rho_plus,
            std::cmp::Ordering::Equal => match params.zero_site {
                ZeroSite::BernoulliMinus => params.rho_minus,
                ZeroSite::BernoulliPlus => params.rho_plus,
                ZeroSite::ForcedEmpty => 0.0,
            },
        };
        eta[window.index(x)] = rng.gen_bool(p) as u8;
    }
    let config = Configuration::from_occupation(window, eta)?;
    let (n_right, n_left) = fluctuation_counts(&config, params);
    Ok(InitialSample { config, params: *params, n_right, n_left })
}

/// `(N_r, N_l)` computed from the stored initial occupation.
pub fn fluctuation_counts(config: &Configuration, params: &BernoulliInit) -> (f64, f64) {
    let span = params.span();
    let drho = params.rho_plus - params.rho_minus;
    let t = params.char_time;
    let mut right = 0i64;
    let mut left = 0i64;
    // 0 <= x < span and -span <= x < 0 over the integers
    let r_hi = span.ceil() as i64 - 1;
    let l_lo = (-span).ceil() as i64;
    for x in 0..=r_hi {
        right += config.eta(x) as i64;
    }
    for x in l_lo..0 {
        left += config.eta(x) as i64;
    }
    (-drho * params.rho_plus * t + right as f64, -drho * params.rho_minus * t + left as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_profile_has_zero_counts() {
        let mut p = BernoulliInit::new(0.0, 1.0, 40.0);
        p.zero_site = ZeroSite::BernoulliPlus;
        let s = init_bernoulli(&p, Window::symmetric(60), 1).unwrap();
        assert_eq!(s.n_right, 0.0);
        assert_eq!(s.n_left, 0.0);
        assert_eq!(s.n_nonnegative(), 61);
    }

    #[test]
    fn rejects_bad_input() {
        let p = BernoulliInit::new(0.6, 0.4, 10.0);
        assert!(init_bernoulli(&p, Window::symmetric(50), 1).is_err());
        let p = BernoulliInit::new(0.2, 0.8, 100.0);
        assert!(matches!(init_bernoulli(&p, Window::symmetric(10), 1), Err(Error::WindowTooSmall { .. })));
        let mut p = BernoulliInit::new(0.2, 0.8, 10.0);
        p.horizon = Some(100.0);
        assert!(init_bernoulli(&p, Window::symmetric(100), 1).is_err());
        assert!(init_bernoulli(&p, Window::symmetric(400), 1).is_ok());
    }

    #[test]
    fn forced_empty_origin() {
        let mut p = BernoulliInit::new(0.9, 1.0, 5.0);
        p.zero_site = ZeroSite::ForcedEmpty;
        for seed in 0..20 {
            let s = init_bernoulli(&p, Window::symmetric(8), seed).unwrap();
            assert_eq!(s.config.eta(0), 0);
        }
    }
}
