//! Parameter algebra linking microscopic observables to their limit laws.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How `s` enters the Baik-Rains arguments `s~_-` and `s~_+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TildeConvention {
    /// `s~_pm = chi_pm^{-2/3} s`.
    #[default]
    Plain,
    /// `s~_pm = chi_pm^{-2/3} (1 - 2 rho_pm) s`.
    Signed,
    /// `s~_pm = chi_pm^{-2/3} |1 - 2 rho_pm| s`.
    Absolute,
}

impl TildeConvention {
    pub const ALL: [TildeConvention; 3] = [TildeConvention::Plain, TildeConvention::Signed, TildeConvention::Absolute];

    fn factor(self, rho: f64) -> f64 {
        match self {
            TildeConvention::Plain => 1.0,
            TildeConvention::Signed => 1.0 - 2.0 * rho,
            TildeConvention::Absolute => (1.0 - 2.0 * rho).abs(),
        }
    }
}

impl fmt::Display for TildeConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TildeConvention::Plain => "plain",
            TildeConvention::Signed => "signed",
            TildeConvention::Absolute => "absolute",
        })
    }
}

impl FromStr for TildeConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(TildeConvention::Plain),
            "signed" => Ok(TildeConvention::Signed),
            "absolute" => Ok(TildeConvention::Absolute),
            _ => Err(Error::invalid("convention", format!("unknown convention `{s}`"))),
        }
    }
}

/// Constant in the second class threshold `c (rho_+ - rho_-) t^{-1/3} s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdConvention {
    /// `c = 1`.
    #[default]
    Single,
    /// `c = 2`.
    Double,
}

impl ThresholdConvention {
    pub fn factor(self) -> f64 {
        match self {
            ThresholdConvention::Single => 1.0,
            ThresholdConvention::Double => 2.0,
        }
    }
}

impl fmt::Display for ThresholdConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdConvention::Single => "single",
            ThresholdConvention::Double => "double",
        })
    }
}

impl FromStr for ThresholdConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(ThresholdConvention::Single),
            "double" => Ok(ThresholdConvention::Double),
            _ => Err(Error::invalid("threshold", format!("unknown convention `{s}`"))),
        }
    }
}

/// `(rho_-, rho_+, eps, t, x, s)` with every derived quantity computed on demand.
/// `eps` is stored as the time scale `eps^{-3/2}` so integer times stay exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFrame {
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub time_scale: f64,
    pub t: f64,
    pub x: f64,
    pub s: f64,
    pub convention: TildeConvention,
}

impl ScalingFrame {
    pub fn new(rho_minus: f64, rho_plus: f64, eps: f64, t: f64, x: f64, s: f64) -> Result<Self> {
        if rho_minus >= rho_plus {
            return Err(Error::invalid("rho", format!("need rho_minus < rho_plus, got {rho_minus}, {rho_plus}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid("eps", "must be positive"));
        }
        Self::with_time_scale(rho_minus, rho_plus, eps.powf(-1.5), t, x, s)
    }

    pub fn with_time_scale(rho_minus: f64, rho_plus: f64, time_scale: f64, t: f64, x: f64, s: f64) -> Result<Self> {
        let f = Self { rho_minus, rho_plus, time_scale, t, x, s, convention: TildeConvention::default() };
        f.validate()?;
        Ok(f)
    }

    /// Flat frame `rho_- = rho_+ = rho` for the stationary observable; the shock
    /// quantities are undefined on it.
    pub fn stationary(rho: f64, time: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::invalid("rho", format!("must lie in (0, 1), got {rho}")));
        }
        Self::with_time_scale(rho, rho, time, 1.0, 0.0, 0.0)
    }

    pub fn is_flat(&self) -> bool {
        self.rho_minus == self.rho_plus
    }

    /// Frame with `t = 1`, `x = s = 0` and `eps` chosen so that `eps^{-3/2} = time`.
    pub fn at_time(rho_minus: f64, rho_plus: f64, time: f64) -> Result<Self> {
        if !(time > 0.0 && time.is_finite()) {
            return Err(Error::invalid("time", "must be positive"));
        }
        if rho_minus >= rho_plus {
            return Err(Error::invalid("rho", format!("need rho_minus < rho_plus, got {rho_minus}, {rho_plus}")));
        }
        Self::with_time_scale(rho_minus, rho_plus, time, 1.0, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.rho_minus, self.rho_plus);
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
            return Err(Error::invalid("rho", format!("need 0 <= rho_minus <= rho_plus <= 1, got {a}, {b}")));
        }
        if !(self.time_scale > 0.0 && self.time_scale.is_finite()) {
            return Err(Error::invalid("eps", "must be positive"));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::invalid("t", "must be positive"));
        }
        if !self.x.is_finite() || !self.s.is_finite() {
            return Err(Error::invalid("x", "x and s must be finite"));
        }
        Ok(())
    }

    pub fn eps(&self) -> f64 {
        self.time_scale.powf(-2.0 / 3.0)
    }

    pub fn chi_minus(&self) -> f64 {
        self.rho_minus * (1.0 - self.rho_minus)
    }

    pub fn chi_plus(&self) -> f64 {
        self.rho_plus * (1.0 - self.rho_plus)
    }

    pub fn delta_rho(&self) -> f64 {
        self.rho_plus - self.rho_minus
    }

    /// Shock velocity.
    pub fn v(&self) -> f64 {
        1.0 - self.rho_minus - self.rho_plus
    }

    /// Mean height growth rate at the shock.
    pub fn hbar(&self) -> f64 {
        1.0 - self.rho_minus - self.rho_plus + 2.0 * self.rho_minus * self.rho_plus
    }

    /// `eps^{-3/2} t`.
    pub fn macro_time(&self) -> f64 {
        self.time_scale * self.t
    }

    /// `eps^{-3/2} t + eps^{-1} x`.
    pub fn y_eps(&self) -> f64 {
        self.macro_time() + self.x * self.time_scale.powf(2.0 / 3.0)
    }

    /// `eps^{-1/2}`, the fluctuation scale.
    pub fn fluct_scale(&self) -> f64 {
        self.time_scale.cbrt()
    }

    pub fn s_tilde_at(&self, s: f64) -> (f64, f64) {
        let c = self.convention;
        (
            self.chi_minus().powf(-2.0 / 3.0) * c.factor(self.rho_minus) * s,
            self.chi_plus().powf(-2.0 / 3.0) * c.factor(self.rho_plus) * s,
        )
    }

    pub fn s_tilde_minus(&self) -> f64 {
        self.s_tilde_at(self.s).0
    }

    pub fn s_tilde_plus(&self) -> f64 {
        self.s_tilde_at(self.s).1
    }

    pub fn x_tilde_minus(&self) -> f64 {
        -0.5 * self.delta_rho() * self.chi_minus().powf(-1.0 / 3.0) * self.x
    }

    pub fn x_tilde_plus(&self) -> f64 {
        0.5 * self.delta_rho() * self.chi_plus().powf(-1.0 / 3.0) * self.x
    }

    /// Parameters `(w_-, w_+) = t^{-2/3} (x~_-, x~_+)` of the two `F_w` factors.
    pub fn w_pair(&self) -> (f64, f64) {
        let k = self.t.powf(-2.0 / 3.0);
        (k * self.x_tilde_minus(), k * self.x_tilde_plus())
    }

    /// Arguments `t^{-1/3} s~_pm` of the two `F_w` factors at level `s`.
    pub fn f_args(&self, s: f64) -> (f64, f64) {
        let k = self.t.powf(-1.0 / 3.0);
        let (a, b) = self.s_tilde_at(s);
        (k * a, k * b)
    }

    /// Characteristic time entering `N_r`, `N_l`: `eps^{-3/2} t`.
    pub fn char_time(&self) -> f64 {
        self.macro_time()
    }

    /// `(N_r + N_l) / (rho_+ - rho_-)`, the random shift of the shock.
    pub fn shock_offset(&self, n_right: f64, n_left: f64) -> f64 {
        (n_right + n_left) / self.delta_rho()
    }

    /// Site `floor(v y_eps - (N_r + N_l)/(rho_+ - rho_-))` where the height is observed.
    pub fn shock_site(&self, n_right: f64, n_left: f64) -> i64 {
        (self.v() * self.y_eps() - self.shock_offset(n_right, n_left)).floor() as i64
    }

    /// Threshold for `chi_-^{2/3} A - chi_+^{2/3} A'` at level `s`.
    pub fn second_class_threshold(&self, s: f64, c: ThresholdConvention) -> f64 {
        c.factor() * self.delta_rho() * self.t.powf(-1.0 / 3.0) * s
    }

    /// Site `floor(v eps^{-3/2} t)` of the Gaussian-scale observation.
    pub fn gaussian_site(&self) -> i64 {
        (self.v() * self.macro_time()).floor() as i64
    }
}

/// Lattice targets of the particle event `{X_t(n) >= a}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Targets {
    pub n: i64,
    pub a: i64,
    pub t: f64,
}

impl Targets {
    /// Labels `1..=available` exist left of the origin.
    pub fn check_labels(&self, available: i64) -> Result<()> {
        if self.n > available {
            return Err(Error::NotEnoughParticles { needed: self.n, available });
        }
        Ok(())
    }
}

pub fn shock_targets(frame: &ScalingFrame, n_right: f64, n_left: f64) -> Targets {
    let (rm, rp) = (frame.rho_minus, frame.rho_plus);
    let y = frame.y_eps();
    let n = rp * rm * y + (rm * n_right + rp * n_left) / frame.delta_rho() - frame.s * frame.fluct_scale();
    let a = frame.v() * y - frame.shock_offset(n_right, n_left);
    Targets { n: n.floor() as i64, a: a.floor() as i64, t: y }
}

/// `{h(t, site) >= level}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeightEvent {
    pub site: i64,
    pub level: i64,
}

/// `{X_t(label) >= threshold}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParticleEvent {
    pub label: i64,
    pub threshold: i64,
}

/// `{h(t, x - y) >= x + y}  <->  {X_t(y) >= x - y}`.
pub fn height_particle_convert(ev: HeightEvent) -> Result<ParticleEvent> {
    if (ev.level - ev.site).rem_euclid(2) != 0 {
        return Err(Error::Parity { x: ev.site, level: ev.level });
    }
    Ok(ParticleEvent { label: (ev.level - ev.site) / 2, threshold: ev.site })
}

pub fn particle_height_convert(ev: ParticleEvent) -> HeightEvent {
    HeightEvent { site: ev.threshold, level: ev.threshold + 2 * ev.label }
}

/// `(h - hbar y - ((2 rho_- - 1) N_r + (2 rho_+ - 1) N_l)/(rho_+ - rho_-)) / eps^{-1/2}`,
/// to be compared with `-2 s`.
pub fn rescale_height(frame: &ScalingFrame, raw_h: i64, n_right: f64, n_left: f64) -> f64 {
    let (rm, rp) = (frame.rho_minus, frame.rho_plus);
    let shift = ((2.0 * rm - 1.0) * n_right + (2.0 * rp - 1.0) * n_left) / frame.delta_rho();
    (raw_h as f64 - frame.hbar() * frame.y_eps() - shift) / frame.fluct_scale()
}

/// `(h - hbar y) / eps^{-1/2}`: the same ratio without conditioning on `N_r`, `N_l`.
pub fn rescale_height_unshifted(frame: &ScalingFrame, raw_h: i64) -> f64 {
    (raw_h as f64 - frame.hbar() * frame.y_eps()) / frame.fluct_scale()
}

/// `(h - hbar eps^{-3/2} t) / eps^{-3/4}`, compared with `-(rho_+ - rho_-)^{1/2} x`.
pub fn rescale_height_gaussian(frame: &ScalingFrame, raw_h: i64) -> f64 {
    (raw_h as f64 - frame.hbar() * frame.macro_time()) / frame.time_scale.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degenerate_targets() {
        let f = ScalingFrame::new(0.0, 1.0, 0.01, 1.0, 0.0, 0.0).unwrap();
        let tg = shock_targets(&f, 0.0, 0.0);
        assert_eq!(tg.n, 0);
        assert_eq!(tg.a, 0);
        assert!((tg.t - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn targets_recomputed_by_hand() {
        // eps^{-3/2} t = 10^4, rho = (0.2, 0.8), N_r = 30, N_l = -12
        let f = ScalingFrame::at_time(0.2, 0.8, 1e4).unwrap();
        let tg = shock_targets(&f, 30.0, -12.0);
        // n = 0.16 * 1e4 + (0.2*30 + 0.8*(-12))/0.6 = 1600 - 6 = 1594
        assert_eq!(tg.n, 1594);
        // a = 0 - 18/0.6 = -30
        assert_eq!(tg.a, -30);
        assert_eq!(f.shock_site(30.0, -12.0), -30);
    }

    #[test]
    fn conversion_examples() {
        let p = height_particle_convert(HeightEvent { site: 0, level: 0 }).unwrap();
        assert_eq!(p, ParticleEvent { label: 0, threshold: 0 });
        assert!(matches!(height_particle_convert(HeightEvent { site: 1, level: 2 }), Err(Error::Parity { .. })));
    }

    #[test]
    fn height_linearity() {
        let f = ScalingFrame::at_time(0.3, 0.6, 500.0).unwrap();
        let a = rescale_height(&f, 100, 3.0, -1.5);
        let b = rescale_height(&f, 107, 3.0, -1.5);
        assert!((b - a - 7.0 * f.eps().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_wedge_is_deterministic() {
        // rho = (0, 1): nothing moves, the height at the origin stays 0 = hbar t
        let f = ScalingFrame::at_time(0.0, 1.0, 1e3).unwrap();
        assert_eq!(f.hbar(), 0.0);
        assert_eq!(rescale_height(&f, 0, 0.0, 0.0), 0.0);
        assert_eq!(rescale_height_gaussian(&f, 0), 0.0);
    }

    proptest! {
        #[test]
        fn frame_algebra(a in 0.01f64..0.98, gap in 0.01f64..0.5, x in -3.0f64..3.0, s in -3.0f64..3.0) {
            let b = (a + gap).min(0.99);
            prop_assume!(b > a);
            let f = ScalingFrame::new(a, b, 0.05, 1.3, x, s).unwrap();
            prop_assert!(f.chi_minus() > 0.0 && f.chi_minus() <= 0.25);
            prop_assert!(f.chi_plus() > 0.0 && f.chi_plus() <= 0.25);
            prop_assert!((f.hbar() - f.v() - 2.0 * a * b).abs() < 1e-14);
            prop_assert!((f.v() + f.hbar() - 2.0 * (1.0 - a) * (1.0 - b)).abs() < 1e-14);
            let (xm, xp) = (f.x_tilde_minus(), f.x_tilde_plus());
            prop_assert!(xm * xp <= 0.0);
        }

        #[test]
        fn targets_monotone(nr in -50.0f64..50.0, nl in -50.0f64..50.0, s in -2.0f64..2.0) {
            let f = ScalingFrame::new(0.25, 0.7, 0.01, 1.0, 0.0, s).unwrap();
            let g = ScalingFrame { s: s + 0.5, ..f };
            let base = shock_targets(&f, nr, nl);
            prop_assert!(shock_targets(&g, nr, nl).n <= base.n);
            prop_assert!(shock_targets(&f, nr + 5.0, nl).n >= base.n);
            prop_assert!(shock_targets(&f, nr, nl + 5.0).n >= base.n);
            prop_assert!(shock_targets(&f, nr + 5.0, nl).a <= base.a);
            prop_assert!(shock_targets(&f, nr, nl + 5.0).a <= base.a);
        }

        #[test]
        fn conversion_round_trip(site in -1000i64..1000, k in -500i64..500) {
            let ev = HeightEvent { site, level: site + 2 * k };
            let p = height_particle_convert(ev).unwrap();
            prop_assert_eq!(particle_height_convert(p), ev);
        }

        #[test]
        fn plus_one_in_n_right_moves_a_by_a_floor_step(nr in -40.0f64..40.0, nl in -40.0f64..40.0) {
            let f = ScalingFrame::at_time(0.2, 0.8, 2000.0).unwrap();
            let d = shock_targets(&f, nr, nl).a - shock_targets(&f, nr + 1.0, nl).a;
            let step = (1.0 / f.delta_rho()).floor() as i64;
            prop_assert!(d == step || d == step + 1);
        }
    }
}
