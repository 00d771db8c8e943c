use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::limit::{DifferenceLaw, DistributionTable};
use crate::scaling::ScalingFrame;

/// Sorted sample with a right-continuous step CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("NaN in sample".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fraction of the sample `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let n = self.len() as f64;
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0).max(1.0)
    }

    /// Unique values with the CDF just before and at each.
    fn jumps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.len() as f64;
        let mut i = 0;
        std::iter::from_fn(move || {
            if i >= self.values.len() {
                return None;
            }
            let x = self.values[i];
            let before = i as f64 / n;
            while i < self.values.len() && self.values[i] == x {
                i += 1;
            }
            Some((x, before, i as f64 / n))
        })
    }
}

/// `sqrt(ln(2/alpha) / (2n))`.
pub fn dkw_bound(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub distance: f64,
    pub dkw: f64,
    pub n: usize,
}

impl KsResult {
    pub fn within_dkw(&self) -> bool {
        self.distance <= self.dkw
    }
}

/// Sup distance between the step CDF and a right-continuous target. The left
/// limit of the target is taken just below each jump, so targets with atoms
/// (degenerate laws) are handled too.
pub fn ks_compare(ecdf: &EmpiricalCdf, target: impl Fn(f64) -> f64, alpha: f64) -> Result<KsResult> {
    if ecdf.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut d = 0.0f64;
    for (x, before, after) in ecdf.jumps() {
        let left = target(x.next_down());
        d = d.max((left - before).abs()).max((after - target(x)).abs());
    }
    Ok(KsResult { distance: d, dkw: dkw_bound(ecdf.len(), alpha), n: ecdf.len() })
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    let (x, y) = (a.values(), b.values());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `G((4 chi_+)^{-1/2} x) G((4 chi_-)^{-1/2} x)`.
pub fn product_gaussian_cdf(frame: &ScalingFrame, x: f64) -> f64 {
    // chi = 0 (empty or full side) degenerates to a unit step
    let g = |chi: f64| if chi > 0.0 { normal_cdf(x / (4.0 * chi).sqrt()) } else { f64::from(u8::from(x >= 0.0)) };
    g(frame.chi_plus()) * g(frame.chi_minus())
}

/// `s -> F_{w_-}(t^{-1/3} s~_-(s)) F_{w_+}(t^{-1/3} s~_+(s))` from two tables.
#[derive(Debug, Clone)]
pub struct ProductFw<'a> {
    pub frame: ScalingFrame,
    pub minus: &'a DistributionTable,
    pub plus: &'a DistributionTable,
}

impl<'a> ProductFw<'a> {
    pub fn new(frame: ScalingFrame, minus: &'a DistributionTable, plus: &'a DistributionTable) -> Result<Self> {
        let (wm, wp) = frame.w_pair();
        for (tab, w) in [(minus, wm), (plus, wp)] {
            if (tab.w - w).abs() > 1e-9 {
                return Err(Error::invalid("tables", format!("table has w = {}, frame needs {w}", tab.w)));
            }
        }
        Ok(Self { frame, minus, plus })
    }

    /// Clamped evaluation: 0 and 1 beyond the tables.
    pub fn cdf(&self, s: f64) -> f64 {
        let (a, b) = self.frame.f_args(s);
        self.minus.cdf(a) * self.plus.cdf(b)
    }

    /// Evaluation that refuses arguments outside the tabulated ranges.
    pub fn checked(&self, s: f64) -> Result<f64> {
        let (a, b) = self.frame.f_args(s);
        for (tab, v) in [(self.minus, a), (self.plus, b)] {
            let (lo, hi) = (tab.s[0], tab.s[tab.len() - 1]);
            if !(lo..=hi).contains(&v) {
                return Err(Error::OutOfRange { value: v, lo, hi });
            }
        }
        Ok(self.cdf(s))
    }
}

/// Creates the target `P(D / scale < s)` for a scaled difference law.
pub fn difference_cdf(law: &DifferenceLaw, scale: f64) -> impl Fn(f64) -> f64 + '_ {
    move |s| {
        let x = s * scale;
        law.samples.partition_point(|&v| v < x) as f64 / law.samples.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;
    use rand::Rng;

    #[test]
    fn dkw_closed_form() {
        assert!((dkw_bound(10_000, 0.01) - 0.016_276).abs() < 1e-5);
    }

    #[test]
    fn self_distance_vanishes() {
        let e = EmpiricalCdf::new(vec![3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(ks_two_sample(&e, &e), 0.0);
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.eval(0.5), 0.0);
    }

    #[test]
    fn uniform_null_respects_dkw() {
        // exceedances are Binomial(300, <= 0.01): mean 3, three-sigma ceiling 8
        let mut fails = 0;
        for seed in 0..300 {
            let mut r = from_seed(seed);
            let v: Vec<f64> = (0..100_000).map(|_| r.gen::<f64>()).collect();
            let e = EmpiricalCdf::new(v).unwrap();
            let ks = ks_compare(&e, |x| x.clamp(0.0, 1.0), 0.01).unwrap();
            if !ks.within_dkw() {
                fails += 1;
            }
        }
        assert!(fails <= 8, "{fails} of 300 seeds exceeded the 99% envelope");
    }

    #[test]
    fn gaussian_product_values() {
        let f = ScalingFrame::at_time(0.2, 0.8, 100.0).unwrap();
        assert!((product_gaussian_cdf(&f, 0.0) - 0.25).abs() < 1e-15);
        assert!((product_gaussian_cdf(&f, 50.0) - 1.0).abs() < 1e-12);
        let half = ScalingFrame::at_time(0.5 - 1e-9, 0.5 + 1e-9, 100.0).unwrap();
        let g1 = normal_cdf(1.0);
        assert!((product_gaussian_cdf(&half, 1.0) - g1 * g1).abs() < 1e-8);
        assert!((g1 * g1 - 0.707_860_980_8).abs() < 1e-9);
    }

    #[test]
    fn atom_against_step_target() {
        let e = EmpiricalCdf::new(vec![0.0; 5]).unwrap();
        let ks = ks_compare(&e, |x| f64::from(u8::from(x >= 0.0)), 0.05).unwrap();
        assert_eq!(ks.distance, 0.0);
        let frame = ScalingFrame::with_time_scale(0.0, 1.0, 200.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(product_gaussian_cdf(&frame, 0.0), 1.0);
        assert_eq!(product_gaussian_cdf(&frame, -1e-9), 0.0);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(matches!(EmpiricalCdf::new(vec![]), Err(Error::EmptySample)));
    }
}
