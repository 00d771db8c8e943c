use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use super::airy::{airy, airy_prime};
use super::quadrature::QuadratureGrid;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{self, Purpose};

/// Shift of the Airy kernel entries inside the determinant.
///
/// `Linear` puts `w` into `Ai(x + lambda + w)`, `Quadratic` puts `w^2`, which is the
/// shift already carried by the `R`, `Psi`, `Phi` integrands. The two agree at `w = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelShift {
    Linear,
    #[default]
    Quadratic,
}

impl KernelShift {
    pub fn apply(self, w: f64) -> f64 {
        match self {
            KernelShift::Linear => w,
            KernelShift::Quadratic => w * w,
        }
    }
}

impl fmt::Display for KernelShift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelShift::Linear => "linear",
            KernelShift::Quadratic => "quadratic",
        })
    }
}

impl FromStr for KernelShift {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(KernelShift::Linear),
            "quadratic" => Ok(KernelShift::Quadratic),
            _ => Err(Error::invalid("shift", format!("unknown kernel shift `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryParams {
    /// Nystrom order `M`; every value is also computed at `2M` for the error estimate.
    pub order: usize,
    /// Central-difference step.
    pub delta: f64,
    pub shift: KernelShift,
    /// Error estimates above this are flagged.
    pub tolerance: f64,
}

impl Default for StationaryParams {
    fn default() -> Self {
        Self { order: 40, delta: 1e-3, shift: KernelShift::default(), tolerance: 1e-4 }
    }
}

/// `g(w, s)` and `det(1 - K)` on `(s, inf)` at one quadrature order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub g: f64,
    pub det: f64,
    pub r: f64,
}

impl Evaluation {
    pub fn product(&self) -> f64 {
        self.g * self.det
    }
}

// 0 * inf guard: Airy factors underflow to exactly 0 long before the exponentials overflow
fn times(b: f64, e: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        b * e
    }
}

pub fn evaluate(w: f64, s: f64, order: usize, shift: KernelShift) -> Result<Evaluation> {
    if order < 2 {
        return Err(Error::invalid("order", "need at least 2 nodes"));
    }
    if !w.is_finite() || !s.is_finite() {
        return Err(Error::invalid("s", "arguments must be finite"));
    }
    let xs = QuadratureGrid::new(s, order)?;
    let ls = QuadratureGrid::new(0.0, order)?;
    let m = order;
    let tau2 = w * w;
    let sigma = shift.apply(w);
    let c = (2.0 / 3.0) * w * w * w;

    // B[i][q] = Ai(x_i + w^2 + lambda_q); row m is x = s
    let row = |x: f64, sh: f64| -> Vec<f64> { ls.nodes.iter().map(|&l| airy(x + sh + l)).collect() };
    let b: Vec<Vec<f64>> = xs.nodes.iter().chain(std::iter::once(&s)).map(|&x| row(x, tau2)).collect();
    let a: Vec<Vec<f64>> =
        if sigma == tau2 { b[..m].to_vec() } else { xs.nodes.iter().map(|&x| row(x, sigma)).collect() };
    let gram = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).zip(&ls.weights).map(|((p, q), o)| p * q * o).sum() };

    let d: Vec<f64> = xs.weights.iter().map(|v| v.sqrt()).collect();
    let system = Matrix::from_fn(m, |i, j| {
        let k = if j < i { gram(&a[j], &a[i]) } else { gram(&a[i], &a[j]) };
        (if i == j { 1.0 } else { 0.0 }) - d[i] * k * d[j]
    });
    let lu = system.lu();
    let det = lu.det();
    if !(det > 0.0 && det.is_finite()) {
        return Err(Error::Singular { s });
    }

    let psi: Vec<f64> = (0..m)
        .map(|i| {
            let tail: f64 = (0..m).map(|q| times(b[i][q], (-w * ls.nodes[q]).exp()) * ls.weights[q]).sum();
            times(1.0, (c + w * xs.nodes[i]).exp()) - tail
        })
        .collect();
    let ew: Vec<f64> = (0..m).map(|j| (-w * xs.nodes[j]).exp() * xs.weights[j]).collect();
    let phi: Vec<f64> = (0..m)
        .map(|i| {
            let first: f64 = (0..m).map(|j| times(gram(&b[i], &b[j]), ew[j])).sum();
            let second: f64 = (0..m).map(|q| times(b[i][q], (w * ls.nodes[q]).exp()) * ls.weights[q]).sum();
            (-c).exp() * first - second
        })
        .collect();

    let rhs: Vec<f64> = (0..m).map(|i| d[i] * phi[i]).collect();
    let v = lu.solve(&rhs).map_err(|_| Error::Singular { s })?;
    let inner: f64 = (0..m).filter(|&i| v[i] != 0.0).map(|i| psi[i] * d[i] * v[i]).sum();

    let bs = &b[m];
    let r_tail: f64 = (0..m).map(|q| times(bs[q], (-w * ls.nodes[q]).exp()) * ls.nodes[q] * ls.weights[q]).sum();
    let r = s + (-c - w * s).exp() * r_tail;
    let g = r - inner;
    if !g.is_finite() {
        return Err(Error::Singular { s });
    }
    Ok(Evaluation { g, det, r })
}

/// `g(w, s)` at Nystrom order `M` with the default kernel shift.
pub fn g_func(w: f64, s: f64, order: usize) -> Result<f64> {
    if order < 30 {
        return Err(Error::invalid("order", "g needs at least 30 nodes"));
    }
    Ok(evaluate(w, s, order, KernelShift::default())?.g)
}

/// `R` at `w = 0` in closed form: `s - Ai'(s) - s int_s^inf Ai`.
pub fn r_closed_at_zero(s: f64) -> f64 {
    let tail = QuadratureGrid::new(s, 80).expect("positive order").integrate(airy);
    s - airy_prime(s) - s * tail
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValue {
    pub value: f64,
    pub error_estimate: f64,
    pub flagged: bool,
}

impl FValue {
    pub fn checked(self, tolerance: f64) -> Result<f64> {
        if self.flagged {
            Err(Error::Flagged { estimate: self.error_estimate, tolerance })
        } else {
            Ok(self.value)
        }
    }
}

fn derivative(w: f64, s: f64, order: usize, p: &StationaryParams) -> Result<(f64, f64)> {
    let g = |x: f64| evaluate(w, x, order, p.shift).map(|e| e.product());
    let h = p.delta;
    let (gp, gm) = (g(s + h)?, g(s - h)?);
    let (hp, hm) = (g(s + h / 2.0)?, g(s - h / 2.0)?);
    let coarse = (gp - gm) / (2.0 * h);
    let fine = (hp - hm) / h;
    let rich = (4.0 * fine - coarse) / 3.0;
    let scale = gp.abs().max(gm.abs()).max(1.0);
    Ok((rich, 1e-14 * scale / h))
}

/// `F_w(s) = d/ds [ g(w, s) det(1 - K) ]` with `p.order` and `2 p.order` nodes.
pub fn f_w_with(w: f64, s: f64, p: &StationaryParams) -> Result<FValue> {
    if p.delta.is_nan() || p.delta <= 0.0 {
        return Err(Error::invalid("delta", "must be positive"));
    }
    let (coarse, _) = derivative(w, s, p.order, p)?;
    let (fine, round) = derivative(w, s, 2 * p.order, p)?;
    let error_estimate = (coarse - fine).abs() + round;
    Ok(FValue { value: fine, error_estimate, flagged: error_estimate > p.tolerance })
}

pub fn f_w(w: f64, s: f64) -> Result<FValue> {
    f_w_with(w, s, &StationaryParams::default())
}

/// Tabulated `F_w` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    pub w: f64,
    pub order: usize,
    pub delta: f64,
    pub shift: KernelShift,
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub error: Vec<f64>,
}

impl DistributionTable {
    pub fn tabulate(w: f64, lo: f64, hi: f64, step: f64, p: &StationaryParams) -> Result<Self> {
        if !(step > 0.0 && hi > lo) {
            return Err(Error::invalid("grid", "need lo < hi and step > 0"));
        }
        let n = ((hi - lo) / step).round() as usize;
        let mut t = Self {
            w,
            order: p.order,
            delta: p.delta,
            shift: p.shift,
            s: Vec::with_capacity(n + 1),
            f: Vec::with_capacity(n + 1),
            error: Vec::with_capacity(n + 1),
        };
        for i in 0..=n {
            let s = lo + i as f64 * step;
            let v = f_w_with(w, s, p)?;
            t.s.push(s);
            t.f.push(v.value);
            t.error.push(v.error_estimate);
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn max_error(&self) -> f64 {
        self.error.iter().cloned().fold(0.0, f64::max)
    }

    /// Monotone within `1e-4`, bracketed in `[-1e-3, 1 + 1e-3]`, edges at 0 and 1 within `1e-3`.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::Domain(format!("table at w = {}: {reason}", self.w));
        if self.len() < 2 {
            return Err(bad("fewer than two points".into()));
        }
        for (i, win) in self.f.windows(2).enumerate() {
            if win[1] < win[0] - 1e-4 {
                return Err(bad(format!("decreasing at s = {}", self.s[i + 1])));
            }
        }
        if let Some(i) = self.f.iter().position(|v| !(-1e-3..=1.0 + 1e-3).contains(v)) {
            return Err(bad(format!("F = {} at s = {}", self.f[i], self.s[i])));
        }
        let (first, last) = (self.f[0], self.f[self.len() - 1]);
        if first.abs() > 1e-3 || (last - 1.0).abs() > 1e-3 {
            return Err(bad(format!("edges F = {first}, {last} not near 0 and 1")));
        }
        Ok(())
    }

    /// Running maximum clamped to `[0, 1]`.
    fn monotone(&self) -> Vec<f64> {
        let mut m = 0.0f64;
        self.f
            .iter()
            .map(|&v| {
                m = m.max(v.clamp(0.0, 1.0));
                m
            })
            .collect()
    }

    /// Piecewise-linear CDF; 0 left of the table and 1 right of it.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.len();
        if n == 0 || x >= self.s[n - 1] {
            return 1.0;
        }
        if x < self.s[0] {
            return 0.0;
        }
        let m = self.monotone();
        let i = self.s.partition_point(|&v| v <= x) - 1;
        let u = (x - self.s[i]) / (self.s[i + 1] - self.s[i]);
        m[i] + u * (m[i + 1] - m[i])
    }

    /// Generalized inverse of [`cdf`](Self::cdf), clamped to the table range.
    pub fn quantile(&self, u: f64) -> f64 {
        let m = self.monotone();
        let n = self.len();
        let j = m.partition_point(|&v| v < u);
        if j == 0 {
            return self.s[0];
        }
        if j >= n {
            return self.s[n - 1];
        }
        let (a, b) = (m[j - 1], m[j]);
        let frac = if b > a { (u - a) / (b - a) } else { 0.0 };
        self.s[j - 1] + frac * (self.s[j] - self.s[j - 1])
    }

    /// `int s dF` and `int s^2 dF - mean^2` from the monotone table, mass normalized.
    pub fn moments(&self) -> (f64, f64) {
        let m = self.monotone();
        let (mut mass, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for i in 1..self.len() {
            let dp = m[i] - m[i - 1];
            let mid = 0.5 * (self.s[i] + self.s[i - 1]);
            let h = self.s[i] - self.s[i - 1];
            mass += dp;
            m1 += dp * mid;
            m2 += dp * (mid * mid + h * h / 12.0);
        }
        let mean = m1 / mass;
        (mean, m2 / mass - mean * mean)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# w={}", self.w)?;
        writeln!(out, "# order={}", self.order)?;
        writeln!(out, "# delta={}", self.delta)?;
        writeln!(out, "# shift={}", self.shift)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "F", "error_estimate"])?;
        for i in 0..self.len() {
            w.write_record(&[self.s[i].to_string(), self.f[i].to_string(), format!("{:e}", self.error[i])])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let bad = |reason: String| Error::Malformed { what: "distribution table", path: path.to_path_buf(), reason };
        let mut meta = std::collections::HashMap::new();
        for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
            if let Some((k, v)) = line.trim().split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get = |k: &str| meta.get(k).ok_or_else(|| bad(format!("missing `{k}` header")));
        let w: f64 = get("w")?.parse().map_err(|e| bad(format!("w: {e}")))?;
        let order: usize = get("order")?.parse().map_err(|e| bad(format!("order: {e}")))?;
        let delta: f64 = get("delta")?.parse().map_err(|e| bad(format!("delta: {e}")))?;
        let shift: KernelShift = get("shift")?.parse().map_err(|e: Error| bad(e.to_string()))?;
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let mut t = Self { w, order, delta, shift, s: vec![], f: vec![], error: vec![] };
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i).ok_or_else(|| bad("short row".into()))?.parse().map_err(|e| bad(format!("{e}")))
            };
            t.s.push(field(0)?);
            t.f.push(field(1)?);
            t.error.push(field(2)?);
        }
        if t.s.windows(2).any(|p| p[1] <= p[0]) {
            return Err(bad("grid not strictly increasing".into()));
        }
        if t.is_empty() {
            return Err(bad("no rows".into()));
        }
        Ok(t)
    }
}

/// Sorted draws of `chi_-^{2/3} A - chi_+^{2/3} A'` with `A ~ minus`, `A' ~ plus` independent.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceLaw {
    pub samples: Vec<f64>,
}

impl DifferenceLaw {
    /// Empirical `P(D >= threshold)` and its standard error.
    pub fn prob_at_least(&self, threshold: f64) -> (f64, f64) {
        let n = self.samples.len() as f64;
        let below = self.samples.partition_point(|&v| v < threshold) as f64;
        let p = (n - below) / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }

    /// Empirical `P(D <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&v| v <= x) as f64 / self.samples.len() as f64
    }
}

/// Inverse-CDF sampling of the limiting second-class difference from two tables.
pub fn second_class_limit(
    minus: &DistributionTable,
    plus: &DistributionTable,
    chi_minus: f64,
    chi_plus: f64,
    samples: usize,
    seed: u64,
) -> Result<DifferenceLaw> {
    if samples == 0 {
        return Err(Error::EmptySample);
    }
    if !(chi_minus > 0.0 && chi_plus > 0.0) {
        return Err(Error::invalid("chi", "must be positive"));
    }
    minus.validate()?;
    plus.validate()?;
    let (cm, cp) = (chi_minus.powf(2.0 / 3.0), chi_plus.powf(2.0 / 3.0));
    let mut r = rng::stream(seed, 0, Purpose::Limit);
    let mut out: Vec<f64> = (0..samples)
        .map(|_| {
            let a = minus.quantile(r.gen::<f64>());
            let b = plus.quantile(r.gen::<f64>());
            cm * a - cp * b
        })
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(DifferenceLaw { samples: out })
}
