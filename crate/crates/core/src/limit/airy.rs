//! Airy function `Ai` and its derivative.
//!
//! Maclaurin series on `[-5, 2]`, the steepest-descent integral
//! `Ai(z) = e^{-zeta}/pi int_0^inf exp(-sqrt(z) t^2) cos(t^3/3) dt` on `(2, 8.5]`
//! and (through the rotation `Ai(-y) = 2 Re[e^{i pi/3} Ai(y e^{i pi/3})]`) on
//! `[-30, -5)`, and asymptotic expansions beyond.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = -0.258_819_403_792_806_8;

pub fn airy(x: f64) -> f64 {
    airy_pair(x).0
}

pub fn airy_prime(x: f64) -> f64 {
    airy_pair(x).1
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_pair(x: f64) -> (f64, f64) {
    if x > 30.0 {
        (0.0, 0.0)
    } else if x > 8.5 {
        asymptotic_positive(x)
    } else if x > 2.0 {
        let (a, d) = integral(Complex64::new(x, 0.0));
        (a.re, d.re)
    } else if x >= -5.0 {
        maclaurin(x)
    } else if x >= -30.0 {
        let rot = Complex64::from_polar(1.0, PI / 3.0);
        let (a, d) = integral(rot * (-x));
        ((2.0 * rot * a).re, (2.0 * rot.conj() * d).re)
    } else {
        asymptotic_negative(-x)
    }
}

fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = sum 3^k (1/3)_k x^{3k}/(3k)!, g = sum 3^k (2/3)_k x^{3k+1}/(3k+1)!
    let (mut f, mut g, mut fp, mut gp) = (1.0, x, 0.0, 1.0);
    let (mut tf, mut tg, mut tfp, mut tgp) = (1.0, x, x * x / 2.0, 1.0);
    fp += tfp;
    for k in 1..200 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * 3.0 * kf);
        tg *= x3 / (3.0 * kf * (3.0 * kf + 1.0));
        tgp *= x3 / ((3.0 * kf - 2.0) * 3.0 * kf);
        if k >= 2 {
            tfp *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf - 3.0));
            fp += tfp;
        }
        f += tf;
        g += tg;
        gp += tgp;
        let scale = f.abs() + g.abs() + 1.0;
        if tf.abs() + tg.abs() + tfp.abs() + tgp.abs() < 1e-18 * scale {
            break;
        }
    }
    (AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp)
}

fn gauss_nodes() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| super::quadrature::legendre_unit(96))
}

/// `(Ai(z), Ai'(z))` for `|arg z| <= pi/3` from the steepest-descent integrals.
fn integral(z: Complex64) -> (Complex64, Complex64) {
    let a = z.sqrt();
    let zeta = 2.0 / 3.0 * z * a;
    // the Gaussian factor exp(-Re(a) t^2) is below 1e-18 past this point
    let tmax = (42.0 / a.re).sqrt();
    let mut ia = Complex64::new(0.0, 0.0);
    let mut ib = Complex64::new(0.0, 0.0);
    for &(u, w) in gauss_nodes() {
        let t = u * tmax;
        let e = (-a * t * t).exp();
        let c = (t * t * t / 3.0).cos();
        let s = (t * t * t / 3.0).sin();
        ia += e * (w * c);
        ib += e * (a * c + t * s) * w;
    }
    let pre = (-zeta).exp() * (tmax / PI);
    (pre * ia, -pre * ib)
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (su, sv) = asymptotic_sums(zeta, true);
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    (e * x.powf(-0.25) * su, -e * x.powf(0.25) * sv)
}

fn asymptotic_negative(y: f64) -> (f64, f64) {
    // Ai(-y) = pi^{-1/2} y^{-1/4} [sin(xi + pi/4) P - cos(xi + pi/4) Q]
    let xi = 2.0 / 3.0 * y.powf(1.5);
    let (mut p, mut q, mut pp, mut qp) = (0.0, 0.0, 0.0, 0.0);
    let mut u = 1.0f64;
    for k in 0..40usize {
        if k > 0 {
            let kf = k as f64;
            u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        }
        let v = if k == 0 { 1.0 } else { -(6.0 * k as f64 + 1.0) / (6.0 * k as f64 - 1.0) * u };
        let tu = u / xi.powi(k as i32);
        let tv = v / xi.powi(k as i32);
        if k > 2 && tu.abs() < 1e-17 {
            break;
        }
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * tu;
            pp += sign * tv;
        } else {
            q += sign * tu;
            qp += sign * tv;
        }
    }
    let ph = xi + PI / 4.0;
    let amp = 1.0 / (PI.sqrt() * y.powf(0.25));
    let ai = amp * (ph.sin() * p - ph.cos() * q);
    let aip = -y.powf(0.25) / PI.sqrt() * (ph.cos() * pp + ph.sin() * qp);
    (ai, aip)
}

/// `(sum (-1)^k u_k / zeta^k, sum (-1)^k v_k / zeta^k)`, truncated at the smallest term.
fn asymptotic_sums(zeta: f64, alternate: bool) -> (f64, f64) {
    let (mut su, mut sv) = (1.0, 1.0);
    let mut u = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..60usize {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let tu = u / zeta.powi(k as i32);
        if tu.abs() > last || tu.abs() < 1e-17 {
            break;
        }
        last = tu.abs();
        let sign = if alternate && k % 2 == 1 { -1.0 } else { 1.0 };
        su += sign * tu;
        sv += sign * v / zeta.powi(k as i32);
    }
    (su, sv)
}
