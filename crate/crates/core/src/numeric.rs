//! Small numerical helpers shared across modules.

use ndarray::{Array2, ArrayView2};
use statrs::function::factorial::ln_binomial as statrs_ln_binomial;

use crate::C64;

pub(crate) fn ln_binomial(n: usize, k: usize) -> f64 {
    statrs_ln_binomial(n as u64, k as u64)
}

/// `x^k` as a (sign, ln|x^k|) pair; `0^0 = 1`.
pub(crate) fn signed_log_pow(x: f64, k: usize) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    let sign = if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
    (sign, k as f64 * x.abs().ln())
}

/// Brent's method on a bracketing interval. Returns the root to within `xtol`.
pub(crate) fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Some(b)
}

/// Golden-section maximization on `[a, b]`; returns `(argmax, max)`.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > xtol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `R · M · Rᵀ` for real `R` and complex `M`, done as real products.
pub(crate) fn conjugate_real(r: ArrayView2<f64>, m: &Array2<C64>) -> Array2<C64> {
    let re = m.mapv(|z| z.re);
    let im = m.mapv(|z| z.im);
    let rt = r.t();
    let re_out = r.dot(&re).dot(&rt);
    let im_out = r.dot(&im).dot(&rt);
    let mut out = Array2::<C64>::zeros(m.raw_dim());
    ndarray::Zip::from(&mut out)
        .and(&re_out)
        .and(&im_out)
        .for_each(|o, &a, &b| *o = C64::new(a, b));
    out
}
