//! Entire functions arising from integrating the Levy-Khinchine kernels
//! against piecewise-constant densities.
//!
//! With `s = u x`,
//!
//! ```text
//! E1(z) = ∫_0^z (e^{is} - 1) / s ds        = -Cin(z) + i Si(z)
//! E2(z) = ∫_0^z (e^{is} - 1 - is) / s^2 ds = i E1(z) - (e^{iz} - 1 - iz) / z
//! ```
//!
//! Both are entire. Small arguments use their power series, large arguments
//! go through `Si`/`Ci` computed from the continued fraction for `E_1(ix)`.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_RADIUS: f64 = 4.0;

/// `(Si(x), Cin(x))` where `Cin(x) = ∫_0^x (1 - cos t)/t dt`.
pub fn si_cin(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (si, cin) = if ax <= SERIES_RADIUS {
        si_cin_series(ax)
    } else {
        let (si, ci) = si_ci_continued_fraction(ax);
        (si, EULER_GAMMA + ax.ln() - ci)
    };
    (si.copysign(x), cin)
}

fn si_cin_series(x: f64) -> (f64, f64) {
    // Si = Σ (-1)^k x^{2k+1} / ((2k+1)(2k+1)!)
    // Cin = Σ (-1)^{k+1} x^{2k} / (2k (2k)!)
    let mut si = 0.0;
    let mut cin = 0.0;
    // term = x^j / j!
    let mut term = x;
    let mut j = 1usize;
    let mut sign = 1.0;
    loop {
        let odd = sign * term / j as f64;
        si += odd;
        term *= x / (j + 1) as f64;
        let even = sign * term / (j + 1) as f64;
        cin += even;
        term *= x / (j + 2) as f64;
        j += 2;
        sign = -sign;
        if term.abs() < 1e-18 * (si.abs() + cin.abs()).max(1e-300) || j > 200 {
            break;
        }
    }
    (si, cin)
}

fn si_ci_continued_fraction(x: f64) -> (f64, f64) {
    // Modified Lentz evaluation of E_1(ix) = -Ci(x) + i(Si(x) - π/2).
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..10_000 {
        let a = -((i - 1) as f64).powi(2);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < EPS {
            break;
        }
    }
    h *= Complex64::new(x.cos(), -x.sin());
    (FRAC_PI_2 + h.im, -h.re)
}

/// `E1(z) = ∫_0^z (e^{is} - 1)/s ds`.
pub fn e1(z: f64) -> Complex64 {
    if z.abs() <= SERIES_RADIUS {
        return series_e1(z);
    }
    let (si, cin) = si_cin(z);
    Complex64::new(-cin, si)
}

/// `E2(z) = ∫_0^z (e^{is} - 1 - is)/s^2 ds`.
#[cfg(test)]
pub fn e2(z: f64) -> Complex64 {
    e1_e2(z).1
}

/// `(E1(z), E2(z))` sharing one `Si`/`Ci` evaluation.
pub fn e1_e2(z: f64) -> (Complex64, Complex64) {
    if z.abs() <= SERIES_RADIUS {
        return (series_e1(z), series_e2(z));
    }
    let first = e1(z);
    let (s, c) = z.sin_cos();
    let h = Complex64::new(c - 1.0, s - z);
    (first, Complex64::i() * first - h / z)
}

// Σ_{k≥1} (iz)^k / (k k!)
fn series_e1(z: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    // p = (iz)^k / k!
    let mut p = Complex64::new(0.0, z);
    let mut k = 1usize;
    while k < 200 {
        acc += p / k as f64;
        k += 1;
        p *= Complex64::new(0.0, z / k as f64);
        if p.norm() < 1e-18 {
            break;
        }
    }
    acc
}

// Σ_{k≥2} i^k z^{k-1} / (k! (k-1))
fn series_e2(z: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    // q = i^k z^{k-1} / k!, starting at k = 2
    let mut q = Complex64::new(-z / 2.0, 0.0);
    let mut k = 2usize;
    while k < 200 {
        acc += q / (k - 1) as f64;
        q *= Complex64::new(0.0, z / (k + 1) as f64);
        k += 1;
        if q.norm() < 1e-18 {
            break;
        }
    }
    acc
}
