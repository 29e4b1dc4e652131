//! Sine and cosine integrals, the complex combination `H(x) = Si(x) - i Ci(x)`,
//! and Bessel functions of the first kind of orders zero and one.
//!
//! Every function here sits inside the inner loop of an oscillatory integral,
//! so each one picks a closed evaluation scheme per argument range instead of
//! integrating on the fly:
//!
//! * Si/Ci: power series on `(0, 4]`, a continued fraction for `E1(ix)` on
//!   `(4, 50)`, and the asymptotic auxiliary functions `f`, `g` beyond that.
//! * J0/J1: power series below 8, Miller backward recurrence on `[8, 25)`, and
//!   Hankel's asymptotic expansion from 25 on.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex value returned by the public operations of this module.
pub type ComplexValue = Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SICI_SERIES_LIMIT: f64 = 4.0;
const SICI_ASYMPTOTIC_LIMIT: f64 = 50.0;
const BESSEL_SERIES_LIMIT: f64 = 8.0;
const BESSEL_ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Sine integral `Si(x) = ∫_0^x sin t / t dt`.
pub fn sine_integral(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let (si, _) = sici_positive(x.abs());
    si.copysign(x)
}

/// Cosine integral `Ci(x) = -∫_x^∞ cos t / t dt`, defined for `x > 0`.
pub fn cosine_integral(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("cosine_integral", format!("requires finite x > 0, got {x}")));
    }
    Ok(sici_positive(x).1)
}

/// Both integrals at once; `x` must be positive and finite.
pub fn sici(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("sici", format!("requires finite x > 0, got {x}")));
    }
    Ok(sici_positive(x))
}

/// `H(x) = Si(x) - i Ci(x)` for `x != 0`.
///
/// For `x < 0` the imaginary part uses the real part of the principal
/// branch, `Re Ci(-x) = Ci(x)`, so that `H(-x) = -conj(H(x))`. This is the
/// extension under which `t H(t/d²)` inherits the conjugate symmetry of a
/// characteristic function.
pub fn h_function(x: f64) -> Result<ComplexValue> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::domain("h_function", format!("requires finite x != 0, got {x}")));
    }
    let (si, ci) = sici_positive(x.abs());
    Ok(Complex64::new(si.copysign(x), -ci))
}

fn sici_positive(x: f64) -> (f64, f64) {
    if x <= SICI_SERIES_LIMIT {
        sici_series(x)
    } else if x < SICI_ASYMPTOTIC_LIMIT {
        sici_continued_fraction(x)
    } else {
        let (f, g) = auxiliary_fg_asymptotic(x);
        let (s, c) = x.sin_cos();
        (FRAC_PI_2 - f * c - g * s, f * s - g * c)
    }
}

fn sici_series(x: f64) -> (f64, f64) {
    let x2 = x * x;
    // odd terms x^(2k+1)/(2k+1)! for Si, even terms x^(2k)/(2k)! for Ci
    let mut odd = x;
    let mut even = 1.0;
    let mut si = x;
    let mut ci = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        even *= -x2 / ((2.0 * kf - 1.0) * (2.0 * kf));
        odd *= -x2 / ((2.0 * kf) * (2.0 * kf + 1.0));
        let ci_term = even / (2.0 * kf);
        let si_term = odd / (2.0 * kf + 1.0);
        ci += ci_term;
        si += si_term;
        if ci_term.abs() < 1e-18 * ci.abs().max(1e-300) && si_term.abs() < 1e-18 * si.abs() {
            break;
        }
    }
    (si, EULER_GAMMA + x.ln() + ci)
}

/// Modified Lentz evaluation of `E1(ix) = -Ci(x) + i (Si(x) - π/2)`.
fn sici_continued_fraction(x: f64) -> (f64, f64) {
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..500 {
        let a = -(((i - 1) * (i - 1)) as f64);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    let (s, co) = x.sin_cos();
    let e1 = Complex64::new(co, -s) * h;
    (FRAC_PI_2 + e1.im, -e1.re)
}

/// Asymptotic series of the auxiliary functions
/// `f(x) = Ci sin x + (π/2 - Si) cos x` and `g(x) = -Ci cos x + (π/2 - Si) sin x`.
fn auxiliary_fg_asymptotic(x: f64) -> (f64, f64) {
    let (one_minus_xf, xg) = auxiliary_scaled_asymptotic(x);
    ((1.0 - one_minus_xf) / x, xg / x)
}

/// Returns `(1 - x f(x), x g(x))` summed directly, so the leading cancellation in
/// `1 - x f(x)` never happens.
fn auxiliary_scaled_asymptotic(x: f64) -> (f64, f64) {
    let inv2 = 1.0 / (x * x);
    // f: Σ (-1)^k (2k)!/x^(2k),  g: (1/x) Σ (-1)^k (2k+1)!/x^(2k)
    let mut tf = 1.0;
    let mut tg = 1.0;
    let mut one_minus_xf = 0.0;
    let mut g_sum = 1.0;
    let mut last_f = f64::INFINITY;
    let mut last_g = f64::INFINITY;
    for k in 1..40 {
        let kf = k as f64;
        tf *= -(2.0 * kf - 1.0) * (2.0 * kf) * inv2;
        tg *= -(2.0 * kf) * (2.0 * kf + 1.0) * inv2;
        let done_f = tf.abs() >= last_f || tf.abs() < 1e-18;
        let done_g = tg.abs() >= last_g || tg.abs() < 1e-18;
        if !done_f {
            one_minus_xf -= tf;
            last_f = tf.abs();
        }
        if !done_g {
            g_sum += tg;
            last_g = tg.abs();
        }
        if done_f && done_g {
            break;
        }
    }
    (one_minus_xf, g_sum / x)
}

/// `e^{iz} + z (Si(z) - π/2) - i z Ci(z)` for `z >= 0`.
///
/// The characteristic function of the inverse-square range is a difference of
/// two of these scaled by `d²`; the `z π/2` terms of `z H(z)` cancel exactly in
/// that difference and are removed here so large `z` loses no precision.
pub(crate) fn rii_kernel(z: f64) -> Complex64 {
    if z == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let (s, c) = z.sin_cos();
    if z >= SICI_ASYMPTOTIC_LIMIT {
        // e^{iz} [ (1 - z f) + i z g ]
        let (a, b) = auxiliary_scaled_asymptotic(z);
        Complex64::new(c * a - s * b, s * a + c * b)
    } else {
        let (si, ci) = sici_positive(z);
        Complex64::new(c + z * (si - FRAC_PI_2), s - z * ci)
    }
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> f64 {
    bessel_j0_j1(x).0
}

/// Bessel function of the first kind, order one.
pub fn bessel_j1(x: f64) -> f64 {
    bessel_j0_j1(x).1
}

/// `(J0(x), J1(x))` from a single evaluation.
pub fn bessel_j0_j1(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (j0, j1) = if ax < BESSEL_SERIES_LIMIT {
        bessel_series(ax)
    } else if ax < BESSEL_ASYMPTOTIC_LIMIT {
        bessel_miller(ax)
    } else {
        bessel_hankel(ax)
    };
    (j0, if x < 0.0 { -j1 } else { j1 })
}

fn bessel_series(x: f64) -> (f64, f64) {
    let q = -0.25 * x * x;
    let mut t0 = 1.0;
    let mut t1 = 0.5 * x;
    let mut j0 = 1.0;
    let mut j1 = t1;
    for k in 1..60 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        j0 += t0;
        j1 += t1;
        if t0.abs() < 1e-18 && t1.abs() < 1e-18 {
            break;
        }
    }
    (j0, j1)
}

fn bessel_miller(x: f64) -> (f64, f64) {
    let mut m = (1.5 * x + 40.0) as usize;
    m += m % 2;
    let mut above = 0.0;
    let mut current = 1e-30;
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for k in (1..=m).rev() {
        if k % 2 == 0 {
            norm += 2.0 * current;
        }
        let below = 2.0 * k as f64 / x * current - above;
        above = current;
        current = below;
        if k == 2 {
            j1 = current;
        }
        if current.abs() > 1e250 {
            current *= 1e-250;
            above *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += current;
    (current / norm, j1 / norm)
}

fn bessel_hankel(x: f64) -> (f64, f64) {
    let (p0, q0) = hankel_pq(0.0, x);
    let (p1, q1) = hankel_pq(4.0, x);
    let (s, c) = x.sin_cos();
    let amp = (2.0 / (PI * x)).sqrt();
    // χ0 = x - π/4, χ1 = x - 3π/4
    let cos0 = (c + s) * FRAC_1_SQRT_2;
    let sin0 = (s - c) * FRAC_1_SQRT_2;
    let cos1 = (s - c) * FRAC_1_SQRT_2;
    let sin1 = -(s + c) * FRAC_1_SQRT_2;
    (
        amp * (p0 * cos0 - q0 * sin0),
        amp * (p1 * cos1 - q1 * sin1),
    )
}

/// Hankel's `P` and `Q` series for `mu = 4 ν²`.
fn hankel_pq(mu: f64, x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    let inv8x = 1.0 / (8.0 * x);
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) * inv8x / k as f64;
        let mag = a.abs();
        if mag >= last || mag < 1e-18 {
            break;
        }
        last = mag;
        // sign pattern: k = 1 -> +Q, 2 -> -P, 3 -> -Q, 4 -> +P, ...
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
    }
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn si_at_zero_and_pi() {
        assert_eq!(sine_integral(0.0), 0.0);
        // composite Gauss-Legendre of sin t / t over [0, π] in the integration tests
        assert!((sine_integral(PI) - 1.851_937_051_982_466).abs() < 1e-13);
    }

    #[test]
    fn si_is_odd() {
        for &x in &[0.3, 2.0, 7.5, 33.0, 120.0, 4e3] {
            assert_eq!(sine_integral(-x), -sine_integral(x));
        }
    }

    #[test]
    fn ci_at_one() {
        let ci = cosine_integral(1.0).unwrap();
        assert!((ci - 0.337_403_922_900_968_1).abs() < 1e-14, "{ci}");
    }

    #[test]
    fn ci_vanishes_far_out() {
        for &x in &[1e7, 3.3e7, 1e9] {
            assert!(cosine_integral(x).unwrap().abs() < 1e-6);
        }
    }

    #[test]
    fn ci_rejects_nonpositive() {
        assert!(matches!(cosine_integral(0.0), Err(Error::Domain { .. })));
        assert!(cosine_integral(-1.0).is_err());
        assert!(h_function(0.0).is_err());
    }

    #[test]
    fn h_function_components() {
        let h = h_function(1.0).unwrap();
        assert!((h.re - 0.946_083_070_367_183).abs() < 1e-14);
        assert!((h.im + 0.337_403_922_900_968_1).abs() < 1e-14);
        let far = h_function(1e6).unwrap();
        assert!((far.re - FRAC_PI_2).abs() < 2e-6);
        let neg = h_function(-1.0).unwrap();
        assert_eq!(neg.re, -h.re);
        assert_eq!(neg, -h.conj());
    }

    #[test]
    fn limits_at_large_argument() {
        assert!((sine_integral(1e6) - FRAC_PI_2).abs() < 2e-6);
        assert!(cosine_integral(1e6).unwrap().abs() < 2e-6);
    }

    #[test]
    fn sici_branches_meet() {
        for &seam in &[SICI_SERIES_LIMIT, SICI_ASYMPTOTIC_LIMIT] {
            let below = seam * (1.0 - 1e-12);
            let (s_lo, c_lo) = if seam == SICI_SERIES_LIMIT {
                sici_series(below)
            } else {
                sici_continued_fraction(below)
            };
            let (s_hi, c_hi) = if seam == SICI_SERIES_LIMIT {
                sici_continued_fraction(seam)
            } else {
                let (f, g) = auxiliary_fg_asymptotic(seam);
                let (s, c) = seam.sin_cos();
                (FRAC_PI_2 - f * c - g * s, f * s - g * c)
            };
            assert!((s_lo - s_hi).abs() < 1e-12, "Si seam at {seam}");
            assert!((c_lo - c_hi).abs() < 1e-12, "Ci seam at {seam}");
        }
    }

    #[test]
    fn kernel_matches_direct_form() {
        for &z in &[1e-6, 0.2, 3.9, 4.1, 20.0, 49.0, 51.0, 400.0] {
            let (si, ci) = sici_positive(z);
            let (s, c) = z.sin_cos();
            let direct = Complex64::new(c + z * (si - FRAC_PI_2), s - z * ci);
            let k = rii_kernel(z);
            assert!((k - direct).norm() < 1e-12 * z.max(1.0), "z = {z}");
        }
        assert_eq!(rii_kernel(0.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn bessel_at_origin() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert_eq!(bessel_j1(0.0), 0.0);
    }

    #[test]
    fn bessel_symmetry() {
        for &x in &[0.5, 9.0, 30.0] {
            assert_eq!(bessel_j0(-x), bessel_j0(x));
            assert_eq!(bessel_j1(-x), -bessel_j1(x));
        }
    }

    #[test]
    fn first_zero_of_j0() {
        // located by bisection on the series in the integration tests
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-10);
    }

    #[test]
    fn bessel_branches_meet() {
        for &seam in &[BESSEL_SERIES_LIMIT, BESSEL_ASYMPTOTIC_LIMIT] {
            let x = seam;
            let a = if seam == BESSEL_SERIES_LIMIT {
                bessel_series(x)
            } else {
                bessel_miller(x)
            };
            let b = if seam == BESSEL_SERIES_LIMIT {
                bessel_miller(x)
            } else {
                bessel_hankel(x)
            };
            assert!((a.0 - b.0).abs() < 1e-13, "J0 seam at {seam}: {a:?} {b:?}");
            assert!((a.1 - b.1).abs() < 1e-13, "J1 seam at {seam}: {a:?} {b:?}");
        }
    }
}
