//! Integer-order Bessel functions, the error function and `sinc`.
//!
//! `J_n` is evaluated for real arguments and `I_n` for complex arguments. Both use
//! the ascending series for small arguments and Miller's backward recurrence with
//! the Neumann normalization sums otherwise.

use num_complex::Complex64;

const SERIES_LIMIT: f64 = 1.0;
const RESCALE: f64 = 1e250;
const COMPLEX_RESCALE: f64 = 1e100;

fn miller_start(order: u32, magnitude: f64) -> u32 {
    let top = (order as f64).max(magnitude.ceil());
    let start = top + 24.0 + (60.0 * top).sqrt();
    2 * (start as u32).div_ceil(2)
}

/// Bessel function of the first kind `J_n(x)` for integer `n` and real `x`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let m = n.unsigned_abs();
    let odd = m % 2 == 1;
    let mut sign = 1.0;
    if n < 0 && odd {
        sign = -sign;
    }
    if x < 0.0 && odd {
        sign = -sign;
    }
    let ax = x.abs();
    if ax == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let value = if ax < SERIES_LIMIT {
        j_series(m, ax)
    } else {
        j_miller(m, ax)
    };
    sign * value
}

fn j_series(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=m {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + m as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || term == 0.0 {
            break;
        }
        k += 1.0;
    }
    sum
}

fn j_miller(m: u32, x: f64) -> f64 {
    let start = miller_start(m, x);
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300_f64.max(f64::MIN_POSITIVE) * 1e10; // J_k, arbitrary seed
    let mut norm = 0.0;
    let mut saved = 0.0;
    let two_over_x = 2.0 / x;
    let mut k = start;
    while k > 0 {
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        // cur now holds J_k
        if k == m {
            saved = cur;
        }
        if k > 0 && k.is_multiple_of(2) {
            norm += 2.0 * cur;
        }
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            norm /= RESCALE;
            saved /= RESCALE;
        }
    }
    norm += cur;
    saved / norm
}

/// Modified Bessel function of the first kind `I_n(z)` for integer `n` and complex `z`.
pub fn bessel_i_complex(n: i32, z: Complex64) -> Complex64 {
    let m = n.unsigned_abs();
    if z.re < 0.0 {
        let v = bessel_i_complex(n, -z);
        return if m % 2 == 1 { -v } else { v };
    }
    let az = z.norm();
    if az == 0.0 {
        return if m == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    if az < SERIES_LIMIT {
        i_series(m, z)
    } else {
        i_miller(m, z)
    }
}

/// `J_n(w)` for complex `w`, via `J_n(w) = iⁿ I_n(-i w)`.
pub fn bessel_j_complex(n: i32, w: Complex64) -> Complex64 {
    let i_pow = Complex64::i().powi(n.rem_euclid(4));
    i_pow * bessel_i_complex(n, Complex64::new(w.im, -w.re))
}

fn i_series(m: u32, z: Complex64) -> Complex64 {
    let half = 0.5 * z;
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..=m {
        term *= half / k as f64;
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + m as f64));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() || term.norm() == 0.0 {
            break;
        }
        k += 1.0;
    }
    sum
}

fn i_miller(m: u32, z: Complex64) -> Complex64 {
    let start = miller_start(m, z.norm());
    let two_over_z = 2.0 / z;
    let mut next = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1e-30, 0.0);
    let mut norm = Complex64::new(0.0, 0.0);
    let mut saved = Complex64::new(0.0, 0.0);
    let mut k = start;
    while k > 0 {
        let prev = k as f64 * two_over_z * cur + next;
        next = cur;
        cur = prev;
        k -= 1;
        if k == m {
            saved = cur;
        }
        if k > 0 {
            norm += 2.0 * cur;
        }
        if cur.norm() > COMPLEX_RESCALE {
            cur /= COMPLEX_RESCALE;
            next /= COMPLEX_RESCALE;
            norm /= COMPLEX_RESCALE;
            saved /= COMPLEX_RESCALE;
        }
    }
    norm += cur;
    // complex division squares the divisor, so bring it to unit size first
    let scale = norm.norm();
    (saved / scale) * z.exp() / (norm / scale)
}

/// Error function with absolute accuracy better than 1e-12.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let v = if ax < 2.5 {
        erf_series(ax)
    } else {
        1.0 - erfc_continued_fraction(ax)
    };
    v.copysign(x)
}

/// Complementary error function `1 - erf(x)`.
pub fn erfc(x: f64) -> f64 {
    if x >= 2.5 {
        erfc_continued_fraction(x)
    } else {
        1.0 - erf(x)
    }
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = 2/√π Σ (-1)^k x^(2k+1) / (k! (2k+1))
    let x2 = x * x;
    let mut power = x;
    let mut sum = x;
    let mut k = 0.0;
    loop {
        k += 1.0;
        power *= -x2 / k;
        let term = power / (2.0 * k + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum * std::f64::consts::FRAC_2_SQRT_PI
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), modified Lentz.
    if x > 27.0 {
        return 0.0;
    }
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (f * std::f64::consts::PI.sqrt())
}

/// Unnormalized `sin(x)/x` with `sinc(0) = 1`; callers pass the full argument
/// (e.g. `π n f`).
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Independent oracle: the ascending series summed in extended form with
    // Kahan compensation. Only used for moderate arguments.
    fn j_oracle(n: u32, x: f64) -> f64 {
        let half = x / 2.0;
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut k = 0u32;
        loop {
            let mut term = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            for i in 1..=k {
                term *= half * half / i as f64;
            }
            for i in 1..=(k + n) {
                term /= i as f64;
            }
            term *= half.powi(n as i32);
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            if term.abs() < 1e-20 && k > x as u32 {
                break;
            }
            k += 1;
        }
        sum
    }

    #[test]
    fn j_at_zero() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        for n in [-3, -1, 1, 2, 7] {
            assert_eq!(bessel_j(n, 0.0), 0.0);
        }
    }

    #[test]
    fn j2_of_pi() {
        assert!((bessel_j(2, PI) - 0.485_433_932_631_509_1).abs() < 1e-13);
        assert!((bessel_j(2, PI) - j_oracle(2, PI)).abs() < 1e-13);
    }

    #[test]
    fn j_matches_series_oracle() {
        for n in 0..12u32 {
            for &x in &[0.3, 0.9, 1.5, 2.5, 4.0, 5.5, 7.3] {
                let got = bessel_j(n as i32, x);
                let want = j_oracle(n, x);
                assert!((got - want).abs() < 1e-12, "J_{n}({x}) = {got} vs {want}");
            }
        }
    }

    #[test]
    fn j_known_large_argument_values() {
        // reference values from mpmath at 25 digits
        assert!((bessel_j(0, 50.0) - 0.055_812_327_669_251_86).abs() < 1e-12);
        assert!((bessel_j(1, 50.0) - (-0.097_511_828_125_175_1)).abs() < 1e-12);
        assert!((bessel_j(10, 30.0) - (-0.129_876_893_998_588_77)).abs() < 1e-12);
        assert!((bessel_j(40, 10.0) - 6.030_895_312_346_907e-21).abs() < 1e-32);
    }

    #[test]
    fn j_parity() {
        let x = 2.5;
        assert!((bessel_j(-3, x) + bessel_j(3, x)).abs() < 1e-15);
        assert!((bessel_j(-4, x) - bessel_j(4, x)).abs() < 1e-15);
        assert!((bessel_j(3, -x) + bessel_j(3, x)).abs() < 1e-15);
    }

    #[test]
    fn j_recurrence() {
        for &x in &[0.5, 2.0, 10.0] {
            for n in 1..=10 {
                let lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
                let rhs = 2.0 * n as f64 / x * bessel_j(n, x);
                assert!((lhs - rhs).abs() < 1e-9, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn i_at_zero_and_known_value() {
        assert_eq!(bessel_i_complex(0, Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        assert_eq!(bessel_i_complex(3, Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        let i1 = bessel_i_complex(1, Complex64::new(1.0, 0.0));
        assert!((i1.re - 0.565_159_103_992_485).abs() < 1e-14);
        assert!(i1.im.abs() < 1e-16);
        let i0 = bessel_i_complex(0, Complex64::new(1.0, 0.0));
        assert!((i0.re - 1.266_065_877_752_008_4).abs() / i0.re < 1e-12);
        let big = bessel_i_complex(2, Complex64::new(30.0, 0.0));
        assert!((big.re - 7.304_368_285_613_804e11).abs() / big.re < 1e-10);
    }

    #[test]
    fn i_of_imaginary_is_j() {
        let x = 1.7;
        for n in 0..=5 {
            let lhs = bessel_i_complex(n, Complex64::new(0.0, x));
            let rhs = Complex64::i().powi(n) * bessel_j(n, x);
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1e-300), "n={n}");
        }
    }

    #[test]
    fn i_symmetries() {
        let z = Complex64::new(-0.7, 2.3);
        for n in 0..6 {
            let a = bessel_i_complex(n, z.conj());
            let b = bessel_i_complex(n, z).conj();
            assert!((a - b).norm() <= 1e-14 * b.norm());
            let c = bessel_i_complex(-n, z);
            assert!((c - bessel_i_complex(n, z)).norm() <= 1e-14 * c.norm());
        }
        for n in [0, 2, 4] {
            let v = bessel_i_complex(n, Complex64::new(3.3, 0.0));
            assert!(v.im == 0.0 && v.re > 0.0);
        }
    }

    #[test]
    fn i_addition_identity_matches_exponential() {
        // Σ I_k(z) = e^z for complex z, independent of the normalization used inside.
        let z = Complex64::new(4.0, -6.5);
        let mut sum = Complex64::new(0.0, 0.0);
        for k in -60..=60 {
            sum += bessel_i_complex(k, z);
        }
        assert!((sum - z.exp()).norm() < 1e-11 * z.exp().norm());
    }

    #[test]
    fn complex_j_consistent_with_real() {
        for n in -4..=4 {
            let x = 3.1;
            let v = bessel_j_complex(n, Complex64::new(x, 0.0));
            assert!((v.re - bessel_j(n, x)).abs() < 1e-13 && v.im.abs() < 1e-13);
        }
    }

    #[test]
    fn erf_values() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(0.3925) - 0.421_159_253_116_199_4).abs() < 1e-13);
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-14);
        assert!((erf(2.4) - 0.999_311_486_103_355).abs() < 1e-13);
        assert!((erf(3.0) - 0.999_977_909_503_001_4).abs() < 1e-14);
        assert!((erfc(4.0) - 1.541_725_790_028_002e-8).abs() < 1e-20);
        assert_eq!(erf(f64::INFINITY), 1.0);
        assert_eq!(erf(f64::NEG_INFINITY), -1.0);
        for &x in &[0.1, 0.7, 1.9, 2.5, 2.6, 5.0] {
            assert_eq!(erf(-x), -erf(x));
        }
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(PI).abs() < 1e-15);
        assert!((sinc(1.50796) - 0.661_838_807_071_067_2).abs() < 1e-14);
        assert!((sinc(5e-5) - (5e-5f64).sin() / 5e-5).abs() < 1e-15);
    }
}
