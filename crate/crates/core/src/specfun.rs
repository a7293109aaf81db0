//! Spherical Bessel functions of the first kind.
//!
//! Three evaluation regimes are used, chosen by order and argument:
//!
//! * power series for `x < max(1, n/2)`, where both recurrences lose digits;
//! * upward recurrence from the closed forms of `j0` and `j1` when `n < x`;
//! * Miller's downward recurrence otherwise, normalized against whichever of
//!   `j0`, `j1` has the larger magnitude.
//!
//! [`sph_bessel_series_path`] is a second, independent evaluation route
//! (series or upward recurrence only, never Miller) used by the boundary
//! residual oracle in [`crate::ball`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value and derivative of `j_n` at one argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselEval {
    pub order: u32,
    pub argument: f64,
    pub value: f64,
    pub derivative: f64,
}

/// Evaluates `j_n(x)` and `j_n'(x)` for `n >= 0`, `x >= 0`.
///
/// Accurate to about `1e-12` relative for `n <= 80`, `x <= 100` away from
/// the zeros of `j_n`.
pub fn sph_bessel(n: i64, x: f64) -> Result<BesselEval> {
    let order = check_domain(n, x)?;
    let (value, derivative) = if x == 0.0 {
        at_origin(order)
    } else if x < f64::max(1.0, order as f64 / 2.0) {
        series(order, x)
    } else if (order as f64) < x {
        let (jn, jnm1) = upward(order, x);
        (jn, derivative_from(order, x, jn, jnm1))
    } else {
        let (jn, jnm1) = miller(order, x);
        (jn, derivative_from(order, x, jn, jnm1))
    };
    Ok(BesselEval {
        order,
        argument: x,
        value,
        derivative,
    })
}

/// Second evaluation route: power series for small arguments and for
/// `n + 1/2 >= x`, upward recurrence from the trigonometric closed forms
/// otherwise. Shares no code with the Miller path of [`sph_bessel`].
pub fn sph_bessel_series_path(n: i64, x: f64) -> Result<BesselEval> {
    let order = check_domain(n, x)?;
    let (value, derivative) = if x == 0.0 {
        at_origin(order)
    } else if x <= 12.0 || order as f64 + 0.5 >= x {
        series(order, x)
    } else {
        let (jn, jnm1) = upward(order, x);
        (jn, derivative_from(order, x, jn, jnm1))
    };
    Ok(BesselEval {
        order,
        argument: x,
        value,
        derivative,
    })
}

/// `(2n+1)!!` as a float.
pub fn double_factorial_odd(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * (2 * i + 1) as f64)
}

/// The even power series `S(x)` with `j_n(x) = x^n / (2n+1)!! * S(x)`, and
/// `x S'(x)`.
///
/// Exposed so that callers can differentiate `j_n(w r) / r^n` without
/// dividing by small powers of `r`.
pub fn reduced_series(n: u32, x: f64) -> (f64, f64) {
    let half_sq = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut sum_deriv = 0.0;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= half_sq / (k as f64 * (2 * n + 2 * k + 1) as f64);
        sum += term;
        sum_deriv += 2.0 * k as f64 * term;
        if term.abs() <= 1e-18 * sum.abs().max(1e-300) || k > 500 {
            break;
        }
    }
    (sum, sum_deriv)
}

fn check_domain(n: i64, x: f64) -> Result<u32> {
    if n < 0 {
        return Err(Error::Domain(format!("spherical Bessel order must be >= 0, got {n}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "spherical Bessel argument must be finite and >= 0, got {x}"
        )));
    }
    u32::try_from(n).map_err(|_| Error::Domain(format!("order {n} out of range")))
}

fn at_origin(n: u32) -> (f64, f64) {
    match n {
        0 => (1.0, 0.0),
        1 => (0.0, 1.0 / 3.0),
        _ => (0.0, 0.0),
    }
}

fn series(n: u32, x: f64) -> (f64, f64) {
    let mut prefactor = 1.0;
    for i in 1..=n {
        prefactor *= x / (2 * i + 1) as f64;
    }
    let (sum, x_deriv) = reduced_series(n, x);
    let value = prefactor * sum;
    // d/dx [x^n S(x)] / (2n+1)!! = prefactor * (n S + x S') / x
    let derivative = prefactor * (n as f64 * sum + x_deriv) / x;
    (value, derivative)
}

fn j0_j1(x: f64) -> (f64, f64) {
    let (s, c) = x.sin_cos();
    (s / x, s / (x * x) - c / x)
}

/// Returns `(j_n, j_{n-1})`; `j_{-1}` is reported as `cos(x)/x`.
fn upward(n: u32, x: f64) -> (f64, f64) {
    let (j0, j1) = j0_j1(x);
    if n == 0 {
        return (j0, x.cos() / x);
    }
    let (mut prev, mut curr) = (j0, j1);
    for k in 1..n {
        let next = (2 * k + 1) as f64 / x * curr - prev;
        prev = curr;
        curr = next;
    }
    (curr, prev)
}

/// Returns `(j_n, j_{n-1})` by downward recurrence.
fn miller(n: u32, x: f64) -> (f64, f64) {
    let top = f64::max(n as f64, x);
    let start = (top + 30.0 + (40.0 * top).sqrt()).ceil() as u32;
    let mut upper = 0.0_f64;
    let mut curr = 1e-280_f64;
    let mut jn = 0.0;
    let mut jnm1 = 0.0;
    let mut f1 = 0.0;
    let mut k = start;
    // invariant: curr ~ f_k, upper ~ f_{k+1}
    loop {
        if k == n {
            jn = curr;
        }
        if n >= 1 && k == n - 1 {
            jnm1 = curr;
        }
        if k == 1 {
            f1 = curr;
        }
        if k == 0 {
            break;
        }
        let lower = (2 * k + 1) as f64 / x * curr - upper;
        upper = curr;
        curr = lower;
        k -= 1;
        if curr.abs() > 1e250 {
            let s = 1e-250;
            curr *= s;
            upper *= s;
            jn *= s;
            jnm1 *= s;
            f1 *= s;
        }
    }
    let f0 = curr;
    let (j0, j1) = j0_j1(x);
    let scale = if j0.abs() >= j1.abs() { j0 / f0 } else { j1 / f1 };
    if n == 0 {
        (j0, x.cos() / x)
    } else {
        (jn * scale, jnm1 * scale)
    }
}

fn derivative_from(n: u32, x: f64, jn: f64, jnm1: f64) -> f64 {
    if n == 0 {
        // j0' = -j1
        let (_, j1) = j0_j1(x);
        -j1
    } else {
        jnm1 - (n as f64 + 1.0) * jn / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference `(n, x, j_n(x), j_n'(x))` computed with mpmath at 50 digits.
    const REFERENCE: &[(i64, f64, f64, f64)] = &[
        (0, 1.0, 0.841_470_984_807_896_51, -0.301_168_678_939_756_79),
        (1, 1.0, 0.301_168_678_939_756_79, 0.239_133_626_928_382_93),
        (2, 5.0, 0.134_731_210_085_125_22, -0.175_928_134_130_245_92),
        (5, 0.5, 2.977_466_875_457_445_6e-6, 2.966_000_364_690_036_2e-5),
        (10, 10.0, 0.064_605_154_492_564_264, 0.029_030_739_606_669_886),
        (10, 3.0, 3.526_003_893_175_256_3e-6, 1.128_601_803_132_126_6e-5),
        (30, 50.0, -0.001_494_673_453_605_112_2, 0.017_807_043_953_951_532),
        (40, 20.0, 1.419_799_206_010_892_3e-10, 2.475_587_319_330_906_1e-10),
        (80, 100.0, 0.005_616_665_953_607_245_7, -0.007_054_494_049_854_877_8),
        (3, 99.5, 0.005_677_647_441_141_898_8, 0.008_234_448_216_120_292_4),
        (20, 15.0, 0.001_546_705_851_041_250_8, 0.001_440_650_709_857_462_2),
        (60, 45.0, 2.521_024_279_359_671_7e-6, 2.270_174_504_793_405_5e-6),
        (1, 0.001, 3.333_333_000_000_012e-4, 0.333_333_233_333_339_29),
        (50, 60.0, -0.021_230_978_268_738_994, -0.003_473_993_166_966_096_5),
        (7, 33.3, -0.027_857_233_778_314_684, -0.011_052_521_672_765_817),
    ];

    #[test]
    fn matches_reference_values() {
        for &(n, x, want, want_d) in REFERENCE {
            let got = sph_bessel(n, x).unwrap();
            assert!(
                (got.value - want).abs() <= 1e-12 * want.abs(),
                "j_{n}({x}) = {}, want {want}",
                got.value
            );
            assert!(
                (got.derivative - want_d).abs() <= 1e-11 * want_d.abs(),
                "j_{n}'({x}) = {}, want {want_d}",
                got.derivative
            );
        }
    }

    #[test]
    fn closed_forms() {
        let e = sph_bessel(0, 1.0).unwrap();
        assert!((e.value - 1f64.sin()).abs() < 1e-15);
        assert_eq!(sph_bessel(3, 0.0).unwrap().value, 0.0);
        assert_eq!(sph_bessel(0, 0.0).unwrap().value, 1.0);
    }

    #[test]
    fn j1_against_thirty_term_series() {
        // j1(x) = sum_k (-1)^k x^(2k+1) (2k+2) / (2k+3)!
        let x: f64 = 1.0;
        let mut oracle = 0.0;
        for k in 0..30u32 {
            let mut fact = 1.0;
            for i in 1..=(2 * k + 3) {
                fact *= i as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            oracle += sign * x.powi(2 * k as i32 + 1) * (2 * k + 2) as f64 / fact;
        }
        assert!((oracle - 0.301_168_678_9).abs() < 1e-10);
        let got = sph_bessel(1, x).unwrap().value;
        assert!((got - oracle).abs() < 1e-15);
    }

    #[test]
    fn negative_inputs_are_domain_errors() {
        assert!(matches!(sph_bessel(-1, 1.0), Err(Error::Domain(_))));
        assert!(matches!(sph_bessel(1, -0.5), Err(Error::Domain(_))));
        assert!(matches!(sph_bessel(1, f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn small_argument_law() {
        let x = 1e-4_f64;
        for n in 0..=10u32 {
            let got = sph_bessel(n as i64, x).unwrap().value / x.powi(n as i32);
            let want = 1.0 / double_factorial_odd(n);
            assert!((got / want - 1.0).abs() < 1e-6, "n = {n}");
        }
    }

    #[test]
    fn both_paths_agree() {
        for n in 0..=20 {
            for &x in &[0.3, 1.0, 2.5, 7.0, 11.0, 15.0, 25.0] {
                let a = sph_bessel(n, x).unwrap();
                let b = sph_bessel_series_path(n, x).unwrap();
                let scale = a.value.abs().max(1e-3 * a.derivative.abs()).max(1e-300);
                assert!(
                    (a.value - b.value).abs() <= 1e-11 * scale.max(1e-12),
                    "n={n} x={x}: {} vs {}",
                    a.value,
                    b.value
                );
            }
        }
    }

    #[test]
    fn derivative_at_origin() {
        assert!((sph_bessel(1, 0.0).unwrap().derivative - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(sph_bessel(0, 0.0).unwrap().derivative, 0.0);
        assert_eq!(sph_bessel(4, 0.0).unwrap().derivative, 0.0);
    }
}
