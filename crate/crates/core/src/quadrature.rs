//! Gauss–Legendre quadrature and Legendre/Jacobi polynomial evaluation.

/// Legendre `P_n(x)` and `P_n'(x)` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    // derivative from P_n and P_{n-1}; valid away from x = +-1
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() > 1e-14 {
        nf * (x * p1 - p0) / (x * x - 1.0)
    } else {
        let s = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 - 1) };
        s * nf * (nf + 1.0) / 2.0
    };
    (p1, dp)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, exact for polynomials of
/// degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|t| 0.5 * t).collect(),
    )
}

/// Jacobi polynomials `P_k^{(a,b)}(x)` for `k = 0..count`.
pub fn jacobi(count: usize, a: f64, b: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(1.0);
    if count == 1 {
        return out;
    }
    out.push(0.5 * (a - b + (a + b + 2.0) * x));
    for k in 2..count {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let c1 = 2.0 * kf * (kf + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * s;
        let next = (c2 * out[k - 1] - c3 * out[k - 2]) / c1;
        out.push(next);
    }
    out
}

/// Values and first two derivatives (in `x`) of `P_k^{(a,b)}`, `k < count`.
pub fn jacobi_with_derivatives(count: usize, a: f64, b: f64, x: f64) -> Vec<[f64; 3]> {
    let p = jacobi(count, a, b, x);
    let d1 = jacobi(count, a + 1.0, b + 1.0, x);
    let d2 = jacobi(count, a + 2.0, b + 2.0, x);
    (0..count)
        .map(|k| {
            let kf = k as f64;
            let dp = if k >= 1 {
                0.5 * (kf + a + b + 1.0) * d1[k - 1]
            } else {
                0.0
            };
            let ddp = if k >= 2 {
                0.25 * (kf + a + b + 1.0) * (kf + a + b + 2.0) * d2[k - 2]
            } else {
                0.0
            };
            [p[k], dp, ddp]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_monomials_exactly() {
        let (x, w) = gauss_legendre_unit(6);
        for p in 0..12 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            assert!((s - 1.0 / (p as f64 + 1.0)).abs() < 1e-15, "degree {p}");
        }
    }

    #[test]
    fn jacobi_reduces_to_legendre() {
        for &x in &[-0.7, 0.1, 0.93] {
            let j = jacobi(7, 0.0, 0.0, x);
            for (k, v) in j.iter().enumerate() {
                assert!((v - legendre(k, x).0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn jacobi_orthogonality_in_r() {
        // P_k^{(0,b)}(2r-1) are orthogonal for the weight r^b on [0,1]
        let b = 6.0;
        let (r, w) = gauss_legendre_unit(30);
        for i in 0..6 {
            for j in 0..6 {
                let s: f64 = r
                    .iter()
                    .zip(&w)
                    .map(|(&r, &w)| {
                        let p = jacobi(6, 0.0, b, 2.0 * r - 1.0);
                        w * r.powf(b) * p[i] * p[j]
                    })
                    .sum();
                let want = if i == j { 1.0 / (2.0 * i as f64 + b + 1.0) } else { 0.0 };
                assert!((s - want).abs() < 1e-14, "({i},{j}) {s}");
            }
        }
    }

    #[test]
    fn jacobi_derivatives_match_finite_differences() {
        let (a, b, x, h) = (0.0, 4.0, 0.3, 1e-5);
        let d = jacobi_with_derivatives(6, a, b, x);
        let up = jacobi(6, a, b, x + h);
        let dn = jacobi(6, a, b, x - h);
        for k in 0..6 {
            let fd1 = (up[k] - dn[k]) / (2.0 * h);
            let fd2 = (up[k] - 2.0 * d[k][0] + dn[k]) / (h * h);
            assert!((fd1 - d[k][1]).abs() < 1e-7 * (1.0 + d[k][1].abs()));
            assert!((fd2 - d[k][2]).abs() < 1e-3 * (1.0 + d[k][2].abs()));
        }
    }
}
