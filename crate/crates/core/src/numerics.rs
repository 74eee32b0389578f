//! Small numerical helpers shared across modules: finite-difference weights,
//! periodic spectral differentiation, quadrature and least-squares slopes.

use std::f64::consts::PI;

/// Fornberg's algorithm: weights `w[k][j]` such that the k-th derivative at `x0`
/// is approximated by `sum_j w[k][j] * f(nodes[j])`, for k = 0..=order.
pub fn fd_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivative of order `order` at `x0` from samples `(xs, fs)`.
pub fn fd_derivative(x0: f64, xs: &[f64], fs: &[f64], order: usize) -> f64 {
    let w = fd_weights(x0, xs, order);
    w[order].iter().zip(fs).map(|(a, b)| a * b).sum()
}

/// Spectral derivative (first and second) of periodic samples on a uniform grid
/// of `n` points over a period `period`. Uses a plain DFT; n is small here.
pub fn periodic_derivatives(f: &[f64], period: f64) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    if n < 3 {
        return (vec![0.0; n], vec![0.0; n]);
    }
    let scale = 2.0 * PI / period;
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let kmax = n / 2;
    for k in 0..=kmax {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, &v) in f.iter().enumerate() {
            let th = 2.0 * PI * (k * j) as f64 / n as f64;
            re += v * th.cos();
            im -= v * th.sin();
        }
        if k == 0 {
            continue;
        }
        // Nyquist mode has no well-defined first derivative; drop it there.
        let nyquist = n % 2 == 0 && k == kmax;
        let mult = if nyquist { 1.0 } else { 2.0 };
        let kk = k as f64 * scale;
        for j in 0..n {
            let th = 2.0 * PI * (k * j) as f64 / n as f64;
            let (s, c) = th.sin_cos();
            let val_re = (re * c - im * s) * mult / n as f64;
            let val_im = (re * s + im * c) * mult / n as f64;
            if !nyquist {
                d1[j] -= kk * val_im;
            }
            d2[j] -= kk * kk * val_re;
        }
    }
    (d1, d2)
}

/// Trigonometric interpolation of uniform periodic samples `f` (period
/// `period`, first sample at 0) evaluated at arbitrary points.
pub fn trig_interpolate(f: &[f64], period: f64, at: &[f64]) -> Vec<f64> {
    let n = f.len();
    if n == 1 {
        return vec![f[0]; at.len()];
    }
    let kmax = n / 2;
    let mut coef = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, &v) in f.iter().enumerate() {
            let th = 2.0 * PI * (k * j) as f64 / n as f64;
            re += v * th.cos();
            im -= v * th.sin();
        }
        coef.push((re / n as f64, im / n as f64));
    }
    at.iter()
        .map(|&y| {
            let mut s = coef[0].0;
            for (k, &(re, im)) in coef.iter().enumerate().skip(1) {
                let th = 2.0 * PI * k as f64 * y / period;
                let (sn, cs) = th.sin_cos();
                if n % 2 == 0 && k == kmax {
                    // split Nyquist mode symmetrically
                    s += re * cs;
                } else {
                    s += 2.0 * (re * cs - im * sn);
                }
            }
            s
        })
        .collect()
}

/// Dense spectral second-derivative matrix for `n` periodic points (n even).
pub fn periodic_second_derivative_matrix(n: usize, period: f64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let (_, d2) = periodic_derivatives(&e, period);
        for i in 0..n {
            m[i][j] = d2[i];
        }
    }
    // symmetrize roundoff
    for i in 0..n {
        for j in 0..i {
            let a = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = a;
            m[j][i] = a;
        }
    }
    m
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Least-squares slope of `log(y)` against `log(x)`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Solve a tridiagonal system in place (Thomas algorithm). Returns the row of
/// the first vanishing pivot on failure.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> std::result::Result<Vec<f64>, (usize, f64)> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() < 1e-300 {
        return Err((0, piv));
    }
    c[0] = if n > 1 { upper[0] / piv } else { 0.0 };
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i] * c[i - 1];
        if piv.abs() < 1e-14 * diag[i].abs().max(1e-300) {
            return Err((i, piv));
        }
        c[i] = if i + 1 < n { upper[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

/// Format a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_recovers_polynomial_derivatives() {
        let xs = [0.0, 0.1, 0.25, 0.45, 0.7];
        let fs: Vec<f64> = xs.iter().map(|x| x * x * x - 2.0 * x).collect();
        assert!((fd_derivative(0.0, &xs, &fs, 1) + 2.0).abs() < 1e-12);
        assert!(fd_derivative(0.0, &xs, &fs, 2).abs() < 1e-10);
    }

    #[test]
    fn spectral_derivatives_of_trig() {
        let n = 32;
        let f: Vec<f64> = (0..n)
            .map(|j| (3.0 * 2.0 * PI * j as f64 / n as f64).cos())
            .collect();
        let (d1, d2) = periodic_derivatives(&f, 2.0 * PI);
        for j in 0..n {
            let y = 2.0 * PI * j as f64 / n as f64;
            assert!((d1[j] + 3.0 * (3.0 * y).sin()).abs() < 1e-11);
            assert!((d2[j] + 9.0 * (3.0 * y).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn trig_interpolation_is_exact_for_low_modes() {
        let n = 16;
        let f: Vec<f64> = (0..n)
            .map(|j| {
                let y = 2.0 * PI * j as f64 / n as f64;
                1.0 + (2.0 * y).cos() - 0.5 * (3.0 * y).sin()
            })
            .collect();
        let at = [0.1, 1.7, 4.0];
        let v = trig_interpolate(&f, 2.0 * PI, &at);
        for (y, g) in at.iter().zip(v) {
            let exact = 1.0 + (2.0 * y).cos() - 0.5 * (3.0 * y).sin();
            assert!((g - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn simpson_integrates_gaussian() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -10.0, 10.0, 1e-13);
        assert!((v - PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.08, 0.04, 0.02];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
        assert!((loglog_slope(&x, &y) - 3.0).abs() < 1e-12);
    }
}
