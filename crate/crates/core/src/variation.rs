//! First and second variations of the balanced energy along normal graphs.
//!
//! A direction `f` moves the graph by `f` along the normal of the base circle,
//! so `<X, nu> dA = f h(x) dy` on the moving graph. The Hadamard formula for
//! each side's Dirichlet energy then gives
//!
//! `B' = -eps/2 int (|grad u+|^2 - |grad u-|^2) f h dy`.
//!
//! Differentiating once more at a geodesic circle, with `U` the positive
//! solution on a side, `s` the inward distance, `P = U_s` on `sigma` and
//! `V = +f` on `M+`, `-f` on `M-` the outward boundary speed:
//!
//! `B'' = -eps int f [P+ (dU+_s - f U+_ss) - P- (dU-_s + f U-_ss)] dA
//!        + eps/2 int H f^2 (P+^2 - P-^2) dA`,
//!
//! where `dU` solves the linearised equation with `dU = V P` on `sigma`.

use crate::elliptic::{boundary_vector, inward_derivatives, solve_linearized, End, PhaseField};
use crate::energy::{balanced_energy_with, broken_transition, side_curvatures, BrokenTransition};
use crate::error::{Error, Result};
use crate::geometry::{curvature_data, jacobi_spectrum, normal_graph, Dim, Hypersurface};
use nalgebra::DMatrix;
use crate::numerics::{periodic_derivatives, trig_interpolate};
use crate::profiles1d::SIGMA0;
use rayon::prelude::*;

fn broadcast(f: &[f64], n: usize) -> Result<Vec<f64>> {
    match f.len() {
        1 => Ok(vec![f[0]; n]),
        m if m == n => Ok(f.to_vec()),
        _ => Err(Error::InvalidArgument(format!(
            "direction has {} samples, hypersurface has {n}",
            f.len()
        ))),
    }
}

fn require_strip(sigma: &Hypersurface) -> Result<()> {
    if sigma.dim() != Dim::Two {
        return Err(Error::Unsupported("variations of point pairs".into()));
    }
    Ok(())
}

/// Density `D` with `B'(f) = sum_j D_j f_j` (quadrature weight included).
pub fn first_variation_density(t: &BrokenTransition) -> Result<Vec<f64>> {
    require_strip(&t.sigma)?;
    let m = t.sigma.ambient.metric;
    let dy = m.y_period() / t.sigma.ny() as f64;
    Ok(t.sigma
        .positions()
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let diff = t.slope_plus[j].powi(2) - t.slope_minus[j].powi(2);
            -0.5 * t.eps * diff * m.h(*x) * dy
        })
        .collect())
}

/// Boundary-integral first variation in direction `f`.
pub fn first_variation(t: &BrokenTransition, f: &[f64]) -> Result<f64> {
    let f = broadcast(f, t.sigma.ny())?;
    Ok(first_variation_density(t)?
        .iter()
        .zip(&f)
        .map(|(d, v)| d * v)
        .sum())
}

/// `-2 sigma0 int H <X, nu> dA`, the leading-order first variation.
pub fn first_variation_asymptotic(sigma: &Hypersurface, f: &[f64]) -> Result<f64> {
    require_strip(sigma)?;
    let f = broadcast(f, sigma.ny())?;
    let cd = curvature_data(sigma);
    let m = sigma.ambient.metric;
    let dy = m.y_period() / sigma.ny() as f64;
    Ok(-2.0
        * SIGMA0
        * sigma
            .positions()
            .iter()
            .enumerate()
            .map(|(j, x)| cd.mean_curvature[j] * f[j] * m.h(*x) * dy)
            .sum::<f64>())
}

fn require_circle(sigma: &Hypersurface) -> Result<()> {
    require_strip(sigma)?;
    if sigma.graph.iter().any(|v| *v != sigma.graph[0]) {
        return Err(Error::Unsupported(
            "exact second variation away from geodesic circles".into(),
        ));
    }
    Ok(())
}

/// Inward slope of the linearised field at `sigma` on one side.
fn linearized_slopes(
    side: &PhaseField,
    ends: &[End],
    data: &[f64],
    negate: bool,
) -> Result<Vec<f64>> {
    let d = &*side.domain;
    let base = if negate {
        PhaseField::new(side.eps, side.domain.clone(), side.values.iter().map(|v| -v).collect())
    } else {
        side.clone()
    };
    let end = ends[0];
    let g = match end {
        End::Lower => boundary_vector(d, Some(data), None),
        End::Upper => boundary_vector(d, None, Some(data)),
    };
    let v = solve_linearized(&base, &g)?;
    Ok(inward_derivatives(d, &v.values, end).iter().map(|p| p[0]).collect())
}

/// Symmetric bilinear second-variation form on a list of directions.
pub fn second_variation_form(t: &BrokenTransition, dirs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    require_circle(&t.sigma)?;
    let n = t.sigma.ny();
    let dirs: Vec<Vec<f64>> = dirs.iter().map(|f| broadcast(f, n)).collect::<Result<_>>()?;
    let m = t.sigma.ambient.metric;
    let c = t.sigma.positions()[0];
    let da = m.h(c) * m.y_period() / n as f64;
    // H for the orientation in use: the area convention
    let hmean = curvature_data(&t.sigma).mean_curvature[0];
    let (pp, pm) = (&t.column_slope_plus, &t.column_slope_minus);
    // On a level boundary the equation reduces to U_ss = H_exp U_s, which is
    // far more accurate than a one-sided second difference.
    let [hp, hm] = side_curvatures(&t.sigma);
    let cp: Vec<f64> = pp.iter().map(|p| hp * p).collect();
    let cm: Vec<f64> = pm.iter().map(|p| hm * p).collect();
    let eps = t.eps;
    // dU for each direction on both sides
    let dots: Vec<(Vec<f64>, Vec<f64>)> = dirs
        .par_iter()
        .map(|g| {
            let dp: Vec<f64> = g.iter().zip(pp).map(|(a, p)| a * p).collect();
            let dm: Vec<f64> = g.iter().zip(pm).map(|(a, p)| -a * p).collect();
            Ok((
                linearized_slopes(&t.plus, &t.ends_plus, &dp, false)?,
                linearized_slopes(&t.minus, &t.ends_minus, &dm, true)?,
            ))
        })
        .collect::<Result<_>>()?;
    let k = dirs.len();
    let mut q = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            let (f, g) = (&dirs[a], &dirs[b]);
            let (sp, sm) = (&dots[b].0, &dots[b].1);
            let mut acc = 0.0;
            for j in 0..n {
                let fg = f[j] * g[j];
                acc += -eps * (f[j] * (pp[j] * sp[j] - pm[j] * sm[j]) - fg * (pp[j] * cp[j] + pm[j] * cm[j])) * da;
                acc += 0.5 * eps * hmean * fg * (pp[j].powi(2) - pm[j].powi(2)) * da;
            }
            q[a][b] = acc;
        }
    }
    for a in 0..k {
        for b in 0..a {
            let s = 0.5 * (q[a][b] + q[b][a]);
            q[a][b] = s;
            q[b][a] = s;
        }
    }
    Ok(q)
}

/// Exact second variation at a geodesic circle via linearised solves.
pub fn second_variation_exact(t: &BrokenTransition, f: &[f64]) -> Result<f64> {
    if f.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    Ok(second_variation_form(t, &[f.to_vec()])?[0][0])
}

/// Richardson combination of the trace-based first variation on the nested
/// grids `nx` and `2 nx - 1`; trace errors are `O(dx^2)`.
pub fn first_variation_extrapolated(sigma: &Hypersurface, f: &[f64], eps: f64, nx: usize) -> Result<f64> {
    let (coarse, fine) = rayon::join(
        || broken_transition(sigma, eps, nx).and_then(|t| first_variation(&t, f)),
        || broken_transition(sigma, eps, 2 * nx - 1).and_then(|t| first_variation(&t, f)),
    );
    Ok((4.0 * fine? - coarse?) / 3.0)
}

/// Spectral resampling of periodic samples onto `n` points.
pub fn resample_values(v: &[f64], period: f64, n: usize) -> Vec<f64> {
    let ys: Vec<f64> = (0..n).map(|j| period * j as f64 / n as f64).collect();
    trig_interpolate(v, period, &ys)
}

/// The same curve sampled at `n` points.
pub fn resample(sigma: &Hypersurface, n: usize) -> Result<Hypersurface> {
    let g = resample_values(&sigma.graph, sigma.ambient.metric.y_period(), n);
    sigma.with_graph(g)
}

/// Trace formula and FD oracle, each extrapolated toward the continuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstVariationCheck {
    pub analytic: f64,
    pub fd: f64,
    pub relative: f64,
}

/// Both first-variation estimates Richardson-extrapolated in `x` (nested
/// grids `nx`, `2nx - 1`) and, for `y`-dependent data, in `y` (samples `ny`
/// and `2 ny`). Both carry `O(dx^2 + dy^2)` errors of opposite character, so
/// only the extrapolated values are comparable at the 1e-3 level.
pub fn first_variation_check(sigma: &Hypersurface, f: &[f64], eps: f64, nx: usize, step: f64) -> Result<FirstVariationCheck> {
    let n = sigma.ny();
    let f = broadcast(f, n)?;
    let flat = n == 1 || (sigma.graph.iter().all(|v| *v == sigma.graph[0]) && f.iter().all(|v| *v == f[0]));
    let period = sigma.ambient.metric.y_period();
    let fine_y = if flat { None } else { Some((resample(sigma, 2 * n)?, resample_values(&f, period, 2 * n))) };
    let mut grids = vec![(sigma.clone(), f.clone(), nx), (sigma.clone(), f.clone(), 2 * nx - 1)];
    if let Some((s, g)) = fine_y {
        grids.push((s, g, nx));
    }
    let vals: Vec<(f64, f64)> = grids
        .par_iter()
        .map(|(s, g, m)| {
            let t = broken_transition(s, eps, *m)?;
            Ok((first_variation(&t, g)?, fd_variation(s, g, eps, *m, 1, step)?))
        })
        .collect::<Result<_>>()?;
    let combine = |k: fn(&(f64, f64)) -> f64| {
        let base = k(&vals[0]);
        vals[1..].iter().fold(base, |acc, v| acc + 4.0 / 3.0 * (k(v) - base))
    };
    let analytic = combine(|v| v.0);
    let fd = combine(|v| v.1);
    Ok(FirstVariationCheck {
        analytic,
        fd,
        relative: (analytic - fd).abs() / fd.abs().max(f64::MIN_POSITIVE),
    })
}

/// Richardson combination of [`second_variation_exact`] on nested grids.
pub fn second_variation_extrapolated(sigma: &Hypersurface, f: &[f64], eps: f64, nx: usize) -> Result<f64> {
    let coarse = second_variation_exact(&broken_transition(sigma, eps, nx)?, f)?;
    let fine = second_variation_exact(&broken_transition(sigma, eps, 2 * nx - 1)?, f)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Eigenvalues of the second-variation form restricted to the first `modes`
/// Jacobi eigenfunctions, relative to their `L^2(dA)` Gram matrix. The form is
/// Richardson-combined over the nested grids `nx`, `2nx - 1`.
pub fn second_variation_spectrum(sigma: &Hypersurface, eps: f64, nx: usize, modes: usize) -> Result<Vec<f64>> {
    require_circle(sigma)?;
    let n = sigma.ny();
    let spec = jacobi_spectrum(sigma, modes, n.max(4) + n.max(4) % 2)?;
    let dirs: Vec<Vec<f64>> = (0..modes).map(|k| spec.sample(k, n)).collect();
    let (qc, qf) = rayon::join(
        || broken_transition(sigma, eps, nx).and_then(|t| second_variation_form(&t, &dirs)),
        || broken_transition(sigma, eps, 2 * nx - 1).and_then(|t| second_variation_form(&t, &dirs)),
    );
    let (qc, qf) = (qc?, qf?);
    let m = sigma.ambient.metric;
    let w = m.h(sigma.positions()[0]) * m.y_period() / n as f64;
    let q = DMatrix::from_fn(modes, modes, |a, b| (4.0 * qf[a][b] - qc[a][b]) / 3.0);
    let g = DMatrix::from_fn(modes, modes, |a, b| w * dirs[a].iter().zip(&dirs[b]).map(|(x, y)| x * y).sum::<f64>());
    let l = g.cholesky().ok_or(Error::Singular { row: 0, pivot: 0.0 })?.l();
    let linv = l.clone().try_inverse().ok_or(Error::Singular { row: 0, pivot: 0.0 })?;
    let c = &linv * q * linv.transpose();
    let c = 0.5 * (&c + c.transpose());
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

/// Geometric second variation under both sign conventions:
/// `A = 2 sigma0 int |grad f|^2 + (Ric + |A|^2 - H^2) f^2`,
/// `B = 2 sigma0 int |grad f|^2 - (Ric + |A|^2) f^2 + H^2 f^2`,
/// with `f` the normal speed of the variation.
pub fn second_variation_asymptotic(sigma: &Hypersurface, f: &[f64]) -> Result<(f64, f64)> {
    require_strip(sigma)?;
    let n = sigma.ny();
    let f = broadcast(f, n)?;
    let m = sigma.ambient.metric;
    let x = sigma.positions();
    let period = m.y_period();
    let dy = period / n as f64;
    let (gp, _) = periodic_derivatives(&x, period);
    let q: Vec<f64> = x.iter().zip(&gp).map(|(x, p)| (p * p + m.h(*x).powi(2)).sqrt()).collect();
    let phi: Vec<f64> = (0..n).map(|j| f[j] * m.h(x[j]) / q[j]).collect();
    let (dphi, _) = periodic_derivatives(&phi, period);
    let cd = curvature_data(sigma);
    let (mut grad, mut pot, mut h2) = (0.0, 0.0, 0.0);
    for j in 0..n {
        grad += dphi[j].powi(2) / q[j] * dy;
        let da = q[j] * dy;
        pot += (cd.ricci_normal[j] + cd.second_fundamental_sq[j]) * phi[j].powi(2) * da;
        h2 += cd.mean_curvature[j].powi(2) * phi[j].powi(2) * da;
    }
    Ok((
        2.0 * SIGMA0 * (grad + pot - h2),
        2.0 * SIGMA0 * (grad - pot + h2),
    ))
}

/// Finite-difference oracle: derivative of `t -> B(graph + t f)` with two-level
/// Richardson extrapolation. `step` is scaled by `1 / sup|f|`.
pub fn fd_variation(sigma: &Hypersurface, f: &[f64], eps: f64, nx: usize, order: u8, step: f64) -> Result<f64> {
    require_strip(sigma)?;
    let n = sigma.ny();
    let f = broadcast(f, n)?;
    let sup = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if sup == 0.0 {
        return Ok(0.0);
    }
    if !(order == 1 || order == 2) {
        return Err(Error::InvalidArgument("order must be 1 or 2".into()));
    }
    let h = step / sup;
    let energy = |t: f64| -> Result<f64> {
        let g: Vec<f64> = sigma.graph.iter().zip(&f).map(|(a, b)| a + t * b).collect();
        let s = sigma.with_graph(g)?;
        Ok(balanced_energy_with(&s, eps, nx)?.balanced)
    };
    let ts = [h, -h, 0.5 * h, -0.5 * h, 0.0];
    let needed = if order == 1 { 4 } else { 5 };
    let vals: Vec<f64> = ts[..needed].par_iter().map(|t| energy(*t)).collect::<Result<_>>()?;
    let (d_h, d_half) = if order == 1 {
        ((vals[0] - vals[1]) / (2.0 * h), (vals[2] - vals[3]) / h)
    } else {
        let b0 = vals[4];
        (
            (vals[0] - 2.0 * b0 + vals[1]) / (h * h),
            (vals[2] - 2.0 * b0 + vals[3]) / (0.25 * h * h),
        )
    };
    let rich = (4.0 * d_half - d_h) / 3.0;
    let scale = vals[needed - 1].abs().max(1.0) * 1e-9 / h.powi(order as i32);
    let relative = (rich - d_half).abs() / (rich.abs() + scale);
    if relative > 1e-3 {
        return Err(Error::StepTooLarge { relative });
    }
    Ok(rich)
}

/// Which printed form of the geometric second variation the oracle supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `+(Ric + |A|^2 - H^2)`.
    AsPrinted,
    /// `-(Ric + |A|^2) + H^2`.
    AreaTheory,
    Undecided,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::AsPrinted => "as-printed",
            Convention::AreaTheory => "area-theory",
            Convention::Undecided => "undecided",
        }
    }
}

/// All variation estimates for one direction, with discrepancies.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationReport {
    pub eps: f64,
    pub direction: Vec<f64>,
    pub first_analytic: f64,
    pub first_asymptotic: f64,
    pub first_fd: f64,
    pub second_exact: Option<f64>,
    pub second_asymptotic: (f64, f64),
    pub second_fd: f64,
    pub convention: Convention,
    /// Sign arbitration of the first variation: does the analytic value
    /// match the oracle with the `-eps/2` prefactor?
    pub first_sign_matches: bool,
}

impl VariationReport {
    pub fn first_discrepancy(&self) -> (f64, f64) {
        let abs = (self.first_analytic - self.first_fd).abs();
        (abs, abs / (self.first_fd.abs() + 1e-12))
    }

    pub fn second_discrepancy(&self) -> Option<(f64, f64)> {
        self.second_exact.map(|e| {
            let abs = (e - self.second_fd).abs();
            (abs, abs / (self.second_fd.abs() + 1e-12))
        })
    }

    /// `key=value` record.
    pub fn record(&self) -> String {
        let f = crate::numerics::fmt17;
        let (a1, r1) = self.first_discrepancy();
        let mut s = format!(
            "eps={} first_analytic={} first_asymptotic={} first_fd={} first_abs={} first_rel={} first_sign={} second_asym_printed={} second_asym_area={} second_fd={} convention={}",
            f(self.eps),
            f(self.first_analytic),
            f(self.first_asymptotic),
            f(self.first_fd),
            f(a1),
            f(r1),
            if self.first_sign_matches { "minus-half" } else { "plus-half" },
            f(self.second_asymptotic.0),
            f(self.second_asymptotic.1),
            f(self.second_fd),
            self.convention.name()
        );
        if let (Some(e), Some((a, r))) = (self.second_exact, self.second_discrepancy()) {
            s.push_str(&format!(" second_exact={} second_abs={} second_rel={}", f(e), f(a), f(r)));
        }
        s
    }
}

/// Evaluate every estimate for `(sigma, f)` and arbitrate conventions.
pub fn variation_report(sigma: &Hypersurface, f: &[f64], eps: f64, nx: usize, step: f64) -> Result<VariationReport> {
    let f = broadcast(f, sigma.ny())?;
    let check = first_variation_check(sigma, &f, eps, nx, step)?;
    let (first_analytic, first_fd) = (check.analytic, check.fd);
    let first_asymptotic = first_variation_asymptotic(sigma, &f)?;
    let second_exact = match second_variation_extrapolated(sigma, &f, eps, nx) {
        Ok(v) => Some(v),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let second_asymptotic = second_variation_asymptotic(sigma, &f)?;
    let second_fd = fd_variation(sigma, &f, eps, nx, 2, step)?;
    let (da, db) = (
        (second_asymptotic.0 - second_fd).abs(),
        (second_asymptotic.1 - second_fd).abs(),
    );
    let convention = if (da - db).abs() <= 1e-12 {
        Convention::Undecided
    } else if db < da {
        Convention::AreaTheory
    } else {
        Convention::AsPrinted
    };
    let first_sign_matches = (first_analytic - first_fd).abs() <= (first_analytic + first_fd).abs();
    Ok(VariationReport {
        eps,
        direction: f,
        first_analytic,
        first_asymptotic,
        first_fd,
        second_exact,
        second_asymptotic,
        second_fd,
        convention,
        first_sign_matches,
    })
}

/// Normal graph of `sigma.graph + t f`.
pub fn perturb(sigma: &Hypersurface, f: &[f64], t: f64) -> Result<Hypersurface> {
    let f = broadcast(f, sigma.ny())?;
    let g: Vec<f64> = sigma.graph.iter().zip(&f).map(|(a, b)| a + t * b).collect();
    sigma.with_graph(g)
}

/// Graph over the base circle offset by `f`.
pub fn graph_over(base: &Hypersurface, f: &[f64]) -> Result<Hypersurface> {
    normal_graph(base, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::DEFAULT_NX;
    use crate::geometry::{geodesic_circle, jacobi_spectrum, make_warped_torus, Ambient};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn s0(ny: usize) -> Hypersurface {
        let m = make_warped_torus(2.0, 0.3).unwrap();
        geodesic_circle(Ambient::centred_strip(m), 0.0, ny).unwrap()
    }

    #[test]
    fn first_variation_at_minimal_and_odd() {
        let eps = 0.05;
        let t = broken_transition(&s0(1), eps, DEFAULT_NX).unwrap();
        assert!(first_variation(&t, &[1.0]).unwrap().abs() <= eps);
        let s = s0(16);
        let t = broken_transition(&s, eps, DEFAULT_NX).unwrap();
        let odd: Vec<f64> = s.y_grid().iter().map(|y| y.sin()).collect();
        assert!(first_variation(&t, &odd).unwrap().abs() < 1e-10);
        assert_eq!(fd_variation(&s, &[0.0], eps, DEFAULT_NX, 1, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn first_variation_off_minimal_matches_fd_and_geometry() {
        let eps = 0.05;
        let m = make_warped_torus(2.0, 0.3).unwrap();
        let s = geodesic_circle(Ambient::centred_strip(m), FRAC_PI_2, 1).unwrap();
        let analytic = first_variation_extrapolated(&s, &[1.0], eps, DEFAULT_NX).unwrap();
        let fd = fd_variation(&s, &[1.0], eps, DEFAULT_NX, 1, 1e-3).unwrap();
        assert!((analytic - fd).abs() <= 1e-3 * fd.abs(), "{analytic} vs {fd}");
        let asym = first_variation_asymptotic(&s, &[1.0]).unwrap();
        let expect = -2.0 * SIGMA0 * 0.15 * 2.0 * PI * 2.0;
        assert!((asym - expect).abs() < 1e-12);
        assert!((analytic - asym).abs() < 5.0 * eps * asym.abs(), "{analytic} vs {asym}");
    }

    #[test]
    fn second_variation_along_constant() {
        let eps = 0.05;
        let s = s0(1);
        let t = broken_transition(&s, eps, DEFAULT_NX).unwrap();
        assert_eq!(second_variation_exact(&t, &[0.0]).unwrap(), 0.0);
        let sp = jacobi_spectrum(&s0(8), 1, 32).unwrap();
        let u0 = sp.sample(0, 1);
        let exact = second_variation_extrapolated(&s, &u0, eps, DEFAULT_NX).unwrap();
        let fd = fd_variation(&s, &u0, eps, DEFAULT_NX, 2, 1e-3).unwrap();
        assert!((exact - fd).abs() <= 0.01 * fd.abs(), "{exact} vs {fd}");
        let target = 2.0 * SIGMA0 * sp.eigenvalues[0];
        assert!(exact < 0.0);
        assert!((exact - target).abs() <= eps.sqrt() * target.abs(), "{exact} vs {target}");
        let (a, b) = second_variation_asymptotic(&s, &u0).unwrap();
        assert!((b - target).abs() < 1e-10 && (a + target).abs() < 1e-10);
    }

    #[test]
    fn first_variation_check_on_tilted_graph() {
        let m = make_warped_torus(2.0, 0.3).unwrap();
        let base = geodesic_circle(Ambient::centred_strip(m), 0.4, 16).unwrap();
        let ys = base.y_grid();
        let s = base.with_graph(ys.iter().map(|y| 0.08 * y.cos()).collect()).unwrap();
        let f: Vec<f64> = ys.iter().map(|y| 1.0 + 0.5 * (2.0 * y).sin()).collect();
        let c = first_variation_check(&s, &f, 0.05, DEFAULT_NX, 1e-3).unwrap();
        assert!(c.relative <= 1e-3, "{c:?}");
        let back = resample(&resample(&s, 32).unwrap(), 16).unwrap();
        assert!(back.graph.iter().zip(&s.graph).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn asymptotic_forms_on_flat_torus() {
        let m = make_warped_torus(2.0, 0.0).unwrap();
        let s = geodesic_circle(Ambient::centred_strip(m), 0.0, 32).unwrap();
        let f: Vec<f64> = s.y_grid().iter().map(|y| (2.0 * y).cos()).collect();
        let (a, b) = second_variation_asymptotic(&s, &f).unwrap();
        let expect = 2.0 * SIGMA0 * 4.0 / 2.0 * PI;
        assert!((a - b).abs() < 1e-12 && (a - expect).abs() < 1e-10, "{a} {expect}");
    }
}
