//! One-dimensional building blocks: the double well, the heteroclinic, the
//! auxiliary interface-correction profiles and their cutoffs.
//!
//! Profiles live in the stretched variable `z` (distance divided by `eps`).
//! The auxiliary profiles solve `f'' - W''(het) f = rhs` on `[0, z_max]` with
//! `f(0) = f(z_max) = 0`:
//!
//! | kind    | rhs            |
//! |---------|----------------|
//! | `Omega` | `het'`         |
//! | `Rho`   | `omega'`       |
//! | `Tau`   | `z het'`       |
//! | `Kappa` | `het * omega`  |

use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, fd_weights, fmt17, solve_tridiagonal};
use std::f64::consts::SQRT_2;

/// The quartic double well `W(t) = (1 - t^2)^2 / 4`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleWell;

impl DoubleWell {
    pub fn value(t: f64) -> f64 {
        let s = 1.0 - t * t;
        0.25 * s * s
    }
    pub fn d1(t: f64) -> f64 {
        t * t * t - t
    }
    pub fn d2(t: f64) -> f64 {
        3.0 * t * t - 1.0
    }
    pub fn d3(t: f64) -> f64 {
        6.0 * t
    }
}

/// `(W, W', W'')` at `t`.
pub fn double_well(t: f64) -> (f64, f64, f64) {
    (DoubleWell::value(t), DoubleWell::d1(t), DoubleWell::d2(t))
}

/// `(het, het')` with `het(z) = tanh(z / sqrt 2)`.
pub fn heteroclinic(z: f64) -> (f64, f64) {
    let v = (z / SQRT_2).tanh();
    (v, (1.0 - v * v) / SQRT_2)
}

/// Heteroclinic value and its first three derivatives.
pub fn heteroclinic_jet(z: f64) -> [f64; 4] {
    let (v, d1) = heteroclinic(z);
    let d2 = -SQRT_2 * v * d1;
    let d3 = -SQRT_2 * (d1 * d1 + v * d2);
    [v, d1, d2, d3]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    Heteroclinic,
    Omega,
    Rho,
    Tau,
    Kappa,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Heteroclinic => "heteroclinic",
            ProfileKind::Omega => "omega",
            ProfileKind::Rho => "rho",
            ProfileKind::Tau => "tau",
            ProfileKind::Kappa => "kappa",
        }
    }

    /// Value the cutoff profile takes far from the interface.
    pub fn tail(self) -> f64 {
        match self {
            ProfileKind::Heteroclinic => 1.0,
            _ => 0.0,
        }
    }
}

/// Sampled profile on a uniform grid of `[0, z_max]`.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    pub kind: ProfileKind,
    pub z: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub second: Vec<f64>,
    pub z_max: f64,
    /// Sup norm of the ODE residual measured with a fourth-order second difference.
    pub residual: f64,
}

impl ProfileTable {
    /// Closed-form heteroclinic sampled on `n + 1` points.
    pub fn heteroclinic(z_max: f64, n: usize) -> Self {
        let dz = z_max / n as f64;
        let z: Vec<f64> = (0..=n).map(|i| i as f64 * dz).collect();
        let jets: Vec<[f64; 4]> = z.iter().map(|&s| heteroclinic_jet(s)).collect();
        let residual = jets
            .iter()
            .map(|j| (j[2] - DoubleWell::d1(j[0])).abs())
            .fold(0.0, f64::max);
        ProfileTable {
            kind: ProfileKind::Heteroclinic,
            values: jets.iter().map(|j| j[0]).collect(),
            derivs: jets.iter().map(|j| j[1]).collect(),
            second: jets.iter().map(|j| j[2]).collect(),
            z,
            z_max,
            residual,
        }
    }

    fn spacing(&self) -> f64 {
        self.z[1] - self.z[0]
    }

    /// `(f, f', f'')` at `z`. Negative `z` uses the odd extension; beyond
    /// `z_max` the decayed tail (0, or the closed form for the heteroclinic).
    pub fn eval(&self, z: f64) -> [f64; 3] {
        if self.kind == ProfileKind::Heteroclinic {
            let j = heteroclinic_jet(z);
            return [j[0], j[1], j[2]];
        }
        if z < 0.0 {
            let [v, d1, d2] = self.eval(-z);
            return [-v, d1, -d2];
        }
        if z >= self.z_max {
            return [0.0, 0.0, 0.0];
        }
        let dz = self.spacing();
        let i = ((z / dz) as usize).min(self.z.len() - 2);
        let t = (z - self.z[i]) / dz;
        quintic_hermite(
            t,
            dz,
            [self.values[i], self.derivs[i], self.second[i]],
            [self.values[i + 1], self.derivs[i + 1], self.second[i + 1]],
        )
    }

    pub fn value_at(&self, z: f64) -> f64 {
        self.eval(z)[0]
    }

    /// Two-column CSV `(z, value)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z,value\n");
        for (z, v) in self.z.iter().zip(&self.values) {
            out.push_str(&fmt17(*z));
            out.push(',');
            out.push_str(&fmt17(*v));
            out.push('\n');
        }
        out
    }
}

/// Quintic Hermite interpolation on one cell of width `h`; returns value and
/// first two derivatives.
fn quintic_hermite(t: f64, h: f64, left: [f64; 3], right: [f64; 3]) -> [f64; 3] {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let b = [
        1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
        t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
        0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
        0.5 * (t3 - 2.0 * t4 + t5),
        -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
        10.0 * t3 - 15.0 * t4 + 6.0 * t5,
    ];
    let db = [
        -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
        1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
        0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4),
        0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4),
        -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
        30.0 * t2 - 60.0 * t3 + 30.0 * t4,
    ];
    let ddb = [
        -60.0 * t + 180.0 * t2 - 120.0 * t3,
        -36.0 * t + 96.0 * t2 - 60.0 * t3,
        0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3),
        0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3),
        -24.0 * t + 84.0 * t2 - 60.0 * t3,
        60.0 * t - 180.0 * t2 + 120.0 * t3,
    ];
    let coef = [
        left[0],
        h * left[1],
        h * h * left[2],
        h * h * right[2],
        h * right[1],
        right[0],
    ];
    let mut out = [0.0; 3];
    for k in 0..6 {
        out[0] += b[k] * coef[k];
        out[1] += db[k] * coef[k] / h;
        out[2] += ddb[k] * coef[k] / (h * h);
    }
    out
}

fn rhs_for(kind: ProfileKind, z: f64, omega: Option<&ProfileTable>) -> f64 {
    let (het, dhet) = heteroclinic(z);
    match kind {
        ProfileKind::Omega => dhet,
        ProfileKind::Tau => z * dhet,
        ProfileKind::Rho => omega.map(|w| w.eval(z)[1]).unwrap_or(0.0),
        ProfileKind::Kappa => het * omega.map(|w| w.eval(z)[0]).unwrap_or(0.0),
        ProfileKind::Heteroclinic => 0.0,
    }
}

/// Solve the auxiliary two-point problem for `kind` on `[0, z_max]` with
/// `resolution` cells (fourth-order Numerov discretisation).
pub fn solve_profile_bvp(
    kind: ProfileKind,
    z_max: f64,
    resolution: usize,
    omega: Option<&ProfileTable>,
) -> Result<ProfileTable> {
    if kind == ProfileKind::Heteroclinic {
        return Ok(ProfileTable::heteroclinic(z_max, resolution));
    }
    if z_max < 20.0 {
        return Err(Error::InvalidArgument(format!(
            "z_max = {z_max} must be at least 20"
        )));
    }
    if resolution < 16 {
        return Err(Error::Singular {
            row: 0,
            pivot: 0.0,
        });
    }
    let needs_omega = matches!(kind, ProfileKind::Rho | ProfileKind::Kappa);
    if needs_omega && omega.map(|w| w.kind) != Some(ProfileKind::Omega) {
        return Err(Error::InvalidArgument(format!(
            "{} requires the omega profile",
            kind.name()
        )));
    }

    let n = resolution;
    let dz = z_max / n as f64;
    let z: Vec<f64> = (0..=n).map(|i| i as f64 * dz).collect();
    let q: Vec<f64> = z.iter().map(|&s| DoubleWell::d2(heteroclinic(s).0)).collect();
    let r: Vec<f64> = z.iter().map(|&s| rhs_for(kind, s, omega)).collect();

    // Numerov on interior nodes 1..n-1.
    let m = n - 1;
    let a = dz * dz / 12.0;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for k in 0..m {
        let i = k + 1;
        lower[k] = 1.0 - a * q[i - 1];
        diag[k] = -2.0 * (1.0 + 5.0 * a * q[i]);
        upper[k] = 1.0 - a * q[i + 1];
        rhs[k] = a * (r[i + 1] + 10.0 * r[i] + r[i - 1]);
    }
    let interior = solve_tridiagonal(&lower, &diag, &upper, &rhs)
        .map_err(|(row, pivot)| Error::Singular { row, pivot })?;
    let mut values = vec![0.0; n + 1];
    values[1..n].copy_from_slice(&interior);

    let derivs = first_derivative_4th(&values, dz);
    let second: Vec<f64> = (0..=n).map(|i| q[i] * values[i] + r[i]).collect();

    let mut residual = 0.0f64;
    for i in 2..n - 1 {
        let d2 = (-values[i + 2] + 16.0 * values[i + 1] - 30.0 * values[i]
            + 16.0 * values[i - 1]
            - values[i - 2])
            / (12.0 * dz * dz);
        residual = residual.max((d2 - q[i] * values[i] - r[i]).abs());
    }

    let table = ProfileTable {
        kind,
        z,
        values,
        derivs,
        second,
        z_max,
        residual,
    };
    // Solutions decay like a polynomial times exp(-sqrt2 z); estimate the
    // truncation error from the half-way value.
    let half = table.value_at(0.5 * z_max).abs();
    let estimate = half * (-SQRT_2 * 0.5 * z_max).exp();
    if estimate > 1e-8 {
        return Err(Error::UnresolvedDecay { z_max, estimate });
    }
    Ok(table)
}

fn first_derivative_4th(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    for i in 0..n {
        if i >= 2 && i + 2 < n {
            d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
        } else {
            let start = if i < 2 { 0 } else { n - 6 };
            let xs: Vec<f64> = (start..start + 6).map(|k| k as f64 * h).collect();
            let w = fd_weights(i as f64 * h, &xs, 1);
            d[i] = (0..6).map(|k| w[1][k] * f[start + k]).sum();
        }
    }
    d
}

/// All auxiliary profiles on a common grid.
#[derive(Debug, Clone)]
pub struct ProfileSet {
    pub omega: ProfileTable,
    pub rho: ProfileTable,
    pub tau: ProfileTable,
    pub kappa: ProfileTable,
}

impl ProfileSet {
    pub fn solve(z_max: f64, resolution: usize) -> Result<Self> {
        let omega = solve_profile_bvp(ProfileKind::Omega, z_max, resolution, None)?;
        let rho = solve_profile_bvp(ProfileKind::Rho, z_max, resolution, Some(&omega))?;
        let tau = solve_profile_bvp(ProfileKind::Tau, z_max, resolution, None)?;
        let kappa = solve_profile_bvp(ProfileKind::Kappa, z_max, resolution, Some(&omega))?;
        Ok(ProfileSet {
            omega,
            rho,
            tau,
            kappa,
        })
    }

    /// Default tables: `z_max = 30`, 4096 cells.
    pub fn standard() -> Self {
        Self::solve(30.0, 4096).expect("standard profile grid is well posed")
    }
}

/// Quintic smoothstep and its first three derivatives.
fn smoothstep(t: f64) -> [f64; 4] {
    if t <= 0.0 {
        return [0.0; 4];
    }
    if t >= 1.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let t2 = t * t;
    [
        t2 * t * (10.0 - 15.0 * t + 6.0 * t2),
        30.0 * t2 * (1.0 - t) * (1.0 - t),
        60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
        60.0 * (1.0 - 6.0 * t + 6.0 * t2),
    ]
}

/// A profile blended to its tail value between `-l log eps` and `-2 l log eps`.
#[derive(Debug, Clone)]
pub struct CutoffProfile {
    pub base: ProfileTable,
    pub eps: f64,
    pub ell: f64,
    pub tail: f64,
    pub inner: f64,
    pub outer: f64,
    /// Measured sup norm of the cutoff defect.
    pub defect: f64,
}

impl CutoffProfile {
    /// Cutoff `chi` and its derivatives at stretched `z >= 0`.
    fn chi(&self, z: f64) -> [f64; 4] {
        let w = self.outer - self.inner;
        let s = smoothstep((z.abs() - self.inner) / w);
        let sign = if z < 0.0 { -1.0 } else { 1.0 };
        [1.0 - s[0], -sign * s[1] / w, -s[2] / (w * w), -sign * s[3] / (w * w * w)]
    }

    /// Value and first two derivatives at stretched `z` (use `z >= 0`).
    pub fn eval(&self, z: f64) -> [f64; 3] {
        let c = self.chi(z);
        let f = self.base.eval(z);
        let tail = if z < 0.0 { -self.tail } else { self.tail };
        let g = f[0] - tail;
        [
            tail + c[0] * g,
            c[1] * g + c[0] * f[1],
            c[2] * g + 2.0 * c[1] * f[1] + c[0] * f[2],
        ]
    }

    /// `eval` in unstretched distance: profile at `d / eps` with chain-rule derivatives.
    pub fn eval_scaled(&self, d: f64) -> [f64; 3] {
        let [v, d1, d2] = self.eval(d / self.eps);
        [v, d1 / self.eps, d2 / (self.eps * self.eps)]
    }
}

/// Cutoff of `profile` at interface width `eps` and exponent `ell`.
pub fn apply_cutoff(
    profile: &ProfileTable,
    eps: f64,
    ell: f64,
    omega: Option<&ProfileTable>,
) -> Result<CutoffProfile> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::CutoffBand { eps });
    }
    if ell <= 5.0 {
        return Err(Error::InvalidArgument(format!("ell = {ell} must exceed 5")));
    }
    let inner = -ell * eps.ln();
    let mut cut = CutoffProfile {
        base: profile.clone(),
        eps,
        ell,
        tail: profile.kind.tail(),
        inner,
        outer: 2.0 * inner,
        defect: 0.0,
    };
    cut.defect = measure_defect(&cut, omega);
    Ok(cut)
}

fn measure_defect(cut: &CutoffProfile, omega: Option<&ProfileTable>) -> f64 {
    let upper = cut.outer + 2.0;
    let n = 20_000;
    let mut worst = 0.0f64;
    for i in 0..=n {
        let z = upper * i as f64 / n as f64;
        let e = if cut.base.kind == ProfileKind::Heteroclinic {
            // (d^2/dz^2 - W''(hbar)) hbar'
            let c = cut.chi(z);
            let h = heteroclinic_jet(z);
            let g = h[0] - 1.0;
            let d1 = c[1] * g + c[0] * h[1];
            let d3 = c[3] * g + 3.0 * c[2] * h[1] + 3.0 * c[1] * h[2] + c[0] * h[3];
            let v = 1.0 + c[0] * g;
            d3 - DoubleWell::d2(v) * d1
        } else {
            let [v, _, d2] = cut.eval(z);
            let hbar = 1.0 + cut.chi(z)[0] * (heteroclinic(z).0 - 1.0);
            d2 - DoubleWell::d2(hbar) * v - rhs_for(cut.base.kind, z, omega)
        };
        worst = worst.max(e.abs());
    }
    worst
}

/// The energy and slope constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub sigma0: f64,
    pub sigma: f64,
    /// Quadrature of `int_0^inf (het')^2 dz`; equals `sigma0`.
    pub hprime_sq_integral: f64,
}

pub fn constants() -> Constants {
    let integral = adaptive_simpson(&|z: f64| heteroclinic(z).1.powi(2), 0.0, 60.0, 1e-15);
    Constants {
        sigma0: SQRT_2 / 3.0,
        sigma: 1.0 / SQRT_2,
        hprime_sq_integral: integral,
    }
}

/// `sigma0 = sqrt(2) / 3`.
pub const SIGMA0: f64 = 0.471_404_520_791_031_7;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_well_examples() {
        assert_eq!(double_well(0.0), (0.25, 0.0, -1.0));
        assert_eq!(double_well(1.0), (0.0, 0.0, 2.0));
        assert_eq!(double_well(-1.0), (0.0, 0.0, 2.0));
    }

    #[test]
    fn heteroclinic_examples() {
        let (v, d) = heteroclinic(0.0);
        assert_eq!(v, 0.0);
        assert!((d - 0.707_106_781_186_547_5).abs() < 1e-15);
        assert!((heteroclinic(SQRT_2).0 - 1f64.tanh()).abs() < 1e-15);
        let (a, da) = heteroclinic(1.3);
        let (b, db) = heteroclinic(-1.3);
        assert_eq!(a, -b);
        assert_eq!(da, db);
    }

    #[test]
    fn constants_match_closed_forms() {
        let c = constants();
        assert!((c.sigma0 - 2f64.sqrt() / 3.0).abs() < 1e-15);
        assert!((c.sigma - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((c.hprime_sq_integral - c.sigma0).abs() < 1e-12);
        assert!((SIGMA0 - c.sigma0).abs() < 1e-16);
    }

    #[test]
    fn omega_slope_at_origin_is_minus_two_thirds() {
        let omega = solve_profile_bvp(ProfileKind::Omega, 30.0, 4096, None).unwrap();
        assert_eq!(omega.values[0], 0.0);
        assert!(omega.residual < 1e-8, "{}", omega.residual);
        assert!((omega.derivs[0] + 2.0 / 3.0).abs() < 1e-9, "{}", omega.derivs[0]);
    }

    #[test]
    fn rho_requires_omega() {
        assert!(matches!(
            solve_profile_bvp(ProfileKind::Rho, 30.0, 1024, None),
            Err(Error::InvalidArgument(_))
        ));
        assert!(solve_profile_bvp(ProfileKind::Omega, 10.0, 1024, None).is_err());
        assert!(matches!(
            solve_profile_bvp(ProfileKind::Omega, 30.0, 4, None),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn cutoff_bands() {
        let het = ProfileTable::heteroclinic(30.0, 1024);
        let cut = apply_cutoff(&het, 0.1, 6.0, None).unwrap();
        assert!((cut.inner - 13.815_510_557_964_274).abs() < 1e-12);
        for z in [0.0, 5.0, 13.8] {
            assert_eq!(cut.eval(z)[0], heteroclinic(z).0);
        }
        for z in [27.7, 30.0, 50.0] {
            assert_eq!(cut.eval(z)[0], 1.0);
        }
        assert!(matches!(
            apply_cutoff(&het, 1.0, 6.0, None),
            Err(Error::CutoffBand { .. })
        ));
    }

    #[test]
    fn cutoff_defect_is_small() {
        let set = ProfileSet::standard();
        let cut = apply_cutoff(&set.omega, 0.05, 6.0, Some(&set.omega)).unwrap();
        assert!(cut.defect <= 1e-6, "{}", cut.defect);
        let het = ProfileTable::heteroclinic(30.0, 64);
        let hc = apply_cutoff(&het, 0.05, 6.0, None).unwrap();
        assert!(hc.defect <= 1e-6, "{}", hc.defect);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let het = ProfileTable::heteroclinic(30.0, 8);
        let csv = het.to_csv();
        assert!(csv.starts_with("z,value\n"));
        assert_eq!(csv.lines().count(), 10);
    }
}
