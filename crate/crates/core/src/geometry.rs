//! Model manifolds and hypersurfaces.
//!
//! Two ambient models are supported:
//!
//! * a flat circle of circumference `2 pi`, where a hypersurface is a pair of
//!   points;
//! * the warped product `dx^2 + h(x)^2 dy^2` with `h = a + b cos x`, `y`
//!   periodic of period `2 pi`, restricted to a strip `x_lo <= x <= x_hi`
//!   whose ends sit at critical points of `h`. Fields satisfy a Neumann
//!   condition there, so the strip is a fundamental domain of the reflection
//!   `x -> -x` and every solution lifts to a closed torus.
//!
//! Hypersurfaces in the strip are graphs `x = c + s f(y)` over the geodesic
//! circle `{x = c}`, where `s = +1` when the unit normal points in `+x`.
//! Moving along the normal of `{x = c}` is translation in `x` since the
//! `x`-lines are unit-speed geodesics.
//!
//! Mean curvature uses the area convention `dA/dt = -int H <X, nu>`, so the
//! geodesic circle `{x = c}` with `nu = +x` has `H = -h'(c) / h(c)`.

use crate::error::{Error, Result};
use crate::numerics::{fmt17, periodic_derivatives, periodic_second_derivative_matrix, trig_interpolate};
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Two,
}

/// The metric `dx^2 + h(x)^2 dy^2`, `h = a + b cos x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpedMetric {
    pub a: f64,
    pub b: f64,
    pub dim: Dim,
}

impl WarpedMetric {
    pub fn h(&self, x: f64) -> f64 {
        match self.dim {
            Dim::One => 1.0,
            Dim::Two => self.a + self.b * x.cos(),
        }
    }
    pub fn dh(&self, x: f64) -> f64 {
        match self.dim {
            Dim::One => 0.0,
            Dim::Two => -self.b * x.sin(),
        }
    }
    pub fn d2h(&self, x: f64) -> f64 {
        match self.dim {
            Dim::One => 0.0,
            Dim::Two => -self.b * x.cos(),
        }
    }
    /// Gaussian curvature `K = -h'' / h`.
    pub fn gauss_curvature(&self, x: f64) -> f64 {
        -self.d2h(x) / self.h(x)
    }
    /// Antiderivative of `h`, used for exact areas between graphs.
    pub fn h_primitive(&self, x: f64) -> f64 {
        match self.dim {
            Dim::One => x,
            Dim::Two => self.a * x + self.b * x.sin(),
        }
    }
    /// Transverse period: `2 pi` for the torus, unit weight for the 1-D circle.
    pub fn y_period(&self) -> f64 {
        match self.dim {
            Dim::One => 1.0,
            Dim::Two => 2.0 * PI,
        }
    }
}

/// The warped torus with `h = a + b cos x`.
pub fn make_warped_torus(a: f64, b: f64) -> Result<WarpedMetric> {
    if !(a > b && b >= 0.0) {
        return Err(Error::DegenerateWarp { a, b });
    }
    Ok(WarpedMetric { a, b, dim: Dim::Two })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmbientKind {
    /// Periodic in `x` (1-D circle).
    Circle,
    /// Neumann walls at both ends.
    NeumannStrip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ambient {
    pub metric: WarpedMetric,
    pub x_lo: f64,
    pub x_hi: f64,
    pub kind: AmbientKind,
}

impl Ambient {
    /// Flat circle of circumference `2 pi`.
    pub fn flat_circle() -> Self {
        Ambient {
            metric: WarpedMetric {
                a: 1.0,
                b: 0.0,
                dim: Dim::One,
            },
            x_lo: 0.0,
            x_hi: 2.0 * PI,
            kind: AmbientKind::Circle,
        }
    }

    /// Neumann strip `[x_lo, x_hi] x S^1`; both ends must be critical points of `h`.
    pub fn strip(metric: WarpedMetric, x_lo: f64, x_hi: f64) -> Result<Self> {
        if metric.dim != Dim::Two || !(x_lo < x_hi) {
            return Err(Error::InvalidArgument("strip needs a 2-D metric and x_lo < x_hi".into()));
        }
        for x in [x_lo, x_hi] {
            if metric.dh(x).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "strip end x = {x} is not a critical point of h"
                )));
            }
        }
        Ok(Ambient {
            metric,
            x_lo,
            x_hi,
            kind: AmbientKind::NeumannStrip,
        })
    }

    /// Strip `[-pi, pi]` centred on the circle of maximal `h`.
    pub fn centred_strip(metric: WarpedMetric) -> Self {
        Self::strip(metric, -PI, PI).expect("x = +-pi are critical points of a + b cos x")
    }

    /// Strip `[0, 2 pi]` centred on the circle of minimal `h`.
    pub fn shifted_strip(metric: WarpedMetric) -> Self {
        Self::strip(metric, 0.0, 2.0 * PI).expect("x = 0, 2 pi are critical points of a + b cos x")
    }

    pub fn volume(&self) -> f64 {
        let m = &self.metric;
        (m.h_primitive(self.x_hi) - m.h_primitive(self.x_lo)) * m.y_period()
    }
}

/// A separating hypersurface: a normal graph over `{x = base}` in a strip,
/// or a pair of points on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypersurface {
    pub ambient: Ambient,
    pub base: f64,
    /// Graph samples on the uniform `y` grid (one sample for `y`-invariant graphs).
    pub graph: Vec<f64>,
    /// `+1` when the unit normal points toward `+x`.
    pub orientation: f64,
    /// Second point on the circle (1-D only).
    pub partner: Option<f64>,
}

impl Hypersurface {
    pub fn ny(&self) -> usize {
        self.graph.len()
    }

    pub fn dim(&self) -> Dim {
        self.ambient.metric.dim
    }

    pub fn y_grid(&self) -> Vec<f64> {
        let p = self.ambient.metric.y_period();
        let n = self.ny();
        (0..n).map(|j| p * j as f64 / n as f64).collect()
    }

    /// `x` position of the graph at each `y` sample.
    pub fn positions(&self) -> Vec<f64> {
        self.graph
            .iter()
            .map(|f| self.base + self.orientation * f)
            .collect()
    }

    pub fn sup_offset(&self) -> f64 {
        self.graph.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Height of the Fermi chart around the base circle.
    pub fn chart_height(&self) -> f64 {
        match self.ambient.kind {
            AmbientKind::Circle => FRAC_PI_2,
            AmbientKind::NeumannStrip => {
                let wall = (self.base - self.ambient.x_lo).min(self.ambient.x_hi - self.base);
                FRAC_PI_2.min(0.9 * wall)
            }
        }
    }

    /// Same hypersurface with the normal flipped; the graph is unchanged as a set.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        out.orientation = -self.orientation;
        out.graph.iter_mut().for_each(|v| *v = -*v);
        out
    }

    /// Replace graph samples, keeping base and orientation.
    pub fn with_graph(&self, graph: Vec<f64>) -> Result<Self> {
        let out = Hypersurface {
            graph,
            ..self.clone()
        };
        out.check_chart()?;
        Ok(out)
    }

    fn check_chart(&self) -> Result<()> {
        let sup = self.sup_offset();
        let limit = self.chart_height();
        if sup >= limit {
            return Err(Error::OutsideChart { sup, limit });
        }
        Ok(())
    }

    /// Spectrally interpolated curve points `(x, y)`.
    pub fn dense_curve(&self, n: usize) -> Vec<(f64, f64)> {
        let p = self.ambient.metric.y_period();
        let ys: Vec<f64> = (0..n).map(|j| p * j as f64 / n as f64).collect();
        let xs = trig_interpolate(&self.positions(), p, &ys);
        xs.into_iter().zip(ys).collect()
    }

    /// CSV with a metadata header and `(y, f(y))` rows.
    pub fn to_csv(&self) -> String {
        let m = &self.ambient.metric;
        let mut out = format!(
            "# a={},b={},c={},orientation={}\ny,f\n",
            fmt17(m.a),
            fmt17(m.b),
            fmt17(self.base),
            fmt17(self.orientation)
        );
        for (y, f) in self.y_grid().iter().zip(&self.graph) {
            out.push_str(&format!("{},{}\n", fmt17(*y), fmt17(*f)));
        }
        out
    }
}

/// The geodesic circle `{x = c}` in a strip, sampled at `ny` points.
pub fn geodesic_circle(ambient: Ambient, c: f64, ny: usize) -> Result<Hypersurface> {
    if ambient.metric.dim != Dim::Two {
        return Err(Error::InvalidArgument("geodesic circles live in the 2-D strip".into()));
    }
    if !(ambient.x_lo < c && c < ambient.x_hi) || ny == 0 {
        return Err(Error::InvalidArgument(format!("circle x = {c} is outside the strip")));
    }
    Ok(Hypersurface {
        ambient,
        base: c,
        graph: vec![0.0; ny],
        orientation: 1.0,
        partner: None,
    })
}

/// Pair of points `{p, q}` on the flat circle; `M+` is the arc `(p, q)`.
pub fn point_pair(p: f64, q: f64) -> Result<Hypersurface> {
    if !(0.0 <= p && p < q && q < p + 2.0 * PI) {
        return Err(Error::InvalidArgument("need 0 <= p < q < p + 2 pi".into()));
    }
    Ok(Hypersurface {
        ambient: Ambient::flat_circle(),
        base: p,
        graph: vec![0.0],
        orientation: 1.0,
        partner: Some(q),
    })
}

/// Normal graph of `f` over `base`. `f` of length 1 is broadcast.
pub fn normal_graph(base: &Hypersurface, f: &[f64]) -> Result<Hypersurface> {
    if base.dim() != Dim::Two {
        return Err(Error::Unsupported("normal graphs over point pairs".into()));
    }
    let n = base.ny().max(f.len());
    let pick = |v: &[f64], j: usize| if v.len() == 1 { v[0] } else { v[j] };
    if (base.ny() != 1 && base.ny() != n) || (f.len() != 1 && f.len() != n) {
        return Err(Error::InvalidArgument("graph sample counts differ".into()));
    }
    let graph = (0..n).map(|j| pick(&base.graph, j) + pick(f, j)).collect();
    base.with_graph(graph)
}

/// Local curvature data along a hypersurface.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub mean_curvature: Vec<f64>,
    pub second_fundamental_sq: Vec<f64>,
    pub ricci_normal: Vec<f64>,
    pub area: f64,
    pub orientation: f64,
}

/// Area of the curve `x = phi(y)`.
pub fn graph_area(metric: &WarpedMetric, positions: &[f64]) -> f64 {
    let n = positions.len();
    let period = metric.y_period();
    let (d1, _) = periodic_derivatives(positions, period);
    let dy = period / n as f64;
    positions
        .iter()
        .zip(&d1)
        .map(|(&x, &p)| (p * p + metric.h(x).powi(2)).sqrt() * dy)
        .sum()
}

pub fn curvature_data(sigma: &Hypersurface) -> CurvatureData {
    let m = sigma.ambient.metric;
    if m.dim == Dim::One {
        let n = if sigma.partner.is_some() { 2 } else { 1 };
        return CurvatureData {
            mean_curvature: vec![0.0; n],
            second_fundamental_sq: vec![0.0; n],
            ricci_normal: vec![0.0; n],
            area: n as f64,
            orientation: sigma.orientation,
        };
    }
    let x = sigma.positions();
    let (d1, d2) = periodic_derivatives(&x, m.y_period());
    let mut hm = Vec::with_capacity(x.len());
    let mut ric = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let h = m.h(x[j]);
        let hp = m.dh(x[j]);
        let q = d1[j] * d1[j] + h * h;
        let area_h = -hp / q.sqrt() + (h * d2[j] - hp * d1[j] * d1[j]) / q.powf(1.5);
        hm.push(sigma.orientation * area_h);
        ric.push(m.gauss_curvature(x[j]));
    }
    CurvatureData {
        second_fundamental_sq: hm.iter().map(|v| v * v).collect(),
        mean_curvature: hm,
        ricci_normal: ric,
        area: graph_area(&m, &x),
        orientation: sigma.orientation,
    }
}

/// Fermi chart around a geodesic circle.
#[derive(Debug, Clone)]
pub struct FermiChart {
    pub base: Hypersurface,
    pub height: f64,
}

impl FermiChart {
    pub fn new(base: &Hypersurface) -> Self {
        FermiChart {
            height: base.chart_height(),
            base: base.clone(),
        }
    }
    /// `(s, z) -> (x, y)` with `s` the `y` coordinate and `z` signed distance along the normal.
    pub fn forward(&self, s: f64, z: f64) -> (f64, f64) {
        (self.base.base + self.base.orientation * z, s)
    }
    pub fn inverse(&self, x: f64, y: f64) -> (f64, f64) {
        let p = self.base.ambient.metric.y_period();
        (y.rem_euclid(p), self.base.orientation * (x - self.base.base))
    }
    pub fn contains(&self, x: f64) -> bool {
        (x - self.base.base).abs() < self.height
    }
}

/// Low spectrum of the stability operator on a minimal geodesic circle.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    /// Eigenfunction samples on `y` (uniform grid of `n_points`).
    pub eigenfunctions: Vec<Vec<f64>>,
    pub index: usize,
    pub nullity: usize,
    pub period: f64,
    /// Surface measure weight `h(c) dy` per sample.
    pub weight: f64,
}

impl SpectralData {
    /// Mode `k` resampled on `n` uniform points.
    pub fn sample(&self, k: usize, n: usize) -> Vec<f64> {
        let ys: Vec<f64> = (0..n).map(|j| self.period * j as f64 / n as f64).collect();
        trig_interpolate(&self.eigenfunctions[k], self.period, &ys)
    }
}

const NULL_TOL: f64 = 1e-8;

/// Lowest `m` eigenpairs of `f -> -Lap f - (Ric + |A|^2) f` on a minimal
/// geodesic circle, discretised spectrally on `n_points` samples.
pub fn jacobi_spectrum(sigma: &Hypersurface, m: usize, n_points: usize) -> Result<SpectralData> {
    if sigma.dim() != Dim::Two {
        return Err(Error::Unsupported("stability spectrum of point pairs".into()));
    }
    if m == 0 || n_points < 4 || n_points % 2 != 0 || m > n_points {
        return Err(Error::InvalidArgument("need 1 <= m <= n_points, n_points even".into()));
    }
    if sigma.graph.iter().any(|v| *v != sigma.graph[0]) {
        return Err(Error::Unsupported("stability spectrum off geodesic circles".into()));
    }
    let metric = sigma.ambient.metric;
    let c = sigma.positions()[0];
    let hmean = metric.dh(c) / metric.h(c);
    if hmean.abs() > 1e-10 {
        return Err(Error::NotMinimal {
            mean_curvature: hmean.abs(),
        });
    }
    let h = metric.h(c);
    let potential = metric.gauss_curvature(c); // Ric + |A|^2 with A = 0
    let period = metric.y_period();
    let d2 = periodic_second_derivative_matrix(n_points, period);
    let a = DMatrix::from_fn(n_points, n_points, |i, j| {
        -d2[i][j] / (h * h) - if i == j { potential } else { 0.0 }
    });
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n_points).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let weight = h * period / n_points as f64;
    let all: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut funcs: Vec<Vec<f64>> = order
        .iter()
        .take(m + 1)
        .map(|&i| {
            let col = eig.eigenvectors.column(i);
            let norm = (col.iter().map(|v| v * v).sum::<f64>() * weight).sqrt();
            col.iter().map(|v| v / norm).collect()
        })
        .collect();
    canonicalize_modes(&all, &mut funcs);
    funcs.truncate(m);
    Ok(SpectralData {
        eigenvalues: all[..m].to_vec(),
        eigenfunctions: funcs,
        index: all.iter().filter(|v| **v < -NULL_TOL).count(),
        nullity: all.iter().filter(|v| v.abs() <= NULL_TOL).count(),
        period,
        weight,
    })
}

/// Rotate degenerate pairs into (cos-like, sin-like) form and fix signs so
/// results do not depend on the eigensolver's arbitrary choices.
fn canonicalize_modes(values: &[f64], funcs: &mut [Vec<f64>]) {
    let mut k = 0;
    while k < funcs.len() {
        let pair = k + 1 < funcs.len() && (values[k] - values[k + 1]).abs() < 1e-9;
        if pair {
            let (f1, f2) = (funcs[k].clone(), funcs[k + 1].clone());
            let th = f2[0].atan2(f1[0]);
            let (s, c) = th.sin_cos();
            let mut g1: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| c * a + s * b).collect();
            let mut g2: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| -s * a + c * b).collect();
            if g1[0] < 0.0 {
                g1.iter_mut().for_each(|v| *v = -*v);
            }
            if g2[1] < 0.0 {
                g2.iter_mut().for_each(|v| *v = -*v);
            }
            funcs[k] = g1;
            funcs[k + 1] = g2;
            k += 2;
        } else {
            let s: f64 = funcs[k].iter().sum::<f64>() + 1e-3 * funcs[k][0];
            if s < 0.0 {
                funcs[k].iter_mut().for_each(|v| *v = -*v);
            }
            k += 1;
        }
    }
}

/// The graph of `r (v_1 u_1 + ... + v_k u_k)` over `sigma`.
pub fn canonical_family(
    sigma: &Hypersurface,
    spectrum: &SpectralData,
    r: f64,
    v: &[f64],
) -> Result<Hypersurface> {
    if v.len() > spectrum.eigenfunctions.len() {
        return Err(Error::InvalidArgument("more parameters than eigenfunctions".into()));
    }
    let n = sigma.ny();
    let mut f = vec![0.0; n];
    for (k, &vk) in v.iter().enumerate() {
        if vk == 0.0 {
            continue;
        }
        let mode = spectrum.sample(k, n);
        for j in 0..n {
            f[j] += r * vk * mode[j];
        }
    }
    normal_graph(sigma, &f)
}

/// Approximate ambient distance between nearby points.
pub fn ambient_distance(metric: &WarpedMetric, p: (f64, f64), q: (f64, f64)) -> f64 {
    let period = metric.y_period();
    let mut dy = (p.1 - q.1).rem_euclid(period);
    if dy > 0.5 * period {
        dy = period - dy;
    }
    let h = metric.h(0.5 * (p.0 + q.0));
    ((p.0 - q.0).powi(2) + (h * dy).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn testbed() -> (WarpedMetric, Ambient) {
        let m = make_warped_torus(2.0, 0.3).unwrap();
        (m, Ambient::centred_strip(m))
    }

    #[test]
    fn warped_torus_examples() {
        let m = make_warped_torus(2.0, 0.3).unwrap();
        assert!((m.h(0.0) - 2.3).abs() < 1e-15);
        assert!((m.gauss_curvature(0.0) - 0.3 / 2.3).abs() < 1e-15);
        let flat = make_warped_torus(2.0, 0.0).unwrap();
        assert_eq!(flat.gauss_curvature(1.1), 0.0);
        assert!(matches!(make_warped_torus(1.0, 1.0), Err(Error::DegenerateWarp { .. })));
    }

    #[test]
    fn geodesic_circle_curvature() {
        let (m, amb) = testbed();
        let s0 = geodesic_circle(amb, 0.0, 16).unwrap();
        let cd = curvature_data(&s0);
        assert!(cd.mean_curvature.iter().all(|h| h.abs() < 1e-14));
        assert!((cd.area - 2.0 * PI * 2.3).abs() < 1e-12);
        assert!(cd.ricci_normal.iter().all(|r| (r - 0.3 / 2.3).abs() < 1e-14));
        let shifted = Ambient::shifted_strip(m);
        let sp = geodesic_circle(shifted, PI, 8).unwrap();
        assert!((curvature_data(&sp).area - 2.0 * PI * 1.7).abs() < 1e-12);
        let s2 = geodesic_circle(amb, FRAC_PI_2, 8).unwrap();
        assert!((curvature_data(&s2).mean_curvature[0].abs() - 0.15).abs() < 1e-14);
    }

    #[test]
    fn normal_graph_examples() {
        let (m, amb) = testbed();
        let s0 = geodesic_circle(amb, 0.0, 64).unwrap();
        assert_eq!(normal_graph(&s0, &[0.0]).unwrap().positions(), s0.positions());
        let shifted = normal_graph(&s0, &[0.25]).unwrap();
        assert!(shifted.positions().iter().all(|x| (x - 0.25).abs() < 1e-15));
        let ys = s0.y_grid();
        let f: Vec<f64> = ys.iter().map(|y| 0.1 * y.cos()).collect();
        let g = normal_graph(&s0, &f).unwrap();
        let oracle = crate::numerics::adaptive_simpson(
            &|y: f64| (m.h(0.1 * y.cos()).powi(2) + 0.01 * y.sin().powi(2)).sqrt(),
            0.0,
            2.0 * PI,
            1e-13,
        );
        assert!((curvature_data(&g).area - oracle).abs() < 1e-10);
        assert!(matches!(normal_graph(&s0, &[2.0]), Err(Error::OutsideChart { .. })));
    }

    #[test]
    fn mean_curvature_matches_area_variation() {
        let (m, amb) = testbed();
        let s0 = geodesic_circle(amb, 0.0, 64).unwrap();
        let ys = s0.y_grid();
        let f: Vec<f64> = ys.iter().map(|y| 0.05 * y.cos()).collect();
        let g = normal_graph(&s0, &f).unwrap();
        let cd = curvature_data(&g);
        // direction psi(y) moving the graph in x; normal speed psi h / sqrt(Q)
        let psi: Vec<f64> = ys.iter().map(|y| 1.0 + 0.5 * (2.0 * y).sin()).collect();
        let x = g.positions();
        let t = 1e-5;
        let plus: Vec<f64> = x.iter().zip(&psi).map(|(a, b)| a + t * b).collect();
        let minus: Vec<f64> = x.iter().zip(&psi).map(|(a, b)| a - t * b).collect();
        let fd = (graph_area(&m, &plus) - graph_area(&m, &minus)) / (2.0 * t);
        let dy = 2.0 * PI / 64.0;
        let analytic: f64 = -(0..64)
            .map(|j| cd.mean_curvature[j] * psi[j] * m.h(x[j]) * dy)
            .sum::<f64>();
        assert!((fd - analytic).abs() < 1e-6, "{fd} vs {analytic}");
    }

    #[test]
    fn orientation_flip() {
        let (_, amb) = testbed();
        let s = geodesic_circle(amb, 0.7, 8).unwrap();
        let a = curvature_data(&s);
        let b = curvature_data(&s.flipped());
        for j in 0..8 {
            assert!((a.mean_curvature[j] + b.mean_curvature[j]).abs() < 1e-15);
            assert_eq!(a.second_fundamental_sq[j], b.second_fundamental_sq[j]);
        }
        assert_eq!(a.area, b.area);
        assert_eq!(s.positions(), s.flipped().positions());
    }

    #[test]
    fn fermi_round_trip() {
        let (_, amb) = testbed();
        let s0 = geodesic_circle(amb, 0.0, 8).unwrap();
        let chart = FermiChart::new(&s0);
        for (s, z) in [(0.3, 0.2), (5.0, -1.2), (2.0, 0.0)] {
            let (x, y) = chart.forward(s, z);
            let (s2, z2) = chart.inverse(x, y);
            assert!((s - s2).abs() < 1e-10 && (z - z2).abs() < 1e-10);
        }
        assert_eq!(chart.forward(1.0, 0.0), (0.0, 1.0));
    }

    #[test]
    fn jacobi_examples() {
        let (m, amb) = testbed();
        let s0 = geodesic_circle(amb, 0.0, 16).unwrap();
        let sp = jacobi_spectrum(&s0, 4, 64).unwrap();
        let k = 0.3 / 2.3;
        assert!((sp.eigenvalues[0] + k).abs() < 1e-10);
        assert!((sp.eigenvalues[1] - (1.0 / 2.3f64.powi(2) - k)).abs() < 1e-10);
        assert!((sp.eigenvalues[2] - sp.eigenvalues[1]).abs() < 1e-10);
        assert_eq!((sp.index, sp.nullity), (1, 0));
        let u0 = sp.sample(0, 5);
        assert!(u0.iter().all(|v| (v - 1.0 / (2.0 * PI * 2.3f64).sqrt()).abs() < 1e-10));

        let sp_pi = jacobi_spectrum(&geodesic_circle(Ambient::shifted_strip(m), PI, 8).unwrap(), 2, 32).unwrap();
        assert!((sp_pi.eigenvalues[0] - 0.3 / 1.7).abs() < 1e-10);
        assert_eq!(sp_pi.index, 0);

        let flat = Ambient::centred_strip(make_warped_torus(2.0, 0.0).unwrap());
        let sf = jacobi_spectrum(&geodesic_circle(flat, 0.0, 8).unwrap(), 2, 32).unwrap();
        assert!(sf.eigenvalues[0].abs() < 1e-10);
        assert!(sf.nullity >= 1);

        let s_half = geodesic_circle(amb, FRAC_PI_2, 8).unwrap();
        assert!(matches!(jacobi_spectrum(&s_half, 2, 32), Err(Error::NotMinimal { .. })));
    }

    #[test]
    fn canonical_family_examples() {
        let (m, amb) = testbed();
        let s0 = geodesic_circle(amb, 0.0, 32).unwrap();
        let sp = jacobi_spectrum(&s0, 1, 32).unwrap();
        assert_eq!(canonical_family(&s0, &sp, 0.2, &[0.0]).unwrap(), s0);
        let up = canonical_family(&s0, &sp, 0.2, &[1.0]).unwrap();
        let expected = 0.2 / (2.0 * PI * 2.3f64).sqrt();
        assert!(up.graph.iter().all(|v| (v - expected).abs() < 1e-12));
        let a0 = curvature_data(&s0).area;
        for i in 0..=20 {
            let v = -1.0 + 0.1 * i as f64;
            let sv = canonical_family(&s0, &sp, 0.2, &[v]).unwrap();
            assert!(graph_area(&m, &sv.positions()) <= a0 + 1e-12);
        }
    }

    #[test]
    fn hypersurface_csv_header() {
        let (_, amb) = testbed();
        let s0 = geodesic_circle(amb, 0.0, 4).unwrap();
        let csv = s0.to_csv();
        assert!(csv.starts_with("# a=2.0000000000000000e0,b=2.9999999999999999e-1"));
        assert_eq!(csv.lines().count(), 6);
    }
}
