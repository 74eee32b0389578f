//! Discretisation and solvers for `eps^2 Lap u = W'(u)`.
//!
//! Regions are unions of columns `{lower(y) <= x <= upper(y)}` on the uniform
//! periodic `y` grid. Each column carries `nx` nodes, clustered toward the
//! Dirichlet ends so the interface layer is resolved while the mask stays
//! exactly on the boundary curve. The operator is assembled as isoparametric
//! bilinear finite elements for the metric `dx^2 + h(x)^2 dy^2` with a lumped
//! mass, which on uniform grids is the classical five-point stencil.
//!
//! With stiffness `K` and lumped mass `m` the discrete energy is
//! `E(u) = eps/2 u.K u + sum_i m_i W(u_i) / eps`, so the Euler–Lagrange
//! residual is `eps K u + m W'(u) / eps`; nodal residuals are reported as
//! `(eps^2 K u + m W'(u)) / m`, the strong form.

use crate::error::{Error, Result};
use crate::geometry::{Dim, WarpedMetric};
use crate::linalg::{BandLu, SymBand};
use crate::numerics::fd_derivative;
use crate::profiles1d::DoubleWell;
use std::f64::consts::SQRT_2;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bc {
    Dirichlet,
    Neumann,
}

/// One end of every column: its `x` position per column (or a single value
/// broadcast to all columns) and the boundary condition there.
#[derive(Debug, Clone, PartialEq)]
pub struct Side {
    pub position: Vec<f64>,
    pub bc: Bc,
}

impl Side {
    pub fn wall(x: f64, bc: Bc) -> Self {
        Side {
            position: vec![x],
            bc,
        }
    }
    pub fn graph(positions: Vec<f64>, bc: Bc) -> Self {
        Side { position: positions, bc }
    }
    fn at(&self, j: usize) -> f64 {
        if self.position.len() == 1 {
            self.position[0]
        } else {
            self.position[j]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lower: Side,
    pub upper: Side,
}

/// Grid size and optional clustering toward Dirichlet ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    /// Nodes per column, including both ends.
    pub nx: usize,
    /// Number of periodic columns (1 for `y`-invariant problems).
    pub ny: usize,
    /// Cluster nodes within a few multiples of this length of each Dirichlet end.
    pub layer: Option<f64>,
}

impl Resolution {
    pub fn uniform(nx: usize, ny: usize) -> Self {
        Resolution { nx, ny, layer: None }
    }
    pub fn graded(nx: usize, ny: usize, eps: f64) -> Self {
        Resolution {
            nx,
            ny,
            layer: Some(eps),
        }
    }
}

/// Fraction of nodes spread uniformly; the rest follow the boundary layer.
const UNIFORM_SHARE: f64 = 0.3;
/// Decay length of the clustering density in units of the layer length.
const LAYER_SCALE: f64 = 8.0;

/// Nodes per `eps` next to a graded Dirichlet end of a column with `nx`
/// nodes (independent of `eps` and of the column length).
pub fn layer_nodes_per_eps(nx: usize) -> f64 {
    nx.saturating_sub(1) as f64 * (1.0 - UNIFORM_SHARE) / LAYER_SCALE
}

/// Column map `t in [0,1] -> s in [0,1]` whose node density is a uniform part
/// plus exponential concentrations at the flagged ends. Independent of the
/// number of nodes, so grids nest under refinement.
#[derive(Debug, Clone, Copy)]
struct ColumnMap {
    k: f64,
    lo: bool,
    hi: bool,
}

impl ColumnMap {
    fn cumulative(&self, s: f64) -> f64 {
        let ends = self.lo as u8 + self.hi as u8;
        if ends == 0 || self.k <= 0.0 {
            return s;
        }
        let norm = 1.0 - (-self.k).exp();
        let mut layer = 0.0;
        if self.lo {
            layer += (1.0 - (-self.k * s).exp()) / norm;
        }
        if self.hi {
            layer += ((-self.k * (1.0 - s)).exp() - (-self.k).exp()) / norm;
        }
        UNIFORM_SHARE * s + (1.0 - UNIFORM_SHARE) * layer / ends as f64
    }

    fn invert(&self, t: f64) -> f64 {
        let (mut a, mut b) = (0.0, 1.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.cumulative(m) < t {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-16 {
                break;
            }
        }
        0.5 * (a + b)
    }
}

/// Grid, operators and boundary mask for one region.
#[derive(Debug, Clone)]
pub struct DiscreteDomain {
    pub metric: WarpedMetric,
    pub nx: usize,
    pub ny: usize,
    pub period: f64,
    /// Node `x` coordinates, index `i * ny + j`.
    pub x: Vec<f64>,
    pub lower_bc: Bc,
    pub upper_bc: Bc,
    /// Column index of an interior interface (glued full-manifold grids).
    pub interface: Option<usize>,
    /// Stiffness `int <grad phi_a, grad phi_b> dV`.
    pub stiffness: SymBand,
    /// Lumped mass `int phi_a dV`.
    pub mass: Vec<f64>,
    pub dirichlet: Vec<bool>,
    pub free: Vec<usize>,
}

impl DiscreteDomain {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn y(&self, j: usize) -> f64 {
        self.period * j as f64 / self.ny as f64
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nx).map(|i| self.x[self.index(i, j)]).collect()
    }

    pub fn volume(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Largest spacing among cells touching a Dirichlet end within `reach` of it.
    pub fn layer_spacing(&self, reach: f64) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.ny {
            let col = self.column(j);
            let (lo, hi) = (col[0], col[self.nx - 1]);
            for i in 0..self.nx - 1 {
                let d = col[i + 1] - col[i];
                let near_lo = self.lower_bc == Bc::Dirichlet && col[i] - lo <= reach;
                let near_hi = self.upper_bc == Bc::Dirichlet && hi - col[i + 1] <= reach;
                if near_lo || near_hi {
                    worst = worst.max(d);
                }
            }
        }
        worst
    }
}

/// Build the grid and operators for `region`.
pub fn discretize(metric: &WarpedMetric, region: &Region, res: &Resolution) -> Result<DiscreteDomain> {
    let Resolution { nx, ny, layer } = *res;
    if nx < 3 || ny == 0 {
        return Err(Error::InvalidArgument("need nx >= 3 and ny >= 1".into()));
    }
    if metric.dim == Dim::One && ny != 1 {
        return Err(Error::InvalidArgument("1-D regions have a single column".into()));
    }
    for side in [&region.lower, &region.upper] {
        if side.position.len() != 1 && side.position.len() != ny {
            return Err(Error::InvalidArgument("side samples must match ny".into()));
        }
    }
    let mut x = vec![0.0; nx * ny];
    for j in 0..ny {
        let (a, b) = (region.lower.at(j), region.upper.at(j));
        if !(b > a) {
            return Err(Error::InvalidArgument(format!("empty column {j}: [{a}, {b}]")));
        }
        let map = ColumnMap {
            k: layer.map_or(0.0, |e| (b - a) / (LAYER_SCALE * e)),
            lo: region.lower.bc == Bc::Dirichlet,
            hi: region.upper.bc == Bc::Dirichlet,
        };
        for i in 0..nx {
            let s = if i == 0 {
                0.0
            } else if i == nx - 1 {
                1.0
            } else {
                map.invert(i as f64 / (nx - 1) as f64)
            };
            x[i * ny + j] = a + (b - a) * s;
        }
    }
    Ok(assemble(*metric, nx, ny, x, region.lower.bc, region.upper.bc, None))
}

/// Grid of the whole strip `[x_lo, x_hi]` split at the graph, clustered on
/// both sides of it; Neumann at both walls.
pub fn discretize_glued(
    metric: &WarpedMetric,
    x_lo: f64,
    graph: &[f64],
    x_hi: f64,
    res: &Resolution,
) -> Result<DiscreteDomain> {
    let ny = res.ny;
    let lower = discretize(
        metric,
        &Region {
            lower: Side::wall(x_lo, Bc::Neumann),
            upper: Side::graph(graph.to_vec(), Bc::Dirichlet),
        },
        res,
    )?;
    let upper = discretize(
        metric,
        &Region {
            lower: Side::graph(graph.to_vec(), Bc::Dirichlet),
            upper: Side::wall(x_hi, Bc::Neumann),
        },
        res,
    )?;
    let nx = 2 * res.nx - 1;
    let mut x = lower.x.clone();
    x.extend_from_slice(&upper.x[ny..]);
    Ok(assemble(*metric, nx, ny, x, Bc::Neumann, Bc::Neumann, Some(res.nx - 1)))
}

const GAUSS: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

fn assemble(
    metric: WarpedMetric,
    nx: usize,
    ny: usize,
    x: Vec<f64>,
    lower_bc: Bc,
    upper_bc: Bc,
    interface: Option<usize>,
) -> DiscreteDomain {
    let period = metric.y_period();
    let n = nx * ny;
    let bw = if ny == 1 { 1 } else { 2 * ny - 1 };
    let mut k = SymBand::zeros(n, bw);
    let mut mass = vec![0.0; n];
    if ny == 1 {
        for i in 0..nx - 1 {
            let (x0, x1) = (x[i], x[i + 1]);
            let half = 0.5 * (x1 - x0);
            let mid = 0.5 * (x0 + x1);
            let mut hint = 0.0;
            let mut m0 = 0.0;
            let mut m1 = 0.0;
            for g in GAUSS {
                let xg = mid + half * g;
                let w = metric.h(xg) * half * period;
                hint += w;
                m0 += w * 0.5 * (1.0 - g);
                m1 += w * 0.5 * (1.0 + g);
            }
            let l = x1 - x0;
            let kk = hint / (l * l);
            k.add(i, i, kk);
            k.add(i + 1, i + 1, kk);
            k.add(i + 1, i, -kk);
            mass[i] += m0;
            mass[i + 1] += m1;
        }
    } else {
        let dy = period / ny as f64;
        for i in 0..nx - 1 {
            for j in 0..ny {
                let jn = (j + 1) % ny;
                // local nodes: (xi, eta) = (-1,-1), (1,-1), (1,1), (-1,1)
                let ids = [i * ny + j, (i + 1) * ny + j, (i + 1) * ny + jn, i * ny + jn];
                let xs = [x[ids[0]], x[ids[1]], x[ids[2]], x[ids[3]]];
                let sx = [-1.0, 1.0, 1.0, -1.0];
                let se = [-1.0, -1.0, 1.0, 1.0];
                let mut ke = [[0.0; 4]; 4];
                let mut me = [0.0; 4];
                // Mass by Gauss quadrature; stiffness by vertex quadrature so that
                // it matches the lumped mass of the reaction term (with 2x2 Gauss
                // the x-stiffness of y-oscillating modes is scaled by the
                // consistent y-mass and the Hessian acquires spurious negative
                // modes on coarse y grids).
                for (points, stiff) in [(GAUSS, false), ([-1.0, 1.0], true)] {
                    for gx in points {
                        for ge in points {
                            let mut n_ = [0.0; 4];
                            let mut dxi = [0.0; 4];
                            let mut deta = [0.0; 4];
                            for a in 0..4 {
                                n_[a] = 0.25 * (1.0 + sx[a] * gx) * (1.0 + se[a] * ge);
                                dxi[a] = 0.25 * sx[a] * (1.0 + se[a] * ge);
                                deta[a] = 0.25 * se[a] * (1.0 + sx[a] * gx);
                            }
                            let xg: f64 = (0..4).map(|a| n_[a] * xs[a]).sum();
                            let x_xi: f64 = (0..4).map(|a| dxi[a] * xs[a]).sum();
                            let x_eta: f64 = (0..4).map(|a| deta[a] * xs[a]).sum();
                            let y_eta = 0.5 * dy;
                            let h = metric.h(xg);
                            let w = h * x_xi * y_eta;
                            if !stiff {
                                for a in 0..4 {
                                    me[a] += n_[a] * w;
                                }
                                continue;
                            }
                            let mut gx_ = [0.0; 4];
                            let mut gy_ = [0.0; 4];
                            for a in 0..4 {
                                // inverse transpose of [[x_xi, x_eta], [0, y_eta]]
                                gx_[a] = dxi[a] / x_xi;
                                gy_[a] = (deta[a] - x_eta * dxi[a] / x_xi) / y_eta;
                            }
                            for a in 0..4 {
                                for b in 0..4 {
                                    ke[a][b] += (gx_[a] * gx_[b] + gy_[a] * gy_[b] / (h * h)) * w;
                                }
                            }
                        }
                    }
                }
                for a in 0..4 {
                    mass[ids[a]] += me[a];
                    // corners are distinct nodes for ny >= 2; each pair once
                    for b in 0..=a {
                        k.add(ids[a], ids[b], ke[a][b]);
                    }
                }
            }
        }
    }
    let mut dirichlet = vec![false; n];
    for j in 0..ny {
        if lower_bc == Bc::Dirichlet {
            dirichlet[j] = true;
        }
        if upper_bc == Bc::Dirichlet {
            dirichlet[(nx - 1) * ny + j] = true;
        }
    }
    let free = (0..n).filter(|&i| !dirichlet[i]).collect();
    DiscreteDomain {
        metric,
        nx,
        ny,
        period,
        x,
        lower_bc,
        upper_bc,
        interface,
        stiffness: k,
        mass,
        dirichlet,
        free,
    }
}

/// A nodal field on a discrete domain.
#[derive(Debug, Clone)]
pub struct PhaseField {
    pub eps: f64,
    pub domain: Arc<DiscreteDomain>,
    pub values: Vec<f64>,
}

impl PhaseField {
    pub fn new(eps: f64, domain: Arc<DiscreteDomain>, values: Vec<f64>) -> Self {
        PhaseField { eps, domain, values }
    }

    pub fn constant(eps: f64, domain: Arc<DiscreteDomain>, v: f64) -> Self {
        let n = domain.len();
        PhaseField::new(eps, domain, vec![v; n])
    }

    /// `E = int eps/2 |grad u|^2 + W(u)/eps` in the discrete quadrature.
    pub fn energy(&self) -> f64 {
        discrete_energy(&self.domain, self.eps, &self.values)
    }

    /// Strong-form residual `(eps^2 K u + m W'(u)) / m`, sup over free nodes.
    pub fn residual(&self) -> f64 {
        strong_residual(&self.domain, self.eps, &self.values)
            .iter()
            .zip(&self.domain.dirichlet)
            .filter(|(_, d)| !**d)
            .fold(0.0, |m, (r, _)| m.max(r.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Binary grid: a one-line text header, then little-endian `f64`
    /// node coordinates followed by values.
    pub fn to_binary(&self) -> Vec<u8> {
        let d = &self.domain;
        let mut out = format!(
            "aclab-field eps={:.16e} nx={} ny={} domain={:016x}\n",
            self.eps,
            d.nx,
            d.ny,
            domain_hash(d)
        )
        .into_bytes();
        for v in d.x.iter().chain(&self.values) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// CSV slice along column `j`: `x,u`.
    pub fn column_csv(&self, j: usize) -> String {
        let d = &self.domain;
        let mut s = String::from("x,u\n");
        for i in 0..d.nx {
            let k = d.index(i, j);
            s.push_str(&format!("{:.16e},{:.16e}\n", d.x[k], self.values[k]));
        }
        s
    }
}

/// FNV-1a over metric parameters and node positions.
pub fn domain_hash(d: &DiscreteDomain) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: f64| {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(d.metric.a);
    eat(d.metric.b);
    eat(d.nx as f64);
    eat(d.ny as f64);
    for &x in &d.x {
        eat(x);
    }
    h
}

/// `K u` evaluated through differences `K_ij (u_j - u_i)`; the stiffness
/// annihilates constants, and this form avoids cancellation on fine grids.
pub fn apply_stiffness(d: &DiscreteDomain, u: &[f64]) -> Vec<f64> {
    let k = &d.stiffness;
    let bw = k.bandwidth();
    let n = d.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in i.saturating_sub(bw)..i {
            let a = k.get(i, j);
            if a != 0.0 {
                let diff = a * (u[j] - u[i]);
                out[i] += diff;
                out[j] -= diff;
            }
        }
    }
    out
}

pub fn discrete_energy(d: &DiscreteDomain, eps: f64, u: &[f64]) -> f64 {
    let ku = apply_stiffness(d, u);
    let grad: f64 = u.iter().zip(&ku).map(|(a, b)| a * b).sum();
    let pot: f64 = u.iter().zip(&d.mass).map(|(v, m)| m * DoubleWell::value(*v)).sum();
    0.5 * eps * grad + pot / eps
}

fn strong_residual(d: &DiscreteDomain, eps: f64, u: &[f64]) -> Vec<f64> {
    let ku = apply_stiffness(d, u);
    (0..d.len())
        .map(|i| (eps * eps * ku[i] + d.mass[i] * DoubleWell::d1(u[i])) / d.mass[i])
        .collect()
}

fn free_sup(d: &DiscreteDomain, r: &[f64]) -> f64 {
    d.free.iter().fold(0.0f64, |m, &i| m.max(r[i].abs()))
}

/// Hessian of the discrete energy, scaled by `eps`: `eps^2 K + diag(m W''(u))`.
fn scaled_hessian(d: &DiscreteDomain, eps: f64, u: &[f64]) -> SymBand {
    let mut a = d.stiffness.scaled(eps * eps);
    let diag: Vec<f64> = u.iter().zip(&d.mass).map(|(v, m)| m * DoubleWell::d2(*v)).collect();
    a.add_diagonal(&diag);
    a
}

/// Solver tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 60,
        }
    }
}

/// Damped Newton on the free nodes; returns the final residual.
fn newton(d: &DiscreteDomain, eps: f64, u: &mut [f64], opts: NewtonOptions) -> std::result::Result<f64, f64> {
    let mut r = strong_residual(d, eps, u);
    let mut norm = free_sup(d, &r);
    for _ in 0..opts.max_iter {
        if norm <= opts.tol {
            return Ok(norm);
        }
        let h = scaled_hessian(d, eps, u).restrict(&d.free);
        let lu = match BandLu::factor(&h) {
            Ok(lu) => lu,
            Err(_) => return Err(norm),
        };
        let rhs: Vec<f64> = d.free.iter().map(|&i| -r[i] * d.mass[i]).collect();
        let step = lu.solve(&rhs);
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-10 {
            let mut trial = u.to_vec();
            for (k, &i) in d.free.iter().enumerate() {
                trial[i] += alpha * step[k];
            }
            let rt = strong_residual(d, eps, &trial);
            let nt = free_sup(d, &rt);
            if nt < norm || nt <= opts.tol {
                u.copy_from_slice(&trial);
                r = rt;
                norm = nt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(norm);
        }
    }
    if norm <= opts.tol {
        Ok(norm)
    } else {
        Err(norm)
    }
}

/// Smallest Dirichlet eigenvalue of `-Lap` and the threshold `lambda1^(-1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen {
    pub lambda1: f64,
    pub threshold: f64,
    pub iterations: usize,
}

pub fn principal_eigenvalue(d: &DiscreteDomain) -> Result<Eigen> {
    if d.free.len() == d.len() {
        return Err(Error::InvalidArgument("Dirichlet mask is empty".into()));
    }
    let kff = d.stiffness.restrict(&d.free);
    let fac = kff.ldlt()?;
    let m: Vec<f64> = d.free.iter().map(|&i| d.mass[i]).collect();
    let mut v: Vec<f64> = vec![1.0; d.free.len()];
    let mut lambda = f64::INFINITY;
    for it in 0..2000 {
        let mv: Vec<f64> = v.iter().zip(&m).map(|(a, b)| a * b).collect();
        let mut w = fac.solve(&mv);
        let mnorm = w.iter().zip(&m).map(|(a, b)| a * a * b).sum::<f64>().sqrt();
        w.iter_mut().for_each(|a| *a /= mnorm);
        let kw = kff.mul_vec(&w);
        let rq: f64 = w.iter().zip(&kw).map(|(a, b)| a * b).sum();
        v = w;
        if (rq - lambda).abs() <= 1e-12 * rq.abs() {
            return Ok(Eigen {
                lambda1: rq,
                threshold: rq.powf(-0.5),
                iterations: it + 1,
            });
        }
        lambda = rq;
    }
    Err(Error::NoConvergence {
        solver: "inverse iteration",
        iterations: 2000,
        residual: lambda,
    })
}

/// Distance from each node to the nearest Dirichlet end of its column.
fn distance_to_mask(d: &DiscreteDomain) -> Vec<f64> {
    let mut out = vec![f64::INFINITY; d.len()];
    for j in 0..d.ny {
        let col = d.column(j);
        for i in 0..d.nx {
            let mut dist = f64::INFINITY;
            if d.lower_bc == Bc::Dirichlet {
                dist = dist.min(col[i] - col[0]);
            }
            if d.upper_bc == Bc::Dirichlet {
                dist = dist.min(col[d.nx - 1] - col[i]);
            }
            out[d.index(i, j)] = dist;
        }
    }
    out
}

/// Positive solution of `eps^2 Lap u = W'(u)` vanishing on the mask.
pub fn solve_dirichlet(domain: Arc<DiscreteDomain>, eps: f64) -> Result<PhaseField> {
    solve_dirichlet_with(domain, eps, NewtonOptions::default())
}

pub fn solve_dirichlet_with(domain: Arc<DiscreteDomain>, eps: f64, opts: NewtonOptions) -> Result<PhaseField> {
    let d = &*domain;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must be positive")));
    }
    if d.free.len() == d.len() {
        return Err(Error::InvalidArgument("Dirichlet mask is empty".into()));
    }
    let spacing = d.layer_spacing(3.0 * eps);
    if spacing > eps / 8.0 * (1.0 + 1e-9) {
        return Err(Error::UnderResolved {
            spacing,
            limit: eps / 8.0,
        });
    }
    // eps^2 lambda1 < 1 iff eps^2 K - M has a negative direction
    let mut probe = d.stiffness.scaled(eps * eps);
    probe.add_diagonal(&d.mass.iter().map(|m| -m).collect::<Vec<_>>());
    let solvable = match probe.restrict(&d.free).ldlt() {
        Ok(f) => f.negative_count() > 0,
        Err(_) => false,
    };
    if !solvable {
        let th = principal_eigenvalue(d)?.threshold;
        return Err(Error::Threshold { eps, threshold: th });
    }
    let dist = distance_to_mask(d);
    let guess: Vec<f64> = dist.iter().map(|z| (z / (eps * SQRT_2)).tanh()).collect();
    let e_guess = discrete_energy(d, eps, &guess);
    let mut u = guess.clone();
    if newton(d, eps, &mut u, opts).is_err() {
        u = monotone_iteration(d, eps, 4000)?;
        newton(d, eps, &mut u, opts).map_err(|res| Error::NoConvergence {
            solver: "Dirichlet Newton",
            iterations: opts.max_iter,
            residual: res,
        })?;
    }
    let min_free = d.free.iter().map(|&i| u[i]).fold(f64::INFINITY, f64::min);
    if min_free <= 0.0 {
        return Err(Error::WrongBasin { min: min_free });
    }
    let max = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max > 1.0 + 1e-12 {
        return Err(Error::WrongBasin { min: min_free });
    }
    let field = PhaseField::new(eps, domain.clone(), u);
    debug_assert!(field.energy() <= e_guess + 1e-9 * e_guess.abs().max(1.0));
    Ok(field)
}

/// Sweep `(eps^2 K + c M) u_new = c M u - M W'(u)` down from the supersolution 1.
fn monotone_iteration(d: &DiscreteDomain, eps: f64, iters: usize) -> Result<Vec<f64>> {
    let c = 2.0;
    let mut a = d.stiffness.scaled(eps * eps);
    a.add_diagonal(&d.mass.iter().map(|m| c * m).collect::<Vec<_>>());
    let a_ff = a.restrict(&d.free);
    let fac = a_ff.ldlt()?;
    let mut u = vec![0.0; d.len()];
    for &i in &d.free {
        u[i] = 1.0;
    }
    for _ in 0..iters {
        let rhs: Vec<f64> = d
            .free
            .iter()
            .map(|&i| d.mass[i] * (c * u[i] - DoubleWell::d1(u[i])))
            .collect();
        let next = fac.solve(&rhs);
        let mut change = 0.0f64;
        for (k, &i) in d.free.iter().enumerate() {
            change = change.max((next[k] - u[i]).abs());
            u[i] = next[k];
        }
        if change < 1e-6 {
            break;
        }
    }
    Ok(u)
}

/// Solution of the linearised equation with prescribed values on the mask.
#[derive(Debug, Clone)]
pub struct LinearizedField {
    pub eps: f64,
    pub domain: Arc<DiscreteDomain>,
    pub values: Vec<f64>,
    /// Boundary data on the mask (zero elsewhere).
    pub boundary: Vec<f64>,
    pub residual: f64,
}

/// Node vector carrying per-column data on the lower/upper Dirichlet ends.
pub fn boundary_vector(d: &DiscreteDomain, lower: Option<&[f64]>, upper: Option<&[f64]>) -> Vec<f64> {
    let mut g = vec![0.0; d.len()];
    let pick = |v: &[f64], j: usize| if v.len() == 1 { v[0] } else { v[j] };
    for j in 0..d.ny {
        if let (Some(v), Bc::Dirichlet) = (lower, d.lower_bc) {
            g[d.index(0, j)] = pick(v, j);
        }
        if let (Some(v), Bc::Dirichlet) = (upper, d.upper_bc) {
            g[d.index(d.nx - 1, j)] = pick(v, j);
        }
    }
    g
}

/// Solve `eps^2 Lap v = W''(u) v` with `v = g` on the mask.
pub fn solve_linearized(u: &PhaseField, g: &[f64]) -> Result<LinearizedField> {
    let d = &*u.domain;
    if g.len() != d.len() {
        return Err(Error::InvalidArgument("boundary vector length mismatch".into()));
    }
    let a = scaled_hessian(d, u.eps, &u.values);
    let mut lifted = vec![0.0; d.len()];
    for i in 0..d.len() {
        if d.dirichlet[i] {
            lifted[i] = g[i];
        }
    }
    let a_ff = a.restrict(&d.free);
    let lu = BandLu::factor(&a_ff)?;
    let mut v = lifted.clone();
    // solve plus two rounds of refinement on the full residual
    for _ in 0..3 {
        let av = a.mul_vec(&v);
        let rhs: Vec<f64> = d.free.iter().map(|&i| -av[i]).collect();
        let dv = lu.solve(&rhs);
        for (k, &i) in d.free.iter().enumerate() {
            v[i] += dv[k];
        }
    }
    let av = a.mul_vec(&v);
    let scale = g.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let residual = d
        .free
        .iter()
        .fold(0.0f64, |m, &i| m.max((av[i] / d.mass[i]).abs()))
        / scale;
    Ok(LinearizedField {
        eps: u.eps,
        domain: u.domain.clone(),
        values: v,
        boundary: lifted,
        residual,
    })
}

/// Which end of the columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Lower,
    Upper,
}

/// First and second derivatives along each column at the given end, taken
/// in the inward distance `s` (so positive solutions have positive slope).
/// Six-point one-sided stencils: fifth order in the slope, fourth in the
/// curvature.
pub fn inward_derivatives(d: &DiscreteDomain, values: &[f64], end: End) -> Vec<[f64; 2]> {
    let pts = 6.min(d.nx);
    (0..d.ny)
        .map(|j| {
            let mut s = Vec::with_capacity(pts);
            let mut f = Vec::with_capacity(pts);
            for k in 0..pts {
                let (i, i0) = match end {
                    End::Lower => (k, 0),
                    End::Upper => (d.nx - 1 - k, d.nx - 1),
                };
                s.push((d.x[d.index(i, j)] - d.x[d.index(i0, j)]).abs());
                f.push(values[d.index(i, j)]);
            }
            [fd_derivative(0.0, &s, &f, 1), fd_derivative(0.0, &s, &f, 2)]
        })
        .collect()
}

/// Result of a full-manifold Newton polish.
#[derive(Debug, Clone)]
pub struct Polished {
    pub field: PhaseField,
    pub energy: f64,
    pub residual: f64,
    /// Zero level set as `x` per column when it is a graph.
    pub zero_set: Option<Vec<f64>>,
    /// Negative directions of the energy Hessian (the Morse index).
    pub morse_index: Option<usize>,
}

/// Newton solve on a domain without Dirichlet nodes.
pub fn newton_polish(initial: &PhaseField) -> Result<Polished> {
    let d = &*initial.domain;
    if d.free.len() != d.len() {
        return Err(Error::InvalidArgument("polish runs on a domain without Dirichlet mask".into()));
    }
    let eps = initial.eps;
    let opts = NewtonOptions::default();
    let sign_change = initial.min() < -0.5 && initial.max() > 0.5;
    let mut u = initial.values.clone();
    let residual = newton(d, eps, &mut u, opts).map_err(|res| Error::NoConvergence {
        solver: "polish Newton",
        iterations: opts.max_iter,
        residual: res,
    })?;
    let field = PhaseField::new(eps, initial.domain.clone(), u);
    if sign_change && !(field.min() < 0.0 && field.max() > 0.0) {
        return Err(Error::SaddleLost);
    }
    let morse_index = scaled_hessian(d, eps, &field.values)
        .ldlt()
        .ok()
        .map(|f| f.negative_count());
    Ok(Polished {
        energy: field.energy(),
        zero_set: zero_set(&field),
        field,
        residual,
        morse_index,
    })
}

/// Zero crossing per column (cubic interpolation), if exactly one per column.
pub fn zero_set(u: &PhaseField) -> Option<Vec<f64>> {
    let d = &*u.domain;
    let mut out = Vec::with_capacity(d.ny);
    for j in 0..d.ny {
        let col = d.column(j);
        let vals: Vec<f64> = (0..d.nx).map(|i| u.values[d.index(i, j)]).collect();
        let mut hits = Vec::new();
        for i in 0..d.nx - 1 {
            if vals[i] == 0.0 || vals[i] * vals[i + 1] < 0.0 {
                hits.push(i);
            }
        }
        if hits.len() != 1 {
            return None;
        }
        let i = hits[0];
        if vals[i] == 0.0 {
            out.push(col[i]);
            continue;
        }
        let lo = i.saturating_sub(1).min(d.nx.saturating_sub(4));
        let xs = &col[lo..(lo + 4).min(d.nx)];
        let fs = &vals[lo..(lo + 4).min(d.nx)];
        let (mut a, mut b) = (col[i], col[i + 1]);
        let fa = vals[i];
        let eval = |x: f64| crate::numerics::fd_derivative(x, xs, fs, 0);
        let mut fa_ = fa;
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            let fm = eval(m);
            if (fm < 0.0) == (fa_ < 0.0) {
                a = m;
                fa_ = fm;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_warped_torus, Ambient};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn flat_interval(len: f64, nx: usize, layer: Option<f64>) -> Arc<DiscreteDomain> {
        let metric = Ambient::flat_circle().metric;
        let region = Region {
            lower: Side::wall(0.0, Bc::Dirichlet),
            upper: Side::wall(len, Bc::Dirichlet),
        };
        Arc::new(discretize(&metric, &region, &Resolution { nx, ny: 1, layer }).unwrap())
    }

    fn warped_strip(nx: usize, ny: usize, eps: Option<f64>) -> Arc<DiscreteDomain> {
        let metric = make_warped_torus(2.0, 0.3).unwrap();
        let region = Region {
            lower: Side::wall(0.0, Bc::Dirichlet),
            upper: Side::wall(PI, Bc::Dirichlet),
        };
        Arc::new(discretize(&metric, &region, &Resolution { nx, ny, layer: eps }).unwrap())
    }

    #[test]
    fn stencils_and_consistency() {
        let d = flat_interval(PI, 1024, None);
        assert_eq!(d.stiffness.bandwidth(), 1);
        let u: Vec<f64> = d.x.iter().map(|x| x * x).collect();
        let ku = apply_stiffness(&d, &u);
        for i in 1..d.nx - 1 {
            assert!((-ku[i] / d.mass[i] - 2.0).abs() < 1e-6);
        }
        let w = warped_strip(17, 8, None);
        assert_eq!(w.stiffness.bandwidth(), 15);
        assert!((w.volume() - 2.0 * PI * 2.0 * PI).abs() < 1e-3);
    }

    #[test]
    fn principal_eigenvalues() {
        let e = principal_eigenvalue(&flat_interval(PI, 1024, None)).unwrap();
        assert!((e.lambda1 - 1.0).abs() < 1e-5);
        assert!((e.threshold - 1.0).abs() < 1e-5);
        let e2 = principal_eigenvalue(&flat_interval(2.0, 1024, None)).unwrap();
        assert!((e2.lambda1 - (PI / 2.0).powi(2)).abs() < 1e-5 * e2.lambda1);

        let d = warped_strip(17, 8, None);
        let kff = d.stiffness.restrict(&d.free).to_dense();
        let n = d.free.len();
        let s: Vec<f64> = d.free.iter().map(|&i| d.mass[i].sqrt()).collect();
        let a = nalgebra::DMatrix::from_fn(n, n, |i, j| kff[i][j] / (s[i] * s[j]));
        let oracle = nalgebra::SymmetricEigen::new(a).eigenvalues.min();
        let got = principal_eigenvalue(&d).unwrap().lambda1;
        assert!((got - oracle).abs() < 1e-6 * oracle, "{got} vs {oracle}");
    }

    #[test]
    fn dirichlet_flat_interval() {
        let d = flat_interval(PI, 2049, Some(0.05));
        let u = solve_dirichlet(d.clone(), 0.05).unwrap();
        assert!(u.residual() <= 1e-10);
        let mid = u
            .values
            .iter()
            .zip(&d.x)
            .min_by(|a, b| (a.1 - PI / 2.0).abs().total_cmp(&(b.1 - PI / 2.0).abs()))
            .unwrap()
            .0;
        assert!(*mid >= 1.0 - 1e-6);
        assert!(d.free.iter().all(|&i| u.values[i] > 0.0 && u.values[i] <= 1.0));
        let coarse = flat_interval(PI, 64, None);
        assert!(matches!(solve_dirichlet(coarse, 2.0), Err(Error::Threshold { .. })));
        let under = flat_interval(PI, 64, None);
        assert!(matches!(solve_dirichlet(under, 0.05), Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn boundary_slope_on_warped_strip() {
        let eps = 0.05;
        let d = warped_strip(401, 4, Some(eps));
        let u = solve_dirichlet(d.clone(), eps).unwrap();
        let target = 1.0 / (eps * SQRT_2);
        for [s, _] in inward_derivatives(&d, &u.values, End::Lower) {
            assert!((s / target - 1.0).abs() < 0.02, "{s} vs {target}");
        }
    }

    #[test]
    fn minimality_and_uniqueness() {
        let eps = 0.1;
        let d = flat_interval(PI, 801, Some(eps));
        let u = solve_dirichlet(d.clone(), eps).unwrap();
        let e = u.energy();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let amp: f64 = rng.random_range(0.01..0.3);
            let k: f64 = rng.random_range(1.0..6.0);
            let v: Vec<f64> = d
                .x
                .iter()
                .zip(&u.values)
                .map(|(x, w)| w + amp * (k * x).sin() * x.sin())
                .collect();
            assert!(discrete_energy(&d, eps, &v) >= e);
        }
        for (n, scale) in [(0, 1.0), (1, 0.5), (2, 0.9), (3, 0.2), (4, 1.3)] {
            let mut v: Vec<f64> = d
                .x
                .iter()
                .map(|x| scale * (x * (PI - x) / (n as f64 + 1.0) * 4.0).min(1.0))
                .collect();
            for i in 0..d.len() {
                if d.dirichlet[i] {
                    v[i] = 0.0;
                }
            }
            let mut w = v.clone();
            if newton(&d, eps, &mut w, NewtonOptions::default()).is_err() {
                w = monotone_iteration(&d, eps, 4000).unwrap();
                newton(&d, eps, &mut w, NewtonOptions::default()).unwrap();
            }
            if w.iter().zip(&d.dirichlet).all(|(a, m)| *m || *a > 0.0) {
                let gap = w.iter().zip(&u.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(gap <= 1e-8, "{gap}");
            }
        }
    }

    #[test]
    fn mesh_convergence_of_energy() {
        let eps = 0.1;
        let e: Vec<f64> = [201, 401, 801]
            .iter()
            .map(|&n| solve_dirichlet(flat_interval(PI, n, Some(eps)), eps).unwrap().energy())
            .collect();
        let order = ((e[0] - e[1]) / (e[1] - e[2])).log2();
        assert!(order >= 1.8, "{order}");
    }

    #[test]
    fn linearized_solves() {
        let eps = 0.1;
        let d = flat_interval(PI, 801, Some(eps));
        let u = solve_dirichlet(d.clone(), eps).unwrap();
        let zero = solve_linearized(&u, &vec![0.0; d.len()]).unwrap();
        assert!(zero.values.iter().all(|v| v.abs() < 1e-14));
        let g1 = boundary_vector(&d, Some(&[1.0]), Some(&[0.0]));
        let g2 = boundary_vector(&d, Some(&[0.3]), Some(&[-2.0]));
        let g12: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a + b).collect();
        let (v1, v2, v12) = (
            solve_linearized(&u, &g1).unwrap(),
            solve_linearized(&u, &g2).unwrap(),
            solve_linearized(&u, &g12).unwrap(),
        );
        assert!(v12.residual <= 1e-10);
        for i in 0..d.len() {
            assert!((v1.values[i] + v2.values[i] - v12.values[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn linearized_matches_boundary_translation() {
        // M = (c, pi) on the flat line; moving c by t moves the nodes affinely,
        // so the Eulerian derivative is the nodal derivative minus u_x * velocity.
        let eps = 0.1;
        let n = 3001;
        let metric = Ambient::flat_circle().metric;
        let solve = |c: f64| {
            let region = Region {
                lower: Side::wall(c, Bc::Dirichlet),
                upper: Side::wall(PI, Bc::Neumann),
            };
            let d = Arc::new(discretize(&metric, &region, &Resolution::uniform(n, 1)).unwrap());
            solve_dirichlet(d, eps).unwrap()
        };
        let u0 = solve(0.0);
        let d = u0.domain.clone();
        let slope = inward_derivatives(&d, &u0.values, End::Lower)[0][0];
        let v = solve_linearized(&u0, &boundary_vector(&d, Some(&[-slope]), None)).unwrap();
        let fd = |t: f64| {
            let (p, m) = (solve(t), solve(-t));
            p.values.iter().zip(&m.values).map(|(a, b)| (a - b) / (2.0 * t)).collect::<Vec<_>>()
        };
        let (f1, f2) = (fd(1e-4), fd(5e-5));
        let mut worst = 0.0f64;
        for i in 3..n - 3 {
            let xs: Vec<f64> = (i - 3..=i + 3).map(|k| d.x[k]).collect();
            let fs: Vec<f64> = (i - 3..=i + 3).map(|k| u0.values[k]).collect();
            let ux = fd_derivative(d.x[i], &xs, &fs, 1);
            let vel = (PI - d.x[i]) / PI;
            let rich = (4.0 * f2[i] - f1[i]) / 3.0;
            worst = worst.max((rich - ux * vel - v.values[i]).abs());
        }
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn polish_trivial_critical_points() {
        let metric = make_warped_torus(2.0, 0.3).unwrap();
        let d = Arc::new(discretize_glued(&metric, -PI, &[0.0], PI, &Resolution::graded(101, 1, 0.1)).unwrap());
        let one = newton_polish(&PhaseField::constant(0.1, d.clone(), 1.0)).unwrap();
        assert!(one.energy.abs() < 1e-14);
        let zero = newton_polish(&PhaseField::constant(0.1, d.clone(), 0.0)).unwrap();
        let vol = metric.h_primitive(PI) * 2.0 * 2.0 * PI;
        assert!((zero.energy - vol / 0.4).abs() < 1e-6 * vol);
    }

    #[test]
    fn binary_header() {
        let d = flat_interval(PI, 9, None);
        let u = PhaseField::constant(0.5, d, 0.25);
        let bytes = u.to_binary();
        let nl = bytes.iter().position(|b| *b == b'\n').unwrap();
        assert!(std::str::from_utf8(&bytes[..nl]).unwrap().starts_with("aclab-field eps=5.0000000000000000e-1 nx=9 ny=1"));
        assert_eq!(bytes.len() - nl - 1, 18 * 8);
    }
}
