//! Pseudogradient descent on graphs, string-method min–max over one- and
//! two-parameter families, the strong min–max audit and Palais–Smale
//! diagnostics.
//!
//! Graphs are the graph samples of a [`Hypersurface`] over its base circle.
//! Distances between graphs are sup-norms of the `x` positions; inner products
//! use the base measure `h(c) dy`.

use crate::elliptic::{newton_polish, Polished};
use crate::energy::{broken_transition, DEFAULT_NX};
use crate::error::{Error, Result};
use crate::geometry::{
    ambient_distance, canonical_family, jacobi_spectrum, Dim, Hypersurface, WarpedMetric,
};
use crate::numerics::{periodic_second_derivative_matrix, trig_interpolate};
use crate::variation::first_variation_density;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Pseudogradient stop tolerance in graph space.
pub const STOP_GRADIENT: f64 = 1e-6;
/// Smallest admissible line-search step.
pub const MIN_STEP: f64 = 1e-12;

/// First variation at a graph together with its smoothed descent field.
#[derive(Debug, Clone, PartialEq)]
pub struct Pseudogradient {
    /// Raw density `D` with `B'(f) = sum_j D_j f_j`.
    pub density: Vec<f64>,
    /// `L^2(h(c) dy)` gradient.
    pub gradient: Vec<f64>,
    /// `V = (1 - Delta)^{-1} gradient`.
    pub direction: Vec<f64>,
    /// `||B'||` in `H^{-1}`.
    pub dual_norm: f64,
    /// `||V||` in `H^1`.
    pub norm: f64,
    /// `<B', V>` evaluated with the raw density.
    pub pairing: f64,
}

impl Pseudogradient {
    /// `<B', V> >= ||B'||^2` and `||V|| <= 2 ||B'||`, up to roundoff.
    pub fn satisfies_inequalities(&self) -> bool {
        let sq = self.dual_norm * self.dual_norm;
        let slack = 1e-9 * sq + f64::MIN_POSITIVE;
        self.pairing >= sq - slack && self.norm <= 2.0 * self.dual_norm + 1e-9 * self.dual_norm + f64::MIN_POSITIVE
    }
}

fn base_weight(sigma: &Hypersurface) -> f64 {
    let m = sigma.ambient.metric;
    m.h(sigma.base) * m.y_period() / sigma.ny() as f64
}

/// `1 - h(c)^{-2} d^2/dy^2` on the base circle.
fn helmholtz(sigma: &Hypersurface) -> DMatrix<f64> {
    let n = sigma.ny();
    let m = sigma.ambient.metric;
    let hc2 = m.h(sigma.base).powi(2);
    let mut a = DMatrix::identity(n, n);
    if n >= 3 {
        let d2 = periodic_second_derivative_matrix(n, m.y_period());
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] -= d2[i][j] / hc2;
            }
        }
    }
    a
}

/// Smooth a first-variation density into a pseudogradient.
pub fn smooth_density(sigma: &Hypersurface, density: Vec<f64>) -> Result<Pseudogradient> {
    let w = base_weight(sigma);
    let gradient: Vec<f64> = density.iter().map(|d| d / w).collect();
    let a = helmholtz(sigma);
    let v = a
        .clone()
        .cholesky()
        .ok_or(Error::Singular { row: 0, pivot: 0.0 })?
        .solve(&DVector::from_column_slice(&gradient));
    let av = &a * &v;
    let dual_sq: f64 = gradient.iter().zip(v.iter()).map(|(g, x)| g * x).sum::<f64>() * w;
    let norm_sq: f64 = v.iter().zip(av.iter()).map(|(x, y)| x * y).sum::<f64>() * w;
    let pairing: f64 = density.iter().zip(v.iter()).map(|(d, x)| d * x).sum();
    Ok(Pseudogradient {
        density,
        gradient,
        direction: v.iter().copied().collect(),
        dual_norm: dual_sq.max(0.0).sqrt(),
        norm: norm_sq.max(0.0).sqrt(),
        pairing,
    })
}

/// Balanced energy and pseudogradient at a graph.
pub fn evaluate(sigma: &Hypersurface, eps: f64, nx: usize) -> Result<(f64, Pseudogradient)> {
    let t = broken_transition(sigma, eps, nx)?;
    let density = first_variation_density(&t)?;
    Ok((t.balanced(), smooth_density(sigma, density)?))
}

/// The `H^1`-smoothed first variation at `sigma`.
pub fn pseudogradient(sigma: &Hypersurface, eps: f64) -> Result<Pseudogradient> {
    Ok(evaluate(sigma, eps, DEFAULT_NX)?.1)
}

/// Symmetric Hausdorff distance between two curves, each sampled at 512
/// spectrally interpolated points.
pub fn hausdorff_distance(a: &Hypersurface, b: &Hypersurface) -> f64 {
    const N: usize = 512;
    let metric = a.ambient.metric;
    let (pa, pb) = (a.dense_curve(N), b.dense_curve(N));
    let one_sided = |p: &[(f64, f64)], q: &[(f64, f64)]| {
        p.par_iter()
            .map(|x| q.iter().map(|y| ambient_distance(&metric, *x, *y)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    };
    one_sided(&pa, &pb).max(one_sided(&pb, &pa))
}

/// The graph over `base` whose positions are `xs`.
pub fn curve_from_positions(base: &Hypersurface, xs: &[f64]) -> Result<Hypersurface> {
    let g = xs.iter().map(|x| (x - base.base) * base.orientation).collect();
    base.with_graph(g)
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Cutoffs of the deformation construction: the band `|B - c| <= eta` inside
/// `U_{2 delta}` where the flow acts, and `|B - c| <= eta_bar` inside
/// `U_delta` where it acts at full speed. `U` is the sup-ball of radius
/// `radius` about `reference`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationCutoff {
    pub level: f64,
    pub eta: f64,
    pub eta_bar: f64,
    pub radius: f64,
    pub delta: f64,
    pub reference: Vec<f64>,
}

impl DeformationCutoff {
    /// `d(u) = dist(u, B) / (dist(u, A) + dist(u, B))`. Energy gaps are
    /// converted into distances by the local slope `||B'||`.
    pub fn factor(&self, positions: &[f64], energy: f64, slope: f64) -> f64 {
        let s = sup_distance(positions, &self.reference);
        let gap = (energy - self.level).abs();
        let slope = slope.max(1e-12);
        let dist_a = (s - self.radius - self.delta).max(0.0) + (gap - self.eta_bar).max(0.0) / slope;
        let dist_b = (self.radius + 2.0 * self.delta - s).min((self.eta - gap) / slope).max(0.0);
        if dist_a + dist_b == 0.0 {
            0.0
        } else {
            dist_b / (dist_a + dist_b)
        }
    }
}

/// `h(t) = min(1, 1/t)`.
pub fn speed_limit(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else {
        1.0 / t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriteria {
    pub gradient_tol: f64,
    pub energy_floor: Option<f64>,
    pub max_steps: usize,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria {
            gradient_tol: STOP_GRADIENT,
            energy_floor: None,
            max_steps: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOptions {
    pub eps: f64,
    pub nx: usize,
    pub stop: StopCriteria,
    pub initial_step: f64,
    pub max_step: f64,
    /// Largest sup-norm displacement per step.
    pub max_move: f64,
    pub cutoff: Option<DeformationCutoff>,
    /// Move the base circle to the mean position when the chart gets tight.
    pub rebase: bool,
}

impl DescentOptions {
    pub fn new(eps: f64) -> Self {
        DescentOptions {
            eps,
            nx: DEFAULT_NX,
            stop: StopCriteria::default(),
            initial_step: 1.0,
            max_step: 8.0,
            max_move: 0.05,
            cutoff: None,
            rebase: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentState {
    pub sigma: Hypersurface,
    pub energy: f64,
    pub pseudo: Pseudogradient,
    /// `d(u)`.
    pub cutoff: f64,
    /// `h(||B'||)`.
    pub speed: f64,
    pub step: usize,
    /// Accepted step length (0 for the initial state).
    pub step_size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Gradient,
    EnergyFloor,
    MaxSteps,
    /// `d(u) = 0`: outside the region where the deformation acts.
    Cutoff,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Gradient => "gradient",
            StopReason::EnergyFloor => "energy-floor",
            StopReason::MaxSteps => "max-steps",
            StopReason::Cutoff => "cutoff",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<DescentState>,
    pub reason: StopReason,
}

impl Trajectory {
    pub fn last(&self) -> &DescentState {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    pub fn monotone(&self) -> bool {
        self.states.windows(2).all(|w| w[1].energy <= w[0].energy)
    }
}

fn make_state(
    sigma: Hypersurface,
    opts: &DescentOptions,
    step: usize,
    step_size: f64,
) -> Result<DescentState> {
    let (energy, pseudo) = evaluate(&sigma, opts.eps, opts.nx)?;
    let cutoff = opts
        .cutoff
        .as_ref()
        .map_or(1.0, |c| c.factor(&sigma.positions(), energy, pseudo.dual_norm));
    let speed = speed_limit(pseudo.dual_norm);
    Ok(DescentState {
        sigma,
        energy,
        pseudo,
        cutoff,
        speed,
        step,
        step_size,
    })
}

fn recoverable(e: &Error) -> bool {
    matches!(
        e,
        Error::OutsideChart { .. }
            | Error::Threshold { .. }
            | Error::UnderResolved { .. }
            | Error::WrongBasin { .. }
            | Error::NoConvergence { .. }
            | Error::Singular { .. }
    )
}

/// Re-centre the base circle at the mean graph position.
fn rebase(sigma: &Hypersurface) -> Hypersurface {
    let n = sigma.ny() as f64;
    let mean = sigma.graph.iter().sum::<f64>() / n;
    let mut out = sigma.clone();
    out.base = sigma.base + sigma.orientation * mean;
    out.graph.iter_mut().for_each(|v| *v -= mean);
    if out.base <= sigma.ambient.x_lo || out.base >= sigma.ambient.x_hi || out.sup_offset() >= out.chart_height() {
        return sigma.clone();
    }
    out
}

/// Explicit Euler descent along `G = -d(u) h(||B'||) V` with Armijo
/// backtracking.
pub fn descend(start: &Hypersurface, opts: &DescentOptions) -> Result<Trajectory> {
    if start.dim() != Dim::Two {
        return Err(Error::Unsupported("descent over point pairs".into()));
    }
    let mut state = make_state(start.clone(), opts, 0, 0.0)?;
    let mut states = vec![state.clone()];
    let mut tau = opts.initial_step;
    let reason = loop {
        if state.pseudo.dual_norm <= opts.stop.gradient_tol {
            break StopReason::Gradient;
        }
        if opts.stop.energy_floor.is_some_and(|f| state.energy <= f) {
            break StopReason::EnergyFloor;
        }
        if state.step >= opts.stop.max_steps {
            break StopReason::MaxSteps;
        }
        let scale = state.cutoff * state.speed;
        if scale <= 0.0 {
            break StopReason::Cutoff;
        }
        let g: Vec<f64> = state.pseudo.direction.iter().map(|v| -scale * v).collect();
        let slope = scale * state.pseudo.pairing;
        let gsup = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        tau = tau.min(opts.max_move / gsup);
        let next = loop {
            if tau < MIN_STEP {
                return Err(Error::StepCollapse { step: tau });
            }
            let graph: Vec<f64> = state.sigma.graph.iter().zip(&g).map(|(a, b)| a + tau * b).collect();
            let trial = state
                .sigma
                .with_graph(graph)
                .and_then(|s| make_state(s, opts, state.step + 1, tau));
            match trial {
                Ok(s) if s.energy <= state.energy - 1e-4 * tau * slope => break s,
                Ok(_) => tau *= 0.5,
                Err(e) if recoverable(&e) => tau *= 0.5,
                Err(e) => return Err(e),
            }
        };
        state = next;
        if opts.rebase && state.sigma.sup_offset() > 0.5 * state.sigma.chart_height() {
            let moved = rebase(&state.sigma);
            if moved != state.sigma {
                let (step, size) = (state.step, state.step_size);
                state = make_state(moved, opts, step, size)?;
            }
        }
        states.push(state.clone());
        tau = (2.0 * tau).min(opts.max_step);
    };
    Ok(Trajectory { states, reason })
}

/// One sample of the annulus `U_delta \ U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorSample {
    pub sup: f64,
    pub energy: f64,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientFloor {
    /// Smallest observed `||B'||`.
    pub mu: f64,
    pub argmin: usize,
    pub samples: Vec<FloorSample>,
}

/// Random smooth shape with unit sup-norm: low Fourier modes with decaying
/// amplitudes.
fn random_shape(rng: &mut ChaCha8Rng, ys: &[f64], modes: usize) -> Vec<f64> {
    let mut f = vec![rng.random_range(-1.0..1.0); ys.len()];
    for k in 1..=modes {
        let (a, b) = (rng.random_range(-1.0..1.0) / k as f64, rng.random_range(-1.0..1.0) / k as f64);
        for (v, y) in f.iter_mut().zip(ys) {
            *v += a * (k as f64 * y).cos() + b * (k as f64 * y).sin();
        }
    }
    let sup = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    f.iter().map(|v| v / sup).collect()
}

/// Minimum of `||B'||` over `samples` graphs with sup-norm in
/// `[radius, radius + delta]`. The first two samples are the translations
/// `+-(radius + delta/2)`, the rest random smooth graphs.
pub fn gradient_floor_probe(
    sigma: &Hypersurface,
    radius: f64,
    delta: f64,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<GradientFloor> {
    if delta <= 0.0 {
        return Err(Error::InvalidArgument("empty annulus: delta must be positive".into()));
    }
    if samples == 0 || radius < 0.0 {
        return Err(Error::InvalidArgument("need samples > 0 and radius >= 0".into()));
    }
    let ys = sigma.y_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graphs: Vec<Vec<f64>> = (0..samples)
        .map(|i| {
            let s = radius + delta * (i as f64 + 0.5) / samples as f64;
            let shape = match i {
                0 => vec![1.0; ys.len()],
                1 => vec![-1.0; ys.len()],
                _ => random_shape(&mut rng, &ys, 3),
            };
            shape.iter().zip(&sigma.graph).map(|(v, g)| g + s * v).collect()
        })
        .collect();
    let out: Vec<FloorSample> = graphs
        .par_iter()
        .map(|g| {
            let s = sigma.with_graph(g.clone())?;
            let (energy, p) = evaluate(&s, eps, DEFAULT_NX)?;
            Ok(FloorSample {
                sup: sup_distance(g, &sigma.graph),
                energy,
                gradient_norm: p.dual_norm,
            })
        })
        .collect::<Result<_>>()?;
    let (argmin, mu) = out
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.gradient_norm))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    Ok(GradientFloor { mu, argmin, samples: out })
}

/// Admissible radii: `U` is the sup-ball of radius `r` about the base graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radii {
    pub r: f64,
    pub delta: f64,
}

impl Radii {
    pub fn outer(&self) -> f64 {
        self.r + 2.0 * self.delta
    }
}

/// A family of graphs over `base` indexed by nodes of `B^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFamily {
    pub k: usize,
    pub base: Hypersurface,
    /// Node coordinates: `s` in `[0, 1]` for `k = 1`, points of the unit disc for `k = 2`.
    pub params: Vec<Vec<f64>>,
    pub graphs: Vec<Vec<f64>>,
    pub pinned: Vec<bool>,
    pub neighbours: Vec<Vec<usize>>,
    pub radii: Radii,
    /// Lattice side for `k = 2`.
    pub side: usize,
}

impl PathFamily {
    /// `m` nodes interpolating linearly between two pinned graphs.
    pub fn segment(base: &Hypersurface, start: &[f64], end: &[f64], m: usize, radii: Radii) -> Result<Self> {
        let n = base.ny();
        if m < 3 || start.len() != n || end.len() != n {
            return Err(Error::InvalidArgument("segment needs m >= 3 and graphs on the base grid".into()));
        }
        let params: Vec<Vec<f64>> = (0..m).map(|i| vec![i as f64 / (m - 1) as f64]).collect();
        let graphs = params
            .iter()
            .map(|s| start.iter().zip(end).map(|(a, b)| (1.0 - s[0]) * a + s[0] * b).collect())
            .collect();
        let pinned = (0..m).map(|i| i == 0 || i == m - 1).collect();
        let neighbours = (0..m)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < m {
                    v.push(i + 1);
                }
                v
            })
            .collect();
        let out = PathFamily { k: 1, base: base.clone(), params, graphs, pinned, neighbours, radii, side: m };
        out.check()?;
        Ok(out)
    }

    /// An `m x m` lattice on the square mapped onto the unit disc; boundary
    /// nodes are pinned to `boundary(theta)` and interior nodes blend radially
    /// toward the boundary mean.
    pub fn disc(base: &Hypersurface, boundary: &dyn Fn(f64) -> Vec<f64>, m: usize, radii: Radii) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidArgument("disc lattice needs m >= 3".into()));
        }
        let n = base.ny();
        let mut params = Vec::with_capacity(m * m);
        let mut pinned = Vec::with_capacity(m * m);
        let mut neighbours = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let (a, b) = (2.0 * i as f64 / (m - 1) as f64 - 1.0, 2.0 * j as f64 / (m - 1) as f64 - 1.0);
                params.push(vec![a * (1.0 - 0.5 * b * b).sqrt(), b * (1.0 - 0.5 * a * a).sqrt()]);
                pinned.push(i == 0 || j == 0 || i == m - 1 || j == m - 1);
                let mut nb = Vec::new();
                if i > 0 {
                    nb.push((i - 1) * m + j);
                }
                if i + 1 < m {
                    nb.push((i + 1) * m + j);
                }
                if j > 0 {
                    nb.push(i * m + j - 1);
                }
                if j + 1 < m {
                    nb.push(i * m + j + 1);
                }
                neighbours.push(nb);
            }
        }
        let ring: Vec<Vec<f64>> = (0..64).map(|i| boundary(2.0 * std::f64::consts::PI * i as f64 / 64.0)).collect();
        let centre: Vec<f64> = (0..n).map(|j| ring.iter().map(|g| g[j]).sum::<f64>() / 64.0).collect();
        let mut graphs = Vec::with_capacity(m * m);
        for (p, &pin) in params.iter().zip(&pinned) {
            let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let edge = boundary(p[1].atan2(p[0]));
            if edge.len() != n {
                return Err(Error::InvalidArgument("boundary graph has the wrong length".into()));
            }
            let rho = if pin { 1.0 } else { rho };
            graphs.push(edge.iter().zip(&centre).map(|(e, c)| rho * e + (1.0 - rho) * c).collect());
        }
        let out = PathFamily { k: 2, base: base.clone(), params, graphs, pinned, neighbours, radii, side: m };
        out.check()?;
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Add `(1 - |v|^2) bump(v)` to every free node (`v` in `B^k`).
    pub fn perturb_interior(&mut self, bump: &dyn Fn(&[f64]) -> Vec<f64>) -> Result<()> {
        for i in 0..self.len() {
            if self.pinned[i] {
                continue;
            }
            let v = self.ball_coordinate(i);
            let w = 1.0 - v.iter().map(|x| x * x).sum::<f64>();
            for (g, b) in self.graphs[i].iter_mut().zip(bump(&v)) {
                *g += w * b;
            }
        }
        self.check()
    }

    /// Node coordinate in `B^k` (for `k = 1`, `v = 2 s - 1`).
    pub fn ball_coordinate(&self, i: usize) -> Vec<f64> {
        if self.k == 1 {
            vec![2.0 * self.params[i][0] - 1.0]
        } else {
            self.params[i].clone()
        }
    }

    pub fn node(&self, i: usize) -> Result<Hypersurface> {
        self.base.with_graph(self.graphs[i].clone())
    }

    /// Every node stays inside `U_{2 delta}`.
    pub fn check(&self) -> Result<()> {
        let limit = self.radii.outer();
        for g in &self.graphs {
            let sup = sup_distance(g, &self.base.graph);
            if sup > limit {
                return Err(Error::Escaped { sup, limit });
            }
        }
        Ok(())
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        base_weight(&self.base) * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }
}

impl PathFamily {
    /// Unit tangent at node `i` (`k = 1`: central difference; `k = 2`: the
    /// lattice axis with the most negative second difference of energy).
    fn tangent(&self, i: usize, energies: &[f64]) -> Vec<f64> {
        let (a, b) = if self.k == 1 {
            (i + 1, i - 1)
        } else {
            let m = self.side;
            let axes = [(i + m, i - m), (i + 1, i - 1)];
            *axes
                .iter()
                .min_by(|x, y| {
                    let cx = energies[x.0] + energies[x.1];
                    let cy = energies[y.0] + energies[y.1];
                    cx.total_cmp(&cy)
                })
                .expect("two axes")
        };
        let d: Vec<f64> = self.graphs[a].iter().zip(&self.graphs[b]).map(|(x, y)| x - y).collect();
        let norm = self.inner(&d, &d).sqrt();
        if norm == 0.0 {
            return vec![0.0; d.len()];
        }
        d.iter().map(|v| v / norm).collect()
    }

    /// Energy-weighted arclength redistribution of the free nodes strictly
    /// between `lo` and `hi`.
    fn redistribute(&mut self, lo: usize, hi: usize, energies: &[f64]) {
        if hi < lo + 2 {
            return;
        }
        let (emin, emax) = energies[lo..=hi]
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), e| (a.min(*e), b.max(*e)));
        let range = emax - emin;
        let mut cum = vec![0.0];
        for i in lo..hi {
            let d: Vec<f64> = self.graphs[i + 1].iter().zip(&self.graphs[i]).map(|(x, y)| x - y).collect();
            let w = if range > 0.0 {
                1.0 + (0.5 * (energies[i] + energies[i + 1]) - emin) / range
            } else {
                1.0
            };
            cum.push(cum.last().unwrap() + w * self.inner(&d, &d).sqrt());
        }
        let total = *cum.last().unwrap();
        if total == 0.0 {
            return;
        }
        let old = self.graphs[lo..=hi].to_vec();
        let mut seg = 0;
        for k in lo + 1..hi {
            let target = total * (k - lo) as f64 / (hi - lo) as f64;
            while seg + 1 < cum.len() - 1 && cum[seg + 1] < target {
                seg += 1;
            }
            let len = cum[seg + 1] - cum[seg];
            let t = if len > 0.0 { (target - cum[seg]) / len } else { 0.0 };
            self.graphs[k] = old[seg].iter().zip(&old[seg + 1]).map(|(a, b)| a + t * (b - a)).collect();
        }
    }

    /// Barycentric smoothing of free nodes other than `keep`.
    fn smooth(&mut self, keep: usize, weight: f64) {
        let old = self.graphs.clone();
        for i in 0..self.len() {
            if self.pinned[i] || i == keep {
                continue;
            }
            let nb = &self.neighbours[i];
            for j in 0..old[i].len() {
                let mean = nb.iter().map(|&q| old[q][j]).sum::<f64>() / nb.len() as f64;
                self.graphs[i][j] = (1.0 - weight) * old[i][j] + weight * mean;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MountainPassOptions {
    pub nx: usize,
    pub max_iter: usize,
    /// Stop when the argmax node's pseudogradient norm falls below this.
    pub tol: f64,
    pub step: f64,
    pub max_move: f64,
    /// Barycentric smoothing weight (`k = 2`).
    pub smoothing: f64,
    pub polish: bool,
    /// Hypersurface the saddle's zero set is compared with (default: the base).
    pub reference: Option<Hypersurface>,
}

impl Default for MountainPassOptions {
    fn default() -> Self {
        MountainPassOptions {
            nx: DEFAULT_NX,
            max_iter: 400,
            tol: STOP_GRADIENT,
            step: 1.5,
            max_move: 0.05,
            smoothing: 0.5,
            polish: true,
            reference: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationLog {
    pub iter: usize,
    pub d_estimate: f64,
    /// Largest pseudogradient norm over free nodes.
    pub max_gradient: f64,
    pub argmax: usize,
    pub argmax_gradient: f64,
}

#[derive(Debug, Clone)]
pub struct MinMaxResult {
    pub eps: f64,
    pub d_eps: f64,
    /// Largest energy on the pinned boundary.
    pub c_eps: f64,
    pub argmax: usize,
    pub argmax_param: Vec<f64>,
    pub argmax_graph: Hypersurface,
    pub saddle: Option<Polished>,
    pub gradient_norm: f64,
    pub hausdorff: Option<f64>,
    /// `d_eps > c_eps` with an interior argmax.
    pub mountain_pass: bool,
    pub converged: bool,
    pub iterations: usize,
    pub log: Vec<IterationLog>,
    pub family: PathFamily,
}

fn argmax(energies: &[f64], pinned: &[bool]) -> usize {
    // ties go to free nodes, then to the lowest index
    let mut best = 0;
    for i in 1..energies.len() {
        let better = energies[i] > energies[best] || (energies[i] == energies[best] && pinned[best] && !pinned[i]);
        if better {
            best = i;
        }
    }
    best
}

/// Climbing string method: free nodes descend along the pseudogradient with
/// the tangential part removed, the
/// highest node climbs along the family tangent, and the family is
/// re-spread after every sweep (arclength for `k = 1`, barycentric smoothing
/// for `k = 2`). The argmax node is then glued and polished.
pub fn mountain_pass(family: &PathFamily, eps: f64, opts: &MountainPassOptions) -> Result<MinMaxResult> {
    if !(family.k == 1 || family.k == 2) {
        return Err(Error::InvalidArgument("families must have k in {1, 2}".into()));
    }
    family.check()?;
    let mut fam = family.clone();
    let n = fam.len();
    let mut evals: Vec<(f64, Pseudogradient)> = (0..n)
        .into_par_iter()
        .map(|i| evaluate(&fam.node(i)?, eps, opts.nx))
        .collect::<Result<_>>()?;
    let c_eps = (0..n)
        .filter(|&i| fam.pinned[i])
        .map(|i| evals[i].0)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut tau = opts.step;
    let mut log = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut previous = f64::INFINITY;
    let star = loop {
        let energies: Vec<f64> = evals.iter().map(|e| e.0).collect();
        let star = argmax(&energies, &fam.pinned);
        let max_gradient = (0..n)
            .filter(|&i| !fam.pinned[i])
            .map(|i| evals[i].1.dual_norm)
            .fold(0.0, f64::max);
        let norm = evals[star].1.dual_norm;
        log.push(IterationLog {
            iter: iterations,
            d_estimate: energies[star],
            max_gradient,
            argmax: star,
            argmax_gradient: norm,
        });
        if fam.pinned[star] || energies[star] <= c_eps {
            break star;
        }
        if norm <= opts.tol {
            converged = true;
            break star;
        }
        if iterations >= opts.max_iter {
            break star;
        }
        iterations += 1;
        if norm > previous {
            tau *= 0.5;
        } else {
            tau = (1.1 * tau).min(opts.step);
        }
        previous = norm;
        let t = fam.tangent(star, &energies);
        for i in 0..n {
            if fam.pinned[i] {
                continue;
            }
            // free nodes move across the family only; the top node climbs
            let v = &evals[i].1.direction;
            let (ti, weight) = if i == star { (t.clone(), 2.0) } else { (fam.tangent(i, &energies), 1.0) };
            let p = fam.inner(v, &ti);
            let dir: Vec<f64> = v.iter().zip(&ti).map(|(a, b)| a - weight * p * b).collect();
            let sup = dir.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let step = if sup > 0.0 { tau.min(opts.max_move / sup) } else { 0.0 };
            for (g, d) in fam.graphs[i].iter_mut().zip(&dir) {
                *g -= step * d;
            }
        }
        if fam.k == 1 {
            fam.redistribute(0, star, &energies);
            fam.redistribute(star, n - 1, &energies);
        } else {
            fam.smooth(star, opts.smoothing);
        }
        fam.check()?;
        let fresh: Vec<Option<(f64, Pseudogradient)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                if fam.pinned[i] {
                    Ok(None)
                } else {
                    evaluate(&fam.node(i)?, eps, opts.nx).map(Some)
                }
            })
            .collect::<Result<_>>()?;
        for (e, f) in evals.iter_mut().zip(fresh) {
            if let Some(f) = f {
                *e = f;
            }
        }
    };
    let d_eps = evals[star].0;
    let mountain_pass = !fam.pinned[star] && d_eps > c_eps;
    let node = fam.node(star)?;
    let reference = opts.reference.clone().unwrap_or_else(|| fam.base.clone());
    let (saddle, hausdorff) = if mountain_pass && opts.polish {
        let glued = broken_transition(&node, eps, opts.nx)?.glue()?;
        let polished = newton_polish(&glued)?;
        let h = match &polished.zero_set {
            Some(z) => Some(hausdorff_distance(&curve_from_positions(&reference, z)?, &reference)),
            None => None,
        };
        (Some(polished), h)
    } else {
        (None, None)
    };
    Ok(MinMaxResult {
        eps,
        d_eps,
        c_eps,
        argmax: star,
        argmax_param: fam.ball_coordinate(star),
        argmax_graph: node,
        saddle,
        gradient_norm: evals[star].1.dual_norm,
        hausdorff,
        mountain_pass,
        converged,
        iterations,
        log,
        family: fam,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditOptions {
    pub trials: usize,
    /// Nodes per family (`k = 1`) or lattice side (`k = 2`).
    pub nodes: usize,
    pub seed: u64,
    pub nx: usize,
    /// String sweeps applied to the optimised trials.
    pub optimize_sweeps: usize,
    /// `delta = tolerance * B(sigma)`.
    pub tolerance: f64,
    /// Sup-norm radius of `U`.
    pub admissible: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            trials: 20,
            nodes: 17,
            seed: 0,
            nx: DEFAULT_NX,
            optimize_sweeps: 8,
            tolerance: 1e-2,
            admissible: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialKind {
    Random,
    Optimized,
}

impl TrialKind {
    pub fn name(self) -> &'static str {
        match self {
            TrialKind::Random => "random",
            TrialKind::Optimized => "optimized",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditTrial {
    pub index: usize,
    pub kind: TrialKind,
    /// `sup_v B(family(v))`; `None` when the trial was discarded.
    pub sup: Option<f64>,
    pub argmax: Vec<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub eps: f64,
    pub k: usize,
    pub r: f64,
    /// `B(sigma)`.
    pub reference: f64,
    pub delta: f64,
    pub trials: Vec<AuditTrial>,
    pub min_sup: f64,
    pub canonical_sup: f64,
    pub canonical_argmax: Vec<f64>,
    /// Sup-norm displacement of the canonical maximiser from `sigma`.
    pub canonical_offset: f64,
    pub passed: bool,
}

fn pinned_canonical(sigma: &Hypersurface, k: usize, r: f64, opts: &AuditOptions) -> Result<PathFamily> {
    let spec = jacobi_spectrum(sigma, k, 32)?;
    let graph = |v: &[f64]| -> Vec<f64> {
        canonical_family(sigma, &spec, r, v).map(|s| s.graph).unwrap_or_else(|_| vec![f64::NAN; sigma.ny()])
    };
    let radii = Radii { r: opts.admissible, delta: 0.0 };
    let mut fam = if k == 1 {
        PathFamily::segment(sigma, &graph(&[-1.0]), &graph(&[1.0]), opts.nodes, radii)?
    } else {
        PathFamily::disc(sigma, &|th: f64| graph(&[th.cos(), th.sin()]), opts.nodes, radii)?
    };
    for i in 0..fam.len() {
        let v = fam.ball_coordinate(i);
        fam.graphs[i] = graph(&v);
    }
    if fam.graphs.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::OutsideChart { sup: f64::NAN, limit: sigma.chart_height() });
    }
    fam.check()?;
    Ok(fam)
}

fn family_sup(fam: &PathFamily, eps: f64, nx: usize) -> Result<(f64, usize)> {
    let e: Vec<f64> = (0..fam.len())
        .into_par_iter()
        .map(|i| Ok(broken_transition(&fam.node(i)?, eps, nx)?.balanced()))
        .collect::<Result<_>>()?;
    let i = argmax(&e, &fam.pinned);
    Ok((e[i], i))
}

/// Descent sweeps of the free nodes (no climbing) that lower the family's sup.
fn optimize_family(fam: &mut PathFamily, eps: f64, nx: usize, sweeps: usize) -> Result<()> {
    for _ in 0..sweeps {
        let evals: Vec<Option<(f64, Pseudogradient)>> = (0..fam.len())
            .into_par_iter()
            .map(|i| if fam.pinned[i] { Ok(None) } else { evaluate(&fam.node(i)?, eps, nx).map(Some) })
            .collect::<Result<_>>()?;
        let energies: Vec<f64> = evals.iter().map(|e| e.as_ref().map_or(f64::NEG_INFINITY, |x| x.0)).collect();
        for (i, e) in evals.iter().enumerate() {
            let Some((_, p)) = e else { continue };
            let sup = p.direction.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let step = if sup > 0.0 { 1.0f64.min(0.05 / sup) } else { 0.0 };
            for (g, d) in fam.graphs[i].iter_mut().zip(&p.direction) {
                *g -= step * d;
            }
        }
        if fam.k == 1 {
            let n = fam.len();
            fam.redistribute(0, n - 1, &energies);
        } else {
            fam.smooth(usize::MAX, 0.25);
        }
        fam.check()?;
    }
    Ok(())
}

/// Audit `inf sup B >= B(sigma) - delta` over random and optimised families
/// pinned to the canonical boundary `{sigma_{r v} : v in dB^k}`.
pub fn strong_minmax_audit(sigma: &Hypersurface, k: usize, r: f64, eps: f64, opts: &AuditOptions) -> Result<AuditReport> {
    if !(k == 1 || k == 2) {
        return Err(Error::InvalidArgument("families must have k in {1, 2}".into()));
    }
    let reference = broken_transition(sigma, eps, opts.nx)?.balanced();
    let delta = opts.tolerance * reference;
    let canonical = pinned_canonical(sigma, k, r, opts)?;
    let (canonical_sup, ci) = family_sup(&canonical, eps, opts.nx)?;
    let canonical_argmax = canonical.ball_coordinate(ci);
    let canonical_offset = sup_distance(&canonical.graphs[ci], &sigma.graph);

    let ys = sigma.y_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let bumps: Vec<(Vec<[f64; 3]>, f64)> = (0..opts.trials)
        .map(|_| {
            let coeffs = (0..4)
                .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            (coeffs, rng.random_range(0.2..1.0))
        })
        .collect();
    let trials: Vec<AuditTrial> = bumps
        .par_iter()
        .enumerate()
        .map(|(index, (coeffs, amp))| {
            let kind = if index % 2 == 0 { TrialKind::Random } else { TrialKind::Optimized };
            let run = || -> Result<(f64, Vec<f64>)> {
                let mut fam = canonical.clone();
                // smooth bump in y, modulated across B^k
                let bump = |v: &[f64]| -> Vec<f64> {
                    ys.iter()
                        .map(|y| {
                            let mut s = 0.0;
                            for (m, c) in coeffs.iter().enumerate() {
                                let phase = c[2] * std::f64::consts::PI * v.iter().sum::<f64>();
                                s += (c[0] * (m as f64 * y).cos() + c[1] * (m as f64 * y).sin()) * (1.0 + phase.sin()) / (1 + m) as f64;
                            }
                            r * amp * s
                        })
                        .collect()
                };
                fam.perturb_interior(&bump)?;
                if kind == TrialKind::Optimized {
                    optimize_family(&mut fam, eps, opts.nx, opts.optimize_sweeps)?;
                }
                let (sup, i) = family_sup(&fam, eps, opts.nx)?;
                Ok((sup, fam.ball_coordinate(i)))
            };
            match run() {
                Ok((sup, argmax)) => AuditTrial { index, kind, sup: Some(sup), argmax, note: None },
                Err(e) => AuditTrial { index, kind, sup: None, argmax: Vec::new(), note: Some(e.to_string()) },
            }
        })
        .collect();
    let min_sup = trials.iter().filter_map(|t| t.sup).fold(f64::INFINITY, f64::min);
    let kept = trials.iter().filter(|t| t.sup.is_some()).count();
    let passed = kept > 0 && min_sup >= reference - delta && canonical_offset <= eps.max(1e-12);
    Ok(AuditReport {
        eps,
        k,
        r,
        reference,
        delta,
        trials,
        min_sup,
        canonical_sup,
        canonical_argmax,
        canonical_offset,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PalaisSmaleRow {
    pub energy: f64,
    pub gradient_norm: f64,
    pub area: f64,
    /// `|M+_n symmetric-difference M+_{n+1}|` (absent on the last row).
    pub symmetric_difference: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PalaisSmaleReport {
    pub rows: Vec<PalaisSmaleRow>,
    /// Tail symmetric differences below `tol * volume`.
    pub cauchy: bool,
    /// Tail gradient norms non-increasing.
    pub gradient_decreasing: bool,
    pub limit: Option<Polished>,
}

/// Volume between two graphs: `int |P(x_a) - P(x_b)| dy` with `P' = h`.
pub fn symmetric_difference(metric: &WarpedMetric, a: &Hypersurface, b: &Hypersurface) -> f64 {
    let n = a.ny().max(b.ny());
    let period = metric.y_period();
    let ys: Vec<f64> = (0..n).map(|j| period * j as f64 / n as f64).collect();
    let xa = trig_interpolate(&a.positions(), period, &ys);
    let xb = trig_interpolate(&b.positions(), period, &ys);
    xa.iter()
        .zip(&xb)
        .map(|(p, q)| (metric.h_primitive(*p) - metric.h_primitive(*q)).abs())
        .sum::<f64>()
        * period
        / n as f64
}

/// Tabulate energies, gradients, areas and successive symmetric differences;
/// polish the last element when the tail is Cauchy.
pub fn palais_smale_diagnostic(seq: &[Hypersurface], eps: f64, tol: f64) -> Result<PalaisSmaleReport> {
    if seq.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    let metric = seq[0].ambient.metric;
    let evals: Vec<(f64, Pseudogradient)> = seq
        .par_iter()
        .map(|s| evaluate(s, eps, DEFAULT_NX))
        .collect::<Result<_>>()?;
    let rows: Vec<PalaisSmaleRow> = seq
        .iter()
        .enumerate()
        .map(|(i, s)| PalaisSmaleRow {
            energy: evals[i].0,
            gradient_norm: evals[i].1.dual_norm,
            area: crate::geometry::curvature_data(s).area,
            symmetric_difference: seq.get(i + 1).map(|t| symmetric_difference(&metric, s, t)),
        })
        .collect();
    let diffs: Vec<f64> = rows.iter().filter_map(|r| r.symmetric_difference).collect();
    let tail = diffs.len().div_ceil(3);
    let volume = seq[0].ambient.volume();
    let cauchy = diffs[diffs.len() - tail..].iter().all(|d| *d <= tol * volume);
    let grads: Vec<f64> = rows.iter().map(|r| r.gradient_norm).collect();
    let gtail = grads.len().div_ceil(3).max(1);
    let gradient_decreasing = grads[grads.len() - gtail..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let limit = if cauchy {
        let last = seq.last().expect("non-empty");
        broken_transition(last, eps, DEFAULT_NX)
            .and_then(|t| t.glue())
            .and_then(|g| newton_polish(&g))
            .ok()
    } else {
        None
    };
    Ok(PalaisSmaleReport { rows, cauchy, gradient_decreasing, limit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{geodesic_circle, make_warped_torus, Ambient};
    use std::f64::consts::FRAC_PI_2;

    fn testbed(c: f64, ny: usize) -> Hypersurface {
        let m = make_warped_torus(2.0, 0.3).unwrap();
        geodesic_circle(Ambient::centred_strip(m), c, ny).unwrap()
    }

    #[test]
    fn pseudogradient_inequalities_at_random_graphs() {
        let s = testbed(0.0, 8);
        let ys = s.y_grid();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shapes: Vec<Vec<f64>> = (0..20).map(|_| random_shape(&mut rng, &ys, 3)).collect();
        shapes.par_iter().enumerate().for_each(|(i, f)| {
            let g: Vec<f64> = f.iter().map(|v| 0.05 * (1 + i % 4) as f64 * v).collect();
            let p = pseudogradient(&s.with_graph(g).unwrap(), 0.05).unwrap();
            assert!(p.satisfies_inequalities(), "{p:?}");
            assert!(p.dual_norm > 0.0);
        });
    }

    #[test]
    fn pseudogradient_at_minimal_and_tilted_circles() {
        let eps = 0.05;
        let p = pseudogradient(&testbed(0.0, 8), eps).unwrap();
        assert!(p.dual_norm <= eps, "{}", p.dual_norm);
        let p = pseudogradient(&testbed(FRAC_PI_2, 8), eps).unwrap();
        assert!(p.dual_norm > 0.1);
        // -V moves toward smaller h
        assert!(p.direction.iter().all(|v| *v < 0.0));
    }

    #[test]
    fn hausdorff_of_circles() {
        let a = testbed(0.0, 4);
        assert_eq!(hausdorff_distance(&a, &a), 0.0);
        let b = testbed(0.3, 4);
        assert!((hausdorff_distance(&a, &b) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn cutoff_factors() {
        let c = DeformationCutoff { level: 1.0, eta: 0.2, eta_bar: 0.1, radius: 0.1, delta: 0.05, reference: vec![0.0] };
        assert_eq!(c.factor(&[0.0], 1.05, 1.0), 1.0);
        assert_eq!(c.factor(&[0.3], 1.0, 1.0), 0.0);
        assert_eq!(c.factor(&[0.0], 1.5, 1.0), 0.0);
        let mid = c.factor(&[0.175], 1.0, 1.0);
        assert!(mid > 0.0 && mid < 1.0);
        assert_eq!(speed_limit(0.5), 1.0);
        assert_eq!(speed_limit(4.0), 0.25);
    }

    #[test]
    fn descent_from_critical_circle_does_not_move() {
        let s = testbed(0.0, 4);
        let mut opts = DescentOptions::new(0.05);
        opts.stop.gradient_tol = 1e-8;
        let t = descend(&s, &opts).unwrap();
        assert_eq!(t.reason, StopReason::Gradient);
        assert_eq!(t.states.len(), 1);
    }

    #[test]
    fn descent_toward_stable_circle() {
        let m = make_warped_torus(2.0, 0.3).unwrap();
        let s = geodesic_circle(Ambient::shifted_strip(m), 0.8, 4).unwrap();
        let mut opts = DescentOptions::new(0.05);
        opts.stop.max_steps = 12;
        let t = descend(&s, &opts).unwrap();
        assert!(t.monotone());
        assert!(t.states.windows(2).all(|w| w[1].energy < w[0].energy));
        let x = t.last().sigma.positions()[0];
        assert!(x > 1.0, "{x}");
    }

    #[test]
    fn gradient_floor_requires_annulus_and_sees_degeneracy() {
        let s = testbed(0.0, 4);
        assert!(matches!(
            gradient_floor_probe(&s, 0.1, 0.0, 0.05, 4, 1),
            Err(Error::InvalidArgument(_))
        ));
        let good = gradient_floor_probe(&s, 0.1, 0.05, 0.05, 6, 1).unwrap();
        let flat = make_warped_torus(2.0, 0.0).unwrap();
        let f = geodesic_circle(Ambient::centred_strip(flat), 0.0, 4).unwrap();
        let bad = gradient_floor_probe(&f, 0.1, 0.05, 0.05, 6, 1).unwrap();
        assert!(good.mu > 1e-3, "{}", good.mu);
        // the flat floor sits at the discretisation level of the two unequal sides
        assert!(bad.mu < 1e-2 * good.mu, "{} vs {}", bad.mu, good.mu);
    }

    #[test]
    fn equal_endpoints_are_degenerate() {
        let s = testbed(0.0, 4);
        let g = vec![0.3; 4];
        let fam = PathFamily::segment(&s, &g, &g, 5, Radii { r: 0.4, delta: 0.05 }).unwrap();
        let r = mountain_pass(&fam, 0.05, &MountainPassOptions::default()).unwrap();
        assert!(!r.mountain_pass);
        assert_eq!(r.d_eps, r.c_eps);
        assert!(r.saddle.is_none());
    }

    #[test]
    fn escaping_family_is_rejected() {
        let s = testbed(0.0, 4);
        let e = PathFamily::segment(&s, &[-0.6; 4], &[0.6; 4], 5, Radii { r: 0.3, delta: 0.05 });
        assert!(matches!(e, Err(Error::Escaped { .. })));
    }

    #[test]
    fn palais_smale_flags() {
        let a = testbed(0.0, 4);
        let b = testbed(0.3, 4);
        let r = palais_smale_diagnostic(&[a.clone(), a.clone(), a.clone()], 0.05, 1e-6).unwrap();
        assert!(r.cauchy);
        assert!(r.rows[0].gradient_norm <= 0.05);
        assert!(r.limit.is_some_and(|p| p.residual <= 1e-10));
        let r = palais_smale_diagnostic(&[a.clone(), b.clone(), a, b], 0.05, 1e-6).unwrap();
        assert!(!r.cauchy);
        assert!(r.limit.is_none());
    }

    #[test]
    fn audit_with_zero_radius_is_flat() {
        let s = testbed(0.0, 4);
        let opts = AuditOptions { trials: 2, nodes: 5, ..AuditOptions::default() };
        let r = strong_minmax_audit(&s, 1, 0.0, 0.05, &opts).unwrap();
        assert!((r.canonical_sup - r.reference).abs() < 1e-12);
        assert!(r.trials.iter().all(|t| t.sup.is_some_and(|v| (v - r.reference).abs() < 1e-12)));
        assert!(r.passed);
    }
}
