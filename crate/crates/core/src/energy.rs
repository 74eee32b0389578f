//! Allen–Cahn energy, broken transitions, the balanced energy and the
//! boundary-layer expansion.
//!
//! Conventions: with `nu = +x`, `M+ = {x < graph}` and `M- = {x > graph}`
//! (swapped when the orientation is flipped). The `M-` solution is stored
//! negated, so gluing gives a sign-changing field whose energy is `B`.
//!
//! Along the inward distance `z` from a geodesic circle `{x = c}` the
//! Laplacian reads `u_zz - H_z u_z` where `H_z` is the expansion rate of the
//! parallel circles, `H_0 = h'(c)/h(c)` on `M+` and `-h'(c)/h(c)` on `M-`, and
//! `dH_z/dz = Ric + |A|^2`. This is the mean curvature entering the
//! boundary-layer expansion of each side.

use crate::elliptic::{
    discretize, discretize_glued, inward_derivatives, solve_dirichlet, Bc, DiscreteDomain, End,
    PhaseField, Region, Resolution, Side,
};
use crate::error::{Error, Result};
use crate::geometry::{curvature_data, AmbientKind, Dim, Hypersurface};
use crate::numerics::{fd_derivative, periodic_derivatives};
use crate::profiles1d::{apply_cutoff, CutoffProfile, ProfileSet, SIGMA0};
use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, OnceLock};

/// Nodes per column on each side when no explicit grid is given; with the
/// graded map this is about 14 nodes per `eps` whatever `eps` is.
pub const DEFAULT_NX: usize = 161;

/// Cutoff exponent used for the expansion profiles.
pub const CUTOFF_ELL: f64 = 6.0;

fn profiles() -> &'static ProfileSet {
    static SET: OnceLock<ProfileSet> = OnceLock::new();
    SET.get_or_init(ProfileSet::standard)
}

/// `E_eps(u)` over the field's domain.
pub fn allen_cahn_energy(u: &PhaseField) -> f64 {
    u.energy()
}

/// The two Dirichlet regions of `sigma` and, for each, the ends lying on `sigma`.
fn side_regions(sigma: &Hypersurface) -> Result<[(Region, Vec<End>); 2]> {
    let amb = sigma.ambient;
    let (plus, minus) = match amb.kind {
        AmbientKind::NeumannStrip => {
            let g = sigma.positions();
            if g.iter().any(|x| !(amb.x_lo < *x && *x < amb.x_hi)) {
                return Err(Error::OutsideChart {
                    sup: sigma.sup_offset(),
                    limit: sigma.chart_height(),
                });
            }
            let below = (
                Region {
                    lower: Side::wall(amb.x_lo, Bc::Neumann),
                    upper: Side::graph(g.clone(), Bc::Dirichlet),
                },
                vec![End::Upper],
            );
            let above = (
                Region {
                    lower: Side::graph(g, Bc::Dirichlet),
                    upper: Side::wall(amb.x_hi, Bc::Neumann),
                },
                vec![End::Lower],
            );
            (below, above)
        }
        AmbientKind::Circle => {
            let p = sigma.base;
            let q = sigma
                .partner
                .ok_or_else(|| Error::InvalidArgument("circle hypersurface needs two points".into()))?;
            let arc = |a: f64, b: f64| Region {
                lower: Side::wall(a, Bc::Dirichlet),
                upper: Side::wall(b, Bc::Dirichlet),
            };
            // trace order is always [p, q]
            (
                (arc(p, q), vec![End::Lower, End::Upper]),
                (arc(q, p + 2.0 * PI), vec![End::Upper, End::Lower]),
            )
        }
    };
    Ok(if sigma.orientation > 0.0 {
        [plus, minus]
    } else {
        [minus, plus]
    })
}

/// The glued pair of one-sided Dirichlet solutions.
#[derive(Debug, Clone)]
pub struct BrokenTransition {
    pub sigma: Hypersurface,
    pub eps: f64,
    pub nx: usize,
    /// Positive solution on `M+`.
    pub plus: PhaseField,
    /// Negated positive solution on `M-`.
    pub minus: PhaseField,
    /// `|grad u+|` on `sigma` (per column, or per point on the circle).
    /// Equals `-du+/dnu`.
    pub slope_plus: Vec<f64>,
    /// `|grad u-|` on `sigma`; equals `-du-/dnu`.
    pub slope_minus: Vec<f64>,
    /// Second inward derivative of `|u+|` along the columns at `sigma`
    /// (the second normal derivative for geodesic circles).
    pub curv_plus: Vec<f64>,
    pub curv_minus: Vec<f64>,
    /// Column derivatives `d|u+|/ds` at `sigma`, without the graph-slope factor.
    pub column_slope_plus: Vec<f64>,
    pub column_slope_minus: Vec<f64>,
    /// Column ends lying on `sigma` in each side's grid.
    pub ends_plus: Vec<End>,
    pub ends_minus: Vec<End>,
}

fn side_traces(d: &DiscreteDomain, values: &[f64], ends: &[End]) -> (Vec<f64>, Vec<f64>) {
    let mut s = Vec::new();
    let mut c = Vec::new();
    for &e in ends {
        for [a, b] in inward_derivatives(d, values, e) {
            s.push(a);
            c.push(b);
        }
    }
    (s, c)
}

/// Solve both Dirichlet problems of `sigma` on `nx` graded nodes per column.
pub fn broken_transition(sigma: &Hypersurface, eps: f64, nx: usize) -> Result<BrokenTransition> {
    let [(rp, ep), (rm, em)] = side_regions(sigma)?;
    let metric = sigma.ambient.metric;
    let res = Resolution::graded(nodes_for(nx, ep.len()), sigma.ny(), eps);
    let dp = Arc::new(discretize(&metric, &rp, &res)?);
    let res = Resolution::graded(nodes_for(nx, em.len()), sigma.ny(), eps);
    let dm = Arc::new(discretize(&metric, &rm, &res)?);
    let (plus, minus) = if sigma.ny() > 1 && rayon::current_num_threads() > 1 {
        rayon::join(|| solve_dirichlet(dp.clone(), eps), || solve_dirichlet(dm.clone(), eps))
    } else {
        (solve_dirichlet(dp.clone(), eps), solve_dirichlet(dm.clone(), eps))
    };
    let plus = plus?;
    let mut minus = minus?;
    let (csp, cp) = side_traces(&dp, &plus.values, &ep);
    let (csm, cm) = side_traces(&dm, &minus.values, &em);
    minus.values.iter_mut().for_each(|v| *v = -*v);
    let factor = slope_factor(sigma);
    Ok(BrokenTransition {
        sigma: sigma.clone(),
        eps,
        nx,
        slope_plus: csp.iter().zip(&factor).map(|(a, f)| a * f).collect(),
        slope_minus: csm.iter().zip(&factor).map(|(a, f)| a * f).collect(),
        curv_plus: cp,
        curv_minus: cm,
        column_slope_plus: csp,
        column_slope_minus: csm,
        ends_plus: ep,
        ends_minus: em,
        plus,
        minus,
    })
}

/// Columns with two Dirichlet ends get `nx` nodes per end.
fn nodes_for(nx: usize, ends: usize) -> usize {
    (nx - 1) * ends.max(1) + 1
}

/// `|grad u| / |u_s|` on a graph where `u` vanishes: `sqrt(1 + g'^2 / h^2)`.
fn slope_factor(sigma: &Hypersurface) -> Vec<f64> {
    match sigma.dim() {
        Dim::One => vec![1.0; 2],
        Dim::Two => {
            let m = sigma.ambient.metric;
            let g = sigma.positions();
            let (d1, _) = periodic_derivatives(&g, m.y_period());
            g.iter()
                .zip(&d1)
                .map(|(x, p)| (1.0 + (p / m.h(*x)).powi(2)).sqrt())
                .collect()
        }
    }
}

impl BrokenTransition {
    pub fn energy_plus(&self) -> f64 {
        self.plus.energy()
    }

    pub fn energy_minus(&self) -> f64 {
        self.minus.energy()
    }

    pub fn balanced(&self) -> f64 {
        self.energy_plus() + self.energy_minus()
    }

    /// The glued field on the whole strip.
    pub fn glue(&self) -> Result<PhaseField> {
        let amb = self.sigma.ambient;
        if amb.kind != AmbientKind::NeumannStrip {
            return Err(Error::Unsupported("gluing on the circle".into()));
        }
        let metric = amb.metric;
        let res = Resolution::graded(self.nx, self.sigma.ny(), self.eps);
        let d = discretize_glued(&metric, amb.x_lo, &self.sigma.positions(), amb.x_hi, &res)?;
        let ny = self.sigma.ny();
        let (low, high) = if self.sigma.orientation > 0.0 {
            (&self.plus.values, &self.minus.values)
        } else {
            (&self.minus.values, &self.plus.values)
        };
        let mut v = low.clone();
        v.extend_from_slice(&high[ny..]);
        Ok(PhaseField::new(self.eps, Arc::new(d), v))
    }
}

/// Balanced energy with the area comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub eps: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub balanced: f64,
    pub area: f64,
    pub reference: f64,
    pub gap: f64,
}

impl EnergyReport {
    pub fn from_transition(t: &BrokenTransition) -> Self {
        let area = curvature_data(&t.sigma).area;
        let (e_plus, e_minus) = (t.energy_plus(), t.energy_minus());
        let balanced = e_plus + e_minus;
        let reference = 2.0 * SIGMA0 * area;
        EnergyReport {
            eps: t.eps,
            e_plus,
            e_minus,
            balanced,
            area,
            reference,
            gap: balanced - reference,
        }
    }
}

pub fn balanced_energy(sigma: &Hypersurface, eps: f64) -> Result<EnergyReport> {
    balanced_energy_with(sigma, eps, DEFAULT_NX)
}

pub fn balanced_energy_with(sigma: &Hypersurface, eps: f64, nx: usize) -> Result<EnergyReport> {
    Ok(EnergyReport::from_transition(&broken_transition(sigma, eps, nx)?))
}

/// Expansion rate `H_0` of each side of a geodesic circle, `[M+, M-]`.
pub fn side_curvatures(sigma: &Hypersurface) -> [f64; 2] {
    let m = sigma.ambient.metric;
    let x = sigma.positions()[0];
    let hp = sigma.orientation * m.dh(x) / m.h(x);
    [hp, -hp]
}

/// Predicted inward slope `sigma/eps - (2/3) H` at the boundary.
pub fn predicted_slope(eps: f64, side_curvature: f64) -> f64 {
    1.0 / (eps * SQRT_2) - 2.0 / 3.0 * side_curvature
}

/// Predicted inward second derivative `H/(eps sqrt 2) - (2/3) H^2`.
pub fn predicted_curvature(eps: f64, side_curvature: f64) -> f64 {
    side_curvature / (eps * SQRT_2) - 2.0 / 3.0 * side_curvature.powi(2)
}

/// Cut-off profiles at a given `eps`.
#[derive(Debug, Clone)]
pub struct ExpansionProfiles {
    pub het: CutoffProfile,
    pub omega: CutoffProfile,
    pub rho: CutoffProfile,
    pub tau: CutoffProfile,
    pub kappa: CutoffProfile,
}

impl ExpansionProfiles {
    pub fn new(eps: f64) -> Result<Self> {
        let set = profiles();
        let het = crate::profiles1d::ProfileTable::heteroclinic(set.omega.z_max, 64);
        Ok(ExpansionProfiles {
            het: apply_cutoff(&het, eps, CUTOFF_ELL, None)?,
            omega: apply_cutoff(&set.omega, eps, CUTOFF_ELL, Some(&set.omega))?,
            rho: apply_cutoff(&set.rho, eps, CUTOFF_ELL, Some(&set.omega))?,
            tau: apply_cutoff(&set.tau, eps, CUTOFF_ELL, Some(&set.omega))?,
            kappa: apply_cutoff(&set.kappa, eps, CUTOFF_ELL, Some(&set.omega))?,
        })
    }

    /// Value and first two `z`-derivatives of the expansion at distance `z`
    /// from a circle whose side has expansion rate `hc` and `Ric = ric`.
    pub fn eval(&self, eps: f64, hc: f64, ric: f64, z: f64) -> [f64; 3] {
        let h = self.het.eval_scaled(z);
        let w = self.omega.eval_scaled(z);
        let t = self.tau.eval_scaled(z);
        let r = self.rho.eval_scaled(z);
        let k = self.kappa.eval_scaled(z);
        let c2 = ric + hc * hc;
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = h[i] + eps * hc * w[i] + eps * eps * (c2 * t[i] + hc * hc * (r[i] + 0.5 * k[i]));
        }
        out
    }
}

/// The expansion evaluated on the nodes of both sides: `[M+, M-]`, the
/// `M-` field negated like the solver output.
pub fn expansion_predict(sigma: &Hypersurface, eps: f64, nx: usize) -> Result<[PhaseField; 2]> {
    let t = prediction_domains(sigma, eps, nx)?;
    let prof = ExpansionProfiles::new(eps)?;
    let hs = side_curvatures_any(sigma);
    let ric = ricci_any(sigma);
    let make = |k: usize, d: &Arc<DiscreteDomain>| {
        let sign = if k == 0 { 1.0 } else { -1.0 };
        let z = distance_to_sigma(d);
        let v = z.iter().map(|z| sign * prof.eval(eps, hs[k], ric, *z)[0]).collect();
        PhaseField::new(eps, d.clone(), v)
    };
    Ok([make(0, &t[0]), make(1, &t[1])])
}

fn side_curvatures_any(sigma: &Hypersurface) -> [f64; 2] {
    match sigma.dim() {
        Dim::One => [0.0, 0.0],
        Dim::Two => side_curvatures(sigma),
    }
}

fn ricci_any(sigma: &Hypersurface) -> f64 {
    match sigma.dim() {
        Dim::One => 0.0,
        Dim::Two => sigma.ambient.metric.gauss_curvature(sigma.positions()[0]),
    }
}

fn prediction_domains(sigma: &Hypersurface, eps: f64, nx: usize) -> Result<[Arc<DiscreteDomain>; 2]> {
    if sigma.graph.iter().any(|v| *v != sigma.graph[0]) {
        return Err(Error::Unsupported(
            "expansion on non-circular hypersurfaces (Fermi charts are translations only for circles)".into(),
        ));
    }
    let flat = Hypersurface {
        graph: vec![sigma.graph[0]],
        ..sigma.clone()
    };
    let [(rp, ep), (rm, em)] = side_regions(&flat)?;
    let m = sigma.ambient.metric;
    let rpp = Resolution::graded(nodes_for(nx, ep.len()), 1, eps);
    let rmm = Resolution::graded(nodes_for(nx, em.len()), 1, eps);
    Ok([Arc::new(discretize(&m, &rp, &rpp)?), Arc::new(discretize(&m, &rm, &rmm)?)])
}

/// Distance to the nearest Dirichlet end of the (single) column.
fn distance_to_sigma(d: &DiscreteDomain) -> Vec<f64> {
    let col = d.column(0);
    let (a, b) = (col[0], col[d.nx - 1]);
    col.iter()
        .map(|x| {
            let mut z = f64::INFINITY;
            if d.lower_bc == Bc::Dirichlet {
                z = z.min(x - a);
            }
            if d.upper_bc == Bc::Dirichlet {
                z = z.min(b - x);
            }
            z
        })
        .collect()
}

/// Weighted norms of a field: `eps^k sup |D^k f|` for `k <= 2`, and the
/// squared weighted Sobolev value `eps |f|^2 + eps^3 |grad f|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNorms {
    pub eps: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub sobolev_sq: f64,
}

impl WeightedNorms {
    /// `C^2_eps` norm without the Hölder seminorm.
    pub fn c2_total(&self) -> f64 {
        self.c0 + self.c1 + self.c2
    }

    fn combine(self, other: Self) -> Self {
        WeightedNorms {
            eps: self.eps,
            c0: self.c0.max(other.c0),
            c1: self.c1.max(other.c1),
            c2: self.c2.max(other.c2),
            sobolev_sq: self.sobolev_sq + other.sobolev_sq,
        }
    }
}

/// Weighted norms of nodal values on a single-column domain.
pub fn weighted_norms(d: &DiscreteDomain, eps: f64, f: &[f64]) -> WeightedNorms {
    let x = d.column(0);
    let n = x.len();
    let (mut c0, mut c1, mut c2) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        let lo = i.saturating_sub(2).min(n.saturating_sub(5));
        let xs = &x[lo..lo + 5.min(n)];
        let fs = &f[lo..lo + 5.min(n)];
        c0 = c0.max(f[i].abs());
        c1 = c1.max(fd_derivative(x[i], xs, fs, 1).abs());
        c2 = c2.max(fd_derivative(x[i], xs, fs, 2).abs());
    }
    let kf = crate::elliptic::apply_stiffness(d, f);
    let grad: f64 = f.iter().zip(&kf).map(|(a, b)| a * b).sum();
    let l2: f64 = f.iter().zip(&d.mass).map(|(a, m)| a * a * m).sum();
    WeightedNorms {
        eps,
        c0,
        c1: eps * c1,
        c2: eps * eps * c2,
        sobolev_sq: eps * l2 + eps.powi(3) * grad,
    }
}

/// Solver minus expansion on both sides of a circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionResidual {
    pub eps: f64,
    pub norms: WeightedNorms,
    /// Inward boundary slope of the `M+` solution and its prediction.
    pub slope: f64,
    pub slope_predicted: f64,
}

/// Weighted norms of `solution - prediction`. With `richardson`, solutions
/// on `nx` and `2 nx - 1` nodes are combined to cancel the `O(h^2)` error.
pub fn expansion_residual(sigma: &Hypersurface, eps: f64, nx: usize, richardson: bool) -> Result<ExpansionResidual> {
    let coarse = prediction_domains(sigma, eps, nx)?;
    let pred = expansion_predict(sigma, eps, nx)?;
    let mut sol = Vec::with_capacity(2);
    for k in 0..2 {
        let u = solve_dirichlet(coarse[k].clone(), eps)?.values;
        let v = if richardson {
            let fine = prediction_domains(sigma, eps, 2 * nx - 1)?;
            let uf = solve_dirichlet(fine[k].clone(), eps)?.values;
            u.iter()
                .enumerate()
                .map(|(i, a)| (4.0 * uf[2 * i] - a) / 3.0)
                .collect::<Vec<_>>()
        } else {
            u
        };
        sol.push(v);
    }
    let mut norms: Option<WeightedNorms> = None;
    for k in 0..2 {
        let sign = if k == 0 { 1.0 } else { -1.0 };
        let r: Vec<f64> = sol[k]
            .iter()
            .zip(&pred[k].values)
            .map(|(a, b)| sign * a - b)
            .collect();
        let w = weighted_norms(&coarse[k], eps, &r);
        norms = Some(match norms {
            None => w,
            Some(prev) => prev.combine(w),
        });
    }
    let d = &coarse[0];
    let ends = side_regions(&Hypersurface {
        graph: vec![sigma.graph[0]],
        ..sigma.clone()
    })?[0]
        .1
        .clone();
    let slope = inward_derivatives(d, &sol[0], ends[0])[0][0];
    Ok(ExpansionResidual {
        eps,
        norms: norms.expect("two sides"),
        slope,
        slope_predicted: predicted_slope(eps, side_curvatures_any(sigma)[0]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{geodesic_circle, make_warped_torus, point_pair, Ambient};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn energy_of_constants_and_profile() {
        let metric = make_warped_torus(2.0, 0.0).unwrap();
        let region = Region {
            lower: Side::wall(-PI, Bc::Neumann),
            upper: Side::wall(PI, Bc::Neumann),
        };
        let d = Arc::new(discretize(&metric, &region, &Resolution::uniform(65, 8)).unwrap());
        let eps = 0.1;
        assert_eq!(allen_cahn_energy(&PhaseField::constant(eps, d.clone(), 1.0)), 0.0);
        let zero = allen_cahn_energy(&PhaseField::constant(eps, d.clone(), 0.0));
        let expect = (2.0 * PI) * (2.0 * PI) * 2.0 / (4.0 * eps);
        assert!((zero - expect).abs() < 1e-9 * expect);

        let line = crate::geometry::Ambient::flat_circle().metric;
        let e = 0.05;
        let region = Region {
            lower: Side::wall(-40.0 * e, Bc::Neumann),
            upper: Side::wall(40.0 * e, Bc::Neumann),
        };
        let d = Arc::new(discretize(&line, &region, &Resolution::uniform(40001, 1)).unwrap());
        let v = d.x.iter().map(|x| (x / (e * SQRT_2)).tanh()).collect();
        let en = allen_cahn_energy(&PhaseField::new(e, d, v));
        assert!((en - 2.0 * SIGMA0).abs() < 1e-6, "{en}");
    }

    #[test]
    fn circle_balanced_energy() {
        let sigma = point_pair(0.0, PI).unwrap();
        let t = broken_transition(&sigma, 0.02, DEFAULT_NX).unwrap();
        let b = t.balanced();
        assert!((b / (4.0 * SIGMA0) - 1.0).abs() < 0.01, "{b}");
        for s in t.slope_plus.iter().chain(&t.slope_minus) {
            assert!((s * 0.02 * SQRT_2 - 1.0).abs() < 0.02);
        }
        let r = EnergyReport::from_transition(&t);
        assert!((r.reference - 4.0 * SIGMA0).abs() < 1e-15);
    }

    #[test]
    fn transition_vanishes_on_sigma_and_flips() {
        let metric = make_warped_torus(2.0, 0.3).unwrap();
        let s0 = geodesic_circle(Ambient::centred_strip(metric), 0.0, 1).unwrap();
        let t = broken_transition(&s0, 0.05, DEFAULT_NX).unwrap();
        let g = t.glue().unwrap();
        let i = g.domain.interface.unwrap();
        assert_eq!(g.values[i], 0.0);
        assert!(t.plus.min() >= 0.0 && t.minus.max() <= 0.0);
        assert!((g.energy() - t.balanced()).abs() < 1e-9 * t.balanced());
        let f = broken_transition(&s0.flipped(), 0.05, DEFAULT_NX).unwrap();
        for (a, b) in f.plus.values.iter().zip(&t.minus.values) {
            assert_eq!(*a, -b);
        }
        assert!((f.balanced() - t.balanced()).abs() < 1e-12);
    }

    #[test]
    fn balanced_energy_symmetry() {
        let metric = make_warped_torus(2.0, 0.3).unwrap();
        let amb = Ambient::centred_strip(metric);
        let a = balanced_energy(&geodesic_circle(amb, 0.4, 1).unwrap(), 0.05).unwrap();
        let b = balanced_energy(&geodesic_circle(amb, -0.4, 1).unwrap(), 0.05).unwrap();
        assert!((a.balanced - b.balanced).abs() < 1e-8);
        let s0 = balanced_energy(&geodesic_circle(amb, 0.0, 1).unwrap(), 0.05).unwrap();
        assert!(s0.gap.abs() < 0.01 * s0.reference);
    }

    #[test]
    fn expansion_on_flat_and_warped_circles() {
        let flat = make_warped_torus(2.0, 0.0).unwrap();
        let s = geodesic_circle(Ambient::centred_strip(flat), 0.0, 1).unwrap();
        let r = expansion_residual(&s, 0.05, 801, true).unwrap();
        assert!(r.norms.c0 <= 1e-6, "{:?}", r.norms);

        let metric = make_warped_torus(2.0, 0.3).unwrap();
        let half = geodesic_circle(Ambient::centred_strip(metric), FRAC_PI_2, 1).unwrap();
        let [hp, hm] = side_curvatures(&half);
        assert!((hp + 0.15).abs() < 1e-15 && (hm - 0.15).abs() < 1e-15);
        let r = expansion_residual(&half, 0.05, 401, true).unwrap();
        assert!((r.slope - r.slope_predicted).abs() < 0.05 * 0.15 + 0.01, "{r:?}");
    }
}
