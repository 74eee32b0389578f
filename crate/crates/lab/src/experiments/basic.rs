use super::rel;
use crate::cells;
use crate::config::RunConfig;
use crate::emit::{fmt17, Csv, Record};
use crate::error::{Context, Result};
use crate::manifest::Artifacts;
use crate::run::{base, direction, metric};
use crate::sweep::{ConvergenceTable, Quantity};
use aclab_core::energy::{balanced_energy_with, broken_transition, expansion_residual};
use aclab_core::geometry::{graph_area, jacobi_spectrum, Hypersurface};
use aclab_core::profiles1d::{constants, DoubleWell, ProfileSet, ProfileTable};
use aclab_core::variation::{second_variation_spectrum, variation_report};
use std::f64::consts::{SQRT_2, FRAC_1_SQRT_2};

/// `2 sigma0 * Area`: the sharp-interface limit of the balanced energy.
pub(crate) fn interface_limit(cfg: &RunConfig, sigma: &Hypersurface) -> Result<f64> {
    let area = if cfg.one_d { 2.0 } else { graph_area(&metric(cfg)?, &sigma.positions()) };
    Ok(2.0 * constants().sigma0 * area)
}

pub fn profiles(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let set = art.timed("profile_bvps", || ProfileSet::solve(cfg.z_max, cfg.profile_res)).context("profile BVPs")?;
    let het = ProfileTable::heteroclinic(cfg.z_max, cfg.profile_res);
    art.write("heteroclinic.csv", het.to_csv())?;
    let tables = [&set.omega, &set.rho, &set.tau, &set.kappa];
    for t in tables {
        art.write(&format!("{}.csv", t.kind.name()), t.to_csv())?;
    }
    let k = constants();
    let equipartition = het
        .values
        .iter()
        .zip(&het.derivs)
        .map(|(v, d)| (0.5 * d * d - DoubleWell::value(*v)).abs())
        .fold(0.0, f64::max);
    let mut rec = Record::new("constants")
        .float("sigma0", k.sigma0)
        .float("sigma", k.sigma)
        .float("hprime_sq_integral", k.hprime_sq_integral)
        .float("equipartition", equipartition);
    for t in tables {
        rec = rec.float(&format!("residual_{}", t.kind.name()), t.residual);
    }
    art.write_records("constants.txt", &[rec])?;

    for (name, tol) in [("constants", 1e-12), ("equipartition", 1e-10), ("bvp_residual", 1e-8)] {
        art.tolerance(name, tol);
    }
    let s0 = SQRT_2 / 3.0;
    art.check(
        "sigma0",
        (k.sigma0 - s0).abs() <= 1e-12 && (k.hprime_sq_integral - s0).abs() <= 1e-12,
        format!("sigma0={} quadrature={}", fmt17(k.sigma0), fmt17(k.hprime_sq_integral)),
    );
    art.check("sigma", (k.sigma - FRAC_1_SQRT_2).abs() <= 1e-12, fmt17(k.sigma));
    art.check("equipartition", equipartition <= 1e-10, fmt17(equipartition));
    for t in tables {
        art.check(&format!("residual_{}", t.kind.name()), t.residual <= 1e-8, fmt17(t.residual));
    }
    Ok(())
}

pub fn dirichlet(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let sigma = base(cfg)?;
    let mut csv = Csv::new(&["eps", "side", "energy", "residual", "min", "max", "boundary_slope"]);
    art.tolerance("residual", 1e-10);
    art.tolerance("range", 1e-12);
    for (i, &eps) in cfg.eps.iter().enumerate() {
        let t = art.timed(&format!("dirichlet_{i}"), || broken_transition(&sigma, eps, cfg.res)).context("Dirichlet solve")?;
        for (side, u, slope) in [("plus", &t.plus, &t.slope_plus), ("minus", &t.minus, &t.slope_minus)] {
            let res = u.residual();
            csv.row(cells![eps, side, u.energy(), res, u.min(), u.max(), slope[0]]);
            art.write(&format!("field_{i}_{side}.bin"), u.to_binary())?;
            art.write(&format!("column_{i}_{side}.csv"), u.column_csv(0))?;
            art.check(&format!("residual_{i}_{side}"), res <= 1e-10, fmt17(res));
            // the minus side is stored negated
            let (lo, hi) = if side == "plus" { (u.min(), u.max()) } else { (-u.max(), -u.min()) };
            art.check(
                &format!("range_{i}_{side}"),
                lo >= -1e-12 && hi <= 1.0 + 1e-12,
                format!("|u| in [{}, {}]", fmt17(lo), fmt17(hi)),
            );
        }
    }
    art.write("dirichlet.csv", csv.render())
}

pub fn balanced(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let sigma = base(cfg)?;
    let limit = interface_limit(cfg, &sigma)?;
    let mut csv = Csv::new(&["eps", "energy_plus", "energy_minus", "balanced", "limit", "rel_gap"]);
    let mut gaps = Vec::new();
    for (i, &eps) in cfg.eps.iter().enumerate() {
        let r = art.timed(&format!("balanced_{i}"), || balanced_energy_with(&sigma, eps, cfg.res)).context("balanced energy")?;
        let g = rel(r.balanced, limit);
        gaps.push(g);
        csv.row(cells![eps, r.e_plus, r.e_minus, r.balanced, limit, g]);
    }
    art.write("balanced_energy.csv", csv.render())?;
    art.tolerance("rel_gap", 1e-2);
    let last = *gaps.last().unwrap();
    art.check("limit_gap", last <= 1e-2, format!("relative gap {} at eps {}", fmt17(last), fmt17(*cfg.eps.last().unwrap())));
    if gaps.len() > 1 {
        art.check("gap_decreasing", gaps.windows(2).all(|w| w[1] <= w[0]), "");
    }
    Ok(())
}

pub fn expansion_order(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let sigma = base(cfg)?;
    let mut csv = Csv::new(&["eps", "c0", "c1", "c2", "weighted", "slope", "slope_predicted", "trace_defect"]);
    let mut weighted = Vec::new();
    let mut defects = Vec::new();
    for (i, &eps) in cfg.eps.iter().enumerate() {
        let r = art.timed(&format!("expansion_{i}"), || expansion_residual(&sigma, eps, cfg.res, true)).context("expansion residual")?;
        let w = r.norms.sobolev_sq.sqrt();
        let defect = r.slope * eps * SQRT_2 - 1.0;
        weighted.push(w);
        defects.push(defect);
        csv.row(cells![eps, r.norms.c0, r.norms.c1, r.norms.c2, w, r.slope, r.slope_predicted, defect]);
    }
    art.write("expansion.csv", csv.render())?;
    if cfg.eps.len() >= 3 {
        let table = ConvergenceTable::fit(Quantity::ExpansionResidual, &cfg.eps, &weighted)?;
        art.write("expansion_sweep.csv", table.to_csv())?;
        art.write_records("expansion_sweep.txt", &[Record::new("sweep").text("quantity", "expansion_residual").float("slope", table.slope)])?;
        art.tolerance("slope_min", 2.5);
        art.check("residual_slope", table.slope >= 2.5, format!("slope {}", fmt17(table.slope)));
    }
    Ok(())
}

pub fn variation_check(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let sigma = base(cfg)?;
    let f = direction(&sigma, cfg.mode);
    let mut recs = Vec::new();
    let mut magnitudes = Vec::new();
    art.tolerance("first_rel", 1e-3);
    art.tolerance("second_rel", 1e-2);
    for (i, &eps) in cfg.eps.iter().enumerate() {
        let r = art.timed(&format!("variation_{i}"), || variation_report(&sigma, &f, eps, cfg.res, 1e-3)).context("variation report")?;
        recs.push(Record::new("variation").text("fields", &r.record()));
        art.arbitrate(format!(
            "eps={} first_sign={} second_convention={}",
            fmt17(eps),
            if r.first_sign_matches { "minus-half" } else { "plus-half" },
            r.convention.name()
        ));
        let (abs1, rel1) = r.first_discrepancy();
        // at a critical point both values vanish; the absolute gap is then what counts
        art.check(&format!("first_{i}"), rel1 <= 1e-3 || abs1 <= 1e-9, format!("abs {} rel {}", fmt17(abs1), fmt17(rel1)));
        if let Some((abs2, rel2)) = r.second_discrepancy() {
            art.check(&format!("second_{i}"), rel2 <= 1e-2, format!("abs {} rel {}", fmt17(abs2), fmt17(rel2)));
        }
        magnitudes.push(r.first_analytic);
    }
    art.write_records("variation.txt", &recs)?;
    if cfg.eps.len() >= 3 {
        let rec = match ConvergenceTable::fit(Quantity::FirstVariation, &cfg.eps, &magnitudes) {
            Ok(t) => Record::new("sweep").text("quantity", "first_variation").float("slope", t.slope),
            Err(e) => Record::new("sweep").text("quantity", "first_variation").text("unavailable", &e.to_string()),
        };
        art.write_records("variation_sweep.txt", &[rec])?;
    }
    Ok(())
}

pub fn spectrum(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let sigma = base(cfg)?;
    let sd = art.timed("jacobi", || jacobi_spectrum(&sigma, 5, 256)).context("Jacobi spectrum")?;
    let mut csv = Csv::new(&["k", "eigenvalue"]);
    for (k, l) in sd.eigenvalues.iter().enumerate() {
        csv.row(cells![k, *l]);
    }
    art.write("jacobi.csv", csv.render())?;
    art.write_records(
        "jacobi.txt",
        &[Record::new("jacobi").int("index", sd.index as i64).int("nullity", sd.nullity as i64)],
    )?;
    let s0 = constants().sigma0;
    let mut gram = Csv::new(&["eps", "k", "gram", "target", "rel"]);
    for (i, &eps) in cfg.eps.iter().enumerate() {
        let g = art.timed(&format!("gram_{i}"), || second_variation_spectrum(&sigma, eps, cfg.res, 3)).context("second variation")?;
        let tol = (0.3 * eps.sqrt()).max(0.05);
        art.tolerance(&format!("gram_rel_{i}"), tol);
        for (k, v) in g.iter().enumerate() {
            let target = 2.0 * s0 * sd.eigenvalues[k];
            let r = rel(*v, target);
            gram.row(cells![eps, k, *v, target, r]);
            art.check(&format!("gram_{i}_{k}"), r <= tol, format!("{} vs {}", fmt17(*v), fmt17(target)));
        }
    }
    art.write("gram.csv", gram.render())
}
