use super::basic::interface_limit;
use super::rel;
use crate::cells;
use crate::config::RunConfig;
use crate::emit::{fmt17, Csv, Record};
use crate::error::{Context, LabError, Result};
use crate::manifest::Artifacts;
use crate::run::{base, metric};
use crate::sweep::{ConvergenceTable, Quantity};
use aclab_core::energy::{balanced_energy_with, DEFAULT_NX};
use aclab_core::geometry::{geodesic_circle, make_warped_torus, Ambient, Hypersurface};
use aclab_core::minmax::{
    descend as run_descent, evaluate, gradient_floor_probe, mountain_pass as run_mountain_pass,
    palais_smale_diagnostic, strong_minmax_audit, AuditOptions, DeformationCutoff, DescentOptions,
    MountainPassOptions, PathFamily, Radii, StopReason,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sup_offset(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn mountain_pass(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let sigma = base(cfg)?;
    let limit = interface_limit(cfg, &sigma)?;
    let ys = sigma.y_grid();
    let n = sigma.ny();
    let off = cfg.r - cfg.delta;
    let radii = Radii { r: cfg.r, delta: cfg.delta };
    let bump: Vec<f64> = ys.iter().map(|y| 0.12 + 0.06 * (y.cos() + 0.5 * (2.0 * y).sin())).collect();
    let opts = MountainPassOptions { nx: cfg.res, ..MountainPassOptions::default() };
    for (name, tol) in [("d_vs_balanced", 1e-2), ("saddle_residual", 1e-10), ("hausdorff", 0.05)] {
        art.tolerance(name, tol);
    }
    let mut recs = Vec::new();
    let mut d_values = Vec::new();
    for (i, &eps) in cfg.eps.iter().enumerate() {
        let mut fam = PathFamily::segment(&sigma, &vec![-off; n], &vec![off; n], cfg.m, radii).context("initial path")?;
        fam.perturb_interior(&|_| bump.clone()).context("initial path")?;
        let r = art.timed(&format!("mountain_pass_{i}"), || run_mountain_pass(&fam, eps, &opts)).context("mountain pass")?;
        let b0 = balanced_energy_with(&sigma, eps, cfg.res).context("balanced energy")?.balanced;

        let mut it = Csv::new(&["iter", "d_estimate", "max_gradient", "argmax", "argmax_gradient"]);
        for l in &r.log {
            it.row(cells![l.iter, l.d_estimate, l.max_gradient, l.argmax, l.argmax_gradient]);
        }
        art.write(&format!("iterations_{i}.csv"), it.render())?;
        art.write(&format!("argmax_{i}.csv"), r.argmax_graph.to_csv())?;
        let (residual, morse) = match &r.saddle {
            Some(p) => {
                art.write(&format!("saddle_{i}.bin"), p.field.to_binary())?;
                (p.residual, p.morse_index)
            }
            None => (f64::NAN, None),
        };
        let hd = r.hausdorff.unwrap_or(f64::NAN);
        recs.push(
            Record::new("minmax")
                .float("eps", eps)
                .float("d_eps", r.d_eps)
                .float("c_eps", r.c_eps)
                .float("balanced_sigma", b0)
                .float("limit", limit)
                .float("gradient_norm", r.gradient_norm)
                .float("hausdorff", hd)
                .float("saddle_residual", residual)
                .int("morse_index", morse.map_or(-1, |m| m as i64))
                .int("iterations", r.iterations as i64)
                .flag("converged", r.converged)
                .flag("mountain_pass", r.mountain_pass),
        );
        art.check(&format!("mountain_pass_{i}"), r.mountain_pass && r.converged, format!("iterations {}", r.iterations));
        art.check(&format!("d_vs_balanced_{i}"), rel(r.d_eps, b0) <= 1e-2, format!("{} vs {}", fmt17(r.d_eps), fmt17(b0)));
        art.check(&format!("saddle_residual_{i}"), residual <= 1e-10, fmt17(residual));
        art.check(&format!("morse_index_{i}"), morse == Some(1), format!("{morse:?}"));
        art.check(&format!("hausdorff_{i}"), hd <= 0.05, fmt17(hd));
        d_values.push(r.d_eps);
    }
    art.write_records("minmax.txt", &recs)?;
    if d_values.len() > 1 {
        let gaps: Vec<f64> = d_values.iter().map(|d| d - limit).collect();
        let monotone = gaps.windows(2).all(|w| w[1].abs() < w[0].abs());
        art.check("d_monotone_to_limit", monotone, gaps.iter().map(|g| fmt17(*g)).collect::<Vec<_>>().join(";"));
        if gaps.len() >= 3 {
            let rec = match ConvergenceTable::fit(Quantity::MinMaxGap, &cfg.eps, &gaps) {
                Ok(t) => {
                    art.write("minmax_gap.csv", t.to_csv())?;
                    Record::new("sweep").text("quantity", "minmax_gap").float("slope", t.slope)
                }
                Err(e) => Record::new("sweep").text("quantity", "minmax_gap").text("unavailable", &e.to_string()),
            };
            art.write_records("minmax_sweep.txt", &[rec])?;
        }
    }
    Ok(())
}

pub fn strong_minmax(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let sigma = base(cfg)?;
    let opts = AuditOptions { trials: cfg.trials, seed: cfg.seed, nx: cfg.res, ..AuditOptions::default() };
    art.tolerance("audit_relative", opts.tolerance);
    for (i, &eps) in cfg.eps.iter().enumerate() {
        let r = art.timed(&format!("audit_{i}"), || strong_minmax_audit(&sigma, 1, cfg.r, eps, &opts)).context("strong min-max audit")?;
        let mut csv = Csv::new(&["trial", "kind", "sup", "argmax", "note"]);
        for t in &r.trials {
            let arg: Vec<String> = t.argmax.iter().map(|v| fmt17(*v)).collect();
            csv.row(cells![
                t.index,
                t.kind.name(),
                t.sup.unwrap_or(f64::NAN),
                arg.join(";").as_str(),
                t.note.as_deref().unwrap_or("").replace(',', ";").as_str()
            ]);
        }
        art.write(&format!("audit_{i}.csv"), csv.render())?;
        art.write_records(
            &format!("audit_{i}.txt"),
            &[Record::new("audit")
                .float("eps", eps)
                .float("r", r.r)
                .float("reference", r.reference)
                .float("delta", r.delta)
                .float("min_sup", r.min_sup)
                .float("canonical_sup", r.canonical_sup)
                .float("canonical_offset", r.canonical_offset)
                .flag("passed", r.passed)],
        )?;
        art.check(
            &format!("audit_{i}"),
            r.passed,
            format!("min sup {} >= {} - {}", fmt17(r.min_sup), fmt17(r.reference), fmt17(r.delta)),
        );
        let argmax = r.canonical_argmax.iter().map(|v| v.abs()).fold(0.0, f64::max);
        art.check(&format!("canonical_argmax_{i}"), argmax <= 4.0 * eps, format!("|v| {}", fmt17(argmax)));
    }
    Ok(())
}

/// Starts in the band `|B - c| <= eta_bar` inside the `r`-ball: small
/// translations plus a low oscillation, drawn by rejection.
fn band_starts(
    sigma: &Hypersurface,
    eps: f64,
    nx: usize,
    level: f64,
    eta_bar: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(Hypersurface, f64)>> {
    let ys = sigma.y_grid();
    let mut out = Vec::new();
    for _ in 0..200 * count {
        if out.len() == count {
            break;
        }
        let shift = rng.random_range(0.002..0.012) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let (amp, k, phase) = (rng.random_range(-0.01..0.01), rng.random_range(1..3) as f64, rng.random_range(0.0..6.3));
        let g: Vec<f64> = ys.iter().zip(&sigma.graph).map(|(y, g0)| g0 + shift + amp * (k * y + phase).cos()).collect();
        let s = sigma.with_graph(g).context("start graph")?;
        let (e, _) = evaluate(&s, eps, nx).context("start energy")?;
        if (e - level).abs() <= eta_bar {
            out.push((s, e));
        }
    }
    if out.len() < count {
        return Err(LabError::Invalid(format!("found {} of {count} starts in the energy band", out.len())));
    }
    Ok(out)
}

pub fn descend(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let sigma = base(cfg)?;
    let eps = cfg.eps[0];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let level = balanced_energy_with(&sigma, eps, DEFAULT_NX).context("critical level")?.balanced;
    let floor = art
        .timed("gradient_floor", || gradient_floor_probe(&sigma, cfg.r, cfg.delta, eps, 8, cfg.seed))
        .context("gradient floor")?;
    let flat_metric = make_warped_torus(cfg.a, 0.0).context("flat control")?;
    let flat = geodesic_circle(Ambient::centred_strip(flat_metric), 0.0, cfg.ny).context("flat control")?;
    let flat_floor = art
        .timed("flat_floor", || gradient_floor_probe(&flat, cfg.r, cfg.delta, eps, 8, cfg.seed))
        .context("flat gradient floor")?;
    let mut fl = Csv::new(&["testbed", "sample", "sup", "energy", "gradient_norm"]);
    for (name, f) in [("warped", &floor), ("flat", &flat_floor)] {
        for (i, s) in f.samples.iter().enumerate() {
            fl.row(cells![name, i, s.sup, s.energy, s.gradient_norm]);
        }
    }
    art.write("gradient_floor.csv", fl.render())?;
    let ratio = flat_floor.mu / floor.mu;
    art.tolerance("flat_floor_ratio", 1e-2);
    art.check("floor_positive", floor.mu > 0.0, fmt17(floor.mu));
    art.check("flat_floor_collapses", ratio <= 1e-2, format!("ratio {}", fmt17(ratio)));

    let eta_bar = 0.4 * floor.mu * floor.mu;
    let cutoff = DeformationCutoff {
        level,
        eta: 2.0 * eta_bar,
        eta_bar,
        radius: cfg.r,
        delta: cfg.delta,
        reference: sigma.graph.clone(),
    };
    let mut opts = DescentOptions::new(eps);
    opts.nx = cfg.res;
    opts.cutoff = Some(cutoff);
    opts.stop.energy_floor = Some(level - eta_bar);
    opts.stop.max_steps = cfg.steps;
    art.tolerance("eta_bar", eta_bar);
    let starts = band_starts(&sigma, eps, cfg.res, level, eta_bar, cfg.trials, &mut rng)?;

    let mut traj = Csv::new(&["start", "step", "energy", "gradient_norm", "cutoff", "speed", "step_size", "sup"]);
    let mut summary = Csv::new(&["start", "reason", "steps", "energy_start", "energy_end", "sup_end", "monotone", "reached"]);
    for (k, (s, e0)) in starts.iter().enumerate() {
        let t = art.timed(&format!("descent_{k}"), || run_descent(s, &opts)).context("descent")?;
        for st in &t.states {
            let sup = sup_offset(&st.sigma.positions(), &sigma.positions());
            traj.row(cells![k, st.step, st.energy, st.pseudo.dual_norm, st.cutoff, st.speed, st.step_size, sup]);
        }
        let last = t.last();
        let sup = sup_offset(&last.sigma.positions(), &sigma.positions());
        let reached = t.reason == StopReason::EnergyFloor && last.energy <= level - eta_bar && sup <= cfg.r + cfg.delta;
        summary.row(cells![k, t.reason.name(), t.states.len() - 1, *e0, last.energy, sup, t.monotone(), reached]);
        art.check(&format!("descent_{k}_monotone"), t.monotone(), "");
        art.check(&format!("descent_{k}_reached"), reached, format!("{} after {} steps", t.reason.name(), t.states.len() - 1));
    }
    art.write("descent.csv", traj.render())?;
    art.write("descent_summary.csv", summary.render())?;
    art.write_records(
        "descent.txt",
        &[Record::new("deformation")
            .float("eps", eps)
            .float("level", level)
            .float("mu", floor.mu)
            .float("flat_mu", flat_floor.mu)
            .float("eta_bar", eta_bar)
            .int("starts", starts.len() as i64)],
    )
}

pub fn diagnose(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let sigma = base(cfg)?;
    let eps = cfg.eps[0];
    let ys = sigma.y_grid();
    let _ = metric(cfg)?;
    // a sequence closing in on the base circle
    let seq: Vec<Hypersurface> = (0..16)
        .map(|j| {
            let a = cfg.r * 0.5f64.powi(j);
            sigma.with_graph(ys.iter().zip(&sigma.graph).map(|(y, g)| g + a * y.cos()).collect())
        })
        .collect::<aclab_core::Result<_>>()
        .context("sequence")?;
    let tol = 1e-4;
    art.tolerance("cauchy", tol);
    let rep = art.timed("palais_smale", || palais_smale_diagnostic(&seq, eps, tol)).context("Palais-Smale diagnostic")?;
    let mut csv = Csv::new(&["n", "energy", "gradient_norm", "area", "symmetric_difference"]);
    for (i, r) in rep.rows.iter().enumerate() {
        csv.row(cells![i, r.energy, r.gradient_norm, r.area, r.symmetric_difference.unwrap_or(f64::NAN)]);
    }
    art.write("palais_smale.csv", csv.render())?;
    let mut ok_ineq = true;
    for s in &seq {
        let (_, p) = evaluate(s, eps, cfg.res).context("pseudogradient")?;
        ok_ineq &= p.satisfies_inequalities();
    }
    let residual = rep.limit.as_ref().map_or(f64::NAN, |p| p.residual);
    art.write_records(
        "palais_smale.txt",
        &[Record::new("palais_smale")
            .float("eps", eps)
            .flag("cauchy", rep.cauchy)
            .flag("gradient_decreasing", rep.gradient_decreasing)
            .float("limit_residual", residual)
            .flag("pseudogradient_inequalities", ok_ineq)],
    )?;
    art.check("cauchy", rep.cauchy, "");
    art.check("gradient_decreasing", rep.gradient_decreasing, "");
    art.check("limit_residual", residual <= 1e-10, fmt17(residual));
    art.check("pseudogradient_inequalities", ok_ineq, "");
    Ok(())
}
