//! Dispatch of a configured run into its output directory.

use crate::config::{Kind, RunConfig, Strip};
use crate::error::{Context, Result};
use crate::experiments as ex;
use crate::manifest::{Artifacts, Manifest};
use aclab_core::geometry::{geodesic_circle, make_warped_torus, point_pair, Ambient, Hypersurface, WarpedMetric};
use std::f64::consts::PI;

/// Validate, execute and write the manifest. The returned manifest carries
/// the in-run checks; callers exit non-zero unless all passed.
pub fn run(cfg: &RunConfig) -> Result<Manifest> {
    cfg.validate()?;
    let mut art = Artifacts::create(&cfg.output_dir(), &cfg.hash())?;
    art.write("config.txt", cfg.canonical())?;
    match cfg.kind {
        Kind::Profiles => ex::profiles(cfg, &mut art)?,
        Kind::Dirichlet => ex::dirichlet(cfg, &mut art)?,
        Kind::BalancedEnergy => ex::balanced(cfg, &mut art)?,
        Kind::ExpansionOrder => ex::expansion_order(cfg, &mut art)?,
        Kind::VariationCheck => ex::variation_check(cfg, &mut art)?,
        Kind::Spectrum => ex::spectrum(cfg, &mut art)?,
        Kind::MountainPass => ex::mountain_pass(cfg, &mut art)?,
        Kind::StrongMinmax => ex::strong_minmax(cfg, &mut art)?,
        Kind::Descend => ex::descend(cfg, &mut art)?,
        Kind::Diagnose => ex::diagnose(cfg, &mut art)?,
    }
    art.finish()
}

pub fn metric(cfg: &RunConfig) -> Result<WarpedMetric> {
    make_warped_torus(cfg.a, cfg.b).context("metric")
}

/// The configured base hypersurface: a point pair in 1-D, else a geodesic circle.
pub fn base(cfg: &RunConfig) -> Result<Hypersurface> {
    if cfg.one_d {
        return point_pair(cfg.c, cfg.c + PI).context("point pair");
    }
    let m = metric(cfg)?;
    let amb = match cfg.strip {
        Strip::Centred => Ambient::centred_strip(m),
        Strip::Shifted => Ambient::shifted_strip(m),
    };
    geodesic_circle(amb, cfg.c, cfg.ny).context("base circle")
}

/// Variation direction `cos(mode * y)` on the base grid.
pub fn direction(sigma: &Hypersurface, mode: usize) -> Vec<f64> {
    sigma.y_grid().iter().map(|y| (mode as f64 * y).cos()).collect()
}
