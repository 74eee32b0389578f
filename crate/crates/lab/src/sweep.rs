//! ε-sweeps: measured convergence orders.

use crate::cells;
use crate::emit::Csv;
use crate::error::{Context, LabError, Result};
use aclab_core::energy::expansion_residual;
use aclab_core::geometry::Hypersurface;
use aclab_core::numerics::loglog_slope;
use aclab_core::variation::first_variation_check;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Weighted norm of (solution − expansion).
    ExpansionResidual,
    /// |B'(f)| for a fixed direction.
    FirstVariation,
    /// d_ε − 2σ₀·area, supplied by the caller.
    MinMaxGap,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::ExpansionResidual => "expansion_residual",
            Quantity::FirstVariation => "first_variation",
            Quantity::MinMaxGap => "minmax_gap",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub quantity: Quantity,
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
}

impl ConvergenceTable {
    /// Fit `log|value|` against `log ε`; points that are zero or non-finite are dropped.
    pub fn fit(quantity: Quantity, eps: &[f64], values: &[f64]) -> Result<Self> {
        let (e, v): (Vec<f64>, Vec<f64>) = eps
            .iter()
            .zip(values)
            .filter(|(e, v)| v.is_finite() && **v != 0.0 && **e > 0.0)
            .map(|(e, v)| (*e, v.abs()))
            .unzip();
        if e.len() < 3 {
            return Err(LabError::Sweep(format!(
                "{} sweep has {} usable points, need at least 3",
                quantity.name(),
                e.len()
            )));
        }
        let slope = loglog_slope(&e, &v);
        Ok(Self { quantity, eps: eps.to_vec(), values: values.to_vec(), slope })
    }

    /// Successive values shrink in magnitude as ε decreases.
    pub fn decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1].abs() < w[0].abs())
    }

    pub fn to_csv(&self) -> String {
        let mut c = Csv::new(&["eps", self.quantity.name()]);
        for (e, v) in self.eps.iter().zip(&self.values) {
            c.row(cells![*e, *v]);
        }
        c.render()
    }
}

/// Sweep a quantity computed by the core over the ε list.
pub fn sweep(sigma: &Hypersurface, eps: &[f64], nx: usize, quantity: Quantity, direction: &[f64]) -> Result<ConvergenceTable> {
    let values = eps
        .iter()
        .map(|&e| match quantity {
            Quantity::ExpansionResidual => expansion_residual(sigma, e, nx, true)
                .context("expansion residual")
                .map(|r| r.norms.sobolev_sq.sqrt()),
            Quantity::FirstVariation => first_variation_check(sigma, direction, e, nx, 1e-3)
                .context("first variation")
                .map(|c| c.analytic),
            Quantity::MinMaxGap => Err(LabError::Sweep("min-max gap values come from mountain-pass runs".into())),
        })
        .collect::<Result<Vec<f64>>>()?;
    ConvergenceTable::fit(quantity, eps, &values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let eps = [0.08, 0.04, 0.02];
        let v: Vec<f64> = eps.iter().map(|e: &f64| 3.0 * e.powi(3)).collect();
        let t = ConvergenceTable::fit(Quantity::ExpansionResidual, &eps, &v).unwrap();
        assert!((t.slope - 3.0).abs() < 1e-12);
        assert!(t.decreasing());
    }

    #[test]
    fn too_few_points() {
        let err = ConvergenceTable::fit(Quantity::FirstVariation, &[0.1, 0.05, 0.02], &[1.0, 0.0, 0.5]).unwrap_err();
        assert!(err.to_string().contains("need at least 3"));
    }
}
