use nalgebra::{DMatrix, DVector};

use super::TpaGrid;
use crate::error::{Error, Result};

/// Intensity floor of the fitted region, relative to the normalized peak.
const FIT_THRESHOLD: f64 = 0.01;
const MIN_FIT_POINTS: usize = 6;

/// Fits above this relative residual are flagged as inapplicable.
pub const DOUBLE_GAUSS_RESIDUAL_LIMIT: f64 = 0.1;

/// `|F|² ≈ exp[c − 2a(θs + θi)² − 2b(θs − θi)²]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleGaussFit {
    /// rad⁻²
    pub a: f64,
    /// rad⁻²
    pub b: f64,
    /// ‖fit − |F|²‖₂ / ‖|F|²‖₂ over the fitted region.
    pub residual: f64,
    pub points: usize,
}

impl DoubleGaussFit {
    pub fn applicable(&self) -> bool {
        self.residual <= DOUBLE_GAUSS_RESIDUAL_LIMIT
    }
}

/// Linear least squares on `−ln|F|²` over the samples with `|F|² > 0.01`.
pub fn double_gauss_fit(grid: &TpaGrid) -> Result<DoubleGaussFit> {
    let mut rows = Vec::new();
    for (a, &ts) in grid.axis_s.iter().enumerate() {
        for (b, &ti) in grid.axis_i.iter().enumerate() {
            let i2 = grid.intensity(a, b);
            if i2 > FIT_THRESHOLD {
                rows.push(((ts + ti).powi(2), (ts - ti).powi(2), i2));
            }
        }
    }
    if rows.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "only {} samples above |F|^2 = {FIT_THRESHOLD}",
            rows.len()
        )));
    }

    // Columns are rescaled to unit max so the solve is well conditioned.
    let su = rows.iter().map(|r| r.0).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let sv = rows.iter().map(|r| r.1).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let design = DMatrix::from_fn(rows.len(), 3, |k, c| match c {
        0 => 1.0,
        1 => -2.0 * rows[k].0 / su,
        _ => -2.0 * rows[k].1 / sv,
    });
    let target = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.2.ln()));
    let coef = design
        .svd(true, true)
        .solve(&target, 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let (c, a, b) = (coef[0], coef[1] / su, coef[2] / sv);

    let (mut diff, mut norm) = (0.0, 0.0);
    for &(u2, v2, i2) in &rows {
        let model = (c - 2.0 * a * u2 - 2.0 * b * v2).exp();
        diff += (model - i2).powi(2);
        norm += i2 * i2;
    }
    Ok(DoubleGaussFit {
        a,
        b,
        residual: (diff / norm).sqrt(),
        points: rows.len(),
    })
}
