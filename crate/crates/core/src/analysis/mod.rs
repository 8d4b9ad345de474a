//! Observables derived from a sampled amplitude: angular distributions,
//! asymmetry metrics, Schmidt spectrum and the double-Gauss fit.
//!
//! Distributions are built from |F|², the quantity single and coincidence
//! counters measure.

mod fit;
mod grid;
mod schmidt;

pub use fit::{double_gauss_fit, DoubleGaussFit, DOUBLE_GAUSS_RESIDUAL_LIMIT};
pub use grid::{evaluate_grid, Engine, GridSpec, OracleStats, TpaGrid, DEFAULT_GRID_POINTS};
pub use schmidt::{schmidt_decompose, SchmidtSpectrum};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Signal,
    Idler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionKind {
    /// Cross-section at a fixed partner angle (rad).
    Conditional { theta_fixed: f64 },
    Unconditional(Axis),
}

/// Probability density on a uniform axis, normalized so `Σ p Δθ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularDistribution {
    pub axis: Vec<f64>,
    pub p: Vec<f64>,
    pub kind: DistributionKind,
}

impl AngularDistribution {
    fn normalized(axis: Vec<f64>, mut p: Vec<f64>, step: f64, kind: DistributionKind) -> Self {
        let total: f64 = p.iter().sum::<f64>() * step;
        if total > 0.0 {
            p.iter_mut().for_each(|v| *v /= total);
        }
        AngularDistribution { axis, p, kind }
    }

    fn step(&self) -> f64 {
        (self.axis[self.axis.len() - 1] - self.axis[0]) / (self.axis.len() - 1) as f64
    }

    fn central_moment(&self, order: i32, mean: f64) -> f64 {
        let h = self.step();
        self.axis
            .iter()
            .zip(&self.p)
            .map(|(&t, &p)| (t - mean).powi(order) * p)
            .sum::<f64>()
            * h
    }

    pub fn mean(&self) -> f64 {
        let h = self.step();
        self.axis.iter().zip(&self.p).map(|(&t, &p)| t * p).sum::<f64>() * h
    }

    pub fn std_dev(&self) -> f64 {
        self.central_moment(2, self.mean()).sqrt()
    }

    /// Third standardized moment.
    pub fn skewness(&self) -> f64 {
        let mean = self.mean();
        let var = self.central_moment(2, mean);
        if var == 0.0 {
            return 0.0;
        }
        self.central_moment(3, mean) / var.powf(1.5)
    }

    /// Angle of the maximum, refined by a parabola through the three
    /// samples around the largest one.
    pub fn peak(&self) -> f64 {
        let k = self
            .p
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > self.p[best] { i } else { best });
        if k == 0 || k + 1 == self.p.len() {
            return self.axis[k];
        }
        let (l, c, r) = (self.p[k - 1], self.p[k], self.p[k + 1]);
        let denom = l - 2.0 * c + r;
        let shift = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
        self.axis[k] + shift * self.step()
    }

    /// Half width at half maximum, interpolating the half-level crossings.
    pub fn hwhm(&self) -> f64 {
        let (k, max) = self
            .p
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::MIN), |b, (i, v)| if v > b.1 { (i, v) } else { b });
        let half = 0.5 * max;
        let cross = |range: &mut dyn Iterator<Item = usize>, towards: isize| -> f64 {
            for i in range {
                let j = (i as isize + towards) as usize;
                if self.p[i] < half {
                    let t = (half - self.p[i]) / (self.p[j] - self.p[i]);
                    return self.axis[i] + t * (self.axis[j] - self.axis[i]);
                }
            }
            if towards > 0 {
                self.axis[0]
            } else {
                self.axis[self.axis.len() - 1]
            }
        };
        let left = cross(&mut (0..k).rev(), 1);
        let right = cross(&mut (k + 1..self.p.len()), -1);
        0.5 * (right - left)
    }
}

/// `p(θs | θi*) ∝ |F(θs, θi*)|²`, interpolating linearly between the two
/// grid columns that bracket `theta_i_fixed`.
pub fn conditional_distribution(grid: &TpaGrid, theta_i_fixed: f64) -> Result<AngularDistribution> {
    let axis = &grid.axis_i;
    let (lo, hi) = (axis[0], axis[axis.len() - 1]);
    if !(lo..=hi).contains(&theta_i_fixed) {
        return Err(Error::Domain(format!(
            "conditioning angle {theta_i_fixed} rad outside the grid [{lo}, {hi}] rad"
        )));
    }
    let j = axis
        .windows(2)
        .position(|w| theta_i_fixed <= w[1])
        .unwrap_or(axis.len() - 2);
    let t = (theta_i_fixed - axis[j]) / (axis[j + 1] - axis[j]);
    let p = (0..grid.rows())
        .map(|a| (1.0 - t) * grid.intensity(a, j) + t * grid.intensity(a, j + 1))
        .collect();
    Ok(AngularDistribution::normalized(
        grid.axis_s.clone(),
        p,
        grid.spec_s.step(),
        DistributionKind::Conditional { theta_fixed: theta_i_fixed },
    ))
}

/// Marginal of |F|² over the partner angle with trapezoid weights.
pub fn unconditional_distribution(grid: &TpaGrid, axis: Axis) -> AngularDistribution {
    let (rows, cols) = (grid.rows(), grid.cols());
    let trapezoid = |k: usize, n: usize, h: f64| if k == 0 || k + 1 == n { 0.5 * h } else { h };
    match axis {
        Axis::Signal => {
            let h = grid.spec_i.step();
            let p = (0..rows)
                .map(|a| (0..cols).map(|b| grid.intensity(a, b) * trapezoid(b, cols, h)).sum())
                .collect();
            AngularDistribution::normalized(
                grid.axis_s.clone(),
                p,
                grid.spec_s.step(),
                DistributionKind::Unconditional(axis),
            )
        }
        Axis::Idler => {
            let h = grid.spec_s.step();
            let p = (0..cols)
                .map(|b| (0..rows).map(|a| grid.intensity(a, b) * trapezoid(a, rows, h)).sum())
                .collect();
            AngularDistribution::normalized(
                grid.axis_i.clone(),
                p,
                grid.spec_i.step(),
                DistributionKind::Unconditional(axis),
            )
        }
    }
}

/// Scalar asymmetry measures of one grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetryReport {
    /// ‖|F| − |F|ᵀ‖₂ / ‖|F|‖₂ (Frobenius).
    pub swap_asym: f64,
    /// Skewness of the unconditional signal distribution.
    pub marginal_skewness: f64,
    /// `peak(θs | +θ*) + peak(θs | −θ*)` with θ* half the positive range.
    /// Zero when |F(θs, θi)| = |F(−θs, −θi)|.
    pub bend_offset: f64,
    pub probe_angle: f64,
}

pub fn asymmetry_report(grid: &TpaGrid) -> Result<AsymmetryReport> {
    if !grid.is_square() || grid.spec_s != grid.spec_i {
        return Err(Error::Invalid("asymmetry needs a square grid with equal axes".into()));
    }
    let spec = grid.spec_s;
    if (spec.theta_min + spec.theta_max).abs() > 1e-12 * spec.theta_max.abs() {
        return Err(Error::Invalid("asymmetry needs a symmetric angular range".into()));
    }
    let n = grid.rows();
    let mut diff = 0.0;
    let mut norm = 0.0;
    for a in 0..n {
        for b in 0..n {
            let v = grid.at(a, b).norm();
            let d = v - grid.at(b, a).norm();
            diff += d * d;
            norm += v * v;
        }
    }
    let probe = 0.5 * spec.theta_max;
    let plus = conditional_distribution(grid, probe)?.peak();
    let minus = conditional_distribution(grid, -probe)?.peak();
    Ok(AsymmetryReport {
        swap_asym: (diff / norm).sqrt(),
        marginal_skewness: unconditional_distribution(grid, Axis::Signal).skewness(),
        bend_offset: plus + minus,
        probe_angle: probe,
    })
}
