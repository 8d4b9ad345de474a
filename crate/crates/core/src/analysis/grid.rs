use num_complex::Complex64;

use crate::dispersion::PhaseMatchingSolution;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{CrystalStack, PumpBeam};
use crate::tpa::{mismatches, tpa_stack_at, Oracle, QuadratureSpec};

/// Uniform angular axis, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    pub n: usize,
}

pub const DEFAULT_GRID_POINTS: usize = 201;
const PREPASS_POINTS: usize = 41;

impl GridSpec {
    pub fn new(theta_min: f64, theta_max: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::Invalid(format!("grid needs at least 16 points per axis, got {n}")));
        }
        if !(theta_max > theta_min) || !theta_min.is_finite() || !theta_max.is_finite() {
            return Err(Error::Invalid(format!(
                "grid range [{theta_min}, {theta_max}] is empty"
            )));
        }
        Ok(GridSpec { theta_min, theta_max, n })
    }

    pub fn symmetric(half_range: f64, n: usize) -> Result<Self> {
        Self::new(-half_range, half_range, n)
    }

    pub fn step(&self) -> f64 {
        (self.theta_max - self.theta_min) / (self.n - 1) as f64
    }

    pub fn axis(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.theta_max
                } else {
                    self.theta_min + h * i as f64
                }
            })
            .collect()
    }

    /// Symmetric range of five RMS widths of the unconditional signal
    /// distribution, measured on a coarse closed-form pre-pass.
    ///
    /// The pre-pass window starts from the phase-matching and pump-envelope
    /// angular scales and is widened until it holds ten RMS widths.
    pub fn auto(
        stack: &CrystalStack,
        pump: &PumpBeam,
        pm: &PhaseMatchingSolution,
        n: usize,
    ) -> Result<Self> {
        let sinc_scale = (2.0 * std::f64::consts::PI / (pm.k_s * stack.total_length())).sqrt();
        let envelope_scale = 1.0 / (pm.k_s * pump.sigma_x);
        let mut window = 2.0 * (sinc_scale + envelope_scale);
        let mut rms = 0.0;
        for _ in 0..8 {
            let coarse = GridSpec::symmetric(window, PREPASS_POINTS)?;
            let grid = evaluate_grid(stack, pump, pm, &coarse, &Engine::ClosedForm, Execution::Sequential)?;
            rms = super::unconditional_distribution(&grid, super::Axis::Signal).std_dev();
            if 10.0 * rms <= window {
                break;
            }
            window *= 2.0;
        }
        GridSpec::symmetric(5.0 * rms, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    ClosedForm,
    Oracle(QuadratureSpec),
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::ClosedForm => "closed",
            Engine::Oracle(_) => "oracle",
        }
    }
}

/// Oracle self-convergence over a whole grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleStats {
    /// Largest |F(P) − F(P/2)| seen, in unnormalized amplitude units.
    pub max_delta: f64,
    pub max_panels: usize,
    pub min_panels: usize,
}

/// Peak-normalized amplitude sampled on a rectangular grid.
///
/// `values` is row-major: row `a` holds θs = `axis_s[a]`, column `b` holds
/// θi = `axis_i[b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TpaGrid {
    pub spec_s: GridSpec,
    pub spec_i: GridSpec,
    pub axis_s: Vec<f64>,
    pub axis_i: Vec<f64>,
    pub values: Vec<Complex64>,
    /// max |F| before normalization.
    pub peak: f64,
    pub engine: &'static str,
    pub oracle_stats: Option<OracleStats>,
}

impl TpaGrid {
    /// Samples `f(θs, θi)` and normalizes the peak modulus to one.
    pub fn from_fn<F>(spec_s: GridSpec, spec_i: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let axis_s = spec_s.axis();
        let axis_i = spec_i.axis();
        let values = axis_s
            .iter()
            .flat_map(|&ts| axis_i.iter().map(move |&ti| (ts, ti)))
            .map(|(ts, ti)| f(ts, ti))
            .collect();
        Self::normalized(spec_s, spec_i, values, "custom", None)
    }

    fn normalized(
        spec_s: GridSpec,
        spec_i: GridSpec,
        mut values: Vec<Complex64>,
        engine: &'static str,
        oracle_stats: Option<OracleStats>,
    ) -> Result<Self> {
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain("non-finite amplitude on grid".into()));
        }
        let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Err(Error::Domain("amplitude vanishes on the whole grid".into()));
        }
        let scale = peak.recip();
        values.iter_mut().for_each(|v| *v *= scale);
        Ok(TpaGrid {
            axis_s: spec_s.axis(),
            axis_i: spec_i.axis(),
            spec_s,
            spec_i,
            values,
            peak,
            engine,
            oracle_stats,
        })
    }

    pub fn rows(&self) -> usize {
        self.axis_s.len()
    }

    pub fn cols(&self) -> usize {
        self.axis_i.len()
    }

    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.cols() + col]
    }

    pub fn intensity(&self, row: usize, col: usize) -> f64 {
        self.at(row, col).norm_sqr()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Rows and columns swapped, i.e. θs ↔ θi.
    pub fn transposed(&self) -> Self {
        let (r, c) = (self.rows(), self.cols());
        let values = (0..c)
            .flat_map(|j| (0..r).map(move |i| (i, j)))
            .map(|(i, j)| self.at(i, j))
            .collect();
        TpaGrid {
            spec_s: self.spec_i,
            spec_i: self.spec_s,
            axis_s: self.axis_i.clone(),
            axis_i: self.axis_s.clone(),
            values,
            ..self.clone()
        }
    }

    /// Every amplitude multiplied by `factor`, without renormalizing.
    pub fn scaled(&self, factor: f64) -> Self {
        TpaGrid {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }
}

/// Samples the stack amplitude on `grid` for both angle axes.
pub fn evaluate_grid(
    stack: &CrystalStack,
    pump: &PumpBeam,
    pm: &PhaseMatchingSolution,
    grid: &GridSpec,
    engine: &Engine,
    exec: Execution,
) -> Result<TpaGrid> {
    let axis = grid.axis();
    let n = axis.len();
    match engine {
        Engine::ClosedForm => {
            let entries = stack.entries();
            let rows = exec.map_indices(n, |a| {
                axis.iter()
                    .map(|&ti| tpa_stack_at(mismatches(axis[a], ti, pm), pump, stack, &entries))
                    .collect::<Vec<_>>()
            });
            TpaGrid::normalized(*grid, *grid, rows.concat(), engine.name(), None)
        }
        Engine::Oracle(spec) => {
            let oracle = Oracle::new(*spec)?;
            let rows = exec.map_indices(n, |a| {
                axis.iter()
                    .map(|&ti| oracle.evaluate(axis[a], ti, pump, stack, pm))
                    .collect::<Result<Vec<_>>>()
            });
            let mut values = Vec::with_capacity(n * n);
            let mut stats = OracleStats {
                max_delta: 0.0,
                max_panels: 0,
                min_panels: usize::MAX,
            };
            for row in rows {
                for v in row? {
                    stats.max_delta = stats.max_delta.max(v.delta);
                    stats.max_panels = stats.max_panels.max(v.panels);
                    stats.min_panels = stats.min_panels.min(v.panels);
                    values.push(v.value);
                }
            }
            TpaGrid::normalized(*grid, *grid, values, engine.name(), Some(stats))
        }
    }
}
