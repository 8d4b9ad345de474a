//! Scenario orchestration: simulate runs, parameter sweeps and the
//! closed-form versus quadrature self-check.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{
    asymmetry_report, conditional_distribution, double_gauss_fit, evaluate_grid,
    schmidt_decompose, unconditional_distribution, Axis, Engine, GridSpec, TpaGrid,
};
use crate::config::{EngineChoice, RunConfig, StackSelection};
use crate::dispersion::{PhaseMatchingSolution, UniaxialMedium};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{CrystalSlab, CrystalStack, PumpBeam, StackPreset, WalkoffSign};
use crate::output;

const REPORTED_LAMBDAS: usize = 16;

/// Physical inputs resolved from a config.
#[derive(Debug, Clone)]
pub struct Setup {
    pub medium: UniaxialMedium,
    pub pump: PumpBeam,
    pub pm: PhaseMatchingSolution,
    pub stacks: Vec<(String, CrystalStack)>,
}

impl Setup {
    pub fn resolve(cfg: &RunConfig) -> Result<Self> {
        let medium = match &cfg.medium {
            Some(path) => UniaxialMedium::from_file(path)?,
            None => UniaxialMedium::bbo(),
        };
        let lambda_p = cfg.lambda_p_nm * 1e-9;
        let pump = PumpBeam::new(lambda_p, cfg.pump_fwhm_um * 1e-6)?;
        let pm = PhaseMatchingSolution::solve(&medium, lambda_p)?;
        let stacks = match &cfg.stacks {
            StackSelection::Presets(presets) => presets
                .iter()
                .map(|p| Ok((p.name().to_string(), p.build(cfg.length_mm * 1e-3, pm.theta_walkoff)?)))
                .collect::<Result<Vec<_>>>()?,
            StackSelection::Custom(slabs) => {
                let slabs = slabs
                    .iter()
                    .map(|&(l, s)| CrystalSlab::new(l * 1e-3, s))
                    .collect::<Result<Vec<_>>>()?;
                vec![("custom".to_string(), CrystalStack::new(slabs, pm.theta_walkoff)?)]
            }
        };
        Ok(Setup { medium, pump, pm, stacks })
    }

    /// Shared grid: the configured range, or the widest automatic range
    /// over all stacks of the run.
    pub fn grid_spec(&self, cfg: &RunConfig) -> Result<GridSpec> {
        if let Some(mrad) = cfg.grid_half_range_mrad {
            return GridSpec::symmetric(mrad * 1e-3, cfg.grid_n);
        }
        let mut half = 0.0f64;
        for (_, stack) in &self.stacks {
            half = half.max(GridSpec::auto(stack, &self.pump, &self.pm, cfg.grid_n)?.theta_max);
        }
        GridSpec::symmetric(half, cfg.grid_n)
    }
}

fn engine_for(cfg: &RunConfig) -> Engine {
    match cfg.engine {
        EngineChoice::Closed => Engine::ClosedForm,
        EngineChoice::Oracle => Engine::Oracle(cfg.quadrature),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: String,
    /// Excluded from the determinism contract.
    pub generated_at: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseMatchingReport {
    pub medium: String,
    pub lambda_p_m: f64,
    pub pump_fwhm_m: f64,
    pub sigma_x_m: f64,
    pub alpha_rad: f64,
    pub alpha_deg: f64,
    pub walkoff_rad: f64,
    pub walkoff_deg: f64,
    pub k_p: f64,
    pub k_s: f64,
    pub k_i: f64,
    pub collinear_mismatch: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlabReport {
    pub length_m: f64,
    pub sign: i8,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub max_delta: f64,
    pub min_panels: usize,
    pub max_panels: usize,
    pub z_order: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub residual: Option<f64>,
    pub applicable: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionalPeak {
    pub theta_fixed_rad: f64,
    pub peak_rad: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub directory: String,
    pub slabs: Vec<SlabReport>,
    pub engine: String,
    pub grid_half_range_rad: f64,
    pub grid_n: usize,
    pub peak_abs_f: f64,
    pub swap_asym: f64,
    pub marginal_skewness: f64,
    pub bend_offset_rad: f64,
    pub probe_angle_rad: f64,
    pub conditional_peaks: Vec<ConditionalPeak>,
    pub schmidt_k: f64,
    pub schmidt_lambdas: Vec<f64>,
    pub double_gauss: FitReport,
    pub convergence: Option<ConvergenceReport>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub metadata: Metadata,
    pub phase_matching: PhaseMatchingReport,
    pub scenarios: Vec<ScenarioReport>,
    pub manifest: Vec<ManifestEntry>,
}

impl RunReport {
    pub fn scenario(&self, name: &str) -> Option<&ScenarioReport> {
        self.scenarios.iter().find(|s| s.name == name)
    }
}

pub const REPORT_FILE: &str = "report.json";

fn phase_matching_report(setup: &Setup) -> PhaseMatchingReport {
    let pm = &setup.pm;
    PhaseMatchingReport {
        medium: setup.medium.name.clone(),
        lambda_p_m: setup.pump.lambda_p,
        pump_fwhm_m: setup.pump.fwhm,
        sigma_x_m: setup.pump.sigma_x,
        alpha_rad: pm.alpha,
        alpha_deg: pm.alpha.to_degrees(),
        walkoff_rad: pm.theta_walkoff,
        walkoff_deg: pm.theta_walkoff.to_degrees(),
        k_p: pm.k_p,
        k_s: pm.k_s,
        k_i: pm.k_i,
        collinear_mismatch: pm.k_p - pm.k_s - pm.k_i,
    }
}

struct Emitter<'a> {
    root: &'a Path,
    manifest: Vec<ManifestEntry>,
}

impl Emitter<'_> {
    fn emit(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        output::write_file(&path, bytes)?;
        self.manifest.push(ManifestEntry {
            path: rel.to_string(),
            bytes: bytes.len(),
            sha256: output::sha256_hex(bytes),
        });
        Ok(())
    }
}

fn analyse(
    name: &str,
    stack: &CrystalStack,
    grid: &TpaGrid,
    schmidt_modes: usize,
    emitter: &mut Emitter<'_>,
) -> Result<ScenarioReport> {
    let asym = asymmetry_report(grid)?;
    let probe = asym.probe_angle;
    let dir = name.to_string();

    emitter.emit(&format!("{dir}/grid.csv"), output::grid_csv(grid).as_bytes())?;
    emitter.emit(&format!("{dir}/intensity.pgm"), &output::intensity_pgm(grid))?;
    for (file, axis) in [("marginal_signal.csv", Axis::Signal), ("marginal_idler.csv", Axis::Idler)] {
        let d = unconditional_distribution(grid, axis);
        emitter.emit(&format!("{dir}/{file}"), output::distribution_csv(&d).as_bytes())?;
    }
    let mut conditional_peaks = Vec::new();
    for (file, theta) in [
        ("conditional_neg.csv", -probe),
        ("conditional_zero.csv", 0.0),
        ("conditional_pos.csv", probe),
    ] {
        let d = conditional_distribution(grid, theta)?;
        emitter.emit(&format!("{dir}/{file}"), output::distribution_csv(&d).as_bytes())?;
        conditional_peaks.push(ConditionalPeak {
            theta_fixed_rad: theta,
            peak_rad: d.peak(),
        });
    }

    let schmidt = schmidt_decompose(grid, schmidt_modes.min(grid.rows()))?;
    let double_gauss = match double_gauss_fit(grid) {
        Ok(f) => FitReport {
            a: Some(f.a),
            b: Some(f.b),
            residual: Some(f.residual),
            applicable: f.applicable(),
            note: (!f.applicable()).then(|| "double-Gauss inapplicable".to_string()),
        },
        Err(e) => FitReport {
            a: None,
            b: None,
            residual: None,
            applicable: false,
            note: Some(e.to_string()),
        },
    };

    Ok(ScenarioReport {
        name: name.to_string(),
        directory: dir,
        slabs: stack
            .slabs()
            .iter()
            .map(|s| SlabReport {
                length_m: s.length,
                sign: if s.sign == WalkoffSign::Plus { 1 } else { -1 },
            })
            .collect(),
        engine: grid.engine.to_string(),
        grid_half_range_rad: grid.spec_s.theta_max,
        grid_n: grid.rows(),
        peak_abs_f: grid.peak,
        swap_asym: asym.swap_asym,
        marginal_skewness: asym.marginal_skewness,
        bend_offset_rad: asym.bend_offset,
        probe_angle_rad: probe,
        conditional_peaks,
        schmidt_k: schmidt.k,
        schmidt_lambdas: schmidt.lambdas.iter().take(REPORTED_LAMBDAS).copied().collect(),
        double_gauss,
        convergence: None,
    })
}

/// Simulates every configured stack and writes its files under `cfg.outdir`.
pub fn run_scenarios(cfg: &RunConfig, exec: Execution) -> Result<RunReport> {
    let setup = Setup::resolve(cfg)?;
    let spec = setup.grid_spec(cfg)?;
    let engine = engine_for(cfg);
    std::fs::create_dir_all(&cfg.outdir).map_err(|e| Error::io(&cfg.outdir, e))?;

    let mut emitter = Emitter {
        root: &cfg.outdir,
        manifest: Vec::new(),
    };
    let mut scenarios = Vec::new();
    for (name, stack) in &setup.stacks {
        let grid = evaluate_grid(stack, &setup.pump, &setup.pm, &spec, &engine, exec)
            .map_err(|e| e.in_scenario(name))?;
        let mut report = analyse(name, stack, &grid, cfg.schmidt_modes, &mut emitter)
            .map_err(|e| e.in_scenario(name))?;
        report.convergence = grid.oracle_stats.map(|s| ConvergenceReport {
            max_delta: s.max_delta,
            min_panels: s.min_panels,
            max_panels: s.max_panels,
            z_order: cfg.quadrature.z_order,
            tol: cfg.quadrature.tol,
        });
        scenarios.push(report);
    }

    let report = RunReport {
        metadata: Metadata {
            tool: format!("walkoff {}", env!("CARGO_PKG_VERSION")),
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        },
        phase_matching: phase_matching_report(&setup),
        scenarios,
        manifest: emitter.manifest,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    output::write_file(&cfg.outdir.join(REPORT_FILE), json.as_bytes())?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Pump FWHM, values in µm.
    PumpFwhm,
    /// Total stack length, values in mm.
    Length,
}

impl SweepParam {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pump_fwhm" | "pump_fwhm_um" => Some(SweepParam::PumpFwhm),
            "L_total" | "length" | "length_mm" => Some(SweepParam::Length),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::PumpFwhm => "pump_fwhm_um",
            SweepParam::Length => "length_mm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub preset: String,
    pub swap_asym: f64,
    pub skewness: f64,
    pub schmidt_k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Increasing,
    Decreasing,
    NonMonotonic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
    /// Monotonicity of single_aniso swap asymmetry over the swept values.
    pub single_aniso_trend: Option<Trend>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},preset,swap_asym,skewness,schmidt_k\n", self.param.name());
        for r in &self.rows {
            out.push_str(&format!(
                "{:.16e},{},{:.16e},{:.16e},{:.16e}\n",
                r.value, r.preset, r.swap_asym, r.skewness, r.schmidt_k
            ));
        }
        out
    }
}

fn trend(values: &[f64]) -> Trend {
    if values.windows(2).all(|w| w[1] > w[0]) {
        Trend::Increasing
    } else if values.windows(2).all(|w| w[1] < w[0]) {
        Trend::Decreasing
    } else {
        Trend::NonMonotonic
    }
}

/// Asymmetry and Schmidt number of every configured stack for each value of
/// one parameter. Writes `sweep_<param>.csv` into `cfg.outdir`.
pub fn sweep(cfg: &RunConfig, param: SweepParam, values: &[f64], exec: Execution) -> Result<SweepTable> {
    if values.len() < 2 {
        return Err(Error::Invalid("sweep: need ≥ 2 values".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Invalid(format!("sweep value {v} must be positive")));
    }
    let mut rows = Vec::new();
    for &value in values {
        let mut c = cfg.clone();
        match param {
            SweepParam::PumpFwhm => c.pump_fwhm_um = value,
            SweepParam::Length => {
                if let StackSelection::Custom(slabs) = &mut c.stacks {
                    let scale = value / c.length_mm;
                    slabs.iter_mut().for_each(|s| s.0 *= scale);
                }
                c.length_mm = value;
            }
        }
        let setup = Setup::resolve(&c)?;
        let spec = setup.grid_spec(&c)?;
        let engine = engine_for(&c);
        for (name, stack) in &setup.stacks {
            let grid = evaluate_grid(stack, &setup.pump, &setup.pm, &spec, &engine, exec)
                .map_err(|e| e.in_scenario(name))?;
            let asym = asymmetry_report(&grid).map_err(|e| e.in_scenario(name))?;
            let k = schmidt_decompose(&grid, 1).map_err(|e| e.in_scenario(name))?.k;
            rows.push(SweepRow {
                value,
                preset: name.clone(),
                swap_asym: asym.swap_asym,
                skewness: asym.marginal_skewness,
                schmidt_k: k,
            });
        }
    }
    let aniso: Vec<f64> = rows
        .iter()
        .filter(|r| r.preset == StackPreset::SingleAniso.name())
        .map(|r| r.swap_asym)
        .collect();
    let table = SweepTable {
        param,
        single_aniso_trend: (aniso.len() == values.len()).then(|| trend(&aniso)),
        rows,
    };
    std::fs::create_dir_all(&cfg.outdir).map_err(|e| Error::io(&cfg.outdir, e))?;
    output::write_file(
        &cfg.outdir.join(format!("sweep_{}.csv", param.name())),
        table.to_csv().as_bytes(),
    )?;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheckRow {
    pub preset: StackPreset,
    /// max | |F_closed| − |F_oracle| | / max |F_oracle| over the grid.
    pub max_deviation: f64,
    pub oracle_max_delta: f64,
}

pub const SELFCHECK_TOLERANCE: f64 = 1e-6;
pub const SELFCHECK_GRID_POINTS: usize = 41;

/// Closed form against the quadrature oracle for the four preset stacks.
pub fn selfcheck(cfg: &RunConfig, n: usize, exec: Execution) -> Result<Vec<SelfCheckRow>> {
    let mut c = cfg.clone();
    c.stacks = StackSelection::Presets(StackPreset::ALL.to_vec());
    c.grid_n = n;
    let setup = Setup::resolve(&c)?;
    let spec = setup.grid_spec(&c)?;
    StackPreset::ALL
        .iter()
        .zip(&setup.stacks)
        .map(|(&preset, (_, stack))| {
            let closed = evaluate_grid(stack, &setup.pump, &setup.pm, &spec, &Engine::ClosedForm, exec)?;
            let oracle = evaluate_grid(stack, &setup.pump, &setup.pm, &spec, &Engine::Oracle(c.quadrature), exec)?;
            let max_deviation = closed
                .values
                .iter()
                .zip(&oracle.values)
                .map(|(a, b)| (a.norm() - b.norm()).abs())
                .fold(0.0, f64::max);
            Ok(SelfCheckRow {
                preset,
                max_deviation,
                oracle_max_delta: oracle.oracle_stats.map_or(0.0, |s| s.max_delta),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e: Error| e.in_scenario("selfcheck"))
}

/// Output directory that `run_scenarios` would use for a scenario.
pub fn scenario_dir(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.outdir.join(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_classification() {
        assert_eq!(trend(&[1.0, 2.0, 3.0]), Trend::Increasing);
        assert_eq!(trend(&[3.0, 2.0, 1.0]), Trend::Decreasing);
        assert_eq!(trend(&[1.0, 3.0, 2.0]), Trend::NonMonotonic);
    }

    #[test]
    fn sweep_needs_two_values() {
        let err = sweep(&RunConfig::baseline(), SweepParam::PumpFwhm, &[70.0], Execution::Sequential).unwrap_err();
        assert!(err.to_string().contains("need"), "{err}");
    }

    #[test]
    fn param_names() {
        assert_eq!(SweepParam::parse("pump_fwhm"), Some(SweepParam::PumpFwhm));
        assert_eq!(SweepParam::parse("L_total"), Some(SweepParam::Length));
        assert_eq!(SweepParam::parse("alpha"), None);
    }
}
