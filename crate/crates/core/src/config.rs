//! Run configuration: strict `key = value` text, `#` comments.
//!
//! Physical inputs carry their unit in the key suffix (`_nm`, `_um`, `_mm`,
//! `_mrad`); values are bare numbers.

use std::collections::HashSet;
use std::path::PathBuf;

use serde::Serialize;

use crate::analysis::DEFAULT_GRID_POINTS;
use crate::error::{Error, Result};
use crate::geometry::{StackPreset, WalkoffSign};
use crate::tpa::{QuadratureSpec, TransverseRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Closed,
    Oracle,
}

impl EngineChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "closed" => Some(EngineChoice::Closed),
            "oracle" => Some(EngineChoice::Oracle),
            _ => None,
        }
    }
}

/// Which stacks a run simulates.
#[derive(Debug, Clone, PartialEq)]
pub enum StackSelection {
    Presets(Vec<StackPreset>),
    /// Explicit slabs, lengths in mm.
    Custom(Vec<(f64, WalkoffSign)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` selects the bundled BBO data.
    pub medium: Option<PathBuf>,
    pub lambda_p_nm: f64,
    pub pump_fwhm_um: f64,
    pub length_mm: f64,
    pub stacks: StackSelection,
    pub grid_n: usize,
    /// `None` picks the range automatically.
    pub grid_half_range_mrad: Option<f64>,
    pub engine: EngineChoice,
    pub quadrature: QuadratureSpec,
    pub schmidt_modes: usize,
    pub outdir: PathBuf,
}

impl RunConfig {
    /// 354.7 nm pump, 70 µm FWHM, 6 mm total length, all four stacks.
    pub fn baseline() -> Self {
        RunConfig {
            medium: None,
            lambda_p_nm: 354.7,
            pump_fwhm_um: 70.0,
            length_mm: 6.0,
            stacks: StackSelection::Presets(StackPreset::ALL.to_vec()),
            grid_n: DEFAULT_GRID_POINTS,
            grid_half_range_mrad: None,
            engine: EngineChoice::Closed,
            quadrature: QuadratureSpec::default(),
            schmidt_modes: 8,
            outdir: PathBuf::from("out"),
        }
    }

    /// Scenario names in run order.
    pub fn scenario_names(&self) -> Vec<String> {
        match &self.stacks {
            StackSelection::Presets(p) => p.iter().map(|p| p.name().to_string()).collect(),
            StackSelection::Custom(_) => vec!["custom".to_string()],
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::baseline();
        let mut seen = HashSet::new();
        let mut preset_line = None;
        let mut slabs_line = None;
        let mut x_nodes = 400;
        let mut x_sigmas = 6.0;
        let mut x_analytic = false;
        let last_line = text.lines().count() + 1;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config { line, msg };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            match key {
                "medium" => cfg.medium = Some(PathBuf::from(value)),
                "lambda_p_nm" => cfg.lambda_p_nm = positive(key, value, line)?,
                "pump_fwhm_um" => cfg.pump_fwhm_um = positive(key, value, line)?,
                "length_mm" => cfg.length_mm = positive(key, value, line)?,
                "preset" => {
                    cfg.stacks = if value == "all" {
                        StackSelection::Presets(StackPreset::ALL.to_vec())
                    } else {
                        let p = StackPreset::from_name(value).ok_or_else(|| {
                            err(format!(
                                "unknown preset `{value}` (single_iso, single_aniso, noncomp, comp, all)"
                            ))
                        })?;
                        StackSelection::Presets(vec![p])
                    };
                    preset_line = Some(line);
                }
                "slabs_mm" => {
                    cfg.stacks = StackSelection::Custom(parse_slabs(value, line)?);
                    slabs_line = Some(line);
                }
                "grid_n" => {
                    let n = integer(key, value, line)?;
                    if n < 16 {
                        return Err(err(format!("grid_n must be at least 16, got {n}")));
                    }
                    cfg.grid_n = n;
                }
                "grid_half_range_mrad" => {
                    cfg.grid_half_range_mrad = Some(positive(key, value, line)?)
                }
                "engine" => {
                    cfg.engine = EngineChoice::parse(value)
                        .ok_or_else(|| err(format!("engine must be `closed` or `oracle`, got `{value}`")))?
                }
                "quad_z_panels" => cfg.quadrature.z_panels = integer(key, value, line)?.max(2),
                "quad_z_order" => cfg.quadrature.z_order = integer(key, value, line)?.max(1),
                "quad_x_nodes" => x_nodes = integer(key, value, line)?.max(1),
                "quad_x_sigmas" => x_sigmas = positive(key, value, line)?,
                "quad_x_rule" => {
                    x_analytic = match value {
                        "numeric" => false,
                        "analytic" => true,
                        _ => return Err(err(format!("quad_x_rule must be `numeric` or `analytic`, got `{value}`"))),
                    }
                }
                "quad_tol" => cfg.quadrature.tol = positive(key, value, line)?,
                "quad_max_refinements" => cfg.quadrature.max_refinements = integer(key, value, line)?,
                "schmidt_modes" => cfg.schmidt_modes = integer(key, value, line)?.max(1),
                "outdir" => cfg.outdir = PathBuf::from(value),
                other => return Err(err(unknown_key_message(other))),
            }
        }

        cfg.quadrature.transverse = if x_analytic {
            TransverseRule::Analytic
        } else {
            TransverseRule::Numeric {
                nodes: x_nodes,
                half_width_sigmas: x_sigmas,
            }
        };

        if let (Some(_), Some(l)) = (preset_line, slabs_line) {
            return Err(Error::Config {
                line: l,
                msg: "`preset` and `slabs_mm` are mutually exclusive".into(),
            });
        }
        let missing = |k: &str| Error::Config {
            line: last_line,
            msg: format!("missing key `{k}`"),
        };
        for key in ["lambda_p_nm", "pump_fwhm_um"] {
            if !seen.contains(key) {
                return Err(missing(key));
            }
        }
        match (&cfg.stacks, preset_line) {
            (StackSelection::Custom(slabs), _) => {
                let total: f64 = slabs.iter().map(|s| s.0).sum();
                if seen.contains("length_mm") && (total - cfg.length_mm).abs() > 1e-9 * total {
                    return Err(Error::Config {
                        line: slabs_line.unwrap_or(last_line),
                        msg: format!("slabs_mm sums to {total} mm but length_mm is {}", cfg.length_mm),
                    });
                }
                cfg.length_mm = total;
            }
            (StackSelection::Presets(_), None) => return Err(missing("preset")),
            (StackSelection::Presets(_), Some(_)) => {
                if !seen.contains("length_mm") {
                    return Err(missing("length_mm"));
                }
            }
        }
        Ok(cfg)
    }
}

const KNOWN_STEMS: [(&str, &str); 4] = [
    ("lambda_p", "_nm"),
    ("pump_fwhm", "_um"),
    ("length", "_mm"),
    ("grid_half_range", "_mrad"),
];

fn unknown_key_message(key: &str) -> String {
    for (stem, suffix) in KNOWN_STEMS {
        if let Some(rest) = key.strip_prefix(stem) {
            if rest.starts_with('_') || rest.is_empty() {
                return format!("bad unit in key `{key}`: {stem} is given in `{stem}{suffix}`");
            }
        }
    }
    format!("unknown key `{key}`")
}

fn number(key: &str, value: &str, line: usize) -> Result<f64> {
    value.parse::<f64>().map_err(|_| {
        let trimmed = value.trim_end_matches(|c: char| c.is_alphabetic() || c == 'µ').trim();
        let msg = if trimmed != value && trimmed.parse::<f64>().is_ok() {
            format!("bad unit in `{key} = {value}`: the unit is fixed by the key suffix, give a bare number")
        } else {
            format!("`{value}` is not a number for `{key}`")
        };
        Error::Config { line, msg }
    })
}

fn positive(key: &str, value: &str, line: usize) -> Result<f64> {
    let v = number(key, value, line)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config {
            line,
            msg: format!("`{key}` must be positive, got {value}"),
        })
    }
}

fn integer(key: &str, value: &str, line: usize) -> Result<usize> {
    value.parse::<usize>().map_err(|_| Error::Config {
        line,
        msg: format!("`{key}` must be a non-negative integer, got `{value}`"),
    })
}

/// `3:+ 3:-` — slab length in mm and walk-off sign.
fn parse_slabs(value: &str, line: usize) -> Result<Vec<(f64, WalkoffSign)>> {
    let err = |msg: String| Error::Config { line, msg };
    let slabs = value
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|tok| {
            let (len, sign) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("slab `{tok}` must look like `3:+` or `3:-`")))?;
            let len = positive("slabs_mm", len, line)?;
            let sign = match sign {
                "+" | "+1" => WalkoffSign::Plus,
                "-" | "-1" => WalkoffSign::Minus,
                _ => return Err(err(format!("slab sign `{sign}` must be + or -"))),
            };
            Ok((len, sign))
        })
        .collect::<Result<Vec<_>>>()?;
    if slabs.is_empty() {
        return Err(err("slabs_mm lists no slabs".into()));
    }
    Ok(slabs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "lambda_p_nm = 354.7\npump_fwhm_um = 70\nlength_mm = 6\npreset = comp\n";

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.stacks, StackSelection::Presets(vec![StackPreset::Comp]));
        assert_eq!(cfg.grid_n, 201);
        assert_eq!(cfg.grid_half_range_mrad, None);
        assert_eq!(cfg.engine, EngineChoice::Closed);
        assert_eq!(cfg.quadrature, QuadratureSpec::default());
    }

    #[test]
    fn baseline_config_plans_four_scenarios() {
        let text = "# four stacks\nlambda_p_nm = 354.7\npump_fwhm_um = 70   # FWHM\nlength_mm = 6\npreset = all\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.scenario_names(), ["single_iso", "single_aniso", "noncomp", "comp"]);
        assert_eq!(cfg, RunConfig { outdir: cfg.outdir.clone(), ..RunConfig::baseline() });
    }

    #[test]
    fn negative_width_is_rejected() {
        let err = RunConfig::parse("lambda_p_nm = 354.7\npump_fwhm_um = -3\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        assert!(err.to_string().contains("must be positive"));
    }

    #[test]
    fn unknown_and_missing_keys() {
        let err = RunConfig::parse(&format!("{MINIMAL}colour = red\n")).unwrap_err();
        assert!(matches!(err, Error::Config { line: 5, .. }), "{err}");
        let err = RunConfig::parse("lambda_p_nm = 354.7\npreset = all\n").unwrap_err();
        assert!(err.to_string().contains("pump_fwhm_um"), "{err}");
        let err = RunConfig::parse("lambda_p_nm = 354.7\npump_fwhm_um = 70\nlength_mm = 6\n").unwrap_err();
        assert!(err.to_string().contains("preset"), "{err}");
    }

    #[test]
    fn bad_units() {
        let err = RunConfig::parse("lambda_p_nm = 354.7\npump_fwhm_mm = 0.07\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        assert!(err.to_string().contains("bad unit"), "{err}");
        let err = RunConfig::parse("lambda_p_nm = 354.7nm\n").unwrap_err();
        assert!(err.to_string().contains("bad unit"), "{err}");
    }

    #[test]
    fn explicit_slabs() {
        let cfg = RunConfig::parse("lambda_p_nm = 354.7\npump_fwhm_um = 70\nslabs_mm = 2:+ 2:- 2:+\n").unwrap();
        assert_eq!(cfg.length_mm, 6.0);
        assert_eq!(cfg.scenario_names(), ["custom"]);
        assert!(RunConfig::parse(&format!("{MINIMAL}slabs_mm = 3:+ 3:-\n")).is_err());
        assert!(RunConfig::parse("lambda_p_nm = 354.7\npump_fwhm_um = 70\nslabs_mm = 3:x\n").is_err());
    }

    #[test]
    fn duplicate_key() {
        let err = RunConfig::parse(&format!("{MINIMAL}preset = comp\n")).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn quadrature_keys() {
        let cfg = RunConfig::parse(&format!(
            "{MINIMAL}engine = oracle\nquad_z_panels = 500\nquad_x_rule = analytic\nquad_tol = 1e-9\n"
        ))
        .unwrap();
        assert_eq!(cfg.engine, EngineChoice::Oracle);
        assert_eq!(cfg.quadrature.z_panels, 500);
        assert_eq!(cfg.quadrature.transverse, TransverseRule::Analytic);
        assert_eq!(cfg.quadrature.tol, 1e-9);
    }
}
