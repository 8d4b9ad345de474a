//! Refractive indices, phase matching and walk-off for negative uniaxial crystals.
//!
//! Wavelengths passed to the index functions are in micrometres, matching the
//! Sellmeier data files. Wavenumbers are returned in rad/m.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

const BBO_DATA: &str = include_str!("../data/bbo.medium");

/// Coefficients of `n^2 = a + b / (lambda^2 - c) - d * lambda^2`, lambda in µm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sellmeier {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Sellmeier {
    pub fn index(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        (self.a + self.b / (l2 - self.c) - self.d * l2).sqrt()
    }

    fn parse(values: &str, line: usize) -> Result<Self> {
        let coeffs = parse_floats(values, line)?;
        match coeffs.as_slice() {
            &[a, b, c, d] => Ok(Sellmeier { a, b, c, d }),
            _ => Err(Error::Medium {
                line,
                msg: format!("expected 4 Sellmeier coefficients, got {}", coeffs.len()),
            }),
        }
    }
}

/// A negative uniaxial medium described by two Sellmeier curves.
#[derive(Debug, Clone, PartialEq)]
pub struct UniaxialMedium {
    pub name: String,
    pub sellmeier_o: Sellmeier,
    pub sellmeier_e: Sellmeier,
    /// Valid wavelength interval in µm, inclusive.
    pub range_um: (f64, f64),
}

impl UniaxialMedium {
    /// The bundled BBO data set.
    pub fn bbo() -> Self {
        Self::parse(BBO_DATA).expect("bundled BBO data is valid")
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        Self::parse(&text)
    }

    /// Parses the `key = value` medium format. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut sellmeier_o = None;
        let mut sellmeier_e = None;
        let mut range = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Medium {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "name" => name = Some(value.to_string()),
                "sellmeier_o" => sellmeier_o = Some(Sellmeier::parse(value, line)?),
                "sellmeier_e" => sellmeier_e = Some(Sellmeier::parse(value, line)?),
                "range_um" => {
                    let v = parse_floats(value, line)?;
                    if v.len() != 2 || !(v[0] > 0.0 && v[1] > v[0]) {
                        return Err(Error::Medium {
                            line,
                            msg: "range_um needs `lo hi` with 0 < lo < hi".into(),
                        });
                    }
                    range = Some((v[0], v[1]));
                }
                other => {
                    return Err(Error::Medium {
                        line,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }

        let missing = |k: &str| Error::Medium {
            line: 0,
            msg: format!("missing key `{k}`"),
        };
        let medium = UniaxialMedium {
            name: name.ok_or_else(|| missing("name"))?,
            sellmeier_o: sellmeier_o.ok_or_else(|| missing("sellmeier_o"))?,
            sellmeier_e: sellmeier_e.ok_or_else(|| missing("sellmeier_e"))?,
            range_um: range.ok_or_else(|| missing("range_um"))?,
        };
        medium.check_negative_uniaxial()?;
        Ok(medium)
    }

    fn check_negative_uniaxial(&self) -> Result<()> {
        let (lo, hi) = self.range_um;
        for i in 0..=64 {
            let l = lo + (hi - lo) * i as f64 / 64.0;
            let (no, ne) = (self.sellmeier_o.index(l), self.sellmeier_e.index(l));
            if !(no.is_finite() && ne.is_finite() && ne > 1.0 && no > ne) {
                return Err(Error::Medium {
                    line: 0,
                    msg: format!(
                        "{} is not negative uniaxial at {l} um (n_o = {no}, n_e = {ne})",
                        self.name
                    ),
                });
            }
        }
        Ok(())
    }

    fn check_range(&self, lambda_um: f64) -> Result<()> {
        let (lo, hi) = self.range_um;
        if lambda_um >= lo && lambda_um <= hi {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "wavelength {lambda_um} um outside the valid range [{lo}, {hi}] um of {}",
                self.name
            )))
        }
    }

    pub fn index_ordinary(&self, lambda_um: f64) -> Result<f64> {
        self.check_range(lambda_um)?;
        Ok(self.sellmeier_o.index(lambda_um))
    }

    pub fn index_extraordinary_principal(&self, lambda_um: f64) -> Result<f64> {
        self.check_range(lambda_um)?;
        Ok(self.sellmeier_e.index(lambda_um))
    }

    /// Extraordinary index for a wave whose vector makes angle `alpha` with the
    /// optic axis: `1/n^2 = cos^2(alpha)/n_o^2 + sin^2(alpha)/n_e^2`.
    pub fn index_extraordinary_effective(&self, lambda_um: f64, alpha: f64) -> Result<f64> {
        check_axis_angle(alpha)?;
        let no = self.index_ordinary(lambda_um)?;
        let ne = self.index_extraordinary_principal(lambda_um)?;
        Ok(effective_index(no, ne, alpha))
    }

    /// Optic-axis angle for collinear, frequency-degenerate type-I (e -> o + o)
    /// phase matching of a pump at `lambda_pump_um`.
    pub fn phase_matching_angle(&self, lambda_pump_um: f64) -> Result<f64> {
        let target = self.index_ordinary(2.0 * lambda_pump_um)?;
        let residual = |alpha: f64| -> Result<f64> {
            Ok(self.index_extraordinary_effective(lambda_pump_um, alpha)? - target)
        };

        let mut lo = PHASE_MATCH_BRACKET.0;
        let mut hi = PHASE_MATCH_BRACKET.1;
        let mut f_lo = residual(lo)?;
        let f_hi = residual(hi)?;
        if f_lo.signum() == f_hi.signum() {
            return Err(Error::NotPhaseMatchable(format!(
                "{}: index residual has no sign change on [1, 89] deg for a {lambda_pump_um} um pump \
                 (f(1 deg) = {f_lo:e}, f(89 deg) = {f_hi:e})",
                self.name
            )));
        }

        for _ in 0..PHASE_MATCH_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = residual(mid)?;
            if f_mid == 0.0 {
                return Ok(mid);
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        let alpha = 0.5 * (lo + hi);
        let r = residual(alpha)?;
        if r.abs() >= PHASE_MATCH_INDEX_TOL {
            return Err(Error::NotPhaseMatchable(format!(
                "bisection stalled with index residual {r:e}"
            )));
        }
        Ok(alpha)
    }

    /// Walk-off angle between Poynting vector and wavevector of an
    /// extraordinary wave, `tan(rho) = -(1/n) dn/dalpha`.
    pub fn walk_off_angle(&self, lambda_um: f64, alpha: f64) -> Result<f64> {
        check_axis_angle(alpha)?;
        let no = self.index_ordinary(lambda_um)?;
        let ne = self.index_extraordinary_principal(lambda_um)?;
        let n = effective_index(no, ne, alpha);
        let tan_rho = 0.5 * n * n * (2.0 * alpha).sin() * (1.0 / (ne * ne) - 1.0 / (no * no));
        Ok(tan_rho.atan())
    }
}

impl fmt::Display for UniaxialMedium {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}, {}] um", self.name, self.range_um.0, self.range_um.1)
    }
}

/// Bisection bracket for the optic-axis angle, (1 deg, 89 deg).
pub const PHASE_MATCH_BRACKET: (f64, f64) = (PI / 180.0, 89.0 * PI / 180.0);
const PHASE_MATCH_MAX_ITER: usize = 200;
const PHASE_MATCH_INDEX_TOL: f64 = 1e-12;

fn effective_index(no: f64, ne: f64, alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    (c * c / (no * no) + s * s / (ne * ne)).sqrt().recip()
}

fn check_axis_angle(alpha: f64) -> Result<()> {
    if (0.0..=PI / 2.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "optic-axis angle {alpha} rad outside [0, pi/2]"
        )))
    }
}

fn parse_floats(values: &str, line: usize) -> Result<Vec<f64>> {
    values
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::Medium {
                line,
                msg: format!("`{t}` is not a number"),
            })
        })
        .collect()
}

/// Solved collinear degenerate type-I geometry for one pump wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMatchingSolution {
    /// Optic-axis angle (rad).
    pub alpha: f64,
    /// Pump walk-off angle (rad).
    pub theta_walkoff: f64,
    pub k_p: f64,
    pub k_s: f64,
    pub k_i: f64,
}

impl PhaseMatchingSolution {
    pub fn solve(medium: &UniaxialMedium, lambda_pump_m: f64) -> Result<Self> {
        let lp_um = lambda_pump_m * 1e6;
        let alpha = medium.phase_matching_angle(lp_um)?;
        let theta_walkoff = medium.walk_off_angle(lp_um, alpha)?;
        let n_p = medium.index_extraordinary_effective(lp_um, alpha)?;
        let n_s = medium.index_ordinary(2.0 * lp_um)?;
        let k_p = 2.0 * PI * n_p / lambda_pump_m;
        let k_s = 2.0 * PI * n_s / (2.0 * lambda_pump_m);
        Ok(PhaseMatchingSolution {
            alpha,
            theta_walkoff,
            k_p,
            k_s,
            k_i: k_s,
        })
    }

    /// Same wavenumbers, walk-off replaced. Useful for the anisotropy-free reference.
    pub fn with_walkoff(self, theta_walkoff: f64) -> Self {
        PhaseMatchingSolution {
            theta_walkoff,
            ..self
        }
    }
}
