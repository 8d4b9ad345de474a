//! Pump beam and crystal stack geometry.
//!
//! The z axis points along the pump wavevector with its origin at the
//! entrance face of the first slab. Within a slab of walk-off sign `s`, the
//! pump energy centroid moves along `x_c(z) = x0 + s * tan(theta) * (z - z0)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpBeam {
    /// Vacuum wavelength (m).
    pub lambda_p: f64,
    /// Intensity FWHM (m).
    pub fwhm: f64,
    /// Gaussian amplitude width (m), `fwhm / (2 sqrt(ln 2))`.
    pub sigma_x: f64,
}

impl PumpBeam {
    pub fn new(lambda_p: f64, fwhm: f64) -> Result<Self> {
        if !(lambda_p > 0.0 && lambda_p.is_finite()) {
            return Err(Error::Invalid(format!("pump wavelength {lambda_p} must be positive")));
        }
        if !(fwhm > 0.0 && fwhm.is_finite()) {
            return Err(Error::Invalid(format!("pump FWHM {fwhm} must be positive")));
        }
        Ok(PumpBeam {
            lambda_p,
            fwhm,
            sigma_x: fwhm / (2.0 * std::f64::consts::LN_2.sqrt()),
        })
    }
}

/// Sign of the transverse drift of the pump centroid inside a slab.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WalkoffSign {
    Plus,
    Minus,
}

impl WalkoffSign {
    pub fn value(self) -> f64 {
        match self {
            WalkoffSign::Plus => 1.0,
            WalkoffSign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            WalkoffSign::Plus => WalkoffSign::Minus,
            WalkoffSign::Minus => WalkoffSign::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalSlab {
    /// Physical length along z (m).
    pub length: f64,
    pub sign: WalkoffSign,
}

impl CrystalSlab {
    pub fn new(length: f64, sign: WalkoffSign) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Invalid(format!("slab length {length} must be positive")));
        }
        Ok(CrystalSlab { length, sign })
    }
}

/// Entry point of the pump centroid into one slab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabEntry {
    pub z0: f64,
    pub x0: f64,
}

/// An ordered stack of slabs sharing one walk-off magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalStack {
    slabs: Vec<CrystalSlab>,
    theta: f64,
}

impl CrystalStack {
    pub fn new(slabs: Vec<CrystalSlab>, theta: f64) -> Result<Self> {
        if slabs.is_empty() {
            return Err(Error::Invalid("a crystal stack needs at least one slab".into()));
        }
        if !(theta.is_finite() && theta.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Invalid(format!("walk-off angle {theta} rad out of range")));
        }
        Ok(CrystalStack { slabs, theta })
    }

    pub fn slabs(&self) -> &[CrystalSlab] {
        &self.slabs
    }

    /// Walk-off magnitude (rad).
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn total_length(&self) -> f64 {
        self.slabs.iter().map(|s| s.length).sum()
    }

    /// Same slabs with every walk-off sign reversed.
    pub fn mirrored(&self) -> Self {
        CrystalStack {
            slabs: self
                .slabs
                .iter()
                .map(|s| CrystalSlab { sign: s.sign.flipped(), ..*s })
                .collect(),
            theta: self.theta,
        }
    }

    pub fn path(&self) -> PumpPath {
        let tan = self.theta.tan();
        let mut breakpoints = Vec::with_capacity(self.slabs.len() + 1);
        let mut slopes = Vec::with_capacity(self.slabs.len());
        let (mut z, mut x) = (0.0, 0.0);
        breakpoints.push((z, x));
        for slab in &self.slabs {
            let slope = slab.sign.value() * tan;
            z += slab.length;
            x += slope * slab.length;
            breakpoints.push((z, x));
            slopes.push(slope);
        }
        PumpPath { breakpoints, slopes }
    }

    /// Entry points of each slab, chained so the centroid is continuous.
    pub fn entries(&self) -> Vec<SlabEntry> {
        let path = self.path();
        path.breakpoints[..self.slabs.len()]
            .iter()
            .map(|&(z0, x0)| SlabEntry { z0, x0 })
            .collect()
    }

    pub fn pump_centroid(&self, z: f64) -> Result<f64> {
        self.path().centroid(z)
    }
}

/// Piecewise-linear pump centroid path.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpPath {
    /// `(z, x_c)` at the entrance face, every slab boundary and the exit face.
    pub breakpoints: Vec<(f64, f64)>,
    pub slopes: Vec<f64>,
}

impl PumpPath {
    pub fn centroid(&self, z: f64) -> Result<f64> {
        let z_end = self.breakpoints.last().map_or(0.0, |b| b.0);
        if !(0.0..=z_end).contains(&z) {
            return Err(Error::Domain(format!("z = {z} m outside the stack [0, {z_end}] m")));
        }
        let j = self.breakpoints[1..]
            .iter()
            .position(|&(zb, _)| z <= zb)
            .unwrap_or(self.slopes.len() - 1);
        let (z0, x0) = self.breakpoints[j];
        Ok(x0 + self.slopes[j] * (z - z0))
    }
}

/// Named stack configurations compared throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StackPreset {
    /// One slab, anisotropy neglected.
    SingleIso,
    /// One slab with walk-off.
    SingleAniso,
    /// Two half-length slabs, same walk-off direction.
    NonComp,
    /// Two half-length slabs, opposite walk-off directions.
    Comp,
}

impl StackPreset {
    pub const ALL: [StackPreset; 4] = [
        StackPreset::SingleIso,
        StackPreset::SingleAniso,
        StackPreset::NonComp,
        StackPreset::Comp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StackPreset::SingleIso => "single_iso",
            StackPreset::SingleAniso => "single_aniso",
            StackPreset::NonComp => "noncomp",
            StackPreset::Comp => "comp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn build(self, total_length: f64, theta: f64) -> Result<CrystalStack> {
        use WalkoffSign::{Minus, Plus};
        let half = 0.5 * total_length;
        match self {
            StackPreset::SingleIso => {
                CrystalStack::new(vec![CrystalSlab::new(total_length, Plus)?], 0.0)
            }
            StackPreset::SingleAniso => {
                CrystalStack::new(vec![CrystalSlab::new(total_length, Plus)?], theta)
            }
            StackPreset::NonComp => CrystalStack::new(
                vec![CrystalSlab::new(half, Plus)?, CrystalSlab::new(half, Plus)?],
                theta,
            ),
            StackPreset::Comp => CrystalStack::new(
                vec![CrystalSlab::new(half, Plus)?, CrystalSlab::new(half, Minus)?],
                theta,
            ),
        }
    }
}

/// The four preset stacks for a total length and walk-off angle.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardStacks {
    pub single_iso: CrystalStack,
    pub single_aniso: CrystalStack,
    pub noncomp: CrystalStack,
    pub comp: CrystalStack,
}

pub fn make_standard_stacks(total_length: f64, theta: f64) -> Result<StandardStacks> {
    Ok(StandardStacks {
        single_iso: StackPreset::SingleIso.build(total_length, theta)?,
        single_aniso: StackPreset::SingleAniso.build(total_length, theta)?,
        noncomp: StackPreset::NonComp.build(total_length, theta)?,
        comp: StackPreset::Comp.build(total_length, theta)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const THETA: f64 = 0.074;

    #[test]
    fn sigma_from_fwhm() {
        let pump = PumpBeam::new(354.7e-9, 70e-6).unwrap();
        assert_eq!(pump.sigma_x, 70e-6 / (2.0 * 2f64.ln().sqrt()));
        assert!(PumpBeam::new(354.7e-9, 0.0).is_err());
    }

    #[test]
    fn single_slab_walk_off_distance() {
        let s = StackPreset::SingleAniso.build(6e-3, THETA).unwrap();
        assert_relative_eq!(s.pump_centroid(6e-3).unwrap(), 6e-3 * THETA.tan(), max_relative = 1e-15);
        assert_eq!(s.pump_centroid(0.0).unwrap(), 0.0);
    }

    #[test]
    fn compensated_path_returns_to_axis() {
        let s = StackPreset::Comp.build(6e-3, THETA).unwrap();
        assert!(s.pump_centroid(6e-3).unwrap().abs() < 1e-18);
        let n = StackPreset::NonComp.build(6e-3, THETA).unwrap();
        assert_relative_eq!(n.pump_centroid(6e-3).unwrap(), 6e-3 * THETA.tan(), max_relative = 1e-15);
    }

    #[test]
    fn preset_lengths() {
        let st = make_standard_stacks(6e-3, THETA).unwrap();
        assert_eq!(st.single_aniso.slabs()[0].length, 6e-3);
        assert!(st.comp.slabs().iter().all(|s| s.length == 3e-3));
        assert_eq!(st.noncomp.total_length(), st.single_aniso.total_length());
        assert_eq!(st.single_iso.theta(), 0.0);
    }

    #[test]
    fn centroid_domain() {
        let s = StackPreset::Comp.build(6e-3, THETA).unwrap();
        assert!(matches!(s.pump_centroid(-1e-9), Err(Error::Domain(_))));
        assert!(s.pump_centroid(6.1e-3).is_err());
    }

    #[test]
    fn invalid_construction() {
        assert!(CrystalSlab::new(-1.0, WalkoffSign::Plus).is_err());
        assert!(CrystalStack::new(vec![], 0.1).is_err());
    }

    fn arb_stack() -> impl Strategy<Value = CrystalStack> {
        (
            prop::collection::vec((1e-4..5e-3f64, any::<bool>()), 1..6),
            0.0..0.2f64,
        )
            .prop_map(|(slabs, theta)| {
                let slabs = slabs
                    .into_iter()
                    .map(|(l, plus)| {
                        CrystalSlab::new(l, if plus { WalkoffSign::Plus } else { WalkoffSign::Minus })
                            .unwrap()
                    })
                    .collect();
                CrystalStack::new(slabs, theta).unwrap()
            })
    }

    proptest! {
        #[test]
        fn centroid_is_continuous(stack in arb_stack()) {
            let path = stack.path();
            for (j, &(zb, xb)) in path.breakpoints.iter().enumerate().skip(1).take(stack.slabs().len() - 1) {
                let (z0, x0) = path.breakpoints[j - 1];
                let left = x0 + path.slopes[j - 1] * (zb - z0);
                let right = xb;
                prop_assert!((left - right).abs() <= 1e-15 * (1.0 + xb.abs()));
                prop_assert_eq!(stack.pump_centroid(zb).unwrap(), left);
            }
        }

        #[test]
        fn mirroring_flips_the_path(stack in arb_stack(), frac in 0.0..1.0f64) {
            let z = frac * stack.total_length();
            let a = stack.pump_centroid(z).unwrap();
            let b = stack.mirrored().pump_centroid(z).unwrap();
            prop_assert!((a + b).abs() <= 1e-18 + 1e-15 * a.abs());
        }
    }
}
