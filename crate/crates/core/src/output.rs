//! File formats: long-format CSV grids, two-column distributions, 16-bit PGM.
//!
//! Floats are written with 17 significant digits so every value parses back
//! to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::analysis::{AngularDistribution, TpaGrid};
use crate::error::{Error, Result};

pub const GRID_HEADER: &str = "theta_s_rad,theta_i_rad,re_F,im_F,abs2_F";
pub const DISTRIBUTION_HEADER: &str = "theta_rad,p";

fn num(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").expect("writing to a String cannot fail");
}

pub fn grid_csv(grid: &TpaGrid) -> String {
    let mut out = String::with_capacity(96 * grid.values.len());
    out.push_str(GRID_HEADER);
    out.push('\n');
    for (a, &ts) in grid.axis_s.iter().enumerate() {
        for (b, &ti) in grid.axis_i.iter().enumerate() {
            let f = grid.at(a, b);
            for (k, v) in [ts, ti, f.re, f.im, f.norm_sqr()].into_iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                num(&mut out, v);
            }
            out.push('\n');
        }
    }
    out
}

pub fn distribution_csv(d: &AngularDistribution) -> String {
    let mut out = String::with_capacity(48 * d.p.len());
    out.push_str(DISTRIBUTION_HEADER);
    out.push('\n');
    for (&t, &p) in d.axis.iter().zip(&d.p) {
        num(&mut out, t);
        out.push(',');
        num(&mut out, p);
        out.push('\n');
    }
    out
}

/// Sampled grid as read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRecord {
    pub axis_s: Vec<f64>,
    pub axis_i: Vec<f64>,
    pub values: Vec<Complex64>,
}

fn parse_rows(text: &str, header: &str, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines();
    let bad = |line: usize, msg: String| Error::Config { line, msg };
    match lines.next() {
        Some(h) if h == header => {}
        other => return Err(bad(1, format!("expected header `{header}`, got {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let row = l
                .split(',')
                .map(|t| t.parse::<f64>().map_err(|_| bad(i + 2, format!("`{t}` is not a number"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != columns {
                return Err(bad(i + 2, format!("expected {columns} columns, got {}", row.len())));
            }
            Ok(row)
        })
        .collect()
}

pub fn parse_grid_csv(text: &str) -> Result<GridRecord> {
    let rows = parse_rows(text, GRID_HEADER, 5)?;
    let mut axis_s: Vec<f64> = Vec::new();
    let mut axis_i: Vec<f64> = Vec::new();
    for r in &rows {
        if axis_s.last() != Some(&r[0]) {
            axis_s.push(r[0]);
        }
        if axis_s.len() == 1 {
            axis_i.push(r[1]);
        }
    }
    if axis_s.len() * axis_i.len() != rows.len() {
        return Err(Error::Config {
            line: 0,
            msg: "grid CSV is not a full rectangular grid".into(),
        });
    }
    Ok(GridRecord {
        axis_s,
        axis_i,
        values: rows.iter().map(|r| Complex64::new(r[2], r[3])).collect(),
    })
}

pub fn parse_distribution_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = parse_rows(text, DISTRIBUTION_HEADER, 2)?;
    Ok(rows.into_iter().map(|r| (r[0], r[1])).unzip())
}

/// Binary 16-bit PGM of |F|², linearly mapped onto `[0, 65535]` per image.
///
/// Columns run along θs (left to right), rows along θi with the largest
/// angle on top.
pub fn intensity_pgm(grid: &TpaGrid) -> Vec<u8> {
    let (w, h) = (grid.rows(), grid.cols());
    let max = grid.values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    let scale = if max > 0.0 { 65535.0 / max } else { 0.0 };
    let mut out = format!("P5\n{w} {h}\n65535\n").into_bytes();
    out.reserve(2 * w * h);
    for b in (0..h).rev() {
        for a in 0..w {
            let level = (grid.intensity(a, b) * scale).round().clamp(0.0, 65535.0) as u16;
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{unconditional_distribution, Axis, GridSpec};
    use proptest::prelude::*;

    fn grid(phase: f64, width: f64) -> TpaGrid {
        let spec = GridSpec::symmetric(0.013, 17).unwrap();
        TpaGrid::from_fn(spec, spec, |s, i| {
            Complex64::from_polar((-(s * s + 0.5 * i * i) / (width * width)).exp(), phase * (s - i) * 1e3)
        })
        .unwrap()
    }

    proptest! {
        #[test]
        fn grid_csv_round_trips(phase in -3.0..3.0f64, width in 1e-3..2e-2f64) {
            let g = grid(phase, width);
            let rec = parse_grid_csv(&grid_csv(&g)).unwrap();
            prop_assert_eq!(&rec.axis_s, &g.axis_s);
            prop_assert_eq!(&rec.axis_i, &g.axis_i);
            prop_assert_eq!(&rec.values, &g.values);
        }

        #[test]
        fn distribution_csv_round_trips(width in 1e-3..2e-2f64) {
            let d = unconditional_distribution(&grid(0.5, width), Axis::Idler);
            let (axis, p) = parse_distribution_csv(&distribution_csv(&d)).unwrap();
            prop_assert_eq!(axis, d.axis);
            prop_assert_eq!(p, d.p);
        }
    }

    #[test]
    fn pgm_layout() {
        let g = grid(0.0, 5e-3);
        let img = intensity_pgm(&g);
        let header = b"P5\n17 17\n65535\n";
        assert_eq!(&img[..header.len()], header);
        assert_eq!(img.len(), header.len() + 2 * 17 * 17);
        // peak at the centre pixel
        let centre = header.len() + 2 * (8 * 17 + 8);
        assert_eq!(&img[centre..centre + 2], &[0xff, 0xff]);
    }

    #[test]
    fn rejects_bad_csv() {
        assert!(parse_distribution_csv("theta,p\n0,1\n").is_err());
        assert!(parse_distribution_csv("theta_rad,p\n0,x\n").is_err());
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
