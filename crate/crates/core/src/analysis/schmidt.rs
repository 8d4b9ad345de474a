use nalgebra::DMatrix;
use num_complex::Complex64;

use super::TpaGrid;
use crate::error::{Error, Result};

const SVD_MAX_ITER: usize = 10_000;

/// Schmidt decomposition `F(θs, θi) ≈ Σ sqrt(λn) un(θs) vn(θi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    /// Normalized eigenvalues, descending, summing to one.
    pub lambdas: Vec<f64>,
    /// Schmidt number `1 / Σ λn²`.
    pub k: f64,
    /// Singular values of the quadrature-weighted kernel `F Δθs^½ Δθi^½`.
    pub singular_values: Vec<f64>,
    /// Leading signal modes, each normalized as `Σ |u|² Δθs = 1`.
    pub modes_s: Vec<Vec<Complex64>>,
    /// Leading idler modes, each normalized as `Σ |v|² Δθi = 1`.
    pub modes_i: Vec<Vec<Complex64>>,
    step_s: f64,
    step_i: f64,
}

impl SchmidtSpectrum {
    /// Kernel rebuilt from the first `r` kept modes, same layout as [`TpaGrid::values`].
    pub fn reconstruct(&self, r: usize) -> Vec<Complex64> {
        let r = r.min(self.modes_s.len());
        let (rows, cols) = (self.modes_s.first().map_or(0, Vec::len), self.modes_i.first().map_or(0, Vec::len));
        let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
        for n in 0..r {
            let s = self.singular_values[n];
            for a in 0..rows {
                let ua = self.modes_s[n][a] * s;
                for b in 0..cols {
                    out[a * cols + b] += ua * self.modes_i[n][b];
                }
            }
        }
        out
    }
}

/// SVD of the quadrature-weighted amplitude, keeping `r` mode profiles.
pub fn schmidt_decompose(grid: &TpaGrid, r: usize) -> Result<SchmidtSpectrum> {
    let (rows, cols) = (grid.rows(), grid.cols());
    if r > rows.min(cols) {
        return Err(Error::Invalid(format!(
            "cannot keep {r} Schmidt modes of a {rows}x{cols} grid"
        )));
    }
    let (step_s, step_i) = (grid.spec_s.step(), grid.spec_i.step());
    let w = (step_s * step_i).sqrt();
    let m = DMatrix::from_fn(rows, cols, |a, b| grid.at(a, b) * w);
    let svd = m
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(Error::Svd {
            iterations: SVD_MAX_ITER,
            rows,
            cols,
        })?;

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let singular_values: Vec<f64> = order.iter().map(|&j| svd.singular_values[j]).collect();

    let energy: f64 = singular_values.iter().map(|s| s * s).sum();
    let lambdas: Vec<f64> = singular_values.iter().map(|s| s * s / energy).collect();
    let k = lambdas.iter().map(|l| l * l).sum::<f64>().recip();

    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^H");
    let (ns, ni) = (step_s.sqrt(), step_i.sqrt());
    let modes_s = order[..r]
        .iter()
        .map(|&j| u.column(j).iter().map(|z| z / ns).collect())
        .collect();
    // Rows of V^H are conjugated right singular vectors, which is the idler
    // factor of F = Σ s u v^T.
    let modes_i = order[..r]
        .iter()
        .map(|&j| v_t.row(j).iter().map(|z| z / ni).collect())
        .collect();

    Ok(SchmidtSpectrum {
        lambdas,
        k,
        singular_values,
        modes_s,
        modes_i,
        step_s,
        step_i,
    })
}
