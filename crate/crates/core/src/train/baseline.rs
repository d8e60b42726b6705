use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spectral::{RgbImage, SpectralCube, WavelengthGrid};
use crate::train::PixelDataset;

/// Per-band affine function of `(r, g, b, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    /// One `[w_r, w_g, w_b, bias]` row per band.
    pub rows: Vec<[f64; 4]>,
}

impl AffineMap {
    pub fn bands(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, rgb: &[f32]) -> Vec<f64> {
        let (r, g, b) = (rgb[0] as f64, rgb[1] as f64, rgb[2] as f64);
        self.rows
            .iter()
            .map(|w| w[0] * r + w[1] * g + w[2] * b + w[3])
            .collect()
    }

    /// Applies the map to every pixel; outputs are clamped to `[0, 1]`.
    pub fn predict_image(&self, rgb: &RgbImage, grid: &WavelengthGrid) -> Result<SpectralCube> {
        if grid.len() != self.bands() {
            return Err(Error::dim(format!(
                "grid has {} bands, map has {}",
                grid.len(),
                self.bands()
            )));
        }
        let data = rgb
            .data()
            .chunks_exact(3)
            .flat_map(|px| self.apply(px).into_iter().map(|v| v as f32))
            .collect();
        SpectralCube::from_unclamped(rgb.width(), rgb.height(), grid.clone(), data)
    }
}

/// Ordinary least squares fit of every band as an affine function of RGB.
pub fn linear_baseline(data: &PixelDataset) -> Result<AffineMap> {
    let n = data.len();
    if n < 4 {
        return Err(Error::DegenerateData(format!("{n} samples cannot determine an affine map")));
    }
    let bands = data.bands();
    let x = DMatrix::from_fn(n, 4, |r, c| if c == 3 { 1.0 } else { data.input(r)[c] as f64 });
    let y = DMatrix::from_fn(n, bands, |r, c| data.target(r)[c] as f64);
    let qr = x.qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if r.diagonal().iter().any(|d| d.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateData("RGB design matrix is rank deficient".into()));
    }
    let qty = qr.q().transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::DegenerateData("singular triangular factor".into()))?;
    Ok(AffineMap {
        rows: (0..bands)
            .map(|b| [coef[(0, b)], coef[(1, b)], coef[(2, b)], coef[(3, b)]])
            .collect(),
    })
}
