//! Camera simulation: project a spectral cube through RGB transmission curves.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::spectral::{
    resample_curve, CameraResponse, ResampleMode, RgbImage, SpectralCube, WavelengthGrid,
};

/// Per-channel band weights aligned to a wavelength grid (3 rows of `B`).
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    grid: WavelengthGrid,
    rows: [Vec<f64>; 3],
}

impl MixingMatrix {
    /// Explicit weights. Rows are red, green, blue; every weight must be `>= 0`.
    pub fn from_rows(grid: WavelengthGrid, rows: [Vec<f64>; 3]) -> Result<Self> {
        for row in &rows {
            if row.len() != grid.len() {
                return Err(Error::dim(format!(
                    "mixing row has {} weights for a {}-band grid",
                    row.len(),
                    grid.len()
                )));
            }
            if row.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::param("mixing weights must be finite and non-negative"));
            }
        }
        Ok(Self { grid, rows })
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn rows(&self) -> &[Vec<f64>; 3] {
        &self.rows
    }

    pub fn bands(&self) -> usize {
        self.grid.len()
    }

    /// Channel values for one spectrum, unclamped.
    pub fn project(&self, spectrum: &[f32]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().zip(spectrum).map(|(w, &s)| w * s as f64).sum();
        }
        out
    }
}

/// Resamples each transmission curve onto `grid` (endpoint-clamped) and optionally
/// normalizes every row to sum to one.
pub fn build_mixing_matrix(
    response: &CameraResponse,
    grid: &WavelengthGrid,
    normalize: bool,
) -> Result<MixingMatrix> {
    let mut rows: [Vec<f64>; 3] = Default::default();
    for (row, (name, curve)) in rows.iter_mut().zip(response.channels()) {
        let mut r = resample_curve(curve, grid, ResampleMode::Clamp)?;
        if normalize {
            let sum: f64 = r.iter().sum();
            if sum <= 0.0 {
                return Err(Error::DegenerateResponse { channel: name });
            }
            r.iter_mut().for_each(|w| *w /= sum);
        }
        *row = r;
    }
    MixingMatrix::from_rows(grid.clone(), rows)
}

/// `rgb[i, j, k] = sum_b mix[k, b] * cube[i, j, b]`, clamped to `[0, 1]`.
pub fn synthesize_rgb(cube: &SpectralCube, mix: &MixingMatrix) -> Result<RgbImage> {
    if cube.grid() != mix.grid() {
        return Err(Error::dim(format!(
            "cube grid ({} bands) does not match mixing grid ({} bands)",
            cube.bands(),
            mix.bands()
        )));
    }
    let data = cube
        .data()
        .chunks_exact(cube.bands())
        .flat_map(|spectrum| mix.project(spectrum).map(|v| v.clamp(0.0, 1.0) as f32))
        .collect();
    RgbImage::new(cube.width(), cube.height(), data)
}

/// Adds seeded zero-mean Gaussian noise of standard deviation `sigma` to every
/// channel value and clamps the result to `[0, 1]`.
pub fn add_sensor_noise(rgb: &RgbImage, sigma: f64, seed: u64) -> Result<RgbImage> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(rgb.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::param(e.to_string()))?;
    let data = rgb
        .data()
        .iter()
        .map(|&v| (v as f64 + normal.sample(&mut rng)).clamp(0.0, 1.0) as f32)
        .collect();
    RgbImage::new(rgb.width(), rgb.height(), data)
}

/// Rounds every value to the nearest of `2^bits` evenly spaced levels
/// (ties away from zero).
pub fn quantize(rgb: &RgbImage, bits: u32) -> Result<RgbImage> {
    if !(1..=16).contains(&bits) {
        return Err(Error::param(format!("quantization bits must be in 1..=16, got {bits}")));
    }
    let levels = ((1u32 << bits) - 1) as f64;
    let data = rgb
        .data()
        .iter()
        .map(|&v| ((v as f64 * levels).round() / levels) as f32)
        .collect();
    RgbImage::new(rgb.width(), rgb.height(), data)
}

/// Noise first, then quantization, matching the order a real sensor applies them.
pub fn simulate_camera(
    cube: &SpectralCube,
    mix: &MixingMatrix,
    noise_sigma: f64,
    bits: Option<u32>,
    seed: u64,
) -> Result<RgbImage> {
    let mut rgb = synthesize_rgb(cube, mix)?;
    if noise_sigma > 0.0 {
        rgb = add_sensor_noise(&rgb, noise_sigma, seed)?;
    }
    if let Some(bits) = bits {
        rgb = quantize(&rgb, bits)?;
    }
    Ok(rgb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectrumCurve;
    use proptest::prelude::*;

    fn flat_response(value: f64) -> CameraResponse {
        let c = SpectrumCurve::transmission(vec![(400.0, value), (800.0, value)]).unwrap();
        CameraResponse {
            red: c.clone(),
            green: c.clone(),
            blue: c,
        }
    }

    #[test]
    fn constant_response_normalizes_to_uniform() {
        let mix = build_mixing_matrix(&flat_response(1.0), &WavelengthGrid::default(), true).unwrap();
        for row in mix.rows() {
            assert!(row.iter().all(|&w| (w - 1.0 / 24.0).abs() < 1e-15));
        }
    }

    #[test]
    fn zero_response_is_degenerate() {
        let err = build_mixing_matrix(&flat_response(0.0), &WavelengthGrid::default(), true).unwrap_err();
        assert!(matches!(err, Error::DegenerateResponse { channel: "red" }));
    }

    #[test]
    fn gaussian_rows_match_resample_then_normalize() {
        let grid = WavelengthGrid::default();
        let response = CameraResponse::default();
        let mix = build_mixing_matrix(&response, &grid, true).unwrap();
        for (row, (_, curve)) in mix.rows().iter().zip(response.channels()) {
            // independent route: evaluate the piecewise-linear curve by hand
            let s = curve.samples();
            let raw: Vec<f64> = grid
                .as_slice()
                .iter()
                .map(|&w| {
                    let k = s.iter().position(|p| p.0 >= w).unwrap();
                    if s[k].0 == w {
                        s[k].1
                    } else {
                        let (a, b) = (s[k - 1], s[k]);
                        a.1 + (b.1 - a.1) * (w - a.0) / (b.0 - a.0)
                    }
                })
                .collect();
            let total: f64 = raw.iter().sum();
            for (got, want) in row.iter().zip(raw.iter().map(|v| v / total)) {
                assert!((got - want).abs() < 1e-15);
            }
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_cube_gives_black() {
        let grid = WavelengthGrid::default();
        let mix = build_mixing_matrix(&CameraResponse::default(), &grid, true).unwrap();
        let cube = SpectralCube::filled(4, 3, grid, 0.0).unwrap();
        let rgb = synthesize_rgb(&cube, &mix).unwrap();
        assert!(rgb.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flat_unit_spectrum_gives_white() {
        let grid = WavelengthGrid::default();
        let mix = build_mixing_matrix(&CameraResponse::default(), &grid, true).unwrap();
        let cube = SpectralCube::filled(4, 3, grid, 1.0).unwrap();
        let rgb = synthesize_rgb(&cube, &mix).unwrap();
        assert!(rgb.data().iter().all(|&v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn hand_computed_dot_product() {
        let grid = WavelengthGrid::new(vec![460.0, 470.0, 480.0]).unwrap();
        let mix = MixingMatrix::from_rows(
            grid.clone(),
            [vec![0.2, 0.3, 0.5], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]],
        )
        .unwrap();
        let cube = SpectralCube::new(1, 1, grid, vec![0.1, 0.2, 0.4]).unwrap();
        let rgb = synthesize_rgb(&cube, &mix).unwrap();
        // 0.2*0.1 + 0.3*0.2 + 0.5*0.4
        assert!((rgb.data()[0] - 0.28).abs() < 1e-7);
    }

    #[test]
    fn grid_mismatch() {
        let mix = build_mixing_matrix(&CameraResponse::default(), &WavelengthGrid::default(), true).unwrap();
        let cube = SpectralCube::filled(1, 1, WavelengthGrid::uniform(460.0, 10.0, 27).unwrap(), 0.5).unwrap();
        assert!(matches!(synthesize_rgb(&cube, &mix), Err(Error::Dimension(_))));
    }

    fn gray(n: usize, v: f32) -> RgbImage {
        RgbImage::new(n, n, vec![v; n * n * 3]).unwrap()
    }

    #[test]
    fn noise_zero_sigma_is_identity() {
        let img = gray(4, 0.3);
        assert_eq!(add_sensor_noise(&img, 0.0, 1).unwrap(), img);
    }

    #[test]
    fn noise_deterministic_and_negative_rejected() {
        let img = gray(8, 0.5);
        assert_eq!(
            add_sensor_noise(&img, 0.05, 9).unwrap(),
            add_sensor_noise(&img, 0.05, 9).unwrap()
        );
        assert_ne!(
            add_sensor_noise(&img, 0.05, 9).unwrap(),
            add_sensor_noise(&img, 0.05, 10).unwrap()
        );
        assert!(add_sensor_noise(&img, -0.1, 0).is_err());
    }

    #[test]
    fn noise_standard_deviation() {
        // 10^6 interior samples; clamping never triggers at 0.5 +- 50 sigma
        let img = RgbImage::new(1000, 333, vec![0.5; 999_000]).unwrap();
        let noisy = add_sensor_noise(&img, 0.01, 42).unwrap();
        let diffs: Vec<f64> = noisy
            .data()
            .iter()
            .zip(img.data())
            .map(|(a, b)| *a as f64 - *b as f64)
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((std - 0.01).abs() < 0.05 * 0.01, "std = {std}");
        assert!(mean.abs() < 1e-4);
    }

    #[test]
    fn quantize_fixed_points() {
        let lattice: Vec<f32> = (0..=255).flat_map(|k| [k as f32 / 255.0; 3]).collect();
        let img = RgbImage::new(256, 1, lattice).unwrap();
        assert_eq!(quantize(&img, 8).unwrap(), img);
        let ends = RgbImage::new(2, 1, vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        for bits in 1..=16 {
            assert_eq!(quantize(&ends, bits).unwrap(), ends);
        }
    }

    #[test]
    fn quantize_half_rounds_up() {
        let img = gray(1, 0.5);
        assert!(quantize(&img, 1).unwrap().data().iter().all(|&v| v == 1.0));
        assert!(quantize(&img, 0).is_err());
        assert!(quantize(&img, 17).is_err());
    }

    proptest! {
        #[test]
        fn linear_and_monotone(
            a in 0.0f64..0.5, b in 0.0f64..0.5,
            c1 in prop::collection::vec(0.0f32..1.0, 24),
            c2 in prop::collection::vec(0.0f32..1.0, 24),
        ) {
            let grid = WavelengthGrid::default();
            let mix = build_mixing_matrix(&CameraResponse::default(), &grid, true).unwrap();
            let combo: Vec<f32> = c1.iter().zip(&c2).map(|(x, y)| (a * *x as f64 + b * *y as f64) as f32).collect();
            let rgb = |d: &Vec<f32>| synthesize_rgb(&SpectralCube::new(1, 1, grid.clone(), d.clone()).unwrap(), &mix).unwrap();
            let (r1, r2, rc) = (rgb(&c1), rgb(&c2), rgb(&combo));
            for k in 0..3 {
                let lin = a * r1.data()[k] as f64 + b * r2.data()[k] as f64;
                prop_assert!((rc.data()[k] as f64 - lin).abs() < 1e-5);
            }
            // pointwise max dominates both inputs
            let hi: Vec<f32> = c1.iter().zip(&c2).map(|(x, y)| x.max(*y)).collect();
            let rh = rgb(&hi);
            for k in 0..3 {
                prop_assert!(rh.data()[k] >= r1.data()[k] && rh.data()[k] >= r2.data()[k]);
            }
        }

        #[test]
        fn normalized_mix_never_clamps(c in prop::collection::vec(0.0f32..=1.0, 24)) {
            let grid = WavelengthGrid::default();
            let mix = build_mixing_matrix(&CameraResponse::default(), &grid, true).unwrap();
            for v in mix.project(&c) {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
            }
        }
    }
}
