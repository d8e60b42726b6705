//! Wavelength-indexed data model shared by the rest of the crate.
//!
//! Cubes and images are stored band-interleaved-by-pixel (BIP): the full
//! spectrum of pixel `(i, j)` lives at `data[(i * width + j) * bands ..]`.

mod container;
mod curves;
mod resample;

pub use container::{decode_container, encode_container, ContainerHeader, MAGIC};
pub use curves::{read_curve_csv, read_table_csv, write_table_csv, CameraResponse};
pub use resample::{resample_curve, ResampleMode};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing wavelengths in nm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WavelengthGrid(Vec<f64>);

impl WavelengthGrid {
    pub fn new(wavelengths: Vec<f64>) -> Result<Self> {
        if wavelengths.len() < 2 {
            return Err(Error::param("wavelength grid needs at least 2 entries"));
        }
        check_increasing(&wavelengths, "wavelength grid")?;
        Ok(Self(wavelengths))
    }

    /// `count` wavelengths starting at `start` with spacing `step`.
    pub fn uniform(start: f64, step: f64, count: usize) -> Result<Self> {
        Self::new((0..count).map(|k| start + step * k as f64).collect())
    }

    /// The 24-band working grid, 460 nm to 690 nm in 10 nm steps.
    pub fn msi_default() -> Self {
        Self::uniform(460.0, 10.0, 24).expect("static grid is valid")
    }

    /// Sentinel channel grid `[0, 1, 2]` used when an RGB image rides in a cube container.
    pub fn rgb_sentinel() -> Self {
        Self(vec![0.0, 1.0, 2.0])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }

    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Grid mapped affinely onto `[0, 1]`.
    pub fn normalized(&self) -> Vec<f64> {
        let (lo, hi) = (self.first(), self.last());
        self.0.iter().map(|w| (w - lo) / (hi - lo)).collect()
    }
}

impl Default for WavelengthGrid {
    fn default() -> Self {
        Self::msi_default()
    }
}

impl TryFrom<Vec<f64>> for WavelengthGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WavelengthGrid> for Vec<f64> {
    fn from(g: WavelengthGrid) -> Self {
        g.0
    }
}

fn check_increasing(values: &[f64], what: &str) -> Result<()> {
    if values.iter().any(|w| !w.is_finite()) {
        return Err(Error::param(format!("{what} contains non-finite wavelengths")));
    }
    if let Some(pair) = values.windows(2).find(|p| p[1] <= p[0]) {
        return Err(Error::param(format!(
            "{what} must be strictly increasing ({} followed by {})",
            pair[0], pair[1]
        )));
    }
    Ok(())
}

/// A wavelength-sampled curve: a transmission, an extinction coefficient, ...
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    samples: Vec<(f64, f64)>,
}

impl SpectrumCurve {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::param("a spectrum curve needs at least 2 samples"));
        }
        let wl: Vec<f64> = samples.iter().map(|s| s.0).collect();
        check_increasing(&wl, "curve")?;
        if samples.iter().any(|s| !s.1.is_finite()) {
            return Err(Error::param("curve values must be finite"));
        }
        Ok(Self { samples })
    }

    /// A curve in the transmission role; values must lie in `[0, 1]`.
    pub fn transmission(samples: Vec<(f64, f64)>) -> Result<Self> {
        let curve = Self::new(samples)?;
        if let Some(bad) = curve.samples.iter().find(|s| !(0.0..=1.0).contains(&s.1)) {
            return Err(Error::param(format!(
                "transmission at {} nm is {}, outside [0, 1]",
                bad.0, bad.1
            )));
        }
        Ok(curve)
    }

    /// Samples a function on an existing grid.
    pub fn from_fn(grid: &WavelengthGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.as_slice().iter().map(|&w| (w, f(w))).collect())
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Wavelength range covered by the samples.
    pub fn support(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }
}

/// A `width x height x bands` reflectance volume in `[0, 1]`, BIP layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCube {
    width: usize,
    height: usize,
    grid: WavelengthGrid,
    data: Vec<f32>,
}

impl SpectralCube {
    pub fn new(width: usize, height: usize, grid: WavelengthGrid, data: Vec<f32>) -> Result<Self> {
        check_raster(width, height, grid.len(), &data)?;
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::param(format!("cube value {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            grid,
            data,
        })
    }

    /// Like [`SpectralCube::new`] but clamps finite values into `[0, 1]`.
    pub fn from_unclamped(
        width: usize,
        height: usize,
        grid: WavelengthGrid,
        mut data: Vec<f32>,
    ) -> Result<Self> {
        check_raster(width, height, grid.len(), &data)?;
        data.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        Ok(Self {
            width,
            height,
            grid,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, grid: WavelengthGrid, value: f32) -> Result<Self> {
        let n = width * height * grid.len();
        Self::new(width, height, grid, vec![value; n])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.grid.len()
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Spectrum of the pixel at row `i`, column `j`.
    pub fn pixel_spectrum(&self, i: usize, j: usize) -> Result<&[f32]> {
        if i >= self.height || j >= self.width {
            return Err(Error::Bounds {
                row: i,
                col: j,
                height: self.height,
                width: self.width,
            });
        }
        let b = self.bands();
        let start = (i * self.width + j) * b;
        Ok(&self.data[start..start + b])
    }

    /// Overwrites one pixel's spectrum; values are clamped into `[0, 1]`.
    pub fn set_pixel_spectrum(&mut self, i: usize, j: usize, spectrum: &[f32]) -> Result<()> {
        self.pixel_spectrum(i, j)?;
        if spectrum.len() != self.bands() {
            return Err(Error::dim(format!(
                "spectrum has {} values, cube has {} bands",
                spectrum.len(),
                self.bands()
            )));
        }
        if spectrum.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("spectrum contains non-finite values"));
        }
        let b = self.bands();
        let start = (i * self.width + j) * b;
        for (dst, src) in self.data[start..start + b].iter_mut().zip(spectrum) {
            *dst = src.clamp(0.0, 1.0);
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        container::write_file(
            path.as_ref(),
            &ContainerHeader::new(self.width, self.height, self.grid.as_slice().to_vec()),
            &self.data,
        )
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let (header, data) = container::read_file(path.as_ref())?;
        Self::from_container(header, data)
    }

    pub(crate) fn from_container(header: ContainerHeader, data: Vec<f32>) -> Result<Self> {
        let grid = WavelengthGrid::new(header.wavelengths_nm)
            .map_err(|e| Error::format(format!("cube header: {e}")))?;
        Self::new(header.width, header.height, grid, data)
            .map_err(|e| Error::format(format!("cube payload: {e}")))
    }
}

/// Writes `cube` to a `.mcube` file.
pub fn save_cube(cube: &SpectralCube, path: impl AsRef<std::path::Path>) -> Result<()> {
    cube.save(path)
}

/// Reads a `.mcube` file holding a spectral cube.
pub fn load_cube(path: impl AsRef<std::path::Path>) -> Result<SpectralCube> {
    SpectralCube::load(path)
}

/// A `width x height` RGB image with channel values in `[0, 1]`, per-pixel triples contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_raster(width, height, 3, &data)?;
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::param(format!("rgb value {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_unclamped(width: usize, height: usize, mut data: Vec<f32>) -> Result<Self> {
        check_raster(width, height, 3, &data)?;
        data.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, i: usize, j: usize) -> Result<[f32; 3]> {
        if i >= self.height || j >= self.width {
            return Err(Error::Bounds {
                row: i,
                col: j,
                height: self.height,
                width: self.width,
            });
        }
        let s = (i * self.width + j) * 3;
        Ok([self.data[s], self.data[s + 1], self.data[s + 2]])
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        container::write_file(
            path.as_ref(),
            &ContainerHeader::new(self.width, self.height, vec![0.0, 1.0, 2.0]),
            &self.data,
        )
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let (header, data) = container::read_file(path.as_ref())?;
        if header.bands != 3 || header.wavelengths_nm != [0.0, 1.0, 2.0] {
            return Err(Error::format(format!(
                "expected an RGB container (3 sentinel channels), found {} bands",
                header.bands
            )));
        }
        Self::new(header.width, header.height, data)
            .map_err(|e| Error::format(format!("rgb payload: {e}")))
    }

    /// 8-bit binary PPM for viewing. Not read back by anything in this crate.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.data.iter().map(|v| (v * 255.0).round() as u8));
        out
    }

    pub fn save_ppm(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_ppm()).map_err(|e| Error::io(path, e))
    }
}

/// A single-valued `width x height` map (SO2 estimates, ground-truth fields).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl ScalarMap {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_raster(width, height, 1, &data)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.data[i * self.width + j]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len().max(1) as f64
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        container::write_file(
            path.as_ref(),
            &ContainerHeader::new(self.width, self.height, vec![0.0]),
            &self.data,
        )
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let (header, data) = container::read_file(path.as_ref())?;
        if header.bands != 1 {
            return Err(Error::format(format!(
                "expected a 1-band map, found {} bands",
                header.bands
            )));
        }
        Self::new(header.width, header.height, data)
    }
}

fn check_raster(width: usize, height: usize, bands: usize, data: &[f32]) -> Result<()> {
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(bands))
        .ok_or_else(|| Error::dim("raster size overflows"))?;
    if data.len() != expected {
        return Err(Error::dim(format!(
            "{width}x{height}x{bands} raster needs {expected} values, got {}",
            data.len()
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("raster contains non-finite values"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_24_bands() {
        let g = WavelengthGrid::default();
        assert_eq!(g.len(), 24);
        assert_eq!(g.first(), 460.0);
        assert_eq!(g.last(), 690.0);
    }

    #[test]
    fn grid_rejects_non_increasing() {
        assert!(WavelengthGrid::new(vec![460.0]).is_err());
        assert!(WavelengthGrid::new(vec![460.0, 460.0]).is_err());
        assert!(WavelengthGrid::new(vec![470.0, 460.0]).is_err());
    }

    #[test]
    fn transmission_range_enforced() {
        assert!(SpectrumCurve::transmission(vec![(400.0, 0.0), (500.0, 1.2)]).is_err());
        assert!(SpectrumCurve::transmission(vec![(400.0, 0.0), (500.0, 1.0)]).is_ok());
        assert!(SpectrumCurve::new(vec![(400.0, f64::NAN), (500.0, 1.0)]).is_err());
    }

    #[test]
    fn pixel_spectrum_single_pixel() {
        let grid = WavelengthGrid::uniform(500.0, 10.0, 4).unwrap();
        let s = vec![0.1, 0.2, 0.3, 0.4];
        let cube = SpectralCube::new(1, 1, grid, s.clone()).unwrap();
        assert_eq!(cube.pixel_spectrum(0, 0).unwrap(), &s[..]);
    }

    #[test]
    fn pixel_spectrum_constant_cube() {
        let cube = SpectralCube::filled(3, 2, WavelengthGrid::default(), 0.5).unwrap();
        assert!(cube.pixel_spectrum(1, 2).unwrap().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn pixel_spectrum_reads_marker() {
        let grid = WavelengthGrid::uniform(500.0, 10.0, 3).unwrap();
        let mut cube = SpectralCube::filled(4, 3, grid, 0.0).unwrap();
        let marker = [0.25, 0.5, 0.75];
        cube.set_pixel_spectrum(1, 2, &marker).unwrap();
        assert_eq!(cube.pixel_spectrum(1, 2).unwrap(), &marker);
        // layout contract: (i * W + j) * B + b
        let flat = (4 + 2) * 3;
        assert_eq!(&cube.data()[flat..flat + 3], &marker);
        assert!(cube.pixel_spectrum(1, 1).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pixel_spectrum_out_of_range() {
        let cube = SpectralCube::filled(4, 3, WavelengthGrid::default(), 0.0).unwrap();
        assert!(matches!(
            cube.pixel_spectrum(3, 0),
            Err(Error::Bounds { row: 3, .. })
        ));
        assert!(cube.pixel_spectrum(0, 4).is_err());
    }

    #[test]
    fn cube_rejects_wrong_length_and_range() {
        let g = WavelengthGrid::default();
        assert!(SpectralCube::new(2, 2, g.clone(), vec![0.0; 95]).is_err());
        let mut d = vec![0.0; 96];
        d[5] = 1.5;
        assert!(SpectralCube::new(2, 2, g.clone(), d.clone()).is_err());
        let c = SpectralCube::from_unclamped(2, 2, g, d).unwrap();
        assert_eq!(c.data()[5], 1.0);
    }

    #[test]
    fn ppm_header() {
        let img = RgbImage::new(2, 1, vec![0.0, 0.5, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let ppm = img.to_ppm();
        assert!(ppm.starts_with(b"P6\n2 1\n255\n"));
        assert_eq!(&ppm[ppm.len() - 6..], &[0, 128, 255, 255, 255, 255]);
    }
}
