//! Curve CSV files and the camera transmission model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectrumCurve;

/// Reads a comma-separated numeric table whose header must equal `header`.
/// Returns one vector per column.
pub fn read_table_csv(path: impl AsRef<Path>, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_table(&bytes, header).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub(crate) fn parse_table(bytes: &[u8], header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let found: Vec<String> = reader
        .headers()
        .map_err(|e| Error::format(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if found != header {
        return Err(Error::format(format!(
            "expected header `{}`, found `{}`",
            header.join(","),
            found.join(",")
        )));
    }
    let mut columns = vec![Vec::new(); header.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(e.to_string()))?;
        if record.len() != header.len() {
            return Err(Error::format(format!("row {} has {} fields", line + 2, record.len())));
        }
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::format(format!("row {}: bad number {field:?}", line + 2)))?;
            col.push(v);
        }
    }
    Ok(columns)
}

pub fn write_table_csv(path: impl AsRef<Path>, header: &[&str], columns: &[Vec<f64>]) -> Result<()> {
    let path = path.as_ref();
    let mut out = header.join(",");
    out.push('\n');
    let rows = columns.first().map_or(0, Vec::len);
    for r in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| c[r].to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a single curve from a `wavelength_nm,value` file.
pub fn read_curve_csv(path: impl AsRef<Path>) -> Result<SpectrumCurve> {
    let cols = read_table_csv(path, &["wavelength_nm", "value"])?;
    let samples = cols[0].iter().copied().zip(cols[1].iter().copied()).collect();
    SpectrumCurve::new(samples).map_err(|e| Error::format(e.to_string()))
}

/// Red, green and blue transmission curves of the simulated camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraResponse {
    pub red: SpectrumCurve,
    pub green: SpectrumCurve,
    pub blue: SpectrumCurve,
}

const CAMERA_HEADER: [&str; 4] = ["wavelength_nm", "red", "green", "blue"];

impl CameraResponse {
    /// Gaussian transmission bands peaked at 620/540/460 nm with a 60 nm FWHM,
    /// sampled every 5 nm over 380..=780 nm and truncated to zero below 1e-3.
    pub fn gaussian_default() -> Self {
        let sigma = 60.0 / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
        let band = |peak: f64| {
            let samples = (0..=80)
                .map(|k| {
                    let w = 380.0 + 5.0 * k as f64;
                    let v = (-0.5 * ((w - peak) / sigma).powi(2)).exp();
                    (w, if v < 1e-3 { 0.0 } else { v })
                })
                .collect();
            SpectrumCurve::transmission(samples).expect("gaussian band is a valid transmission")
        };
        Self {
            red: band(620.0),
            green: band(540.0),
            blue: band(460.0),
        }
    }

    /// Reads a `wavelength_nm,red,green,blue` file.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let cols = read_table_csv(path, &CAMERA_HEADER)?;
        Self::from_columns(&cols)
    }

    pub(crate) fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let curve = |k: usize| {
            let samples = cols[0].iter().copied().zip(cols[k].iter().copied()).collect();
            SpectrumCurve::transmission(samples).map_err(|e| Error::format(e.to_string()))
        };
        Ok(Self {
            red: curve(1)?,
            green: curve(2)?,
            blue: curve(3)?,
        })
    }

    /// Writes the response as CSV. All three curves must share wavelengths.
    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let wl: Vec<f64> = self.red.samples().iter().map(|s| s.0).collect();
        for c in [&self.green, &self.blue] {
            if c.samples().iter().map(|s| s.0).ne(wl.iter().copied()) {
                return Err(Error::param("camera curves are sampled on different wavelengths"));
            }
        }
        let values = |c: &SpectrumCurve| c.samples().iter().map(|s| s.1).collect::<Vec<_>>();
        write_table_csv(
            path,
            &CAMERA_HEADER,
            &[wl.clone(), values(&self.red), values(&self.green), values(&self.blue)],
        )
    }

    pub fn channels(&self) -> [(&'static str, &SpectrumCurve); 3] {
        [("red", &self.red), ("green", &self.green), ("blue", &self.blue)]
    }
}

impl Default for CameraResponse {
    fn default() -> Self {
        Self::gaussian_default()
    }
}
