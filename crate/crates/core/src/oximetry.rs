//! Oxygen saturation from reflectance spectra: fit the absorbance with a
//! nonnegative combination of oxy- and deoxy-haemoglobin extinction curves
//! plus an optional smooth baseline.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    read_table_csv, resample_curve, write_table_csv, ResampleMode, ScalarMap, SpectralCube,
    SpectrumCurve, WavelengthGrid,
};

pub const CHROMOPHORE_HEADER: [&str; 3] = ["wavelength_nm", "eps_hbo2", "eps_hb"];
/// Reflectance floor applied before taking the logarithm.
pub const REFLECTANCE_FLOOR: f64 = 1e-6;
/// Minimum total haemoglobin `a + b` for a defined saturation.
pub const SO2_TAU: f64 = 1e-9;
const MAX_CONDITION: f64 = 1e6;

fn gaussian(x: f64, mu: f64, sigma: f64) -> f64 {
    (-(x - mu).powi(2) / (2.0 * sigma * sigma)).exp()
}

/// Extinction curves of HbO2 and Hb, resampled on a working grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChromophoreSet {
    hbo2: SpectrumCurve,
    hb: SpectrumCurve,
    grid: WavelengthGrid,
    eps_hbo2: Vec<f64>,
    eps_hb: Vec<f64>,
}

impl ChromophoreSet {
    /// Resamples both curves onto `grid` (which must lie inside their support)
    /// and checks that the resulting basis is nonnegative and well conditioned.
    pub fn new(hbo2: SpectrumCurve, hb: SpectrumCurve, grid: WavelengthGrid) -> Result<Self> {
        let eps_hbo2 = resample_curve(&hbo2, &grid, ResampleMode::Strict)?;
        let eps_hb = resample_curve(&hb, &grid, ResampleMode::Strict)?;
        for (name, v) in [("HbO2", &eps_hbo2), ("Hb", &eps_hb)] {
            if let Some(pos) = v.iter().position(|&e| e < 0.0) {
                return Err(Error::Basis(format!(
                    "{name} extinction is negative at {} nm",
                    grid.as_slice()[pos]
                )));
            }
        }
        let basis = DMatrix::from_fn(grid.len(), 2, |r, c| if c == 0 { eps_hbo2[r] } else { eps_hb[r] });
        let cond = condition_number(&basis);
        if !(cond < MAX_CONDITION) {
            return Err(Error::Basis(format!(
                "HbO2/Hb basis has condition number {cond:.3e} (limit {MAX_CONDITION:.0e})"
            )));
        }
        Ok(Self {
            hbo2,
            hb,
            grid,
            eps_hbo2,
            eps_hb,
        })
    }

    /// Synthetic two-Gaussian stand-ins for the haemoglobin curves, tabulated
    /// at 1 nm over 400-760 nm. HbO2 absorbs mostly in the green, Hb in the
    /// blue and orange.
    pub fn fixture(grid: &WavelengthGrid) -> Result<Self> {
        let support = WavelengthGrid::uniform(400.0, 1.0, 361)?;
        let hbo2 = SpectrumCurve::from_fn(&support, |w| {
            gaussian(w, 545.0, 30.0) + 0.15 * gaussian(w, 650.0, 60.0)
        })?;
        let hb = SpectrumCurve::from_fn(&support, |w| {
            0.5 * gaussian(w, 470.0, 35.0) + 0.9 * gaussian(w, 600.0, 45.0)
        })?;
        Self::new(hbo2, hb, grid.clone())
    }

    /// Reads a `wavelength_nm,eps_hbo2,eps_hb` table.
    pub fn from_csv(path: impl AsRef<Path>, grid: &WavelengthGrid) -> Result<Self> {
        let cols = read_table_csv(path, &CHROMOPHORE_HEADER)?;
        let curve = |k: usize| SpectrumCurve::new(cols[0].iter().copied().zip(cols[k].iter().copied()).collect());
        Self::new(curve(1)?, curve(2)?, grid.clone())
    }

    /// Writes the source curves as a `wavelength_nm,eps_hbo2,eps_hb` table.
    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let wl: Vec<f64> = self.hbo2.samples().iter().map(|s| s.0).collect();
        if self.hb.samples().iter().map(|s| s.0).ne(wl.iter().copied()) {
            return Err(Error::param("HbO2 and Hb curves are sampled at different wavelengths"));
        }
        let a = self.hbo2.samples().iter().map(|s| s.1).collect();
        let b = self.hb.samples().iter().map(|s| s.1).collect();
        write_table_csv(path, &CHROMOPHORE_HEADER, &[wl, a, b])
    }

    /// The same curves resampled on another grid.
    pub fn regrid(&self, grid: &WavelengthGrid) -> Result<Self> {
        Self::new(self.hbo2.clone(), self.hb.clone(), grid.clone())
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn eps_hbo2(&self) -> &[f64] {
        &self.eps_hbo2
    }

    pub fn eps_hb(&self) -> &[f64] {
        &self.eps_hb
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `A_b = -ln(max(R_b, 1e-6))`.
pub fn absorbance<T: Copy + Into<f64>>(spectrum: &[T]) -> Vec<f64> {
    spectrum
        .iter()
        .map(|&r| -(r.into().max(REFLECTANCE_FLOOR)).ln())
        .collect()
}

/// Extra unconstrained terms in the absorbance model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMode {
    None,
    /// `c0`
    #[default]
    Const,
    /// `c0 + c1 * x`, with `x` the grid mapped onto `[0, 1]`.
    Affine,
}

impl BaselineMode {
    pub fn terms(self) -> usize {
        match self {
            Self::None => 0,
            Self::Const => 1,
            Self::Affine => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct So2Result {
    /// `a / (a + b)`, or `None` when `a + b < 1e-9`.
    pub so2: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub baseline: Vec<f64>,
    pub residual_norm: f64,
}

/// One candidate active set: which chromophores are free, and the
/// pseudo-inverse and design matrix of the reduced problem.
#[derive(Debug, Clone)]
struct Candidate {
    free_a: bool,
    free_b: bool,
    design: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

/// Precomputed solver for [`fit_so2`] on a fixed basis and baseline.
///
/// The nonnegative fit is exact: every combination of free chromophores is
/// solved unconstrained and the feasible solution with the smallest residual
/// wins. The constrained optimum is always one of these candidates.
#[derive(Debug, Clone)]
pub struct So2Fitter {
    baseline: BaselineMode,
    bands: usize,
    candidates: Vec<Candidate>,
}

impl So2Fitter {
    pub fn new(chrom: &ChromophoreSet, baseline: BaselineMode) -> Result<Self> {
        let bands = chrom.grid.len();
        let n_coef = 2 + baseline.terms();
        if bands < n_coef {
            return Err(Error::dim(format!(
                "{bands} bands cannot determine {n_coef} coefficients"
            )));
        }
        let x = chrom.grid.normalized();
        let baseline_cols: Vec<Vec<f64>> = match baseline {
            BaselineMode::None => vec![],
            BaselineMode::Const => vec![vec![1.0; bands]],
            BaselineMode::Affine => vec![vec![1.0; bands], x],
        };
        let mut candidates = Vec::with_capacity(4);
        for (free_a, free_b) in [(true, true), (true, false), (false, true), (false, false)] {
            let mut cols: Vec<&[f64]> = Vec::new();
            if free_a {
                cols.push(&chrom.eps_hbo2);
            }
            if free_b {
                cols.push(&chrom.eps_hb);
            }
            cols.extend(baseline_cols.iter().map(|c| c.as_slice()));
            let design = DMatrix::from_fn(bands, cols.len(), |r, c| cols[c][r]);
            if free_a && free_b && condition_number(&design) >= MAX_CONDITION {
                return Err(Error::Basis(format!(
                    "chromophores are nearly collinear with the {baseline:?} baseline"
                )));
            }
            let pinv = if cols.is_empty() {
                DMatrix::zeros(0, bands)
            } else {
                design
                    .clone()
                    .pseudo_inverse(1e-12)
                    .map_err(|e| Error::Basis(e.to_string()))?
            };
            candidates.push(Candidate {
                free_a,
                free_b,
                design,
                pinv,
            });
        }
        Ok(Self {
            baseline,
            bands,
            candidates,
        })
    }

    pub fn baseline(&self) -> BaselineMode {
        self.baseline
    }

    pub fn fit(&self, absorbance: &[f64]) -> Result<So2Result> {
        if absorbance.len() != self.bands {
            return Err(Error::dim(format!(
                "absorbance has {} bands, basis has {}",
                absorbance.len(),
                self.bands
            )));
        }
        let y = nalgebra::DVector::from_column_slice(absorbance);
        let mut best: Option<So2Result> = None;
        for cand in &self.candidates {
            let coef = &cand.pinv * &y;
            let mut k = 0;
            let mut take = |free: bool| {
                if free {
                    k += 1;
                    coef[k - 1]
                } else {
                    0.0
                }
            };
            let a = take(cand.free_a);
            let b = take(cand.free_b);
            if a < 0.0 || b < 0.0 {
                continue;
            }
            let residual_norm = if coef.is_empty() {
                y.norm()
            } else {
                (&y - &cand.design * &coef).norm()
            };
            if best.as_ref().is_some_and(|r| r.residual_norm <= residual_norm) {
                continue;
            }
            let n_chrom = cand.free_a as usize + cand.free_b as usize;
            best = Some(So2Result {
                so2: (a + b >= SO2_TAU).then(|| a / (a + b)),
                a,
                b,
                baseline: coef.iter().skip(n_chrom).copied().collect(),
                residual_norm,
            });
        }
        // the all-fixed candidate is always feasible
        Ok(best.expect("at least one feasible candidate"))
    }
}

/// Least-squares fit of `A ~ a * eps_HbO2 + b * eps_Hb + baseline` with `a, b >= 0`.
pub fn fit_so2(absorbance: &[f64], chrom: &ChromophoreSet, baseline: BaselineMode) -> Result<So2Result> {
    So2Fitter::new(chrom, baseline)?.fit(absorbance)
}

/// Per-pixel saturation estimates. Undefined pixels hold 0 in `values`.
#[derive(Debug, Clone, PartialEq)]
pub struct So2Map {
    pub values: ScalarMap,
    /// `true` where the saturation is defined.
    pub defined: Vec<bool>,
}

impl So2Map {
    pub fn defined_count(&self) -> usize {
        self.defined.iter().filter(|&&d| d).count()
    }

    /// Mean absolute difference to `truth` over defined pixels.
    pub fn mean_abs_error(&self, truth: &ScalarMap) -> Result<f64> {
        let (n, sum) = self.error_terms(truth)?.fold((0usize, 0.0), |(n, s), e| (n + 1, s + e));
        Ok(if n == 0 { f64::NAN } else { sum / n as f64 })
    }

    /// Largest absolute difference to `truth` over defined pixels.
    pub fn max_abs_error(&self, truth: &ScalarMap) -> Result<f64> {
        Ok(self.error_terms(truth)?.fold(0.0, f64::max))
    }

    fn error_terms<'a>(&'a self, truth: &'a ScalarMap) -> Result<impl Iterator<Item = f64> + 'a> {
        if truth.width() != self.values.width() || truth.height() != self.values.height() {
            return Err(Error::dim("truth map size differs from the estimate"));
        }
        Ok(self
            .values
            .data()
            .iter()
            .zip(truth.data())
            .zip(&self.defined)
            .filter(|(_, &d)| d)
            .map(|((&e, &t), _)| (e as f64 - t as f64).abs()))
    }

    /// Path of the mask written next to a map saved at `path`.
    pub fn mask_path(path: &Path) -> std::path::PathBuf {
        path.with_extension("mask.pgm")
    }

    /// Saves the values as a 1-band `.mcube` and the mask as a binary PGM
    /// (255 = defined, 0 = undefined) at [`So2Map::mask_path`].
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.values.save(path)?;
        let mask_path = Self::mask_path(path);
        let mut bytes = format!("P5\n{} {}\n255\n", self.values.width(), self.values.height()).into_bytes();
        bytes.extend(self.defined.iter().map(|&d| if d { 255u8 } else { 0 }));
        let mut f = std::fs::File::create(&mask_path).map_err(|e| Error::io(&mask_path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(&mask_path, e))
    }
}

/// Fits every pixel of `cube`.
pub fn so2_map(cube: &SpectralCube, fitter: &So2Fitter) -> Result<So2Map> {
    if cube.bands() != fitter.bands {
        return Err(Error::dim(format!(
            "cube has {} bands, chromophore basis has {}",
            cube.bands(),
            fitter.bands
        )));
    }
    let fits: Vec<Option<f64>> = cube
        .data()
        .par_chunks(cube.bands())
        .map(|px| fitter.fit(&absorbance(px)).map(|r| r.so2))
        .collect::<Result<_>>()?;
    let defined = fits.iter().map(Option::is_some).collect();
    let values = fits.iter().map(|s| s.unwrap_or(0.0) as f32).collect();
    Ok(So2Map {
        values: ScalarMap::new(cube.width(), cube.height(), values)?,
        defined,
    })
}

/// Like [`so2_map`] but checks the cube's grid against the basis first.
pub fn so2_map_checked(cube: &SpectralCube, chrom: &ChromophoreSet, baseline: BaselineMode) -> Result<So2Map> {
    if cube.grid() != chrom.grid() {
        return Err(Error::dim("cube grid differs from the chromophore grid"));
    }
    so2_map(cube, &So2Fitter::new(chrom, baseline)?)
}
