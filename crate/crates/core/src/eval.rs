//! PSNR scoring and report aggregation.
//!
//! Identical signals score `f64::INFINITY`; aggregation excludes those values
//! from the moments and records how many were dropped.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{SpectralCube, WavelengthGrid};

/// `10 * log10(peak^2 / mse)`, infinite for a zero MSE.
pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

fn check_pair(pred: &SpectralCube, gt: &SpectralCube) -> Result<()> {
    if pred.width() != gt.width() || pred.height() != gt.height() || pred.grid() != gt.grid() {
        return Err(Error::dim(format!(
            "cannot compare {}x{}x{} against {}x{}x{}",
            pred.width(),
            pred.height(),
            pred.bands(),
            gt.width(),
            gt.height(),
            gt.bands()
        )));
    }
    Ok(())
}

/// Per-band MSE of two BIP buffers with `bands` values per pixel.
pub fn band_mse<T: Copy + Into<f64>>(pred: &[T], gt: &[T], bands: usize) -> Result<Vec<f64>> {
    if bands == 0 || pred.len() != gt.len() || !pred.len().is_multiple_of(bands) || pred.is_empty() {
        return Err(Error::dim(format!(
            "buffers of {} and {} values do not form matching {bands}-band rasters",
            pred.len(),
            gt.len()
        )));
    }
    let mut sums = vec![0.0f64; bands];
    for (p, g) in pred.chunks_exact(bands).zip(gt.chunks_exact(bands)) {
        for ((s, &a), &b) in sums.iter_mut().zip(p).zip(g) {
            let d = a.into() - b.into();
            *s += d * d;
        }
    }
    let pixels = (pred.len() / bands) as f64;
    Ok(sums.into_iter().map(|s| s / pixels).collect())
}

/// PSNR of each band over all pixels.
pub fn psnr_per_band(pred: &SpectralCube, gt: &SpectralCube, peak: f64) -> Result<Vec<f64>> {
    check_pair(pred, gt)?;
    Ok(band_mse(pred.data(), gt.data(), gt.bands())?
        .into_iter()
        .map(|m| psnr_from_mse(m, peak))
        .collect())
}

/// PSNR of the MSE pooled over every band and pixel.
pub fn overall_psnr(pred: &SpectralCube, gt: &SpectralCube, peak: f64) -> Result<f64> {
    check_pair(pred, gt)?;
    let mse = band_mse(pred.data(), gt.data(), gt.bands())?;
    Ok(psnr_from_mse(mse.iter().sum::<f64>() / mse.len() as f64, peak))
}

/// Both granularities of score for one predicted cube.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeScore {
    pub per_band: Vec<f64>,
    pub overall: f64,
}

impl CubeScore {
    pub fn compute(pred: &SpectralCube, gt: &SpectralCube, peak: f64) -> Result<Self> {
        check_pair(pred, gt)?;
        let mse = band_mse(pred.data(), gt.data(), gt.bands())?;
        let pooled = mse.iter().sum::<f64>() / mse.len() as f64;
        Ok(Self {
            per_band: mse.iter().map(|&m| psnr_from_mse(m, peak)).collect(),
            overall: psnr_from_mse(pooled, peak),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandRow {
    pub wavelength_nm: f64,
    pub mean_psnr_db: f64,
    pub std_psnr_db: f64,
    /// Finite values that entered the moments.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<BandRow>,
    /// Mean over cubes of the pooled (all-band) PSNR.
    pub overall_mean_db: f64,
    pub overall_std_db: f64,
    pub cubes: usize,
    /// Number of infinite per-band values left out of the moments.
    pub infinite_excluded: usize,
}

/// Population mean and standard deviation of the finite values.
fn moments(values: impl Iterator<Item = f64>) -> (f64, f64, usize, usize) {
    let mut finite = Vec::new();
    let mut skipped = 0;
    for v in values {
        if v.is_finite() {
            finite.push(v);
        } else {
            skipped += 1;
        }
    }
    if finite.is_empty() {
        return (f64::INFINITY, 0.0, 0, skipped);
    }
    // sorting makes the sums independent of input order
    finite.sort_by(f64::total_cmp);
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    let var = finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt(), finite.len(), skipped)
}

/// Per-band mean and population standard deviation across cubes.
pub fn aggregate(scores: &[CubeScore], grid: &WavelengthGrid) -> Result<EvalReport> {
    if scores.is_empty() {
        return Err(Error::param("nothing to aggregate"));
    }
    if let Some(bad) = scores.iter().find(|s| s.per_band.len() != grid.len()) {
        return Err(Error::dim(format!(
            "score has {} bands, grid has {}",
            bad.per_band.len(),
            grid.len()
        )));
    }
    let mut excluded = 0;
    let rows = grid
        .as_slice()
        .iter()
        .enumerate()
        .map(|(b, &wl)| {
            let (mean, std, n, skipped) = moments(scores.iter().map(|s| s.per_band[b]));
            excluded += skipped;
            BandRow {
                wavelength_nm: wl,
                mean_psnr_db: mean,
                std_psnr_db: std,
                n,
            }
        })
        .collect();
    let (overall_mean_db, overall_std_db, _, _) = moments(scores.iter().map(|s| s.overall));
    Ok(EvalReport {
        rows,
        overall_mean_db,
        overall_std_db,
        cubes: scores.len(),
        infinite_excluded: excluded,
    })
}

/// Aggregates bare per-band vectors (overall statistics are taken from the band means).
pub fn aggregate_bands(per_band: &[Vec<f64>], grid: &WavelengthGrid) -> Result<EvalReport> {
    let scores: Vec<CubeScore> = per_band
        .iter()
        .map(|v| CubeScore {
            per_band: v.clone(),
            overall: v.iter().sum::<f64>() / v.len().max(1) as f64,
        })
        .collect();
    aggregate(&scores, grid)
}

pub const REPORT_HEADER: &str = "wavelength_nm,mean_psnr_db,std_psnr_db,n";

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.6}")
    }
}

impl EvalReport {
    /// The per-band table. Metadata follows as `#` comment lines after the rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.wavelength_nm,
                fmt_db(r.mean_psnr_db),
                fmt_db(r.std_psnr_db),
                r.n
            );
        }
        let _ = writeln!(out, "# std=population overall=pooled_mse");
        let _ = writeln!(
            out,
            "# cubes={} overall_mean_db={} overall_std_db={} infinite_excluded={}",
            self.cubes,
            fmt_db(self.overall_mean_db),
            fmt_db(self.overall_std_db),
            self.infinite_excluded
        );
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn mean_psnr(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean_psnr_db).collect()
    }
}

/// Train-class by test-class matrix of mean pooled PSNR.
#[derive(Debug, Clone, PartialEq)]
pub struct InterclassMatrix {
    pub classes: Vec<String>,
    /// `psnr[train][test]`.
    pub psnr: Vec<Vec<f64>>,
}

impl InterclassMatrix {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("train_class");
        for c in &self.classes {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(&self.psnr) {
            out.push_str(c);
            for v in row {
                out.push(',');
                out.push_str(&fmt_db(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// True when every diagonal entry is at least as large as the rest of its row.
    pub fn diagonal_dominant(&self) -> bool {
        self.psnr
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().all(|&v| row[i] >= v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cube(data: Vec<f32>, bands: usize) -> SpectralCube {
        let grid = WavelengthGrid::uniform(460.0, 10.0, bands).unwrap();
        let px = data.len() / bands;
        SpectralCube::new(px, 1, grid, data).unwrap()
    }

    #[test]
    fn identical_cubes_are_infinite() {
        let c = cube((0..48).map(|k| k as f32 / 48.0).collect(), 24);
        assert!(psnr_per_band(&c, &c, 1.0).unwrap().iter().all(|v| v.is_infinite()));
        assert!(overall_psnr(&c, &c, 1.0).unwrap().is_infinite());
    }

    #[test]
    fn offset_gives_20_db_in_f64() {
        let gt: Vec<f64> = (0..240).map(|k| (k % 7) as f64 / 10.0).collect();
        let pred: Vec<f64> = gt.iter().map(|v| v + 0.1).collect();
        for m in band_mse(&pred, &gt, 24).unwrap() {
            assert!((psnr_from_mse(m, 1.0) - 20.0).abs() < 1e-9);
        }
    }

    #[test]
    fn offset_gives_20_db_on_cubes() {
        let gt: Vec<f32> = (0..240).map(|k| (k % 7) as f32 / 10.0).collect();
        let pred: Vec<f32> = gt.iter().map(|v| v + 0.1).collect();
        let (p, g) = (cube(pred, 24), cube(gt, 24));
        for v in psnr_per_band(&p, &g, 1.0).unwrap() {
            assert!((v - 20.0).abs() < 1e-5, "{v}");
        }
        assert!((overall_psnr(&p, &g, 1.0).unwrap() - 20.0).abs() < 1e-5);
    }

    #[test]
    fn symmetric() {
        let a = cube((0..48).map(|k| (k as f32 * 0.13).fract()).collect(), 24);
        let b = cube((0..48).map(|k| (k as f32 * 0.29).fract()).collect(), 24);
        assert_eq!(psnr_per_band(&a, &b, 1.0).unwrap(), psnr_per_band(&b, &a, 1.0).unwrap());
    }

    #[test]
    fn one_band_error_identity() {
        let gt: Vec<f32> = vec![0.5; 24 * 6];
        let mut pred = gt.clone();
        for px in 0..6 {
            pred[px * 24 + 7] = 0.5 + 0.03 * (px as f32 + 1.0);
        }
        let (p, g) = (cube(pred, 24), cube(gt, 24));
        let band = psnr_per_band(&p, &g, 1.0).unwrap()[7];
        let overall = overall_psnr(&p, &g, 1.0).unwrap();
        assert!((overall - (band + 10.0 * 24f64.log10())).abs() < 1e-9);
    }

    #[test]
    fn single_band_pooled_equals_band() {
        let pred = [0.1f64, 0.4, 0.6];
        let gt = [0.2f64, 0.2, 0.2];
        let per_band = band_mse(&pred, &gt, 1).unwrap();
        let pooled: f64 = per_band.iter().sum::<f64>() / per_band.len() as f64;
        assert_eq!(psnr_from_mse(pooled, 1.0), psnr_from_mse(per_band[0], 1.0));
    }

    #[test]
    fn dimension_mismatch() {
        let a = cube(vec![0.0; 48], 24);
        let b = cube(vec![0.0; 72], 24);
        assert!(matches!(psnr_per_band(&a, &b, 1.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn aggregate_single_and_pair() {
        let grid = WavelengthGrid::uniform(460.0, 10.0, 2).unwrap();
        let one = aggregate_bands(&[vec![20.0, 30.0]], &grid).unwrap();
        assert_eq!(one.mean_psnr(), vec![20.0, 30.0]);
        assert!(one.rows.iter().all(|r| r.std_psnr_db == 0.0));
        let two = aggregate_bands(&[vec![20.0, 1.0], vec![30.0, 1.0]], &grid).unwrap();
        assert_eq!(two.rows[0].mean_psnr_db, 25.0);
        assert_eq!(two.rows[0].std_psnr_db, 5.0);
    }

    #[test]
    fn aggregate_excludes_infinite() {
        let grid = WavelengthGrid::uniform(460.0, 10.0, 2).unwrap();
        let r = aggregate_bands(&[vec![20.0, f64::INFINITY], vec![30.0, 40.0]], &grid).unwrap();
        assert_eq!(r.rows[1].n, 1);
        assert_eq!(r.rows[0].n, 2);
        assert_eq!(r.rows[1].mean_psnr_db, 40.0);
        assert_eq!(r.infinite_excluded, 1);
    }

    #[test]
    fn aggregate_empty_is_error() {
        assert!(aggregate(&[], &WavelengthGrid::default()).is_err());
    }

    #[test]
    fn report_csv_layout() {
        let grid = WavelengthGrid::uniform(460.0, 10.0, 2).unwrap();
        let csv = aggregate_bands(&[vec![20.0, f64::INFINITY]], &grid).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], REPORT_HEADER);
        assert_eq!(lines[1], "460,20.000000,0.000000,1");
        assert_eq!(lines[2], "470,inf,0.000000,0");
        assert!(lines[3].starts_with('#'));
    }

    #[test]
    fn interclass_csv_layout() {
        let m = InterclassMatrix {
            classes: vec!["PB".into(), "SU".into()],
            psnr: vec![vec![25.75, 27.47], vec![24.8, 32.49]],
        };
        let csv = m.to_csv();
        assert_eq!(csv.lines().next().unwrap(), "train_class,PB,SU");
        assert!(csv.lines().nth(1).unwrap().starts_with("PB,25.75"));
        assert!(!m.diagonal_dominant());
    }

    proptest! {
        #[test]
        fn aggregate_permutation_invariant(
            rows in prop::collection::vec(prop::collection::vec(10.0f64..50.0, 3), 1..8),
            rot in 0usize..8,
        ) {
            let grid = WavelengthGrid::uniform(500.0, 5.0, 3).unwrap();
            let mut shuffled = rows.clone();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            prop_assert_eq!(aggregate_bands(&rows, &grid).unwrap(), aggregate_bands(&shuffled, &grid).unwrap());
        }

        #[test]
        fn added_noise_lowers_psnr(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let gt: Vec<f64> = (0..24 * 500).map(|k| (k as f64 * 0.37).fract()).collect();
            let pred: Vec<f64> = gt.iter().map(|v| v + rng.random_range(-0.02..0.02)).collect();
            let noisier: Vec<f64> = pred.iter().map(|v| v + rng.random_range(-0.02..0.02)).collect();
            let pooled = |p: &[f64]| band_mse(p, &gt, 24).unwrap().iter().sum::<f64>() / 24.0;
            prop_assert!(psnr_from_mse(pooled(&noisier), 1.0) < psnr_from_mse(pooled(&pred), 1.0));
            prop_assert!(psnr_from_mse(pooled(&pred), 1.0) < psnr_from_mse(pooled(&gt), 1.0));
        }
    }
}
