use crate::error::{Error, Result};
use crate::spectral::{SpectrumCurve, WavelengthGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleMode {
    /// Every grid wavelength must fall inside the curve support.
    Strict,
    /// Hold the endpoint values outside the support.
    Clamp,
}

/// Piecewise-linear interpolation of `curve` at each wavelength of `grid`.
pub fn resample_curve(
    curve: &SpectrumCurve,
    grid: &WavelengthGrid,
    mode: ResampleMode,
) -> Result<Vec<f64>> {
    let s = curve.samples();
    let (lo, hi) = curve.support();
    grid.as_slice()
        .iter()
        .map(|&w| {
            if w < lo || w > hi {
                return match mode {
                    ResampleMode::Strict => Err(Error::OutOfSupport {
                        wavelength: w,
                        lo,
                        hi,
                    }),
                    ResampleMode::Clamp if w < lo => Ok(s[0].1),
                    ResampleMode::Clamp => Ok(s[s.len() - 1].1),
                };
            }
            // first sample with wavelength >= w
            let k = s.partition_point(|p| p.0 < w);
            if s[k].0 == w {
                return Ok(s[k].1);
            }
            let (w0, v0) = s[k - 1];
            let (w1, v1) = s[k];
            let t = (w - w0) / (w1 - w0);
            Ok(v0 + t * (v1 - v0))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_on_sample_grid() {
        let grid = WavelengthGrid::default();
        let curve = SpectrumCurve::from_fn(&grid, |w| (w / 100.0).sin().abs()).unwrap();
        let out = resample_curve(&curve, &grid, ResampleMode::Strict).unwrap();
        let expected: Vec<f64> = curve.samples().iter().map(|s| s.1).collect();
        assert_eq!(out, expected);
    }

    #[test]
    fn midpoint_interpolation() {
        let curve = SpectrumCurve::new(vec![(460.0, 0.2), (470.0, 0.4)]).unwrap();
        let grid = WavelengthGrid::new(vec![465.0, 470.0]).unwrap();
        let out = resample_curve(&curve, &grid, ResampleMode::Strict).unwrap();
        assert!((out[0] - 0.3).abs() < 1e-15);
        assert_eq!(out[1], 0.4);
    }

    #[test]
    fn constant_curve() {
        let curve = SpectrumCurve::new(vec![(400.0, 0.7), (555.5, 0.7), (800.0, 0.7)]).unwrap();
        let out = resample_curve(&curve, &WavelengthGrid::default(), ResampleMode::Strict).unwrap();
        assert!(out.iter().all(|&v| v == 0.7));
    }

    #[test]
    fn strict_out_of_support_names_wavelength() {
        let curve = SpectrumCurve::new(vec![(470.0, 0.2), (700.0, 0.4)]).unwrap();
        let err = resample_curve(&curve, &WavelengthGrid::default(), ResampleMode::Strict)
            .unwrap_err();
        match err {
            Error::OutOfSupport { wavelength, .. } => assert_eq!(wavelength, 460.0),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn clamp_holds_endpoints() {
        let curve = SpectrumCurve::new(vec![(470.0, 0.2), (480.0, 0.4)]).unwrap();
        let grid = WavelengthGrid::new(vec![450.0, 475.0, 500.0]).unwrap();
        let out = resample_curve(&curve, &grid, ResampleMode::Clamp).unwrap();
        assert_eq!(out[0], 0.2);
        assert!((out[1] - 0.3).abs() < 1e-15);
        assert_eq!(out[2], 0.4);
    }

    proptest! {
        // between adjacent samples the interpolant stays within the bracketing values
        #[test]
        fn monotone_between_samples(
            v0 in -5.0f64..5.0, v1 in -5.0f64..5.0, frac in prop::collection::vec(0.0f64..1.0, 1..20)
        ) {
            let curve = SpectrumCurve::new(vec![(500.0, v0), (510.0, v1)]).unwrap();
            let mut wl: Vec<f64> = frac.iter().map(|f| 500.0 + 10.0 * f).collect();
            wl.sort_by(|a, b| a.partial_cmp(b).unwrap());
            wl.dedup();
            prop_assume!(wl.len() >= 2);
            let grid = WavelengthGrid::new(wl).unwrap();
            let out = resample_curve(&curve, &grid, ResampleMode::Strict).unwrap();
            let (lo, hi) = (v0.min(v1), v0.max(v1));
            for pair in out.windows(2) {
                prop_assert!(pair[0] >= lo - 1e-12 && pair[0] <= hi + 1e-12);
                if v1 >= v0 { prop_assert!(pair[1] >= pair[0] - 1e-12); }
                else { prop_assert!(pair[1] <= pair[0] + 1e-12); }
            }
        }
    }
}
