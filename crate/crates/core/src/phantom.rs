//! Synthetic tissue cubes with known oxygenation.
//!
//! Each pixel follows `R_b = exp(-(v * (s * eps_HbO2,b + (1 - s) * eps_Hb,b) + c0 + c1 * x_b))`
//! where `s` and `v` are smooth random fields and `x` is the grid mapped onto `[0, 1]`.

use std::path::{Path, PathBuf};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oximetry::ChromophoreSet;
use crate::spectral::{ScalarMap, SpectralCube};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomConfig {
    pub width: usize,
    pub height: usize,
    /// Saturation interval, inside `[0, 1]`.
    pub s_range: (f64, f64),
    /// Total attenuation scale interval, nonnegative.
    pub v_range: (f64, f64),
    pub c0: f64,
    pub c1: f64,
    /// Lattice spacing of the value-noise fields, in pixels.
    pub smoothness: f64,
    pub seed: u64,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        Self {
            width: 96,
            height: 96,
            s_range: (0.0, 1.0),
            v_range: (1.0, 8.0),
            c0: 0.05,
            c1: 0.1,
            smoothness: 16.0,
            seed: 0,
        }
    }
}

impl PhantomConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::param("phantom must be at least 1x1"));
        }
        let (s0, s1) = self.s_range;
        if !(0.0 <= s0 && s0 <= s1 && s1 <= 1.0) {
            return Err(Error::param(format!("s_range [{s0}, {s1}] must be ordered inside [0, 1]")));
        }
        let (v0, v1) = self.v_range;
        if !(0.0 <= v0 && v0 <= v1 && v1.is_finite()) {
            return Err(Error::param(format!("v_range [{v0}, {v1}] must be ordered and nonnegative")));
        }
        if !(self.c0.is_finite() && self.c1.is_finite()) {
            return Err(Error::param("baseline coefficients must be finite"));
        }
        if !(self.smoothness >= 1.0 && self.smoothness.is_finite()) {
            return Err(Error::param("smoothness must be at least 1 pixel"));
        }
        Ok(())
    }
}

/// Bilinear interpolation of a seeded uniform lattice with spacing `cell`
/// pixels. Values lie in `[0, 1]`.
fn value_noise(width: usize, height: usize, cell: f64, rng: &mut impl Rng) -> Vec<f64> {
    let nx = (width as f64 / cell).ceil() as usize + 2;
    let ny = (height as f64 / cell).ceil() as usize + 2;
    let lattice: Vec<f64> = (0..nx * ny).map(|_| rng.random::<f64>()).collect();
    let mut out = Vec::with_capacity(width * height);
    for i in 0..height {
        let y = i as f64 / cell;
        let (y0, fy) = (y.floor() as usize, y.fract());
        for j in 0..width {
            let x = j as f64 / cell;
            let (x0, fx) = (x.floor() as usize, x.fract());
            let at = |r: usize, c: usize| lattice[r * nx + c];
            let top = at(y0, x0) * (1.0 - fx) + at(y0, x0 + 1) * fx;
            let bottom = at(y0 + 1, x0) * (1.0 - fx) + at(y0 + 1, x0 + 1) * fx;
            out.push((top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0));
        }
    }
    out
}

/// Reflectance spectrum of one pixel, before storage.
pub fn phantom_spectrum(chrom: &ChromophoreSet, s: f64, v: f64, c0: f64, c1: f64) -> Vec<f64> {
    let x = chrom.grid().normalized();
    chrom
        .eps_hbo2()
        .iter()
        .zip(chrom.eps_hb())
        .zip(&x)
        .map(|((&e1, &e2), &xb)| {
            let att = v * (s * e1 + (1.0 - s) * e2) + c0 + c1 * xb;
            (-att).exp().clamp(0.0, 1.0)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub cube: SpectralCube,
    pub s_map: ScalarMap,
    pub v_map: ScalarMap,
}

pub fn generate_phantom(cfg: &PhantomConfig, chrom: &ChromophoreSet) -> Result<Phantom> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (w, h) = (cfg.width, cfg.height);
    let lerp = |r: (f64, f64), u: f64| r.0 + u * (r.1 - r.0);
    let s: Vec<f64> = value_noise(w, h, cfg.smoothness, &mut rng)
        .into_iter()
        .map(|u| lerp(cfg.s_range, u))
        .collect();
    let v: Vec<f64> = value_noise(w, h, cfg.smoothness, &mut rng)
        .into_iter()
        .map(|u| lerp(cfg.v_range, u))
        .collect();
    let mut data = Vec::with_capacity(w * h * chrom.grid().len());
    for (&sp, &vp) in s.iter().zip(&v) {
        data.extend(
            phantom_spectrum(chrom, sp, vp, cfg.c0, cfg.c1)
                .into_iter()
                .map(|r| r as f32),
        );
    }
    Ok(Phantom {
        cube: SpectralCube::new(w, h, chrom.grid().clone(), data)?,
        s_map: ScalarMap::new(w, h, s.iter().map(|&x| x as f32).collect())?,
        v_map: ScalarMap::new(w, h, v.iter().map(|&x| x as f32).collect())?,
    })
}

/// One class of a phantom dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomClass {
    pub name: String,
    pub cubes: usize,
    pub s_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub class: String,
    /// Paths relative to the dataset root.
    pub cube: PathBuf,
    pub s_map: PathBuf,
    pub seed: u64,
    pub s_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config: PhantomConfig,
    pub wavelengths_nm: Vec<f64>,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    pub fn load(root: impl AsRef<Path>) -> Result<Self> {
        let path = root.as_ref().join(Self::FILE_NAME);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(format!("{}: {e}", path.display())))
    }
}

/// Writes every class as `<root>/<class>/<class>_NNN.mcube` with ground-truth
/// saturation maps in `<root>/<class>/truth/` and a `manifest.json` at the
/// root. Cube seeds are drawn from `seed`; `base.seed` and `base.s_range` are
/// overridden per cube and class.
pub fn phantom_suite(
    root: impl AsRef<Path>,
    classes: &[PhantomClass],
    base: &PhantomConfig,
    chrom: &ChromophoreSet,
    seed: u64,
) -> Result<Manifest> {
    let root = root.as_ref();
    if classes.is_empty() || classes.iter().any(|c| c.cubes == 0) {
        return Err(Error::param("every phantom class needs at least one cube"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for class in classes {
        if class.name.is_empty() || class.name.contains(['/', '\\']) || class.name.starts_with('.') {
            return Err(Error::param(format!("invalid class name {:?}", class.name)));
        }
        let truth_dir = root.join(&class.name).join("truth");
        std::fs::create_dir_all(&truth_dir).map_err(|e| Error::io(&truth_dir, e))?;
        for n in 0..class.cubes {
            let cfg = PhantomConfig {
                seed: rng.next_u64(),
                s_range: class.s_range,
                ..base.clone()
            };
            let p = generate_phantom(&cfg, chrom)?;
            let stem = format!("{}_{n:03}", class.name);
            let cube = PathBuf::from(&class.name).join(format!("{stem}.mcube"));
            let s_map = PathBuf::from(&class.name).join("truth").join(format!("{stem}_s.mcube"));
            p.cube.save(root.join(&cube))?;
            p.s_map.save(root.join(&s_map))?;
            entries.push(ManifestEntry {
                class: class.name.clone(),
                cube,
                s_map,
                seed: cfg.seed,
                s_range: class.s_range,
            });
        }
    }
    let manifest = Manifest {
        seed,
        config: base.clone(),
        wavelengths_nm: chrom.grid().as_slice().to_vec(),
        entries,
    };
    let path = root.join(Manifest::FILE_NAME);
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::format(e.to_string()))?;
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
