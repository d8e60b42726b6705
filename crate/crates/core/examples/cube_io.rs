//! Writes a small spectral cube to a `.mcube` file, reads it back and
//! resamples a curve onto the default 24-band grid.

use rgb2msi::spectral::{resample_curve, ResampleMode, SpectralCube, SpectrumCurve, WavelengthGrid};

fn main() -> rgb2msi::Result<()> {
    let grid = WavelengthGrid::msi_default();
    let (w, h) = (4, 3);
    let data: Vec<f32> = (0..w * h)
        .flat_map(|p| (0..grid.len()).map(move |b| ((p + b) % 10) as f32 / 10.0))
        .collect();
    let cube = SpectralCube::new(w, h, grid.clone(), data)?;

    let dir = std::env::temp_dir().join("rgb2msi_cube_io");
    std::fs::create_dir_all(&dir).map_err(rgb2msi::Error::Stream)?;
    let path = dir.join("demo.mcube");
    cube.save(&path)?;
    let back = SpectralCube::load(&path)?;
    assert_eq!(back, cube);
    println!("{} -> {}x{}x{} bands {}..{} nm", path.display(), back.width(), back.height(), back.bands(), grid.first(), grid.last());
    println!("pixel (1, 2): {:?}", back.pixel_spectrum(1, 2)?);

    let curve = SpectrumCurve::new(vec![(400.0, 0.0), (550.0, 1.0), (750.0, 0.0)])?;
    let on_grid = resample_curve(&curve, &grid, ResampleMode::Strict)?;
    for (wl, v) in grid.as_slice().iter().zip(&on_grid).step_by(4) {
        println!("{wl:>5} nm  {v:.4}");
    }
    Ok(())
}
