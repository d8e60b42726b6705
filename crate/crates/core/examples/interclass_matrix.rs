//! Trains on low- and high-saturation phantom classes and tests each model
//! on both.

use rgb2msi::forward::build_mixing_matrix;
use rgb2msi::network::ArchitectureSpec;
use rgb2msi::oximetry::ChromophoreSet;
use rgb2msi::phantom::{generate_phantom, PhantomConfig};
use rgb2msi::spectral::{CameraResponse, SpectralCube, WavelengthGrid};
use rgb2msi::train::{run_interclass, TrainConfig};

fn class(chrom: &ChromophoreSet, s_range: (f64, f64), seed: u64) -> rgb2msi::Result<Vec<SpectralCube>> {
    (0..3)
        .map(|k| generate_phantom(&PhantomConfig { s_range, seed: seed + k, ..Default::default() }, chrom).map(|p| p.cube))
        .collect()
}

fn main() -> rgb2msi::Result<()> {
    let grid = WavelengthGrid::msi_default();
    let chrom = ChromophoreSet::fixture(&grid)?;
    let mix = build_mixing_matrix(&CameraResponse::default(), &grid, true)?;
    let classes = vec![
        ("low".to_string(), class(&chrom, (0.0, 0.3), 100)?),
        ("high".to_string(), class(&chrom, (0.7, 1.0), 200)?),
    ];
    let cfg = TrainConfig { epochs: 3, samples_per_cube: Some(3000), ..Default::default() };
    let m = run_interclass::<f32>(&classes, &mix, &ArchitectureSpec::default(), &cfg)?;
    print!("{}", m.to_csv());
    println!("# diagonal dominant: {}", m.diagonal_dominant());
    Ok(())
}
