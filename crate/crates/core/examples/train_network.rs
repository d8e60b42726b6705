//! Trains a network on pixels of a few phantom cubes and saves it.

use rgb2msi::forward::build_mixing_matrix;
use rgb2msi::network::{load_model, save_model, ArchitectureSpec, NetworkParams};
use rgb2msi::oximetry::ChromophoreSet;
use rgb2msi::phantom::{generate_phantom, PhantomConfig};
use rgb2msi::spectral::{CameraResponse, WavelengthGrid};
use rgb2msi::train::{assemble_dataset, linear_baseline, train, TrainConfig};

fn main() -> rgb2msi::Result<()> {
    let grid = WavelengthGrid::msi_default();
    let chrom = ChromophoreSet::fixture(&grid)?;
    let mix = build_mixing_matrix(&CameraResponse::default(), &grid, true)?;
    let cubes = (0..4)
        .map(|seed| generate_phantom(&PhantomConfig { seed, ..Default::default() }, &chrom).map(|p| p.cube))
        .collect::<rgb2msi::Result<Vec<_>>>()?;

    let cfg = TrainConfig { epochs: 5, samples_per_cube: Some(2000), ..Default::default() };
    let data = assemble_dataset(&cubes, &mix, cfg.samples_per_cube, cfg.specular_mask_threshold, cfg.seed)?;
    let trained = train::<f32>(&data, ArchitectureSpec::default(), &cfg)?;
    for (e, l) in trained.loss_history.iter().enumerate() {
        println!("epoch {}: mse {l:.3e}", e + 1);
    }

    let affine = linear_baseline(&data)?;
    let mse: f64 = (0..data.len())
        .flat_map(|n| {
            let t = data.target(n).to_vec();
            affine.apply(data.input(n)).into_iter().zip(t).map(|(p, t)| (p - t as f64).powi(2))
        })
        .sum::<f64>()
        / (data.len() * data.bands()) as f64;
    println!("affine least squares mse {mse:.3e}");

    let path = std::env::temp_dir().join("rgb2msi_demo.ssr");
    let params = trained.params.with_grid(grid)?;
    save_model(&params, &path)?;
    let back: NetworkParams<f32> = load_model(&path)?;
    assert_eq!(back, params);
    println!("model written to {}", path.display());
    Ok(())
}
