//! Cube-level cross-validation of the network against the affine baseline
//! on a small phantom set. Pass the cube count and epochs as arguments.

use rgb2msi::forward::build_mixing_matrix;
use rgb2msi::network::ArchitectureSpec;
use rgb2msi::oximetry::ChromophoreSet;
use rgb2msi::phantom::{generate_phantom, PhantomConfig};
use rgb2msi::spectral::{CameraResponse, WavelengthGrid};
use rgb2msi::train::{run_crossval, TrainConfig};

fn main() -> rgb2msi::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let n = args.next().unwrap_or(10);
    let epochs = args.next().unwrap_or(3);
    let grid = WavelengthGrid::msi_default();
    let chrom = ChromophoreSet::fixture(&grid)?;
    let mix = build_mixing_matrix(&CameraResponse::default(), &grid, true)?;
    let cubes = (0..n as u64)
        .map(|seed| generate_phantom(&PhantomConfig { seed, ..Default::default() }, &chrom).map(|p| p.cube))
        .collect::<rgb2msi::Result<Vec<_>>>()?;

    let cfg = TrainConfig { epochs, samples_per_cube: Some(3000), ..Default::default() };
    let out = run_crossval::<f32>(&cubes, &mix, &ArchitectureSpec::default(), &cfg, 5)?;
    println!("wavelength_nm,network_db,baseline_db");
    for (a, b) in out.network.rows.iter().zip(&out.baseline.rows) {
        println!("{},{:.2},{:.2}", a.wavelength_nm, a.mean_psnr_db, b.mean_psnr_db);
    }
    println!("# overall network {:.2} dB, baseline {:.2} dB", out.network.overall_mean_db, out.baseline.overall_mean_db);
    Ok(())
}
