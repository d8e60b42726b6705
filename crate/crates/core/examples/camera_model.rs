//! Renders a phantom cube to RGB through the default camera response, with
//! and without sensor noise and quantization.

use rgb2msi::forward::{build_mixing_matrix, simulate_camera, synthesize_rgb};
use rgb2msi::oximetry::ChromophoreSet;
use rgb2msi::phantom::{generate_phantom, PhantomConfig};
use rgb2msi::spectral::{CameraResponse, WavelengthGrid};

fn main() -> rgb2msi::Result<()> {
    let grid = WavelengthGrid::msi_default();
    let mix = build_mixing_matrix(&CameraResponse::default(), &grid, true)?;
    for (name, row) in ["r", "g", "b"].iter().zip(mix.rows()) {
        let peak = row.iter().cloned().fold(f64::MIN, f64::max);
        let at = grid.as_slice()[row.iter().position(|&v| v == peak).unwrap()];
        println!("{name}: weight sum {:.3}, peak at {at} nm", row.iter().sum::<f64>());
    }

    let chrom = ChromophoreSet::fixture(&grid)?;
    let cube = generate_phantom(&PhantomConfig { width: 64, height: 48, ..Default::default() }, &chrom)?.cube;
    let clean = synthesize_rgb(&cube, &mix)?;
    let noisy = simulate_camera(&cube, &mix, 0.01, Some(8), 7)?;
    let diff: f64 = clean.data().iter().zip(noisy.data()).map(|(a, b)| (a - b).abs() as f64).sum::<f64>()
        / clean.data().len() as f64;
    println!("clean pixel (10, 10): {:?}", clean.pixel(10, 10)?);
    println!("noisy pixel (10, 10): {:?}", noisy.pixel(10, 10)?);
    println!("mean |clean - noisy| = {diff:.4}");

    let out = std::env::temp_dir().join("rgb2msi_camera.ppm");
    clean.save_ppm(&out)?;
    println!("preview written to {}", out.display());
    Ok(())
}
