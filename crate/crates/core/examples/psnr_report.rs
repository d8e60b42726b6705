//! Per-band and pooled PSNR on synthetic predictions.

use rgb2msi::eval::{aggregate, overall_psnr, psnr_per_band, CubeScore};
use rgb2msi::spectral::{SpectralCube, WavelengthGrid};

fn main() -> rgb2msi::Result<()> {
    let grid = WavelengthGrid::msi_default();
    let truth = SpectralCube::filled(8, 8, grid.clone(), 0.5)?;

    let offset = SpectralCube::filled(8, 8, grid.clone(), 0.6)?;
    println!("uniform +0.1: band 0 {:.3} dB, overall {:.3} dB", psnr_per_band(&offset, &truth, 1.0)?[0], overall_psnr(&offset, &truth, 1.0)?);

    // error in one band only
    let mut one_band = truth.clone();
    for i in 0..8 {
        for j in 0..8 {
            let mut s = one_band.pixel_spectrum(i, j)?.to_vec();
            s[5] += 0.1;
            one_band.set_pixel_spectrum(i, j, &s)?;
        }
    }
    let band = psnr_per_band(&one_band, &truth, 1.0)?[5];
    let overall = overall_psnr(&one_band, &truth, 1.0)?;
    println!("one band: band {band:.3} dB, overall {overall:.3} dB, difference {:.3} = 10 log10(24)", overall - band);

    let scores = [CubeScore::compute(&offset, &truth, 1.0)?, CubeScore::compute(&one_band, &truth, 1.0)?];
    print!("{}", aggregate(&scores, &grid)?.to_csv());
    Ok(())
}
