//! Fits oxygen saturation per pixel of a phantom and compares it with the
//! generating map, for each baseline mode.

use rgb2msi::oximetry::{absorbance, fit_so2, so2_map_checked, BaselineMode, ChromophoreSet};
use rgb2msi::phantom::{generate_phantom, phantom_spectrum, PhantomConfig};
use rgb2msi::spectral::WavelengthGrid;

fn main() -> rgb2msi::Result<()> {
    let grid = WavelengthGrid::msi_default();
    let chrom = ChromophoreSet::fixture(&grid)?;

    let spectrum = phantom_spectrum(&chrom, 0.65, 2.0, 0.05, 0.1);
    let fit = fit_so2(&absorbance(&spectrum), &chrom, BaselineMode::Affine)?;
    println!("single spectrum: so2 {:?}, a {:.4}, b {:.4}, residual {:.2e}", fit.so2, fit.a, fit.b, fit.residual_norm);

    let phantom = generate_phantom(&PhantomConfig { width: 48, height: 48, ..Default::default() }, &chrom)?;
    for mode in [BaselineMode::None, BaselineMode::Const, BaselineMode::Affine] {
        let map = so2_map_checked(&phantom.cube, &chrom, mode)?;
        println!(
            "{mode:?}: {} defined, mean |error| {:.2e}, max |error| {:.2e}",
            map.defined_count(),
            map.mean_abs_error(&phantom.s_map)?,
            map.max_abs_error(&phantom.s_map)?
        );
    }
    Ok(())
}
