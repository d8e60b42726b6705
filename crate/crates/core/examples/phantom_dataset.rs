//! Writes a two-class phantom dataset with its manifest.

use rgb2msi::oximetry::ChromophoreSet;
use rgb2msi::phantom::{phantom_suite, Manifest, PhantomClass, PhantomConfig};
use rgb2msi::spectral::WavelengthGrid;
use rgb2msi::train::{group_by_class, load_dataset};

fn main() -> rgb2msi::Result<()> {
    let root = std::env::temp_dir().join("rgb2msi_phantoms");
    let chrom = ChromophoreSet::fixture(&WavelengthGrid::msi_default())?;
    let classes = [
        PhantomClass { name: "low".into(), cubes: 2, s_range: (0.0, 0.3) },
        PhantomClass { name: "high".into(), cubes: 2, s_range: (0.7, 1.0) },
    ];
    let base = PhantomConfig { width: 32, height: 32, ..Default::default() };
    phantom_suite(&root, &classes, &base, &chrom, 11)?;

    let manifest = Manifest::load(&root)?;
    for e in &manifest.entries {
        println!("{:<5} {:<24} seed {:>20}", e.class, e.cube.display(), e.seed);
    }
    for (class, cubes) in group_by_class(load_dataset(&root)?) {
        let mean: f64 = cubes.iter().map(|c| c.data().iter().map(|&v| v as f64).sum::<f64>() / c.data().len() as f64).sum::<f64>()
            / cubes.len() as f64;
        println!("class {class}: {} cubes, mean reflectance {mean:.3}", cubes.len());
    }
    println!("dataset at {}", root.display());
    Ok(())
}
