use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::SpectralCube;

/// A cube read from a dataset directory.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCube {
    pub class: String,
    /// File stem.
    pub name: String,
    pub cube: SpectralCube,
}

/// Reads `<root>/<class>/<name>.mcube` for every class directory, sorted by
/// class and then name. Nested directories (such as ground-truth maps) are
/// not descended into.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<Vec<LabeledCube>> {
    let root = root.as_ref();
    let mut out = Vec::new();
    for class_dir in sorted_entries(root)? {
        if !class_dir.is_dir() {
            continue;
        }
        let class = file_name(&class_dir);
        for file in sorted_entries(&class_dir)? {
            if file.is_file() && file.extension().is_some_and(|e| e == "mcube") {
                out.push(LabeledCube {
                    class: class.clone(),
                    name: file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                    cube: SpectralCube::load(&file)?,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::format(format!(
            "no <class>/<name>.mcube files under {}",
            root.display()
        )));
    }
    Ok(out)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn sorted_entries(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut entries = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

/// Splits cubes into per-class lists, keeping first-appearance class order.
pub fn group_by_class(cubes: Vec<LabeledCube>) -> Vec<(String, Vec<SpectralCube>)> {
    let mut out: Vec<(String, Vec<SpectralCube>)> = Vec::new();
    for c in cubes {
        match out.iter_mut().find(|(name, _)| *name == c.class) {
            Some((_, list)) => list.push(c.cube),
            None => out.push((c.class, vec![c.cube])),
        }
    }
    out
}
