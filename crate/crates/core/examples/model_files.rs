//! Loading the bundled JSON models and printing their basic data.

use std::path::Path;

use bmfl::hartree::{minimize, HartreeOptions};
use bmfl::model::load_model;

fn main() -> Result<(), bmfl::error::Error> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("models");
    let mut files: Vec<_> = std::fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().is_some_and(|n| n != "two_atoms.json"))
        .collect();
    files.sort();
    for path in files {
        let model = load_model(&path)?;
        let e = minimize(&model, 1.0, &HartreeOptions::default())?.energy;
        println!(
            "{:<24} d={} hash {:016x} real {} e_H {:.10}",
            path.file_name().unwrap_or_default().to_string_lossy(),
            model.modes(),
            model.fingerprint(),
            model.is_real(),
            e
        );
    }
    Ok(())
}
