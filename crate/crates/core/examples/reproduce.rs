//! Writes the dispersion figure bundle and its manifest to a directory (default `out/fig2`).

use qfcomb::config::{config_hash, default_resonator, RunSettings};
use qfcomb::reproduce::{reproduce, Context, Figure};

fn main() -> qfcomb::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "out/fig2".into());
    let (resonator, settings) = (default_resonator(), RunSettings::default());
    let hash = config_hash(&resonator, &settings);
    let ctx = Context {
        resonator: &resonator,
        settings: &settings,
        config_hash: &hash,
        workers: 4,
    };
    let bundle = reproduce(Figure::Fig2, &ctx)?;
    let manifest = bundle.write(std::path::Path::new(&dir), &hash, "example reproduce fig2")?;
    println!(
        "{} files, manifest at {}",
        bundle.files.len(),
        manifest.display()
    );
    Ok(())
}
