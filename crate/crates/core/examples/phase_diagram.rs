//! Coarse NE/ET/MI map of the first TE00 pair, printed as text.

use qfcomb::config::default_resonator;
use qfcomb::model::FamilyLabel;
use qfcomb::phases::{sweep, ClassifyOptions, Phase};
use qfcomb::reproduce::default_axes;

fn main() -> qfcomb::Result<()> {
    let r = default_resonator();
    let (deltas, amps) = default_axes(r.drive_convention, 32);
    let g = sweep(
        &r,
        FamilyLabel::TE00,
        &[1],
        &deltas,
        &amps,
        &ClassifyOptions::default(),
        4,
    )?
    .remove(0);
    println!(
        "rows: amplitude (top = {:.2e}); columns: detuning {:.2} to {:.2} GHz",
        amps[amps.len() - 1],
        deltas[0] / 1e9,
        deltas[deltas.len() - 1] / 1e9
    );
    for j in (0..amps.len()).rev() {
        let row: String = (0..deltas.len())
            .map(|i| match g.get(i, j).phase {
                Phase::NE => '.',
                Phase::ET => 'o',
                Phase::MI => '#',
            })
            .collect();
        println!("{row}");
    }
    println!(
        "NE {}  ET {}  MI {}",
        g.count(Phase::NE),
        g.count(Phase::ET),
        g.count(Phase::MI)
    );
    Ok(())
}
