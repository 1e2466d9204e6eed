//! Shared pump detuning and per-family amplitudes for three modal families.

use qfcomb::config::default_resonator;
use qfcomb::phases::{best_joint_pump, ClassifyOptions};
use qfcomb::reproduce::{default_axes, JOINT_FAMILIES, JOINT_LS};

fn main() -> qfcomb::Result<()> {
    let r = default_resonator();
    let (deltas, amps) = default_axes(r.drive_convention, 32);
    let best = best_joint_pump(
        &r,
        &JOINT_FAMILIES,
        &JOINT_LS,
        &deltas,
        &amps,
        &ClassifyOptions::default(),
        2,
        4,
    )?;
    println!(
        "shared detuning {:.4} GHz, worst C_min {:.4}",
        best.delta_p0 / 1e9,
        best.score
    );
    for f in &best.families {
        println!(
            "  {:5} a_pin {:.3e}  worst C_min {:.4}",
            f.family.as_str(),
            f.a_pin,
            f.worst_c_min
        );
    }
    Ok(())
}
