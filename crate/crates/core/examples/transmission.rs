//! Through-port dips of all families around 214.6 THz.

use qfcomb::config::default_resonator;
use qfcomb::dispersion::transmission_spectrum;

fn main() -> qfcomb::Result<()> {
    let r = default_resonator();
    let traces = transmission_spectrum(&r.families, 214.4e12, 214.8e12, 4001, r.truncation_order)?;
    for t in &traces {
        let (i, min) = t
            .transmission
            .iter()
            .copied()
            .enumerate()
            .fold((0, 1.0), |b, (i, v)| if v < b.1 { (i, v) } else { b });
        println!(
            "{:5} deepest dip {:.3e} at {:.6} THz",
            t.family.as_str(),
            min,
            t.f_hz[i] / 1e12
        );
    }
    Ok(())
}
