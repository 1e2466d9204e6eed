//! Free spectral range, center wavelength and integrated dispersion of every family.

use qfcomb::config::{default_resonator, fsr_ghz, lambda0_nm};
use qfcomb::dispersion::integrated_dispersion;

fn main() {
    let r = default_resonator();
    println!("family  fsr_ghz     lambda0_nm   Dint(1)/2pi_hz  Dint(6)/2pi_hz");
    for fam in &r.families {
        let d =
            |l| integrated_dispersion(fam, l, r.truncation_order) / (2.0 * std::f64::consts::PI);
        println!(
            "{:6}  {:10.5}  {:11.5}  {:14.4e}  {:14.4e}",
            fam.label.as_str(),
            fsr_ghz(fam),
            lambda0_nm(fam),
            d(1),
            d(6)
        );
    }
}
