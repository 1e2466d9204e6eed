//! Output noise spectrum of a driven TE00 pair and its quadrature covariance.

use qfcomb::config::default_resonator;
use qfcomb::duan::{minimize_duan, quadrature_covariance};
use qfcomb::fluct::{build_m, noise_spectrum};
use qfcomb::model::{damping_rates, normalize, FamilyLabel, OperatingPoint};
use qfcomb::steady::pump_only_branches;

fn main() -> qfcomb::Result<()> {
    let r = default_resonator();
    let fam = *r.family(FamilyLabel::TE00)?;
    let d = normalize(&OperatingPoint::new(fam, 1, 0.36e9, 1.1e9)?, &r);
    let state = pump_only_branches(d.f_norm, d.dtp)[0];
    let sys = build_m(&state, d.dtl, damping_rates(&fam).coupling_fraction());
    println!(
        "F = {:.4}, dtp = {:.4}, dtl = {:.4}, max Re(eig) = {:.4}",
        d.f_norm,
        d.dtp,
        d.dtl,
        sys.max_eig_re()
    );
    for omega in [0.0, 0.5, 1.0, 2.0] {
        let sigma = quadrature_covariance(&noise_spectrum(&sys, omega)?)?;
        println!(
            "omega = {omega}: C_min = {:.4}",
            minimize_duan(&sigma).c_min
        );
    }
    println!(
        "sigma(0) =\n{:.4}",
        quadrature_covariance(&noise_spectrum(&sys, 0.0)?)?
    );
    Ok(())
}
