//! Independent checks of one below-threshold point: ODE residual, Jacobian, Langevin covariance.

use qfcomb::fluct::build_m;
use qfcomb::model::NormalizedDrive;
use qfcomb::oracle::{
    fd_jacobian, from_steady, langevin_covariance, vector_field, LangevinOptions,
};
use qfcomb::steady::pump_only_branches;

fn main() -> qfcomb::Result<()> {
    let (f, dtp, dtl, gamma) = (0.8, 0.5, 0.5, 0.55);
    let d = NormalizedDrive::raw(f, dtp, dtl);
    let s = pump_only_branches(f, dtp)[0];
    println!(
        "ODE residual at the root: {:.2e}",
        vector_field(&from_steady(&s), &d).max_norm()
    );
    let sys = build_m(&s, dtl, gamma);
    let jac = (fd_jacobian(&s, &d, 1e-5) - sys.m)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    println!("max |M_fd - M|: {jac:.2e}");
    let exact = sys.intracavity_covariance()?;
    let est = langevin_covariance(
        &s,
        &d,
        gamma,
        &LangevinOptions {
            n_samples: 2000,
            ..LangevinOptions::default()
        },
    )?;
    for i in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|j| {
                format!(
                    "{:+.3}/{:+.3}±{:.3}",
                    exact[(i, j)],
                    est.covariance[(i, j)],
                    est.stderr[(i, j)]
                )
            })
            .collect();
        println!("{}", row.join("  "));
    }
    Ok(())
}
