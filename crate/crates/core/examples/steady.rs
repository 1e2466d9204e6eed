//! Steady-state branches across the bistable onset and above the parametric threshold.

use qfcomb::model::NormalizedDrive;
use qfcomb::steady::{fold_points, parametric_branch, pump_only_branches, threshold};

fn main() -> qfcomb::Result<()> {
    let onset = 3f64.sqrt();
    println!(
        "bistability needs dtp > {onset:.4}; folds at dtp = 3: {:?}",
        fold_points(3.0)
    );
    for (f, dtp, dtl) in [(0.8, 1.0, 0.99), (1.9, 3.0, 2.99), (1.4, 1.0, 0.9)] {
        let d = NormalizedDrive::raw(f, dtp, dtl);
        let th = threshold(dtp, dtl, 10.0);
        let th = if th.exists {
            format!("{:.4}", th.f_threshold)
        } else {
            "none".into()
        };
        println!("F = {f}, dtp = {dtp}, dtl = {dtl}  (threshold F: {th})");
        for s in pump_only_branches(f, dtp)
            .into_iter()
            .chain(parametric_branch(&d)?)
        {
            println!(
                "  {:?}  Ap2 = {:.5}  A2 = {:.5}  stable = {}",
                s.branch, s.ap2, s.a2, s.stable
            );
        }
    }
    Ok(())
}
