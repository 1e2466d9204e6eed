//! Frequencies where TE00, TE10 and TM10 each have a resonance within 1 GHz.

use qfcomb::config::default_resonator;
use qfcomb::dispersion::find_overlap_windows;
use qfcomb::model::FamilyLabel;

fn main() -> qfcomb::Result<()> {
    let r = default_resonator();
    let fams = [FamilyLabel::TE00, FamilyLabel::TE10, FamilyLabel::TM10]
        .map(|l| r.family(l).copied())
        .into_iter()
        .collect::<qfcomb::Result<Vec<_>>>()?;
    let windows = find_overlap_windows(&fams, 130e12, 260e12, 1e9, r.truncation_order);
    println!("{} windows; tightest five:", windows.len());
    for w in windows.iter().take(5) {
        let members: Vec<String> = w
            .members
            .iter()
            .map(|m| format!("{}@{}", m.family.as_str(), m.l))
            .collect();
        println!(
            "  {:.4} THz  spread {:7.1} MHz  {}",
            w.center_hz / 1e12,
            w.width_hz / 1e6,
            members.join(" ")
        );
    }
    Ok(())
}
