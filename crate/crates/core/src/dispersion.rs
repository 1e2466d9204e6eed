//! Resonance grids, integrated dispersion, through-port spectra and the
//! search for resonances of several families that can share one pump.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{damping_rates, FamilyLabel, ModalFamily};

/// Highest dispersion order kept in the Taylor expansion (2..=5).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct TruncationOrder(u8);

impl TruncationOrder {
    pub fn new(order: u8) -> Result<Self> {
        if (2..=5).contains(&order) {
            Ok(Self(order))
        } else {
            Err(Error::InvalidArgument(format!(
                "truncation order must be in 2..=5, got {order}"
            )))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl Default for TruncationOrder {
    fn default() -> Self {
        Self(3)
    }
}

impl TryFrom<u8> for TruncationOrder {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TruncationOrder> for u8 {
    fn from(t: TruncationOrder) -> u8 {
        t.0
    }
}

/// `Σ_{n=first..order} D_n Lⁿ/n!`
fn taylor_sum(family: &ModalFamily, l: i64, first: usize, order: TruncationOrder) -> f64 {
    let l = l as f64;
    let mut sum = 0.0;
    let mut term = 1.0; // Lⁿ/n!
    for n in 1..=order.get() as usize {
        term *= l / n as f64;
        if n >= first {
            sum += family.d[n - 1] * term;
        }
    }
    sum
}

/// Angular frequency ω_L (rad/s) of resonance `L` relative to the pumped one.
pub fn resonance_frequency(family: &ModalFamily, l: i64, order: TruncationOrder) -> f64 {
    family.omega0() + taylor_sum(family, l, 1, order)
}

/// `D_int(L) = ω_L − ω₀ − D₁L` (rad/s).
pub fn integrated_dispersion(family: &ModalFamily, l: i64, order: TruncationOrder) -> f64 {
    taylor_sum(family, l, 2, order)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceGrid {
    pub family: FamilyLabel,
    pub l_min: i64,
    pub l_max: i64,
    /// ω_L for `L = l_min..=l_max` in order.
    pub omegas: Vec<f64>,
    pub truncation_order: TruncationOrder,
}

impl ResonanceGrid {
    /// Builds the grid over `[-n, n]`; fails if it stops being monotone.
    pub fn symmetric(family: &ModalFamily, n: i64, order: TruncationOrder) -> Result<Self> {
        Self::build(family, -n, n, order)
    }

    pub fn build(
        family: &ModalFamily,
        l_min: i64,
        l_max: i64,
        order: TruncationOrder,
    ) -> Result<Self> {
        if l_min > l_max {
            return Err(Error::EmptyRange(format!("L range [{l_min}, {l_max}]")));
        }
        let omegas: Vec<f64> = (l_min..=l_max)
            .map(|l| resonance_frequency(family, l, order))
            .collect();
        if let Some(i) = omegas.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "{}: resonance grid not monotone at L = {}",
                family.label,
                l_min + i as i64
            )));
        }
        Ok(Self {
            family: family.label,
            l_min,
            l_max,
            omegas,
            truncation_order: order,
        })
    }

    pub fn omega(&self, l: i64) -> Option<f64> {
        if l < self.l_min || l > self.l_max {
            return None;
        }
        Some(self.omegas[(l - self.l_min) as usize])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        (self.l_min..).zip(self.omegas.iter().copied())
    }
}

/// Resonances `(L, f in Hz)` whose frequency lies in `[f_lo, f_hi]`, ascending.
pub fn resonances_in(
    family: &ModalFamily,
    f_lo: f64,
    f_hi: f64,
    order: TruncationOrder,
) -> Vec<(i64, f64)> {
    if !(f_hi >= f_lo) {
        return Vec::new();
    }
    let fsr = family.fsr_hz();
    // first-order estimate of the L window, widened to absorb the higher orders
    let lo = ((f_lo - family.f0) / fsr).floor() as i64;
    let hi = ((f_hi - family.f0) / fsr).ceil() as i64;
    let pad = 2 + (hi - lo).abs() / 50;
    ((lo - pad)..=(hi + pad))
        .map(|l| (l, resonance_frequency(family, l, order) / (2.0 * PI)))
        .filter(|&(_, f)| f >= f_lo && f <= f_hi)
        .collect()
}

/// Through-port transmission of one resonance: full dip `4γμ/Γ²` with FWHM Γ.
pub fn lorentzian_dip(family: &ModalFamily, omega: f64, omega_res: f64) -> f64 {
    let r = damping_rates(family);
    let depth = 4.0 * r.coupling * r.loss / (r.total * r.total);
    let x = 2.0 * (omega - omega_res) / r.total;
    1.0 - depth / (1.0 + x * x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionTrace {
    pub family: FamilyLabel,
    pub f_hz: Vec<f64>,
    pub transmission: Vec<f64>,
}

/// Per-family through-port transmission sampled on `samples` evenly spaced points.
pub fn transmission_spectrum(
    families: &[ModalFamily],
    f_lo: f64,
    f_hi: f64,
    samples: usize,
    order: TruncationOrder,
) -> Result<Vec<TransmissionTrace>> {
    if samples < 2 || !(f_hi > f_lo) {
        return Err(Error::EmptyRange(format!(
            "[{f_lo}, {f_hi}] Hz with {samples} samples"
        )));
    }
    let f_hz: Vec<f64> = (0..samples)
        .map(|i| f_lo + (f_hi - f_lo) * i as f64 / (samples - 1) as f64)
        .collect();
    Ok(families
        .iter()
        .map(|fam| {
            let linewidth_hz = damping_rates(fam).total / (2.0 * PI);
            let margin = 50.0 * linewidth_hz;
            let res: Vec<f64> = resonances_in(fam, f_lo - margin, f_hi + margin, order)
                .into_iter()
                .map(|(_, f)| 2.0 * PI * f)
                .collect();
            let transmission = f_hz
                .iter()
                .map(|&f| {
                    res.iter()
                        .map(|&w| lorentzian_dip(fam, 2.0 * PI * f, w))
                        .product()
                })
                .collect();
            TransmissionTrace {
                family: fam.label,
                f_hz: f_hz.clone(),
                transmission,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapMember {
    pub family: FamilyLabel,
    pub l: i64,
    pub f_hz: f64,
    /// Resonance frequency minus window center (Hz).
    pub detuning_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapWindow {
    pub center_hz: f64,
    pub width_hz: f64,
    pub members: Vec<OverlapMember>,
}

impl OverlapWindow {
    pub fn max_detuning(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.detuning_hz.abs())
            .fold(0.0, f64::max)
    }
}

/// All windows in `[f_lo, f_hi]` where one resonance per requested family sits
/// within `tolerance` Hz of a common center. Sorted by worst detuning.
pub fn find_overlap_windows(
    families: &[ModalFamily],
    f_lo: f64,
    f_hi: f64,
    tolerance: f64,
    order: TruncationOrder,
) -> Vec<OverlapWindow> {
    let mut by_label: BTreeMap<FamilyLabel, Vec<(i64, f64)>> = BTreeMap::new();
    for fam in families {
        by_label.insert(fam.label, resonances_in(fam, f_lo, f_hi, order));
    }
    let mut seen: BTreeSet<Vec<(FamilyLabel, i64)>> = BTreeSet::new();
    let mut out = Vec::new();
    for (&anchor_label, anchors) in &by_label {
        for &(anchor_l, f_min) in anchors {
            // with the anchor as the lowest member, the nearest resonance at or
            // above it in every other family gives the tightest window
            let mut picked = vec![(anchor_label, anchor_l, f_min)];
            let mut complete = true;
            for (&label, list) in &by_label {
                if label == anchor_label {
                    continue;
                }
                let idx = list.partition_point(|&(_, f)| f < f_min);
                match list.get(idx) {
                    Some(&(l, f)) if f - f_min <= 2.0 * tolerance => picked.push((label, l, f)),
                    _ => {
                        complete = false;
                        break;
                    }
                }
            }
            if !complete {
                continue;
            }
            picked.sort_by_key(|&(label, _, _)| label);
            let key: Vec<(FamilyLabel, i64)> = picked.iter().map(|&(lb, l, _)| (lb, l)).collect();
            if !seen.insert(key) {
                continue;
            }
            let f_max = picked.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
            let center = 0.5 * (f_min + f_max);
            out.push(OverlapWindow {
                center_hz: center,
                width_hz: f_max - f_min,
                members: picked
                    .into_iter()
                    .map(|(family, l, f_hz)| OverlapMember {
                        family,
                        l,
                        f_hz,
                        detuning_hz: f_hz - center,
                    })
                    .collect(),
            });
        }
    }
    out.sort_by(|a, b| {
        a.max_detuning()
            .total_cmp(&b.max_detuning())
            .then(a.center_hz.total_cmp(&b.center_hz))
    });
    out
}

/// Scales nonnegative weights to unit Euclidean norm.
pub fn composite_pump_weights(
    weights: &BTreeMap<FamilyLabel, f64>,
) -> Result<BTreeMap<FamilyLabel, f64>> {
    if let Some((l, w)) = weights.iter().find(|(_, &w)| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "weight for {l} must be finite and >= 0, got {w}"
        )));
    }
    let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::AllZero);
    }
    Ok(weights.iter().map(|(&l, &w)| (l, w / norm)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_resonator;
    use approx::assert_relative_eq;

    fn fam(label: FamilyLabel) -> ModalFamily {
        *default_resonator().family(label).unwrap()
    }

    fn order(n: u8) -> TruncationOrder {
        TruncationOrder::new(n).unwrap()
    }

    #[test]
    fn zero_index_is_cold_resonance() {
        let f = fam(FamilyLabel::TE00);
        assert_eq!(
            resonance_frequency(&f, 0, order(5)),
            2.0 * PI * 214.593_262_627_113_63e12
        );
        assert_eq!(integrated_dispersion(&f, 0, order(5)), 0.0);
    }

    #[test]
    fn first_resonance_second_order() {
        let f = fam(FamilyLabel::TE00);
        let w1 = resonance_frequency(&f, 1, order(2)) - f.omega0();
        assert_relative_eq!(
            w1,
            601_689_235_338.821_5 + 1_284_996.967_109_352_4,
            max_relative = 1e-12
        );
        assert_eq!(f.fsr_hz(), 95.761_816_009_356_17e9);
    }

    #[test]
    fn integrated_dispersion_third_order() {
        let f = fam(FamilyLabel::TE00);
        let d = integrated_dispersion(&f, 1, order(3));
        assert_relative_eq!(
            d,
            2_569_993.934_218_704_7 / 2.0 - 4_341.648_657_910_526 / 6.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(d, 1.284_273_4e6, max_relative = 1e-7);
    }

    #[test]
    fn parity_of_odd_term() {
        for f in default_resonator().families {
            for l in 1..20 {
                let p = integrated_dispersion(&f, l, order(3));
                let m = integrated_dispersion(&f, -l, order(3));
                assert_ne!(p, m);
                assert_relative_eq!(p + m, f.d[1] * (l * l) as f64, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn second_difference_is_d2() {
        let f = fam(FamilyLabel::TM10);
        let g = ResonanceGrid::symmetric(&f, 300, order(2)).unwrap();
        for l in -299..300 {
            let dd = g.omega(l + 1).unwrap() - 2.0 * g.omega(l).unwrap() + g.omega(l - 1).unwrap();
            // ω_L ~ 1e15 rad/s, so cancellation limits the absolute accuracy
            assert!(
                (dd - f.d[1]).abs() <= 1e-10 * f.omega0() * 4.0,
                "L={l} dd={dd}"
            );
        }
    }

    #[test]
    fn dint_identity_all_orders() {
        for f in default_resonator().families {
            for n in 2..=5 {
                for l in [-40i64, -7, -1, 1, 5, 33] {
                    let lhs = integrated_dispersion(&f, l, order(n));
                    let rhs = resonance_frequency(&f, l, order(n)) - f.omega0() - f.d[0] * l as f64;
                    assert!((lhs - rhs).abs() <= 1e-15 * f.omega0() * 8.0 + 1e-12 * lhs.abs());
                }
            }
        }
    }

    #[test]
    fn grid_is_monotone_over_table_band() {
        for f in default_resonator().families {
            let g = ResonanceGrid::symmetric(&f, 900, order(5)).unwrap();
            assert_eq!(g.omega(0), Some(f.omega0()));
        }
    }

    #[test]
    fn dip_depths() {
        let mut f = fam(FamilyLabel::TE00);
        let w = f.omega0();
        assert_relative_eq!(lorentzian_dip(&f, w, w), 0.01, max_relative = 1e-12);
        let r = damping_rates(&f);
        let half = lorentzian_dip(&f, w + r.total / 2.0, w);
        // ω ≈ 1.3e15 rad/s leaves about 1e-10 relative resolution on ω − ω_res
        assert_relative_eq!(1.0 - half, 0.99 / 2.0, max_relative = 1e-9);
        f.intrinsic_fraction = 0.5;
        assert!(lorentzian_dip(&f, w, w).abs() < 1e-15);
    }

    #[test]
    fn transmission_bounded_and_errors() {
        let fams = default_resonator().families;
        let tr = transmission_spectrum(&fams, 214.0e12, 215.0e12, 4001, order(3)).unwrap();
        assert_eq!(tr.len(), 4);
        for t in &tr {
            assert!(t.transmission.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
        assert!(matches!(
            transmission_spectrum(&fams, 1.0, 1.0, 10, order(3)),
            Err(Error::EmptyRange(_))
        ));
        assert!(transmission_spectrum(&fams, 1.0, 2.0, 1, order(3)).is_err());
    }

    #[test]
    fn shared_pump_window_found() {
        let fams: Vec<_> = [FamilyLabel::TE00, FamilyLabel::TE10, FamilyLabel::TM10]
            .map(fam)
            .to_vec();
        let w = find_overlap_windows(&fams, 214.0e12, 215.2e12, 2e9, order(3));
        assert!(!w.is_empty());
        let best = &w[0];
        assert!(
            (best.center_hz - 214.593e12).abs() < 1e9,
            "{}",
            best.center_hz
        );
        assert!(best.members.iter().all(|m| m.l == 0));
        for win in &w {
            assert!(win.width_hz >= 0.0);
            for m in &win.members {
                assert!(m.detuning_hz.abs() <= win.width_hz / 2.0 + 1e-12 * win.center_hz);
            }
        }
    }

    #[test]
    fn single_family_and_zero_tolerance() {
        let f = fam(FamilyLabel::TE00);
        let res = resonances_in(&f, 210e12, 220e12, order(3));
        let w = find_overlap_windows(&[f], 210e12, 220e12, 0.0, order(3));
        assert_eq!(w.len(), res.len());
        let fams = default_resonator().families;
        assert!(find_overlap_windows(&fams, 214.0e12, 215.0e12, 0.0, order(3)).is_empty());
    }

    #[test]
    fn overlap_is_permutation_invariant() {
        let fams = default_resonator().families;
        let a = find_overlap_windows(&fams, 200e12, 230e12, 3e9, order(3));
        let mut rev = fams.clone();
        rev.reverse();
        let b = find_overlap_windows(&rev, 200e12, 230e12, 3e9, order(3));
        rev.swap(0, 2);
        let c = find_overlap_windows(&rev, 200e12, 230e12, 3e9, order(3));
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn pump_weights() {
        use FamilyLabel::*;
        let w = composite_pump_weights(&BTreeMap::from([(TE00, 1.0)])).unwrap();
        assert_eq!(w[&TE00], 1.0);
        let w = composite_pump_weights(&BTreeMap::from([(TE00, 1.0), (TE10, 1.0), (TM10, 1.0)]))
            .unwrap();
        for v in w.values() {
            assert_relative_eq!(*v, 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        }
        let w = composite_pump_weights(&BTreeMap::from([(TE00, 3.0), (TE10, 4.0)])).unwrap();
        assert_relative_eq!(w[&TE00], 0.6, max_relative = 1e-15);
        assert_relative_eq!(w[&TE10], 0.8, max_relative = 1e-15);
        assert_eq!(
            composite_pump_weights(&BTreeMap::from([(TE00, 0.0)])),
            Err(Error::AllZero)
        );
    }
}
