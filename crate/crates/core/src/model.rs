//! Physical domain types and the normalization layer.
//!
//! Laboratory quantities (Hz, V/m, m²) enter here and leave as the
//! dimensionless drive `F` and detunings measured in units of the total
//! damping rate `Γ`. Everything downstream works in those units with time
//! measured in `1/Γ`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dispersion::{self, TruncationOrder};
use crate::error::{Error, Result};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum speed of light (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854_187_812_8e-12;

/// Relative mismatch between tabulated and formula η above which a warning is logged.
pub const ETA_MISMATCH_WARN: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyLabel {
    TE00,
    TM00,
    TE10,
    TM10,
}

impl FamilyLabel {
    pub const ALL: [FamilyLabel; 4] = [Self::TE00, Self::TM00, Self::TE10, Self::TM10];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::TE00 => "TE00",
            Self::TM00 => "TM00",
            Self::TE10 => "TE10",
            Self::TM10 => "TM10",
        }
    }
}

impl fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FamilyLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TE00" => Ok(Self::TE00),
            "TM00" => Ok(Self::TM00),
            "TE10" => Ok(Self::TE10),
            "TM10" => Ok(Self::TM10),
            other => Err(Error::InvalidArgument(format!(
                "unknown modal family '{other}'"
            ))),
        }
    }
}

/// One spatial mode family of the resonator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalFamily {
    pub label: FamilyLabel,
    /// Dispersion coefficients `D1..D5` in rad/s.
    pub d: [f64; 5],
    /// Frequency of the `L = 0` resonance (Hz).
    pub f0: f64,
    pub q_total: f64,
    /// `μ / (γ + μ)`, the intrinsic-loss share of the total damping.
    pub intrinsic_fraction: f64,
    /// Effective mode area (m²).
    pub a_eff: f64,
    pub n_eff: f64,
    /// Nonlinear coupling rate η (rad/s per photon).
    pub eta: f64,
    /// Tabulated auxiliary figure, carried as opaque metadata.
    pub g0: f64,
}

impl ModalFamily {
    /// Returns one message per violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let l = self.label;
        if !(self.q_total > 0.0) {
            v.push(format!("{l}: q_total must be > 0 (got {})", self.q_total));
        }
        if !(self.intrinsic_fraction > 0.0 && self.intrinsic_fraction < 1.0) {
            v.push(format!(
                "{l}: intrinsic_fraction must lie in (0, 1) (got {})",
                self.intrinsic_fraction
            ));
        }
        if !(self.a_eff > 0.0) {
            v.push(format!("{l}: a_eff must be > 0 (got {})", self.a_eff));
        }
        if !(self.n_eff >= 1.0) {
            v.push(format!("{l}: n_eff must be >= 1 (got {})", self.n_eff));
        }
        if !(self.eta > 0.0) {
            v.push(format!("{l}: eta must be > 0 (got {})", self.eta));
        }
        if !(self.f0 > 0.0) {
            v.push(format!("{l}: f0 must be > 0 (got {})", self.f0));
        }
        if self.d.iter().any(|x| !x.is_finite()) {
            v.push(format!("{l}: dispersion coefficients must be finite"));
        }
        v
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI * self.f0
    }

    pub fn fsr_hz(&self) -> f64 {
        self.d[0] / (2.0 * PI)
    }

    pub fn lambda0_m(&self) -> f64 {
        C_LIGHT / self.f0
    }
}

/// Cross-section geometry. Metadata only; nothing is computed from it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Geometry {
    pub ww: f64,
    pub wh: f64,
    pub theta_deg: f64,
    pub cb: f64,
    pub ch: f64,
    pub cw: f64,
    pub gap: f64,
}

/// How the `a_pin` sweep axis is turned into input power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DriveConvention {
    /// `a_pin` is a field amplitude in V/m; `P_in = ½ n_eff ε₀ c A_eff |a_pin|²`.
    PlaneWave,
    /// `a_pin` is the input amplitude in √(photons/s); `P_in = ħΩ₀ a_pin²`.
    #[default]
    PhotonFlux,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonatorSpec {
    /// Ring radius (m).
    pub radius: f64,
    /// Nonlinear index (m²/W).
    pub n2: f64,
    /// Linear index for the η formula. `None` uses each family's `n_eff`.
    pub n0: Option<f64>,
    pub families: Vec<ModalFamily>,
    pub geometry: Geometry,
    pub truncation_order: TruncationOrder,
    pub drive_convention: DriveConvention,
}

impl ResonatorSpec {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.radius > 0.0) {
            v.push(format!("radius must be > 0 (got {})", self.radius));
        }
        if !(self.n2 > 0.0) {
            v.push(format!("n2 must be > 0 (got {})", self.n2));
        }
        if let Some(n0) = self.n0 {
            if !(n0 >= 1.0) {
                v.push(format!("n0 must be >= 1 (got {n0})"));
            }
        }
        if self.families.is_empty() {
            v.push("families must be non-empty".to_string());
        }
        let mut seen = Vec::new();
        for f in &self.families {
            if seen.contains(&f.label) {
                v.push(format!("duplicate family label {}", f.label));
            }
            seen.push(f.label);
            v.extend(f.violations());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn family(&self, label: FamilyLabel) -> Result<&ModalFamily> {
        self.families
            .iter()
            .find(|f| f.label == label)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("family {label} not in resonator config"))
            })
    }
}

/// A laboratory operating point for one family and one mode pair `±L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub family: ModalFamily,
    pub l: u32,
    /// Pump detuning `(ω_p0 − Ω_p0)/2π` in Hz.
    pub delta_p0: f64,
    /// Pump amplitude on the sweep axis (see [`DriveConvention`]).
    pub a_pin: f64,
}

impl OperatingPoint {
    pub fn new(family: ModalFamily, l: u32, delta_p0: f64, a_pin: f64) -> Result<Self> {
        if l < 1 {
            return Err(Error::InvalidArgument(
                "mode-pair index L must be >= 1".into(),
            ));
        }
        Ok(Self {
            family,
            l,
            delta_p0,
            a_pin,
        })
    }
}

/// Dimensionless drive of the steady-state system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedDrive {
    pub f_norm: f64,
    /// Pump detuning `2πΔ_p0/Γ`.
    pub dtp: f64,
    /// Pair detuning `dtp − D_int(L)/Γ`.
    pub dtl: f64,
    /// `D_int(L)/Γ`.
    pub dint_norm: f64,
}

impl NormalizedDrive {
    /// Raw normalized drive; `dint_norm` is inferred as `dtp − dtl`.
    pub fn raw(f_norm: f64, dtp: f64, dtl: f64) -> Self {
        Self {
            f_norm,
            dtp,
            dtl,
            dint_norm: dtp - dtl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingRates {
    /// Total damping Γ (rad/s).
    pub total: f64,
    /// Coupling rate γ (rad/s).
    pub coupling: f64,
    /// Intrinsic loss rate μ (rad/s).
    pub loss: f64,
}

impl DampingRates {
    /// `r = γ/μ`; 1 is critical coupling.
    pub fn coupling_ratio(&self) -> f64 {
        self.coupling / self.loss
    }

    /// `γ/Γ`, the share of damping through the coupler.
    pub fn coupling_fraction(&self) -> f64 {
        self.coupling / self.total
    }
}

pub fn damping_rates(family: &ModalFamily) -> DampingRates {
    let total = family.omega0() / family.q_total;
    let loss = family.intrinsic_fraction * total;
    DampingRates {
        total,
        coupling: total - loss,
        loss,
    }
}

/// Per-photon Kerr frequency shift `ħω₀²c n₂ / (n₀² V_eff)` with `V_eff ≈ A_eff·2πR`.
pub fn nonlinear_rate(family: &ModalFamily, resonator: &ResonatorSpec) -> Result<f64> {
    let v_eff = family.a_eff * 2.0 * PI * resonator.radius;
    if v_eff == 0.0 {
        return Err(Error::ZeroVolume);
    }
    let n0 = resonator.n0.unwrap_or(family.n_eff);
    let w0 = family.omega0();
    Ok(HBAR * w0 * w0 * C_LIGHT * resonator.n2 / (n0 * n0 * v_eff))
}

/// Relative mismatch between the tabulated η and the formula value.
pub fn eta_mismatch(family: &ModalFamily, resonator: &ResonatorSpec) -> Result<f64> {
    let formula = nonlinear_rate(family, resonator)?;
    Ok((family.eta - formula).abs() / formula)
}

/// Input power (W) delivered by `a_pin` under the given convention.
pub fn input_power(
    family: &ModalFamily,
    a_pin: f64,
    laser_omega: f64,
    convention: DriveConvention,
) -> f64 {
    match convention {
        DriveConvention::PlaneWave => {
            0.5 * family.n_eff * EPS0 * C_LIGHT * family.a_eff * a_pin * a_pin
        }
        DriveConvention::PhotonFlux => HBAR * laser_omega * a_pin * a_pin,
    }
}

pub fn normalize(op: &OperatingPoint, resonator: &ResonatorSpec) -> NormalizedDrive {
    let fam = &op.family;
    let rates = damping_rates(fam);
    let gamma_t = rates.total;
    let laser_omega = fam.omega0() - 2.0 * PI * op.delta_p0;
    let p_in = input_power(fam, op.a_pin, laser_omega, resonator.drive_convention);
    let f_norm =
        (2.0 * rates.coupling * fam.eta * p_in / (HBAR * laser_omega * gamma_t.powi(3))).sqrt();
    let dtp = 2.0 * PI * op.delta_p0 / gamma_t;
    let dint = dispersion::integrated_dispersion(fam, op.l as i64, resonator.truncation_order);
    let dint_norm = dint / gamma_t;
    NormalizedDrive {
        f_norm,
        dtp,
        dtl: dtp - dint_norm,
        dint_norm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_resonator;
    use approx::assert_relative_eq;

    fn te00() -> ModalFamily {
        *default_resonator().family(FamilyLabel::TE00).unwrap()
    }

    #[test]
    fn te00_damping_rates() {
        let r = damping_rates(&te00());
        // independent calculator: 2π·214.59326262711363e12/1e6
        assert_relative_eq!(r.total, 1.348_329_234_758_410_5e9, max_relative = 1e-12);
        assert_relative_eq!(r.loss, 6.067_481_556_412_847e8, max_relative = 1e-12);
        assert_relative_eq!(r.coupling, 7.415_810_791_171_259e8, max_relative = 1e-12);
        assert_eq!(r.total, r.coupling + r.loss);
    }

    #[test]
    fn infinite_q_has_no_damping() {
        let mut f = te00();
        f.q_total = f64::INFINITY;
        let r = damping_rates(&f);
        assert_eq!((r.total, r.loss, r.coupling), (0.0, 0.0, 0.0));
    }

    #[test]
    fn half_split_is_critical_coupling() {
        let mut f = te00();
        f.intrinsic_fraction = 0.5;
        let r = damping_rates(&f);
        assert_eq!(r.coupling, r.loss);
        assert_eq!(r.coupling_ratio(), 1.0);
    }

    #[test]
    fn quality_factor_decomposition() {
        for f in default_resonator().families {
            let r = damping_rates(&f);
            let w = f.omega0();
            let (q0, qex) = (w / r.coupling, w / r.loss);
            assert_relative_eq!(1.0 / f.q_total, 1.0 / q0 + 1.0 / qex, max_relative = 1e-12);
        }
    }

    #[test]
    fn eta_formula_regression_and_scaling() {
        let res = default_resonator();
        let f = te00();
        let eta = nonlinear_rate(&f, &res).unwrap();
        // high-precision evaluation of ħ(2πf0)²c n2 / (n_eff² A_eff 2πR)
        assert_relative_eq!(eta, 2.532_906_303_188_764_4, max_relative = 1e-9);

        let mut big = res.clone();
        big.radius *= 2.0;
        assert_relative_eq!(
            nonlinear_rate(&f, &big).unwrap(),
            eta / 2.0,
            max_relative = 1e-14
        );

        let mut linear = res.clone();
        linear.n2 = 0.0;
        assert_eq!(nonlinear_rate(&f, &linear).unwrap(), 0.0);

        let mut flat = f;
        flat.a_eff = 0.0;
        assert_eq!(nonlinear_rate(&flat, &res), Err(Error::ZeroVolume));
    }

    #[test]
    fn normalize_examples() {
        let res = default_resonator();
        let f = te00();
        let off = normalize(&OperatingPoint::new(f, 3, 1.0e8, 0.0).unwrap(), &res);
        assert_eq!(off.f_norm, 0.0);

        let cold = normalize(&OperatingPoint::new(f, 4, 0.0, 1e9).unwrap(), &res);
        assert_eq!(cold.dtp, 0.0);
        let dint = dispersion::integrated_dispersion(&f, 4, res.truncation_order);
        assert_eq!(cold.dtl, -dint / damping_rates(&f).total);

        let d = normalize(&OperatingPoint::new(f, 1, 0.36e9, 1e9).unwrap(), &res);
        assert_relative_eq!(d.dtp, 1.677_592_276_629_631_8, max_relative = 1e-12);
        assert_relative_eq!(d.dtl, d.dtp - d.dint_norm, max_relative = 1e-12);
    }

    #[test]
    fn plane_wave_power() {
        let mut res = default_resonator();
        res.drive_convention = DriveConvention::PlaneWave;
        let f = te00();
        let p = input_power(&f, 2.0, 1.0, DriveConvention::PlaneWave);
        assert_relative_eq!(
            p,
            0.5 * f.n_eff * EPS0 * C_LIGHT * f.a_eff * 4.0,
            max_relative = 1e-15
        );
        let d = normalize(&OperatingPoint::new(f, 1, 0.0, 1e7).unwrap(), &res);
        let rates = damping_rates(&f);
        let w = f.omega0();
        let expect =
            (2.0 * rates.coupling * f.eta * input_power(&f, 1e7, w, DriveConvention::PlaneWave)
                / (HBAR * w * rates.total.powi(3)))
            .sqrt();
        assert_relative_eq!(d.f_norm, expect, max_relative = 1e-14);
    }

    #[test]
    fn rejects_l_zero() {
        assert!(OperatingPoint::new(te00(), 0, 0.0, 1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn drive_is_positively_homogeneous(a in 1e6f64..1e10, k in 0.01f64..100.0, det in -2e9f64..2e9) {
            for conv in [DriveConvention::PlaneWave, DriveConvention::PhotonFlux] {
                let mut res = default_resonator();
                res.drive_convention = conv;
                let f = te00();
                let d1 = normalize(&OperatingPoint::new(f, 2, det, a).unwrap(), &res);
                let d2 = normalize(&OperatingPoint::new(f, 2, det, k * a).unwrap(), &res);
                proptest::prop_assert!((d2.f_norm - k * d1.f_norm).abs() <= 1e-12 * d2.f_norm);
                proptest::prop_assert_eq!(d1.dtl, d1.dtp - d1.dint_norm);
            }
        }
    }
}
