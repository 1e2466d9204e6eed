//! JSON configuration: resonator description plus run settings.
//!
//! Physical keys carry their unit as a suffix (`radius_um`, `f0_thz`,
//! `a_eff_um2`, ...). Where several suffixes are accepted for one quantity,
//! exactly one must be present. Serialization always writes SI suffixes so a
//! load → save → load cycle is lossless.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dispersion::TruncationOrder;
use crate::error::{Error, Result};
use crate::model::{
    eta_mismatch, DriveConvention, FamilyLabel, Geometry, ModalFamily, ResonatorSpec, C_LIGHT,
    ETA_MISMATCH_WARN,
};

/// The shipped resonator description (four modal families).
pub const DEFAULT_RESONATOR_JSON: &str = include_str!("../data/resonator.json");

/// Relative tolerance for tabulated derived quantities (FSR, λ0).
pub const DERIVED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    label: FamilyLabel,
    d1_rad_per_s: f64,
    d2_rad_per_s: f64,
    d3_rad_per_s: f64,
    d4_rad_per_s: f64,
    d5_rad_per_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fsr_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f0_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f0_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f0_thz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda0_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a_eff_m2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a_eff_um2: Option<f64>,
    n_eff: f64,
    eta_rad_per_s: f64,
    #[serde(default)]
    g0: f64,
    q_total: f64,
    intrinsic_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    waveguide_width_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    waveguide_width_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    waveguide_height_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    waveguide_height_m: Option<f64>,
    #[serde(default)]
    sidewall_angle_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cladding_bottom_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cladding_bottom_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cladding_height_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cladding_height_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cladding_width_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cladding_width_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gap_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gap_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResonatorFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius_um: Option<f64>,
    n2_m2_per_w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n0: Option<f64>,
    #[serde(default)]
    truncation_order: TruncationOrder,
    #[serde(default)]
    drive_convention: DriveConvention,
    #[serde(default)]
    geometry: GeometryFile,
    families: Vec<FamilyFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    run: Option<RunSettings>,
}

/// Numerical and output settings. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    /// NE/ET boundary on `C_min`.
    pub eps_ne: f64,
    /// Analysis frequency in units of the total damping rate.
    pub omega_norm: f64,
    /// Upper drive for threshold searches.
    pub f_max_norm: f64,
    /// MI exclusion radius in grid cells for the joint-pump search.
    pub mi_margin_cells: usize,
    /// Ascending `C_min` bucket edges for heat maps.
    pub heatmap_buckets: Vec<f64>,
    pub seed: u64,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            eps_ne: 1e-3,
            omega_norm: 0.0,
            f_max_norm: crate::steady::DEFAULT_F_MAX,
            mi_margin_cells: 2,
            heatmap_buckets: vec![-0.6, -0.5, -0.4, -0.3, -0.2, -0.1, -0.05, -0.01, -1e-3],
            seed: 0x5eed,
        }
    }
}

impl RunSettings {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.eps_ne > 0.0) {
            v.push(format!("run.eps_ne must be > 0 (got {})", self.eps_ne));
        }
        if !self.omega_norm.is_finite() {
            v.push("run.omega_norm must be finite".to_string());
        }
        if !(self.f_max_norm > 0.0) {
            v.push(format!(
                "run.f_max_norm must be > 0 (got {})",
                self.f_max_norm
            ));
        }
        if self.heatmap_buckets.is_empty()
            || self.heatmap_buckets.windows(2).any(|w| !(w[0] < w[1]))
        {
            v.push("run.heatmap_buckets must be non-empty and strictly ascending".to_string());
        }
        v
    }
}

/// Everything a CLI run needs besides the resonator.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub resonator_path: Option<PathBuf>,
    pub settings: RunSettings,
    pub out_dir: PathBuf,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            resonator_path: None,
            settings: RunSettings::default(),
            out_dir: PathBuf::from("out"),
            workers: 1,
        }
    }
}

fn one_of(name: &str, options: &[(&str, Option<f64>, f64)], out: &mut Vec<String>) -> f64 {
    let given: Vec<_> = options.iter().filter(|(_, v, _)| v.is_some()).collect();
    match given.as_slice() {
        [(_, Some(v), scale)] => v * scale,
        [] => {
            let keys: Vec<_> = options.iter().map(|(k, _, _)| *k).collect();
            out.push(format!(
                "{name}: missing, expected one of {}",
                keys.join(", ")
            ));
            f64::NAN
        }
        _ => {
            let keys: Vec<_> = given.iter().map(|(k, _, _)| *k).collect();
            out.push(format!(
                "{name}: given more than once ({})",
                keys.join(", ")
            ));
            f64::NAN
        }
    }
}

fn optional_one_of(name: &str, options: &[(&str, Option<f64>, f64)], out: &mut Vec<String>) -> f64 {
    if options.iter().all(|(_, v, _)| v.is_none()) {
        0.0
    } else {
        one_of(name, options, out)
    }
}

fn family_from_file(f: &FamilyFile, errs: &mut Vec<String>) -> ModalFamily {
    let l = f.label;
    let f0 = one_of(
        &format!("{l}.f0"),
        &[
            ("f0_hz", f.f0_hz, 1.0),
            ("f0_ghz", f.f0_ghz, 1e9),
            ("f0_thz", f.f0_thz, 1e12),
        ],
        errs,
    );
    let a_eff = one_of(
        &format!("{l}.a_eff"),
        &[
            ("a_eff_m2", f.a_eff_m2, 1.0),
            ("a_eff_um2", f.a_eff_um2, 1e-12),
        ],
        errs,
    );
    let fam = ModalFamily {
        label: l,
        d: [
            f.d1_rad_per_s,
            f.d2_rad_per_s,
            f.d3_rad_per_s,
            f.d4_rad_per_s,
            f.d5_rad_per_s,
        ],
        f0,
        q_total: f.q_total,
        intrinsic_fraction: f.intrinsic_fraction,
        a_eff,
        n_eff: f.n_eff,
        eta: f.eta_rad_per_s,
        g0: f.g0,
    };
    if let Some(fsr) = f.fsr_ghz {
        let computed = fam.fsr_hz() / 1e9;
        if !((computed - fsr).abs() <= DERIVED_TOL * fsr.abs()) {
            errs.push(format!(
                "{l}.fsr_ghz: {fsr} disagrees with d1/2π = {computed}"
            ));
        }
    }
    if let (Some(lam), true) = (f.lambda0_nm, f0.is_finite()) {
        let computed = fam.lambda0_m() * 1e9;
        if !((computed - lam).abs() <= DERIVED_TOL * lam.abs()) {
            errs.push(format!(
                "{l}.lambda0_nm: {lam} disagrees with c/f0 = {computed}"
            ));
        }
    }
    fam
}

fn family_to_file(f: &ModalFamily) -> FamilyFile {
    FamilyFile {
        label: f.label,
        d1_rad_per_s: f.d[0],
        d2_rad_per_s: f.d[1],
        d3_rad_per_s: f.d[2],
        d4_rad_per_s: f.d[3],
        d5_rad_per_s: f.d[4],
        fsr_ghz: None,
        f0_hz: Some(f.f0),
        f0_ghz: None,
        f0_thz: None,
        lambda0_nm: None,
        a_eff_m2: Some(f.a_eff),
        a_eff_um2: None,
        n_eff: f.n_eff,
        eta_rad_per_s: f.eta,
        g0: f.g0,
        q_total: f.q_total,
        intrinsic_fraction: f.intrinsic_fraction,
    }
}

fn geometry_from_file(g: &GeometryFile, errs: &mut Vec<String>) -> Geometry {
    let mut len =
        |name: &str, um: Option<f64>, m: Option<f64>, um_key: &str, m_key: &str, scale: f64| {
            optional_one_of(
                &format!("geometry.{name}"),
                &[(um_key, um, scale), (m_key, m, 1.0)],
                errs,
            )
        };
    Geometry {
        ww: len(
            "waveguide_width",
            g.waveguide_width_um,
            g.waveguide_width_m,
            "waveguide_width_um",
            "waveguide_width_m",
            1e-6,
        ),
        wh: len(
            "waveguide_height",
            g.waveguide_height_um,
            g.waveguide_height_m,
            "waveguide_height_um",
            "waveguide_height_m",
            1e-6,
        ),
        theta_deg: g.sidewall_angle_deg,
        cb: len(
            "cladding_bottom",
            g.cladding_bottom_um,
            g.cladding_bottom_m,
            "cladding_bottom_um",
            "cladding_bottom_m",
            1e-6,
        ),
        ch: len(
            "cladding_height",
            g.cladding_height_um,
            g.cladding_height_m,
            "cladding_height_um",
            "cladding_height_m",
            1e-6,
        ),
        cw: len(
            "cladding_width",
            g.cladding_width_um,
            g.cladding_width_m,
            "cladding_width_um",
            "cladding_width_m",
            1e-6,
        ),
        gap: len("gap", g.gap_nm, g.gap_m, "gap_nm", "gap_m", 1e-9),
    }
}

fn geometry_to_file(g: &Geometry) -> GeometryFile {
    GeometryFile {
        waveguide_width_m: Some(g.ww),
        waveguide_height_m: Some(g.wh),
        sidewall_angle_deg: g.theta_deg,
        cladding_bottom_m: Some(g.cb),
        cladding_height_m: Some(g.ch),
        cladding_width_m: Some(g.cw),
        gap_m: Some(g.gap),
        ..GeometryFile::default()
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<(RunSettings, ResonatorSpec)> {
    let file: ResonatorFile = serde_json::from_str(text).map_err(parse_error)?;
    let mut errs = Vec::new();
    let radius = one_of(
        "radius",
        &[
            ("radius_m", file.radius_m, 1.0),
            ("radius_um", file.radius_um, 1e-6),
        ],
        &mut errs,
    );
    let families: Vec<_> = file
        .families
        .iter()
        .map(|f| family_from_file(f, &mut errs))
        .collect();
    let geometry = geometry_from_file(&file.geometry, &mut errs);
    let spec = ResonatorSpec {
        radius,
        n2: file.n2_m2_per_w,
        n0: file.n0,
        families,
        geometry,
        truncation_order: file.truncation_order,
        drive_convention: file.drive_convention,
    };
    let settings = file.run.unwrap_or_default();
    errs.extend(spec.violations());
    errs.extend(settings.violations());
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    for fam in &spec.families {
        if let Ok(m) = eta_mismatch(fam, &spec) {
            if m > ETA_MISMATCH_WARN {
                log::warn!(
                    "{}: tabulated eta differs from the mode-volume estimate by {:.0}%",
                    fam.label,
                    100.0 * m
                );
            }
        }
    }
    Ok((settings, spec))
}

/// Serializes a resonator (and optional run settings) in SI-suffixed form.
pub fn to_json(spec: &ResonatorSpec, settings: Option<&RunSettings>) -> String {
    let file = ResonatorFile {
        radius_m: Some(spec.radius),
        radius_um: None,
        n2_m2_per_w: spec.n2,
        n0: spec.n0,
        truncation_order: spec.truncation_order,
        drive_convention: spec.drive_convention,
        geometry: geometry_to_file(&spec.geometry),
        families: spec.families.iter().map(family_to_file).collect(),
        run: settings.cloned(),
    };
    serde_json::to_string_pretty(&file).expect("config serialization is infallible")
}

/// Loads a configuration file.
pub fn load_config(path: &Path) -> Result<(RunConfig, ResonatorSpec)> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let (settings, spec) = parse_config(&text)?;
    Ok((
        RunConfig {
            resonator_path: Some(path.to_path_buf()),
            settings,
            ..RunConfig::default()
        },
        spec,
    ))
}

/// The shipped four-family resonator.
pub fn default_resonator() -> ResonatorSpec {
    parse_config(DEFAULT_RESONATOR_JSON)
        .expect("shipped resonator config is valid")
        .1
}

/// SHA-256 over the canonical serialization of everything that affects results.
/// Worker count and output location are excluded.
pub fn config_hash(spec: &ResonatorSpec, settings: &RunSettings) -> String {
    hex(&Sha256::digest(to_json(spec, Some(settings)).as_bytes()))
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Free spectral range in GHz as tabulated.
pub fn fsr_ghz(f: &ModalFamily) -> f64 {
    f.d[0] / (2.0 * PI) / 1e9
}

/// Zero-dispersion wavelength in nm.
pub fn lambda0_nm(f: &ModalFamily) -> f64 {
    C_LIGHT / f.f0 * 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_table_values() {
        let r = default_resonator();
        assert_eq!(r.families.len(), 4);
        let te00 = r.family(FamilyLabel::TE00).unwrap();
        assert!((fsr_ghz(te00) - 95.761_816_009_356_17).abs() <= 1e-9 * 95.76);
        assert_eq!(r.truncation_order.get(), 3);
        assert_eq!(r.drive_convention, DriveConvention::PhotonFlux);
        assert!((r.radius - 240e-6).abs() < 1e-18);
    }

    #[test]
    fn intrinsic_fraction_out_of_range_names_field() {
        let text = DEFAULT_RESONATOR_JSON.replacen(
            "\"intrinsic_fraction\": 0.45",
            "\"intrinsic_fraction\": 1.2",
            1,
        );
        match parse_config(&text) {
            Err(Error::Validation(v)) => {
                assert!(v.iter().any(|m| m.contains("intrinsic_fraction")), "{v:?}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn every_violation_is_listed() {
        let text = DEFAULT_RESONATOR_JSON
            .replacen(
                "\"intrinsic_fraction\": 0.45",
                "\"intrinsic_fraction\": 1.2",
                1,
            )
            .replacen("\"q_total\": 500000.0", "\"q_total\": -1.0", 1)
            .replacen("\"fsr_ghz\": 95.76181600935617", "\"fsr_ghz\": 96.0", 1);
        let Err(Error::Validation(v)) = parse_config(&text) else {
            panic!()
        };
        assert_eq!(v.len(), 3, "{v:?}");
        assert!(v.iter().any(|m| m.contains("fsr_ghz")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("q_total")), "{v:?}");
    }

    #[test]
    fn unknown_key_is_a_parse_error_with_location() {
        let text = DEFAULT_RESONATOR_JSON.replacen("\"n_eff\"", "\"n_efff\"", 1);
        match parse_config(&text) {
            Err(Error::Parse(msg)) => {
                assert!(msg.contains("n_efff") && msg.contains("line"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicated_unit_is_rejected() {
        let text = DEFAULT_RESONATOR_JSON.replacen(
            "\"radius_um\": 240.0",
            "\"radius_um\": 240.0, \"radius_m\": 2.4e-4",
            1,
        );
        let Err(Error::Validation(v)) = parse_config(&text) else {
            panic!()
        };
        assert!(v[0].contains("radius"));
    }

    #[test]
    fn round_trip_is_identity() {
        let (s1, r1) = parse_config(DEFAULT_RESONATOR_JSON).unwrap();
        let (s2, r2) = parse_config(&to_json(&r1, Some(&s1))).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(s1, s2);
        assert_eq!(to_json(&r1, Some(&s1)), to_json(&r2, Some(&s2)));
    }

    #[test]
    fn hash_tracks_physics_only() {
        let (s, r) = parse_config(DEFAULT_RESONATOR_JSON).unwrap();
        let h = config_hash(&r, &s);
        assert_eq!(h.len(), 64);
        assert_eq!(h, config_hash(&r, &s));
        let mut s2 = s.clone();
        s2.eps_ne = 2e-3;
        assert_ne!(h, config_hash(&r, &s2));
    }
}
