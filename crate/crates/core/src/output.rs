//! Deterministic CSV, SVG and JSON emission plus the run manifest.
//!
//! Every artifact is built in memory first. A [`Bundle`] maps file names to
//! bytes; writing it also writes `manifest.json` with one SHA-256 per file.
//! Wall-clock times go to a separate `timings.json` so identical runs keep
//! byte-identical manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::error::Result;
use crate::model::DriveConvention;
use crate::phases::{Phase, SweepGrid};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";

/// Header plus rows of already formatted cells. Cells must not contain commas.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip decimal; `NaN` and infinities as `nan`, `inf`, `-inf`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

/// Column name of the amplitude axis for a drive convention.
pub fn a_pin_column(convention: DriveConvention) -> &'static str {
    match convention {
        DriveConvention::PlaneWave => "a_pin_v_per_m",
        DriveConvention::PhotonFlux => "a_pin_sqrt_per_s",
    }
}

pub fn phase_csv(grid: &SweepGrid, convention: DriveConvention) -> CsvTable {
    let mut t = CsvTable::new([
        "delta_p0_hz",
        a_pin_column(convention),
        "phase",
        "c_min",
        "n_branches",
        "max_eig_re_norm",
        "error",
    ]);
    for p in &grid.points {
        t.push(vec![
            num(p.delta_p0),
            num(p.a_pin),
            p.phase.as_str().into(),
            num(p.c_min),
            p.n_branches.to_string(),
            num(p.max_eig_re),
            p.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        ]);
    }
    t
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Blue (most entangled) to pale yellow (least).
fn bucket_color(k: usize, n: usize) -> String {
    let t = if n <= 1 {
        0.0
    } else {
        k as f64 / (n - 1) as f64
    };
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(49.0, 255.0),
        lerp(54.0, 237.0),
        lerp(149.0, 160.0)
    )
}

const NE_COLOR: &str = "#b8e6b0";

fn svg_open(w: f64, h: f64, title: &str, config_hash: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<metadata><config-hash>{config_hash}</config-hash></metadata>"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, esc(title));
    s
}

/// Bucketed `C_min` heat map. Rows are detunings (bottom to top), columns
/// amplitudes. MI cells are hatched; NE cells get their own color.
/// `buckets` are ascending edges; a value `c` falls in the first bucket with
/// `c < edge`.
pub fn heatmap_svg(
    grid: &SweepGrid,
    buckets: &[f64],
    eps_ne: f64,
    config_hash: &str,
    title: &str,
) -> String {
    let (nd, na) = (grid.deltas.len(), grid.amplitudes.len());
    let cell = (480.0 / na.max(nd) as f64).clamp(2.0, 24.0);
    let (left, top) = (70.0, 30.0);
    let (pw, ph) = (cell * na as f64, cell * nd as f64);
    let legend_w = 150.0;
    let mut s = svg_open(left + pw + legend_w, top + ph + 50.0, title, config_hash);
    s.push_str(concat!(
        r##"<defs><pattern id="mi" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">"##,
        r##"<rect width="6" height="6" fill="#d9d9d9"/><line x1="0" y1="0" x2="0" y2="6" stroke="#555" stroke-width="2"/>"##,
        "</pattern></defs>\n"
    ));
    let _ = writeln!(s, r#"<text x="{left}" y="18">{}</text>"#, esc(title));
    let nb = buckets.len() + 1;
    for i in 0..nd {
        for j in 0..na {
            let p = grid.get(i, j);
            let fill = match p.phase {
                Phase::MI => "url(#mi)".to_string(),
                Phase::NE => NE_COLOR.to_string(),
                Phase::ET => {
                    let k = buckets
                        .iter()
                        .position(|&e| p.c_min < e)
                        .unwrap_or(buckets.len());
                    bucket_color(k, nb)
                }
            };
            let x = left + cell * j as f64;
            let y = top + cell * (nd - 1 - i) as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" data-phase="{}"/>"#,
                p.phase.as_str()
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let fmt_axis = |v: f64| format!("{v:.3e}");
    let (x0, x1) = (grid.amplitudes[0], grid.amplitudes[na - 1]);
    let (y0, y1) = (grid.deltas[0] / 1e9, grid.deltas[nd - 1] / 1e9);
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="{}">{}</text>"#,
        top + ph + 14.0,
        fmt_axis(x0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        left + pw,
        top + ph + 14.0,
        fmt_axis(x1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">a_pin</text>"#,
        left + pw / 2.0,
        top + ph + 32.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{y0:.3}</text>"#,
        left - 4.0,
        top + ph
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{y1:.3}</text>"#,
        left - 4.0,
        top + 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">delta_p0 (GHz)</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    let lx = left + pw + 16.0;
    let mut ly = top;
    let mut entry = |s: &mut String, fill: &str, label: String| {
        let _ = writeln!(
            s,
            r##"<rect x="{lx}" y="{ly}" width="14" height="12" fill="{fill}" stroke="#333"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            ly + 10.0,
            esc(&label)
        );
        ly += 16.0;
    };
    for k in 0..nb {
        let label = match k {
            0 => format!("c < {}", buckets[0]),
            k if k == buckets.len() => format!("c >= {}", buckets[k - 1]),
            k => format!("{} <= c < {}", buckets[k - 1], buckets[k]),
        };
        entry(&mut s, &bucket_color(k, nb), label);
    }
    entry(&mut s, NE_COLOR, format!("NE (c >= -{eps_ne})"));
    entry(&mut s, "url(#mi)", "MI".into());
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const SERIES_COLORS: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];

/// Polyline plot with linear axes. Non-finite points break the line.
pub fn line_plot_svg(
    series: &[Series],
    x_label: &str,
    y_label: &str,
    config_hash: &str,
    title: &str,
) -> String {
    let finite = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in finite {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    if !xmin.is_finite() {
        (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
    }
    if xmax == xmin {
        xmax = xmin + 1.0;
    }
    if ymax == ymin {
        ymax = ymin + 1.0;
    }
    let (left, top, pw, ph) = (80.0, 30.0, 480.0, 300.0);
    let mut s = svg_open(left + pw + 160.0, top + ph + 50.0, title, config_hash);
    let _ = writeln!(s, r#"<text x="{left}" y="18">{}</text>"#, esc(title));
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let px = |x: f64| left + pw * (x - xmin) / (xmax - xmin);
    let py = |y: f64| top + ph * (1.0 - (y - ymin) / (ymax - ymin));
    for (k, ser) in series.iter().enumerate() {
        let color = SERIES_COLORS[k % SERIES_COLORS.len()];
        let mut runs: Vec<Vec<String>> = vec![Vec::new()];
        for &(x, y) in &ser.points {
            if x.is_finite() && y.is_finite() {
                runs.last_mut()
                    .unwrap()
                    .push(format!("{:.2},{:.2}", px(x), py(y)));
            } else if !runs.last().unwrap().is_empty() {
                runs.push(Vec::new());
            }
        }
        for r in runs.iter().filter(|r| !r.is_empty()) {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                r.join(" ")
            );
        }
        let ly = top + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/>"#,
            left + pw + 12.0,
            ly + 6.0,
            left + pw + 30.0,
            ly + 6.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            left + pw + 36.0,
            ly + 10.0,
            esc(&ser.name)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="{}">{xmin:.4e}</text>"#,
        top + ph + 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{xmax:.4e}</text>"#,
        left + pw,
        top + ph + 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        top + ph + 32.0,
        esc(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{ymin:.4e}</text>"#,
        left - 4.0,
        top + ph
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{ymax:.4e}</text>"#,
        left - 4.0,
        top + 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        esc(y_label)
    );
    s.push_str("</svg>\n");
    s
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub artifact_version: String,
    pub command: String,
    /// File name to SHA-256.
    pub checksums: BTreeMap<String, String>,
    /// Cells or items whose computation failed.
    pub failures: usize,
}

/// Named in-memory artifacts of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bundle {
    pub files: BTreeMap<String, Vec<u8>>,
    pub failures: usize,
}

impl Bundle {
    pub fn add(&mut self, name: impl Into<String>, content: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), content.into());
    }

    pub fn merge(&mut self, other: Bundle) {
        self.files.extend(other.files);
        self.failures += other.failures;
    }

    pub fn manifest(&self, config_hash: &str, command: &str) -> RunManifest {
        RunManifest {
            config_hash: config_hash.into(),
            artifact_version: ARTIFACT_VERSION.into(),
            command: command.into(),
            checksums: self
                .files
                .iter()
                .map(|(k, v)| (k.clone(), sha256_hex(v)))
                .collect(),
            failures: self.failures,
        }
    }

    /// Writes every file plus `manifest.json` into `dir` and returns the manifest path.
    pub fn write(&self, dir: &Path, config_hash: &str, command: &str) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, bytes)?;
        }
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, to_json_pretty(&self.manifest(config_hash, command)))?;
        Ok(path)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
}

pub fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}
