//! Project files and the commands that operate on them.
//!
//! A project is a directory holding a `project.toml` plus the two traced KML
//! views it references. Commands are thin orchestration over the library:
//! load, validate, build, export, report. All of them are deterministic;
//! running the same command twice on the same inputs produces identical
//! bytes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{GeoPoint, LocalFrame};
use crate::kml_io::{
    subdivision_from_kml, write_collada, write_kml_extruded, write_kml_model, Rgba,
};
use crate::mesh::{export_obj, is_watertight, mesh_volume};
use crate::solids::{build_model, clip_subdivision_to_strip, GeoModel};
use crate::wireframe::{bounding_box, validate_subdivision, BoundingBox, PlanarSubdivision, Plane};

/// Overrides `[output] dir` when set; the CLI documents it.
pub const OUTPUT_DIR_ENV: &str = "MASSIF_OUTPUT_DIR";

pub const PROJECT_FILE: &str = "project.toml";
pub const MODEL_FILE: &str = "model.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_JSON_FILE: &str = "report.json";

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub frame: FrameConfig,
    pub inputs: InputsConfig,
    pub altitudes: AltitudesConfig,
    #[serde(default)]
    pub intervals: IntervalsConfig,
    /// Diffuse RGBA per profile layer, keyed by placemark name.
    #[serde(default)]
    pub palette: BTreeMap<String, Rgba>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    pub lat: f64,
    pub lon: f64,
    pub alt: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsConfig {
    pub plan: String,
    pub profile: String,
    /// Added to every profile x coordinate, to line the two views up.
    #[serde(default)]
    pub profile_x_offset: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AltitudesConfig {
    /// Top of the modeled volume, metres above sea level.
    pub max_alt: f64,
    /// Ground level at the site.
    pub terrain_alt: f64,
    /// How far below the terrain the model extends.
    #[serde(default)]
    pub underground_pad: f64,
}

/// Optional direct control over the sweep intervals; normally both are
/// derived (plan from the altitude strip, profile from the plan's extent).
#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalsConfig {
    pub plan: Option<[f64; 2]>,
    pub profile: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".to_string() }
    }
}

/// A parsed project plus the directory its relative paths resolve against.
#[derive(Clone, Debug)]
pub struct Project {
    pub config: ProjectConfig,
    pub dir: PathBuf,
}

impl Project {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: ProjectConfig = toml::from_str(&text)
            .map_err(|e| Error::Project(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(Project { config, dir })
    }

    pub fn origin(&self) -> Result<GeoPoint> {
        let f = self.config.frame;
        GeoPoint::new(f.lat, f.lon, f.alt)
    }

    fn input_path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    /// Output directory, honoring [`OUTPUT_DIR_ENV`].
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir_with(std::env::var_os(OUTPUT_DIR_ENV))
    }

    fn output_dir_with(&self, env_override: Option<OsString>) -> PathBuf {
        match env_override {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.dir.join(&self.config.output.dir),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellReport {
    pub mass_id: u32,
    pub mass: String,
    pub layer_id: u32,
    pub layer: String,
    pub volume_m3: f64,
    pub watertight: bool,
    pub vertices: usize,
    pub triangles: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuildReport {
    pub origin: GeoPoint,
    pub bounds: BoundingBox,
    pub cells: Vec<CellReport>,
    pub total_volume_m3: f64,
    pub warnings: Vec<String>,
}

/// Everything a build produces, kept in memory so export and report can
/// reuse it without re-reading files.
pub struct Built {
    pub model: GeoModel,
    pub report: BuildReport,
    pub plan: PlanarSubdivision,
    /// Profile subdivision after clipping to the altitude strip.
    pub profile: PlanarSubdivision,
    pub plan_interval: (f64, f64),
    pub profile_interval: (f64, f64),
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_views(project: &Project) -> Result<(LocalFrame, PlanarSubdivision, PlanarSubdivision)> {
    let frame = LocalFrame::new(project.origin()?)?;
    let plan_text = read_input(&project.input_path(&project.config.inputs.plan))?;
    let plan = subdivision_from_kml(&plan_text, &frame, Plane::PlanXY)?;
    let profile_text = read_input(&project.input_path(&project.config.inputs.profile))?;
    let mut profile = subdivision_from_kml(&profile_text, &frame, Plane::ProfileXZ)?;
    let offset = project.config.inputs.profile_x_offset;
    if offset != 0.0 {
        for unit in &mut profile.units {
            for p in &mut unit.polygon {
                p.u += offset;
            }
        }
    }
    Ok((frame, plan, profile))
}

/// The altitude strip in frame coordinates: from `terrain - pad` up to
/// `max_alt`, both relative to the frame origin's altitude.
fn altitude_strip(project: &Project) -> Result<(f64, f64)> {
    let a = project.config.altitudes;
    if !(a.max_alt.is_finite() && a.terrain_alt.is_finite() && a.underground_pad.is_finite()) {
        return Err(Error::InvalidCoordinate("altitudes must be finite".to_string()));
    }
    if a.underground_pad < 0.0 {
        return Err(Error::InvalidCoordinate(format!(
            "underground_pad must not be negative, got {}",
            a.underground_pad
        )));
    }
    let origin_alt = project.config.frame.alt;
    let lo = a.terrain_alt - a.underground_pad - origin_alt;
    let hi = a.max_alt - origin_alt;
    if lo >= hi {
        return Err(Error::InvertedInterval { lo, hi });
    }
    Ok((lo, hi))
}

fn check_override(interval: [f64; 2]) -> Result<(f64, f64)> {
    let [lo, hi] = interval;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidCoordinate("interval bounds must be finite".to_string()));
    }
    if lo >= hi {
        return Err(Error::InvertedInterval { lo, hi });
    }
    Ok((lo, hi))
}

fn extent_v(s: &PlanarSubdivision) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for unit in &s.units {
        for p in &unit.polygon {
            lo = lo.min(p.v);
            hi = hi.max(p.v);
        }
    }
    (lo < hi).then_some((lo, hi))
}

/// Map palette entries from layer names to layer ids; unmatched names warn.
fn resolve_palette(
    palette: &BTreeMap<String, Rgba>,
    profile: &PlanarSubdivision,
) -> (BTreeMap<u32, Rgba>, Vec<String>) {
    let mut by_id = BTreeMap::new();
    let mut warnings = Vec::new();
    for (name, &color) in palette {
        match profile.units.iter().find(|u| &u.name == name) {
            Some(u) => {
                by_id.insert(u.id, color);
            }
            None => warnings.push(format!("palette entry '{name}' matches no profile layer")),
        }
    }
    (by_id, warnings)
}

/// Run the full pipeline in memory: parse, clip, intersect, measure.
pub fn run_build(project: &Project) -> Result<Built> {
    let (frame, plan, profile) = load_views(project)?;
    let mut warnings = Vec::new();

    let strip = altitude_strip(project)?;
    let (clipped_profile, clip_warnings) =
        clip_subdivision_to_strip(&profile, strip.0, strip.1)?;
    warnings.extend(clip_warnings);

    let plan_interval = match project.config.intervals.plan {
        Some(iv) => check_override(iv)?,
        None => strip,
    };
    let profile_interval = match project.config.intervals.profile {
        Some(iv) => check_override(iv)?,
        None => extent_v(&plan).ok_or_else(|| {
            Error::InvalidPolygon("plan subdivision has no area to sweep across".to_string())
        })?,
    };

    let (model, build_warnings) =
        build_model(frame, &plan, &clipped_profile, plan_interval, profile_interval)?;
    warnings.extend(build_warnings);

    let mass_names: BTreeMap<u32, &str> =
        plan.units.iter().map(|u| (u.id, u.name.as_str())).collect();
    let layer_names: BTreeMap<u32, &str> =
        profile.units.iter().map(|u| (u.id, u.name.as_str())).collect();

    let mut cells = Vec::with_capacity(model.cells.len());
    let mut total = 0.0;
    for cell in &model.cells {
        let (mass_id, layer_id) = cell.tag.unwrap_or((0, 0));
        let volume = mesh_volume(cell)?;
        total += volume;
        cells.push(CellReport {
            mass_id,
            mass: mass_names.get(&mass_id).unwrap_or(&"?").to_string(),
            layer_id,
            layer: layer_names.get(&layer_id).unwrap_or(&"?").to_string(),
            volume_m3: volume,
            watertight: is_watertight(cell).watertight,
            vertices: cell.vertices.len(),
            triangles: cell.triangles.len(),
        });
    }

    // report the designed box: horizontal extents from the traces, vertical
    // span from the altitude strip (exact, unlike the quantized mesh)
    let mut bounds = bounding_box(&plan, &clipped_profile)?;
    bounds.height = plan_interval.1 - plan_interval.0;

    let report = BuildReport {
        origin: project.origin()?,
        bounds,
        cells,
        total_volume_m3: total,
        warnings,
    };
    Ok(Built {
        model,
        report,
        plan,
        profile: clipped_profile,
        plan_interval,
        profile_interval,
    })
}

/// Human-readable build summary: an aligned table, one row per cell.
pub fn render_report(report: &BuildReport) -> String {
    let mut s = String::new();
    let o = report.origin;
    let _ = writeln!(s, "origin: lat {:.6}, lon {:.6}, alt {:.1} m", o.lat, o.lon, o.alt);
    let _ = writeln!(
        s,
        "box: {:.1} x {:.1} x {:.1} m",
        report.bounds.length, report.bounds.width, report.bounds.height
    );
    let _ = writeln!(s, "cells: {}", report.cells.len());
    let name_w = report
        .cells
        .iter()
        .map(|c| c.mass.len() + 3 + c.layer.len())
        .max()
        .unwrap_or(0);
    for c in &report.cells {
        let name = format!("{} / {}", c.mass, c.layer);
        let seal = if c.watertight { "" } else { "  NOT WATERTIGHT" };
        let _ = writeln!(
            s,
            "  {name:<name_w$}  {:>16.6} m3  ({} vertices, {} triangles){seal}",
            c.volume_m3, c.vertices, c.triangles
        );
    }
    let _ = writeln!(s, "total: {:.6} m3", report.total_volume_m3);
    if !report.warnings.is_empty() {
        let _ = writeln!(s, "warnings: {}", report.warnings.len());
        for w in &report.warnings {
            let _ = writeln!(s, "  {w}");
        }
    }
    s
}

fn write_output(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Scaffold a new project directory with the bundled sample data. Refuses
/// to clobber an existing project unless `force` is set.
pub fn cmd_init(target: &Path, force: bool) -> Result<Vec<PathBuf>> {
    if target.is_file() {
        return Err(Error::Project(format!(
            "{} is a file; init needs a directory",
            target.display()
        )));
    }
    let project_file = target.join(PROJECT_FILE);
    if project_file.exists() && !force {
        return Err(Error::Project(format!(
            "{} already exists; pass force to overwrite",
            project_file.display()
        )));
    }
    fs::create_dir_all(target).map_err(|e| Error::io(target, e))?;
    let files: [(&str, &str); 3] = [
        (PROJECT_FILE, include_str!("../sample/project.toml")),
        ("plan.kml", include_str!("../sample/plan.kml")),
        ("profile.kml", include_str!("../sample/profile.kml")),
    ];
    let mut written = Vec::new();
    for (name, text) in files {
        written.push(write_output(target, name, text.as_bytes())?);
    }
    Ok(written)
}

/// Check the project without building: inputs parse, rings are usable,
/// altitudes make sense. Returns warnings for anything the build would
/// repair or drop on its own.
pub fn cmd_validate(project_path: &Path) -> Result<Vec<String>> {
    let project = Project::load(project_path)?;
    let (_, plan, profile) = load_views(&project)?;
    let mut warnings = Vec::new();
    let mut blocking = Vec::new();
    for (label, s) in [("plan", &plan), ("profile", &profile)] {
        for d in validate_subdivision(s) {
            if d.auto_fixable {
                warnings.push(format!("{label} {d} (repaired automatically on build)"));
            } else {
                blocking.push((label, d));
            }
        }
    }
    if !blocking.is_empty() {
        let diagnostics = blocking.into_iter().map(|(_, d)| d).collect();
        return Err(Error::SubdivisionInvalid { diagnostics });
    }
    let strip = altitude_strip(&project)?;
    let (_, clip_warnings) = clip_subdivision_to_strip(&profile, strip.0, strip.1)?;
    warnings.extend(clip_warnings);
    let (_, palette_warnings) = resolve_palette(&project.config.palette, &profile);
    warnings.extend(palette_warnings);
    Ok(warnings)
}

fn to_json_file<T: serde::Serialize>(value: &T, what: &str) -> Result<String> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Project(format!("{what} serialization failed: {e}")))?;
    Ok(format!("{json}\n"))
}

/// Build and persist: writes the report (text and JSON) and the model to the
/// output directory, returns the report.
pub fn cmd_build(project_path: &Path) -> Result<BuildReport> {
    let project = Project::load(project_path)?;
    let built = run_build(&project)?;
    let out = project.output_dir();
    write_output(&out, REPORT_TEXT_FILE, render_report(&built.report).as_bytes())?;
    write_output(&out, REPORT_JSON_FILE, to_json_file(&built.report, "report")?.as_bytes())?;
    write_output(&out, MODEL_FILE, to_json_file(&built.model, "model")?.as_bytes())?;
    Ok(built.report)
}

/// The model a previous build persisted; exports work from this, not from a
/// fresh build, so what lands in Google Earth is what the report described.
fn load_built_model(out_dir: &Path) -> Result<GeoModel> {
    let path = out_dir.join(MODEL_FILE);
    if !path.is_file() {
        return Err(Error::Project(format!(
            "no built model at {}; run build first",
            path.display()
        )));
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Project(format!("{}: {e}", path.display())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Obj,
    Kml,
    Dae,
    KmlExtruded,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "obj" => Ok(ExportFormat::Obj),
            "kml" => Ok(ExportFormat::Kml),
            "dae" => Ok(ExportFormat::Dae),
            "kml-extruded" => Ok(ExportFormat::KmlExtruded),
            other => Err(Error::Project(format!(
                "unknown export format '{other}' (expected obj, kml, dae or kml-extruded)"
            ))),
        }
    }
}

/// Palette keyed by layer id, resolved by re-reading the profile view.
fn palette_for(project: &Project) -> Result<(BTreeMap<u32, Rgba>, Vec<String>)> {
    let (_, _, profile) = load_views(project)?;
    Ok(resolve_palette(&project.config.palette, &profile))
}

/// Export the model persisted by a previous build. `kml` writes both the
/// KML wrapper and the COLLADA mesh it references, so the pair works as a
/// unit; `kml-extruded` re-reads the plan view because the flat footprints
/// are not part of the model.
pub fn cmd_export(project_path: &Path, format: ExportFormat) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let project = Project::load(project_path)?;
    let out = project.output_dir();
    let model = load_built_model(&out)?;
    let mut written = Vec::new();
    let mut warnings = Vec::new();
    match format {
        ExportFormat::Obj => {
            written.push(write_output(&out, "model.obj", export_obj(&model.cells).as_bytes())?);
        }
        ExportFormat::Dae => {
            let (palette, w) = palette_for(&project)?;
            warnings.extend(w);
            let (dae, w) = write_collada(&model, &palette);
            warnings.extend(w);
            written.push(write_output(&out, "model.dae", dae.as_bytes())?);
        }
        ExportFormat::Kml => {
            let (palette, w) = palette_for(&project)?;
            warnings.extend(w);
            let (dae, w) = write_collada(&model, &palette);
            warnings.extend(w);
            written.push(write_output(&out, "model.dae", dae.as_bytes())?);
            let (kml, w) = write_kml_model(&model, "model.dae");
            warnings.extend(w);
            written.push(write_output(&out, "model.kml", kml.as_bytes())?);
        }
        ExportFormat::KmlExtruded => {
            let (frame, plan, _) = load_views(&project)?;
            let kml = write_kml_extruded(&plan, &frame, project.config.altitudes.max_alt)?;
            written.push(write_output(&out, "extruded.kml", kml.as_bytes())?);
        }
    }
    Ok((written, warnings))
}

/// Format the report persisted by a previous build; `machine` returns the
/// JSON file verbatim.
pub fn cmd_report(project_path: &Path, machine: bool) -> Result<String> {
    let project = Project::load(project_path)?;
    let out = project.output_dir();
    let path = out.join(REPORT_JSON_FILE);
    if !path.is_file() {
        return Err(Error::Project(format!(
            "no build report at {}; run build first",
            path.display()
        )));
    }
    let json = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    if machine {
        return Ok(json);
    }
    let report: BuildReport = serde_json::from_str(&json)
        .map_err(|e| Error::Project(format!("{}: {e}", path.display())))?;
    Ok(render_report(&report))
}
