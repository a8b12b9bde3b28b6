//! Whitespace-separated text formats.
//!
//! * point cloud: `x y z r g b`
//! * ground truth: `scene_id class_id x y z w l h theta`
//! * detections: `scene_id class_id score x y z w l h theta`
//! * assignment targets:
//!   `scene_id level ix iy iz x y z class_id box_id centerness mode d1 .. d8`
//!
//! Blank lines and lines starting with `#` are ignored. Errors carry the
//! 1-based line number.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::assign::{AssignmentTarget, GroundTruth};
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::geometry::{Location3, OrientedBox3};
use crate::grid::{Point, PointCloud, Voxel};
use crate::param::{BoxDeltas, Mode};
use crate::postprocess::Detection;

/// How floats are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Fixed number of decimals.
    Fixed(usize),
    /// Shortest representation that parses back to the same `f64`.
    Exact,
}

impl Default for Precision {
    fn default() -> Self {
        Precision::Fixed(6)
    }
}

pub fn fmt_f64(v: f64, precision: Precision) -> String {
    match precision {
        Precision::Fixed(n) => format!("{v:.n$}"),
        Precision::Exact => format!("{v:?}"),
    }
}

fn join(values: &[f64], precision: Precision) -> String {
    values.iter().map(|v| fmt_f64(*v, precision)).collect::<Vec<_>>().join(" ")
}

/// Non-comment lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn expect_fields(line: usize, fields: &[&str], n: usize, what: &str) -> Result<()> {
    if fields.len() != n {
        return Err(parse_err(line, format!("{what} record needs {n} fields, found {}", fields.len())));
    }
    Ok(())
}

fn num(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| parse_err(line, format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("'{s}' is not finite")));
    }
    Ok(v)
}

fn int<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| parse_err(line, format!("'{s}' is not an integer")))
}

fn boxed(line: usize, fields: &[&str]) -> Result<OrientedBox3> {
    let mut v = [0.0; 7];
    for (dst, s) in v.iter_mut().zip(fields) {
        *dst = num(line, s)?;
    }
    OrientedBox3::from_array(v).map_err(|e| parse_err(line, e.to_string()))
}

/// Parse a comma-separated list of numbers, e.g. a `--location` flag.
pub fn parse_csv(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| num(0, t.trim())).collect()
}

pub fn parse_point_cloud(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (line, f) in records(text) {
        expect_fields(line, &f, 6, "point")?;
        points.push(Point {
            x: num(line, f[0])?,
            y: num(line, f[1])?,
            z: num(line, f[2])?,
            r: num(line, f[3])?,
            g: num(line, f[4])?,
            b: num(line, f[5])?,
        });
    }
    Ok(PointCloud::new(points))
}

pub fn format_point_cloud(cloud: &PointCloud, precision: Precision) -> String {
    let mut out = String::new();
    for p in &cloud.points {
        writeln!(out, "{}", join(&[p.x, p.y, p.z, p.r, p.g, p.b], precision)).unwrap();
    }
    out
}

/// A box record: `x y z w l h theta`.
pub fn parse_boxes(text: &str) -> Result<Vec<OrientedBox3>> {
    records(text)
        .map(|(line, f)| {
            expect_fields(line, &f, 7, "box")?;
            boxed(line, &f)
        })
        .collect()
}

pub fn format_box(b: &OrientedBox3, precision: Precision) -> String {
    join(&b.to_array(), precision)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtRecord {
    pub scene: String,
    pub gt: GroundTruth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetRecord {
    pub scene: String,
    pub det: Detection,
}

pub fn parse_gt(text: &str) -> Result<Vec<GtRecord>> {
    records(text)
        .map(|(line, f)| {
            expect_fields(line, &f, 9, "ground-truth")?;
            let gt = GroundTruth { class_label: int(line, f[1])?, bbox: boxed(line, &f[2..])? };
            Ok(GtRecord { scene: f[0].to_string(), gt })
        })
        .collect()
}

pub fn format_gt(records: &[GtRecord], precision: Precision) -> String {
    let mut out = String::from("# scene_id class_id x y z w l h theta\n");
    for r in records {
        writeln!(out, "{} {} {}", r.scene, r.gt.class_label, format_box(&r.gt.bbox, precision)).unwrap();
    }
    out
}

pub fn parse_detections(text: &str) -> Result<Vec<DetRecord>> {
    records(text)
        .map(|(line, f)| {
            expect_fields(line, &f, 10, "detection")?;
            let score = num(line, f[2])?;
            if !(0.0..=1.0).contains(&score) {
                return Err(parse_err(line, format!("score {score} outside [0, 1]")));
            }
            let det = Detection { class_label: int(line, f[1])?, score, bbox: boxed(line, &f[3..])? };
            Ok(DetRecord { scene: f[0].to_string(), det })
        })
        .collect()
}

pub fn format_detections(records: &[DetRecord], precision: Precision) -> String {
    let mut out = String::from("# scene_id class_id score x y z w l h theta\n");
    for r in records {
        let d = &r.det;
        writeln!(out, "{} {} {} {}", r.scene, d.class_label, fmt_f64(d.score, precision), format_box(&d.bbox, precision))
            .unwrap();
    }
    out
}

/// A foreground assignment target as written by `assign`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetRecord {
    pub scene: String,
    pub level: usize,
    pub voxel: Voxel,
    pub location: Location3,
    pub class_label: usize,
    pub box_id: usize,
    pub centerness: f64,
    pub deltas: BoxDeltas,
}

impl TargetRecord {
    /// Foreground targets of an assignment; background locations are dropped.
    pub fn from_targets(scene: &str, targets: &[AssignmentTarget]) -> Vec<TargetRecord> {
        targets
            .iter()
            .filter_map(|t| {
                t.foreground.map(|f| TargetRecord {
                    scene: scene.to_string(),
                    level: t.level,
                    voxel: t.voxel,
                    location: t.location,
                    class_label: f.class_label,
                    box_id: f.box_id,
                    centerness: f.centerness,
                    deltas: f.deltas,
                })
            })
            .collect()
    }
}

pub fn format_targets(records: &[TargetRecord], precision: Precision) -> String {
    let mut out = String::from("# scene_id level ix iy iz x y z class_id box_id centerness mode d1 d2 d3 d4 d5 d6 d7 d8\n");
    for r in records {
        let [ix, iy, iz] = r.voxel;
        let loc = [r.location.x, r.location.y, r.location.z];
        writeln!(
            out,
            "{} {} {ix} {iy} {iz} {} {} {} {} {} {}",
            r.scene,
            r.level,
            join(&loc, precision),
            r.class_label,
            r.box_id,
            fmt_f64(r.centerness, precision),
            r.deltas.mode,
            join(&r.deltas.values, precision)
        )
        .unwrap();
    }
    out
}

pub fn parse_targets(text: &str) -> Result<Vec<TargetRecord>> {
    records(text)
        .map(|(line, f)| {
            expect_fields(line, &f, 20, "target")?;
            let mode: Mode = f[11].parse().map_err(|e: Error| parse_err(line, e.to_string()))?;
            let mut values = [0.0; 8];
            for (dst, s) in values.iter_mut().zip(&f[12..]) {
                *dst = num(line, s)?;
            }
            Ok(TargetRecord {
                scene: f[0].to_string(),
                level: int(line, f[1])?,
                voxel: [int(line, f[2])?, int(line, f[3])?, int(line, f[4])?],
                location: Location3::new(num(line, f[5])?, num(line, f[6])?, num(line, f[7])?),
                class_label: int(line, f[8])?,
                box_id: int(line, f[9])?,
                centerness: num(line, f[10])?,
                deltas: BoxDeltas { mode, values },
            })
        })
        .collect()
}

/// Group records by scene id, scenes in sorted order.
pub fn by_scene<T, F>(items: impl IntoIterator<Item = T>, scene_of: F) -> BTreeMap<String, Vec<T>>
where
    F: Fn(&T) -> &str,
{
    let mut out: BTreeMap<String, Vec<T>> = BTreeMap::new();
    for item in items {
        out.entry(scene_of(&item).to_string()).or_default().push(item);
    }
    out
}

pub fn format_report(report: &EvalReport) -> String {
    let mut out = String::new();
    let thresholds = report.thresholds.iter().map(|t| t.to_string()).collect::<Vec<_>>();
    writeln!(out, "# thresholds {}", thresholds.join(" ")).unwrap();
    for (class, c) in &report.per_class {
        write!(out, "class {class} n_gt {} n_det {}", c.n_gt, c.n_det).unwrap();
        for (t, ap) in thresholds.iter().zip(&c.ap) {
            write!(out, " ap@{t} {ap:.4}").unwrap();
        }
        out.push('\n');
    }
    let summary: Vec<String> = thresholds.iter().zip(&report.map).map(|(t, m)| format!("mAP@{t} {m:.4}")).collect();
    writeln!(out, "{}", summary.join(", ")).unwrap();
    out
}

pub fn format_pr_curve(curve: &[(f64, f64)]) -> String {
    let mut out = String::from("# recall precision\n");
    for (r, p) in curve {
        writeln!(out, "{r:.6} {p:.6}").unwrap();
    }
    out
}
