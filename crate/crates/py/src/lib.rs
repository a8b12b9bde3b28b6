//! Python module `sparsedet`. Boxes are 7-element sequences
//! `(x, y, z, w, l, h, theta)`, locations are `(x, y, z)`.
//! Core errors surface as `ValueError`.

use std::collections::BTreeMap;

use sparsedet_core as core;
use sparsedet_core::eval::{generate_scene, SceneSpec};
use sparsedet_core::postprocess::nms_rotated_indices;
use sparsedet_core::{
    AssignmentConfig, AxisAlignedBox3, BoxDeltas, Detection, GroundTruth, LevelSpec, Location3, Mode, OrientedBox3,
    Point, PointCloud,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

type Box7 = [f64; 7];

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn obb(b: Box7) -> PyResult<OrientedBox3> {
    OrientedBox3::from_array(b).map_err(err)
}

fn loc(l: [f64; 3]) -> Location3 {
    Location3::new(l[0], l[1], l[2])
}

fn mode(name: &str) -> PyResult<Mode> {
    name.parse().map_err(err)
}

fn deltas(m: Mode, v: &[f64]) -> PyResult<BoxDeltas> {
    let n = BoxDeltas { mode: m, values: [0.0; 8] }.len();
    if v.len() != n {
        return Err(err(format!("{m} deltas need {n} values, got {}", v.len())));
    }
    let mut values = [0.0; 8];
    values[..n].copy_from_slice(v);
    Ok(BoxDeltas { mode: m, values })
}

fn aabb(b: &OrientedBox3) -> PyResult<AxisAlignedBox3> {
    if b.theta != 0.0 {
        return Err(err("axis-aligned IoU needs theta = 0; pass rotated=True"));
    }
    AxisAlignedBox3::new(b.x, b.y, b.z, b.w, b.l, b.h).map_err(err)
}

/// IoU of two boxes.
#[pyfunction]
#[pyo3(signature = (a, b, rotated = true))]
fn iou(a: Box7, b: Box7, rotated: bool) -> PyResult<f64> {
    let (a, b) = (obb(a)?, obb(b)?);
    if rotated {
        Ok(core::iou_obb(&a, &b))
    } else {
        Ok(core::iou_aabb(&aabb(&a)?, &aabb(&b)?))
    }
}

/// Element-wise IoU of two equally long box lists.
#[pyfunction]
#[pyo3(signature = (a, b, rotated = true))]
fn iou_batch(a: Vec<Box7>, b: Vec<Box7>, rotated: bool) -> PyResult<Vec<f64>> {
    if a.len() != b.len() {
        return Err(err(format!("{} boxes vs {} boxes", a.len(), b.len())));
    }
    a.into_iter().zip(b).map(|(x, y)| iou(x, y, rotated)).collect()
}

/// Regression deltas of `bbox` at `location` (6, 7 or 8 values by mode).
#[pyfunction]
#[pyo3(signature = (bbox, location, mode = "mobius"))]
fn encode(bbox: Box7, location: [f64; 3], mode: &str) -> PyResult<Vec<f64>> {
    let d = core::encode_obb(&obb(bbox)?, &loc(location), self::mode(mode)?).map_err(err)?;
    Ok(d.values[..d.len()].to_vec())
}

#[pyfunction]
#[pyo3(signature = (deltas, location, mode = "mobius"))]
fn decode(deltas: Vec<f64>, location: [f64; 3], mode: &str) -> PyResult<Box7> {
    let m = self::mode(mode)?;
    let d = self::deltas(m, &deltas)?;
    Ok(core::decode_obb(&d, &loc(location), m).map_err(err)?.to_array())
}

/// Canonical representative of the box's equivalence class.
#[pyfunction]
fn canonicalize(bbox: Box7) -> PyResult<Box7> {
    Ok(core::canonicalize_obb(&obb(bbox)?).to_array())
}

/// Centerness of `location` in `bbox`; errors when outside.
#[pyfunction]
fn centerness(bbox: Box7, location: [f64; 3]) -> PyResult<f64> {
    let b = obb(bbox)?;
    let l = loc(location);
    if !b.contains(&l, 0.0) {
        return Err(err(core::Error::LocationOutsideBox { x: l.x, y: l.y, z: l.z }));
    }
    Ok(b.centerness_at(&l))
}

#[pyfunction]
#[pyo3(signature = (probs, label, gamma = core::loss::DEFAULT_GAMMA, alpha = core::loss::DEFAULT_ALPHA))]
fn focal_loss(probs: Vec<f64>, label: Option<usize>, gamma: f64, alpha: f64) -> PyResult<f64> {
    core::focal_loss(&probs, label, gamma, alpha).map_err(err)
}

/// Foreground targets as tuples
/// `(level, (ix, iy, iz), (x, y, z), class, box_id, centerness, deltas)`.
#[pyfunction]
#[pyo3(signature = (
    points, gt_boxes, gt_labels, mode = "mobius", voxel_size = 0.01, levels = 4,
    first_stride = 2, n_loc = 27, k = 18
))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn assign(
    points: Vec<[f64; 3]>,
    gt_boxes: Vec<Box7>,
    gt_labels: Vec<usize>,
    mode: &str,
    voxel_size: f64,
    levels: usize,
    first_stride: u32,
    n_loc: usize,
    k: usize,
) -> PyResult<Vec<(usize, [i64; 3], [f64; 3], usize, usize, f64, Vec<f64>)>> {
    if gt_boxes.len() != gt_labels.len() {
        return Err(err(format!("{} boxes vs {} labels", gt_boxes.len(), gt_labels.len())));
    }
    let m = self::mode(mode)?;
    let gts = gt_boxes
        .into_iter()
        .zip(gt_labels)
        .map(|(b, class_label)| Ok(GroundTruth { bbox: obb(b)?, class_label }))
        .collect::<PyResult<Vec<_>>>()?;
    let cloud = PointCloud::new(points.iter().map(|p| Point { x: p[0], y: p[1], z: p[2], r: 0.0, g: 0.0, b: 0.0 }).collect());
    let spec = LevelSpec::new(voxel_size, levels, first_stride).map_err(err)?;
    let base = core::voxelize(&cloud, voxel_size).map_err(err)?;
    let sets = (0..levels).map(|l| core::level_locations(&base, &spec, l)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let targets = core::assign(&gts, &sets, &AssignmentConfig { n_loc, center_sample_k: k }, m).map_err(err)?;
    Ok(targets
        .into_iter()
        .filter_map(|t| {
            let f = t.foreground?;
            let l = t.location;
            Some((t.level, t.voxel, [l.x, l.y, l.z], f.class_label, f.box_id, f.centerness, f.deltas.values[..f.deltas.len()].to_vec()))
        })
        .collect())
}

/// Indices kept by per-class greedy rotated NMS, highest score first.
#[pyfunction]
#[pyo3(signature = (boxes, scores, labels, iou_threshold = core::postprocess::DEFAULT_NMS_IOU))]
fn nms(boxes: Vec<Box7>, scores: Vec<f64>, labels: Vec<usize>, iou_threshold: f64) -> PyResult<Vec<usize>> {
    if boxes.len() != scores.len() || boxes.len() != labels.len() {
        return Err(err("boxes, scores and labels must have equal length"));
    }
    let dets = boxes
        .into_iter()
        .zip(scores)
        .zip(labels)
        .map(|((b, score), class_label)| Ok(Detection { class_label, score, bbox: obb(b)? }))
        .collect::<PyResult<Vec<_>>>()?;
    nms_rotated_indices(&dets, iou_threshold).map_err(err)
}

/// Per-scene detections `(label, score, box)` and ground truth `(label, box)`.
/// Returns `(map, {class: [ap per threshold]})`; classes without ground truth
/// are absent from the dict and from the mean.
#[pyfunction]
#[pyo3(signature = (dets, gts, num_classes, thresholds = vec![0.25, 0.5], rotated = true))]
#[allow(clippy::type_complexity)]
fn evaluate(
    dets: Vec<Vec<(usize, f64, Box7)>>,
    gts: Vec<Vec<(usize, Box7)>>,
    num_classes: usize,
    thresholds: Vec<f64>,
    rotated: bool,
) -> PyResult<(Vec<f64>, BTreeMap<usize, Vec<f64>>)> {
    let dets = dets
        .into_iter()
        .map(|s| s.into_iter().map(|(class_label, score, b)| Ok(Detection { class_label, score, bbox: obb(b)? })).collect())
        .collect::<PyResult<Vec<Vec<_>>>>()?;
    let gts = gts
        .into_iter()
        .map(|s| s.into_iter().map(|(class_label, b)| Ok(GroundTruth { class_label, bbox: obb(b)? })).collect())
        .collect::<PyResult<Vec<Vec<_>>>>()?;
    let report = core::evaluate(&dets, &gts, &thresholds, rotated, num_classes).map_err(err)?;
    let per_class = report.per_class.iter().filter(|(_, c)| c.n_gt > 0).map(|(k, c)| (*k, c.ap.clone())).collect();
    Ok((report.map, per_class))
}

/// Seeded synthetic scene: `(points, [(label, box)])` with `points` as `(x, y, z)`.
#[pyfunction]
#[pyo3(signature = (seed, num_boxes = 5, points_per_box = 2000, clutter_points = 2000, num_classes = 4, rotated = true))]
#[allow(clippy::type_complexity)]
fn scene(
    seed: u64,
    num_boxes: usize,
    points_per_box: usize,
    clutter_points: usize,
    num_classes: usize,
    rotated: bool,
) -> PyResult<(Vec<[f64; 3]>, Vec<(usize, Box7)>)> {
    let spec = SceneSpec { num_boxes, points_per_box, clutter_points, num_classes, rotated, ..SceneSpec::default() };
    let s = generate_scene(seed, &spec).map_err(err)?;
    let points = s.cloud.points.iter().map(|p| [p.x, p.y, p.z]).collect();
    let gts = s.gts.iter().map(|g| (g.class_label, g.bbox.to_array())).collect();
    Ok((points, gts))
}

#[pymodule]
fn sparsedet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(iou, m)?)?;
    m.add_function(wrap_pyfunction!(iou_batch, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(canonicalize, m)?)?;
    m.add_function(wrap_pyfunction!(centerness, m)?)?;
    m.add_function(wrap_pyfunction!(focal_loss, m)?)?;
    m.add_function(wrap_pyfunction!(assign, m)?)?;
    m.add_function(wrap_pyfunction!(nms, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(scene, m)?)?;
    Ok(())
}
