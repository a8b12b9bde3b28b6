//! mAP evaluation at IoU thresholds 0.25 and 0.5.
//!
//! Detections of a class are pooled over all scenes, ranked by score and
//! greedily matched to ground truth of the same scene. AP is the area under
//! the precision envelope (all-point interpolation). Classes without ground
//! truth are left out of the mean.

mod scene;

pub use scene::{generate_scene, Scene, SceneSpec};

use std::collections::BTreeMap;

use crate::assign::GroundTruth;
use crate::error::{Error, Result};
use crate::geometry::{iou_aabb, iou_obb, AxisAlignedBox3, OrientedBox3};
use crate::postprocess::Detection;

pub const DEFAULT_THRESHOLDS: [f64; 2] = [0.25, 0.5];

fn box_iou(a: &OrientedBox3, b: &OrientedBox3, rotated: bool) -> f64 {
    if rotated {
        iou_obb(a, b)
    } else {
        let aa = AxisAlignedBox3 { x: a.x, y: a.y, z: a.z, w: a.w, l: a.l, h: a.h };
        let bb = AxisAlignedBox3 { x: b.x, y: b.y, z: b.z, w: b.w, l: b.l, h: b.h };
        iou_aabb(&aa, &bb)
    }
}

/// True-positive flags for detections of one scene, which must already be
/// sorted by descending score. Each detection takes the unmatched
/// same-class ground truth of highest IoU if that IoU reaches the threshold.
pub fn match_detections(dets: &[Detection], gts: &[GroundTruth], iou_threshold: f64, rotated: bool) -> Vec<bool> {
    let mut matched = vec![false; gts.len()];
    dets.iter().map(|d| match_one(d, gts, &mut matched, iou_threshold, rotated)).collect()
}

fn match_one(d: &Detection, gts: &[GroundTruth], matched: &mut [bool], thr: f64, rotated: bool) -> bool {
    let mut best: Option<(usize, f64)> = None;
    for (j, g) in gts.iter().enumerate() {
        if matched[j] || g.class_label != d.class_label {
            continue;
        }
        let iou = box_iou(&d.bbox, &g.bbox, rotated);
        if best.is_none_or(|(_, b)| iou > b) {
            best = Some((j, iou));
        }
    }
    match best {
        Some((j, iou)) if iou >= thr => {
            matched[j] = true;
            true
        }
        _ => false,
    }
}

/// Precision/recall points in ranked order (ties keep input order).
pub fn pr_curve(tp: &[bool], scores: &[f64], n_gt: usize) -> Vec<(f64, f64)> {
    let mut order: Vec<usize> = (0..tp.len().min(scores.len())).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let (mut ctp, mut cfp) = (0usize, 0usize);
    order
        .into_iter()
        .map(|i| {
            if tp[i] {
                ctp += 1;
            } else {
                cfp += 1;
            }
            (ctp as f64 / n_gt.max(1) as f64, ctp as f64 / (ctp + cfp) as f64)
        })
        .collect()
}

/// All-point interpolated AP; `None` when there is no ground truth.
pub fn average_precision(tp: &[bool], scores: &[f64], n_gt: usize) -> Option<f64> {
    if n_gt == 0 {
        return None;
    }
    let curve = pr_curve(tp, scores, n_gt);
    let mut recall = Vec::with_capacity(curve.len() + 2);
    let mut precision = Vec::with_capacity(curve.len() + 2);
    recall.push(0.0);
    precision.push(0.0);
    for (r, p) in curve {
        recall.push(r);
        precision.push(p);
    }
    recall.push(1.0);
    precision.push(0.0);
    for i in (0..precision.len() - 1).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let ap = (1..recall.len()).map(|i| (recall[i] - recall[i - 1]) * precision[i]).sum::<f64>();
    Some(ap.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub n_gt: usize,
    pub n_det: usize,
    /// AP per threshold, aligned with [`EvalReport::thresholds`].
    pub ap: Vec<f64>,
    /// PR curve per threshold.
    pub pr: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub thresholds: Vec<f64>,
    pub per_class: BTreeMap<usize, ClassReport>,
    /// Mean AP per threshold over classes with at least one ground truth.
    pub map: Vec<f64>,
}

impl EvalReport {
    pub fn map_at(&self, threshold: f64) -> Option<f64> {
        self.thresholds.iter().position(|&t| t == threshold).map(|i| self.map[i])
    }
}

/// Evaluate per-scene detections against per-scene ground truth.
/// Labels must be below `num_classes`.
pub fn evaluate(
    dets: &[Vec<Detection>],
    gts: &[Vec<GroundTruth>],
    thresholds: &[f64],
    rotated: bool,
    num_classes: usize,
) -> Result<EvalReport> {
    if dets.len() != gts.len() {
        return Err(Error::Misaligned(format!("{} detection scenes vs {} ground-truth scenes", dets.len(), gts.len())));
    }
    if let Some(&t) = thresholds.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(Error::InvalidParameter(format!("IoU threshold {t} not in (0, 1]")));
    }
    let check = |label: usize| {
        if label >= num_classes {
            Err(Error::UnknownClass { label, num_classes })
        } else {
            Ok(())
        }
    };
    for d in dets.iter().flatten() {
        check(d.class_label)?;
    }
    for g in gts.iter().flatten() {
        check(g.class_label)?;
    }

    let mut per_class = BTreeMap::new();
    for class in 0..num_classes {
        let scene_gts: Vec<Vec<GroundTruth>> =
            gts.iter().map(|s| s.iter().filter(|g| g.class_label == class).copied().collect()).collect();
        let n_gt: usize = scene_gts.iter().map(Vec::len).sum();

        // (scene, detection) pooled and ranked globally.
        let mut pooled: Vec<(usize, Detection)> = dets
            .iter()
            .enumerate()
            .flat_map(|(s, ds)| ds.iter().filter(|d| d.class_label == class).map(move |d| (s, *d)))
            .collect();
        pooled.sort_by(|a, b| b.1.score.total_cmp(&a.1.score));
        let scores: Vec<f64> = pooled.iter().map(|(_, d)| d.score).collect();

        let mut ap = Vec::with_capacity(thresholds.len());
        let mut pr = Vec::with_capacity(thresholds.len());
        for &thr in thresholds {
            let mut matched: Vec<Vec<bool>> = scene_gts.iter().map(|g| vec![false; g.len()]).collect();
            let tp: Vec<bool> =
                pooled.iter().map(|(s, d)| match_one(d, &scene_gts[*s], &mut matched[*s], thr, rotated)).collect();
            ap.push(average_precision(&tp, &scores, n_gt).unwrap_or(0.0));
            pr.push(pr_curve(&tp, &scores, n_gt));
        }
        if n_gt > 0 || !pooled.is_empty() {
            per_class.insert(class, ClassReport { n_gt, n_det: pooled.len(), ap, pr });
        }
    }

    let scored: Vec<&ClassReport> = per_class.values().filter(|c| c.n_gt > 0).collect();
    let map = (0..thresholds.len())
        .map(|i| {
            if scored.is_empty() {
                0.0
            } else {
                scored.iter().map(|c| c.ap[i]).sum::<f64>() / scored.len() as f64
            }
        })
        .collect();
    Ok(EvalReport { thresholds: thresholds.to_vec(), per_class, map })
}
