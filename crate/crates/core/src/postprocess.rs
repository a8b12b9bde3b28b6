//! Inference-time score shaping and rotated NMS.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{iou_obb, OrientedBox3};

pub const DEFAULT_NMS_IOU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub class_label: usize,
    pub score: f64,
    pub bbox: OrientedBox3,
}

/// Class probabilities scaled by the predicted centerness.
pub fn apply_centerness(class_probs: &[f64], centerness: f64) -> Vec<f64> {
    class_probs.iter().map(|p| p * centerness).collect()
}

fn by_score_desc(dets: &[Detection], idx: &mut [usize]) {
    idx.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score).then(a.cmp(&b)));
}

/// Indices of the detections kept by per-class greedy NMS, ordered by
/// score (descending) and then input position.
pub fn nms_rotated_indices(dets: &[Detection], iou_threshold: f64) -> Result<Vec<usize>> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!("NMS threshold {iou_threshold} not in (0, 1]")));
    }
    let mut per_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, d) in dets.iter().enumerate() {
        per_class.entry(d.class_label).or_default().push(i);
    }
    let mut kept = Vec::new();
    for mut group in per_class.into_values() {
        by_score_desc(dets, &mut group);
        let mut kept_here: Vec<usize> = Vec::new();
        for i in group {
            if kept_here.iter().all(|&k| iou_obb(&dets[k].bbox, &dets[i].bbox) < iou_threshold) {
                kept_here.push(i);
            }
        }
        kept.extend(kept_here);
    }
    by_score_desc(dets, &mut kept);
    Ok(kept)
}

pub fn nms_rotated(dets: &[Detection], iou_threshold: f64) -> Result<Vec<Detection>> {
    Ok(nms_rotated_indices(dets, iou_threshold)?.into_iter().map(|i| dets[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(class_label: usize, score: f64, x: f64) -> Detection {
        Detection { class_label, score, bbox: OrientedBox3::new(x, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0).unwrap() }
    }

    #[test]
    fn centerness_scaling() {
        assert_eq!(apply_centerness(&[0.8, 0.4], 1.0), vec![0.8, 0.4]);
        assert_eq!(apply_centerness(&[0.8, 0.4], 0.0), vec![0.0, 0.0]);
        assert_eq!(apply_centerness(&[0.8, 0.4], 0.5), vec![0.4, 0.2]);
    }

    #[test]
    fn identical_boxes_keep_best() {
        let kept = nms_rotated(&[det(0, 0.8, 0.0), det(0, 0.9, 0.0)], 0.5).unwrap();
        assert_eq!(kept, vec![det(0, 0.9, 0.0)]);
    }

    #[test]
    fn disjoint_and_cross_class_kept() {
        let dets = [det(0, 0.5, 0.0), det(0, 0.7, 5.0), det(1, 0.6, 0.0)];
        let kept = nms_rotated(&dets, 0.5).unwrap();
        assert_eq!(kept, vec![dets[1], dets[2], dets[0]]);
    }

    #[test]
    fn chain_keeps_first_and_last() {
        // Unit cubes along x: offset d gives IoU (1-d)/(1+d).
        // IoU 0.6 at d = 0.25; A–C at d = 0.5 gives 1/3.
        let a = det(0, 0.9, 0.0);
        let b = det(0, 0.8, 0.25);
        let c = det(0, 0.7, 0.5);
        assert!((iou_obb(&a.bbox, &b.bbox) - 0.6).abs() < 1e-12);
        assert!(iou_obb(&a.bbox, &c.bbox) < 0.5);
        assert_eq!(nms_rotated(&[c, b, a], 0.5).unwrap(), vec![a, c]);
    }

    #[test]
    fn empty_and_bad_threshold() {
        assert!(nms_rotated(&[], 0.5).unwrap().is_empty());
        assert!(nms_rotated(&[], 0.0).is_err());
        assert!(nms_rotated(&[], 1.5).is_err());
    }

    #[test]
    fn equal_scores_keep_input_order() {
        let dets = [det(0, 0.5, 0.0), det(0, 0.5, 0.1)];
        assert_eq!(nms_rotated_indices(&dets, 0.5).unwrap(), vec![0]);
    }
}
