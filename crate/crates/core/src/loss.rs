//! Training loss terms: focal classification, IoU regression, BCE
//! centerness, and their sum normalized by the number of positives.

use crate::assign::AssignmentTarget;
use crate::error::{Error, Result};
use crate::geometry::{iou_aabb, iou_obb, Location3};
use crate::param::{decode_aabb, decode_obb, BoxDeltas, Mode};

/// Probability clamp applied before every logarithm.
pub const PROB_EPS: f64 = 1e-7;
pub const DEFAULT_GAMMA: f64 = 2.0;
pub const DEFAULT_ALPHA: f64 = 0.25;

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// Multi-binary focal loss at one location, summed over classes.
/// `true_label = None` marks background.
pub fn focal_loss(pred_probs: &[f64], true_label: Option<usize>, gamma: f64, alpha: f64) -> Result<f64> {
    if !(gamma >= 0.0) || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("focal gamma={gamma} alpha={alpha}")));
    }
    if let Some(label) = true_label {
        if label >= pred_probs.len() {
            return Err(Error::UnknownClass { label, num_classes: pred_probs.len() });
        }
    }
    let mut total = 0.0;
    for (k, &p) in pred_probs.iter().enumerate() {
        let p = clamp_prob(p);
        total += if Some(k) == true_label {
            -alpha * (1.0 - p).powf(gamma) * p.ln()
        } else {
            -(1.0 - alpha) * p.powf(gamma) * (1.0 - p).ln()
        };
    }
    Ok(total)
}

/// `1 − IoU` between the boxes decoded from `pred` and `target` at `loc`.
/// Rotated IoU for modes with an angle channel, axis-aligned otherwise.
pub fn iou_loss(pred: &BoxDeltas, target: &BoxDeltas, loc: &Location3, mode: Mode) -> Result<f64> {
    let iou = if mode.is_oriented() {
        iou_obb(&decode_obb(pred, loc, mode)?, &decode_obb(target, loc, mode)?)
    } else {
        if pred.mode != Mode::Aabb || target.mode != Mode::Aabb {
            return Err(Error::Misaligned("axis-aligned IoU loss needs aabb deltas".into()));
        }
        iou_aabb(&decode_aabb(pred, loc)?, &decode_aabb(target, loc)?)
    };
    Ok(1.0 - iou)
}

/// Analytic gradient of the axis-aligned IoU loss with respect to the six
/// predicted face distances (channels 7 and 8 are zero). Where a predicted
/// face coincides with a target face the one-sided slopes are averaged,
/// which is what a central difference sees.
pub fn iou_loss_aabb_gradient(pred: &BoxDeltas, target: &BoxDeltas, loc: &Location3) -> Result<[f64; 8]> {
    let p = decode_aabb(pred, loc)?;
    let t = decode_aabb(target, loc)?;
    let (pmin, pmax, tmin, tmax) = (p.min(), p.max(), t.min(), t.max());
    let pext = [p.w, p.l, p.h];
    let mut overlap = [0.0; 3];
    for k in 0..3 {
        overlap[k] = pmax[k].min(tmax[k]) - pmin[k].max(tmin[k]);
        if overlap[k] <= 0.0 {
            return Ok([0.0; 8]);
        }
    }
    let inter = overlap[0] * overlap[1] * overlap[2];
    let union = p.volume() + t.volume() - inter;

    // Fraction of a face move that changes the overlap.
    let active = |moving: f64, fixed: f64, outward_is_larger: bool| -> f64 {
        if moving == fixed {
            0.5
        } else if (moving < fixed) == outward_is_larger {
            1.0
        } else {
            0.0
        }
    };

    let mut grad = [0.0; 8];
    for k in 0..3 {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        let cross_overlap = overlap[a] * overlap[b];
        let cross_extent = pext[a] * pext[b];
        // δ(2k) moves the max face outward, δ(2k+1) moves the min face outward.
        let d_inter = [
            active(pmax[k], tmax[k], true) * cross_overlap,
            active(pmin[k], tmin[k], false) * cross_overlap,
        ];
        for (j, di) in d_inter.into_iter().enumerate() {
            let d_union = cross_extent - di;
            let d_iou = (di * union - inter * d_union) / (union * union);
            grad[2 * k + j] = -d_iou;
        }
    }
    Ok(grad)
}

pub fn centerness_loss(pred: f64, target: f64) -> f64 {
    let p = clamp_prob(pred);
    -target * p.ln() - (1.0 - target) * (1.0 - p).ln()
}

/// Central finite differences of `loss_fn` in each of the eight channels.
pub fn fd_gradient<F>(loss_fn: F, deltas: &BoxDeltas, step: f64) -> [f64; 8]
where
    F: Fn(&BoxDeltas) -> f64,
{
    let mut grad = [0.0; 8];
    for (k, g) in grad.iter_mut().enumerate() {
        let mut plus = *deltas;
        let mut minus = *deltas;
        plus.values[k] += step;
        minus.values[k] -= step;
        *g = (loss_fn(&plus) - loss_fn(&minus)) / (2.0 * step);
    }
    grad
}

/// Head outputs at one location.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationPrediction {
    pub class_probs: Vec<f64>,
    pub deltas: BoxDeltas,
    pub centerness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub cls: f64,
    pub reg: f64,
    pub cntr: f64,
    pub total: f64,
    pub n_pos: usize,
    /// Set when there are no positives; all terms are then reported as zero.
    pub empty: bool,
}

fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

/// Sum of the per-location losses divided by the number of positives.
/// `predictions[i]` must belong to `targets[i]`.
pub fn total_loss(
    predictions: &[LocationPrediction],
    targets: &[AssignmentTarget],
    gamma: f64,
    alpha: f64,
) -> Result<LossBreakdown> {
    if predictions.len() != targets.len() {
        return Err(Error::Misaligned(format!(
            "{} predictions for {} locations",
            predictions.len(),
            targets.len()
        )));
    }
    let mut cls = Vec::with_capacity(targets.len());
    let mut reg = Vec::new();
    let mut cntr = Vec::new();
    for (pred, target) in predictions.iter().zip(targets) {
        let label = target.foreground.map(|f| f.class_label);
        cls.push(focal_loss(&pred.class_probs, label, gamma, alpha)?);
        if let Some(fg) = target.foreground {
            reg.push(iou_loss(&pred.deltas, &fg.deltas, &target.location, fg.deltas.mode)?);
            cntr.push(centerness_loss(pred.centerness, fg.centerness));
        }
    }
    let n_pos = reg.len();
    if n_pos == 0 {
        return Ok(LossBreakdown { empty: true, ..Default::default() });
    }
    let norm = n_pos as f64;
    let (cls, reg, cntr) = (sorted_sum(cls) / norm, sorted_sum(reg) / norm, sorted_sum(cntr) / norm);
    Ok(LossBreakdown { cls, reg, cntr, total: cls + reg + cntr, n_pos, empty: false })
}
