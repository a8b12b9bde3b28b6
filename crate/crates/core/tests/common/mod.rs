//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use sparsedet_core::geometry::{iou_obb, OrientedBox3};
use sparsedet_core::grid::{SparseVoxelSet, Voxel};
use sparsedet_core::{AssignmentConfig, Detection, GroundTruth};
use rand::Rng;

pub fn random_box(rng: &mut impl Rng, span: f64, min: f64, max: f64) -> OrientedBox3 {
    OrientedBox3::new(
        rng.random_range(-span..span),
        rng.random_range(-span..span),
        rng.random_range(-span..span),
        rng.random_range(min..max),
        rng.random_range(min..max),
        rng.random_range(min..max),
        rng.random_range(-7.0..7.0),
    )
    .unwrap()
}

/// Uniform point strictly inside `b` (shrunk by `margin` of each half extent).
pub fn point_inside(rng: &mut impl Rng, b: &OrientedBox3, margin: f64) -> sparsedet_core::Location3 {
    let k = 0.5 * (1.0 - margin);
    let u = rng.random_range(-k..k) * b.w;
    let v = rng.random_range(-k..k) * b.l;
    let t = rng.random_range(-k..k) * b.h;
    let (s, c) = b.theta.sin_cos();
    sparsedet_core::Location3::new(b.x + c * u - s * v, b.y + s * u + c * v, b.z + t)
}

struct Solid {
    cx: f64,
    cy: f64,
    cz: f64,
    cos: f64,
    sin: f64,
    hw: f64,
    hl: f64,
    hh: f64,
}

impl Solid {
    fn new(b: &OrientedBox3) -> Self {
        let (sin, cos) = b.theta.sin_cos();
        Solid { cx: b.x, cy: b.y, cz: b.z, cos, sin, hw: b.w / 2.0, hl: b.l / 2.0, hh: b.h / 2.0 }
    }

    #[inline]
    fn contains(&self, x: f64, y: f64, z: f64) -> bool {
        let (dx, dy) = (x - self.cx, y - self.cy);
        let u = self.cos * dx + self.sin * dy;
        let v = -self.sin * dx + self.cos * dy;
        u.abs() <= self.hw && v.abs() <= self.hl && (z - self.cz).abs() <= self.hh
    }

    fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let ex = self.hw * self.cos.abs() + self.hl * self.sin.abs();
        let ey = self.hw * self.sin.abs() + self.hl * self.cos.abs();
        ([self.cx - ex, self.cy - ey, self.cz - self.hh], [self.cx + ex, self.cy + ey, self.cz + self.hh])
    }
}

/// Monte-Carlo IoU: uniform samples over the bounding box of the union.
pub fn monte_carlo_iou(a: &OrientedBox3, b: &OrientedBox3, samples: usize, rng: &mut impl Rng) -> f64 {
    let (sa, sb) = (Solid::new(a), Solid::new(b));
    let ((amin, amax), (bmin, bmax)) = (sa.bounds(), sb.bounds());
    let lo: Vec<f64> = (0..3).map(|k| amin[k].min(bmin[k])).collect();
    let hi: Vec<f64> = (0..3).map(|k| amax[k].max(bmax[k])).collect();
    let (mut both, mut either) = (0u64, 0u64);
    for _ in 0..samples {
        let x = rng.random_range(lo[0]..hi[0]);
        let y = rng.random_range(lo[1]..hi[1]);
        let z = rng.random_range(lo[2]..hi[2]);
        let (ia, ib) = (sa.contains(x, y, z), sb.contains(x, y, z));
        both += u64::from(ia && ib);
        either += u64::from(ia || ib);
    }
    if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    }
}

/// Naive NMS: full pairwise IoU matrix, forward suppression flags.
pub fn naive_nms(dets: &[Detection], thr: f64) -> BTreeSet<usize> {
    let n = dets.len();
    let mut iou = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if dets[i].class_label == dets[j].class_label {
                iou[i][j] = iou_obb(&dets[i].bbox, &dets[j].bbox);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    // Insertion sort: score descending, stable on index.
    for i in 1..n {
        let mut j = i;
        while j > 0 && dets[order[j - 1]].score < dets[order[j]].score {
            order.swap(j - 1, j);
            j -= 1;
        }
    }
    let mut suppressed = vec![false; n];
    let mut kept = BTreeSet::new();
    for (pos, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        kept.insert(i);
        for &j in &order[pos + 1..] {
            if dets[j].class_label == dets[i].class_label && iou[i][j] >= thr {
                suppressed[j] = true;
            }
        }
    }
    kept
}

fn inside_brute(b: &OrientedBox3, p: &sparsedet_core::Location3) -> bool {
    // Rotate the point into the box frame and compare with half extents.
    let (s, c) = b.theta.sin_cos();
    let (dx, dy, dz) = (p.x - b.x, p.y - b.y, p.z - b.z);
    let u = c * dx + s * dy;
    let v = -s * dx + c * dy;
    u.abs() < b.w / 2.0 && v.abs() < b.l / 2.0 && dz.abs() < b.h / 2.0
}

/// Reference assignment: (level, voxel) → box id, by full enumeration.
pub fn brute_force_assign(
    gts: &[GroundTruth],
    levels: &[SparseVoxelSet],
    cfg: &AssignmentConfig,
) -> (BTreeMap<(usize, Voxel), usize>, Vec<usize>) {
    let mut chosen_levels = Vec::new();
    // candidates[(level, voxel)] = boxes that picked this location
    let mut candidates: BTreeMap<(usize, Voxel), Vec<usize>> = BTreeMap::new();
    for (id, gt) in gts.iter().enumerate() {
        let counts: Vec<usize> = levels
            .iter()
            .map(|set| set.voxels.iter().filter(|v| inside_brute(&gt.bbox, &set.location(v))).count())
            .collect();
        let mut level = 0;
        for (l, &c) in counts.iter().enumerate() {
            if c >= cfg.n_loc {
                level = l;
            }
        }
        chosen_levels.push(level);
        let set = &levels[level];
        let mut ranked: Vec<(f64, Voxel)> = set
            .voxels
            .iter()
            .filter(|v| inside_brute(&gt.bbox, &set.location(v)))
            .map(|v| {
                let p = set.location(v);
                let d = (p.x - gt.bbox.x).powi(2) + (p.y - gt.bbox.y).powi(2) + (p.z - gt.bbox.z).powi(2);
                (d, *v)
            })
            .collect();
        ranked.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (_, v) in ranked.into_iter().take(cfg.center_sample_k) {
            candidates.entry((level, v)).or_default().push(id);
        }
    }
    let winners = candidates
        .into_iter()
        .map(|(key, ids)| {
            let best = *ids
                .iter()
                .min_by(|&&a, &&b| {
                    let (va, vb) = (gts[a].bbox.volume(), gts[b].bbox.volume());
                    va.partial_cmp(&vb).unwrap().then(a.cmp(&b))
                })
                .unwrap();
            (key, best)
        })
        .collect();
    (winners, chosen_levels)
}
