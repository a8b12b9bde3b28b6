//! Multi-level location assignment.
//!
//! Each ground-truth box picks the last feature level on which it covers at
//! least `n_loc` locations (falling back to the first level), keeps the
//! `center_sample_k` covered locations nearest its center, and locations
//! claimed by several boxes go to the box of least volume.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{Location3, OrientedBox3};
use crate::grid::{SparseVoxelSet, Voxel};
use crate::param::{encode_obb, BoxDeltas, Mode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssignmentConfig {
    /// Minimum number of covered locations for a level to be eligible.
    pub n_loc: usize,
    /// Locations kept per box by center sampling.
    pub center_sample_k: usize,
}

impl Default for AssignmentConfig {
    fn default() -> Self {
        Self { n_loc: 27, center_sample_k: 18 }
    }
}

impl AssignmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_loc == 0 || self.center_sample_k == 0 {
            return Err(Error::InvalidParameter(format!(
                "n_loc and center_sample_k must be ≥ 1, got {} and {}",
                self.n_loc, self.center_sample_k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub bbox: OrientedBox3,
    pub class_label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Foreground {
    pub box_id: usize,
    pub class_label: usize,
    pub centerness: f64,
    pub deltas: BoxDeltas,
}

/// One head location. `foreground` is `None` for background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssignmentTarget {
    pub location: Location3,
    pub level: usize,
    pub voxel: Voxel,
    pub foreground: Option<Foreground>,
}

impl AssignmentTarget {
    pub fn is_foreground(&self) -> bool {
        self.foreground.is_some()
    }
}

/// Locations of `level_locs` strictly inside `bbox`, in voxel order.
pub fn covered_locations(bbox: &OrientedBox3, level_locs: &SparseVoxelSet) -> Vec<(Voxel, Location3)> {
    level_locs.locations().filter(|(_, loc)| bbox.contains_strict(loc)).collect()
}

pub fn select_level(bbox: &OrientedBox3, all_levels: &[SparseVoxelSet], cfg: &AssignmentConfig) -> usize {
    all_levels
        .iter()
        .enumerate()
        .rev()
        .find(|(_, set)| set.locations().filter(|(_, loc)| bbox.contains_strict(loc)).take(cfg.n_loc).count() >= cfg.n_loc)
        .map_or(0, |(i, _)| i)
}

/// The `k` covered locations nearest the box center; ties by voxel order.
fn center_sample(bbox: &OrientedBox3, covered: Vec<(Voxel, Location3)>, k: usize) -> Vec<(Voxel, Location3)> {
    let center = bbox.center();
    let mut ranked: Vec<(f64, Voxel, Location3)> =
        covered.into_iter().map(|(v, loc)| (loc.distance_squared(&center), v, loc)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    ranked.truncate(k);
    ranked.into_iter().map(|(_, v, loc)| (v, loc)).collect()
}

/// Assign every location of every level to a ground-truth box or background.
///
/// Targets are returned level by level in voxel order.
pub fn assign(
    gts: &[GroundTruth],
    all_levels: &[SparseVoxelSet],
    cfg: &AssignmentConfig,
    mode: Mode,
) -> Result<Vec<AssignmentTarget>> {
    cfg.validate()?;
    if all_levels.is_empty() {
        return Err(Error::InvalidParameter("at least one feature level is required".into()));
    }
    for gt in gts {
        gt.bbox.validate()?;
    }

    // (level, voxel) -> winning box index
    let mut claims: BTreeMap<(usize, Voxel), usize> = BTreeMap::new();
    for (id, gt) in gts.iter().enumerate() {
        let level = select_level(&gt.bbox, all_levels, cfg);
        let covered = covered_locations(&gt.bbox, &all_levels[level]);
        for (voxel, _) in center_sample(&gt.bbox, covered, cfg.center_sample_k) {
            claims
                .entry((level, voxel))
                .and_modify(|cur| {
                    if gt.bbox.volume() < gts[*cur].bbox.volume() {
                        *cur = id;
                    }
                })
                .or_insert(id);
        }
    }

    let mut targets = Vec::with_capacity(all_levels.iter().map(SparseVoxelSet::len).sum());
    for (level, set) in all_levels.iter().enumerate() {
        for (voxel, location) in set.locations() {
            let foreground = match claims.get(&(level, voxel)) {
                Some(&box_id) => {
                    let gt = &gts[box_id];
                    Some(Foreground {
                        box_id,
                        class_label: gt.class_label,
                        centerness: gt.bbox.centerness_at(&location),
                        deltas: encode_obb(&gt.bbox, &location, mode)?,
                    })
                }
                None => None,
            };
            targets.push(AssignmentTarget { location, level, voxel, foreground });
        }
    }
    Ok(targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::iou_obb;
    use crate::grid::{level_locations, LevelSpec};
    use crate::param::decode_obb;

    fn grid4() -> SparseVoxelSet {
        let mut v = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    v.push([i, j, k]);
                }
            }
        }
        SparseVoxelSet::from_voxels(1.0, v)
    }

    fn aabb(x: f64, y: f64, z: f64, w: f64, l: f64, h: f64) -> OrientedBox3 {
        OrientedBox3::new(x, y, z, w, l, h, 0.0).unwrap()
    }

    #[test]
    fn covered_examples() {
        let g = grid4();
        assert_eq!(covered_locations(&aabb(2.0, 2.0, 2.0, 10.0, 10.0, 10.0), &g).len(), 64);
        assert!(covered_locations(&aabb(20.0, 2.0, 2.0, 1.0, 1.0, 1.0), &g).is_empty());
        // x in (0, 2): columns 0 and 1.
        assert_eq!(covered_locations(&aabb(1.0, 2.0, 2.0, 2.0, 4.0, 4.0), &g).len(), 32);
    }

    #[test]
    fn level_selection_branches() {
        let spec = LevelSpec::new(0.01, 4, 1).unwrap();
        let base: Vec<Voxel> = (0..64).flat_map(|i| (0..64).flat_map(move |j| (0..64).map(move |k| [i, j, k]))).collect();
        let base = SparseVoxelSet::from_voxels(0.01, base);
        let levels: Vec<_> = (0..4).map(|l| level_locations(&base, &spec, l).unwrap()).collect();
        let cfg = AssignmentConfig::default();

        let huge = aabb(0.32, 0.32, 0.32, 10.0, 10.0, 10.0);
        // Level 3 has 64/32 = 2 voxels per axis, 8 locations < 27.
        assert_eq!(select_level(&huge, &levels, &cfg), 2);
        let tiny = aabb(0.3, 0.3, 0.3, 0.01, 0.01, 0.01);
        assert_eq!(select_level(&tiny, &levels, &cfg), 0);
        // 0.26 m cube covers 6³ locations on level 0, 4³ on level 1, 2³ on level 2.
        let mid = aabb(0.32, 0.32, 0.32, 0.26, 0.26, 0.26);
        let counts: Vec<usize> = levels.iter().map(|l| covered_locations(&mid, l).len()).collect();
        let expected = counts.iter().rposition(|&c| c >= 27).unwrap_or(0);
        assert_eq!(select_level(&mid, &levels, &cfg), expected);
        assert_eq!(expected, 1, "{counts:?}");
    }

    #[test]
    fn center_sampling_keeps_k() {
        let g = grid4();
        let gts = [GroundTruth { bbox: aabb(2.0, 2.0, 2.0, 4.5, 4.5, 4.5), class_label: 3 }];
        let targets = assign(&gts, &[g], &AssignmentConfig::default(), Mode::Aabb).unwrap();
        assert_eq!(targets.len(), 64);
        let fg: Vec<_> = targets.iter().filter_map(|t| t.foreground.map(|f| (t, f))).collect();
        assert_eq!(fg.len(), 18);
        for (t, f) in fg {
            assert_eq!((f.box_id, f.class_label), (0, 3));
            assert!(f.centerness > 0.0);
            let back = decode_obb(&f.deltas, &t.location, Mode::Aabb).unwrap();
            assert!(iou_obb(&back, &gts[0].bbox) > 1.0 - 1e-9);
        }
    }

    #[test]
    fn nested_boxes_go_to_smaller() {
        let g = SparseVoxelSet::from_voxels(1.0, [[0, 0, 0]]);
        let big = GroundTruth { bbox: aabb(0.5, 0.5, 0.5, 4.0, 4.0, 4.0), class_label: 0 };
        let small = GroundTruth { bbox: aabb(0.5, 0.5, 0.5, 1.0, 1.0, 1.0), class_label: 1 };
        let cfg = AssignmentConfig { n_loc: 1, center_sample_k: 18 };
        for gts in [[big, small], [small, big]] {
            let t = assign(&gts, std::slice::from_ref(&g), &cfg, Mode::Mobius).unwrap();
            assert_eq!(t[0].foreground.unwrap().class_label, 1);
        }
    }

    #[test]
    fn no_boxes_all_background() {
        let t = assign(&[], &[grid4()], &AssignmentConfig::default(), Mode::Mobius).unwrap();
        assert_eq!(t.len(), 64);
        assert!(t.iter().all(|t| !t.is_foreground()));
    }

    #[test]
    fn config_and_level_errors() {
        let bad = AssignmentConfig { n_loc: 0, center_sample_k: 1 };
        assert!(assign(&[], &[grid4()], &bad, Mode::Mobius).is_err());
        assert!(assign(&[], &[], &AssignmentConfig::default(), Mode::Mobius).is_err());
    }
}
