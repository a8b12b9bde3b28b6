//! Sparse voxel sets: voxelization, per-level downsampling and top-k pruning.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::geometry::Location3;

pub type Voxel = [i64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Point {
    pub fn location(&self) -> Location3 {
        Location3::new(self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Feature-level layout. Level `i` has voxels of
/// `base_voxel_size · 2^(i + log2(first_stride) + 2)`, so a 0.01 m input with
/// stride 2 yields 0.08, 0.16, 0.32, 0.64 m and 0.05 m with stride 1 yields
/// 0.2, 0.4, 0.8, 1.6 m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSpec {
    pub base_voxel_size: f64,
    pub num_levels: usize,
    pub first_stride: u32,
}

impl Default for LevelSpec {
    fn default() -> Self {
        Self { base_voxel_size: 0.01, num_levels: 4, first_stride: 2 }
    }
}

impl LevelSpec {
    pub fn new(base_voxel_size: f64, num_levels: usize, first_stride: u32) -> Result<Self> {
        let spec = Self { base_voxel_size, num_levels, first_stride };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_voxel_size > 0.0) || !self.base_voxel_size.is_finite() {
            return Err(Error::InvalidParameter(format!("base voxel size {} must be positive", self.base_voxel_size)));
        }
        if self.num_levels == 0 {
            return Err(Error::InvalidParameter("at least one feature level is required".into()));
        }
        if !matches!(self.first_stride, 1 | 2) {
            return Err(Error::InvalidParameter(format!("first stride must be 1 or 2, got {}", self.first_stride)));
        }
        Ok(())
    }

    pub fn stride_exponent(&self) -> u32 {
        self.first_stride.trailing_zeros() + 2
    }

    /// log2 of the level's voxel size in base voxels.
    pub fn level_shift(&self, level: usize) -> u32 {
        level as u32 + self.stride_exponent()
    }

    pub fn level_voxel_size(&self, level: usize) -> f64 {
        self.base_voxel_size * f64::from(1u32 << self.level_shift(level))
    }
}

/// Occupied voxels at one resolution, optionally carrying per-voxel scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVoxelSet {
    /// Feature level, `None` for the input voxelization.
    pub level: Option<usize>,
    /// log2 of the voxel edge in base voxels.
    pub shift: u32,
    pub voxel_size: f64,
    pub voxels: BTreeSet<Voxel>,
    pub scores: Option<BTreeMap<Voxel, f64>>,
}

impl SparseVoxelSet {
    pub fn from_voxels(voxel_size: f64, voxels: impl IntoIterator<Item = Voxel>) -> Self {
        Self { level: None, shift: 0, voxel_size, voxels: voxels.into_iter().collect(), scores: None }
    }

    pub fn with_scores(mut self, scores: BTreeMap<Voxel, f64>) -> Self {
        self.scores = Some(scores);
        self
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    /// World coordinate of a voxel center.
    pub fn location(&self, v: &Voxel) -> Location3 {
        let s = self.voxel_size;
        Location3::new((v[0] as f64 + 0.5) * s, (v[1] as f64 + 0.5) * s, (v[2] as f64 + 0.5) * s)
    }

    /// Voxels with their center locations, in lexicographic voxel order.
    pub fn locations(&self) -> impl Iterator<Item = (Voxel, Location3)> + '_ {
        self.voxels.iter().map(|v| (*v, self.location(v)))
    }

    /// Halve the resolution `times` times, merging voxels by floor division.
    /// Merged voxels keep the maximum score.
    pub fn downsample(&self, times: u32) -> SparseVoxelSet {
        let coarse = |v: &Voxel| v.map(|c| c >> times);
        let voxels = self.voxels.iter().map(coarse).collect();
        let scores = self.scores.as_ref().map(|m| {
            let mut out: BTreeMap<Voxel, f64> = BTreeMap::new();
            for (v, &s) in m {
                out.entry(coarse(v)).and_modify(|e| *e = e.max(s)).or_insert(s);
            }
            out
        });
        SparseVoxelSet {
            level: self.level,
            shift: self.shift + times,
            voxel_size: self.voxel_size * f64::from(1u32 << times),
            voxels,
            scores,
        }
    }
}

pub fn voxelize(cloud: &PointCloud, voxel_size: f64) -> Result<SparseVoxelSet> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if !(voxel_size > 0.0) || !voxel_size.is_finite() {
        return Err(Error::InvalidParameter(format!("voxel size {voxel_size} must be positive")));
    }
    let mut voxels = BTreeSet::new();
    for p in &cloud.points {
        if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite point ({}, {}, {})", p.x, p.y, p.z)));
        }
        voxels.insert([p.x, p.y, p.z].map(|c| (c / voxel_size).floor() as i64));
    }
    Ok(SparseVoxelSet::from_voxels(voxel_size, voxels))
}

/// Head locations of feature level `level`, derived from a finer set.
pub fn level_locations(set: &SparseVoxelSet, spec: &LevelSpec, level: usize) -> Result<SparseVoxelSet> {
    spec.validate()?;
    if level >= spec.num_levels {
        return Err(Error::InvalidParameter(format!("level {level} out of range (num_levels {})", spec.num_levels)));
    }
    let target = spec.level_shift(level);
    if set.shift > target {
        return Err(Error::InvalidParameter(format!(
            "cannot upsample a set of shift {} to level {level} (shift {target})",
            set.shift
        )));
    }
    let mut out = set.downsample(target - set.shift);
    out.level = Some(level);
    out.voxel_size = spec.level_voxel_size(level);
    Ok(out)
}

/// Keep the `n_vox` highest-scoring voxels; ties go to the lexicographically
/// smaller coordinate.
pub fn prune_topk(set: &SparseVoxelSet, n_vox: usize) -> Result<SparseVoxelSet> {
    if n_vox == 0 {
        return Err(Error::InvalidParameter("n_vox must be positive".into()));
    }
    let scores = set.scores.as_ref();
    let mut ranked = Vec::with_capacity(set.len());
    for v in &set.voxels {
        let s = scores.and_then(|m| m.get(v)).copied().ok_or(Error::MissingScore(*v))?;
        ranked.push((*v, s));
    }
    if ranked.len() <= n_vox {
        return Ok(set.clone());
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(n_vox);
    Ok(SparseVoxelSet {
        voxels: ranked.iter().map(|(v, _)| *v).collect(),
        scores: Some(ranked.into_iter().collect()),
        ..set.clone()
    })
}
