//! Seeded synthetic indoor scenes: boxes standing on the floor of a room,
//! points sampled uniformly on every box surface, plus floor clutter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assign::GroundTruth;
use crate::error::{Error, Result};
use crate::geometry::OrientedBox3;
use crate::grid::{Point, PointCloud};

const PLACEMENT_ATTEMPTS: usize = 1000;
/// Minimum gap between the circumscribed footprint circles of two boxes.
const BOX_GAP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    /// Room extent along x, y, z; the room spans `[0, extent]` on each axis.
    pub room: [f64; 3],
    pub num_classes: usize,
    pub num_boxes: usize,
    pub points_per_box: usize,
    pub clutter_points: usize,
    pub min_size: f64,
    pub max_size: f64,
    /// Random headings when set, axis-aligned boxes otherwise.
    pub rotated: bool,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            room: [6.0, 6.0, 3.0],
            num_classes: 4,
            num_boxes: 5,
            points_per_box: 2000,
            clutter_points: 2000,
            min_size: 0.4,
            max_size: 1.5,
            rotated: true,
        }
    }
}

impl SceneSpec {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleScene(msg));
        if self.room.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return bad(format!("room extent {:?} must be positive", self.room));
        }
        if !(self.min_size > 0.0) || !(self.max_size >= self.min_size) {
            return bad(format!("size range [{}, {}]", self.min_size, self.max_size));
        }
        // Any heading must fit: the footprint diagonal bounds the xy reach.
        let diag = self.max_size * std::f64::consts::SQRT_2;
        if diag > self.room[0].min(self.room[1]) || self.max_size > self.room[2] {
            return bad(format!("boxes up to {} m do not fit in room {:?}", self.max_size, self.room));
        }
        if self.num_boxes > 0 && self.num_classes == 0 {
            return bad("boxes requested with zero classes".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub cloud: PointCloud,
    pub gts: Vec<GroundTruth>,
}

pub fn generate_scene(seed: u64, spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [rx, ry, _] = spec.room;

    let mut gts: Vec<GroundTruth> = Vec::with_capacity(spec.num_boxes);
    for _ in 0..spec.num_boxes {
        let mut placed = None;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let w = rng.random_range(spec.min_size..=spec.max_size);
            let l = rng.random_range(spec.min_size..=spec.max_size);
            let h = rng.random_range(spec.min_size..=spec.max_size);
            let theta = if spec.rotated { rng.random_range(0.0..std::f64::consts::PI) } else { 0.0 };
            let r = w.hypot(l) / 2.0;
            let x = rng.random_range(r..=rx - r);
            let y = rng.random_range(r..=ry - r);
            let candidate = OrientedBox3::new(x, y, h / 2.0, w, l, h, theta)?;
            let clear = gts.iter().all(|g| {
                let rg = g.bbox.w.hypot(g.bbox.l) / 2.0;
                (g.bbox.x - x).hypot(g.bbox.y - y) >= r + rg + BOX_GAP
            });
            if clear {
                placed = Some(candidate);
                break;
            }
        }
        let bbox = placed.ok_or_else(|| {
            Error::InfeasibleScene(format!("could not place box {} without overlap", gts.len() + 1))
        })?;
        let class_label = rng.random_range(0..spec.num_classes);
        gts.push(GroundTruth { bbox, class_label });
    }

    let mut points = Vec::with_capacity(spec.num_boxes * spec.points_per_box + spec.clutter_points);
    for g in &gts {
        let shade = (g.class_label as f64 + 1.0) / (spec.num_classes as f64 + 1.0);
        for _ in 0..spec.points_per_box {
            let [x, y, z] = sample_surface(&g.bbox, &mut rng);
            points.push(Point { x, y, z, r: shade, g: 1.0 - shade, b: 0.5 });
        }
    }
    for _ in 0..spec.clutter_points {
        let (x, y) = (rng.random_range(0.0..rx), rng.random_range(0.0..ry));
        let grey = rng.random_range(0.0..1.0);
        points.push(Point { x, y, z: 0.0, r: grey, g: grey, b: grey });
    }
    Ok(Scene { cloud: PointCloud::new(points), gts })
}

/// Uniform sample on the surface of `b` (faces weighted by area).
fn sample_surface(b: &OrientedBox3, rng: &mut impl Rng) -> [f64; 3] {
    let (w, l, h) = (b.w, b.l, b.h);
    let areas = [l * h, l * h, w * h, w * h, w * l, w * l];
    let total: f64 = areas.iter().sum();
    let mut pick = rng.random_range(0.0..total);
    let mut face = 5;
    for (i, a) in areas.iter().enumerate() {
        if pick < *a {
            face = i;
            break;
        }
        pick -= a;
    }
    let mut u = rng.random_range(-0.5..=0.5) * w;
    let mut v = rng.random_range(-0.5..=0.5) * l;
    let mut t = rng.random_range(-0.5..=0.5) * h;
    match face {
        0 => u = w / 2.0,
        1 => u = -w / 2.0,
        2 => v = l / 2.0,
        3 => v = -l / 2.0,
        4 => t = h / 2.0,
        _ => t = -h / 2.0,
    }
    let (s, c) = b.theta.sin_cos();
    [b.x + c * u - s * v, b.y + s * u + c * v, b.z + t]
}
