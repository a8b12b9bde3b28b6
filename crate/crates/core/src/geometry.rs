//! Box types, volumes, axis-aligned and rotated IoU, and 3D centerness.
//!
//! Oriented boxes rotate about the vertical axis only. The rotated IoU
//! intersects the two xy footprints with Sutherland-Hodgman clipping and
//! multiplies the polygon area by the overlap of the z intervals.

use crate::error::{Error, Result};
use crate::param::BoxDeltas;

/// Vertices closer than this (squared meters) are merged after clipping.
pub const CLIP_MERGE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Location3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance_squared(&self, other: &Location3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        dx * dx + dy * dy + dz * dz
    }
}

/// Axis-aligned box: center and extents along x, y, z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAlignedBox3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
    pub l: f64,
    pub h: f64,
}

impl AxisAlignedBox3 {
    pub fn new(x: f64, y: f64, z: f64, w: f64, l: f64, h: f64) -> Result<Self> {
        let b = Self { x, y, z, w, l, h };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        validate_fields(&[self.x, self.y, self.z, self.w, self.l, self.h], self.w, self.l, self.h)
    }

    pub fn center(&self) -> Location3 {
        Location3::new(self.x, self.y, self.z)
    }

    pub fn volume(&self) -> f64 {
        self.w * self.l * self.h
    }

    pub fn min(&self) -> [f64; 3] {
        [self.x - self.w / 2.0, self.y - self.l / 2.0, self.z - self.h / 2.0]
    }

    pub fn max(&self) -> [f64; 3] {
        [self.x + self.w / 2.0, self.y + self.l / 2.0, self.z + self.h / 2.0]
    }

    pub fn to_oriented(&self) -> OrientedBox3 {
        OrientedBox3 { x: self.x, y: self.y, z: self.z, w: self.w, l: self.l, h: self.h, theta: 0.0 }
    }
}

/// Oriented box with a heading angle about the vertical axis.
///
/// `theta` is stored as given. The four representations `(w, l, θ)`,
/// `(l, w, θ + π/2)`, `(w, l, θ + π)` and `(l, w, θ + 3π/2)` describe the
/// same solid; see [`crate::param::canonicalize_obb`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
    pub l: f64,
    pub h: f64,
    pub theta: f64,
}

impl OrientedBox3 {
    pub fn new(x: f64, y: f64, z: f64, w: f64, l: f64, h: f64, theta: f64) -> Result<Self> {
        let b = Self { x, y, z, w, l, h, theta };
        b.validate()?;
        Ok(b)
    }

    pub fn from_array(v: [f64; 7]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6])
    }

    pub fn to_array(&self) -> [f64; 7] {
        [self.x, self.y, self.z, self.w, self.l, self.h, self.theta]
    }

    pub fn validate(&self) -> Result<()> {
        validate_fields(&self.to_array(), self.w, self.l, self.h)
    }

    pub fn center(&self) -> Location3 {
        Location3::new(self.x, self.y, self.z)
    }

    pub fn volume(&self) -> f64 {
        self.w * self.l * self.h
    }

    /// Footprint corners in counter-clockwise order.
    pub fn footprint(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.theta.sin_cos();
        let (hw, hl) = (self.w / 2.0, self.l / 2.0);
        [(-hw, -hl), (hw, -hl), (hw, hl), (-hw, hl)]
            .map(|(u, v)| [self.x + c * u - s * v, self.y + s * u + c * v])
    }

    /// Offset of `loc` from the center expressed in the box frame.
    pub fn to_local(&self, loc: &Location3) -> [f64; 3] {
        let (s, c) = self.theta.sin_cos();
        let (dx, dy) = (loc.x - self.x, loc.y - self.y);
        [c * dx + s * dy, -s * dx + c * dy, loc.z - self.z]
    }

    /// Distances from `loc` to the six faces, measured in the box frame,
    /// ordered (+u, −u, +v, −v, +z, −z). All non-negative iff `loc` is inside.
    pub fn face_distances(&self, loc: &Location3) -> [f64; 6] {
        let [u, v, t] = self.to_local(loc);
        let (hw, hl, hh) = (self.w / 2.0, self.l / 2.0, self.h / 2.0);
        [hw - u, u + hw, hl - v, v + hl, hh - t, t + hh]
    }

    /// Strict interior test (points on a face are outside).
    pub fn contains_strict(&self, loc: &Location3) -> bool {
        self.face_distances(loc).iter().all(|&d| d > 0.0)
    }

    /// Closed containment test with slack `tol` on every face.
    pub fn contains(&self, loc: &Location3, tol: f64) -> bool {
        self.face_distances(loc).iter().all(|&d| d >= -tol)
    }

    /// 3D centerness of `loc` relative to this box, 0 outside.
    pub fn centerness_at(&self, loc: &Location3) -> f64 {
        let d = self.face_distances(loc);
        if d.iter().any(|&v| v < 0.0) {
            return 0.0;
        }
        centerness_from_faces(&d)
    }

    fn z_range(&self) -> (f64, f64) {
        (self.z - self.h / 2.0, self.z + self.h / 2.0)
    }
}

fn validate_fields(all: &[f64], w: f64, l: f64, h: f64) -> Result<()> {
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidBox(format!("non-finite field in {all:?}")));
    }
    if !(w > 0.0 && l > 0.0 && h > 0.0) {
        return Err(Error::InvalidBox(format!("extents must be positive, got w={w} l={l} h={h}")));
    }
    Ok(())
}

pub fn volume(b: &OrientedBox3) -> f64 {
    b.volume()
}

pub fn iou_aabb(a: &AxisAlignedBox3, b: &AxisAlignedBox3) -> f64 {
    let (amin, amax, bmin, bmax) = (a.min(), a.max(), b.min(), b.max());
    let mut inter = 1.0;
    for k in 0..3 {
        let overlap = amax[k].min(bmax[k]) - amin[k].max(bmin[k]);
        if overlap <= 0.0 {
            return 0.0;
        }
        inter *= overlap;
    }
    let union = a.volume() + b.volume() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Rotated 3D IoU of two boxes that rotate about z only.
pub fn iou_obb(a: &OrientedBox3, b: &OrientedBox3) -> f64 {
    // Fixed argument order makes the result exactly symmetric.
    let (a, b) = if order_key(a) <= order_key(b) { (a, b) } else { (b, a) };

    let (az0, az1) = a.z_range();
    let (bz0, bz1) = b.z_range();
    let dz = az1.min(bz1) - az0.max(bz0);
    if dz <= 0.0 {
        return 0.0;
    }

    let (ra, rb) = (a.w.hypot(a.l) / 2.0, b.w.hypot(b.l) / 2.0);
    if (a.x - b.x).hypot(a.y - b.y) >= ra + rb {
        return 0.0;
    }

    let area = intersection_area(&a.footprint(), &b.footprint());
    if area <= 0.0 {
        return 0.0;
    }
    let inter = area * dz;
    let union = a.volume() + b.volume() - inter;
    (inter / union).clamp(0.0, 1.0)
}

fn order_key(b: &OrientedBox3) -> [u64; 7] {
    b.to_array().map(|v| v.to_bits())
}

/// Area of the intersection of two convex CCW polygons.
pub fn intersection_area(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> f64 {
    let poly = clip_convex(subject, clip);
    if poly.len() < 3 {
        return 0.0;
    }
    polygon_area(&poly).max(0.0)
}

/// Sutherland-Hodgman clip of `subject` against the CCW convex polygon `clip`.
pub fn clip_convex(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.len() < 3 {
            return Vec::new();
        }
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        out = clip_halfplane(&out, a, b);
    }
    dedup_vertices(out)
}

fn side(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

fn clip_halfplane(poly: &[[f64; 2]], a: [f64; 2], b: [f64; 2]) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let s = poly[i];
        let e = poly[(i + 1) % n];
        let (ds, de) = (side(a, b, s), side(a, b, e));
        let (s_in, e_in) = (ds >= 0.0, de >= 0.0);
        if s_in != e_in {
            let t = ds / (ds - de);
            out.push([s[0] + (e[0] - s[0]) * t, s[1] + (e[1] - s[1]) * t]);
        }
        if e_in {
            out.push(e);
        }
    }
    out
}

fn dedup_vertices(poly: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let close = |p: [f64; 2], q: [f64; 2]| {
        let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
        dx * dx + dy * dy < CLIP_MERGE_EPS
    };
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(poly.len());
    for p in poly {
        if out.last().is_none_or(|&q| !close(p, q)) {
            out.push(p);
        }
    }
    while out.len() > 1 && close(out[0], out[out.len() - 1]) {
        out.pop();
    }
    out
}

/// Signed shoelace area (positive for CCW).
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        acc += p[0] * q[1] - q[0] * p[1];
    }
    acc / 2.0
}

/// 3D centerness: cube root of the product of the per-axis min/max face
/// distance ratios. 1 at the box center, 0 on any face.
pub fn centerness3d(deltas: &BoxDeltas) -> Result<f64> {
    let faces = deltas.faces();
    if let Some(&d) = faces.iter().find(|&&d| d < 0.0 || d.is_nan()) {
        return Err(Error::NegativeDelta(d));
    }
    Ok(centerness_from_faces(&faces))
}

fn centerness_from_faces(d: &[f64; 6]) -> f64 {
    let ratio = |lo: f64, hi: f64| {
        let m = lo.max(hi);
        if m > 0.0 {
            lo.min(hi) / m
        } else {
            0.0
        }
    };
    let prod = ratio(d[0], d[1]) * ratio(d[2], d[3]) * ratio(d[4], d[5]);
    prod.cbrt()
}
