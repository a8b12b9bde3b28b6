//! Box ⇄ regression-delta parametrizations.
//!
//! The first six channels are face distances from a location: δ1/δ2 to the
//! +x/−x faces, δ3/δ4 along y, δ5/δ6 along z, so that δ1 + δ2 = w and the
//! center is recovered as `x̂ + (δ1 − δ2) / 2`. The two angle channels depend
//! on the [`Mode`]:
//!
//! | mode     | δ7                  | δ8                  |
//! |----------|---------------------|---------------------|
//! | `Aabb`   | unused              | unused              |
//! | `Naive`  | θ                   | unused              |
//! | `SinCos` | sin θ               | cos θ               |
//! | `Mobius` | ln(w/l) · sin 2θ    | ln(w/l) · cos 2θ    |
//!
//! For oriented boxes the face distances are taken along the world axes with
//! the box's own `w, l, h`, so individual values may be negative for rotated
//! boxes; their sums (`w + l`, `h`) and the center offset are what decoding
//! relies on.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{AxisAlignedBox3, Location3, OrientedBox3};

/// Slack for "location inside box" checks when encoding oriented boxes.
const INSIDE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Aabb,
    Naive,
    SinCos,
    Mobius,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Aabb, Mode::Naive, Mode::SinCos, Mode::Mobius];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Aabb => "aabb",
            Mode::Naive => "naive",
            Mode::SinCos => "sincos",
            Mode::Mobius => "mobius",
        }
    }

    /// Whether the mode regresses a heading angle (and so uses rotated IoU).
    pub fn is_oriented(&self) -> bool {
        !matches!(self, Mode::Aabb)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aabb" => Ok(Mode::Aabb),
            "naive" => Ok(Mode::Naive),
            "sincos" | "sin-cos" => Ok(Mode::SinCos),
            "mobius" => Ok(Mode::Mobius),
            other => Err(Error::InvalidParameter(format!("unknown mode '{other}'"))),
        }
    }
}

/// The δ regression tuple. Channels not used by `mode` are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDeltas {
    pub mode: Mode,
    pub values: [f64; 8],
}

impl BoxDeltas {
    pub fn new(mode: Mode, faces: [f64; 6], d7: f64, d8: f64) -> Self {
        let [a, b, c, d, e, f] = faces;
        Self { mode, values: [a, b, c, d, e, f, d7, d8] }
    }

    pub fn aabb(faces: [f64; 6]) -> Self {
        Self::new(Mode::Aabb, faces, 0.0, 0.0)
    }

    pub fn faces(&self) -> [f64; 6] {
        let v = &self.values;
        [v[0], v[1], v[2], v[3], v[4], v[5]]
    }

    pub fn angle_channels(&self) -> (f64, f64) {
        (self.values[6], self.values[7])
    }

    /// Number of meaningful channels for the mode (6, 7 or 8).
    pub fn len(&self) -> usize {
        match self.mode {
            Mode::Aabb => 6,
            Mode::Naive => 7,
            Mode::SinCos | Mode::Mobius => 8,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A point of the Mobius-strip embedding of `(q, θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusPoint {
    pub e: [f64; 4],
}

fn world_faces(x: f64, y: f64, z: f64, w: f64, l: f64, h: f64, loc: &Location3) -> [f64; 6] {
    [
        x + w / 2.0 - loc.x,
        loc.x - x + w / 2.0,
        y + l / 2.0 - loc.y,
        loc.y - y + l / 2.0,
        z + h / 2.0 - loc.z,
        loc.z - z + h / 2.0,
    ]
}

pub fn encode_aabb(b: &AxisAlignedBox3, loc: &Location3) -> Result<BoxDeltas> {
    b.validate()?;
    let faces = world_faces(b.x, b.y, b.z, b.w, b.l, b.h, loc);
    if faces.iter().any(|&d| d < 0.0) {
        return Err(Error::LocationOutsideBox { x: loc.x, y: loc.y, z: loc.z });
    }
    Ok(BoxDeltas::aabb(faces))
}

fn center_from_faces(d: &[f64; 6], loc: &Location3) -> (f64, f64, f64) {
    (loc.x + (d[0] - d[1]) / 2.0, loc.y + (d[2] - d[3]) / 2.0, loc.z + (d[4] - d[5]) / 2.0)
}

pub fn decode_aabb(deltas: &BoxDeltas, loc: &Location3) -> Result<AxisAlignedBox3> {
    let d = deltas.faces();
    let (w, l, h) = (d[0] + d[1], d[2] + d[3], d[4] + d[5]);
    if !(w > 0.0 && l > 0.0 && h > 0.0) {
        return Err(Error::DegenerateExtent(format!("w={w} l={l} h={h}")));
    }
    let (x, y, z) = center_from_faces(&d, loc);
    AxisAlignedBox3::new(x, y, z, w, l, h)
}

pub fn mobius_embed(q: f64, theta: f64) -> Result<MobiusPoint> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::NonPositiveRatio(q));
    }
    let lq = q.ln();
    let (s2, c2) = (2.0 * theta).sin_cos();
    let (s4, c4) = (4.0 * theta).sin_cos();
    Ok(MobiusPoint { e: [lq * s2, lq * c2, s4, c4] })
}

pub fn encode_obb(b: &OrientedBox3, loc: &Location3, mode: Mode) -> Result<BoxDeltas> {
    b.validate()?;
    if !b.contains(loc, INSIDE_TOL) {
        return Err(Error::LocationOutsideBox { x: loc.x, y: loc.y, z: loc.z });
    }
    let faces = world_faces(b.x, b.y, b.z, b.w, b.l, b.h, loc);
    let (d7, d8) = match mode {
        Mode::Aabb => {
            if b.theta != 0.0 {
                return Err(Error::UnsupportedMode("aabb encoding of a rotated box"));
            }
            (0.0, 0.0)
        }
        Mode::Naive => (b.theta, 0.0),
        Mode::SinCos => b.theta.sin_cos(),
        Mode::Mobius => {
            let lq = (b.w / b.l).ln();
            let (s2, c2) = (2.0 * b.theta).sin_cos();
            (lq * s2, lq * c2)
        }
    };
    Ok(BoxDeltas::new(mode, faces, d7, d8))
}

pub fn decode_obb(deltas: &BoxDeltas, loc: &Location3, mode: Mode) -> Result<OrientedBox3> {
    if deltas.mode != mode {
        return Err(Error::Misaligned(format!("deltas are {} but decoding as {mode}", deltas.mode)));
    }
    let d = deltas.faces();
    let h = d[4] + d[5];
    let (x, y, z) = center_from_faces(&d, loc);
    let (d7, d8) = deltas.angle_channels();
    let (w, l, theta) = match mode {
        Mode::Aabb => (d[0] + d[1], d[2] + d[3], 0.0),
        Mode::Naive => (d[0] + d[1], d[2] + d[3], d7),
        Mode::SinCos => {
            let norm = d7.hypot(d8);
            if !(norm > 0.0) {
                return Err(Error::DegenerateExtent("sin-cos channels have zero norm".into()));
            }
            (d[0] + d[1], d[2] + d[3], (d7 / norm).atan2(d8 / norm))
        }
        Mode::Mobius => {
            let s = d[0] + d[1] + d[2] + d[3];
            let r = d7.hypot(d8);
            // q = e^r ≥ 1; written with e^-r so large ratios do not overflow.
            let inv_q = (-r).exp();
            let w = s / (1.0 + inv_q);
            let l = s * inv_q / (1.0 + inv_q);
            let theta = if r > 0.0 { 0.5 * d7.atan2(d8) } else { 0.0 };
            (w, l, theta)
        }
    };
    if !(w > 0.0 && l > 0.0 && h > 0.0) || !w.is_finite() || !l.is_finite() {
        return Err(Error::DegenerateExtent(format!("w={w} l={l} h={h}")));
    }
    OrientedBox3::new(x, y, z, w, l, h, theta)
}

/// Wrap `theta` into `(-period/2, period/2]`.
fn wrap_half_open(theta: f64, period: f64) -> f64 {
    let mut r = theta - period * (theta / period).round();
    if r <= -period / 2.0 {
        r += period;
    }
    if r > period / 2.0 {
        r -= period;
    }
    r
}

/// Deterministic representative of a box's four-element equivalence class:
/// `w ≥ l`, `θ ∈ (−π/2, π/2]`, and `θ ∈ (−π/4, π/4]` when `w = l`.
pub fn canonicalize_obb(b: &OrientedBox3) -> OrientedBox3 {
    let mut out = *b;
    if out.w < out.l {
        std::mem::swap(&mut out.w, &mut out.l);
        out.theta += FRAC_PI_2;
    }
    out.theta = if out.w == out.l { wrap_half_open(out.theta, FRAC_PI_2) } else { wrap_half_open(out.theta, PI) };
    out
}

/// The four representations `(w,l,θ)`, `(l,w,θ+π/2)`, `(w,l,θ+π)`, `(l,w,θ+3π/2)`.
pub fn equivalent_representations(b: &OrientedBox3) -> [OrientedBox3; 4] {
    let swapped = OrientedBox3 { w: b.l, l: b.w, ..*b };
    [
        *b,
        OrientedBox3 { theta: b.theta + FRAC_PI_2, ..swapped },
        OrientedBox3 { theta: b.theta + PI, ..*b },
        OrientedBox3 { theta: b.theta + 3.0 * FRAC_PI_2, ..swapped },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::iou_obb;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    const ORIGIN: Location3 = Location3::new(0.0, 0.0, 0.0);

    fn unit_aabb() -> AxisAlignedBox3 {
        AxisAlignedBox3::new(0.0, 0.0, 0.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn aabb_encode_examples() {
        assert_eq!(encode_aabb(&unit_aabb(), &ORIGIN).unwrap().faces(), [0.5; 6]);
        let d = encode_aabb(&unit_aabb(), &Location3::new(0.25, 0.0, 0.0)).unwrap();
        assert_eq!(d.faces(), [0.25, 0.75, 0.5, 0.5, 0.5, 0.5]);
        let b = AxisAlignedBox3::new(0.0, 0.0, 0.0, 2.0, 4.0, 6.0).unwrap();
        assert_eq!(encode_aabb(&b, &ORIGIN).unwrap().faces(), [1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
    }

    #[test]
    fn aabb_encode_outside_fails() {
        let err = encode_aabb(&unit_aabb(), &Location3::new(0.6, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::LocationOutsideBox { .. }));
    }

    #[test]
    fn aabb_decode_examples() {
        assert_eq!(decode_aabb(&BoxDeltas::aabb([0.5; 6]), &ORIGIN).unwrap(), unit_aabb());
        let b = decode_aabb(&BoxDeltas::aabb([0.25, 0.75, 0.5, 0.5, 0.5, 0.5]), &ORIGIN).unwrap();
        assert_eq!((b.x, b.y, b.z, b.w), (-0.25, 0.0, 0.0, 1.0));
        let err = decode_aabb(&BoxDeltas::aabb([0.0, 0.0, 0.5, 0.5, 0.5, 0.5]), &ORIGIN);
        assert!(matches!(err, Err(Error::DegenerateExtent(_))));
    }

    #[test]
    fn mobius_embed_examples() {
        let p = mobius_embed(1.0, 0.7).unwrap();
        assert_eq!(&p.e[..2], &[0.0, 0.0]);
        assert_eq!(p.e[2], (2.8f64).sin());
        let p = mobius_embed(2.0, FRAC_PI_4).unwrap();
        assert!((p.e[0] - 2f64.ln()).abs() < 1e-15);
        assert!(p.e[1].abs() < 1e-15 && p.e[2].abs() < 1e-15 && (p.e[3] + 1.0).abs() < 1e-15);
        let a = mobius_embed(2.0, FRAC_PI_6).unwrap();
        let b = mobius_embed(0.5, FRAC_PI_6 + FRAC_PI_2).unwrap();
        for k in 0..4 {
            assert!((a.e[k] - b.e[k]).abs() < 1e-12);
        }
        assert!(matches!(mobius_embed(0.0, 0.0), Err(Error::NonPositiveRatio(_))));
        assert!(mobius_embed(-1.0, 0.0).is_err());
    }

    #[test]
    fn obb_encode_examples() {
        let sq = OrientedBox3::new(0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.9).unwrap();
        let d = encode_obb(&sq, &ORIGIN, Mode::Mobius).unwrap();
        assert_eq!(d.angle_channels(), (0.0, 0.0));

        let b = OrientedBox3::new(0.0, 0.0, 0.0, 2.0, 1.0, 1.0, FRAC_PI_4).unwrap();
        let (d7, d8) = encode_obb(&b, &ORIGIN, Mode::Mobius).unwrap().angle_channels();
        assert!((d7 - 2f64.ln()).abs() < 1e-15 && d8.abs() < 1e-15);

        let flat = OrientedBox3 { theta: 0.0, ..b };
        assert_eq!(encode_obb(&flat, &ORIGIN, Mode::SinCos).unwrap().angle_channels(), (0.0, 1.0));
        assert_eq!(encode_obb(&b, &ORIGIN, Mode::Naive).unwrap().angle_channels(), (FRAC_PI_4, 0.0));
        assert!(matches!(encode_obb(&b, &ORIGIN, Mode::Aabb), Err(Error::UnsupportedMode(_))));
        assert!(encode_obb(&b, &Location3::new(0.0, 0.0, 0.6), Mode::Mobius).is_err());
    }

    #[test]
    fn obb_decode_examples() {
        let d = BoxDeltas::new(Mode::Mobius, [0.75, 0.75, 0.75, 0.75, 0.5, 0.5], 0.0, 0.0);
        let b = decode_obb(&d, &ORIGIN, Mode::Mobius).unwrap();
        assert_eq!((b.w, b.l, b.theta), (1.5, 1.5, 0.0));

        let d = BoxDeltas::new(Mode::Mobius, [0.75, 0.75, 0.75, 0.75, 0.5, 0.5], 2f64.ln(), 0.0);
        let b = decode_obb(&d, &ORIGIN, Mode::Mobius).unwrap();
        assert!((b.w - 2.0).abs() < 1e-15 && (b.l - 1.0).abs() < 1e-15);
        assert!((b.theta - FRAC_PI_4).abs() < 1e-15);

        assert!(matches!(decode_obb(&d, &ORIGIN, Mode::Naive), Err(Error::Misaligned(_))));
        let zero = BoxDeltas::new(Mode::SinCos, [0.5; 6], 0.0, 0.0);
        assert!(decode_obb(&zero, &ORIGIN, Mode::SinCos).is_err());
    }

    #[test]
    fn sincos_decode_renormalizes() {
        let d = BoxDeltas::new(Mode::SinCos, [0.5; 6], 3.0 * 0.3f64.sin(), 3.0 * 0.3f64.cos());
        let b = decode_obb(&d, &ORIGIN, Mode::SinCos).unwrap();
        assert!((b.theta - 0.3).abs() < 1e-15);
    }

    #[test]
    fn mobius_roundtrip_for_tall_box() {
        let b = OrientedBox3::new(0.2, -0.4, 1.0, 0.5, 3.0, 1.2, 2.5).unwrap();
        let loc = Location3::new(0.3, -0.5, 1.1);
        let d = encode_obb(&b, &loc, Mode::Mobius).unwrap();
        let back = decode_obb(&d, &loc, Mode::Mobius).unwrap();
        assert!(back.w >= back.l);
        assert!(iou_obb(&b, &back) > 1.0 - 1e-9);
    }

    #[test]
    fn canonicalize_examples() {
        let b = OrientedBox3::new(0.0, 0.0, 0.0, 1.0, 2.0, 1.0, 0.0).unwrap();
        let c = canonicalize_obb(&b);
        assert_eq!((c.w, c.l, c.theta), (2.0, 1.0, FRAC_PI_2));
        assert_eq!(canonicalize_obb(&c), c);

        let b = OrientedBox3::new(0.0, 0.0, 0.0, 2.0, 1.0, 1.0, PI + 0.1).unwrap();
        let c = canonicalize_obb(&b);
        assert_eq!((c.w, c.l), (2.0, 1.0));
        assert!((c.theta - 0.1).abs() < 1e-15);

        let sq = OrientedBox3::new(0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let c = canonicalize_obb(&sq);
        assert!((c.theta - (1.0 - FRAC_PI_2)).abs() < 1e-15);
    }

    #[test]
    fn mode_parse() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("bins".parse::<Mode>().is_err());
    }
}
