//! Shapes, their measures, distance functions and parallel bodies.

pub mod ellipsoid;
pub mod polytope;
pub mod segments;

use std::sync::OnceLock;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{par_chunks, MCConfig, Purpose};
use crate::quermass::{self, QuermassVector};
use crate::special::{binomial, omega};
use crate::Estimate;

pub use polytope::Polytope;
pub use segments::SegmentFamily;

fn three() -> usize {
    3
}

/// Serializable description of a compact body in `R^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Ball {
        dim: usize,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    /// Centred, axis-aligned.
    Ellipsoid { dim: usize, semi_axes: Vec<f64> },
    /// Centred, axis-aligned.
    Box { dim: usize, half_widths: Vec<f64> },
    Polytope { dim: usize, vertices: Vec<Vec<f64>> },
    SegmentFamily {
        alpha: f64,
        truncation: usize,
        #[serde(default = "three")]
        dim: usize,
    },
}

impl ShapeSpec {
    pub fn ball(dim: usize, radius: f64) -> Self {
        ShapeSpec::Ball { dim, radius, center: None }
    }

    pub fn ellipsoid(semi_axes: &[f64]) -> Self {
        ShapeSpec::Ellipsoid { dim: semi_axes.len(), semi_axes: semi_axes.to_vec() }
    }

    pub fn cuboid(half_widths: &[f64]) -> Self {
        ShapeSpec::Box { dim: half_widths.len(), half_widths: half_widths.to_vec() }
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Self {
        let dim = vertices.first().map_or(0, Vec::len);
        ShapeSpec::Polytope { dim, vertices }
    }

    pub fn segment_family(alpha: f64, truncation: usize) -> Self {
        ShapeSpec::SegmentFamily { alpha, truncation, dim: 3 }
    }

    pub fn dim(&self) -> usize {
        match self {
            ShapeSpec::Ball { dim, .. }
            | ShapeSpec::Ellipsoid { dim, .. }
            | ShapeSpec::Box { dim, .. }
            | ShapeSpec::Polytope { dim, .. }
            | ShapeSpec::SegmentFamily { dim, .. } => *dim,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ShapeSpec::Ball { .. } => "ball",
            ShapeSpec::Ellipsoid { .. } => "ellipsoid",
            ShapeSpec::Box { .. } => "box",
            ShapeSpec::Polytope { .. } => "polytope",
            ShapeSpec::SegmentFamily { .. } => "segment_family",
        }
    }

    /// Homothety `x -> t x` about the origin.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid("scale factor must be positive"));
        }
        let s = |v: &Vec<f64>| v.iter().map(|x| x * t).collect::<Vec<_>>();
        Ok(match self {
            ShapeSpec::Ball { dim, radius, center } => {
                ShapeSpec::Ball { dim: *dim, radius: radius * t, center: center.as_ref().map(s) }
            }
            ShapeSpec::Ellipsoid { dim, semi_axes } => {
                ShapeSpec::Ellipsoid { dim: *dim, semi_axes: s(semi_axes) }
            }
            ShapeSpec::Box { dim, half_widths } => {
                ShapeSpec::Box { dim: *dim, half_widths: s(half_widths) }
            }
            ShapeSpec::Polytope { dim, vertices } => {
                ShapeSpec::Polytope { dim: *dim, vertices: vertices.iter().map(s).collect() }
            }
            ShapeSpec::SegmentFamily { .. } => {
                return Err(Error::unsupported("the segment family has a fixed scale"))
            }
        })
    }

    /// Rigid motion `x -> Q x + b`, for kinds that can represent it
    /// (balls move their centre, polytopes their vertices).
    pub fn moved(&self, rotation: &[Vec<f64>], shift: &[f64]) -> Result<Self> {
        let apply = |v: &[f64]| -> Vec<f64> {
            rotation
                .iter()
                .zip(shift)
                .map(|(row, b)| row.iter().zip(v).map(|(q, x)| q * x).sum::<f64>() + b)
                .collect()
        };
        match self {
            ShapeSpec::Ball { dim, radius, center } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; *dim]);
                Ok(ShapeSpec::Ball { dim: *dim, radius: *radius, center: Some(apply(&c)) })
            }
            ShapeSpec::Polytope { dim, vertices } => Ok(ShapeSpec::Polytope {
                dim: *dim,
                vertices: vertices.iter().map(|v| apply(v)).collect(),
            }),
            other => Err(Error::unsupported(format!(
                "{} cannot represent a rigid motion; convert to a polytope first",
                other.kind_name()
            ))),
        }
    }
}

/// Volume of the unit ball together with its dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaD {
    pub d: usize,
    pub value: f64,
}

impl OmegaD {
    pub fn new(d: usize) -> Self {
        Self { d, value: omega(d) }
    }
}

#[derive(Debug, Clone)]
pub struct ParallelQuery<'a> {
    pub base: &'a Shape,
    pub r: f64,
}

#[derive(Debug, Clone)]
enum Kind {
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid { axes: Vec<f64> },
    Cuboid { half_widths: Vec<f64> },
    Polytope(Polytope),
    Segments(SegmentFamily),
}

/// A validated shape with derived data (hulls, sorted feet) built once.
#[derive(Debug, Clone)]
pub struct Shape {
    spec: ShapeSpec,
    dim: usize,
    kind: Kind,
    quermass: OnceLock<Result<QuermassVector>>,
}

fn positive_all(name: &str, v: &[f64], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::invalid(format!("{name} has {} entries, expected {dim}", v.len())));
    }
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::invalid(format!("all {name} must be positive and finite")));
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Shape {
    pub fn new(spec: ShapeSpec) -> Result<Self> {
        let dim = spec.dim();
        if dim < 2 {
            return Err(Error::invalid(format!("dimension must be at least 2, got {dim}")));
        }
        let kind = match &spec {
            ShapeSpec::Ball { radius, center, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::invalid("ball radius must be positive"));
                }
                let center = center.clone().unwrap_or_else(|| vec![0.0; dim]);
                if center.len() != dim || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("ball centre has the wrong dimension"));
                }
                Kind::Ball { center, radius: *radius }
            }
            ShapeSpec::Ellipsoid { semi_axes, .. } => {
                positive_all("semi_axes", semi_axes, dim)?;
                Kind::Ellipsoid { axes: semi_axes.clone() }
            }
            ShapeSpec::Box { half_widths, .. } => {
                positive_all("half_widths", half_widths, dim)?;
                Kind::Cuboid { half_widths: half_widths.clone() }
            }
            ShapeSpec::Polytope { vertices, .. } => Kind::Polytope(Polytope::new(dim, vertices)?),
            ShapeSpec::SegmentFamily { alpha, truncation, .. } => {
                if dim != 3 {
                    return Err(Error::invalid("the segment family lives in d = 3"));
                }
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(Error::invalid("alpha must be positive"));
                }
                if *truncation == 0 {
                    return Err(Error::invalid("truncation must be at least 1"));
                }
                Kind::Segments(SegmentFamily::new(*alpha, *truncation))
            }
        };
        Ok(Self { spec, dim, kind, quermass: OnceLock::new() })
    }

    pub fn spec(&self) -> &ShapeSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self.kind, Kind::Segments(_))
    }

    pub fn is_ball(&self) -> bool {
        match &self.kind {
            Kind::Ball { .. } => true,
            Kind::Ellipsoid { axes } => axes.iter().all(|a| (a - axes[0]).abs() <= 1e-14 * axes[0]),
            _ => false,
        }
    }

    pub fn as_segments(&self) -> Option<&SegmentFamily> {
        match &self.kind {
            Kind::Segments(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match &self.kind {
            Kind::Polytope(p) => Some(p),
            _ => None,
        }
    }

    /// Semi-axes of balls and ellipsoids (a ball of radius `R` has `d` equal axes).
    pub fn ellipsoid_axes(&self) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Ball { radius, .. } => Some(vec![*radius; self.dim]),
            Kind::Ellipsoid { axes } => Some(axes.clone()),
            _ => None,
        }
    }

    pub fn half_widths(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Cuboid { half_widths } => Some(half_widths),
            _ => None,
        }
    }

    pub fn ball_radius(&self) -> Option<f64> {
        match &self.kind {
            Kind::Ball { radius, .. } => Some(*radius),
            _ => None,
        }
    }

    /// Lebesgue measure.
    pub fn volume(&self) -> f64 {
        let d = self.dim;
        match &self.kind {
            Kind::Ball { radius, .. } => omega(d) * radius.powi(d as i32),
            Kind::Ellipsoid { axes } => omega(d) * axes.iter().product::<f64>(),
            Kind::Cuboid { half_widths } => half_widths.iter().map(|h| 2.0 * h).product(),
            Kind::Polytope(p) => p.volume(),
            Kind::Segments(_) => 0.0,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.kind {
            Kind::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>() <= radius * radius
            }
            Kind::Ellipsoid { axes } => {
                x.iter().zip(axes).map(|(x, a)| (x / a).powi(2)).sum::<f64>() <= 1.0
            }
            Kind::Cuboid { half_widths } => x.iter().zip(half_widths).all(|(x, h)| x.abs() <= *h),
            Kind::Polytope(p) => p.contains(x),
            Kind::Segments(s) => s.distance(x) == 0.0,
        }
    }

    /// `d_K(x) = min_{y in K} |x - y|`.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Ball { center, radius } => {
                let r = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                (r - radius).max(0.0)
            }
            Kind::Ellipsoid { axes } => ellipsoid::distance(axes, x),
            Kind::Cuboid { half_widths } => x
                .iter()
                .zip(half_widths)
                .map(|(x, h)| (x.abs() - h).max(0.0).powi(2))
                .sum::<f64>()
                .sqrt(),
            Kind::Polytope(p) => p.distance(x),
            Kind::Segments(s) => s.distance(x),
        }
    }

    /// Tight axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            Kind::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Kind::Ellipsoid { axes } => (axes.iter().map(|a| -a).collect(), axes.clone()),
            Kind::Cuboid { half_widths } => {
                (half_widths.iter().map(|h| -h).collect(), half_widths.clone())
            }
            Kind::Polytope(p) => {
                let lo = (0..self.dim)
                    .map(|c| p.vertices.iter().map(|v| v[c]).fold(f64::INFINITY, f64::min))
                    .collect();
                let hi = (0..self.dim)
                    .map(|c| p.vertices.iter().map(|v| v[c]).fold(f64::NEG_INFINITY, f64::max))
                    .collect();
                (lo, hi)
            }
            Kind::Segments(_) => (vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 1.0]),
        }
    }

    /// Reference centre: ball centre, origin for centred kinds, volume
    /// centroid for polytopes, box centre for the segment family.
    pub fn center(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Ball { center, .. } => center.clone(),
            Kind::Polytope(p) => p.centroid().to_vec(),
            Kind::Segments(_) => vec![0.5, 0.0, 0.5],
            _ => vec![0.0; self.dim],
        }
    }

    /// Radius of the smallest ball about [`Shape::center`] containing the body.
    pub fn circumradius(&self) -> f64 {
        match &self.kind {
            Kind::Ball { radius, .. } => *radius,
            Kind::Ellipsoid { axes } => axes.iter().cloned().fold(0.0, f64::max),
            Kind::Cuboid { half_widths } => norm(half_widths),
            Kind::Polytope(p) => {
                let c = p.centroid();
                p.vertices
                    .iter()
                    .map(|v| v.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
                    .fold(0.0, f64::max)
            }
            Kind::Segments(_) => 0.5f64.sqrt(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            Kind::Ball { radius, .. } => 2.0 * radius,
            Kind::Ellipsoid { axes } => 2.0 * axes.iter().cloned().fold(0.0, f64::max),
            Kind::Cuboid { half_widths } => 2.0 * norm(half_widths),
            Kind::Polytope(p) => {
                let mut best = 0.0f64;
                for (i, a) in p.vertices.iter().enumerate() {
                    for b in &p.vertices[i + 1..] {
                        best = best.max(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt());
                    }
                }
                best
            }
            Kind::Segments(_) => 2f64.sqrt(),
        }
    }

    pub fn inradius(&self) -> f64 {
        match &self.kind {
            Kind::Ball { radius, .. } => *radius,
            Kind::Ellipsoid { axes } => axes.iter().cloned().fold(f64::INFINITY, f64::min),
            Kind::Cuboid { half_widths } => half_widths.iter().cloned().fold(f64::INFINITY, f64::min),
            Kind::Polytope(p) => p.inradius(),
            Kind::Segments(_) => 0.0,
        }
    }

    /// Cached Quermass integrals (convex kinds only).
    pub fn quermass(&self) -> Result<&QuermassVector> {
        self.quermass
            .get_or_init(|| quermass::compute(self))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn perimeter0(&self) -> Result<f64> {
        Ok(self.dim as f64 * self.quermass()?.w[1])
    }
}

/// `|K|`; rejects `d < 2` at construction.
pub fn volume(shape: &Shape) -> f64 {
    shape.volume()
}

pub fn distance(shape: &Shape, x: &[f64]) -> f64 {
    shape.distance(x)
}

/// Hit-or-miss estimate of `|{x in box : d_K(x) <= r}|` with common samples
/// for every radius in `radii`. Returns one `(value, stderr)` per radius.
pub fn hit_or_miss(shape: &Shape, radii: &[f64], mc: MCConfig) -> Result<Vec<Estimate>> {
    let r_max = radii.iter().cloned().fold(0.0, f64::max);
    let (lo, hi) = shape.bounding_box();
    let lo: Vec<f64> = lo.iter().map(|x| x - r_max).collect();
    let hi: Vec<f64> = hi.iter().map(|x| x + r_max).collect();
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    if !(box_vol > 0.0) {
        return Err(Error::invalid("degenerate bounding box for hit-or-miss sampling"));
    }
    if mc.samples == 0 {
        return Err(Error::invalid("hit-or-miss needs at least one sample"));
    }
    let d = shape.dim();
    let counts = par_chunks(mc.seed, Purpose::HitOrMiss, mc.samples, |rng, range| {
        let mut c = vec![0usize; radii.len()];
        let mut x = vec![0.0; d];
        for _ in range {
            for k in 0..d {
                x[k] = lo[k] + (hi[k] - lo[k]) * rng.random::<f64>();
            }
            let dist = shape.distance(&x);
            for (ci, r) in c.iter_mut().zip(radii) {
                if dist <= *r {
                    *ci += 1;
                }
            }
        }
        c
    });
    let n = mc.samples as f64;
    Ok((0..radii.len())
        .map(|i| {
            let hits: usize = counts.iter().map(|c| c[i]).sum();
            let p = hits as f64 / n;
            Estimate::mc(box_vol * p, box_vol * (p * (1.0 - p) / n).sqrt())
        })
        .collect())
}

/// `|K_r|`: Steiner polynomial for convex kinds, hit-or-miss otherwise.
pub fn parallel_volume(q: &ParallelQuery<'_>, mc: Option<MCConfig>) -> Result<Estimate> {
    if !(q.r >= 0.0) {
        return Err(Error::invalid("parallel radius must be non-negative"));
    }
    let shape = q.base;
    if shape.is_convex() {
        return Ok(Estimate::exact(shape.quermass()?.steiner_volume(q.r)));
    }
    let mc = mc.ok_or_else(|| Error::invalid("Monte Carlo parallel volume needs a seed"))?;
    Ok(hit_or_miss(shape, &[q.r], mc)?.remove(0))
}

/// Relative standard error above which a finite-difference perimeter is
/// reported as a numerical failure.
pub const FD_MAX_REL_STDERR: f64 = 0.1;

/// `P(K_r)`: derivative of the Steiner polynomial for convex kinds; central
/// difference of hit-or-miss volumes (shared samples) otherwise.
pub fn perimeter(shape: &Shape, r: f64, mc: Option<MCConfig>) -> Result<Estimate> {
    if shape.is_convex() {
        if !(r >= 0.0) {
            return Err(Error::invalid("parallel radius must be non-negative"));
        }
        return Ok(Estimate::exact(shape.quermass()?.steiner_perimeter(r)));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("finite-difference perimeter needs r > 0"));
    }
    let mc = mc.ok_or_else(|| Error::invalid("Monte Carlo perimeter needs a seed"))?;
    let h = fd_step(r);
    let v = hit_or_miss(shape, &[r - h, r + h], mc)?;
    // shared samples: the difference counts the shell r-h < d <= r+h directly
    let (lo, hi) = shape.bounding_box();
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a + 2.0 * (r + h)).product();
    let n = mc.samples as f64;
    let p = (v[1].value - v[0].value) / box_vol;
    let value = (v[1].value - v[0].value) / (2.0 * h);
    let stderr = box_vol * (p * (1.0 - p) / n).sqrt() / (2.0 * h);
    if !(value > 0.0) || stderr > FD_MAX_REL_STDERR * value {
        return Err(Error::numerical(format!(
            "finite-difference perimeter at r = {r} did not resolve: {value:.4e} +- {stderr:.2e}"
        )));
    }
    Ok(Estimate::mc(value, stderr))
}

/// Finite-difference step `h = max(1e-4, 1e-3 r)`, kept below `r`.
pub fn fd_step(r: f64) -> f64 {
    (1e-4f64).max(1e-3 * r).min(0.5 * r)
}

/// Steiner polynomial coefficients `C(d, n) W_n` of `|K_r|`.
pub fn steiner_coefficients(q: &QuermassVector) -> Vec<f64> {
    q.w.iter().enumerate().map(|(n, w)| binomial(q.d, n) * w).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn shape(spec: ShapeSpec) -> Shape {
        Shape::new(spec).unwrap()
    }

    #[test]
    fn volumes() {
        assert!((shape(ShapeSpec::ball(3, 1.0)).volume() - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((shape(ShapeSpec::ellipsoid(&[2.0, 1.0, 1.0])).volume() - 8.0 * PI / 3.0).abs() < 1e-12);
        assert_eq!(shape(ShapeSpec::segment_family(1.0, 100)).volume(), 0.0);
    }

    #[test]
    fn distances() {
        assert!((shape(ShapeSpec::ball(3, 1.0)).distance(&[2.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        let b = shape(ShapeSpec::cuboid(&[1.0, 1.0, 1.0]));
        assert!((b.distance(&[2.0, 2.0, 0.0]) - 2f64.sqrt()).abs() < 1e-15);
        let k = shape(ShapeSpec::segment_family(1.0, 10));
        assert!((k.distance(&[0.0, 0.0, 2.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distance_zero_iff_member() {
        let shapes = [
            shape(ShapeSpec::ball(3, 0.8)),
            shape(ShapeSpec::ellipsoid(&[1.5, 0.7, 0.4])),
            shape(ShapeSpec::cuboid(&[1.0, 0.5, 0.25])),
            shape(ShapeSpec::polytope(vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![-0.5, -0.5, -0.5],
            ])),
        ];
        let steps = 17;
        for s in &shapes {
            for i in 0..steps {
                for j in 0..steps {
                    for k in 0..steps {
                        let x: Vec<f64> = [i, j, k]
                            .iter()
                            .map(|&t| -1.6 + 3.2 * t as f64 / (steps - 1) as f64)
                            .collect();
                        let inside = s.contains(&x);
                        let dist = s.distance(&x);
                        assert_eq!(inside, dist == 0.0, "{:?} at {x:?}: {dist}", s.spec());
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(Shape::new(ShapeSpec::ball(1, 1.0)).is_err());
        assert!(Shape::new(ShapeSpec::ball(3, -1.0)).is_err());
        assert!(Shape::new(ShapeSpec::ellipsoid(&[1.0, 0.0, 1.0])).is_err());
        assert!(Shape::new(ShapeSpec::segment_family(0.0, 10)).is_err());
        assert!(Shape::new(ShapeSpec::SegmentFamily { alpha: 1.0, truncation: 5, dim: 4 }).is_err());
    }

    #[test]
    fn json_round_trip_and_schema() {
        let s: ShapeSpec =
            serde_json::from_str(r#"{"kind":"ball","dim":3,"radius":1.0,"center":[0,0,0]}"#).unwrap();
        assert_eq!(s.dim(), 3);
        let s: ShapeSpec = serde_json::from_str(r#"{"kind":"segment_family","alpha":1.0,"truncation":100}"#).unwrap();
        assert_eq!(s, ShapeSpec::segment_family(1.0, 100));
        let s: ShapeSpec = serde_json::from_str(r#"{"kind":"box","dim":3,"half_widths":[0.5,0.5,0.5]}"#).unwrap();
        let back: ShapeSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
        assert!(serde_json::from_str::<ShapeSpec>(r#"{"kind":"torus","dim":3}"#).is_err());
    }

    #[test]
    fn parallel_volume_examples() {
        let ball = shape(ShapeSpec::ball(3, 1.0));
        let v = parallel_volume(&ParallelQuery { base: &ball, r: 1.0 }, None).unwrap();
        assert!((v.value - 4.0 * PI / 3.0 * 8.0).abs() < 1e-10);
        let cube = shape(ShapeSpec::cuboid(&[0.5, 0.5, 0.5]));
        let v = parallel_volume(&ParallelQuery { base: &cube, r: 1.0 }, None).unwrap();
        assert!((v.value - (1.0 + 6.0 + 3.0 * PI + 4.0 * PI / 3.0)).abs() < 1e-10);
    }

    #[test]
    fn segment_family_needs_seed() {
        let k = shape(ShapeSpec::segment_family(1.0, 50));
        assert!(parallel_volume(&ParallelQuery { base: &k, r: 0.01 }, None).is_err());
        assert!(perimeter(&k, 0.0, Some(MCConfig::new(1, 1000))).is_err());
    }

    #[test]
    fn perimeter_examples() {
        let ball = shape(ShapeSpec::ball(3, 1.0));
        assert!((perimeter(&ball, 0.0, None).unwrap().value - 4.0 * PI).abs() < 1e-10);
        let cube = shape(ShapeSpec::cuboid(&[0.5, 0.5, 0.5]));
        assert!((perimeter(&cube, 1.0, None).unwrap().value - (6.0 + 10.0 * PI)).abs() < 1e-10);
        let b4 = shape(ShapeSpec::ball(4, 2.0));
        assert!((perimeter(&b4, 1.0, None).unwrap().value - 54.0 * PI * PI).abs() < 1e-9);
    }
}
