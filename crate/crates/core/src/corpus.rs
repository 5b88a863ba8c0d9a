//! The built-in shape corpus used by the verification suites.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::geometry::ShapeSpec;
use crate::mc::{stream, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub id: String,
    pub spec: ShapeSpec,
}

pub const ELLIPSOIDS: usize = 20;
pub const BOXES: usize = 10;
pub const POLYTOPES: usize = 10;
pub const SEGMENT_TRUNCATION: usize = 200;

fn log_uniform(rng: &mut crate::mc::Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

pub fn balls() -> Vec<Entry> {
    let mut out = Vec::new();
    for d in 3..=5 {
        for r in [0.5, 1.0, 2.0] {
            out.push(Entry { id: format!("ball_d{d}_r{r}"), spec: ShapeSpec::ball(d, r) });
        }
    }
    out
}

/// Semi-axes log-uniform in `[1/2, 4]`, `d = 3`.
pub fn ellipsoids(seed: u64) -> Vec<Entry> {
    let mut rng = stream(seed, Purpose::Corpus, 1);
    (0..ELLIPSOIDS)
        .map(|i| {
            let a: Vec<f64> = (0..3).map(|_| log_uniform(&mut rng, 0.5, 4.0)).collect();
            Entry { id: format!("ellipsoid_{i}"), spec: ShapeSpec::ellipsoid(&a) }
        })
        .collect()
}

/// Half-widths log-uniform in `[1/4, 1]`, `d = 3`.
pub fn boxes(seed: u64) -> Vec<Entry> {
    let mut rng = stream(seed, Purpose::Corpus, 2);
    (0..BOXES)
        .map(|i| {
            let h: Vec<f64> = (0..3).map(|_| log_uniform(&mut rng, 0.25, 1.0)).collect();
            Entry { id: format!("box_{i}"), spec: ShapeSpec::cuboid(&h) }
        })
        .collect()
}

/// Hulls of 8 to 16 random points on a randomly stretched sphere, `d = 3`.
pub fn polytopes(seed: u64) -> Vec<Entry> {
    let mut rng = stream(seed, Purpose::Corpus, 3);
    (0..POLYTOPES)
        .map(|i| {
            let n = rng.random_range(8..=16);
            let stretch: Vec<f64> = (0..3).map(|_| log_uniform(&mut rng, 0.5, 1.5)).collect();
            let verts = (0..n)
                .map(|_| crate::mc::unit_vector(&mut rng, 3).iter().zip(&stretch).map(|(u, s)| u * s).collect())
                .collect();
            Entry { id: format!("polytope_{i}"), spec: ShapeSpec::polytope(verts) }
        })
        .collect()
}

pub fn segment_families() -> Vec<Entry> {
    [0.5, 1.0, 2.0]
        .iter()
        .map(|&a| Entry { id: format!("segments_alpha{a}"), spec: ShapeSpec::segment_family(a, SEGMENT_TRUNCATION) })
        .collect()
}

/// Convex part of the corpus: balls, ellipsoids, boxes, polytopes.
pub fn convex(seed: u64) -> Vec<Entry> {
    let mut out = balls();
    out.extend(ellipsoids(seed));
    out.extend(boxes(seed));
    out.extend(polytopes(seed));
    out
}

pub fn all(seed: u64) -> Vec<Entry> {
    let mut out = convex(seed);
    out.extend(segment_families());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;

    #[test]
    fn corpus_is_valid_and_seeded() {
        let c = all(42);
        assert_eq!(c.len(), 9 + ELLIPSOIDS + BOXES + POLYTOPES + 3);
        for e in &c {
            Shape::new(e.spec.clone()).unwrap();
        }
        assert_eq!(all(42), c);
        assert_ne!(ellipsoids(43), ellipsoids(42));
    }
}
