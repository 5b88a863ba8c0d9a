//! The family `K(alpha) = ({(n^-alpha, 0) : n >= 1} u {(0, 0)}) x [0, 1]` in R^3.
//!
//! All segments are parallel to the `x3` axis and their feet lie on the
//! `x1` axis, so `K_r` splits into a straight part `S_r x [0, 1]` (a union of
//! equal discs centred on a line) and two end caps that together form a union
//! of equal balls centred on a line. For collinear equal discs/balls the
//! overlap of each one with all the previous ones is its lens with the nearest
//! neighbour, which gives closed forms for volume and perimeter.

use std::f64::consts::PI;

/// Which part of the countable family is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extent {
    /// All segments `n >= 1` plus the limit segment.
    Infinite,
    /// Segments `n = 1..=N` plus the limit segment.
    Truncated(usize),
}

#[derive(Debug, Clone)]
pub struct SegmentFamily {
    pub alpha: f64,
    pub truncation: usize,
    /// Feet `x1` of the segments in ascending order, starting with the limit 0.
    feet: Vec<f64>,
}

/// `n^-alpha - (n+1)^-alpha`, accurate for large `n`.
pub fn gap(alpha: f64, n: usize) -> f64 {
    let n = n as f64;
    -n.powf(-alpha) * (-alpha * (1.0 / n).ln_1p()).exp_m1()
}

impl SegmentFamily {
    pub fn new(alpha: f64, truncation: usize) -> Self {
        let mut feet: Vec<f64> = (1..=truncation).map(|n| (n as f64).powf(-alpha)).collect();
        feet.push(0.0);
        feet.reverse();
        Self { alpha, truncation, feet }
    }

    pub fn feet(&self) -> &[f64] {
        &self.feet
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        let i = self.feet.partition_point(|&s| s < x[0]);
        let mut best = f64::INFINITY;
        for j in [i.wrapping_sub(1), i] {
            if let Some(s) = self.feet.get(j) {
                best = best.min((x[0] - s).abs());
            }
        }
        let dz = if x[2] < 0.0 {
            -x[2]
        } else if x[2] > 1.0 {
            x[2] - 1.0
        } else {
            0.0
        };
        (best * best + x[1] * x[1] + dz * dz).sqrt()
    }

    /// Number of segments whose feet are pairwise at least `2r` apart when
    /// taking every segment `n = 1..=m` with `gap(m) >= 2r` (the count the
    /// perimeter floor argument uses), capped by the truncation.
    pub fn separated_count(&self, r: f64) -> usize {
        (1..=self.truncation).take_while(|&n| gap(self.alpha, n) >= 2.0 * r).count()
    }
}

/// Area added to a union of equal discs (radius `rho`) by a new disc whose
/// nearest predecessor is at distance `g`.
fn disc_added_area(g: f64, rho: f64) -> f64 {
    if g >= 2.0 * rho {
        return PI * rho * rho;
    }
    let x = g / (2.0 * rho);
    let lens = 2.0 * rho * rho * x.acos() - 0.5 * g * (4.0 * rho * rho - g * g).sqrt();
    PI * rho * rho - lens
}

fn disc_added_perimeter(g: f64, rho: f64) -> f64 {
    if g >= 2.0 * rho {
        return 2.0 * PI * rho;
    }
    2.0 * PI * rho - 4.0 * rho * (g / (2.0 * rho)).acos()
}

fn ball_added_volume(g: f64, r: f64) -> f64 {
    let full = 4.0 / 3.0 * PI * r.powi(3);
    if g >= 2.0 * r {
        return full;
    }
    full - PI * (4.0 * r + g) * (2.0 * r - g).powi(2) / 12.0
}

fn ball_added_area(g: f64, r: f64) -> f64 {
    if g >= 2.0 * r {
        4.0 * PI * r * r
    } else {
        2.0 * PI * r * g
    }
}

/// Sums `f(g)` over the consecutive gaps of the family.
///
/// For the infinite family the gaps below `0.05 r` are summed through the
/// expansion `f(g) = c1 g + c3 g^3`, where `sum g = c_M` telescopes exactly
/// and `sum g^3` is replaced by its integral estimate.
fn sum_over_gaps(alpha: f64, extent: Extent, r: f64, f: impl Fn(f64) -> f64, c1: f64, c3: f64) -> f64 {
    match extent {
        Extent::Truncated(n_max) => {
            let mut s: f64 = (1..n_max).map(|n| f(gap(alpha, n))).sum();
            s += f((n_max as f64).powf(-alpha));
            s
        }
        Extent::Infinite => {
            let mut s = 0.0;
            let mut n = 1usize;
            loop {
                let g = gap(alpha, n);
                if g < 0.05 * r {
                    break;
                }
                s += f(g);
                n += 1;
            }
            let m = n as f64;
            let tail1 = m.powf(-alpha);
            let tail3 = alpha.powi(3) * (m - 0.5).powf(-3.0 * alpha - 2.0) / (3.0 * alpha + 2.0);
            s + c1 * tail1 + c3 * tail3
        }
    }
}

/// `|K(alpha)_r|` in closed form (up to the tail expansion for `Infinite`).
pub fn exact_parallel_volume(alpha: f64, extent: Extent, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let area = PI * r * r
        + sum_over_gaps(alpha, extent, r, |g| disc_added_area(g, r), 2.0 * r, -1.0 / (12.0 * r));
    let caps = 4.0 / 3.0 * PI * r.powi(3)
        + sum_over_gaps(alpha, extent, r, |g| ball_added_volume(g, r), PI * r * r, -PI / 12.0);
    area + caps
}

/// `P(K(alpha)_r) = d|K_r|/dr`.
pub fn exact_perimeter(alpha: f64, extent: Extent, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let length = 2.0 * PI * r
        + sum_over_gaps(alpha, extent, r, |g| disc_added_perimeter(g, r), 2.0, 1.0 / (12.0 * r * r));
    let caps = 4.0 * PI * r * r + sum_over_gaps(alpha, extent, r, |g| ball_added_area(g, r), 2.0 * PI * r, 0.0);
    length + caps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let k = SegmentFamily::new(1.0, 10);
        assert!((k.distance(&[0.0, 0.0, 2.0]) - 1.0).abs() < 1e-15);
        assert_eq!(k.distance(&[0.5, 0.0, 0.3]), 0.0);
        assert!((k.distance(&[0.75, 0.0, 0.5]) - 0.25).abs() < 1e-15);
        assert!((k.distance(&[-1.0, 0.0, 0.5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gap_is_accurate() {
        assert!((gap(1.0, 1) - 0.5).abs() < 1e-15);
        let n = 1_000_000usize;
        let g = gap(2.0, n);
        let approx = 2.0 / (n as f64).powi(3);
        assert!((g / approx - 1.0).abs() < 1e-5);
    }

    #[test]
    fn single_segment_capsule() {
        // truncation 1: segments at 1 and 0, one unit apart
        let r = 0.2;
        let v = exact_parallel_volume(1.0, Extent::Truncated(1), r);
        let capsule = PI * r * r + 4.0 / 3.0 * PI * r.powi(3);
        assert!((v - 2.0 * capsule).abs() < 1e-12);
        let p = exact_perimeter(1.0, Extent::Truncated(1), r);
        assert!((p - 2.0 * (2.0 * PI * r + 4.0 * PI * r * r)).abs() < 1e-12);
    }

    #[test]
    fn perimeter_is_volume_derivative() {
        for extent in [Extent::Truncated(40), Extent::Infinite] {
            for r in [0.003, 0.02, 0.3, 2.0] {
                let h = 1e-6 * r;
                let fd = (exact_parallel_volume(1.0, extent, r + h)
                    - exact_parallel_volume(1.0, extent, r - h))
                    / (2.0 * h);
                let p = exact_perimeter(1.0, extent, r);
                assert!((fd - p).abs() < 1e-5 * p, "{extent:?} r={r}: {fd} vs {p}");
            }
        }
    }

    #[test]
    fn infinite_matches_long_truncation() {
        // at r = 0.05 the segments beyond n = 2000 are merged either way
        let a = exact_perimeter(1.0, Extent::Infinite, 0.05);
        let b = exact_perimeter(1.0, Extent::Truncated(2000), 0.05);
        assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
    }
}
