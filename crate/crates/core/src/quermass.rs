//! Quermass integrals `W_0..W_d` (Steiner coefficients) and the
//! Aleksandrov-Fenchel inequalities between them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ellipsoid, Shape};
use crate::special::{binomial, omega};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Fitted,
}

/// `|K_r| = sum_n C(d, n) W_n r^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuermassVector {
    pub d: usize,
    pub w: Vec<f64>,
    pub provenance: Provenance,
}

/// Relative tolerance on the consistency checks of a fitted vector.
pub const FIT_TOL: f64 = 1e-8;

impl QuermassVector {
    pub fn new(d: usize, w: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if w.len() != d + 1 {
            return Err(Error::invalid(format!("expected {} Quermass integrals, got {}", d + 1, w.len())));
        }
        Ok(Self { d, w, provenance })
    }

    pub fn steiner_volume(&self, r: f64) -> f64 {
        self.w
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (n, w)| acc * r + binomial(self.d, n) * w)
    }

    /// `d|K_r|/dr = sum_{n>=1} n C(d, n) W_n r^{n-1}`.
    pub fn steiner_perimeter(&self, r: f64) -> f64 {
        self.w
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (n, w)| acc * r + n as f64 * binomial(self.d, n) * w)
    }

    pub fn volume(&self) -> f64 {
        self.w[0]
    }

    pub fn perimeter(&self) -> f64 {
        self.d as f64 * self.w[1]
    }

    /// Integral of the mean curvature, `M = d W_2`.
    pub fn mean_curvature(&self) -> f64 {
        self.d as f64 * self.w[2]
    }

    pub fn scaled(&self, t: f64) -> Self {
        let w = self
            .w
            .iter()
            .enumerate()
            .map(|(n, w)| w * t.powi((self.d - n) as i32))
            .collect();
        Self { d: self.d, w, provenance: self.provenance }
    }
}

/// Quermass integrals of a convex shape.
///
/// Balls, boxes and polytopes are exact. Ellipsoids are fitted: `|E_r|` is
/// computed at `r = k r0`, `k = 1..=d+1`, `r0 = diam(E)`, and the Vandermonde
/// system is solved for the Steiner coefficients.
pub fn quermass(shape: &Shape) -> Result<QuermassVector> {
    shape.quermass().cloned()
}

pub(crate) fn compute(shape: &Shape) -> Result<QuermassVector> {
    let d = shape.dim();
    if !shape.is_convex() {
        return Err(Error::unsupported("Quermass integrals need a convex body"));
    }
    if let Some(r) = shape.ball_radius() {
        let w = (0..=d).map(|n| omega(d) * r.powi((d - n) as i32)).collect();
        return QuermassVector::new(d, w, Provenance::Exact);
    }
    if let Some(hw) = shape.half_widths() {
        let sides: Vec<f64> = hw.iter().map(|h| 2.0 * h).collect();
        let e = elementary_symmetric(&sides);
        let w = (0..=d).map(|n| e[d - n] * omega(n) / binomial(d, n)).collect();
        return QuermassVector::new(d, w, Provenance::Exact);
    }
    if let Some(p) = shape.as_polytope() {
        let w = match d {
            2 => vec![p.volume(), p.surface_area() / 2.0, omega(2)],
            3 => vec![p.volume(), p.surface_area() / 3.0, p.edge_term() / 3.0, omega(3)],
            _ => unreachable!("polytopes are built for d = 2, 3 only"),
        };
        return QuermassVector::new(d, w, Provenance::Exact);
    }
    let axes = shape.ellipsoid_axes().expect("remaining convex kind is the ellipsoid");
    let r0 = shape.diameter();
    let radii: Vec<f64> = (1..=d + 1).map(|k| k as f64 * r0).collect();
    let vols = ellipsoid::parallel_volumes(&axes, &radii);
    let coeffs = fit_steiner(&radii, &vols)?;
    let w: Vec<f64> = coeffs.iter().enumerate().map(|(n, c)| c / binomial(d, n)).collect();
    let exact_vol = shape.volume();
    let vol_err = (w[0] - exact_vol).abs() / exact_vol;
    let top_err = (w[d] - omega(d)).abs() / omega(d);
    if vol_err > FIT_TOL || top_err > FIT_TOL {
        return Err(Error::numerical(format!(
            "Steiner fit residual too large: volume {vol_err:.2e}, W_d {top_err:.2e}"
        )));
    }
    QuermassVector::new(d, w, Provenance::Fitted)
}

/// Solves `sum_n c_n r_i^n = v_i` for the polynomial coefficients.
pub fn fit_steiner(radii: &[f64], vols: &[f64]) -> Result<Vec<f64>> {
    let m = radii.len();
    if vols.len() != m || m == 0 {
        return Err(Error::invalid("need one volume per radius"));
    }
    // scale r to O(1) for conditioning
    let s = radii.iter().cloned().fold(0.0, f64::max);
    let a = DMatrix::from_fn(m, m, |i, j| (radii[i] / s).powi(j as i32));
    let b = DVector::from_column_slice(vols);
    let c = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::numerical("singular Vandermonde system (radii must be distinct)"))?;
    Ok((0..m).map(|j| c[j] / s.powi(j as i32)).collect())
}

/// `e_0..e_n` of the given numbers.
fn elementary_symmetric(x: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; x.len() + 1];
    e[0] = 1.0;
    for (k, &v) in x.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e
}

pub fn mean_curvature_integral(shape: &Shape) -> Result<f64> {
    Ok(shape.quermass()?.mean_curvature())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AfReport {
    /// `min (k-i) ln W_j - (k-j) ln W_i - (j-i) ln W_k` over `i < j < k`.
    pub worst_log_slack: f64,
    pub triple: (usize, usize, usize),
    /// Every triple whose log-slack is below `-AF_TOL`.
    pub violations: Vec<((usize, usize, usize), f64)>,
    pub pass: bool,
}

pub const AF_TOL: f64 = 1e-8;

/// Checks `W_j^{k-i} >= W_i^{k-j} W_k^{j-i}` for all `0 <= i < j < k <= d`.
pub fn af_check(q: &QuermassVector) -> AfReport {
    let ln: Vec<f64> = q.w.iter().map(|w| w.ln()).collect();
    let mut worst = f64::INFINITY;
    let mut triple = (0, 1, 2);
    let mut violations = Vec::new();
    for i in 0..=q.d {
        for j in i + 1..=q.d {
            for k in j + 1..=q.d {
                let slack = (k - i) as f64 * ln[j] - (k - j) as f64 * ln[i] - (j - i) as f64 * ln[k];
                if !(slack >= -AF_TOL) {
                    violations.push(((i, j, k), slack));
                }
                if slack < worst || slack.is_nan() {
                    worst = slack;
                    triple = (i, j, k);
                }
            }
        }
    }
    AfReport { worst_log_slack: worst, triple, pass: violations.is_empty(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ShapeSpec;
    use std::f64::consts::PI;

    fn q(spec: ShapeSpec) -> QuermassVector {
        quermass(&Shape::new(spec).unwrap()).unwrap()
    }

    #[test]
    fn ball_all_equal() {
        let v = q(ShapeSpec::ball(3, 1.0));
        for w in &v.w {
            assert!((w - 4.0 * PI / 3.0).abs() < 1e-12);
        }
        assert!(af_check(&v).worst_log_slack.abs() < 1e-12);
    }

    #[test]
    fn cube_vector() {
        let v = q(ShapeSpec::cuboid(&[0.5, 0.5, 0.5]));
        let expect = [1.0, 2.0, PI, 4.0 * PI / 3.0];
        for (a, b) in v.w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((v.mean_curvature() - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn sphere_as_ellipsoid() {
        let e = q(ShapeSpec::ellipsoid(&[1.0, 1.0, 1.0]));
        assert_eq!(e.provenance, Provenance::Fitted);
        for w in &e.w {
            assert!((w - 4.0 * PI / 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn ball_mean_curvature_in_5d() {
        let m = mean_curvature_integral(&Shape::new(ShapeSpec::ball(5, 2.0)).unwrap()).unwrap();
        assert!((m - 64.0 * PI * PI / 3.0).abs() < 1e-9);
    }

    #[test]
    fn af_examples() {
        let r = af_check(&QuermassVector::new(3, vec![1.0, 2.0, PI, 4.0 * PI / 3.0], Provenance::Exact).unwrap());
        assert!(r.pass);
        let r = af_check(&QuermassVector::new(3, vec![1.0, 1.0, 2.0, 4.0 * PI / 3.0], Provenance::Exact).unwrap());
        assert!(!r.pass);
        let at_012 = r.violations.iter().find(|(t, _)| *t == (0, 1, 2)).unwrap();
        assert!((at_012.1 - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cube_slack_at_012() {
        // 2^2 >= 1 * pi, slack ln(4/pi)
        let w = [1.0f64, 2.0, PI];
        let slack = 2.0 * w[1].ln() - w[0].ln() - w[2].ln();
        assert!((slack - (4.0 / PI).ln()).abs() < 1e-15);
    }

    #[test]
    fn fit_recovers_box_polynomial() {
        let exact = q(ShapeSpec::cuboid(&[1.0, 0.5, 0.25]));
        let r0 = 2.0;
        let radii: Vec<f64> = (1..=4).map(|k| k as f64 * r0).collect();
        let vols: Vec<f64> = radii.iter().map(|&r| exact.steiner_volume(r)).collect();
        let c = fit_steiner(&radii, &vols).unwrap();
        for (n, c) in c.iter().enumerate() {
            let w = c / binomial(3, n);
            assert!((w - exact.w[n]).abs() < 1e-9 * exact.w[n]);
        }
    }

    #[test]
    fn polygon_quermass() {
        let v = q(ShapeSpec::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![2.0, 1.0], vec![0.0, 1.0]]));
        assert_eq!(v.w, vec![2.0, 3.0, PI]);
    }

    #[test]
    fn nonconvex_rejected() {
        let s = Shape::new(ShapeSpec::segment_family(1.0, 10)).unwrap();
        assert!(quermass(&s).is_err());
    }
}
