//! Axis-aligned centred ellipsoids: distance and parallel-body volumes.

use std::sync::OnceLock;

use crate::quad::gauss_legendre;

/// Euclidean distance from `x` to the solid ellipsoid with semi-axes `axes`.
///
/// Outside the body the nearest point is `y_i = a_i^2 x_i / (a_i^2 + t)` where
/// `t > 0` solves `sum (a_i x_i / (a_i^2 + t))^2 = 1`; the left side is convex
/// and decreasing in `t`, so Newton from `t = 0` converges monotonically.
pub fn distance(axes: &[f64], x: &[f64]) -> f64 {
    let q: f64 = axes.iter().zip(x).map(|(a, x)| (x / a).powi(2)).sum();
    if q <= 1.0 {
        return 0.0;
    }
    let f = |t: f64| -> (f64, f64) {
        let mut v = -1.0;
        let mut dv = 0.0;
        for (a, x) in axes.iter().zip(x) {
            let s = a * a + t;
            let w = (a * x / s).powi(2);
            v += w;
            dv -= 2.0 * w / s;
        }
        (v, dv)
    };
    let mut t = 0.0f64;
    for _ in 0..200 {
        let (v, dv) = f(t);
        if v <= 0.0 || dv == 0.0 {
            break;
        }
        let step = v / dv;
        t -= step;
        if step.abs() <= 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    axes.iter()
        .zip(x)
        .map(|(a, x)| {
            let y = a * a * x / (a * a + t);
            (x - y).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Gauss-Legendre points per hyperspherical angle, by dimension.
fn nodes_per_angle(d: usize) -> usize {
    match d {
        2 => 256,
        3 => 96,
        4 => 40,
        5 => 24,
        _ => 14,
    }
}

struct OrthantRule {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Tensor Gauss-Legendre rule on the positive orthant of `S^{d-1}` in
/// hyperspherical coordinates.
fn orthant_rule(d: usize) -> &'static OrthantRule {
    static RULES: [OnceLock<OrthantRule>; 9] = [const { OnceLock::new() }; 9];
    assert!((2..=8).contains(&d), "sphere quadrature supports 2 <= d <= 8");
    RULES[d].get_or_init(|| {
        let n = nodes_per_angle(d);
        let (x, w) = gauss_legendre(n);
        let half_pi = std::f64::consts::FRAC_PI_2;
        let ang: Vec<f64> = x.iter().map(|x| half_pi * 0.5 * (x + 1.0)).collect();
        let wt: Vec<f64> = w.iter().map(|w| w * half_pi * 0.5).collect();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0usize; d - 1];
        loop {
            let mut u = vec![0.0; d];
            let mut sin_prod = 1.0;
            let mut weight = 1.0;
            for k in 0..d - 1 {
                let phi = ang[idx[k]];
                u[k] = sin_prod * phi.cos();
                weight *= wt[idx[k]] * phi.sin().powi((d - 2 - k) as i32);
                sin_prod *= phi.sin();
            }
            u[d - 1] = sin_prod;
            points.push(u);
            weights.push(weight);
            let mut k = 0;
            while k < d - 1 {
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == d - 1 {
                break;
            }
        }
        OrthantRule { points, weights }
    })
}

fn det_in_place(m: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a * n + c].abs().total_cmp(&m[b * n + c].abs())).unwrap();
        if m[p * n + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for k in 0..n {
                m.swap(c * n + k, p * n + k);
            }
            det = -det;
        }
        let piv = m[c * n + c];
        det *= piv;
        for r in c + 1..n {
            let f = m[r * n + c] / piv;
            if f != 0.0 {
                for k in c..n {
                    m[r * n + k] -= f * m[c * n + k];
                }
            }
        }
    }
    det
}

/// `|E_r|` for each `r` in `radii`.
///
/// Uses `|L| = (1/d) int_{S^{d-1}} h_L det(R_L) du` with `h_{E_r} = h_E + r`
/// and radii of curvature `R_{E_r} = R_E + r`; the radii are the tangential
/// eigenvalues of the Hessian of `h_E(u) = |A u|`. The integrand is even in
/// every coordinate so one orthant suffices.
pub fn parallel_volumes(axes: &[f64], radii: &[f64]) -> Vec<f64> {
    let d = axes.len();
    let rule = orthant_rule(d);
    let a2: Vec<f64> = axes.iter().map(|a| a * a).collect();
    let mut acc = vec![0.0; radii.len()];
    let mut m = vec![0.0; d * d];
    let mut base = vec![0.0; d * d];
    for (u, w) in rule.points.iter().zip(&rule.weights) {
        let h2: f64 = u.iter().zip(&a2).map(|(u, a)| a * u * u).sum();
        let h = h2.sqrt();
        let g: Vec<f64> = u.iter().zip(&a2).map(|(u, a)| a * u).collect();
        for i in 0..d {
            for j in 0..d {
                let mut v = -g[i] * g[j] / (h2 * h) + u[i] * u[j];
                if i == j {
                    v += a2[i] / h;
                }
                base[i * d + j] = v;
            }
        }
        for (k, &r) in radii.iter().enumerate() {
            m.copy_from_slice(&base);
            for i in 0..d {
                for j in 0..d {
                    let proj = if i == j { 1.0 } else { 0.0 } - u[i] * u[j];
                    m[i * d + j] += r * proj;
                }
            }
            acc[k] += w * (h + r) * det_in_place(&mut m, d);
        }
    }
    let factor = (1u64 << d) as f64 / d as f64;
    acc.into_iter().map(|v| v * factor).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::omega;
    use std::f64::consts::PI;

    #[test]
    fn sphere_parallel_volume() {
        for d in 2..=5 {
            let axes = vec![1.0; d];
            let v = parallel_volumes(&axes, &[0.0, 0.5, 2.0]);
            for (vi, r) in v.iter().zip([0.0, 0.5, 2.0]) {
                let exact = omega(d) * (1.0 + r as f64).powi(d as i32);
                assert!((vi - exact).abs() < 1e-10 * exact, "d={d} r={r}: {vi} vs {exact}");
            }
        }
    }

    #[test]
    fn ellipsoid_volume_at_zero() {
        let v = parallel_volumes(&[2.0, 1.0, 0.5], &[0.0])[0];
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn prolate_spheroid_surface() {
        // derivative at r = 0 is the surface area; closed form for a = c > b:
        // 2 pi b^2 (1 + a/(b e) asin e), e^2 = 1 - b^2/a^2
        let (a, b) = (3.0f64, 1.0f64);
        let h = 1e-4;
        let v = parallel_volumes(&[a, b, b], &[h, 2.0 * h]);
        let v0 = 4.0 / 3.0 * PI * a * b * b;
        // forward difference of second order
        let area = (-3.0 * v0 + 4.0 * v[0] - v[1]) / (2.0 * h);
        let e = (1.0 - b * b / (a * a)).sqrt();
        let exact = 2.0 * PI * b * b * (1.0 + a / (b * e) * e.asin());
        assert!((area - exact).abs() < 1e-5 * exact, "{area} vs {exact}");
    }

    #[test]
    fn distance_along_axis_and_inside() {
        assert!((distance(&[2.0, 1.0, 1.0], &[3.0, 0.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!((distance(&[2.0, 1.0, 1.0], &[0.0, 0.0, 4.0]) - 3.0).abs() < 1e-12);
        assert_eq!(distance(&[2.0, 1.0, 1.0], &[1.0, 0.5, 0.0]), 0.0);
    }

    #[test]
    fn distance_matches_brute_force_2d() {
        let axes = [2.0, 0.7];
        let x = [1.9, 1.3];
        let brute = (0..200_000)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 200_000.0;
                ((x[0] - axes[0] * t.cos()).powi(2) + (x[1] - axes[1] * t.sin()).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((distance(&axes, &x) - brute).abs() < 1e-8);
    }
}
