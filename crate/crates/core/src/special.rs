//! Dimension-dependent constants.

use std::f64::consts::PI;

/// Volume of the unit ball in `R^d`, `pi^{d/2} / Gamma(d/2 + 1)`.
///
/// Uses the recursion `omega_d = 2 pi / d * omega_{d-2}` so no gamma function
/// is needed for integer dimensions.
pub fn omega(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * omega(d - 2),
    }
}

/// Surface area of the unit sphere `S^{d-1}`.
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * omega(d)
}

/// Newtonian capacity of the closed unit ball, `(d-2) d omega_d`.
pub fn unit_ball_capacity(d: usize) -> f64 {
    (d as f64 - 2.0) * sphere_area(d)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Gamma(n) = (n-1)!` for positive integers.
pub fn gamma_int(n: usize) -> f64 {
    assert!(n >= 1, "gamma_int needs n >= 1");
    (1..n).fold(1.0, |acc, k| acc * k as f64)
}
