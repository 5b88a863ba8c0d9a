//! Reference capacity values: closed forms, the ellipsoid elliptic integral,
//! walk-on-spheres hitting estimates and the Wiener-sausage growth rate.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::mc::{par_chunks, unit_vector, MCConfig, Purpose, Rng};
use crate::quad::integrate;
use crate::sausage::SausageRun;
use crate::special::{omega, sphere_area, unit_ball_capacity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityMethod {
    Exact,
    Quadrature,
    SausageMc,
    HittingMc,
    /// Polar set: capacity zero by an analytic argument, never an MC output.
    AnalyticZero,
}

impl CapacityMethod {
    pub fn is_mc(self) -> bool {
        matches!(self, CapacityMethod::SausageMc | CapacityMethod::HittingMc)
    }

    pub fn name(self) -> &'static str {
        match self {
            CapacityMethod::Exact => "exact",
            CapacityMethod::Quadrature => "quadrature",
            CapacityMethod::SausageMc => "sausage_mc",
            CapacityMethod::HittingMc => "hitting_mc",
            CapacityMethod::AnalyticZero => "analytic_zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub value: f64,
    pub method: CapacityMethod,
    pub stderr: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, f64>,
}

impl CapacityEstimate {
    fn new(value: f64, method: CapacityMethod, stderr: f64) -> Self {
        Self { value, method, stderr, meta: BTreeMap::new() }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.meta.insert(key.to_string(), v);
        self
    }
}

/// Closed forms: balls in `d >= 3` (Newtonian) and balls/ellipses in `d = 2`
/// (logarithmic). The segment family gets the analytic zero tag.
pub fn cap_exact(shape: &Shape) -> Result<CapacityEstimate> {
    let d = shape.dim();
    if shape.as_segments().is_some() {
        return Ok(CapacityEstimate::new(0.0, CapacityMethod::AnalyticZero, 0.0));
    }
    if d == 2 {
        if let Some(a) = shape.ellipsoid_axes() {
            return Ok(CapacityEstimate::new(0.5 * (a[0] + a[1]), CapacityMethod::Exact, 0.0));
        }
    } else if let Some(r) = shape.ball_radius() {
        return Ok(CapacityEstimate::new(
            unit_ball_capacity(d) * r.powi(d as i32 - 2),
            CapacityMethod::Exact,
            0.0,
        ));
    }
    Err(Error::unsupported(format!(
        "no closed-form capacity for a {} in d = {d}",
        shape.spec().kind_name()
    )))
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// `int_0^inf prod_i (a_i^2 + t)^{-1/2} dt`, after `t = m^2 (u/(1-u))^2`
/// with `m = min a_i`.
pub fn elliptic_e(axes: &[f64], tol: f64) -> Result<(f64, f64)> {
    let d = axes.len();
    let m = axes.iter().cloned().fold(f64::INFINITY, f64::min);
    let f = |u: f64| {
        let v = 1.0 - u;
        let denom: f64 = axes.iter().map(|a| (a * a * v * v + m * m * u * u).sqrt()).product();
        2.0 * m * m * u * v.powi(d as i32 - 3) / denom
    };
    let r = integrate(f, 0.0, 1.0, 0.0, tol)?;
    Ok((r.value, r.error))
}

/// Newtonian capacity of a closed ellipsoid, `2 d omega_d / e(a)`.
pub fn cap_ellipsoid(shape: &Shape, tol: f64) -> Result<CapacityEstimate> {
    let d = shape.dim();
    let axes = shape
        .ellipsoid_axes()
        .ok_or_else(|| Error::unsupported("cap_ellipsoid needs an ellipsoid"))?;
    if d < 3 {
        return Err(Error::unsupported("Newtonian capacity needs d >= 3"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    let (e, err) = elliptic_e(&axes, tol)?;
    let value = 2.0 * sphere_area(d) / e;
    Ok(CapacityEstimate::new(value, CapacityMethod::Quadrature, 0.0)
        .with("quad_tol", tol)
        .with("quad_rel_error", err / e))
}

/// Walk-on-spheres settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WosConfig {
    pub mc: MCConfig,
    /// Absorption shell relative to the circumradius.
    pub delta_rel: f64,
    pub max_steps: usize,
}

impl WosConfig {
    pub fn new(mc: MCConfig) -> Self {
        Self { mc, delta_rel: 1e-6, max_steps: 100_000 }
    }
}

/// Samples the harmonic measure on the sphere `|z| = radius` seen from the
/// interior point `y` (Poisson kernel) by rejection from the uniform law.
fn sample_poisson_kernel(rng: &mut Rng, y: &[f64], radius: f64) -> Vec<f64> {
    let d = y.len();
    let s = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    loop {
        let xi: Vec<f64> = unit_vector(rng, d).into_iter().map(|v| v * radius).collect();
        let dist = xi.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let accept = ((radius - s) / dist).powi(d as i32);
        if rng.random::<f64>() < accept {
            return xi;
        }
    }
}

/// Walk-on-spheres estimate of `cap(K) = cap(B_rho0) P(hit K)` for walkers
/// started uniformly on the sphere of radius `rho0 = 2 circumradius`.
///
/// A walker beyond `rho_far = 2 rho0` returns to the `rho0` sphere with
/// probability `(rho0/|x|)^{d-2}`, landing on the exterior harmonic measure,
/// which is sampled as the interior Poisson kernel from the Kelvin image
/// `rho0^2 x/|x|^2`. Escaped walkers count as misses.
pub fn cap_hitting_mc(shape: &Shape, cfg: &WosConfig) -> Result<CapacityEstimate> {
    let d = shape.dim();
    if d < 3 {
        return Err(Error::unsupported("walk-on-spheres capacity needs d >= 3"));
    }
    if shape.as_segments().is_some() {
        return Err(Error::unsupported("polar sets have no Monte Carlo capacity (it is 0)"));
    }
    if cfg.mc.samples == 0 {
        return Err(Error::invalid("need at least one walker"));
    }
    let c = shape.center();
    let rc = shape.circumradius();
    let rho0 = 2.0 * rc;
    let rho_far = 2.0 * rho0;
    let delta = cfg.delta_rel * rc;
    let results = par_chunks(cfg.mc.seed, Purpose::Walkers, cfg.mc.samples, |rng, range| {
        let mut hits = 0usize;
        let mut steps = 0usize;
        let mut x = vec![0.0; d];
        for _ in range {
            let start = unit_vector(rng, d);
            for k in 0..d {
                x[k] = c[k] + rho0 * start[k];
            }
            let mut n = 0usize;
            let hit = loop {
                n += 1;
                if n > cfg.max_steps {
                    return Err(Error::numerical(format!(
                        "walker budget of {} steps exhausted before absorption",
                        cfg.max_steps
                    )));
                }
                let rel: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
                let rho = rel.iter().map(|v| v * v).sum::<f64>().sqrt();
                if rho > rho_far {
                    let back = (rho0 / rho).powi(d as i32 - 2);
                    if rng.random::<f64>() >= back {
                        break false;
                    }
                    let image: Vec<f64> = rel.iter().map(|v| v * rho0 * rho0 / (rho * rho)).collect();
                    let landing = sample_poisson_kernel(rng, &image, rho0);
                    for k in 0..d {
                        x[k] = c[k] + landing[k];
                    }
                    continue;
                }
                let dist = shape.distance(&x);
                if dist <= delta {
                    break true;
                }
                let dir = unit_vector(rng, d);
                for k in 0..d {
                    x[k] += dist * dir[k];
                }
            };
            steps += n;
            hits += hit as usize;
        }
        Ok((hits, steps))
    });
    let mut hits = 0usize;
    let mut steps = 0usize;
    for r in results {
        let (h, s) = r?;
        hits += h;
        steps += s;
    }
    let n = cfg.mc.samples as f64;
    let p = hits as f64 / n;
    let scale = unit_ball_capacity(d) * rho0.powi(d as i32 - 2);
    Ok(CapacityEstimate::new(scale * p, CapacityMethod::HittingMc, scale * (p * (1.0 - p) / n).sqrt())
        .with("walkers", n)
        .with("hits", hits as f64)
        .with("mean_steps", steps as f64 / n)
        .with("rho0", rho0)
        .with("delta", delta)
        .with("seed", cfg.mc.seed as f64))
}

/// Growth rate of the expected sausage volume (`cap(K)` in the long-time
/// limit) from a completed run.
pub fn cap_from_sausage(run: &SausageRun) -> Result<CapacityEstimate> {
    let fit = run.slope()?;
    Ok(CapacityEstimate::new(fit.slope, CapacityMethod::SausageMc, fit.stderr)
        .with("paths", run.n_paths as f64)
        .with("dt", run.dt)
        .with("t_max", run.t_max())
        .with("burn_in", fit.burn_in)
        .with("points_used", fit.points_used as f64)
        .with("seed", run.seed as f64))
}

/// Best available reference: exact, then quadrature, then walk-on-spheres.
pub fn reference_capacity(shape: &Shape, mc: Option<MCConfig>) -> Result<CapacityEstimate> {
    if let Ok(c) = cap_exact(shape) {
        return Ok(c);
    }
    if shape.dim() >= 3 && shape.ellipsoid_axes().is_some() {
        return cap_ellipsoid(shape, DEFAULT_QUAD_TOL);
    }
    let mc = mc.ok_or_else(|| Error::invalid("a Monte Carlo capacity needs a seed"))?;
    cap_hitting_mc(shape, &WosConfig::new(mc))
}

/// Isocapacitary floor `(d-2) d omega_d^{2/d} |K|^{(d-2)/d}`.
pub fn isocapacitary_floor(shape: &Shape) -> f64 {
    let d = shape.dim() as f64;
    (d - 2.0) * d * omega(shape.dim()).powf(2.0 / d) * shape.volume().powf((d - 2.0) / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ShapeSpec;
    use std::f64::consts::PI;

    fn shape(spec: ShapeSpec) -> Shape {
        Shape::new(spec).unwrap()
    }

    #[test]
    fn closed_forms() {
        let c = cap_exact(&shape(ShapeSpec::ball(3, 1.0))).unwrap();
        assert!((c.value - 4.0 * PI).abs() < 1e-12);
        assert_eq!(c.stderr, 0.0);
        let c = cap_exact(&shape(ShapeSpec::ball(5, 1.0))).unwrap();
        assert!((c.value - 8.0 * PI * PI).abs() < 1e-12);
        let c = cap_exact(&shape(ShapeSpec::ellipsoid(&[2.0, 1.0]))).unwrap();
        assert_eq!(c.value, 1.5);
        assert!(cap_exact(&shape(ShapeSpec::cuboid(&[1.0, 1.0, 1.0]))).is_err());
        let z = cap_exact(&shape(ShapeSpec::segment_family(1.0, 10))).unwrap();
        assert_eq!(z.method, CapacityMethod::AnalyticZero);
    }

    /// `e(2,1,1) = ln(7 + 4 sqrt 3)/sqrt 3` via `u = sqrt(4 + t)`.
    fn e_211() -> f64 {
        (7.0 + 4.0 * 3f64.sqrt()).ln() / 3f64.sqrt()
    }

    #[test]
    fn ellipsoid_quadrature() {
        let c = cap_ellipsoid(&shape(ShapeSpec::ellipsoid(&[1.0, 1.0, 1.0])), 1e-12).unwrap();
        assert!((c.value - 4.0 * PI).abs() < 1e-9 * 4.0 * PI);
        let c = cap_ellipsoid(&shape(ShapeSpec::ellipsoid(&[2.0, 1.0, 1.0])), 1e-12).unwrap();
        let oracle = 8.0 * PI / e_211();
        assert!((c.value / oracle - 1.0).abs() < 1e-10, "{} vs {oracle}", c.value);
        assert!((c.value - 16.527).abs() < 1e-3);
    }

    #[test]
    fn sphere_via_quadrature_in_5d() {
        let c = cap_ellipsoid(&shape(ShapeSpec::ellipsoid(&[1.0; 5])), 1e-12).unwrap();
        assert!((c.value - 8.0 * PI * PI).abs() < 1e-9 * c.value);
    }

    #[test]
    fn flat_ellipsoid_respects_floor() {
        let eps = 0.1;
        let c = cap_ellipsoid(&shape(ShapeSpec::ellipsoid(&[1.0, 1.0, 1.0, eps, eps])), 1e-10).unwrap();
        let floor = sphere_area(5) * (1.0 - eps * eps).sqrt() / (2.0 / eps).ln();
        assert!(c.value >= floor, "{} < {floor}", c.value);
    }

    #[test]
    fn symmetric_in_axes() {
        let a = cap_ellipsoid(&shape(ShapeSpec::ellipsoid(&[3.0, 0.5, 1.2])), 1e-12).unwrap().value;
        let b = cap_ellipsoid(&shape(ShapeSpec::ellipsoid(&[0.5, 1.2, 3.0])), 1e-12).unwrap().value;
        assert!((a - b).abs() < 1e-11 * a);
    }

    #[test]
    fn hitting_mc_ball() {
        let cfg = WosConfig::new(MCConfig::new(11, 100_000));
        let c = cap_hitting_mc(&shape(ShapeSpec::ball(3, 1.0)), &cfg).unwrap();
        assert!((c.value - 4.0 * PI).abs() < 3.0 * c.stderr, "{} +- {}", c.value, c.stderr);
    }

    #[test]
    fn hitting_mc_is_reproducible() {
        let cfg = WosConfig::new(MCConfig::new(5, 5000));
        let s = shape(ShapeSpec::cuboid(&[0.5, 0.5, 0.5]));
        assert_eq!(cap_hitting_mc(&s, &cfg).unwrap(), cap_hitting_mc(&s, &cfg).unwrap());
    }

    #[test]
    fn poisson_kernel_mean() {
        // the harmonic measure from y has barycentre y * (something) only in
        // d = 2; in every d its mean of the harmonic function x_1 is y_1.
        let mut rng = crate::mc::stream(3, Purpose::Walkers, 0);
        let y = [0.4, 0.1, -0.2];
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| sample_poisson_kernel(&mut rng, &y, 1.0)[0]).sum::<f64>() / n as f64;
        assert!((mean - 0.4).abs() < 0.01, "{mean}");
    }
}
