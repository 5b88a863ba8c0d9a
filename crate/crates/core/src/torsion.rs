//! Torsional rigidity and the scale-invariant functionals built from it.

use std::collections::BTreeMap;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::capacity::{cap_exact, reference_capacity, CapacityEstimate};
use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::mc::{par_chunks, MCConfig, Purpose, Tally};
use crate::special::omega;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorsionMethod {
    Exact,
    ExitTimeMc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionEstimate {
    pub value: f64,
    pub method: TorsionMethod,
    pub stderr: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, f64>,
}

/// Steps per walker before the exit-time estimate is abandoned.
pub const MAX_EXIT_STEPS: usize = 10_000_000;

/// `T = ω_d R^{d+2}/(d(d+2))` for balls, `|E| / ((d+2) sum a_i^{-2})` for
/// ellipsoids, Brownian exit time otherwise.
pub fn torsion(shape: &Shape, cfg: Option<MCConfig>) -> Result<TorsionEstimate> {
    if !shape.is_convex() {
        return Err(Error::unsupported(format!("torsion of a {} is not supported", shape.spec().kind_name())));
    }
    let d = shape.dim() as f64;
    if let Some(r) = shape.ball_radius() {
        let value = omega(shape.dim()) * r.powf(d + 2.0) / (d * (d + 2.0));
        return Ok(TorsionEstimate { value, method: TorsionMethod::Exact, stderr: 0.0, meta: BTreeMap::new() });
    }
    if let Some(a) = shape.ellipsoid_axes() {
        let s: f64 = a.iter().map(|x| x.powi(-2)).sum();
        let value = shape.volume() / ((d + 2.0) * s);
        return Ok(TorsionEstimate { value, method: TorsionMethod::Exact, stderr: 0.0, meta: BTreeMap::new() });
    }
    let cfg = cfg.ok_or_else(|| Error::invalid("Monte Carlo torsion needs a seed"))?;
    exit_time_torsion(shape, cfg)
}

/// Torsion function of the ellipsoid, `(1 - sum x_i^2/a_i^2) / (2 sum a_i^{-2})`.
pub fn ellipsoid_torsion_function(axes: &[f64], x: &[f64]) -> f64 {
    let s: f64 = axes.iter().map(|a| a.powi(-2)).sum();
    let q: f64 = x.iter().zip(axes).map(|(x, a)| (x / a).powi(2)).sum();
    (1.0 - q) / (2.0 * s)
}

/// `T = |K| E[tau]` for uniform starts, with time step `(inradius/50)^2/(2d)`.
pub fn exit_time_torsion(shape: &Shape, cfg: MCConfig) -> Result<TorsionEstimate> {
    if cfg.samples < 2 {
        return Err(Error::invalid("exit-time torsion needs at least two walkers"));
    }
    let d = shape.dim();
    let inr = shape.inradius();
    if !(inr > 0.0) {
        return Err(Error::invalid("exit-time torsion needs a nonempty interior"));
    }
    let dt = (inr / 50.0).powi(2) / (2.0 * d as f64);
    let sd = (2.0 * dt).sqrt();
    let (lo, hi) = shape.bounding_box();
    let tallies = par_chunks(cfg.seed, Purpose::ExitTime, cfg.samples, |rng, range| {
        let mut t = Tally::default();
        let mut x = vec![0.0; d];
        for _ in range {
            loop {
                for k in 0..d {
                    x[k] = lo[k] + (hi[k] - lo[k]) * rng.random::<f64>();
                }
                if shape.contains(&x) {
                    break;
                }
            }
            let mut steps = 0usize;
            while shape.contains(&x) {
                for v in x.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *v += sd * z;
                }
                steps += 1;
                if steps > MAX_EXIT_STEPS {
                    return Err(Error::numerical("exit-time walker exceeded its step budget"));
                }
            }
            t.push(steps as f64 * dt);
        }
        Ok(t)
    });
    let tally: Tally = tallies.into_iter().collect::<Result<Vec<_>>>()?.into_iter().sum();
    let vol = shape.volume();
    let mut meta = BTreeMap::new();
    meta.insert("dt".to_string(), dt);
    meta.insert("walkers".to_string(), cfg.samples as f64);
    meta.insert("seed".to_string(), cfg.seed as f64);
    Ok(TorsionEstimate { value: vol * tally.mean(), method: TorsionMethod::ExitTimeMc, stderr: vol * tally.stderr(), meta })
}

/// `T / |Ω|^{(d+2)/d}` divided by its value on balls (at most 1).
pub fn saint_venant_ratio(shape: &Shape, t: f64) -> f64 {
    let d = shape.dim() as f64;
    let ceiling = 1.0 / (d * (d + 2.0) * omega(shape.dim()).powf(2.0 / d));
    t / shape.volume().powf((d + 2.0) / d) / ceiling
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    G,
    GAlpha,
    HAlpha,
    JAlpha,
}

impl FunctionalKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g" => Ok(Self::G),
            "g_alpha" | "galpha" => Ok(Self::GAlpha),
            "h_alpha" | "halpha" => Ok(Self::HAlpha),
            "j_alpha" | "jalpha" => Ok(Self::JAlpha),
            _ => Err(Error::invalid(format!("unknown functional '{s}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::G => "g",
            Self::GAlpha => "g_alpha",
            Self::HAlpha => "h_alpha",
            Self::JAlpha => "j_alpha",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub kind: FunctionalKind,
    pub alpha: f64,
    pub value: f64,
    pub stderr: f64,
}

fn check_kind(kind: FunctionalKind, alpha: f64, d: usize) -> Result<()> {
    let ok_dim = match kind {
        FunctionalKind::HAlpha => d == 2,
        _ => d >= 3,
    };
    if !ok_dim {
        return Err(Error::invalid(format!("{} is not defined in d = {d}", kind.name())));
    }
    let ok_alpha = match kind {
        FunctionalKind::G => true,
        FunctionalKind::GAlpha => (0.0..=2.0).contains(&alpha),
        FunctionalKind::HAlpha => (0.0..=1.5).contains(&alpha),
        FunctionalKind::JAlpha => alpha > 0.0 && alpha.is_finite(),
    };
    if !ok_alpha {
        return Err(Error::invalid(format!("alpha = {alpha} out of range for {}", kind.name())));
    }
    Ok(())
}

/// Evaluates a functional from precomputed torsion and capacity.
pub fn functional_from(
    kind: FunctionalKind,
    alpha: f64,
    shape: &Shape,
    t: Option<&TorsionEstimate>,
    cap: &CapacityEstimate,
) -> Result<FunctionalValue> {
    let d = shape.dim();
    check_kind(kind, alpha, d)?;
    let df = d as f64;
    let v = shape.volume();
    let p = shape.perimeter0()?;
    let torsion = || t.ok_or_else(|| Error::invalid("functional needs the torsional rigidity"));
    let rel_c = if cap.value > 0.0 { cap.stderr / cap.value } else { 0.0 };
    let (value, rel) = match kind {
        FunctionalKind::G => {
            let t = torsion()?;
            (t.value * cap.value / (v * v), (t.stderr / t.value).hypot(rel_c))
        }
        FunctionalKind::GAlpha => {
            let t = torsion()?;
            let e = df * (2.0 - alpha) / (df - 1.0);
            (t.value * cap.value / (v.powf(alpha) * p.powf(e)), (t.stderr / t.value).hypot(rel_c))
        }
        FunctionalKind::HAlpha => {
            let t = torsion()?;
            (t.value.sqrt() * cap.value / (v.powf(alpha) * p.powf(3.0 - 2.0 * alpha)), (0.5 * t.stderr / t.value).hypot(rel_c))
        }
        FunctionalKind::JAlpha => {
            let e = (df * alpha + df - 2.0) / (df - 1.0);
            (v.powf(alpha) * cap.value / p.powf(e), rel_c)
        }
    };
    Ok(FunctionalValue { kind, alpha, value, stderr: value * rel })
}

/// `G`, `G_alpha`, `H_alpha` (d = 2, logarithmic capacity) or `J_alpha`.
pub fn functional(kind: FunctionalKind, alpha: f64, shape: &Shape, cfg: Option<MCConfig>) -> Result<FunctionalValue> {
    check_kind(kind, alpha, shape.dim())?;
    let t = match kind {
        FunctionalKind::JAlpha => None,
        _ => Some(torsion(shape, cfg)?),
    };
    let cap = reference_capacity(shape, cfg)?;
    functional_from(kind, alpha, shape, t.as_ref(), &cap)
}

/// `G_alpha` of the unit ball.
pub fn g_alpha_ball(d: usize, alpha: f64) -> Result<f64> {
    let b = Shape::new(crate::geometry::ShapeSpec::ball(d, 1.0))?;
    Ok(functional(FunctionalKind::GAlpha, alpha, &b, None)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximiserReport {
    pub value: f64,
    pub stderr: f64,
    pub ball_value: f64,
    /// `ball_value - value`.
    pub slack: f64,
    pub pass: bool,
}

/// `G_alpha(K) <= G_alpha(B_1)` for `0 <= alpha <= 2/d`.
pub fn check_theorem3(shape: &Shape, alpha: f64, cfg: Option<MCConfig>) -> Result<MaximiserReport> {
    let d = shape.dim();
    if d < 3 {
        return Err(Error::invalid("the G_alpha maximiser check needs d >= 3"));
    }
    if !(alpha >= 0.0 && alpha <= 2.0 / d as f64 + 1e-15) {
        return Err(Error::invalid(format!("alpha = {alpha} outside [0, 2/d]")));
    }
    if !shape.is_convex() {
        return Err(Error::unsupported("the G_alpha maximiser check needs a convex shape"));
    }
    let g = functional(FunctionalKind::GAlpha, alpha, shape, cfg)?;
    maximiser_report(d, &g)
}

/// Compares a computed `G_alpha` against the ball value; rounding slack `1e-12` relative.
pub fn maximiser_report(d: usize, g: &FunctionalValue) -> Result<MaximiserReport> {
    let ball_value = g_alpha_ball(d, g.alpha)?;
    let slack = ball_value - g.value;
    let pass = slack >= -3.0 * g.stderr - 1e-12 * ball_value;
    Ok(MaximiserReport { value: g.value, stderr: g.stderr, ball_value, slack, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarReport {
    /// `T cap / P^5`.
    pub value: f64,
    pub disc_value: f64,
    /// `cap / P`, against `1/(2 pi)`.
    pub cap_over_p: f64,
    pub pass: bool,
}

/// `T cap / P^5 <= T(B_1) cap(B_1) / P(B_1)^5` and `cap/P <= 1/(2 pi)` in the plane.
pub fn check_theorem4(shape: &Shape) -> Result<PlanarReport> {
    if shape.dim() != 2 {
        return Err(Error::invalid("the planar check needs d = 2"));
    }
    if shape.ellipsoid_axes().is_none() {
        return Err(Error::unsupported("the planar check supports discs and ellipses"));
    }
    let t = torsion(shape, None)?.value;
    let cap = cap_exact(shape)?.value;
    let p = shape.perimeter0()?;
    let value = t * cap / p.powi(5);
    let disc_value = (std::f64::consts::PI / 8.0) / (2.0 * std::f64::consts::PI).powi(5);
    let cap_over_p = cap / p;
    let tol = 1e-9;
    let pass = value <= disc_value * (1.0 + tol) && cap_over_p <= (1.0 + tol) / (2.0 * std::f64::consts::PI);
    Ok(PlanarReport { value, disc_value, cap_over_p, pass })
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
        let t = torsion(&shape(ShapeSpec::ball(3, 1.0)), None).unwrap();
        assert!((t.value - 4.0 * PI / 45.0).abs() < 1e-14);
        let t = torsion(&shape(ShapeSpec::ellipsoid(&[2.0, 1.0, 1.0])), None).unwrap();
        assert!((t.value - 32.0 * PI / 135.0).abs() < 1e-14);
        let (a, b) = (1.7f64, 0.6f64);
        let t = torsion(&shape(ShapeSpec::ellipsoid(&[a, b])), None).unwrap();
        assert!((t.value - PI * a.powi(3) * b.powi(3) / (4.0 * (a * a + b * b))).abs() < 1e-14);
        assert!((torsion(&shape(ShapeSpec::ball(2, 1.0)), None).unwrap().value - PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn torsion_function_residual() {
        // -Δv = 1 by central differences of the quadratic
        let axes = [2.0, 1.0, 0.7];
        let x = [0.3, -0.2, 0.1];
        let h = 1e-3;
        let mut lap = 0.0;
        for k in 0..3 {
            let mut p = x;
            let mut m = x;
            p[k] += h;
            m[k] -= h;
            lap += (ellipsoid_torsion_function(&axes, &p) - 2.0 * ellipsoid_torsion_function(&axes, &x)
                + ellipsoid_torsion_function(&axes, &m))
                / (h * h);
        }
        assert!((lap + 1.0).abs() < 1e-8);
    }

    #[test]
    fn exit_time_matches_ellipsoid() {
        // the generic estimator on an ellipsoid against the closed form
        let s = shape(ShapeSpec::ellipsoid(&[2.0, 1.0, 1.0]));
        let est = exit_time_torsion(&s, MCConfig::new(4, 20_000)).unwrap();
        let exact = 32.0 * PI / 135.0;
        // the discretised exit is detected late, biasing upwards by a few percent
        assert!(est.value > exact - 3.0 * est.stderr && est.value < 1.06 * exact, "{est:?}");
    }

    #[test]
    fn ball_functionals() {
        let b = shape(ShapeSpec::ball(3, 1.7));
        let g = functional(FunctionalKind::G, 0.0, &b, None).unwrap();
        assert!((g.value - 0.2).abs() < 1e-12);
        let g0 = functional(FunctionalKind::GAlpha, 0.0, &b, None).unwrap();
        assert!((g0.value - 1.0 / (180.0 * PI)).abs() < 1e-12);
        let j = functional(FunctionalKind::JAlpha, 1.0, &b, None).unwrap();
        assert!((j.value - 1.0 / 3.0).abs() < 1e-12);
        assert!(functional(FunctionalKind::HAlpha, 0.5, &b, None).is_err());
        assert!(functional(FunctionalKind::GAlpha, 2.5, &b, None).is_err());
    }

    #[test]
    fn theorem3_ellipsoid() {
        let r = check_theorem3(&shape(ShapeSpec::ellipsoid(&[2.0, 1.0, 1.0])), 0.5, None).unwrap();
        assert!(r.slack > 0.0 && r.pass);
        let r = check_theorem3(&shape(ShapeSpec::ball(3, 2.0)), 0.5, None).unwrap();
        assert!(r.slack.abs() < 1e-12);
        assert!(check_theorem3(&shape(ShapeSpec::ball(3, 2.0)), 0.7, None).is_err());
    }

    #[test]
    fn theorem4_planar() {
        let disc = check_theorem4(&shape(ShapeSpec::ball(2, 1.0))).unwrap();
        assert!((disc.value - 1.0 / (256.0 * PI.powi(4))).abs() < 1e-9 * disc.value);
        let e = check_theorem4(&shape(ShapeSpec::ellipsoid(&[2.0, 1.0]))).unwrap();
        assert!(e.pass && e.value < disc.value);
        let scaled = check_theorem4(&shape(ShapeSpec::ellipsoid(&[3.0, 3.0]))).unwrap();
        assert!((scaled.value / disc.value - 1.0).abs() < 1e-9);
    }
}
