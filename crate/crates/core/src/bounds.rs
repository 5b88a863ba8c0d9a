//! Capacity upper bounds from parallel-body perimeters and volumes, mean
//! curvature, `P^2/|K|` and its asymmetry refinement; the segment-family
//! bound; the ellipsoid `J_alpha` lower bound; the Wiener-sausage bounds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::capacity::{reference_capacity, CapacityEstimate, CapacityMethod};
use crate::error::{Error, Result};
use crate::fraenkel::{asymmetry, AsymmetryResult};
use crate::geometry::segments::{exact_parallel_volume, exact_perimeter, Extent};
use crate::geometry::Shape;
use crate::mc::MCConfig;
use crate::quad::{golden_min, integrate};
use crate::special::{gamma_int, omega, unit_ball_capacity};

/// How the perimeter integral is closed beyond `T_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// `int_{T_max}^inf dt / P(K_t)` evaluated exactly after `s = 1/t`.
    Exact,
    /// Tail dropped: the integral is under-counted, the bound only loosens.
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    pub c_d: Option<f64>,
    /// `T_max` as a multiple of the diameter.
    pub t_max_factor: f64,
    pub tail: Tail,
    pub quad_tol: f64,
    pub golden_tol: f64,
    /// Search bracket `[lo * inradius, hi * diameter]`.
    pub bracket: (f64, f64),
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { c_d: None, t_max_factor: 100.0, tail: Tail::Exact, quad_tol: 1e-10, golden_tol: 1e-10, bracket: (0.1, 10.0) }
    }
}

impl BoundsConfig {
    pub fn with_cd(c_d: f64) -> Self {
        Self { c_d: Some(c_d), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.c_d {
            if !(c > 0.0) {
                return Err(Error::invalid("c_d must be positive"));
            }
        }
        if !(self.t_max_factor > 0.0) {
            return Err(Error::invalid("T_max must be positive"));
        }
        if !(self.quad_tol > 0.0 && self.golden_tol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if !(self.bracket.0 > 0.0 && self.bracket.1 > 0.0) {
            return Err(Error::invalid("search bracket factors must be positive"));
        }
        Ok(())
    }
}

fn require_newtonian(shape: &Shape) -> Result<()> {
    if shape.dim() < 3 {
        return Err(Error::unsupported("capacity bounds need d >= 3"));
    }
    Ok(())
}

fn require_convex(shape: &Shape) -> Result<()> {
    require_newtonian(shape)?;
    if !shape.is_convex() {
        return Err(Error::unsupported(format!("{} is not convex", shape.spec().kind_name())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerimeterIntegral {
    /// `(int_0^inf dt / P(K_t))^{-1}`.
    pub value: f64,
    pub integral: f64,
    pub tail: f64,
    pub t_max: f64,
    pub tail_mode: Tail,
}

/// Small-radius cut for the segment family, below which the integral uses
/// the perimeter floor.
const SEGMENT_R_LO: f64 = 1e-6;

/// `(int_0^inf P(K_t)^{-1} dt)^{-1}`.
///
/// For the segment family the perimeter is that of the infinite family;
/// below `r = 1e-6` the integrand is replaced by the reciprocal of the
/// pointwise floor, which over-counts the integral.
pub fn bound_perimeter_integral(shape: &Shape, cfg: &BoundsConfig) -> Result<PerimeterIntegral> {
    require_newtonian(shape)?;
    cfg.validate()?;
    let t_max = cfg.t_max_factor * shape.diameter();
    if let Some(k) = shape.as_segments() {
        let alpha = k.alpha;
        let p = |r: f64| exact_perimeter(alpha, Extent::Infinite, r);
        let r_star = kalpha_r_star(alpha)?;
        let c = kalpha_floor_coefficient(alpha);
        let q = alpha / (alpha + 1.0);
        let lo = SEGMENT_R_LO.min(r_star);
        let near = lo.powf(1.0 - q) / ((1.0 - q) * c);
        let mid = integrate(|u: f64| u.exp() / p(u.exp()), lo.ln(), t_max.ln(), 0.0, cfg.quad_tol)?.value;
        let tail = match cfg.tail {
            Tail::Exact => integrate(|s: f64| if s == 0.0 { 0.0 } else { 1.0 / (s * s * p(1.0 / s)) }, 0.0, 1.0 / t_max, 0.0, cfg.quad_tol)?.value,
            Tail::Truncated => 0.0,
        };
        let integral = near + mid;
        return Ok(PerimeterIntegral { value: 1.0 / (integral + tail), integral, tail, t_max, tail_mode: cfg.tail });
    }
    require_convex(shape)?;
    let q = shape.quermass()?;
    let d = q.d;
    let integral = integrate(|t| 1.0 / q.steiner_perimeter(t), 0.0, t_max, 0.0, cfg.quad_tol)?.value;
    let tail = match cfg.tail {
        Tail::Exact => {
            // P(1/s) = s^{1-d} Q(s) with Q(s) = sum_n n C(d,n) W_n s^{d-n}
            let coef: Vec<f64> = (1..=d).map(|n| n as f64 * crate::special::binomial(d, n) * q.w[n]).collect();
            let big_q = |s: f64| coef.iter().enumerate().map(|(i, c)| c * s.powi((d - 1 - i) as i32)).sum::<f64>();
            integrate(|s| s.powi(d as i32 - 3) / big_q(s), 0.0, 1.0 / t_max, 0.0, cfg.quad_tol)?.value
        }
        Tail::Truncated => 0.0,
    };
    Ok(PerimeterIntegral { value: 1.0 / (integral + tail), integral, tail, t_max, tail_mode: cfg.tail })
}

fn parallel_volume_of(shape: &Shape, a: f64) -> Result<f64> {
    match shape.as_segments() {
        Some(k) => Ok(exact_parallel_volume(k.alpha, Extent::Infinite, a)),
        None => Ok(shape.quermass()?.steiner_volume(a)),
    }
}

fn search_bracket(shape: &Shape, cfg: &BoundsConfig) -> (f64, f64) {
    let diam = shape.diameter();
    let lo = if shape.inradius() > 0.0 { cfg.bracket.0 * shape.inradius() } else { 1e-3 * diam };
    (lo, cfg.bracket.1 * diam)
}

/// Minimises `f` on the bracket and rejects minima pinned to an endpoint.
fn bracketed_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let (x, fx) = golden_min(&f, lo, hi, tol)?;
    let edge = 1e-6 * (hi - lo);
    if x - lo < edge || hi - x < edge {
        return Err(Error::numerical(format!("minimiser {x} sits on the search bracket [{lo}, {hi}]")));
    }
    Ok((x, fx))
}

/// `inf_{a > 0} |K_a| / a^2` and its minimiser.
pub fn bound_parallel_volume(shape: &Shape, cfg: &BoundsConfig) -> Result<(f64, f64)> {
    require_newtonian(shape)?;
    cfg.validate()?;
    if !shape.is_convex() && shape.as_segments().is_none() {
        return Err(Error::unsupported("parallel volumes are exact only for convex kinds and the segment family"));
    }
    let (lo, hi) = search_bracket(shape, cfg);
    parallel_volume_of(shape, lo)?;
    let f = |a: f64| parallel_volume_of(shape, a).map_or(f64::NAN, |v| v / (a * a));
    let (a, v) = bracketed_min(f, lo, hi, cfg.golden_tol)?;
    Ok((v, a))
}

/// `(d-2) M(K)`.
pub fn bound_mean_curvature(shape: &Shape) -> Result<f64> {
    require_convex(shape)?;
    Ok((shape.dim() as f64 - 2.0) * shape.quermass()?.mean_curvature())
}

/// `(d-2) P(K)^2 / (d |K|)`.
pub fn bound_p2_over_v(shape: &Shape) -> Result<f64> {
    require_convex(shape)?;
    let v = shape.volume();
    if !(v > 0.0) {
        return Err(Error::invalid("zero volume"));
    }
    let d = shape.dim() as f64;
    let p = shape.perimeter0()?;
    Ok((d - 2.0) * p * p / (d * v))
}

/// `Gamma(d+1) Gamma(d-1) / (Gamma(2d-2) + Gamma(d) Gamma(d-1)) * c/(1 + 4 d c)`.
pub fn gamma_d(d: usize, c_d: f64) -> Result<f64> {
    if d < 3 {
        return Err(Error::invalid("gamma_d needs d >= 3"));
    }
    if !(c_d > 0.0) {
        return Err(Error::invalid("c_d must be positive"));
    }
    let pre = gamma_int(d + 1) * gamma_int(d - 1) / (gamma_int(2 * d - 2) + gamma_int(d) * gamma_int(d - 1));
    Ok(pre * c_d / (1.0 + 4.0 * d as f64 * c_d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FraenkelBound {
    pub value: f64,
    pub stderr: f64,
    pub gamma_d: f64,
    pub asymmetry: AsymmetryResult,
}

/// `(d-2) P^2/(d|K|) (1 - gamma_d A(K)^2)` from a computed asymmetry.
pub fn fraenkel_refined_from(shape: &Shape, c_d: f64, asym: AsymmetryResult) -> Result<FraenkelBound> {
    let base = bound_p2_over_v(shape)?;
    let g = gamma_d(shape.dim(), c_d)?;
    let a = asym.value;
    Ok(FraenkelBound {
        value: base * (1.0 - g * a * a),
        stderr: base * 2.0 * g * a * asym.stderr,
        gamma_d: g,
        asymmetry: asym,
    })
}

pub fn bound_fraenkel_refined(shape: &Shape, cfg: &BoundsConfig, mc: MCConfig) -> Result<FraenkelBound> {
    require_convex(shape)?;
    let c_d = cfg.c_d.ok_or_else(|| Error::invalid("the refined bound needs c_d"))?;
    let asym = asymmetry(shape, mc)?;
    fraenkel_refined_from(shape, c_d, asym)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha must be positive"));
    }
    Ok(())
}

/// `4 pi alpha / (2^{alpha+2} + 3 alpha (alpha + 1))`.
pub fn kalpha_bound(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(4.0 * std::f64::consts::PI * alpha / (2f64.powf(alpha + 2.0) + 3.0 * alpha * (alpha + 1.0)))
}

/// `r* = alpha / 2^{alpha+2}`.
pub fn kalpha_r_star(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(alpha / 2f64.powf(alpha + 2.0))
}

fn kalpha_floor_coefficient(alpha: f64) -> f64 {
    2.0 * std::f64::consts::PI / 3.0 * (alpha / 2.0).powf(1.0 / (alpha + 1.0))
}

/// Pointwise lower bound on `P(K(alpha)_r)`: `4 pi r^2` above `r*`,
/// `(2 pi/3)(alpha/2)^{1/(alpha+1)} r^{alpha/(alpha+1)}` below.
pub fn kalpha_perimeter_floor(alpha: f64, r: f64) -> Result<f64> {
    let r_star = kalpha_r_star(alpha)?;
    if !(r > 0.0) {
        return Err(Error::invalid("r must be positive"));
    }
    Ok(if r >= r_star {
        4.0 * std::f64::consts::PI * r * r
    } else {
        kalpha_floor_coefficient(alpha) * r.powf(alpha / (alpha + 1.0))
    })
}

/// Lower bound for `J_alpha` of the ellipsoid with `d-2` unit semi-axes and
/// two of length `eps`.
pub fn jalpha_lower_ellipsoid(eps: f64, alpha: f64, d: usize) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("eps must lie in (0, 1)"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha must lie in (0, 1)"));
    }
    if d < 3 {
        return Err(Error::invalid("d must be at least 3"));
    }
    let df = d as f64;
    let w = omega(d);
    let e = (df * alpha + df - 2.0) / (df - 1.0);
    Ok(df * w.powf(1.0 + alpha) / (df * 2f64.powi(d as i32)).powf(e)
        * eps.powf((df - 2.0) * (alpha - 1.0) / (df - 1.0))
        * (1.0 - eps * eps).sqrt()
        / (2.0 / eps).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SausageBounds {
    /// `16 inf_c |K_c| / c^4`.
    pub general: f64,
    pub general_argmin: f64,
    /// Closed form for a ball body.
    pub ball: Option<f64>,
    /// Constant used for `kappa_d`, taken as the capacity of the closed unit ball.
    pub kappa_d: f64,
}

/// `kappa_d (d-2)^{d-2} / (4 (d-4)^{d-4}) eps^{d-4}` with `kappa_d = cap(B_1)`.
pub fn sausage_bound_ball(d: usize, eps: f64) -> Result<f64> {
    if d < 5 {
        return Err(Error::invalid("the sausage bounds need d >= 5"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let df = d as f64;
    Ok(unit_ball_capacity(d) * (df - 2.0).powf(df - 2.0) / (4.0 * (df - 4.0).powf(df - 4.0)) * eps.powf(df - 4.0))
}

/// The ball bound by direct minimisation of `kappa_d (a + eps)^{d-2} / a^2`.
pub fn sausage_bound_ball_numeric(d: usize, eps: f64) -> Result<(f64, f64)> {
    sausage_bound_ball(d, eps)?;
    let k = unit_ball_capacity(d);
    let (a, v) = bracketed_min(|a| k * (a + eps).powi(d as i32 - 2) / (a * a), 1e-3 * eps, 100.0 * eps, 1e-12)?;
    Ok((v, a))
}

pub fn sausage_bounds(shape: &Shape) -> Result<SausageBounds> {
    let d = shape.dim();
    if d < 5 {
        return Err(Error::invalid("the sausage bounds need d >= 5"));
    }
    if !shape.is_convex() {
        return Err(Error::unsupported("sausage bounds need a convex body"));
    }
    let q = shape.quermass()?;
    let cfg = BoundsConfig::default();
    let (lo, hi) = search_bracket(shape, &cfg);
    let (c, v) = bracketed_min(|c| q.steiner_volume(c) / c.powi(4), lo, hi, cfg.golden_tol)?;
    let ball = match shape.ball_radius() {
        Some(r) => Some(sausage_bound_ball(d, r)?),
        None => None,
    };
    Ok(SausageBounds { general: 16.0 * v, general_argmin: c, ball, kappa_d: unit_ball_capacity(d) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub value: f64,
    pub stderr: f64,
}

/// Every applicable bound for one shape, against a reference capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub shape: String,
    pub kind: String,
    pub d: usize,
    pub reference: CapacityEstimate,
    pub bounds: BTreeMap<String, BoundEntry>,
    /// `bound / reference`; absent when the reference is zero.
    pub slack: BTreeMap<String, Option<f64>>,
    pub notes: Vec<String>,
}

pub const PERIMETER_INTEGRAL: &str = "perimeter_integral";
pub const PARALLEL_VOLUME: &str = "parallel_volume";
pub const MEAN_CURVATURE: &str = "mean_curvature";
pub const P2_OVER_V: &str = "p2_over_v";
pub const FRAENKEL_REFINED: &str = "fraenkel_refined";

impl BoundReport {
    /// Bounds that fall below `reference - 3 (stderr_ref + stderr_bound)`,
    /// less a `1e-9` relative rounding allowance.
    pub fn violations(&self) -> Vec<(String, f64)> {
        let r = &self.reference;
        self.bounds
            .iter()
            .filter(|(_, b)| b.value < r.value - 3.0 * (r.stderr + b.stderr) - 1e-9 * r.value)
            .map(|(k, b)| (k.clone(), b.value))
            .collect()
    }

    pub fn dominates(&self) -> bool {
        self.violations().is_empty()
    }
}

/// Builds the report; `mc` seeds the Monte Carlo reference and asymmetry.
pub fn bound_report(id: &str, shape: &Shape, cfg: &BoundsConfig, mc: Option<MCConfig>) -> Result<BoundReport> {
    require_newtonian(shape)?;
    cfg.validate()?;
    let reference = reference_capacity(shape, mc)?;
    let mut bounds = BTreeMap::new();
    let mut notes = Vec::new();
    let pi = bound_perimeter_integral(shape, cfg)?;
    bounds.insert(PERIMETER_INTEGRAL.to_string(), BoundEntry { value: pi.value, stderr: 0.0 });
    notes.push(match cfg.tail {
        Tail::Exact => format!("perimeter integral: quadrature on [0, {:.6}] plus exact tail", pi.t_max),
        Tail::Truncated => format!("perimeter integral truncated at {:.6}; tail dropped, bound loosened", pi.t_max),
    });
    let (pv, _) = bound_parallel_volume(shape, cfg)?;
    bounds.insert(PARALLEL_VOLUME.to_string(), BoundEntry { value: pv, stderr: 0.0 });
    if shape.is_convex() {
        bounds.insert(MEAN_CURVATURE.to_string(), BoundEntry { value: bound_mean_curvature(shape)?, stderr: 0.0 });
        bounds.insert(P2_OVER_V.to_string(), BoundEntry { value: bound_p2_over_v(shape)?, stderr: 0.0 });
        if let Some(c_d) = cfg.c_d {
            let asym = if shape.is_ball() {
                asymmetry(shape, MCConfig::new(0, 1))?
            } else {
                let mc = mc.ok_or_else(|| Error::invalid("the refined bound needs a seed for the asymmetry"))?;
                asymmetry(shape, mc)?
            };
            let fb = fraenkel_refined_from(shape, c_d, asym)?;
            notes.push(format!("c_d = {c_d}, gamma_d = {}", fb.gamma_d));
            bounds.insert(FRAENKEL_REFINED.to_string(), BoundEntry { value: fb.value, stderr: fb.stderr });
        }
    }
    if reference.method == CapacityMethod::AnalyticZero {
        notes.push("polar set: capacity zero by analytic argument".to_string());
        if shape.as_segments().is_some() {
            notes.push("perimeter and volume of the infinite segment family".to_string());
        }
    }
    let slack = bounds
        .iter()
        .map(|(k, b)| (k.clone(), (reference.value > 0.0).then(|| b.value / reference.value)))
        .collect();
    Ok(BoundReport {
        shape: id.to_string(),
        kind: shape.spec().kind_name().to_string(),
        d: shape.dim(),
        reference,
        bounds,
        slack,
        notes,
    })
}
