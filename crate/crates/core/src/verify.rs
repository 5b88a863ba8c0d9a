//! Invariant suites over the built-in corpus.
//!
//! Each suite returns a list of [`Check`]s; a suite passes when every check
//! does. Monte Carlo checks allow a `3 stderr` margin.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_mean_curvature, bound_p2_over_v, bound_parallel_volume, bound_perimeter_integral, bound_report,
    fraenkel_refined_from, kalpha_bound, kalpha_perimeter_floor, BoundEntry, BoundsConfig, FRAENKEL_REFINED,
    MEAN_CURVATURE, P2_OVER_V, PERIMETER_INTEGRAL,
};
use crate::capacity::{cap_exact, cap_hitting_mc, isocapacitary_floor, reference_capacity, WosConfig};
use crate::corpus::{self, Entry};
use crate::fraenkel::{asymmetry, DEFAULT_SAMPLES};
use crate::geometry::{perimeter, Shape, ShapeSpec};
use crate::quermass::af_check;
use crate::sausage::{check_prop3, refinement_pair, SausageConfig};
use crate::torsion::{functional_from, maximiser_report, torsion, FunctionalKind, TorsionEstimate};
use crate::{CapacityEstimate, Error, MCConfig, Result};

pub const SUITES: [&str; 8] = ["ball-equalities", "af", "dominance", "theorem3", "theorem4", "prop1", "prop3", "scaling"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `value <= reference + tolerance`
    Le,
    /// `value >= reference - tolerance`
    Ge,
    /// `|value - reference| <= tolerance`
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub subject: String,
    pub quantity: String,
    pub value: f64,
    pub relation: Relation,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(subject: &str, quantity: &str, value: f64, relation: Relation, reference: f64, tolerance: f64) -> Self {
        let pass = match relation {
            Relation::Le => value <= reference + tolerance,
            Relation::Ge => value >= reference - tolerance,
            Relation::Eq => (value - reference).abs() <= tolerance,
        };
        Self {
            subject: subject.to_string(),
            quantity: quantity.to_string(),
            value,
            relation,
            reference,
            tolerance,
            pass,
        }
    }

    /// Relative agreement `|value/reference - 1| <= rel`.
    pub fn close(subject: &str, quantity: &str, value: f64, reference: f64, rel: f64) -> Self {
        Self::new(subject, quantity, value, Relation::Eq, reference, rel * reference.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn new(suite: &str, checks: Vec<Check>) -> Self {
        Self { suite: suite.to_string(), pass: checks.iter().all(|c| c.pass), checks }
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Refined-bound constants; empty skips the refined bound.
    pub c_d: Vec<f64>,
    /// `G_alpha` exponent; `None` runs `{0, 0.3, 2/d}`.
    pub alpha: Option<f64>,
    pub capacity_samples: usize,
    pub torsion_samples: usize,
    pub asymmetry_samples: usize,
    pub perimeter_samples: usize,
    pub sausage: SausageConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            c_d: Vec::new(),
            alpha: None,
            capacity_samples: 100_000,
            torsion_samples: 20_000,
            asymmetry_samples: DEFAULT_SAMPLES,
            perimeter_samples: 4_000_000,
            sausage: SausageConfig::ball(5, 0.5, 20.0, 200, 1e-3, 7),
        }
    }
}

impl VerifyOptions {
    fn capacity_mc(&self) -> MCConfig {
        MCConfig::new(self.seed, self.capacity_samples)
    }
}

pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<SuiteReport> {
    let checks = match name {
        "ball-equalities" => ball_equalities()?,
        "af" => af(opts.seed)?,
        "dominance" => dominance(&corpus::all(opts.seed), opts)?,
        "theorem3" => theorem3(opts)?,
        "theorem4" => theorem4()?,
        "prop1" => prop1(opts)?,
        "prop3" => prop3(opts)?,
        "scaling" => scaling(opts.seed)?,
        _ => return Err(Error::invalid(format!("unknown suite '{name}'; expected one of {}", SUITES.join(", ")))),
    };
    Ok(SuiteReport::new(name, checks))
}

fn build(e: &Entry) -> Result<Shape> {
    Shape::new(e.spec.clone())
}

/// Perimeter-integral, mean-curvature and `P^2/V` bounds equal `cap(B_R)`.
pub fn ball_equalities() -> Result<Vec<Check>> {
    let cfg = BoundsConfig::default();
    let mut out = Vec::new();
    for e in corpus::balls() {
        let s = build(&e)?;
        let cap = cap_exact(&s)?.value;
        out.push(Check::close(&e.id, PERIMETER_INTEGRAL, bound_perimeter_integral(&s, &cfg)?.value, cap, 1e-6));
        out.push(Check::close(&e.id, MEAN_CURVATURE, bound_mean_curvature(&s)?, cap, 1e-6));
        out.push(Check::close(&e.id, P2_OVER_V, bound_p2_over_v(&s)?, cap, 1e-6));
    }
    Ok(out)
}

/// Aleksandrov-Fenchel on every convex Quermass vector, and the unit cube vector.
pub fn af(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for e in corpus::convex(seed) {
        let q = build(&e)?.quermass()?.clone();
        let r = af_check(&q);
        out.push(Check::new(&e.id, "af_min_log_slack", r.worst_log_slack, Relation::Ge, 0.0, crate::quermass::AF_TOL));
    }
    let cube = Shape::new(ShapeSpec::cuboid(&[0.5, 0.5, 0.5]))?;
    let w = &cube.quermass()?.w;
    for (i, want) in [1.0, 2.0, PI, 4.0 * PI / 3.0].iter().enumerate() {
        out.push(Check::close("unit_cube", &format!("w{i}"), w[i], *want, 1e-6));
    }
    Ok(out)
}

/// Every bound against the reference capacity; for each `c_d` in the
/// options the refined bound is added, checked against the reference from
/// above and against the `P^2/V` bound from below.
pub fn dominance(entries: &[Entry], opts: &VerifyOptions) -> Result<Vec<Check>> {
    let rows: Vec<Result<Vec<Check>>> = entries.par_iter().map(|e| dominance_one(e, opts)).collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

fn dominance_one(e: &Entry, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let s = build(e)?;
    let mut report = bound_report(&e.id, &s, &BoundsConfig::default(), Some(opts.capacity_mc()))?;
    if s.is_convex() && !opts.c_d.is_empty() {
        let asym = asymmetry(&s, MCConfig::new(opts.seed, opts.asymmetry_samples))?;
        for &c in &opts.c_d {
            let fb = fraenkel_refined_from(&s, c, asym.clone())?;
            report
                .bounds
                .insert(format!("{FRAENKEL_REFINED}_c{c}"), BoundEntry { value: fb.value, stderr: fb.stderr });
        }
    }
    let reference = &report.reference;
    let strict = !s.is_ball() && !reference.method.is_mc() && reference.value > 0.0;
    let mut out = Vec::new();
    for (name, b) in &report.bounds {
        let tol = 3.0 * (reference.stderr + b.stderr) + 1e-9 * reference.value;
        if strict && b.stderr == 0.0 {
            out.push(Check::new(&e.id, &format!("{name}_over_reference"), b.value / reference.value, Relation::Ge, 1.0, -1e-9));
        } else {
            out.push(Check::new(&e.id, name, b.value, Relation::Ge, reference.value, tol));
        }
        if name.starts_with(FRAENKEL_REFINED) {
            out.push(Check::new(&e.id, &format!("{name}_vs_{P2_OVER_V}"), b.value, Relation::Le, report.bounds[P2_OVER_V].value, 0.0));
        }
    }
    Ok(out)
}

fn alphas(opts: &VerifyOptions, d: usize) -> Vec<f64> {
    match opts.alpha {
        Some(a) => vec![a],
        None => vec![0.0, 0.3, 2.0 / d as f64],
    }
}

/// `G_alpha(K) <= G_alpha(B_1)` on the three-dimensional balls, ellipsoids and boxes.
pub fn theorem3(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut entries: Vec<Entry> = corpus::balls().into_iter().filter(|e| e.spec.dim() == 3).collect();
    entries.extend(corpus::ellipsoids(opts.seed));
    entries.extend(corpus::boxes(opts.seed));
    let rows: Vec<Result<Vec<Check>>> = entries
        .par_iter()
        .map(|e| {
            let s = build(e)?;
            let (t, cap) = torsion_and_capacity(&s, opts)?;
            let mut out = Vec::new();
            for alpha in alphas(opts, s.dim()) {
                let g = functional_from(FunctionalKind::GAlpha, alpha, &s, Some(&t), &cap)?;
                let r = maximiser_report(s.dim(), &g)?;
                out.push(Check::new(&e.id, &format!("g_alpha({alpha})"), r.value, Relation::Le, r.ball_value, 3.0 * r.stderr + 1e-12 * r.ball_value));
            }
            Ok(out)
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    let g0 = crate::torsion::g_alpha_ball(3, 0.0)?;
    out.push(Check::close("ball_d3_r1", "g_alpha(0)", g0, 1.0 / (180.0 * PI), 1e-9));
    Ok(out)
}

fn torsion_and_capacity(s: &Shape, opts: &VerifyOptions) -> Result<(TorsionEstimate, CapacityEstimate)> {
    let t = torsion(s, Some(MCConfig::new(opts.seed, opts.torsion_samples)))?;
    let cap = reference_capacity(s, Some(opts.capacity_mc()))?;
    Ok((t, cap))
}

/// Planar `T cap / P^5` is largest on the disc.
pub fn theorem4() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let disc = 1.0 / (256.0 * PI.powi(4));
    for a in [[1.0, 1.0], [2.0, 1.0], [4.0, 1.0]] {
        let s = Shape::new(ShapeSpec::ellipsoid(&a))?;
        let r = crate::torsion::check_theorem4(&s)?;
        let id = format!("ellipse_{}_{}", a[0], a[1]);
        out.push(Check::new(&id, "t_cap_over_p5", r.value, Relation::Le, disc, 1e-9 * disc));
        out.push(Check::new(&id, "cap_over_p", r.cap_over_p, Relation::Le, 0.5 / PI, 1e-9 * 0.5 / PI));
    }
    let s = Shape::new(ShapeSpec::ball(2, 1.0))?;
    out.push(Check::close("disc", "t_cap_over_p5", crate::torsion::check_theorem4(&s)?.value, disc, 1e-9));
    Ok(out)
}

pub const PROP1_RADII: [f64; 3] = [0.01, 0.05, 0.2];

/// The segment-family bound, the perimeter floor along the parallel sets and
/// the perimeter integral.
pub fn prop1(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = vec![Check::close("segments_alpha1", "kalpha_bound", kalpha_bound(1.0)?, 2.0 * PI / 7.0, 1e-12)];
    let k1 = Shape::new(ShapeSpec::segment_family(1.0, corpus::SEGMENT_TRUNCATION))?;
    for (i, &r) in PROP1_RADII.iter().enumerate() {
        let p = perimeter(&k1, r, Some(MCConfig::new(opts.seed.wrapping_add(i as u64), opts.perimeter_samples)))?;
        let floor = kalpha_perimeter_floor(1.0, r)?;
        out.push(Check::new("segments_alpha1", &format!("perimeter(r={r})"), p.value, Relation::Ge, floor, 3.0 * p.stderr));
    }
    let cfg = BoundsConfig::default();
    for e in corpus::segment_families() {
        let s = build(&e)?;
        let alpha = s.as_segments().map(|f| f.alpha).unwrap_or(1.0);
        let v = bound_perimeter_integral(&s, &cfg)?.value;
        out.push(Check::new(&e.id, PERIMETER_INTEGRAL, v, Relation::Ge, kalpha_bound(alpha)?, 0.0));
        out.push(Check::close(&e.id, "capacity", cap_exact(&s)?.value, 0.0, 0.0));
    }
    Ok(out)
}

/// Sausage growth rate in `d >= 5` against the capacity and the upper bounds,
/// plus stability under halving `dt`.
pub fn prop3(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let (_, fine, rep) = refinement_pair(&opts.sausage)?;
    let p3 = check_prop3(&fine)?;
    let id = format!("sausage_d{}", opts.sausage.d);
    let tightest = p3.bounds.ball.map_or(p3.bounds.general, |b| b.min(p3.bounds.general));
    Ok(vec![
        Check::new(&id, "slope_vs_bound", p3.slope, Relation::Le, tightest, 3.0 * p3.stderr),
        Check::new(&id, "slope_vs_capacity", p3.slope, Relation::Ge, p3.capacity, 3.0 * p3.stderr),
        Check::close(&id, "slope_rel_capacity", p3.slope, p3.capacity, 0.1),
        Check::new(&id, "dt_halving_change", rep.change.abs(), Relation::Le, 0.0, 2.0 * rep.coarse.stderr.max(rep.fine.stderr)),
    ])
}

const SCALES: [f64; 3] = [0.5, 2.0, 3.7];

/// Scaling of capacity, torsion, perimeter, the bounds and `G_alpha`.
pub fn scaling(seed: u64) -> Result<Vec<Check>> {
    let cfg = BoundsConfig::default();
    let mut entries = corpus::balls();
    entries.extend(corpus::ellipsoids(seed).into_iter().take(5));
    entries.extend(corpus::boxes(seed).into_iter().take(3));
    let mut out = Vec::new();
    for e in &entries {
        let s = build(e)?;
        let d = s.dim() as i32;
        let closed = s.ellipsoid_axes().is_some();
        let cap = if closed { Some(reference_capacity(&s, None)?.value) } else { None };
        let t0 = if closed { Some(torsion(&s, None)?.value) } else { None };
        let p0 = s.perimeter0()?;
        let b0 = [bound_mean_curvature(&s)?, bound_p2_over_v(&s)?, bound_perimeter_integral(&s, &cfg)?.value, bound_parallel_volume(&s, &cfg)?.0];
        for t in SCALES {
            let st = Shape::new(e.spec.scaled(t)?)?;
            let sub = format!("{}_x{t}", e.id);
            if let (Some(c), Some(tt)) = (cap, t0) {
                let ct = reference_capacity(&st, None)?.value;
                out.push(Check::close(&sub, "capacity_scaling", ct, c * t.powi(d - 2), 1e-8));
                let tor = torsion(&st, None)?.value;
                out.push(Check::close(&sub, "torsion_scaling", tor, tt * t.powi(d + 2), 1e-12));
                for alpha in [0.0, 0.3, 2.0 / d as f64] {
                    let g = |sh: &Shape| -> Result<f64> {
                        let te = torsion(sh, None)?;
                        let ce = reference_capacity(sh, None)?;
                        Ok(functional_from(FunctionalKind::GAlpha, alpha, sh, Some(&te), &ce)?.value)
                    };
                    out.push(Check::close(&sub, &format!("g_alpha({alpha})_invariance"), g(&st)?, g(&s)?, 1e-8));
                }
            }
            out.push(Check::close(&sub, "volume_scaling", st.volume(), s.volume() * t.powi(d), 1e-12));
            let ptol = if s.is_ball() { 1e-12 } else { 1e-9 };
            out.push(Check::close(&sub, "perimeter_scaling", st.perimeter0()?, p0 * t.powi(d - 1), ptol));
            let bt = [bound_mean_curvature(&st)?, bound_p2_over_v(&st)?, bound_perimeter_integral(&st, &cfg)?.value, bound_parallel_volume(&st, &cfg)?.0];
            for (name, (a, b)) in ["mean_curvature", "p2_over_v", "perimeter_integral", "parallel_volume"].iter().zip(bt.iter().zip(&b0)) {
                let tol = if *name == "parallel_volume" { 1e-7 } else { 1e-8 };
                out.push(Check::close(&sub, &format!("{name}_scaling"), *a, b * t.powi(d - 2), tol));
            }
        }
    }
    Ok(out)
}

/// Monotonicity of capacity and torsion along `inscribed ball ⊂ K ⊂
/// circumscribed ball`, and the isocapacitary floor on every estimate.
pub fn properties(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut entries = corpus::ellipsoids(opts.seed);
    entries.truncate(5);
    entries.extend(corpus::boxes(opts.seed));
    let rows: Vec<Result<Vec<Check>>> = entries
        .par_iter()
        .map(|e| {
            let s = build(e)?;
            let centred = |r: f64| Shape::new(ShapeSpec::Ball { dim: s.dim(), radius: r, center: Some(s.center()) });
            let inner = centred(s.inradius())?;
            let outer = centred(s.circumradius())?;
            let (t, cap) = torsion_and_capacity(&s, opts)?;
            let mut out = Vec::new();
            let tol_c = 3.0 * cap.stderr;
            let tol_t = 3.0 * t.stderr;
            out.push(Check::new(&e.id, "capacity_above_inscribed", cap.value, Relation::Ge, cap_exact(&inner)?.value, tol_c));
            out.push(Check::new(&e.id, "capacity_below_circumscribed", cap.value, Relation::Le, cap_exact(&outer)?.value, tol_c));
            out.push(Check::new(&e.id, "torsion_above_inscribed", t.value, Relation::Ge, torsion(&inner, None)?.value, tol_t));
            out.push(Check::new(&e.id, "torsion_below_circumscribed", t.value, Relation::Le, torsion(&outer, None)?.value, tol_t));
            out.push(Check::new(&e.id, "isocapacitary_floor", cap.value, Relation::Ge, isocapacitary_floor(&s), tol_c));
            if !cap.method.is_mc() {
                let wos = cap_hitting_mc(&s, &WosConfig::new(opts.capacity_mc()))?;
                out.push(Check::new(&e.id, "isocapacitary_floor_mc", wos.value, Relation::Ge, isocapacitary_floor(&s), 3.0 * wos.stderr));
                out.push(Check::new(&e.id, "mc_vs_quadrature", wos.value, Relation::Eq, cap.value, 3.0 * wos.stderr));
            }
            Ok(out)
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    for e in corpus::balls() {
        let s = build(&e)?;
        out.push(Check::close(&e.id, "isocapacitary_floor_equality", cap_exact(&s)?.value, isocapacitary_floor(&s), 1e-12));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(run_suite("nope", &VerifyOptions::default()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn fast_suites_pass() {
        for name in ["ball-equalities", "af", "theorem4"] {
            let r = run_suite(name, &VerifyOptions::default()).unwrap();
            assert!(r.pass, "{name}: {:?}", r.failures());
        }
    }

    #[test]
    fn relations() {
        assert!(Check::new("s", "q", 1.0, Relation::Le, 0.9, 0.1).pass);
        assert!(!Check::new("s", "q", 1.0, Relation::Ge, 1.2, 0.1).pass);
        assert!(Check::close("s", "q", 1.0 + 1e-10, 1.0, 1e-9).pass);
    }
}
