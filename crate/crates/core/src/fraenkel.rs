//! Fraenkel asymmetry `A(K) = min_c |K Δ B(c)| / |B|` over balls with
//! `|B| = |K|`.
//!
//! `|K Δ B(c)| / |B| = 2 (1 - |K ∩ B(c)| / |B|)`, and the fraction is
//! estimated on one fixed sample set of the unit ball (closed under
//! coordinate reflections) moved to `c`, so the objective is a deterministic
//! function of `c` for a given seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::mc::{stream, unit_ball_point, MCConfig, Purpose};
use crate::special::omega;

pub const DEFAULT_SAMPLES: usize = 200_000;
pub const VALUE_TOL: f64 = 1e-4;
const STARTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryResult {
    pub value: f64,
    pub center: Vec<f64>,
    pub stderr: f64,
    pub evaluations: usize,
}

/// A body seen through membership only.
pub struct Body<'a> {
    pub dim: usize,
    pub volume: f64,
    pub center: Vec<f64>,
    pub inradius: f64,
    pub contains: Box<dyn Fn(&[f64]) -> bool + Sync + 'a>,
}

impl<'a> Body<'a> {
    pub fn of(shape: &'a Shape) -> Self {
        Self {
            dim: shape.dim(),
            volume: shape.volume(),
            center: shape.center(),
            inradius: shape.inradius(),
            contains: Box::new(move |x| shape.contains(x)),
        }
    }

    /// The parallel body `K_r` of a convex shape.
    pub fn parallel(shape: &'a Shape, r: f64) -> Result<Self> {
        let q = shape.quermass()?;
        Ok(Self {
            dim: shape.dim(),
            volume: q.steiner_volume(r),
            center: shape.center(),
            inradius: shape.inradius() + r,
            contains: Box::new(move |x| shape.distance(x) <= r),
        })
    }
}

struct Objective<'b, 'a> {
    body: &'b Body<'a>,
    radius: f64,
    /// Flattened unit-ball samples.
    points: Vec<f64>,
    base: usize,
}

impl Objective<'_, '_> {
    fn fraction(&self, c: &[f64]) -> f64 {
        let d = self.body.dim;
        let n = self.points.len() / d;
        let inside: usize = self
            .points
            .par_chunks(d * 4096)
            .map(|chunk| {
                let mut x = vec![0.0; d];
                chunk
                    .chunks(d)
                    .filter(|u| {
                        for j in 0..d {
                            x[j] = c[j] + self.radius * u[j];
                        }
                        (self.body.contains)(&x)
                    })
                    .count()
            })
            .sum();
        inside as f64 / n as f64
    }

    fn value(&self, c: &[f64]) -> f64 {
        2.0 * (1.0 - self.fraction(c))
    }

    /// Standard error of `value(a) - value(b)` on the shared samples. The
    /// reflected copies of one base sample are correlated, so differences
    /// are summed per base sample before squaring.
    fn paired_stderr(&self, a: &[f64], b: &[f64]) -> f64 {
        let d = self.body.dim;
        let n = self.points.len() / d;
        let group = n / self.base;
        let mut xa = vec![0.0; d];
        let mut xb = vec![0.0; d];
        let mut sum_sq = 0.0;
        for g in self.points.chunks(d * group) {
            let mut diff = 0i64;
            for u in g.chunks(d) {
                for j in 0..d {
                    xa[j] = a[j] + self.radius * u[j];
                    xb[j] = b[j] + self.radius * u[j];
                }
                diff += (self.body.contains)(&xa) as i64 - (self.body.contains)(&xb) as i64;
            }
            sum_sq += (diff * diff) as f64;
        }
        2.0 * sum_sq.sqrt() / n as f64
    }
}

fn reflected_samples(d: usize, samples: usize, seed: u64) -> (Vec<f64>, usize) {
    let copies = 1usize << d;
    let base = samples.div_ceil(copies).max(1);
    let mut rng = stream(seed, Purpose::Asymmetry, 0);
    let mut pts = Vec::with_capacity(base * copies * d);
    for _ in 0..base {
        let u = unit_ball_point(&mut rng, d);
        for mask in 0..copies {
            pts.extend(u.iter().enumerate().map(|(j, v)| if mask >> j & 1 == 1 { -v } else { *v }));
        }
    }
    (pts, base)
}

/// Minimises `f` from `x0` with a Nelder–Mead simplex of initial edge `step`.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, ftol: f64, max_evals: usize) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;
    let min_size = 1e-6 * step;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (spread <= ftol && size <= 1e-3 * step) || size <= min_size {
            break;
        }
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = along(1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = if fr < simplex[n].1 { along(0.5) } else { along(-0.5) };
            let fc = f(&xc);
            evals += 1;
            if fc < fr.min(simplex[n].1) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (x, fx) in simplex.iter_mut().skip(1) {
                    for j in 0..n {
                        x[j] = best[j] + 0.5 * (x[j] - best[j]);
                    }
                    *fx = f(x);
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, evals)
}

/// Fraenkel asymmetry of a body given by membership.
pub fn asymmetry_of(body: &Body<'_>, cfg: MCConfig) -> Result<AsymmetryResult> {
    if !(body.volume > 0.0) {
        return Err(Error::invalid("asymmetry needs a body of positive volume"));
    }
    if cfg.samples == 0 {
        return Err(Error::invalid("asymmetry needs at least one sample"));
    }
    let d = body.dim;
    let (points, base) = reflected_samples(d, cfg.samples, cfg.seed);
    let obj = Objective { body, radius: (body.volume / omega(d)).powf(1.0 / d as f64), points, base };
    let f = |c: &[f64]| obj.value(c);
    let step = 0.5 * body.inradius.max(1e-3 * obj.radius);
    let at_center = f(&body.center);
    let mut best = (body.center.clone(), at_center);
    let mut evals = 1;
    let mut rng = stream(cfg.seed, Purpose::Asymmetry, 1);
    for s in 0..STARTS {
        let start: Vec<f64> = if s == 0 {
            body.center.clone()
        } else {
            let u = crate::mc::unit_vector(&mut rng, d);
            body.center.iter().zip(&u).map(|(c, v)| c + step * v).collect()
        };
        let (x, fx, n) = nelder_mead(&f, &start, step, VALUE_TOL, 200 * d);
        evals += n;
        if fx < best.1 {
            best = (x, fx);
        }
    }
    // keep the reference centre unless the improvement is significant
    if at_center - best.1 < 3.0 * obj.paired_stderr(&best.0, &body.center) {
        best = (body.center.clone(), at_center);
    }
    let frac = 1.0 - 0.5 * best.1;
    let stderr = 2.0 * (frac * (1.0 - frac) / obj.base as f64).sqrt();
    Ok(AsymmetryResult { value: best.1.max(0.0), center: best.0, stderr, evaluations: evals })
}

pub fn asymmetry(shape: &Shape, cfg: MCConfig) -> Result<AsymmetryResult> {
    if shape.is_ball() {
        return Ok(AsymmetryResult { value: 0.0, center: shape.center(), stderr: 0.0, evaluations: 0 });
    }
    asymmetry_of(&Body::of(shape), cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub r: f64,
    pub asymmetry: f64,
    pub difference: f64,
    /// `4 (|K_r| - |K|) / |K|`.
    pub bound: f64,
    pub stderr: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub base: AsymmetryResult,
    pub rows: Vec<ContinuityRow>,
    pub pass: bool,
}

/// Checks `|A(K_r) - A(K)| <= 4 (|K_r| - |K|)/|K| + 6 stderr` for each `r`.
pub fn asymmetry_continuity_check(shape: &Shape, r_list: &[f64], cfg: MCConfig) -> Result<ContinuityReport> {
    if !shape.is_convex() {
        return Err(Error::unsupported("continuity check needs a convex shape"));
    }
    if r_list.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::invalid("parallel radii must be positive"));
    }
    let base = asymmetry(shape, cfg)?;
    let vol = shape.volume();
    let mut rows = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let a = if shape.is_ball() {
            AsymmetryResult { value: 0.0, center: shape.center(), stderr: 0.0, evaluations: 0 }
        } else {
            asymmetry_of(&Body::parallel(shape, r)?, cfg)?
        };
        let bound = 4.0 * (shape.quermass()?.steiner_volume(r) - vol) / vol;
        let stderr = a.stderr.hypot(base.stderr);
        let difference = (a.value - base.value).abs();
        rows.push(ContinuityRow { r, asymmetry: a.value, difference, bound, stderr, pass: difference <= bound + 6.0 * stderr });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(ContinuityReport { base, rows, pass })
}

/// `P |K|^{-(d-1)/d} / (d omega_d^{1/d}) - 1`.
pub fn isoperimetric_deficit(shape: &Shape) -> Result<f64> {
    let d = shape.dim() as f64;
    let p = shape.perimeter0()?;
    Ok(p * shape.volume().powf(-(d - 1.0) / d) / (d * omega(shape.dim()).powf(1.0 / d)) - 1.0)
}
