//! Wiener sausage Monte Carlo with generator `Δ` (per-coordinate variance
//! `2 dt` per step).
//!
//! For a ball body the discrete sausage is the union of capsules around the
//! path segments. Its volume is estimated with a stratified "first owner"
//! sampler: every capsule `A_i` draws points uniformly and a point counts
//! only when no earlier capsule contains it, so
//! `|W| = sum_i |A_i \ (A_0 ∪ … ∪ A_{i-1})|` and the estimates for every
//! time on the grid come from one sample set.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::bounds::{sausage_bounds, SausageBounds};
use crate::capacity::{cap_exact, cap_from_sausage};
use crate::error::{Error, Result};
use crate::geometry::{Shape, ShapeSpec};
use crate::mc::{stream, unit_ball_point, unit_vector, Purpose, Rng};
use crate::special::omega;
use crate::Estimate;

pub const DEFAULT_BURN_IN: f64 = 0.2;
pub const BOOTSTRAP_RESAMPLES: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SausageConfig {
    pub d: usize,
    pub body: ShapeSpec,
    pub t_grid: Vec<f64>,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// Uniform draws per capsule (ball bodies).
    pub samples_per_capsule: usize,
    /// Hit-or-miss draws per path (non-ball bodies).
    pub generic_samples: usize,
    pub burn_in: f64,
    /// Number of Brownian-bridge halvings applied to the simulated paths.
    pub refinements: u32,
    pub membership: Membership,
}

impl SausageConfig {
    /// Ball body of radius `eps` at the origin with grid `{0.2, …, 1.0} t_max`.
    pub fn ball(d: usize, eps: f64, t_max: f64, n_paths: usize, dt: f64, seed: u64) -> Self {
        Self {
            d,
            body: ShapeSpec::ball(d, eps),
            t_grid: default_grid(t_max),
            n_paths,
            dt,
            seed,
            samples_per_capsule: 1,
            generic_samples: 20_000,
            burn_in: DEFAULT_BURN_IN,
            refinements: 0,
            membership: Membership::Bridge,
        }
    }

    pub fn refined(&self) -> Self {
        Self { refinements: self.refinements + 1, ..self.clone() }
    }

    pub fn t_max(&self) -> f64 {
        self.t_grid.last().copied().unwrap_or(0.0)
    }

    /// Time step after the bridge refinements.
    pub fn effective_dt(&self) -> f64 {
        self.dt / 2f64.powi(self.refinements as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 3 {
            return Err(Error::invalid("sausage estimation needs d >= 3"));
        }
        if self.body.dim() != self.d {
            return Err(Error::invalid("body dimension differs from d"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::invalid("dt must be positive"));
        }
        if self.t_grid.is_empty() || !(self.t_grid[0] > 0.0) {
            return Err(Error::invalid("time grid must be non-empty and positive"));
        }
        if self.t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("time grid must be strictly increasing"));
        }
        if self.dt > self.t_grid[0] / 100.0 * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "dt = {} exceeds min(t_grid)/100 = {}",
                self.dt,
                self.t_grid[0] / 100.0
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::invalid("need at least one path"));
        }
        if self.samples_per_capsule == 0 || self.generic_samples == 0 {
            return Err(Error::invalid("need at least one volume sample"));
        }
        if !(0.0..1.0).contains(&self.burn_in) {
            return Err(Error::invalid("burn-in fraction must lie in [0, 1)"));
        }
        Shape::new(self.body.clone())?;
        Ok(())
    }
}

pub fn default_grid(t_max: f64) -> Vec<f64> {
    (1..=5).map(|k| 0.2 * k as f64 * t_max).collect()
}

/// Discrete paths started at the origin, each stored as `n_steps + 1`
/// points of dimension `d`, flattened.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub d: usize,
    pub dt: f64,
    pub paths: Vec<Vec<f64>>,
}

impl PathSet {
    pub fn n_steps(&self) -> usize {
        self.paths.first().map_or(0, |p| p.len() / self.d - 1)
    }

    pub fn point(&self, path: usize, k: usize) -> &[f64] {
        &self.paths[path][k * self.d..(k + 1) * self.d]
    }
}

fn simulate_path(seed: u64, d: usize, dt: f64, n_steps: usize, id: usize) -> Vec<f64> {
    let mut rng = stream(seed, Purpose::Paths, id as u64);
    let sd = (2.0 * dt).sqrt();
    let mut out = vec![0.0; (n_steps + 1) * d];
    for k in 1..=n_steps {
        for j in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            out[k * d + j] = out[(k - 1) * d + j] + sd * z;
        }
    }
    out
}

/// Inserts Brownian-bridge midpoints: the midpoint of a step of length `dt`
/// has per-coordinate variance `dt / 2` about the chord midpoint.
pub fn bridge_refine(path: &[f64], d: usize, dt: f64, rng: &mut Rng) -> Vec<f64> {
    let n = path.len() / d - 1;
    let sd = (0.5 * dt).sqrt();
    let mut out = Vec::with_capacity((2 * n + 1) * d);
    out.extend_from_slice(&path[..d]);
    for k in 0..n {
        for j in 0..d {
            let z: f64 = StandardNormal.sample(rng);
            out.push(0.5 * (path[k * d + j] + path[(k + 1) * d + j]) + sd * z);
        }
        out.extend_from_slice(&path[(k + 1) * d..(k + 2) * d]);
    }
    out
}

fn build_path(cfg: &SausageConfig, id: usize) -> Vec<f64> {
    let n_steps = (cfg.t_max() / cfg.dt).round() as usize;
    let mut path = simulate_path(cfg.seed, cfg.d, cfg.dt, n_steps, id);
    let mut dt = cfg.dt;
    for level in 0..cfg.refinements {
        let mut rng = stream(cfg.seed, Purpose::Refine, ((level as u64) << 24) ^ id as u64);
        path = bridge_refine(&path, cfg.d, dt, &mut rng);
        dt *= 0.5;
    }
    path
}

/// `n_paths` independent paths on `[0, t_max]`, refined as configured.
pub fn simulate_paths(cfg: &SausageConfig) -> Result<PathSet> {
    cfg.validate()?;
    let paths = (0..cfg.n_paths).into_par_iter().map(|i| build_path(cfg, i)).collect();
    Ok(PathSet { d: cfg.d, dt: cfg.effective_dt(), paths })
}

fn seg_dist2(x: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let mut uu = 0.0;
    let mut wu = 0.0;
    for j in 0..x.len() {
        let u = q[j] - p[j];
        uu += u * u;
        wu += (x[j] - p[j]) * u;
    }
    let s = if uu > 0.0 { (wu / uu).clamp(0.0, 1.0) } else { 0.0 };
    (0..x.len()).map(|j| (x[j] - p[j] - s * (q[j] - p[j])).powi(2)).sum()
}

struct Grid {
    h: f64,
    cells: FxHashMap<u64, Vec<u32>>,
}

impl Grid {
    fn key(idx: &[i64]) -> u64 {
        idx.iter().fold(0xcbf2_9ce4_8422_2325u64, |k, &i| (k ^ i as u64).wrapping_mul(0x0100_0000_01b3))
    }

    fn cell_of(&self, x: &[f64]) -> u64 {
        let idx: Vec<i64> = x.iter().map(|v| (v / self.h).floor() as i64).collect();
        Self::key(&idx)
    }

    fn build(path: &[f64], d: usize, eps: f64) -> Self {
        let n = path.len() / d - 1;
        let mut max_len = 0.0f64;
        for k in 0..n {
            max_len = max_len.max(seg_dist2(&path[(k + 1) * d..(k + 2) * d], &path[k * d..(k + 1) * d], &path[k * d..(k + 1) * d]).sqrt());
        }
        // (m + 1)^d cells per capsule at most
        let m = (((64f64).powf(1.0 / d as f64)).floor() as usize).saturating_sub(1).max(1);
        let h = (2.0 * eps + max_len) / m as f64;
        let mut grid = Grid { h, cells: FxHashMap::default() };
        let mut lo = vec![0i64; d];
        let mut hi = vec![0i64; d];
        let mut idx = vec![0i64; d];
        for k in 0..n {
            let p = &path[k * d..(k + 1) * d];
            let q = &path[(k + 1) * d..(k + 2) * d];
            for j in 0..d {
                lo[j] = ((p[j].min(q[j]) - eps) / h).floor() as i64;
                hi[j] = ((p[j].max(q[j]) + eps) / h).floor() as i64;
            }
            idx.copy_from_slice(&lo);
            'cells: loop {
                let list = grid.cells.entry(Self::key(&idx)).or_default();
                if list.last() != Some(&(k as u32)) {
                    list.push(k as u32);
                }
                for j in 0..d {
                    if idx[j] < hi[j] {
                        idx[j] += 1;
                        continue 'cells;
                    }
                    idx[j] = lo[j];
                }
                break;
            }
        }
        grid
    }
}

/// Uniform point in the capsule of radius `eps` around segment `[p, q]`.
fn capsule_point(rng: &mut Rng, p: &[f64], q: &[f64], eps: f64, cyl_frac: f64) -> Vec<f64> {
    let d = p.len();
    let u: Vec<f64> = p.iter().zip(q).map(|(a, b)| b - a).collect();
    let len = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if len > 0.0 && rng.random::<f64>() < cyl_frac {
        let axis: Vec<f64> = u.iter().map(|v| v / len).collect();
        let mut w = unit_vector(rng, d);
        let dot: f64 = w.iter().zip(&axis).map(|(a, b)| a * b).sum();
        for j in 0..d {
            w[j] -= dot * axis[j];
        }
        let wn = w.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let rho = eps * rng.random::<f64>().powf(1.0 / (d - 1) as f64) / wn;
        let s: f64 = rng.random();
        (0..d).map(|j| p[j] + s * u[j] + rho * w[j]).collect()
    } else {
        let b = unit_ball_point(rng, d);
        let side: f64 = b.iter().zip(&u).map(|(a, c)| a * c).sum();
        let base = if side >= 0.0 { q } else { p };
        (0..d).map(|j| base[j] + eps * b[j]).collect()
    }
}

/// How a sample point is decided to lie in the sausage of one path step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    /// Within `eps` of the straight segment between grid points.
    Capsule,
    /// Probability that the Brownian bridge between the grid points enters
    /// `B(x, eps)`, from the tangent half-space `exp(-a b / dt)`.
    Bridge,
}

/// Half-space width, in units of `sqrt(dt)`, beyond which a bridge
/// excursion is ignored (`exp(-36)`).
const BRIDGE_REACH: f64 = 6.0;

fn step_cover(x: &[f64], p: &[f64], q: &[f64], eps: f64, bridge_dt: Option<f64>) -> f64 {
    let d2 = seg_dist2(x, p, q);
    if d2 <= eps * eps {
        return 1.0;
    }
    let Some(dt) = bridge_dt else { return 0.0 };
    let dist = d2.sqrt();
    if dist - eps > BRIDGE_REACH * dt.sqrt() {
        return 0.0;
    }
    // signed distances of the endpoints to the tangent plane facing the chord
    let mut uu = 0.0;
    let mut wu = 0.0;
    for j in 0..x.len() {
        let u = q[j] - p[j];
        uu += u * u;
        wu += (x[j] - p[j]) * u;
    }
    let s = if uu > 0.0 { (wu / uu).clamp(0.0, 1.0) } else { 0.0 };
    let (mut a, mut b) = (0.0, 0.0);
    for j in 0..x.len() {
        let n = (p[j] + s * (q[j] - p[j]) - x[j]) / dist;
        a += (p[j] - x[j]) * n;
        b += (q[j] - x[j]) * n;
    }
    (-(a - eps) * (b - eps) / dt).exp()
}

/// Volumes of the ball-body sausage of one path at step counts `ks`, with
/// a conservative standard error for each. `bridge_dt` selects
/// [`Membership::Bridge`] with that time step; `None` is
/// [`Membership::Capsule`].
pub fn capsule_volumes(path: &[f64], d: usize, eps: f64, ks: &[usize], m: usize, bridge_dt: Option<f64>, rng: &mut Rng) -> Vec<Estimate> {
    let n = path.len() / d - 1;
    let reach = eps + bridge_dt.map_or(0.0, |dt| BRIDGE_REACH * dt.sqrt());
    let ball = omega(d) * eps.powi(d as i32);
    let cap_ball = omega(d) * reach.powi(d as i32);
    let lateral = omega(d - 1) * reach.powi(d as i32 - 1);
    let grid = Grid::build(path, d, reach);
    let k_max = ks.iter().copied().max().unwrap_or(0).min(n);
    // per step: |A_i| * mean weight, and |A_i|^2 * mean weight / m
    let mut sum = vec![0.0; k_max + 1];
    let mut var = vec![0.0; k_max + 1];
    for i in 0..k_max {
        let p = &path[i * d..(i + 1) * d];
        let q = &path[(i + 1) * d..(i + 2) * d];
        let len = seg_dist2(q, p, p).sqrt();
        let vol = cap_ball + lateral * len;
        let cyl_frac = lateral * len / vol;
        let mut total = 0.0;
        for _ in 0..m {
            let x = capsule_point(rng, p, q, reach, cyl_frac);
            let mut w = step_cover(&x, p, q, eps, bridge_dt);
            if w == 0.0 {
                continue;
            }
            if let Some(list) = grid.cells.get(&grid.cell_of(&x)) {
                let end = list.partition_point(|&j| (j as usize) < i);
                for &j in list[..end].iter().rev() {
                    let j = j as usize;
                    let c = step_cover(&x, &path[j * d..(j + 1) * d], &path[(j + 1) * d..(j + 2) * d], eps, bridge_dt);
                    w *= 1.0 - c;
                    if w == 0.0 {
                        break;
                    }
                }
            }
            total += w;
        }
        let f = total / m as f64;
        sum[i + 1] = sum[i] + vol * f;
        var[i + 1] = var[i] + vol * vol * f / m as f64;
    }
    ks.iter()
        .map(|&k| {
            let k = k.min(k_max);
            if k == 0 {
                Estimate::exact(ball)
            } else {
                Estimate::mc(sum[k], var[k].sqrt())
            }
        })
        .collect()
}

/// Hit-or-miss volumes of `∪_{j <= k} (β_j + K)` for a general body,
/// testing membership at the path vertices only.
pub fn generic_volumes(path: &[f64], d: usize, body: &Shape, ks: &[usize], samples: usize, rng: &mut Rng) -> Result<Vec<Estimate>> {
    let n = path.len() / d - 1;
    let k_max = ks.iter().copied().max().unwrap_or(0).min(n);
    let (blo, bhi) = body.bounding_box();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for k in 0..=k_max {
        for j in 0..d {
            lo[j] = lo[j].min(path[k * d + j] + blo[j]);
            hi[j] = hi[j].max(path[k * d + j] + bhi[j]);
        }
    }
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    if !(box_vol > 0.0) {
        return Err(Error::invalid("degenerate bounding box for sausage sampling"));
    }
    let mut first = vec![0usize; k_max + 2];
    let mut y = vec![0.0; d];
    for _ in 0..samples {
        let x: Vec<f64> = (0..d).map(|j| lo[j] + (hi[j] - lo[j]) * rng.random::<f64>()).collect();
        let owner = (0..=k_max).find(|&k| {
            for j in 0..d {
                y[j] = x[j] - path[k * d + j];
            }
            body.contains(&y)
        });
        first[owner.unwrap_or(k_max + 1)] += 1;
    }
    let nf = samples as f64;
    Ok(ks
        .iter()
        .map(|&k| {
            let hits: usize = first[..=k.min(k_max)].iter().sum();
            let p = hits as f64 / nf;
            Estimate::mc(box_vol * p, box_vol * (p * (1.0 - p) / nf).sqrt())
        })
        .collect())
}

/// Per-time volumes of every path in `paths` at the times `ts`, using the
/// capsule estimator for ball bodies and the vertex test otherwise. Returns
/// the across-path mean with its standard error.
pub fn sausage_volume(paths: &PathSet, body: &Shape, ts: &[f64], cfg: &SausageConfig) -> Result<Vec<Estimate>> {
    let per_path = path_volumes(paths, body, ts, cfg)?;
    Ok(mean_over_paths(&per_path))
}

fn path_volumes(paths: &PathSet, body: &Shape, ts: &[f64], cfg: &SausageConfig) -> Result<Vec<Vec<Estimate>>> {
    if body.dim() != paths.d {
        return Err(Error::invalid("body dimension differs from the paths"));
    }
    let ks: Vec<usize> = ts.iter().map(|t| (t / paths.dt).round() as usize).collect();
    paths
        .paths
        .par_iter()
        .enumerate()
        .map(|(i, p)| volumes_of(p, paths.d, body, &ks, cfg, i))
        .collect()
}

fn volumes_of(path: &[f64], d: usize, body: &Shape, ks: &[usize], cfg: &SausageConfig, id: usize) -> Result<Vec<Estimate>> {
    let mut rng = stream(cfg.seed, Purpose::SausageVolume, ((cfg.refinements as u64) << 32) ^ id as u64);
    match (body.ball_radius(), body.center().iter().all(|c| *c == 0.0)) {
        (Some(eps), true) => {
            let bridge = (cfg.membership == Membership::Bridge).then(|| cfg.effective_dt());
            Ok(capsule_volumes(path, d, eps, ks, cfg.samples_per_capsule, bridge, &mut rng))
        }
        _ => generic_volumes(path, d, body, ks, cfg.generic_samples, &mut rng),
    }
}

fn mean_over_paths(per_path: &[Vec<Estimate>]) -> Vec<Estimate> {
    let n = per_path.len() as f64;
    (0..per_path.first().map_or(0, Vec::len))
        .map(|j| {
            let vals: Vec<f64> = per_path.iter().map(|v| v[j].value).collect();
            let mean = vals.iter().sum::<f64>() / n;
            let var = if n > 1.0 { vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            Estimate::mc(mean, (var / n).sqrt())
        })
        .collect()
}

/// A completed experiment: configuration and per-path, per-time volumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SausageRun {
    pub d: usize,
    pub body: ShapeSpec,
    pub t_grid: Vec<f64>,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub burn_in: f64,
    pub membership: Membership,
    /// `volumes[path][time]`.
    pub volumes: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    /// Regressors besides `t` and the constant: "none", "sqrt_t" or "ln_t".
    pub correction: String,
    pub burn_in: f64,
    pub points_used: usize,
}

/// Simulates, refines and measures all paths.
pub fn run(cfg: &SausageConfig) -> Result<SausageRun> {
    cfg.validate()?;
    let body = Shape::new(cfg.body.clone())?;
    let dt = cfg.effective_dt();
    let ks: Vec<usize> = cfg.t_grid.iter().map(|t| (t / dt).round() as usize).collect();
    let per_path: Vec<Vec<Estimate>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| volumes_of(&build_path(cfg, i), cfg.d, &body, &ks, cfg, i))
        .collect::<Result<_>>()?;
    Ok(SausageRun {
        d: cfg.d,
        body: cfg.body.clone(),
        t_grid: cfg.t_grid.clone(),
        n_paths: cfg.n_paths,
        dt,
        seed: cfg.seed,
        burn_in: cfg.burn_in,
        membership: cfg.membership,
        volumes: per_path.iter().map(|v| v.iter().map(|e| e.value).collect()).collect(),
        stderr: per_path.iter().map(|v| v.iter().map(|e| e.stderr).collect()).collect(),
    })
}

impl SausageRun {
    pub fn t_max(&self) -> f64 {
        self.t_grid.last().copied().unwrap_or(0.0)
    }

    /// Across-path mean volume per time.
    pub fn mean_volumes(&self) -> Vec<Estimate> {
        let per_path: Vec<Vec<Estimate>> = self
            .volumes
            .iter()
            .map(|v| v.iter().map(|x| Estimate::exact(*x)).collect())
            .collect();
        mean_over_paths(&per_path)
    }

    fn usable(&self) -> Vec<usize> {
        let cut = self.burn_in * self.t_max();
        (0..self.t_grid.len()).filter(|&j| self.t_grid[j] >= cut - 1e-12).collect()
    }

    /// Least-squares growth rate of the mean volume over the grid after the
    /// burn-in, with a path-level bootstrap standard error.
    pub fn slope(&self) -> Result<SlopeFit> {
        let cols = self.usable();
        if cols.len() < 2 || self.volumes.is_empty() {
            return Err(Error::invalid("fewer than 2 usable time points for the slope fit"));
        }
        let correction = match self.d {
            3 if cols.len() >= 3 => "sqrt_t",
            4 if cols.len() >= 3 => "ln_t",
            _ => "none",
        };
        let ts: Vec<f64> = cols.iter().map(|&j| self.t_grid[j]).collect();
        let design = design_matrix(&ts, correction);
        let means = |idx: &mut dyn Iterator<Item = usize>| -> Vec<f64> {
            let mut acc = vec![0.0; cols.len()];
            let mut n = 0.0;
            for p in idx {
                for (a, &j) in acc.iter_mut().zip(&cols) {
                    *a += self.volumes[p][j];
                }
                n += 1.0;
            }
            acc.into_iter().map(|a| a / n).collect()
        };
        let coef = least_squares(&design, &means(&mut (0..self.n_paths)))?;
        let mut rng = stream(self.seed, Purpose::Bootstrap, 0);
        let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
        for _ in 0..BOOTSTRAP_RESAMPLES {
            let pick: Vec<usize> = (0..self.n_paths).map(|_| rng.random_range(0..self.n_paths)).collect();
            slopes.push(least_squares(&design, &means(&mut pick.into_iter()))?[0]);
        }
        let m = slopes.iter().sum::<f64>() / slopes.len() as f64;
        let sd = (slopes.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (slopes.len() - 1) as f64).sqrt();
        Ok(SlopeFit {
            slope: coef[0],
            stderr: sd,
            intercept: *coef.last().unwrap(),
            correction: correction.to_string(),
            burn_in: self.burn_in,
            points_used: cols.len(),
        })
    }
}

fn design_matrix(ts: &[f64], correction: &str) -> DMatrix<f64> {
    let ncol = if correction == "none" { 2 } else { 3 };
    DMatrix::from_fn(ts.len(), ncol, |i, c| match (c, correction) {
        (0, _) => ts[i],
        (1, "sqrt_t") => ts[i].sqrt(),
        (1, "ln_t") => ts[i].ln(),
        _ => 1.0,
    })
}

fn least_squares(a: &DMatrix<f64>, y: &[f64]) -> Result<Vec<f64>> {
    let b = DVector::from_column_slice(y);
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::numerical(format!("slope fit failed: {e}")))?;
    Ok(sol.iter().copied().collect())
}

/// Slopes at `dt` and `dt/2`, the second obtained by bridge-refining the
/// same coarse paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub dt: f64,
    pub coarse: SlopeFit,
    pub fine: SlopeFit,
    pub change: f64,
    /// `|change| < 2 max(stderr)`.
    pub stable: bool,
    /// Extrapolation assuming a `sqrt(dt)` bias; diagnostic only.
    pub extrapolated: f64,
}

pub fn refinement_pair(cfg: &SausageConfig) -> Result<(SausageRun, SausageRun, RefinementReport)> {
    let coarse_run = run(cfg)?;
    let fine_run = run(&cfg.refined())?;
    let coarse = coarse_run.slope()?;
    let fine = fine_run.slope()?;
    let change = fine.slope - coarse.slope;
    let s2 = 2f64.sqrt();
    let report = RefinementReport {
        dt: coarse_run.dt,
        stable: change.abs() < 2.0 * coarse.stderr.max(fine.stderr),
        extrapolated: (s2 * fine.slope - coarse.slope) / (s2 - 1.0),
        coarse,
        fine,
        change,
    };
    Ok((coarse_run, fine_run, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop3Report {
    pub slope: f64,
    pub stderr: f64,
    pub capacity: f64,
    pub bounds: SausageBounds,
    pub below_bounds: bool,
    pub above_capacity: bool,
    pub pass: bool,
}

/// Growth rate against the `d >= 5` upper bounds and against `cap(K)`.
pub fn check_prop3(run: &SausageRun) -> Result<Prop3Report> {
    if run.d < 5 {
        return Err(Error::invalid("the sausage bounds need d >= 5"));
    }
    let body = Shape::new(run.body.clone())?;
    let bounds = sausage_bounds(&body)?;
    let cap = cap_exact(&body)?;
    let est = cap_from_sausage(run)?;
    let tightest = bounds.ball.map_or(bounds.general, |b| b.min(bounds.general));
    let below_bounds = est.value <= tightest + 3.0 * est.stderr;
    let above_capacity = est.value >= cap.value - 3.0 * est.stderr;
    Ok(Prop3Report {
        slope: est.value,
        stderr: est.stderr,
        capacity: cap.value,
        bounds,
        below_bounds,
        above_capacity,
        pass: below_bounds && above_capacity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn second_moment() {
        let mut cfg = SausageConfig::ball(5, 0.5, 1.0, 10_000, 0.002, 3);
        cfg.t_grid = vec![1.0];
        let ps = simulate_paths(&cfg).unwrap();
        let n = ps.n_steps();
        let sq: Vec<f64> = (0..ps.paths.len())
            .map(|i| ps.point(i, n).iter().map(|x| x * x).sum())
            .collect();
        let mean = sq.iter().sum::<f64>() / sq.len() as f64;
        let sd = (sq.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (sq.len() - 1) as f64).sqrt();
        assert!((mean - 10.0).abs() < 3.0 * sd / (sq.len() as f64).sqrt(), "{mean}");
    }

    #[test]
    fn refinement_keeps_coarse_points() {
        let cfg = SausageConfig::ball(3, 0.5, 1.0, 2, 0.001, 1);
        let coarse = simulate_paths(&cfg).unwrap();
        let fine = simulate_paths(&cfg.refined()).unwrap();
        assert_eq!(fine.n_steps(), 2 * coarse.n_steps());
        assert_eq!(fine.point(1, 100), coarse.point(1, 50));
        assert_eq!(simulate_paths(&cfg).unwrap(), coarse);
    }

    #[test]
    fn single_capsule_volume() {
        let path = vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let mut rng = stream(1, Purpose::SausageVolume, 0);
        let v = capsule_volumes(&path, 3, 0.5, &[0, 1], 4, None, &mut rng);
        assert!((v[0].value - PI / 6.0).abs() < 1e-15);
        assert!((v[1].value - (PI / 6.0 + PI * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn back_and_forth_path_counts_once() {
        // out and back along the same segment: the return capsule is covered
        let path = vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut rng = stream(1, Purpose::SausageVolume, 0);
        let v = capsule_volumes(&path, 3, 0.5, &[2], 1000, None, &mut rng);
        assert!((v[0].value - (PI / 6.0 + PI * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn capsule_and_generic_agree() {
        let cfg = SausageConfig { generic_samples: 200_000, ..SausageConfig::ball(3, 0.5, 1.0, 1, 0.01, 2) };
        let path = build_path(&cfg, 0);
        let mut rng = stream(5, Purpose::SausageVolume, 0);
        let a = capsule_volumes(&path, 3, 0.5, &[100], 20, None, &mut rng)[0];
        let ball = Shape::new(ShapeSpec::Ball { dim: 3, radius: 0.5, center: Some(vec![0.0; 3]) }).unwrap();
        let b = generic_volumes(&path, 3, &ball, &[100], 200_000, &mut rng).unwrap()[0];
        // vertex union sits inside the capsule union
        assert!(b.value <= a.value + 3.0 * (a.stderr + b.stderr));
        assert!((a.value - b.value).abs() < 0.05 * a.value, "{a:?} {b:?}");
    }

    #[test]
    fn volumes_nondecrease() {
        let cfg = SausageConfig::ball(5, 0.5, 2.0, 8, 0.004, 9);
        let r = run(&cfg).unwrap();
        for v in &r.volumes {
            assert!(v.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn one_point_grid_rejected() {
        let mut cfg = SausageConfig::ball(5, 0.5, 1.0, 4, 0.01, 1);
        cfg.t_grid = vec![1.0];
        let r = run(&cfg).unwrap();
        assert!(r.slope().is_err());
    }

    #[test]
    fn dt_bound_enforced() {
        let cfg = SausageConfig::ball(5, 0.5, 1.0, 4, 0.1, 1);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn spitzer_d3() {
        let cfg = SausageConfig::ball(3, 1.0, 20.0, 200, 0.01, 21);
        let r = run(&cfg).unwrap();
        let fit = r.slope().unwrap();
        assert!((fit.slope - 4.0 * PI).abs() < 3.0 * fit.stderr, "{fit:?}");
    }
}
