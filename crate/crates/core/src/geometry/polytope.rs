//! Convex polytopes in two and three dimensions given by their vertices.
//!
//! The hull is built once (facet planes plus ordered facet loops); the facet
//! data gives exact volume, surface area and the edge term of the Steiner
//! polynomial. Distances are taken over facets and edges; Wolfe's
//! min-norm-point method is kept for general point sets.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PLANE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Facet {
    /// Outward unit normal.
    pub normal: Vec<f64>,
    /// Support value: the facet lies in `normal . x = offset`.
    pub offset: f64,
    /// Vertex indices in cyclic order (d = 3) or the two endpoints (d = 2).
    pub loop_: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Polytope {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
    volume: f64,
    surface: f64,
    /// Sum over edges of `length * exterior dihedral angle / 2` (d = 3 only).
    edge_term: f64,
    centroid: Vec<f64>,
    edges: Vec<(usize, usize)>,
}

fn edge_list(facets: &[Facet]) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = facets
        .iter()
        .flat_map(|f| {
            let m = f.loop_.len();
            (0..m).map(move |t| {
                let (a, b) = (f.loop_[t], f.loop_[(t + 1) % m]);
                (a.min(b), a.max(b))
            })
        })
        .filter(|(a, b)| a != b)
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

fn seg_dist2(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut ab2 = 0.0;
    let mut t = 0.0;
    for c in 0..x.len() {
        let e = b[c] - a[c];
        ab2 += e * e;
        t += (x[c] - a[c]) * e;
    }
    let t = if ab2 > 0.0 { (t / ab2).clamp(0.0, 1.0) } else { 0.0 };
    (0..x.len()).map(|c| (x[c] - a[c] - t * (b[c] - a[c])).powi(2)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Andrew's monotone chain on 2-D points; returns indices in counter-clockwise
/// order with collinear points dropped.
fn hull_2d(pts: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a][0]
            .total_cmp(&pts[b][0])
            .then(pts[a][1].total_cmp(&pts[b][1]))
    });
    let turn = |o: usize, a: usize, b: usize| {
        (pts[a][0] - pts[o][0]) * (pts[b][1] - pts[o][1])
            - (pts[a][1] - pts[o][1]) * (pts[b][0] - pts[o][0])
    };
    let scale = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let eps = 1e-12 * scale * scale;
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], i) <= eps {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], i) <= eps {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl Polytope {
    pub fn new(dim: usize, vertices: &[Vec<f64>]) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::unsupported(format!(
                "polytopes are supported for d = 2 and d = 3, got d = {dim}"
            )));
        }
        if vertices.iter().any(|v| v.len() != dim || v.iter().any(|x| !x.is_finite())) {
            return Err(Error::invalid("polytope vertex with wrong dimension or non-finite entry"));
        }
        let mut pts: Vec<Vec<f64>> = Vec::new();
        for v in vertices {
            if !pts.iter().any(|p| norm(&sub(p, v)) < 1e-12) {
                pts.push(v.clone());
            }
        }
        if pts.len() < dim + 1 {
            return Err(Error::invalid(format!(
                "polytope needs at least {} distinct vertices",
                dim + 1
            )));
        }
        if dim == 2 {
            Self::build_2d(pts)
        } else {
            Self::build_3d(pts)
        }
    }

    fn build_2d(pts: Vec<Vec<f64>>) -> Result<Self> {
        let p2: Vec<[f64; 2]> = pts.iter().map(|p| [p[0], p[1]]).collect();
        let hull = hull_2d(&p2);
        if hull.len() < 3 {
            return Err(Error::invalid("polygon vertices are collinear"));
        }
        let vertices: Vec<Vec<f64>> = hull.iter().map(|&i| pts[i].clone()).collect();
        let m = vertices.len();
        let mut area = 0.0;
        let mut perim = 0.0;
        let (mut cx, mut cy) = (0.0, 0.0);
        let mut facets = Vec::with_capacity(m);
        for i in 0..m {
            let (a, b) = (&vertices[i], &vertices[(i + 1) % m]);
            let c = a[0] * b[1] - b[0] * a[1];
            area += c;
            cx += (a[0] + b[0]) * c;
            cy += (a[1] + b[1]) * c;
            let e = sub(b, a);
            let len = norm(&e);
            perim += len;
            let normal = vec![e[1] / len, -e[0] / len];
            let offset = dot(&normal, a);
            facets.push(Facet { normal, offset, loop_: vec![i, (i + 1) % m] });
        }
        area *= 0.5;
        if area <= 0.0 {
            return Err(Error::invalid("degenerate polygon"));
        }
        let centroid = vec![cx / (6.0 * area), cy / (6.0 * area)];
        let edges = edge_list(&facets);
        Ok(Self {
            dim: 2,
            vertices,
            facets,
            volume: area,
            surface: perim,
            edge_term: 0.0,
            centroid,
            edges,
        })
    }

    fn build_3d(pts: Vec<Vec<f64>>) -> Result<Self> {
        let n = pts.len();
        let scale = pts.iter().map(|p| norm(p)).fold(0.0f64, f64::max).max(1e-300);
        let tol = PLANE_TOL * scale.max(1.0);
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let c = cross(&sub(&pts[j], &pts[i]), &sub(&pts[k], &pts[i]));
                    let len = norm(&c);
                    if len < 1e-12 * scale * scale {
                        continue;
                    }
                    let mut nrm: Vec<f64> = c.iter().map(|x| x / len).collect();
                    let mut off = dot(&nrm, &pts[i]);
                    let (mut above, mut below) = (false, false);
                    for p in &pts {
                        let s = dot(&nrm, p) - off;
                        above |= s > tol;
                        below |= s < -tol;
                    }
                    if above && below {
                        continue;
                    }
                    if above {
                        nrm.iter_mut().for_each(|x| *x = -*x);
                        off = -off;
                    }
                    let dup = planes
                        .iter()
                        .any(|(q, o)| dot(q, &nrm) > 1.0 - 1e-9 && (o - off).abs() < tol);
                    if !dup {
                        planes.push((nrm, off));
                    }
                }
            }
        }
        if planes.len() < 4 {
            return Err(Error::invalid("polytope vertices are coplanar"));
        }
        let mut facets = Vec::with_capacity(planes.len());
        for (nrm, off) in planes {
            let on: Vec<usize> = (0..n)
                .filter(|&i| (dot(&nrm, &pts[i]) - off).abs() <= tol)
                .collect();
            // In-plane frame (e1, e2) with e1 x e2 = nrm so CCW loops face outward.
            let seed = if nrm[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let mut e1 = cross(&seed, &nrm).to_vec();
            let l1 = norm(&e1);
            e1.iter_mut().for_each(|x| *x /= l1);
            let e2 = cross(&nrm, &e1).to_vec();
            let p2: Vec<[f64; 2]> = on.iter().map(|&i| [dot(&pts[i], &e1), dot(&pts[i], &e2)]).collect();
            let loop_: Vec<usize> = hull_2d(&p2).into_iter().map(|k| on[k]).collect();
            facets.push(Facet { normal: nrm, offset: off, loop_ });
        }
        // Reindex onto hull vertices only.
        let mut used: Vec<usize> = facets.iter().flat_map(|f| f.loop_.iter().copied()).collect();
        used.sort_unstable();
        used.dedup();
        let remap = |i: usize| used.binary_search(&i).expect("hull vertex");
        for f in &mut facets {
            f.loop_ = f.loop_.iter().map(|&i| remap(i)).collect();
        }
        let vertices: Vec<Vec<f64>> = used.iter().map(|&i| pts[i].clone()).collect();

        let interior: Vec<f64> = (0..3)
            .map(|c| vertices.iter().map(|v| v[c]).sum::<f64>() / vertices.len() as f64)
            .collect();
        let mut volume = 0.0;
        let mut surface = 0.0;
        let mut moment = [0.0; 3];
        for f in &facets {
            let l = &f.loop_;
            for t in 1..l.len().saturating_sub(1) {
                let (a, b, c) = (&vertices[l[0]], &vertices[l[t]], &vertices[l[t + 1]]);
                let area_vec = cross(&sub(b, a), &sub(c, a));
                surface += 0.5 * norm(&area_vec);
                // tetrahedron (interior, a, b, c)
                let vol = dot(&area_vec, &sub(a, &interior)) / 6.0;
                volume += vol;
                for k in 0..3 {
                    moment[k] += vol * (interior[k] + a[k] + b[k] + c[k]) / 4.0;
                }
            }
        }
        if volume <= 0.0 {
            return Err(Error::invalid("degenerate polytope"));
        }
        let centroid = moment.iter().map(|m| m / volume).collect();

        let mut edge_term = 0.0;
        for (fi, f) in facets.iter().enumerate() {
            let m = f.loop_.len();
            for t in 0..m {
                let (a, b) = (f.loop_[t], f.loop_[(t + 1) % m]);
                let other = facets
                    .iter()
                    .enumerate()
                    .find(|(gi, g)| *gi != fi && g.loop_.contains(&a) && g.loop_.contains(&b))
                    .map(|(_, g)| g);
                let Some(g) = other else {
                    return Err(Error::numerical("hull edge without a neighbouring facet"));
                };
                let angle = dot(&f.normal, &g.normal).clamp(-1.0, 1.0).acos();
                let len = norm(&sub(&vertices[a], &vertices[b]));
                // each edge is visited from both facets
                edge_term += 0.25 * len * angle;
            }
        }
        let edges = edge_list(&facets);
        Ok(Self { dim: 3, vertices, facets, volume, surface, edge_term, centroid, edges })
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn surface_area(&self) -> f64 {
        self.surface
    }

    pub fn edge_term(&self) -> f64 {
        self.edge_term
    }

    pub fn centroid(&self) -> &[f64] {
        &self.centroid
    }

    /// Largest facet violation `max_f (n_f . x - b_f)`; non-positive inside.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| dot(&f.normal, x) - f.offset)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.facets.iter().all(|f| dot(&f.normal, x) <= f.offset)
    }

    /// Euclidean distance: the nearest boundary point lies in the relative
    /// interior of a violated facet or on an edge.
    pub fn distance(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            return 0.0;
        }
        let mut best = self
            .edges
            .iter()
            .map(|&(a, b)| seg_dist2(x, &self.vertices[a], &self.vertices[b]))
            .fold(f64::INFINITY, f64::min);
        if self.dim == 3 {
            for f in &self.facets {
                let h = dot(&f.normal, x) - f.offset;
                if h <= 0.0 || h * h >= best {
                    continue;
                }
                let p: Vec<f64> = x.iter().zip(&f.normal).map(|(xi, ni)| xi - h * ni).collect();
                let m = f.loop_.len();
                let (mut pos, mut neg) = (false, false);
                for t in 0..m {
                    let a = &self.vertices[f.loop_[t]];
                    let b = &self.vertices[f.loop_[(t + 1) % m]];
                    let s = dot(&cross(&sub(b, a), &sub(&p, a)), &f.normal);
                    pos |= s > 0.0;
                    neg |= s < 0.0;
                }
                if !(pos && neg) {
                    best = h * h;
                }
            }
        }
        best.sqrt()
    }

    /// Radius of the largest inscribed ball (Chebyshev radius), by enumerating
    /// the `(d+1)`-subsets of facets whose equidistant point is feasible.
    pub fn inradius(&self) -> f64 {
        let d = self.dim;
        let f = &self.facets;
        let mut best = self.facets.iter().map(|g| g.offset - dot(&g.normal, &self.centroid)).fold(f64::INFINITY, f64::min).max(0.0);
        let mut subset: Vec<usize> = (0..=d).collect();
        loop {
            // unknowns (x, r): n_i . x + r = b_i
            let mut a = DMatrix::<f64>::zeros(d + 1, d + 1);
            let mut rhs = DVector::<f64>::zeros(d + 1);
            for (row, &i) in subset.iter().enumerate() {
                for c in 0..d {
                    a[(row, c)] = f[i].normal[c];
                }
                a[(row, d)] = 1.0;
                rhs[row] = f[i].offset;
            }
            if let Some(sol) = a.lu().solve(&rhs) {
                let r = sol[d];
                let x: Vec<f64> = (0..d).map(|c| sol[c]).collect();
                if r > best && f.iter().all(|g| dot(&g.normal, &x) + r <= g.offset + 1e-9) {
                    best = r;
                }
            }
            // next combination
            let k = d + 1;
            let mut i = k;
            while i > 0 && subset[i - 1] == f.len() - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            subset[i - 1] += 1;
            for j in i..k {
                subset[j] = subset[j - 1] + 1;
            }
        }
        best
    }
}

/// Nearest point to the origin in the convex hull of `points` (Wolfe's
/// min-norm-point algorithm).
pub fn min_norm_point(points: &[Vec<f64>], tol: f64) -> Vec<f64> {
    let d = points[0].len();
    let scale = points.iter().map(|p| dot(p, p)).fold(0.0f64, f64::max);
    let start = (0..points.len())
        .min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b])))
        .unwrap();
    let mut active = vec![start];
    let mut lambda = vec![1.0];
    let combine = |active: &[usize], w: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; d];
        for (&i, &l) in active.iter().zip(w) {
            for c in 0..d {
                x[c] += l * points[i][c];
            }
        }
        x
    };
    for _ in 0..10 * (points.len() + d + 10) {
        let x = combine(&active, &lambda);
        let xx = dot(&x, &x);
        let (j, pj) = (0..points.len())
            .map(|i| (i, dot(&points[i], &x)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if xx - pj <= tol * scale || active.contains(&j) {
            return x;
        }
        active.push(j);
        lambda.push(0.0);
        loop {
            let k = active.len();
            // affine minimiser: [G 1; 1^T 0] [mu; nu] = [0; 1]
            let mut a = DMatrix::<f64>::zeros(k + 1, k + 1);
            for r in 0..k {
                for c in 0..k {
                    a[(r, c)] = dot(&points[active[r]], &points[active[c]]);
                }
                a[(r, k)] = 1.0;
                a[(k, r)] = 1.0;
            }
            let mut rhs = DVector::<f64>::zeros(k + 1);
            rhs[k] = 1.0;
            let mu: Vec<f64> = match a.clone().lu().solve(&rhs) {
                Some(s) => (0..k).map(|i| s[i]).collect(),
                None => {
                    // affinely dependent support: drop the newest point
                    active.pop();
                    lambda.pop();
                    return combine(&active, &lambda);
                }
            };
            if mu.iter().all(|&m| m > 1e-14) {
                lambda = mu;
                break;
            }
            let mut theta = 1.0f64;
            for i in 0..k {
                if mu[i] <= 1e-14 {
                    let denom = lambda[i] - mu[i];
                    if denom > 0.0 {
                        theta = theta.min(lambda[i] / denom);
                    }
                }
            }
            for i in 0..k {
                lambda[i] += theta * (mu[i] - lambda[i]);
            }
            let mut keep_a = Vec::new();
            let mut keep_l = Vec::new();
            for i in 0..k {
                if lambda[i] > 1e-14 {
                    keep_a.push(active[i]);
                    keep_l.push(lambda[i]);
                }
            }
            let s: f64 = keep_l.iter().sum();
            active = keep_a;
            lambda = keep_l.into_iter().map(|l| l / s).collect();
        }
    }
    combine(&active, &lambda)
}
