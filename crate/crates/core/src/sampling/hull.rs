//! Incremental 3D quickhull in double precision.

use std::collections::HashMap;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack of the half-space test in [`ConvexHull3::contains`].
pub const CONTAINS_TOL: f64 = 1e-9;

/// Triangular hull face with outward unit normal: `normal · x ≤ offset` inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullFace {
    pub vertices: [usize; 3],
    pub normal: [f64; 3],
    pub offset: f64,
}

impl HullFace {
    pub fn signed_distance(&self, p: [f64; 3]) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexHull3 {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<HullFace>,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

struct WorkFace {
    v: [usize; 3],
    n: [f64; 3],
    d: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl WorkFace {
    fn new(pts: &[[f64; 3]], v: [usize; 3]) -> Self {
        let (a, b, c) = (pts[v[0]], pts[v[1]], pts[v[2]]);
        let raw = cross(sub(b, a), sub(c, a));
        let len = norm(raw);
        let n = if len > 0.0 {
            [raw[0] / len, raw[1] / len, raw[2] / len]
        } else {
            [0.0; 3]
        };
        // Offset from the centroid is less sensitive to which vertex is used.
        let centroid = [
            (a[0] + b[0] + c[0]) / 3.0,
            (a[1] + b[1] + c[1]) / 3.0,
            (a[2] + b[2] + c[2]) / 3.0,
        ];
        WorkFace {
            v,
            n,
            d: dot(n, centroid),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn dist(&self, p: [f64; 3]) -> f64 {
        dot(self.n, p) - self.d
    }

    fn edges(&self) -> [(usize, usize); 3] {
        [
            (self.v[0], self.v[1]),
            (self.v[1], self.v[2]),
            (self.v[2], self.v[0]),
        ]
    }
}

impl ConvexHull3 {
    /// Convex hull of `points`. Fails with `DegenerateCloud` for fewer than four
    /// points or (near-)coplanar clouds.
    pub fn from_points(points: &[[f64; 3]]) -> Result<Self> {
        if points.len() < 4 || points.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::DegenerateCloud);
        }
        let mut max_abs = [0.0f64; 3];
        for p in points {
            for k in 0..3 {
                max_abs[k] = max_abs[k].max(p[k].abs());
            }
        }
        let eps = 1e-12 * (max_abs[0] + max_abs[1] + max_abs[2]).max(1e-300);

        let simplex = initial_simplex(points, eps)?;
        let mut faces: Vec<WorkFace> = Vec::new();
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();

        let [i0, i1, i2, i3] = simplex;
        for (tri, opposite) in [
            ([i0, i1, i2], i3),
            ([i0, i1, i3], i2),
            ([i0, i2, i3], i1),
            ([i1, i2, i3], i0),
        ] {
            let mut f = WorkFace::new(points, tri);
            if f.dist(points[opposite]) > 0.0 {
                f = WorkFace::new(points, [tri[0], tri[2], tri[1]]);
            }
            let id = faces.len();
            for e in f.edges() {
                edge_map.insert(e, id);
            }
            faces.push(f);
        }

        for (idx, p) in points.iter().enumerate() {
            if simplex.contains(&idx) {
                continue;
            }
            if let Some(f) = faces.iter_mut().find(|f| f.dist(*p) > eps) {
                f.outside.push(idx);
            }
        }

        let mut pending: Vec<usize> = (0..faces.len())
            .filter(|&i| !faces[i].outside.is_empty())
            .collect();

        while let Some(fid) = pending.pop() {
            if !faces[fid].alive || faces[fid].outside.is_empty() {
                continue;
            }
            let eye = *faces[fid]
                .outside
                .iter()
                .max_by(|&&a, &&b| {
                    faces[fid]
                        .dist(points[a])
                        .total_cmp(&faces[fid].dist(points[b]))
                        .then(b.cmp(&a))
                })
                .expect("non-empty outside set");
            let eye_p = points[eye];

            // Visible region, grown across edges from the seed face.
            let mut visible = vec![fid];
            let mut is_visible: HashMap<usize, bool> = HashMap::new();
            is_visible.insert(fid, true);
            let mut cursor = 0;
            while cursor < visible.len() {
                let f = visible[cursor];
                cursor += 1;
                for (a, b) in faces[f].edges() {
                    let g = edge_map[&(b, a)];
                    if is_visible.contains_key(&g) {
                        continue;
                    }
                    let vis = faces[g].dist(eye_p) > eps;
                    is_visible.insert(g, vis);
                    if vis {
                        visible.push(g);
                    }
                }
            }

            let mut horizon = Vec::new();
            for &f in &visible {
                for (a, b) in faces[f].edges() {
                    let g = edge_map[&(b, a)];
                    if !is_visible[&g] {
                        horizon.push((a, b));
                    }
                }
            }

            let mut orphans = Vec::new();
            for &f in &visible {
                faces[f].alive = false;
                for e in faces[f].edges() {
                    edge_map.remove(&e);
                }
                orphans.append(&mut faces[f].outside);
            }

            let first_new = faces.len();
            for (a, b) in horizon {
                let f = WorkFace::new(points, [a, b, eye]);
                let id = faces.len();
                for e in f.edges() {
                    if edge_map.insert(e, id).is_some() {
                        return Err(Error::DegenerateCloud);
                    }
                }
                faces.push(f);
            }

            for idx in orphans {
                if idx == eye {
                    continue;
                }
                let p = points[idx];
                if let Some(f) = faces[first_new..].iter_mut().find(|f| f.dist(p) > eps) {
                    f.outside.push(idx);
                }
            }
            for id in first_new..faces.len() {
                if !faces[id].outside.is_empty() {
                    pending.push(id);
                }
            }
        }

        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut out_faces = Vec::new();
        for f in faces.iter().filter(|f| f.alive) {
            let mut v = [0usize; 3];
            for (slot, &orig) in f.v.iter().enumerate() {
                v[slot] = *remap.entry(orig).or_insert_with(|| {
                    vertices.push(points[orig]);
                    vertices.len() - 1
                });
            }
            out_faces.push(HullFace {
                vertices: v,
                normal: f.n,
                offset: f.d,
            });
        }
        Ok(ConvexHull3 {
            vertices,
            faces: out_faces,
        })
    }

    /// True iff `p` satisfies every face half-space within [`CONTAINS_TOL`].
    pub fn contains(&self, p: [f64; 3]) -> bool {
        self.faces
            .iter()
            .all(|f| f.signed_distance(p) <= CONTAINS_TOL)
    }

    /// Largest face violation of `p` (non-positive inside).
    pub fn max_violation(&self, p: [f64; 3]) -> f64 {
        self.faces
            .iter()
            .map(|f| f.signed_distance(p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Axis-aligned bounding box `(min, max)` of the vertices.
    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Box aligned with the principal axes of the vertex cloud:
    /// `(origin, axes, lo, hi)` such that every vertex is `origin + Σ tₖ axesₖ`
    /// with `tₖ ∈ [loₖ, hiₖ]`. Much tighter than the axis-aligned box for
    /// slender hulls.
    pub fn oriented_box(&self) -> ([f64; 3], [[f64; 3]; 3], [f64; 3], [f64; 3]) {
        let c = self.vertex_centroid();
        let mut cov = Matrix3::<f64>::zeros();
        for v in &self.vertices {
            let d = Vector3::new(v[0] - c[0], v[1] - c[1], v[2] - c[2]);
            cov += d * d.transpose();
        }
        let eig = cov.symmetric_eigen();
        let mut axes = [[0.0; 3]; 3];
        for (k, axis) in axes.iter_mut().enumerate() {
            let col = eig.eigenvectors.column(k);
            *axis = [col[0], col[1], col[2]];
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..3 {
                let t: f64 = (0..3).map(|m| (v[m] - c[m]) * axes[k][m]).sum();
                lo[k] = lo[k].min(t);
                hi[k] = hi[k].max(t);
            }
        }
        (c, axes, lo, hi)
    }

    pub fn vertex_centroid(&self) -> [f64; 3] {
        let n = self.vertices.len() as f64;
        let mut c = [0.0; 3];
        for v in &self.vertices {
            for k in 0..3 {
                c[k] += v[k] / n;
            }
        }
        c
    }
}

fn initial_simplex(points: &[[f64; 3]], eps: f64) -> Result<[usize; 4]> {
    let mut extremes = Vec::with_capacity(6);
    for k in 0..3 {
        let (mut lo, mut hi) = (0, 0);
        for (i, p) in points.iter().enumerate() {
            if p[k] < points[lo][k] {
                lo = i;
            }
            if p[k] > points[hi][k] {
                hi = i;
            }
        }
        extremes.push(lo);
        extremes.push(hi);
    }
    let (mut i0, mut i1, mut best) = (0, 0, -1.0);
    for &a in &extremes {
        for &b in &extremes {
            let d = norm(sub(points[a], points[b]));
            if d > best {
                best = d;
                i0 = a;
                i1 = b;
            }
        }
    }
    if best <= eps {
        return Err(Error::DegenerateCloud);
    }

    let dir = sub(points[i1], points[i0]);
    let (mut i2, mut best) = (0, -1.0);
    for (i, p) in points.iter().enumerate() {
        let d = norm(cross(dir, sub(*p, points[i0]))) / norm(dir);
        if d > best {
            best = d;
            i2 = i;
        }
    }
    if best <= eps {
        return Err(Error::DegenerateCloud);
    }

    let plane = WorkFace::new(points, [i0, i1, i2]);
    let (mut i3, mut best) = (0, -1.0);
    for (i, p) in points.iter().enumerate() {
        let d = plane.dist(*p).abs();
        if d > best {
            best = d;
            i3 = i;
        }
    }
    if best <= eps {
        return Err(Error::DegenerateCloud);
    }
    Ok([i0, i1, i2, i3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tetrahedron() {
        let pts = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let hull = ConvexHull3::from_points(&pts).unwrap();
        assert_eq!(hull.faces.len(), 4);
        assert_eq!(hull.vertices.len(), 4);
        assert!(hull.contains([0.1, 0.1, 0.1]));
        assert!(!hull.contains([0.5, 0.5, 0.5]));
        for v in &pts {
            assert!(hull.contains(*v));
        }
    }

    #[test]
    fn coplanar_cloud_is_rejected() {
        let pts: Vec<[f64; 3]> = (0..20)
            .map(|i| [i as f64, (i * i % 7) as f64, 2.0])
            .collect();
        assert_eq!(ConvexHull3::from_points(&pts), Err(Error::DegenerateCloud));
        assert_eq!(
            ConvexHull3::from_points(&pts[..3]),
            Err(Error::DegenerateCloud)
        );
    }

    #[test]
    fn cube_with_interior_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push([(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        for _ in 0..500 {
            pts.push([rng.random(), rng.random(), rng.random()]);
        }
        let hull = ConvexHull3::from_points(&pts).unwrap();
        assert_eq!(hull.vertices.len(), 8);
        assert_eq!(hull.faces.len(), 12);
    }

    #[test]
    fn random_ball_is_closed_and_contains_all_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<[f64; 3]> = (0..3000)
            .map(|_| {
                let v: [f64; 3] = [
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                ];
                let r = norm(v).max(1e-9);
                let s = rng.random::<f64>().powf(0.2) / r;
                [v[0] * s, v[1] * s, v[2] * s]
            })
            .collect();
        let hull = ConvexHull3::from_points(&pts).unwrap();
        // Euler characteristic of a closed triangulated sphere.
        let v = hull.vertices.len() as i64;
        let f = hull.faces.len() as i64;
        assert_eq!(v - 3 * f / 2 + f, 2);
        for p in &pts {
            assert!(hull.max_violation(*p) <= 1e-12, "{}", hull.max_violation(*p));
        }
        let c = hull.vertex_centroid();
        assert!(hull.contains(c));
    }
}
