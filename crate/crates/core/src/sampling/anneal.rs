//! Space-filling designs by simulated annealing in invariant space.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::set::{AnnealStats, SampleSet};
use super::{physicality_check, reconstruct_c, rng_from_seed, sphere_direction, ConvexHull3};
use crate::error::{Error, Result};
use crate::tensors::{pseudo_invariants, InvariantKind, InvariantPoint, Mat3, SymMat3, UnitVec3};

/// Annealing schedule: `n_t` sweeps, initial step size `t0`, decay `alpha` per sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealConfig {
    #[serde(rename = "NT")]
    pub n_t: usize,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub alpha: f64,
}

impl AnnealConfig {
    /// Schedule for the principal invariants.
    pub fn iso() -> Self {
        AnnealConfig {
            n_t: 7000,
            t0: 1.0,
            alpha: 0.9995,
        }
    }

    /// Schedule for the rotation angles driving the pseudo invariants.
    pub fn aniso() -> Self {
        AnnealConfig {
            n_t: 10_000,
            t0: 2.0 * PI,
            alpha: 0.9995,
        }
    }

    pub fn with_sweeps(self, n_t: usize) -> Self {
        AnnealConfig { n_t, ..self }
    }

    /// `n_t = 0` is allowed and returns the initialization unchanged.
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "anneal T0 must be positive, got {}",
                self.t0
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "anneal alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig::iso()
    }
}

const MAX_INIT_ATTEMPTS: usize = 1_000_000;

fn nearest_sq<const D: usize>(pts: &[[f64; D]], skip: usize, p: &[f64; D]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, q) in pts.iter().enumerate() {
        if i == skip {
            continue;
        }
        let mut d = 0.0;
        for k in 0..D {
            d += (p[k] - q[k]) * (p[k] - q[k]);
        }
        best = best.min(d);
    }
    best
}

fn admissible(hull: &ConvexHull3, p: [f64; 3]) -> bool {
    physicality_check(&InvariantPoint::iso(p[0], p[1], p[2])) && hull.contains(p)
}

/// Spreads `n` points over the hull, one of them pinned at the reference `(3, 3, 1)`.
///
/// The other `n − 1` points start uniformly distributed over the hull (rejection
/// from its principal-axis bounding box). A move is accepted only if the moved point stays
/// physical and inside the hull and its nearest-neighbor distance grows.
pub fn anneal_iso(hull: &ConvexHull3, n: usize, cfg: &AnnealConfig, seed: u64) -> Result<SampleSet> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "space-filling design needs at least 2 points, got {n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let (origin, axes, lo, hi) = hull.oriented_box();

    let mut pts: Vec<[f64; 3]> = Vec::with_capacity(n);
    let mut attempts = 0;
    while pts.len() < n - 1 {
        if attempts == MAX_INIT_ATTEMPTS {
            return Err(Error::InitializationFailure {
                placed: pts.len(),
                wanted: n - 1,
                attempts,
            });
        }
        attempts += 1;
        let mut p = origin;
        for k in 0..3 {
            let t = lo[k] + rng.random::<f64>() * (hi[k] - lo[k]);
            for m in 0..3 {
                p[m] += t * axes[k][m];
            }
        }
        if admissible(hull, p) {
            pts.push(p);
        }
    }
    let pinned = n - 1;
    pts.push(InvariantPoint::REFERENCE_ISO.principal());

    let mut stats = AnnealStats::default();
    let mut t = cfg.t0;
    for _ in 0..cfg.n_t {
        for j in 0..n {
            if j == pinned {
                continue;
            }
            let d = nearest_sq(&pts, j, &pts[j]);
            let dir = sphere_direction(&mut rng).0;
            let s = rng.random::<f64>() * t;
            let p = [
                pts[j][0] + s * dir[0],
                pts[j][1] + s * dir[1],
                pts[j][2] + s * dir[2],
            ];
            stats.proposed += 1;
            if !physicality_check(&InvariantPoint::iso(p[0], p[1], p[2])) {
                continue;
            }
            let d_test = nearest_sq(&pts, j, &p);
            if d_test > d && hull.contains(p) {
                stats.record(d.sqrt(), d_test.sqrt());
                pts[j] = p;
            }
        }
        t *= cfg.alpha;
    }

    let points: Vec<InvariantPoint> = pts
        .iter()
        .map(|p| InvariantPoint::iso(p[0], p[1], p[2]))
        .collect();
    let tensors = points
        .iter()
        .map(reconstruct_c)
        .collect::<Result<Vec<SymMat3>>>()?;
    Ok(SampleSet {
        kind: InvariantKind::Iso,
        points,
        tensors,
        angles: None,
        direction: None,
        pinned,
        seed,
        config: *cfg,
        stats,
    })
}

/// `R = R_yz(α₃) R_xz(α₂) R_xy(α₁)`, so that `RᵀCR` applies the three plane
/// rotations in the order x–y, x–z, y–z from the inside out.
pub fn rotation_from_angles(angles: [f64; 3]) -> Mat3 {
    Mat3::plane_rotation_yz(angles[2])
        .matmul(&Mat3::plane_rotation_xz(angles[1]))
        .matmul(&Mat3::plane_rotation_xy(angles[0]))
}

/// Spreads the pseudo invariants `(I4, I5)` of an isotropic design by annealing
/// one set of rotation angles per point. Principal invariants are untouched.
///
/// Each point's tensor is stored in its rotated form, so the returned quintuples
/// are exactly the invariants of the stored tensors. The pinned reference keeps
/// `C = I` and `(I4, I5) = (1, 1)`.
pub fn anneal_aniso(
    iso_set: &SampleSet,
    a0: &UnitVec3,
    cfg: &AnnealConfig,
    seed: u64,
) -> Result<SampleSet> {
    cfg.validate()?;
    if iso_set.kind != InvariantKind::Iso {
        return Err(Error::KindMismatch {
            expected: InvariantKind::Iso.name(),
            got: iso_set.kind.name(),
        });
    }
    let n = iso_set.points.len();
    let pinned = iso_set.pinned;
    let mut rng = rng_from_seed(seed);

    let base = &iso_set.tensors;
    let mut angles = vec![[0.0f64; 3]; n];
    let mut tensors = base.clone();
    let mut q = vec![[1.0f64, 1.0]; n];
    for j in 0..n {
        if j == pinned {
            continue;
        }
        for a in angles[j].iter_mut() {
            *a = rng.random::<f64>() * 2.0 * PI;
        }
        tensors[j] = base[j].rotate_t(&rotation_from_angles(angles[j]));
        let (i4, i5) = pseudo_invariants(&tensors[j], a0);
        q[j] = [i4, i5];
    }

    let mut stats = AnnealStats::default();
    let mut t = cfg.t0;
    for _ in 0..cfg.n_t {
        for j in 0..n {
            if j == pinned {
                continue;
            }
            let d = nearest_sq(&q, j, &q[j]);
            let dir = sphere_direction(&mut rng).0;
            let s = rng.random::<f64>() * t;
            let trial = [
                angles[j][0] + s * dir[0],
                angles[j][1] + s * dir[1],
                angles[j][2] + s * dir[2],
            ];
            stats.proposed += 1;
            let c_test = base[j].rotate_t(&rotation_from_angles(trial));
            let (i4, i5) = pseudo_invariants(&c_test, a0);
            let d_test = nearest_sq(&q, j, &[i4, i5]);
            if d_test > d {
                stats.record(d.sqrt(), d_test.sqrt());
                angles[j] = trial;
                tensors[j] = c_test;
                q[j] = [i4, i5];
            }
        }
        t *= cfg.alpha;
    }

    let points = iso_set
        .points
        .iter()
        .zip(q.iter())
        .map(|(p, q)| p.with_pseudo(q[0], q[1]))
        .collect();
    Ok(SampleSet {
        kind: InvariantKind::TransIso,
        points,
        tensors,
        angles: Some(angles),
        direction: Some(*a0),
        pinned,
        seed,
        config: *cfg,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{build_hull, point_in_hull, DomainBounds};
    use crate::tensors::principal_invariants;

    fn small_hull() -> ConvexHull3 {
        build_hull(&DomainBounds::new(0.175).unwrap(), 4000, 1).unwrap()
    }

    #[test]
    fn worked_rotation_example() {
        let c = SymMat3::diag(1.4, 1.1, 0.8);
        let a0 = UnitVec3::normalized([1.0, 2.0, 1.0]).unwrap();
        let rotated = c.rotate_t(&rotation_from_angles([0.0, 0.0, 0.1]));
        let (i4, i5) = pseudo_invariants(&rotated, &a0);
        assert!((i4 - 1.078).abs() < 2e-3);
        assert!((i5 - 1.199).abs() < 2e-3);
    }

    #[test]
    fn zero_sweeps_return_initialization() {
        let hull = small_hull();
        let cfg = AnnealConfig::iso().with_sweeps(0);
        let s = anneal_iso(&hull, 20, &cfg, 4).unwrap();
        assert_eq!(s.stats.accepted, 0);
        assert_eq!(s.points.len(), 20);
        assert_eq!(s.points[s.pinned], InvariantPoint::REFERENCE_ISO);
    }

    #[test]
    fn annealed_points_stay_feasible_and_pinned() {
        let hull = small_hull();
        let cfg = AnnealConfig::iso().with_sweeps(200);
        let s = anneal_iso(&hull, 30, &cfg, 8).unwrap();
        assert_eq!(s.points[s.pinned], InvariantPoint::REFERENCE_ISO);
        assert_eq!(s.tensors[s.pinned], SymMat3::IDENTITY);
        assert!(s.stats.accepted > 0);
        assert!(s.stats.min_gain.unwrap() > 0.0);
        for (p, c) in s.points.iter().zip(&s.tensors) {
            assert!(physicality_check(p));
            assert!(point_in_hull(&hull, p));
            let back = principal_invariants(c);
            assert!((back.i1 - p.i1).abs() < 1e-9 && (back.i3 - p.i3).abs() < 1e-9);
        }
        assert_eq!(s, anneal_iso(&hull, 30, &cfg, 8).unwrap());
    }

    #[test]
    fn two_points_separate() {
        let hull = small_hull();
        let init = anneal_iso(&hull, 2, &AnnealConfig::iso().with_sweeps(0), 2).unwrap();
        let done = anneal_iso(&hull, 2, &AnnealConfig::iso().with_sweeps(300), 2).unwrap();
        let d0 = super::super::distance(&init.points[0].to_vec(), &init.points[1].to_vec());
        let d1 = super::super::distance(&done.points[0].to_vec(), &done.points[1].to_vec());
        assert!(d1 >= d0);
    }

    #[test]
    fn aniso_keeps_principal_invariants() {
        let hull = small_hull();
        let iso = anneal_iso(&hull, 25, &AnnealConfig::iso().with_sweeps(50), 3).unwrap();
        let a0 = UnitVec3::normalized([1.0, 2.0, 1.0]).unwrap();
        let cfg = AnnealConfig::aniso().with_sweeps(100);
        let tr = anneal_aniso(&iso, &a0, &cfg, 5).unwrap();
        assert_eq!(tr.points[tr.pinned], InvariantPoint::REFERENCE_TRANSISO);
        for (p, (q, c)) in iso.points.iter().zip(tr.points.iter().zip(&tr.tensors)) {
            assert_eq!(p.principal(), q.principal());
            let (i4, i5) = pseudo_invariants(c, &a0);
            let (q4, q5) = q.pseudo.unwrap();
            assert!((q4 - i4).abs() <= 1e-12 && (q5 - i5).abs() <= 1e-12);
            let back = principal_invariants(c);
            assert!((back.i2 - p.i2).abs() < 1e-12 * p.i2.abs().max(1.0));
        }
        assert!(anneal_aniso(&tr, &a0, &cfg, 5).is_err());
    }
}
