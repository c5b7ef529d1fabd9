//! Sampling in deformation-gradient and invariant space.
//!
//! The permissible invariant region is approximated by the convex hull of the
//! invariant images of many deformation gradients drawn from a box around `I`.
//! Space-filling designs are then obtained by simulated annealing directly in
//! invariant space, under hull-containment and physicality constraints.

mod anneal;
mod hull;
mod physical;
mod quintuple;
mod set;

pub use anneal::{anneal_aniso, anneal_iso, rotation_from_angles, AnnealConfig};
pub use hull::{ConvexHull3, HullFace, CONTAINS_TOL};
pub use physical::{cubic_coefficients, physicality_check, principal_stretches_sq, reconstruct_c};
pub use quintuple::{solve_c_from_quintuple, CBounds, QuintupleSolverConfig};
pub use set::{AnnealStats, SampleSet, SampleSetMetadata, ALGORITHM_VERSION};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensors::{principal_invariants, right_cauchy_green, InvariantPoint, Mat3, UnitVec3};

/// Two invariant points are duplicates if every component differs by less than this.
pub const DUPLICATE_TOL: f64 = 0.01;

/// Deterministic generator used by every seeded routine.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Box of deformation gradients: `F_ii ∈ [1−δ, 1+δ]`, `F_ij ∈ [−δ, δ]` for `i ≠ j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBounds {
    pub delta: f64,
}

impl DomainBounds {
    pub fn new(delta: f64) -> Result<Self> {
        let b = DomainBounds { delta };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "domain delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// Bounds of the row-major entry `k` of `F`.
    pub fn component(&self, k: usize) -> (f64, f64) {
        if k % 4 == 0 {
            (1.0 - self.delta, 1.0 + self.delta)
        } else {
            (-self.delta, self.delta)
        }
    }

    pub fn contains(&self, f: &Mat3) -> bool {
        f.to_row_major().iter().enumerate().all(|(k, &v)| {
            let (lo, hi) = self.component(k);
            v >= lo && v <= hi
        })
    }

    /// Maps a point of the unit 9-cube onto the box.
    pub fn from_unit(&self, u: [f64; 9]) -> Mat3 {
        let mut v = [0.0; 9];
        for k in 0..9 {
            let (lo, hi) = self.component(k);
            v[k] = lo + u[k] * (hi - lo);
        }
        Mat3::from_row_major(v)
    }

    /// Interval bounds of the entries of `C = FᵀF` over the box.
    pub fn c_bounds(&self) -> CBounds {
        let d = self.delta;
        let diag_hi = (1.0 + d).powi(2) + 2.0 * d * d;
        let diag_lo = (1.0 - d).powi(2);
        let off = 2.0 * (1.0 + d) * d + d * d;
        CBounds {
            lower: [diag_lo, -off, -off, diag_lo, -off, diag_lo],
            upper: [diag_hi, off, off, diag_hi, off, diag_hi],
        }
    }
}

/// Latin hypercube design of `n` deformation gradients: every one of the nine
/// components has exactly one sample in each of `n` equal bins.
pub fn lhs_sample(bounds: &DomainBounds, n: usize, seed: u64) -> Vec<Mat3> {
    let mut rng = rng_from_seed(seed);
    lhs_sample_with(bounds, n, &mut rng)
}

pub fn lhs_sample_with<R: Rng>(bounds: &DomainBounds, n: usize, rng: &mut R) -> Vec<Mat3> {
    let mut unit = vec![[0.0f64; 9]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..9 {
        perm.shuffle(rng);
        for (row, &bin) in perm.iter().enumerate() {
            let u: f64 = rng.random();
            unit[row][k] = (bin as f64 + u) / n as f64;
        }
    }
    unit.into_iter().map(|u| bounds.from_unit(u)).collect()
}

/// Uniform random direction on the unit sphere from three standard normals.
pub fn sphere_direction<R: Rng>(rng: &mut R) -> UnitVec3 {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if s >= 1e-12 {
            return UnitVec3([v[0] / s, v[1] / s, v[2] / s]);
        }
    }
}

/// Principal invariants of `FᵀF` for each `F` with positive Jacobian.
pub fn invariant_cloud(fs: &[Mat3]) -> Vec<[f64; 3]> {
    fs.par_iter()
        .filter_map(|f| right_cauchy_green(f).ok())
        .map(|c| principal_invariants(&c).principal())
        .collect()
}

/// Hull of the invariant images of `n_cloud` uniformly drawn deformation gradients.
pub fn build_hull(bounds: &DomainBounds, n_cloud: usize, seed: u64) -> Result<ConvexHull3> {
    bounds.validate()?;
    let mut rng = rng_from_seed(seed);
    let fs: Vec<Mat3> = (0..n_cloud)
        .map(|_| {
            let mut u = [0.0; 9];
            for v in u.iter_mut() {
                *v = rng.random();
            }
            bounds.from_unit(u)
        })
        .collect();
    ConvexHull3::from_points(&invariant_cloud(&fs))
}

pub fn point_in_hull(hull: &ConvexHull3, p: &InvariantPoint) -> bool {
    hull.contains(p.principal())
}

fn is_duplicate(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < DUPLICATE_TOL)
}

/// Indices of the points kept by greedy first-come duplicate removal.
pub fn dedupe_indices(points: &[Vec<f64>]) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if !kept.iter().any(|&k| is_duplicate(&points[k], p)) {
            kept.push(i);
        }
    }
    kept
}

pub fn dedupe(points: &[InvariantPoint]) -> Vec<InvariantPoint> {
    let flat: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
    dedupe_indices(&flat).into_iter().map(|i| points[i]).collect()
}

/// Smallest Euclidean distance between any two rows.
pub fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.min(distance(&points[i], &points[j]));
        }
    }
    best
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lhs_one_sample_per_bin() {
        let b = DomainBounds::new(0.175).unwrap();
        let n = 100;
        let fs = lhs_sample(&b, n, 5);
        for k in 0..9 {
            let (lo, hi) = b.component(k);
            let mut counts = vec![0usize; n];
            for f in &fs {
                let v = f.to_row_major()[k];
                let bin = (((v - lo) / (hi - lo)) * n as f64).floor() as usize;
                counts[bin.min(n - 1)] += 1;
            }
            assert!(counts.iter().all(|&c| c == 1));
        }
        assert_eq!(lhs_sample(&b, 1, 0).len(), 1);
        assert!(b.contains(&lhs_sample(&b, 1, 0)[0]));
        assert_eq!(fs, lhs_sample(&b, n, 5));
    }

    #[test]
    fn delta_is_validated() {
        assert!(DomainBounds::new(0.0).is_err());
        assert!(DomainBounds::new(1.0).is_err());
        assert!(DomainBounds::new(f64::NAN).is_err());
    }

    #[test]
    fn sphere_directions_are_unit_and_centered() {
        let mut rng = rng_from_seed(9);
        let mut mean = [0.0; 3];
        let n = 10_000;
        for _ in 0..n {
            let d = sphere_direction(&mut rng);
            assert!((d.norm() - 1.0).abs() < 1e-14);
            for k in 0..3 {
                mean[k] += d.0[k] / n as f64;
            }
        }
        assert!(mean.iter().all(|m| m.abs() < 0.05));
    }

    #[test]
    fn dedupe_examples() {
        let r = InvariantPoint::REFERENCE_ISO;
        assert_eq!(dedupe(&[r, r]).len(), 1);
        assert_eq!(dedupe(&[r, InvariantPoint::iso(3.009, 3.009, 1.009)]).len(), 1);
        assert_eq!(dedupe(&[r, InvariantPoint::iso(3.02, 3.0, 1.0)]).len(), 2);
    }

    #[test]
    fn c_bounds_enclose_lhs_tensors() {
        let b = DomainBounds::new(0.175).unwrap();
        let cb = b.c_bounds();
        for f in lhs_sample(&b, 2000, 1) {
            let c = right_cauchy_green(&f).unwrap();
            assert!(cb.contains(&c));
        }
    }
}
