//! Recovering a symmetric `C` from a prescribed invariant quintuple.

use nalgebra::{Matrix5, SMatrix, Vector5, Vector6};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{reconstruct_c, rng_from_seed};
use crate::error::{Error, Result};
use crate::tensors::{InvariantPoint, Mat3, SymMat3, SYM_PAIRS};

/// Element-wise bounds on the packed entries of `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CBounds {
    pub lower: [f64; 6],
    pub upper: [f64; 6],
}

impl CBounds {
    pub fn contains(&self, c: &SymMat3) -> bool {
        (0..6).all(|k| c.0[k] >= self.lower[k] && c.0[k] <= self.upper[k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuintupleSolverConfig {
    pub starts: usize,
    pub iterations: usize,
    /// Random rotations screened per start; the best one seeds the iteration.
    pub candidates: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for QuintupleSolverConfig {
    fn default() -> Self {
        QuintupleSolverConfig {
            starts: 20,
            iterations: 200,
            candidates: 64,
            tolerance: 1e-10,
            seed: 0,
        }
    }
}

fn residual(c: &SymMat3, a: &SymMat3, target: &[f64; 5]) -> Vector5<f64> {
    let c2 = c.square();
    let i1 = c.trace();
    let i2 = 0.5 * (i1 * i1 - c2.trace());
    Vector5::new(
        i1 - target[0],
        i2 - target[1],
        c.det() - target[2],
        a.ddot(c) - target[3],
        a.ddot(&c2) - target[4],
    )
}

/// Jacobian of the five invariants with respect to the six packed entries.
fn jacobian(c: &SymMat3, a: &SymMat3) -> SMatrix<f64, 5, 6> {
    let i1 = c.trace();
    let cof = {
        // I3 C⁻¹ as the cofactor matrix, valid also for singular iterates.
        let m = c.0;
        let (c11, c12, c13, c22, c23, c33) = (m[0], m[1], m[2], m[3], m[4], m[5]);
        SymMat3::new(
            c22 * c33 - c23 * c23,
            c13 * c23 - c12 * c33,
            c12 * c23 - c13 * c22,
            c11 * c33 - c13 * c13,
            c12 * c13 - c11 * c23,
            c11 * c22 - c12 * c12,
        )
    };
    let grads = [
        SymMat3::IDENTITY,
        SymMat3::IDENTITY * i1 - *c,
        cof,
        *a,
        a.anticommutator(c),
    ];
    let mut j = SMatrix::<f64, 5, 6>::zeros();
    for (row, g) in grads.iter().enumerate() {
        for (slot, &(p, q)) in SYM_PAIRS.iter().enumerate() {
            let factor = if p == q { 1.0 } else { 2.0 };
            j[(row, slot)] = factor * g.0[slot];
        }
    }
    j
}

fn random_rotation<R: Rng>(rng: &mut R) -> Mat3 {
    let q: [f64; 4] = [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ];
    Mat3::from_quaternion(q)
}

/// Damped minimum-norm Gauss–Newton on the underdetermined 5×6 system.
fn refine(
    mut c: SymMat3,
    a: &SymMat3,
    target: &[f64; 5],
    iterations: usize,
    tol: f64,
) -> (SymMat3, f64) {
    let mut r = residual(&c, a, target);
    let mut err = r.amax();
    let mut mu = 1e-6;
    for _ in 0..iterations {
        if err <= tol {
            break;
        }
        let j = jacobian(&c, a);
        let jjt = j * j.transpose();
        let mut improved = false;
        for _ in 0..30 {
            let m = jjt + Matrix5::identity() * mu;
            let Some(y) = m.cholesky().map(|ch| ch.solve(&r)) else {
                mu *= 10.0;
                continue;
            };
            let step: Vector6<f64> = j.transpose() * y;
            let mut trial = c;
            for k in 0..6 {
                trial.0[k] -= step[k];
            }
            let rt = residual(&trial, a, target);
            if rt.norm() < r.norm() {
                c = trial;
                r = rt;
                err = r.amax();
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (c, err)
}

/// Finds a symmetric positive-definite `C` whose five invariants match `p` to
/// `cfg.tolerance`, optionally within entry bounds.
///
/// Starts are random rotations `RᵀC₀R` of the principal reconstruction `C₀`, which
/// already match `I1..I3`; the best of `cfg.candidates` rotations seeds each start.
pub fn solve_c_from_quintuple(
    p: &InvariantPoint,
    a: &SymMat3,
    bounds: Option<&CBounds>,
    cfg: &QuintupleSolverConfig,
) -> Result<SymMat3> {
    let (i4, i5) = p.pseudo.ok_or(Error::KindMismatch {
        expected: "TransIso",
        got: "Iso",
    })?;
    let target = [p.i1, p.i2, p.i3, i4, i5];
    let c0 = reconstruct_c(p)?;
    let mut rng = rng_from_seed(cfg.seed);
    let mut best = f64::INFINITY;

    for start in 0..cfg.starts.max(1) {
        let mut seed_c = c0;
        let mut seed_err = residual(&c0, a, &target).norm();
        if start > 0 || seed_err > cfg.tolerance {
            for _ in 0..cfg.candidates.max(1) {
                let cand = c0.rotate_t(&random_rotation(&mut rng));
                let e = residual(&cand, a, &target).norm();
                if e < seed_err {
                    seed_err = e;
                    seed_c = cand;
                }
            }
        }
        let (c, err) = refine(seed_c, a, &target, cfg.iterations, cfg.tolerance);
        best = best.min(err);
        if err <= cfg.tolerance
            && c.is_positive_definite()
            && bounds.is_none_or(|b| b.contains(&c))
        {
            return Ok(c);
        }
    }
    Err(Error::NoConvergence(best))
}
