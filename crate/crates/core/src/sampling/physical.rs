//! Realizability of principal invariant triples and principal-strain reconstruction.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tensors::{InvariantPoint, SymMat3};

const DEGENERATE_TOL: f64 = 1e-12;
const ARCCOS_SLACK: f64 = 1e-10;

/// `(H, G)` of the depressed characteristic cubic of `C`.
pub fn cubic_coefficients(i1: f64, i2: f64, i3: f64) -> (f64, f64) {
    let h = (i1 * i1 - 3.0 * i2) / 9.0;
    let g = i1 * i2 / 3.0 - i3 - 2.0 * i1.powi(3) / 27.0;
    (h, g)
}

/// Squared principal stretches (ascending) of the triple, if it is realizable.
///
/// Three real roots require `H ≥ 0` and `G² ≤ 4H³`, i.e. a real angle
/// `β = arccos(−G / (2H^{3/2}))`. The roots must also be non-negative.
pub fn principal_stretches_sq(i1: f64, i2: f64, i3: f64) -> Option<[f64; 3]> {
    if ![i1, i2, i3].iter().all(|v| v.is_finite()) {
        return None;
    }
    let (h, g) = cubic_coefficients(i1, i2, i3);
    let roots = if h < DEGENERATE_TOL {
        if g.abs() < DEGENERATE_TOL && h > -DEGENERATE_TOL {
            [i1 / 3.0; 3]
        } else {
            return None;
        }
    } else {
        let arg = -g / (2.0 * h.powf(1.5));
        if arg.abs() > 1.0 + ARCCOS_SLACK {
            return None;
        }
        let beta = arg.clamp(-1.0, 1.0).acos();
        let r = 2.0 * h.sqrt();
        [
            i1 / 3.0 - r * ((PI - beta) / 3.0).cos(),
            i1 / 3.0 - r * ((PI + beta) / 3.0).cos(),
            i1 / 3.0 + r * (beta / 3.0).cos(),
        ]
    };
    let slack = DEGENERATE_TOL * i1.abs().max(1.0);
    if roots.iter().any(|&l| l < -slack) {
        return None;
    }
    Some(roots.map(|l| l.max(0.0)))
}

/// True iff `(I1, I2, I3)` are the invariants of a symmetric positive
/// semi-definite tensor.
pub fn physicality_check(p: &InvariantPoint) -> bool {
    principal_stretches_sq(p.i1, p.i2, p.i3).is_some()
}

/// `C = diag(λ₁², λ₂², λ₃²)` with ascending entries.
pub fn reconstruct_c(p: &InvariantPoint) -> Result<SymMat3> {
    principal_stretches_sq(p.i1, p.i2, p.i3)
        .map(|l| SymMat3::diag(l[0], l[1], l[2]))
        .ok_or(Error::Unphysical(p.i1, p.i2, p.i3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensors::principal_invariants;

    #[test]
    fn reference_point_uses_degenerate_branch() {
        let p = InvariantPoint::REFERENCE_ISO;
        assert_eq!(cubic_coefficients(3.0, 3.0, 1.0), (0.0, 0.0));
        assert!(physicality_check(&p));
        assert_eq!(reconstruct_c(&p).unwrap(), SymMat3::IDENTITY);
    }

    #[test]
    fn hand_evaluated_triple() {
        let (h, g) = cubic_coefficients(3.3, 3.54, 1.232);
        assert!((h - 0.03).abs() < 1e-14);
        assert!(g.abs() < 1e-14);
        let c = reconstruct_c(&InvariantPoint::iso(3.3, 3.54, 1.232)).unwrap();
        assert!(c.max_abs_diff(&SymMat3::diag(0.8, 1.1, 1.4)) < 1e-12);
        let back = principal_invariants(&c);
        assert!((back.i2 - 3.54).abs() < 1e-12);
    }

    #[test]
    fn complex_roots_fail() {
        assert!(!physicality_check(&InvariantPoint::iso(3.0, 10.0, 1.0)));
        assert!(matches!(
            reconstruct_c(&InvariantPoint::iso(3.0, 10.0, 1.0)),
            Err(Error::Unphysical(..))
        ));
    }

    #[test]
    fn negative_roots_fail() {
        // Roots 2, 1, −0.5.
        let (i1, i2, i3) = (2.5, 2.0 - 1.0 - 0.5, -1.0);
        assert!(!physicality_check(&InvariantPoint::iso(i1, i2, i3)));
    }

    #[test]
    fn double_root_round_trip() {
        let c = SymMat3::diag(0.9, 0.9, 1.3);
        let p = principal_invariants(&c);
        let r = reconstruct_c(&p).unwrap();
        let q = principal_invariants(&r);
        for (a, b) in p.principal().iter().zip(q.principal().iter()) {
            assert!((a - b).abs() <= 1e-9 * a.abs());
        }
    }
}
