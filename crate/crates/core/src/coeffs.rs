//! Extraction of generator coefficients from `(C, S)` pairs.
//!
//! For isotropic data the coefficients follow from the common principal frame of
//! `C` and `S`; for transverse isotropy all nine stress components are fitted in
//! the least-squares sense against the six vectorized generators.

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensors::{generator_basis, GeneratorBasis, InvariantKind, SymMat3};

/// Relative tolerance used to cluster repeated eigenvalues of `C`.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-8;
/// Relative tolerance of the coaxiality check on `QᵀSQ`.
pub const COAXIAL_TOL: f64 = 1e-8;
/// Rank threshold relative to the largest diagonal entry of the pivoted `R`.
pub const RANK_TOL: f64 = 1e-10;

/// Generator coefficients `c1..c3` (isotropic) or `c1..c6` (transversely isotropic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffVector {
    pub kind: InvariantKind,
    pub values: Vec<f64>,
}

impl CoeffVector {
    pub fn new(kind: InvariantKind, values: Vec<f64>) -> Result<Self> {
        if values.len() != kind.n_generators() {
            return Err(Error::DimensionMismatch {
                expected: kind.n_generators(),
                got: values.len(),
            });
        }
        Ok(CoeffVector { kind, values })
    }

    pub fn zeros(kind: InvariantKind) -> Self {
        CoeffVector {
            kind,
            values: vec![0.0; kind.n_generators()],
        }
    }
}

/// Number of distinct eigenvalues of `C` found by the isotropic extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Multiplicity {
    Distinct,
    TwoEqual,
    AllEqual,
}

/// Diagnostics of a coefficient extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    /// Frobenius norm of `Σ cᵢHᵢ − S`.
    pub residual: f64,
    pub multiplicity: Multiplicity,
    /// Ratio of extreme singular values of the (reduced) system matrix.
    pub condition: f64,
    pub rank: usize,
    /// Set when the system had lower rank than the number of generators.
    pub rank_deficient: bool,
}

/// `Σ cᵢHᵢ`.
pub fn reconstruct_stress(coeffs: &CoeffVector, basis: &GeneratorBasis) -> Result<SymMat3> {
    if coeffs.kind != basis.kind {
        return Err(Error::KindMismatch {
            expected: basis.kind.name(),
            got: coeffs.kind.name(),
        });
    }
    if coeffs.values.len() != basis.generators.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.generators.len(),
            got: coeffs.values.len(),
        });
    }
    Ok(coeffs
        .values
        .iter()
        .zip(basis.generators.iter())
        .fold(SymMat3::ZERO, |acc, (c, h)| acc + *h * *c))
}

fn singular_value_ratio(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Minimum-norm least-squares solution keeping singular values above `rel_eps·σ_max`.
fn min_norm_solve(m: &DMatrix<f64>, b: &DVector<f64>, rel_eps: f64) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    let eps = rel_eps * svd.singular_values.max();
    if !(eps > 0.0) {
        return DVector::zeros(m.ncols());
    }
    svd.solve(b, eps).expect("u and v were computed")
}

/// Solution of a rank-deficient system closest to `anchor` (minimum norm without one).
fn anchored_solve(
    m: &DMatrix<f64>,
    b: &DVector<f64>,
    rel_eps: f64,
    anchor: Option<&[f64]>,
) -> DVector<f64> {
    match anchor {
        Some(a) => {
            let a = DVector::from_row_slice(a);
            let r = b - m * &a;
            a + min_norm_solve(m, &r, rel_eps)
        }
        None => min_norm_solve(m, b, rel_eps),
    }
}

fn check_anchor(kind: InvariantKind, anchor: Option<&[f64]>) -> Result<()> {
    match anchor {
        Some(a) if a.len() != kind.n_generators() => Err(Error::DimensionMismatch {
            expected: kind.n_generators(),
            got: a.len(),
        }),
        _ => Ok(()),
    }
}

/// Coefficients of `S = c1 I + c2 C + c3 C⁻¹` from the principal frame of `C`.
///
/// Repeated eigenvalues of `C` (relative tolerance [`EIGEN_CLUSTER_TOL`]) collapse
/// duplicate rows; the reduced system is solved in the minimum-norm sense.
pub fn extract_iso(c: &SymMat3, s: &SymMat3) -> Result<(CoeffVector, ExtractionReport)> {
    extract_iso_anchored(c, s, None)
}

/// As [`extract_iso`], but a rank-deficient system is resolved by the solution
/// closest to `anchor` (typically the coefficients of a neighboring sample), which
/// keeps the coefficient field continuous through points of repeated eigenvalues.
pub fn extract_iso_anchored(
    c: &SymMat3,
    s: &SymMat3,
    anchor: Option<&[f64]>,
) -> Result<(CoeffVector, ExtractionReport)> {
    check_anchor(InvariantKind::Iso, anchor)?;
    let basis = generator_basis(InvariantKind::Iso, c, None)?;
    let cm = Matrix3::from_fn(|i, j| c.get(i, j));
    let eig = nalgebra::SymmetricEigen::new(cm);
    let q = eig.eigenvectors;
    let sm = Matrix3::from_fn(|i, j| s.get(i, j));
    let s_principal = q.transpose() * sm * q;

    let s_norm = s.norm();
    let mut off = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                off = off.max(s_principal[(i, j)].abs());
            }
        }
    }
    let tolerance = COAXIAL_TOL * s_norm;
    if off > tolerance && off > f64::MIN_POSITIVE {
        return Err(Error::NotCoaxial {
            residual: off,
            tolerance,
        });
    }

    let mut pairs: Vec<(f64, f64)> = (0..3)
        .map(|k| (eig.eigenvalues[k], s_principal[(k, k)]))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = pairs.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));

    // Group consecutive eigenvalues of C that agree to the cluster tolerance.
    let mut groups: Vec<Vec<(f64, f64)>> = Vec::new();
    for p in pairs {
        match groups.last_mut() {
            Some(g) if (p.0 - g[0].0).abs() <= EIGEN_CLUSTER_TOL * scale => g.push(p),
            _ => groups.push(vec![p]),
        }
    }
    let multiplicity = match groups.len() {
        3 => Multiplicity::Distinct,
        2 => Multiplicity::TwoEqual,
        _ => Multiplicity::AllEqual,
    };

    let k = groups.len();
    let mut v = DMatrix::zeros(k, 3);
    let mut b = DVector::zeros(k);
    for (row, g) in groups.iter().enumerate() {
        let lam = g.iter().map(|p| p.0).sum::<f64>() / g.len() as f64;
        let rhs = g.iter().map(|p| p.1).sum::<f64>() / g.len() as f64;
        v[(row, 0)] = 1.0;
        v[(row, 1)] = lam;
        v[(row, 2)] = 1.0 / lam;
        b[row] = rhs;
    }
    let condition = singular_value_ratio(&v);
    let x = if k == 3 {
        v.clone()
            .lu()
            .solve(&b)
            .unwrap_or_else(|| anchored_solve(&v, &b, 1e-15, anchor))
    } else {
        anchored_solve(&v, &b, 1e-15, anchor)
    };

    let coeffs = CoeffVector::new(InvariantKind::Iso, x.iter().copied().collect())?;
    let residual = (reconstruct_stress(&coeffs, &basis)? - *s).norm();
    Ok((
        coeffs,
        ExtractionReport {
            residual,
            multiplicity,
            condition,
            rank: k,
            rank_deficient: k < 3,
        },
    ))
}

fn vec9(m: &SymMat3) -> [f64; 9] {
    let f = m.to_mat3();
    f.to_row_major()
}

/// Least-squares coefficients of the six transversely isotropic generators,
/// using all nine component equations.
///
/// Full-rank systems are solved through the column-pivoted QR factorization;
/// rank-deficient systems (e.g. `C = I`) fall back to the minimum-norm solution.
pub fn extract_transiso(
    c: &SymMat3,
    s: &SymMat3,
    a: &SymMat3,
) -> Result<(CoeffVector, ExtractionReport)> {
    extract_transiso_anchored(c, s, a, None)
}

/// As [`extract_transiso`], resolving rank deficiency towards `anchor`.
pub fn extract_transiso_anchored(
    c: &SymMat3,
    s: &SymMat3,
    a: &SymMat3,
    anchor: Option<&[f64]>,
) -> Result<(CoeffVector, ExtractionReport)> {
    check_anchor(InvariantKind::TransIso, anchor)?;
    let basis = generator_basis(InvariantKind::TransIso, c, Some(a))?;
    let mut m = DMatrix::zeros(9, 6);
    for (col, g) in basis.generators.iter().enumerate() {
        for (row, v) in vec9(g).into_iter().enumerate() {
            m[(row, col)] = v;
        }
    }
    let b = DVector::from_row_slice(&vec9(s));

    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let diag_max = (0..6).fold(0.0f64, |acc, i| acc.max(r[(i, i)].abs()));
    let rank = (0..6)
        .filter(|&i| r[(i, i)].abs() > RANK_TOL * diag_max)
        .count();

    let x = if rank == 6 {
        let mut qtb = b.clone();
        qr.q_tr_mul(&mut qtb);
        let r6 = r.fixed_view::<6, 6>(0, 0).into_owned();
        let mut z = DVector::from_iterator(6, qtb.iter().take(6).copied());
        if !r6.solve_upper_triangular_mut(&mut z) {
            z = anchored_solve(&m, &b, RANK_TOL, anchor);
        } else {
            qr.p().inv_permute_rows(&mut z);
        }
        z
    } else {
        anchored_solve(&m, &b, RANK_TOL, anchor)
    };

    let coeffs = CoeffVector::new(InvariantKind::TransIso, x.iter().copied().collect())?;
    let residual = (reconstruct_stress(&coeffs, &basis)? - *s).norm();
    let multiplicity = {
        let (vals, _) = c.eigen();
        let scale = vals[2].abs().max(vals[0].abs());
        let gaps = [(vals[1] - vals[0]).abs(), (vals[2] - vals[1]).abs()]
            .iter()
            .filter(|g| **g <= EIGEN_CLUSTER_TOL * scale)
            .count();
        match gaps {
            0 => Multiplicity::Distinct,
            1 => Multiplicity::TwoEqual,
            _ => Multiplicity::AllEqual,
        }
    };
    Ok((
        coeffs,
        ExtractionReport {
            residual,
            multiplicity,
            condition: singular_value_ratio(&m),
            rank,
            rank_deficient: rank < 6,
        },
    ))
}

/// Dispatches on `kind`; `a` is required for `TransIso`.
pub fn extract(
    kind: InvariantKind,
    c: &SymMat3,
    s: &SymMat3,
    a: Option<&SymMat3>,
    anchor: Option<&[f64]>,
) -> Result<(CoeffVector, ExtractionReport)> {
    match kind {
        InvariantKind::Iso => extract_iso_anchored(c, s, anchor),
        InvariantKind::TransIso => {
            let a = a.ok_or_else(|| Error::InvalidConfig("TransIso extraction requires A".into()))?;
            extract_transiso_anchored(c, s, a, anchor)
        }
    }
}
