//! Second- and fourth-order tensor algebra on 3×3 matrices.
//!
//! Symmetric tensors store six entries in the order `(11, 12, 13, 22, 23, 33)`.
//! Derivatives with respect to a symmetric argument are minor-symmetrized, i.e.
//! `∂G_ij/∂C_kl` is the average of the derivatives with respect to `C_kl` and
//! `C_lk` taken as independent variables. Contracting such a tensor with a
//! symmetric increment `dC` gives the directional derivative of `G`.

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this magnitude of `det C` the tensor is treated as singular.
pub const SINGULAR_DET: f64 = 1e-14;

/// Full 3×3 matrix, row-major. Used for the deformation gradient and rotations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    /// Builds a matrix from nine entries in row-major order `(F11, F12, ..., F33)`.
    pub fn from_row_major(v: [f64; 9]) -> Self {
        Mat3([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Mat3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn matmul(&self, other: &Mat3) -> Mat3 {
        let a = &self.0;
        let b = &other.0;
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Mat3(out)
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Upper triangle of the matrix. Exact when the matrix is symmetric.
    pub fn upper_sym(&self) -> SymMat3 {
        let m = &self.0;
        SymMat3([m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]])
    }

    /// Symmetric part `(M + Mᵀ)/2`.
    pub fn sym_part(&self) -> SymMat3 {
        let m = &self.0;
        SymMat3([
            m[0][0],
            0.5 * (m[0][1] + m[1][0]),
            0.5 * (m[0][2] + m[2][0]),
            m[1][1],
            0.5 * (m[1][2] + m[2][1]),
            m[2][2],
        ])
    }

    /// Rotation in the x–y plane (about the z axis).
    pub fn plane_rotation_xy(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Rotation in the x–z plane (about the y axis).
    pub fn plane_rotation_xz(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    /// Rotation in the y–z plane (about the x axis).
    pub fn plane_rotation_yz(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat3([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    }

    /// Rotation by `angle` about a unit axis (Rodrigues).
    pub fn rotation_about(axis: &UnitVec3, angle: f64) -> Self {
        let [x, y, z] = axis.0;
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Mat3([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    /// Rotation from a (not necessarily normalized) quaternion `(w, x, y, z)`.
    pub fn from_quaternion(q: [f64; 4]) -> Self {
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let [w, x, y, z] = [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
        Mat3([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ])
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, rhs: Mat3) -> Mat3 {
        let mut out = self.0;
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += rhs.0[i][j];
            }
        }
        Mat3(out)
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        let mut out = self.0;
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] -= rhs.0[i][j];
            }
        }
        Mat3(out)
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        Mat3(self.0.map(|row| row.map(|v| v * s)))
    }
}

/// Symmetric 3×3 tensor stored as `(m11, m12, m13, m22, m23, m33)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymMat3(pub [f64; 6]);

/// Maps a full index pair to the packed symmetric slot.
#[inline]
pub const fn sym_index(i: usize, j: usize) -> usize {
    const MAP: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
    MAP[i][j]
}

/// Full index pairs of the six packed slots, in storage order.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

impl SymMat3 {
    pub const IDENTITY: SymMat3 = SymMat3([1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
    pub const ZERO: SymMat3 = SymMat3([0.0; 6]);

    pub fn new(m11: f64, m12: f64, m13: f64, m22: f64, m23: f64, m33: f64) -> Self {
        SymMat3([m11, m12, m13, m22, m23, m33])
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        SymMat3([a, 0.0, 0.0, b, 0.0, c])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[sym_index(i, j)]
    }

    pub fn to_mat3(&self) -> Mat3 {
        let m = &self.0;
        Mat3([[m[0], m[1], m[2]], [m[1], m[3], m[4]], [m[2], m[4], m[5]]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[3] + self.0[5]
    }

    pub fn det(&self) -> f64 {
        let [a, d, e, b, f, c] = self.0;
        a * (b * c - f * f) - d * (d * c - f * e) + e * (d * f - b * e)
    }

    /// Frobenius norm of the full tensor (off-diagonals counted twice).
    pub fn norm(&self) -> f64 {
        let m = &self.0;
        (m[0] * m[0]
            + m[3] * m[3]
            + m[5] * m[5]
            + 2.0 * (m[1] * m[1] + m[2] * m[2] + m[4] * m[4]))
            .sqrt()
    }

    /// Full double contraction `A : B`.
    pub fn ddot(&self, other: &SymMat3) -> f64 {
        let a = &self.0;
        let b = &other.0;
        a[0] * b[0] + a[3] * b[3] + a[5] * b[5] + 2.0 * (a[1] * b[1] + a[2] * b[2] + a[4] * b[4])
    }

    /// Inverse via adjugate and determinant.
    pub fn inverse(&self) -> Result<SymMat3> {
        let det = self.det();
        if det.abs() < SINGULAR_DET {
            return Err(Error::SingularC(det.abs()));
        }
        let [a, d, e, b, f, c] = self.0;
        let inv = 1.0 / det;
        Ok(SymMat3([
            (b * c - f * f) * inv,
            (e * f - d * c) * inv,
            (d * f - b * e) * inv,
            (a * c - e * e) * inv,
            (d * e - a * f) * inv,
            (a * b - d * d) * inv,
        ]))
    }

    /// Symmetric product `self · self`.
    pub fn square(&self) -> SymMat3 {
        self.to_mat3().matmul(&self.to_mat3()).upper_sym()
    }

    pub fn matmul(&self, other: &SymMat3) -> Mat3 {
        self.to_mat3().matmul(&other.to_mat3())
    }

    /// `A·B + B·A`, symmetric for symmetric arguments.
    pub fn anticommutator(&self, other: &SymMat3) -> SymMat3 {
        let ab = self.matmul(other);
        let ba = other.matmul(self);
        (ab + ba).upper_sym()
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        self.to_mat3().mul_vec(v)
    }

    /// Rotated tensor `Rᵀ · self · R`.
    pub fn rotate_t(&self, r: &Mat3) -> SymMat3 {
        r.transpose().matmul(&self.to_mat3()).matmul(r).sym_part()
    }

    /// Rotated tensor `R · self · Rᵀ`.
    pub fn rotate(&self, r: &Mat3) -> SymMat3 {
        r.matmul(&self.to_mat3()).matmul(&r.transpose()).sym_part()
    }

    /// Symmetric outer product `(a⊗b + b⊗a)/2`.
    pub fn sym_outer(a: [f64; 3], b: [f64; 3]) -> SymMat3 {
        let mut out = [0.0; 6];
        for (slot, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            out[slot] = 0.5 * (a[i] * b[j] + b[i] * a[j]);
        }
        SymMat3(out)
    }

    pub fn max_abs_diff(&self, other: &SymMat3) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order with the matching eigenvectors (columns).
    pub fn eigen(&self) -> ([f64; 3], Mat3) {
        let m = nalgebra::Matrix3::from_fn(|i, j| self.get(i, j));
        let eig = nalgebra::SymmetricEigen::new(m);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = order.map(|k| eig.eigenvalues[k]);
        let mut vecs = [[0.0; 3]; 3];
        for (col, &k) in order.iter().enumerate() {
            for (row, r) in vecs.iter_mut().enumerate() {
                r[col] = eig.eigenvectors[(row, k)];
            }
        }
        (vals, Mat3(vecs))
    }

    pub fn is_positive_definite(&self) -> bool {
        // Sylvester's criterion.
        let [a, d, _, b, _, _] = self.0;
        a > 0.0 && a * b - d * d > 0.0 && self.det() > 0.0
    }
}

impl Add for SymMat3 {
    type Output = SymMat3;
    fn add(self, rhs: SymMat3) -> SymMat3 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o += r;
        }
        SymMat3(out)
    }
}

impl Sub for SymMat3 {
    type Output = SymMat3;
    fn sub(self, rhs: SymMat3) -> SymMat3 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o -= r;
        }
        SymMat3(out)
    }
}

impl Mul<f64> for SymMat3 {
    type Output = SymMat3;
    fn mul(self, s: f64) -> SymMat3 {
        SymMat3(self.0.map(|v| v * s))
    }
}

impl Neg for SymMat3 {
    type Output = SymMat3;
    fn neg(self) -> SymMat3 {
        SymMat3(self.0.map(|v| -v))
    }
}

/// Unit vector, e.g. the fiber direction `a0` of a transversely isotropic material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVec3(pub [f64; 3]);

impl UnitVec3 {
    pub const TOLERANCE: f64 = 1e-12;

    /// Normalizes `v`. Fails for vectors of (near) zero length.
    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "cannot normalize direction {v:?}"
            )));
        }
        Ok(UnitVec3([v[0] / n, v[1] / n, v[2] / n]))
    }

    /// Accepts `v` only if it is already unit length within [`Self::TOLERANCE`].
    pub fn try_new(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (n - 1.0).abs() > Self::TOLERANCE {
            return Err(Error::InvalidConfig(format!(
                "direction {v:?} has norm {n}, expected 1"
            )));
        }
        Ok(UnitVec3(v))
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Structural tensor `a0 ⊗ a0`.
    pub fn structural_tensor(&self) -> SymMat3 {
        SymMat3::sym_outer(self.0, self.0)
    }

    /// `Rᵀ a0`, the direction seen by an observer rotated by `R`.
    pub fn rotate_t(&self, r: &Mat3) -> UnitVec3 {
        UnitVec3(r.transpose().mul_vec(self.0))
    }
}

/// Which invariant set (and generator basis) a quantity belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InvariantKind {
    Iso,
    TransIso,
}

impl InvariantKind {
    pub fn name(self) -> &'static str {
        match self {
            InvariantKind::Iso => "Iso",
            InvariantKind::TransIso => "TransIso",
        }
    }

    /// Number of invariants used as surrogate inputs.
    pub fn n_invariants(self) -> usize {
        match self {
            InvariantKind::Iso => 3,
            InvariantKind::TransIso => 5,
        }
    }

    /// Number of stress generators.
    pub fn n_generators(self) -> usize {
        match self {
            InvariantKind::Iso => 3,
            InvariantKind::TransIso => 6,
        }
    }
}

/// Principal invariants and, for transverse isotropy, the two pseudo invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantPoint {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub pseudo: Option<(f64, f64)>,
}

impl InvariantPoint {
    /// The undeformed configuration `C = I`.
    pub const REFERENCE_ISO: InvariantPoint = InvariantPoint {
        i1: 3.0,
        i2: 3.0,
        i3: 1.0,
        pseudo: None,
    };
    pub const REFERENCE_TRANSISO: InvariantPoint = InvariantPoint {
        i1: 3.0,
        i2: 3.0,
        i3: 1.0,
        pseudo: Some((1.0, 1.0)),
    };

    pub fn iso(i1: f64, i2: f64, i3: f64) -> Self {
        InvariantPoint {
            i1,
            i2,
            i3,
            pseudo: None,
        }
    }

    pub fn trans_iso(i1: f64, i2: f64, i3: f64, i4: f64, i5: f64) -> Self {
        InvariantPoint {
            i1,
            i2,
            i3,
            pseudo: Some((i4, i5)),
        }
    }

    pub fn kind(&self) -> InvariantKind {
        if self.pseudo.is_some() {
            InvariantKind::TransIso
        } else {
            InvariantKind::Iso
        }
    }

    pub fn principal(&self) -> [f64; 3] {
        [self.i1, self.i2, self.i3]
    }

    pub fn with_pseudo(&self, i4: f64, i5: f64) -> Self {
        InvariantPoint {
            pseudo: Some((i4, i5)),
            ..*self
        }
    }

    /// Invariants as a flat vector, length 3 or 5.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.i1, self.i2, self.i3];
        if let Some((i4, i5)) = self.pseudo {
            v.push(i4);
            v.push(i5);
        }
        v
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match v.len() {
            3 => Ok(InvariantPoint::iso(v[0], v[1], v[2])),
            5 => Ok(InvariantPoint::trans_iso(v[0], v[1], v[2], v[3], v[4])),
            n => Err(Error::DimensionMismatch {
                expected: 3,
                got: n,
            }),
        }
    }
}

/// Ordered stress generators: `[I, C, C⁻¹]` or `[I, C, A, C², AC+CA, AC²+C²A]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorBasis {
    pub kind: InvariantKind,
    pub generators: Vec<SymMat3>,
}

/// Fourth-order tensor with 81 entries indexed `(i, j, k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4(pub [f64; 81]);

impl Default for Tensor4 {
    fn default() -> Self {
        Tensor4([0.0; 81])
    }
}

impl Tensor4 {
    #[inline]
    pub const fn idx(i: usize, j: usize, k: usize, l: usize) -> usize {
        27 * i + 9 * j + 3 * k + l
    }

    pub fn zeros() -> Self {
        Self::default()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[Self::idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.0[Self::idx(i, j, k, l)] = v;
    }

    /// Minor-symmetrized sandwich: the derivative of `P · dC · Q` with respect to a
    /// symmetric `dC`, i.e. `½(P_ik Q_lj + P_il Q_kj)`.
    pub fn sandwich_sym(p: &Mat3, q: &Mat3) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t.set(i, j, k, l, 0.5 * (p[(i, k)] * q[(l, j)] + p[(i, l)] * q[(k, j)]));
                    }
                }
            }
        }
        t
    }

    /// Symmetric fourth-order identity.
    pub fn sym_identity() -> Self {
        Self::sandwich_sym(&Mat3::IDENTITY, &Mat3::IDENTITY)
    }

    /// Dyadic product `(A ⊗ B)_ijkl = A_ij B_kl`.
    pub fn dyad(a: &SymMat3, b: &SymMat3) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t.set(i, j, k, l, a.get(i, j) * b.get(k, l));
                    }
                }
            }
        }
        t
    }

    /// Contraction `T : H` over the trailing index pair.
    pub fn contract(&self, h: &SymMat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        acc += self.get(i, j, k, l) * h.get(k, l);
                    }
                }
                *v = acc;
            }
        }
        Mat3(out)
    }

    pub fn add_scaled(&mut self, other: &Tensor4, s: f64) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += s * b;
        }
    }

    pub fn scaled(&self, s: f64) -> Tensor4 {
        Tensor4(self.0.map(|v| v * s))
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest violation of `T_ijkl = T_jikl` and `T_ijkl = T_ijlk`.
    pub fn minor_symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = self.get(i, j, k, l);
                        worst = worst
                            .max((v - self.get(j, i, k, l)).abs())
                            .max((v - self.get(i, j, l, k)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Tensor assembled from directional derivatives `dG(E_kl)` for the six
    /// symmetric unit directions. Used to build tangents from finite differences.
    pub fn from_sym_directions(columns: &[SymMat3; 6]) -> Tensor4 {
        let mut t = Tensor4::zeros();
        for (slot, &(k, l)) in SYM_PAIRS.iter().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    let v = columns[slot].get(i, j);
                    t.set(i, j, k, l, v);
                    t.set(i, j, l, k, v);
                }
            }
        }
        t
    }
}

/// Symmetric unit direction for slot `(k, l)`: `(e_k⊗e_l + e_l⊗e_k)/2`.
/// Contracting a minor-symmetric tensor with it selects the `(k, l)` column.
pub fn sym_unit_direction(slot: usize) -> SymMat3 {
    let mut e = [0.0; 6];
    e[slot] = if SYM_PAIRS[slot].0 == SYM_PAIRS[slot].1 { 1.0 } else { 0.5 };
    SymMat3(e)
}

/// `C = FᵀF`.
pub fn right_cauchy_green(f: &Mat3) -> Result<SymMat3> {
    let det = f.det();
    if !(det > 0.0) {
        return Err(Error::NonPositiveJacobian(det));
    }
    Ok(f.transpose().matmul(f).upper_sym())
}

/// `(I1, I2, I3) = (tr C, ½(tr²C − tr C²), det C)`.
pub fn principal_invariants(c: &SymMat3) -> InvariantPoint {
    let [a, d, e, b, f, cc] = c.0;
    let i1 = a + b + cc;
    // Sum of principal 2×2 minors equals ½(tr²C − tr C²).
    let i2 = a * b - d * d + a * cc - e * e + b * cc - f * f;
    InvariantPoint::iso(i1, i2, c.det())
}

/// `(I4, I5) = (a0·C a0, a0·C² a0)`.
pub fn pseudo_invariants(c: &SymMat3, a0: &UnitVec3) -> (f64, f64) {
    let ca = c.mul_vec(a0.0);
    let a = a0.0;
    let i4 = a[0] * ca[0] + a[1] * ca[1] + a[2] * ca[2];
    let i5 = ca[0] * ca[0] + ca[1] * ca[1] + ca[2] * ca[2];
    (i4, i5)
}

/// All invariants of `C` for the given kind. `a0` is required for `TransIso`.
pub fn invariants(kind: InvariantKind, c: &SymMat3, a0: Option<&UnitVec3>) -> Result<InvariantPoint> {
    let p = principal_invariants(c);
    match kind {
        InvariantKind::Iso => Ok(p),
        InvariantKind::TransIso => {
            let a0 = a0.ok_or_else(|| Error::InvalidConfig("TransIso requires a0".into()))?;
            let (i4, i5) = pseudo_invariants(c, a0);
            Ok(p.with_pseudo(i4, i5))
        }
    }
}

fn structural(kind: InvariantKind, a: Option<&SymMat3>) -> Result<Option<SymMat3>> {
    match (kind, a) {
        (InvariantKind::Iso, _) => Ok(None),
        (InvariantKind::TransIso, Some(a)) => Ok(Some(*a)),
        (InvariantKind::TransIso, None) => Err(Error::InvalidConfig(
            "TransIso generators require the structural tensor A".into(),
        )),
    }
}

/// Stress generators of `kind` evaluated at `C`.
pub fn generator_basis(kind: InvariantKind, c: &SymMat3, a: Option<&SymMat3>) -> Result<GeneratorBasis> {
    let det = c.det();
    if det.abs() < SINGULAR_DET {
        return Err(Error::SingularC(det.abs()));
    }
    let generators = match structural(kind, a)? {
        None => vec![SymMat3::IDENTITY, *c, c.inverse()?],
        Some(a) => {
            let c2 = c.square();
            vec![
                SymMat3::IDENTITY,
                *c,
                a,
                c2,
                a.anticommutator(c),
                a.anticommutator(&c2),
            ]
        }
    };
    Ok(GeneratorBasis { kind, generators })
}

/// Gradients `∂I_k/∂C` of the invariants: three for `Iso`, five for `TransIso`.
pub fn invariant_gradients(
    kind: InvariantKind,
    c: &SymMat3,
    a: Option<&SymMat3>,
    a0: Option<&UnitVec3>,
) -> Result<Vec<SymMat3>> {
    let det = c.det();
    if det.abs() < SINGULAR_DET {
        return Err(Error::SingularC(det.abs()));
    }
    let i1 = c.trace();
    let mut grads = vec![
        SymMat3::IDENTITY,
        SymMat3::IDENTITY * i1 - *c,
        c.inverse()? * det,
    ];
    if let Some(a) = structural(kind, a)? {
        let a0 = a0.ok_or_else(|| Error::InvalidConfig("TransIso gradients require a0".into()))?;
        let ca = c.mul_vec(a0.0);
        grads.push(a);
        // a0⊗Ca0 + Ca0⊗a0
        grads.push(SymMat3::sym_outer(a0.0, ca) * 2.0);
    }
    Ok(grads)
}

/// Fourth-order gradients `∂H/∂C` of every generator, minor-symmetrized.
pub fn generator_gradients(kind: InvariantKind, c: &SymMat3, a: Option<&SymMat3>) -> Result<Vec<Tensor4>> {
    let det = c.det();
    if det.abs() < SINGULAR_DET {
        return Err(Error::SingularC(det.abs()));
    }
    let id = Mat3::IDENTITY;
    let cm = c.to_mat3();
    match structural(kind, a)? {
        None => {
            let ci = c.inverse()?.to_mat3();
            Ok(vec![
                Tensor4::zeros(),
                Tensor4::sym_identity(),
                Tensor4::sandwich_sym(&ci, &ci).scaled(-1.0),
            ])
        }
        Some(a) => {
            let am = a.to_mat3();
            let mut dc2 = Tensor4::sandwich_sym(&id, &cm);
            dc2.add_scaled(&Tensor4::sandwich_sym(&cm, &id), 1.0);
            let mut dac = Tensor4::sandwich_sym(&am, &id);
            dac.add_scaled(&Tensor4::sandwich_sym(&id, &am), 1.0);
            // d(AC² + C²A)[E] = A E C + (AC) E I + I E (CA) + C E A
            let mut dac2 = Tensor4::sandwich_sym(&am, &cm);
            dac2.add_scaled(&Tensor4::sandwich_sym(&am.matmul(&cm), &id), 1.0);
            dac2.add_scaled(&Tensor4::sandwich_sym(&id, &cm.matmul(&am)), 1.0);
            dac2.add_scaled(&Tensor4::sandwich_sym(&cm, &am), 1.0);
            Ok(vec![
                Tensor4::zeros(),
                Tensor4::sym_identity(),
                Tensor4::zeros(),
                dc2,
                dac,
                dac2,
            ])
        }
    }
}

/// Central-difference derivative of a symmetric-tensor map, returned as a
/// minor-symmetric fourth-order tensor. Each symmetric pair `(kl)/(lk)` is
/// perturbed together. Step `h = rel_step · max(1, ‖C‖)`.
pub fn finite_difference_tensor<F>(c: &SymMat3, rel_step: f64, mut f: F) -> Result<Tensor4>
where
    F: FnMut(&SymMat3) -> Result<SymMat3>,
{
    let h = rel_step * c.norm().max(1.0);
    let mut cols = [SymMat3::ZERO; 6];
    for (slot, col) in cols.iter_mut().enumerate() {
        let mut dir = SymMat3::ZERO;
        dir.0[slot] = 1.0;
        let plus = f(&(*c + dir * h))?;
        let minus = f(&(*c - dir * h))?;
        let d = (plus - minus) * (1.0 / (2.0 * h));
        // Perturbing the packed off-diagonal slot by h moves both C_kl and C_lk,
        // so the symmetrized derivative is half the raw difference quotient.
        *col = if SYM_PAIRS[slot].0 == SYM_PAIRS[slot].1 { d } else { d * 0.5 };
    }
    Ok(Tensor4::from_sym_directions(&cols))
}

/// Central-difference gradient of a scalar map of a symmetric tensor.
pub fn finite_difference_gradient<F>(c: &SymMat3, rel_step: f64, mut f: F) -> SymMat3
where
    F: FnMut(&SymMat3) -> f64,
{
    let h = rel_step * c.norm().max(1.0);
    let mut g = SymMat3::ZERO;
    for slot in 0..6 {
        let mut dir = SymMat3::ZERO;
        dir.0[slot] = 1.0;
        let d = (f(&(*c + dir * h)) - f(&(*c - dir * h))) / (2.0 * h);
        g.0[slot] = if SYM_PAIRS[slot].0 == SYM_PAIRS[slot].1 { d } else { 0.5 * d };
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_c() -> SymMat3 {
        SymMat3::diag(1.4, 1.1, 0.8)
    }

    fn sample_a0() -> UnitVec3 {
        UnitVec3::normalized([1.0, 2.0, 1.0]).unwrap()
    }

    #[test]
    fn right_cauchy_green_simple_cases() {
        assert_eq!(right_cauchy_green(&Mat3::IDENTITY).unwrap(), SymMat3::IDENTITY);
        let c = right_cauchy_green(&Mat3::diag(2.0, 1.0, 1.0)).unwrap();
        assert_eq!(c, SymMat3::diag(4.0, 1.0, 1.0));
        assert!(matches!(
            right_cauchy_green(&Mat3::diag(-1.0, 1.0, 1.0)),
            Err(Error::NonPositiveJacobian(_))
        ));
        assert!(right_cauchy_green(&Mat3::ZERO).is_err());
    }

    #[test]
    fn invariants_of_reference_example() {
        let p = principal_invariants(&sample_c());
        assert!((p.i1 - 3.3).abs() < 1e-12);
        assert!((p.i2 - 3.54).abs() < 1e-12);
        assert!((p.i3 - 1.232).abs() < 1e-12);
        let (i4, i5) = pseudo_invariants(&sample_c(), &sample_a0());
        assert!((i4 - 1.1).abs() < 1e-12);
        assert!((i5 - 1.24).abs() < 1e-12);

        let r = Mat3::plane_rotation_yz(0.1);
        let rotated = sample_c().rotate_t(&r);
        assert!((rotated.get(1, 1) - 1.097).abs() < 1e-3);
        assert!((rotated.get(1, 2) + 0.029).abs() < 1e-3);
        let (i4, i5) = pseudo_invariants(&rotated, &sample_a0());
        assert!((i4 - 1.078).abs() < 2e-3, "{i4}");
        assert!((i5 - 1.199).abs() < 2e-3, "{i5}");
    }

    #[test]
    fn identity_invariants() {
        let p = principal_invariants(&SymMat3::IDENTITY);
        assert_eq!(p.principal(), [3.0, 3.0, 1.0]);
        let (i4, i5) = pseudo_invariants(&SymMat3::IDENTITY, &sample_a0());
        assert!((i4 - 1.0).abs() < 1e-15 && (i5 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn generator_basis_special_cases() {
        let b = generator_basis(InvariantKind::Iso, &SymMat3::IDENTITY, None).unwrap();
        assert!(b.generators.iter().all(|g| *g == SymMat3::IDENTITY));

        let a = sample_a0().structural_tensor();
        let b = generator_basis(InvariantKind::TransIso, &SymMat3::IDENTITY, Some(&a)).unwrap();
        let expect = [SymMat3::IDENTITY, SymMat3::IDENTITY, a, SymMat3::IDENTITY, a * 2.0, a * 2.0];
        for (g, e) in b.generators.iter().zip(expect.iter()) {
            assert!(g.max_abs_diff(e) < 1e-15);
        }

        let b = generator_basis(InvariantKind::Iso, &SymMat3::diag(4.0, 1.0, 1.0), None).unwrap();
        assert_eq!(b.generators[2], SymMat3::diag(0.25, 1.0, 1.0));

        let singular = SymMat3::diag(1.0, 1.0, 0.0);
        assert!(matches!(
            generator_basis(InvariantKind::Iso, &singular, None),
            Err(Error::SingularC(_))
        ));
        assert!(generator_basis(InvariantKind::TransIso, &SymMat3::IDENTITY, None).is_err());
    }

    #[test]
    fn invariant_gradient_special_cases() {
        let c = SymMat3::new(1.2, 0.1, -0.05, 0.9, 0.02, 1.1);
        let g = invariant_gradients(InvariantKind::Iso, &c, None, None).unwrap();
        assert_eq!(g[0], SymMat3::IDENTITY);
        let g = invariant_gradients(InvariantKind::Iso, &SymMat3::IDENTITY, None, None).unwrap();
        assert!(g[2].max_abs_diff(&SymMat3::IDENTITY) < 1e-15);
    }

    #[test]
    fn identity_generator_gradient_vanishes() {
        let c = SymMat3::new(1.2, 0.1, -0.05, 0.9, 0.02, 1.1);
        let g = generator_gradients(InvariantKind::Iso, &c, None).unwrap();
        assert_eq!(g[0].max_abs(), 0.0);
    }

    #[test]
    fn square_gradient_at_identity_doubles_increment() {
        let a = sample_a0().structural_tensor();
        let g = generator_gradients(InvariantKind::TransIso, &SymMat3::IDENTITY, Some(&a)).unwrap();
        let h = SymMat3::new(0.3, -0.2, 0.1, 0.5, 0.7, -0.4);
        let out = g[3].contract(&h);
        assert!(out.upper_sym().max_abs_diff(&(h * 2.0)) < 1e-15);
    }

    #[test]
    fn inverse_round_trip() {
        let c = SymMat3::new(1.2, 0.1, -0.05, 0.9, 0.02, 1.1);
        let prod = c.matmul(&c.inverse().unwrap());
        assert!((prod - Mat3::IDENTITY).frobenius_norm() < 1e-14);
    }

    #[test]
    fn sym_index_layout() {
        let m = SymMat3::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        assert_eq!(m.get(2, 1), 5.0);
        assert_eq!(m.to_mat3().upper_sym(), m);
        assert_eq!(sym_unit_direction(1).get(0, 1), 0.5);
    }
}
