//! Analytic hyperelastic laws used as ground truth: a compressible Mooney-Rivlin
//! model (isotropic) and the Bonet-Burton transversely isotropic model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensors::{
    finite_difference_tensor, principal_invariants, pseudo_invariants, InvariantKind, SymMat3,
    Tensor4, UnitVec3,
};

/// Which assignment of the published Mooney-Rivlin constants to `(c, c1, c2)` is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MooneyRivlinPreset {
    /// `c = 1, c1 = 0.2, c2 = 0.8`.
    VolumetricFirst,
    /// `c = 1, c1 = 1, c2 = 0.2`.
    DeviatoricFirst,
}

/// Constants of `Ψ = c(J−1)² − 2(c1+c2) ln J + c1(I1−3) + c2(I2−3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MooneyRivlinParams {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    /// Use `2(c1 + 2c2)` in the `ln J` term so that `S(I) = 0`.
    #[serde(default)]
    pub stress_free_reference: bool,
}

impl Default for MooneyRivlinParams {
    fn default() -> Self {
        Self::preset(MooneyRivlinPreset::VolumetricFirst)
    }
}

impl MooneyRivlinParams {
    pub fn preset(preset: MooneyRivlinPreset) -> Self {
        let (c, c1, c2) = match preset {
            MooneyRivlinPreset::VolumetricFirst => (1.0, 0.2, 0.8),
            MooneyRivlinPreset::DeviatoricFirst => (1.0, 1.0, 0.2),
        };
        MooneyRivlinParams {
            c,
            c1,
            c2,
            stress_free_reference: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !(self.c1 >= 0.0) || !(self.c2 >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "Mooney-Rivlin constants must satisfy c > 0, c1 >= 0, c2 >= 0 (got {self:?})"
            )));
        }
        Ok(())
    }

    /// Coefficient multiplying `ln J` in the energy (and `C⁻¹` in the stress).
    fn log_coefficient(&self) -> f64 {
        if self.stress_free_reference {
            2.0 * (self.c1 + 2.0 * self.c2)
        } else {
            2.0 * (self.c1 + self.c2)
        }
    }

    pub fn energy(&self, c: &SymMat3) -> Result<f64> {
        let p = principal_invariants(c);
        if !(p.i3 > 0.0) {
            return Err(Error::SingularC(p.i3.abs()));
        }
        let j = p.i3.sqrt();
        Ok(self.c * (j - 1.0).powi(2) - self.log_coefficient() * j.ln()
            + self.c1 * (p.i1 - 3.0)
            + self.c2 * (p.i2 - 3.0))
    }

    /// Closed-form generator coefficients of `S = k1 I + k2 C + k3 C⁻¹`.
    pub fn coefficients(&self, c: &SymMat3) -> Result<[f64; 3]> {
        let p = principal_invariants(c);
        if !(p.i3 > 0.0) {
            return Err(Error::SingularC(p.i3.abs()));
        }
        let j = p.i3.sqrt();
        Ok([
            2.0 * (self.c1 + self.c2 * p.i1),
            -2.0 * self.c2,
            2.0 * self.c * j * (j - 1.0) - self.log_coefficient(),
        ])
    }

    pub fn stress(&self, c: &SymMat3) -> Result<SymMat3> {
        let [k1, k2, k3] = self.coefficients(c)?;
        Ok(SymMat3::IDENTITY * k1 + *c * k2 + c.inverse()? * k3)
    }
}

/// Constants of the Bonet-Burton transversely isotropic law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BonetParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a0: UnitVec3,
}

impl Default for BonetParams {
    fn default() -> Self {
        BonetParams {
            alpha: 1.585e5,
            beta: 5e4,
            gamma: 1.8e5,
            a0: UnitVec3::normalized([1.0, 2.0, 1.0]).expect("nonzero"),
        }
    }
}

impl BonetParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.gamma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "Bonet moduli must be positive (got {self:?})"
            )));
        }
        UnitVec3::try_new(self.a0.0)?;
        Ok(())
    }

    /// `Ψ = [α + β ln I3 + γ(I4−1)](I4−1) − ½α(I5−1)`, whose derivative `2∂Ψ/∂C`
    /// is exactly [`BonetParams::stress`] (the `2β ln J` factor of the stress).
    pub fn energy(&self, c: &SymMat3) -> Result<f64> {
        let p = principal_invariants(c);
        if !(p.i3 > 0.0) {
            return Err(Error::SingularC(p.i3.abs()));
        }
        let (i4, i5) = pseudo_invariants(c, &self.a0);
        Ok((self.alpha + self.beta * p.i3.ln() + self.gamma * (i4 - 1.0)) * (i4 - 1.0)
            - 0.5 * self.alpha * (i5 - 1.0))
    }

    /// `S = 2β(I4−1)C⁻¹ + 2[α + 2β ln J + 2γ(I4−1)] A − α(Ca0⊗a0 + a0⊗Ca0)`.
    pub fn stress(&self, c: &SymMat3) -> Result<SymMat3> {
        let p = principal_invariants(c);
        if !(p.i3 > 0.0) {
            return Err(Error::SingularC(p.i3.abs()));
        }
        let (i4, _) = pseudo_invariants(c, &self.a0);
        let ln_j = 0.5 * p.i3.ln();
        let a = self.a0.structural_tensor();
        let ca = c.mul_vec(self.a0.0);
        let fiber = SymMat3::sym_outer(ca, self.a0.0) * 2.0;
        Ok(c.inverse()? * (2.0 * self.beta * (i4 - 1.0))
            + a * (2.0 * (self.alpha + 2.0 * self.beta * ln_j + 2.0 * self.gamma * (i4 - 1.0)))
            - fiber * self.alpha)
    }

    /// Coefficients in the six-generator basis. The `C⁻¹` term is rewritten with
    /// Cayley-Hamilton, `C⁻¹ = (C² − I1 C + I2 I)/I3`.
    pub fn coefficients(&self, c: &SymMat3) -> Result<[f64; 6]> {
        let p = principal_invariants(c);
        if !(p.i3 > 0.0) {
            return Err(Error::SingularC(p.i3.abs()));
        }
        let (i4, _) = pseudo_invariants(c, &self.a0);
        let k = 2.0 * self.beta * (i4 - 1.0) / p.i3;
        let ln_j = 0.5 * p.i3.ln();
        Ok([
            k * p.i2,
            -k * p.i1,
            2.0 * (self.alpha + 2.0 * self.beta * ln_j + 2.0 * self.gamma * (i4 - 1.0)),
            k,
            -self.alpha,
            0.0,
        ])
    }
}

/// A ground-truth constitutive law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Law {
    MooneyRivlin(MooneyRivlinParams),
    Bonet(BonetParams),
}

impl Law {
    pub fn id(&self) -> &'static str {
        match self {
            Law::MooneyRivlin(_) => "mooney-rivlin",
            Law::Bonet(_) => "bonet",
        }
    }

    pub fn kind(&self) -> InvariantKind {
        match self {
            Law::MooneyRivlin(_) => InvariantKind::Iso,
            Law::Bonet(_) => InvariantKind::TransIso,
        }
    }

    /// Fiber direction, if the law is anisotropic.
    pub fn direction(&self) -> Option<UnitVec3> {
        match self {
            Law::MooneyRivlin(_) => None,
            Law::Bonet(p) => Some(p.a0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Law::MooneyRivlin(p) => p.validate(),
            Law::Bonet(p) => p.validate(),
        }
    }

    pub fn stress(&self, c: &SymMat3) -> Result<SymMat3> {
        match self {
            Law::MooneyRivlin(p) => p.stress(c),
            Law::Bonet(p) => p.stress(c),
        }
    }

    pub fn energy(&self, c: &SymMat3) -> Result<f64> {
        match self {
            Law::MooneyRivlin(p) => p.energy(c),
            Law::Bonet(p) => p.energy(c),
        }
    }

    /// Law with the fiber direction replaced by `Rᵀa0` (observer change).
    pub fn with_direction(&self, a0: UnitVec3) -> Law {
        match *self {
            Law::MooneyRivlin(p) => Law::MooneyRivlin(p),
            Law::Bonet(p) => Law::Bonet(BonetParams { a0, ..p }),
        }
    }
}

/// Material tangent `ℂ = 2∂S/∂C` of a law by central differences (step 1e-6).
pub fn law_tangent(law: &Law, c: &SymMat3) -> Result<Tensor4> {
    let t = finite_difference_tensor(c, 1e-6, |x| law.stress(x))?;
    Ok(t.scaled(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensors::{finite_difference_gradient, Mat3};

    fn sample_c() -> SymMat3 {
        SymMat3::new(1.15, 0.07, -0.04, 0.93, 0.05, 1.05)
    }

    #[test]
    fn mooney_rivlin_reference_stress() {
        let p = MooneyRivlinParams::default();
        let s = p.stress(&SymMat3::IDENTITY).unwrap();
        assert!(s.max_abs_diff(&(SymMat3::IDENTITY * (2.0 * p.c2))) < 1e-14);

        let p0 = MooneyRivlinParams { c2: 0.0, ..p };
        assert!(p0.stress(&SymMat3::IDENTITY).unwrap().norm() < 1e-14);

        let corrected = MooneyRivlinParams {
            stress_free_reference: true,
            ..p
        };
        assert!(corrected.stress(&SymMat3::IDENTITY).unwrap().norm() < 1e-14);
    }

    #[test]
    fn mooney_rivlin_matches_energy_derivative() {
        for stress_free_reference in [false, true] {
            let p = MooneyRivlinParams {
                stress_free_reference,
                ..MooneyRivlinParams::default()
            };
            let c = sample_c();
            let g = finite_difference_gradient(&c, 1e-6, |x| p.energy(x).unwrap()) * 2.0;
            let s = p.stress(&c).unwrap();
            assert!(s.max_abs_diff(&g) < 1e-6 * s.norm(), "{s:?} vs {g:?}");
        }
    }

    #[test]
    fn bonet_reference_stress_vanishes() {
        let p = BonetParams::default();
        let s = p.stress(&SymMat3::IDENTITY).unwrap();
        assert!(s.norm() < 1e-9, "{s:?}");
    }

    #[test]
    fn bonet_matches_energy_derivative() {
        let p = BonetParams::default();
        let c = sample_c();
        let g = finite_difference_gradient(&c, 1e-6, |x| p.energy(x).unwrap()) * 2.0;
        let s = p.stress(&c).unwrap();
        assert!(s.max_abs_diff(&g) < 1e-6 * s.norm(), "{s:?} vs {g:?}");
    }

    #[test]
    fn bonet_coefficients_reproduce_stress() {
        let p = BonetParams::default();
        let c = sample_c();
        let k = p.coefficients(&c).unwrap();
        let a = p.a0.structural_tensor();
        let c2 = c.square();
        let s = SymMat3::IDENTITY * k[0]
            + c * k[1]
            + a * k[2]
            + c2 * k[3]
            + a.anticommutator(&c) * k[4]
            + a.anticommutator(&c2) * k[5];
        let truth = p.stress(&c).unwrap();
        assert!(s.max_abs_diff(&truth) < 1e-9 * truth.norm());
    }

    #[test]
    fn bonet_symmetry_about_fiber() {
        let p = BonetParams::default();
        let r = Mat3::rotation_about(&p.a0, 0.7);
        let c0 = sample_c();
        let rotated = p.stress(&c0.rotate_t(&r)).unwrap();
        let expected = p.stress(&c0).unwrap().rotate_t(&r);
        assert!(rotated.max_abs_diff(&expected) < 1e-10 * expected.norm().max(1.0));
    }

    #[test]
    fn tangent_minor_symmetry() {
        let law = Law::Bonet(BonetParams::default());
        let t = law_tangent(&law, &sample_c()).unwrap();
        assert!(t.minor_symmetry_defect() <= 1e-12 * t.max_abs());
    }

    #[test]
    fn small_strain_limit_of_mooney_rivlin() {
        // With c2 = 0 the reference state is stress free and the tangent at C = I is
        // λ I⊗I + 2μ 𝕀ˢ with λ = 2c and μ = 2 c1 (from the second derivative of Ψ).
        let p = MooneyRivlinParams {
            c: 1.0,
            c1: 0.2,
            c2: 0.0,
            stress_free_reference: false,
        };
        let t = law_tangent(&Law::MooneyRivlin(p), &SymMat3::IDENTITY).unwrap();
        let lambda = 2.0 * p.c;
        let mu = 2.0 * p.c1;
        let mut expected = Tensor4::dyad(&SymMat3::IDENTITY, &SymMat3::IDENTITY).scaled(lambda);
        expected.add_scaled(&Tensor4::sym_identity(), 2.0 * mu);
        assert!(t.max_abs_diff(&expected) < 1e-6, "{}", t.max_abs_diff(&expected));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let bad = MooneyRivlinParams {
            c: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = BonetParams {
            alpha: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
