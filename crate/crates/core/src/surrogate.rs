//! Trained constitutive surrogates: the classical component-wise map `C ↦ S` and
//! the invariant-to-coefficient maps for isotropic and transversely isotropic
//! materials, with stress and consistent-tangent prediction.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coeffs::{extract, reconstruct_stress, CoeffVector};
use crate::error::{Error, Result};
use crate::gpr::{fit, GprConfig, GprModel, LaGprConfig, LocalGpr, RefitPolicy};
use crate::laws::Law;
use crate::sampling::{dedupe_indices, distance};
use crate::tensors::{
    finite_difference_tensor, generator_basis, generator_gradients, invariant_gradients, invariants,
    InvariantKind, Mat3, SymMat3, Tensor4, UnitVec3,
};

pub const SURROGATE_FORMAT_VERSION: u32 = 1;

/// Relative step of the finite-difference tangent of the classical model.
pub const CLASSICAL_TANGENT_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MappingKind {
    Classical6to6,
    Iso3to3,
    TransIso5to6,
}

impl MappingKind {
    pub const ALL: [MappingKind; 3] = [
        MappingKind::Classical6to6,
        MappingKind::Iso3to3,
        MappingKind::TransIso5to6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MappingKind::Classical6to6 => "classical",
            MappingKind::Iso3to3 => "iso",
            MappingKind::TransIso5to6 => "transiso",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        MappingKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown mapping kind '{s}'")))
    }

    pub fn n_inputs(self) -> usize {
        match self {
            MappingKind::Classical6to6 => 6,
            MappingKind::Iso3to3 => 3,
            MappingKind::TransIso5to6 => 5,
        }
    }

    pub fn n_outputs(self) -> usize {
        match self {
            MappingKind::Iso3to3 => 3,
            _ => 6,
        }
    }

    /// Invariant kind of the physics-informed mappings.
    pub fn invariant_kind(self) -> Option<InvariantKind> {
        match self {
            MappingKind::Classical6to6 => None,
            MappingKind::Iso3to3 => Some(InvariantKind::Iso),
            MappingKind::TransIso5to6 => Some(InvariantKind::TransIso),
        }
    }

    pub fn is_physics_informed(self) -> bool {
        self != MappingKind::Classical6to6
    }
}

/// Rows of a regression dataset in the layout of a [`MappingKind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub kind: MappingKind,
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.len() != self.outputs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs.len(),
                got: self.outputs.len(),
            });
        }
        for (x, y) in self.inputs.iter().zip(&self.outputs) {
            if x.len() != self.kind.n_inputs() {
                return Err(Error::DimensionMismatch {
                    expected: self.kind.n_inputs(),
                    got: x.len(),
                });
            }
            if y.len() != self.kind.n_outputs() {
                return Err(Error::DimensionMismatch {
                    expected: self.kind.n_outputs(),
                    got: y.len(),
                });
            }
        }
        Ok(())
    }

    /// Keeps only the first `n` rows.
    pub fn truncated(mut self, n: usize) -> Self {
        self.inputs.truncate(n);
        self.outputs.truncate(n);
        self
    }
}

/// What happened while building a [`TrainingSet`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub candidates: usize,
    pub kept: usize,
    /// Rows whose generator system was rank deficient (repeated eigenvalues).
    pub rank_deficient: usize,
    /// Largest relative reconstruction residual of the extracted coefficients.
    pub max_relative_residual: f64,
}

/// Classical rows `C ↦ S` in packed `(11,12,13,22,23,33)` order, deduplicated on `C`.
pub fn classical_training_set(cs: &[SymMat3], ss: &[SymMat3]) -> Result<(TrainingSet, DatasetReport)> {
    if cs.len() != ss.len() {
        return Err(Error::DimensionMismatch {
            expected: cs.len(),
            got: ss.len(),
        });
    }
    let rows: Vec<Vec<f64>> = cs.iter().map(|c| c.0.to_vec()).collect();
    let keep = dedupe_indices(&rows);
    let set = TrainingSet {
        kind: MappingKind::Classical6to6,
        inputs: keep.iter().map(|&i| rows[i].clone()).collect(),
        outputs: keep.iter().map(|&i| ss[i].0.to_vec()).collect(),
    };
    let report = DatasetReport {
        candidates: cs.len(),
        kept: set.len(),
        ..Default::default()
    };
    Ok((set, report))
}

/// Invariant rows `I ↦ c`, deduplicated on the invariants.
///
/// Where the generators are linearly dependent (repeated eigenvalues, e.g. at
/// `C = I`) the coefficients are not unique. Such rows take the solution closest
/// to a local quadratic fit through the nearby well-posed rows, which keeps the
/// learned coefficient field smooth.
pub fn invariant_training_set(
    kind: MappingKind,
    cs: &[SymMat3],
    ss: &[SymMat3],
    a0: Option<&UnitVec3>,
) -> Result<(TrainingSet, DatasetReport)> {
    let ik = kind.invariant_kind().ok_or(Error::KindMismatch {
        expected: "physics-informed mapping",
        got: "Classical6to6",
    })?;
    if cs.len() != ss.len() {
        return Err(Error::DimensionMismatch {
            expected: cs.len(),
            got: ss.len(),
        });
    }
    let a = a0.map(|v| v.structural_tensor());
    let points: Vec<Vec<f64>> = cs
        .iter()
        .map(|c| invariants(ik, c, a0).map(|p| p.to_vec()))
        .collect::<Result<_>>()?;
    let keep = dedupe_indices(&points);

    let mut coeffs = Vec::with_capacity(keep.len());
    let mut deficient = Vec::with_capacity(keep.len());
    for &i in &keep {
        let (cv, rep) = extract(ik, &cs[i], &ss[i], a.as_ref(), None)?;
        coeffs.push(cv.values);
        deficient.push(rep.rank_deficient);
    }
    for r in 0..keep.len() {
        if !deficient[r] {
            continue;
        }
        let x0 = &points[keep[r]];
        let mut near: Vec<(f64, usize)> = (0..keep.len())
            .filter(|&s| !deficient[s])
            .map(|s| (distance(&points[keep[s]], x0), s))
            .collect();
        near.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
        near.truncate(2 * quadratic_terms(x0.len()));
        let rows: Vec<(&[f64], &[f64])> = near
            .iter()
            .map(|&(_, s)| (points[keep[s]].as_slice(), coeffs[s].as_slice()))
            .collect();
        if let Some(anchor) = local_quadratic_anchor(x0, &rows) {
            let i = keep[r];
            coeffs[r] = extract(ik, &cs[i], &ss[i], a.as_ref(), Some(&anchor))?.0.values;
        }
    }

    let mut max_rel = 0.0f64;
    for (r, &i) in keep.iter().enumerate() {
        let basis = generator_basis(ik, &cs[i], a.as_ref())?;
        let s_hat = reconstruct_stress(&CoeffVector::new(ik, coeffs[r].clone())?, &basis)?;
        max_rel = max_rel.max((s_hat - ss[i]).norm() / ss[i].norm().max(1e-300));
    }

    let report = DatasetReport {
        candidates: cs.len(),
        kept: keep.len(),
        rank_deficient: deficient.iter().filter(|d| **d).count(),
        max_relative_residual: max_rel,
    };
    let set = TrainingSet {
        kind,
        inputs: keep.iter().map(|&i| points[i].clone()).collect(),
        outputs: coeffs,
    };
    Ok((set, report))
}

/// Coefficients at `x0` extrapolated from nearby well-posed rows by a local
/// quadratic least-squares fit; the nearest row alone when there are too few.
fn local_quadratic_anchor(x0: &[f64], rows: &[(&[f64], &[f64])]) -> Option<Vec<f64>> {
    let (_, nearest) = rows.first()?;
    let j = x0.len();
    let n_terms = quadratic_terms(j);
    if rows.len() < n_terms + 1 {
        return Some(nearest.to_vec());
    }
    // Offsets scaled to O(1) so that the rank cut is meaningful.
    let radius = rows
        .iter()
        .map(|(x, _)| distance(x, x0))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut design = DMatrix::zeros(rows.len(), n_terms);
    for (r, (x, _)) in rows.iter().enumerate() {
        let d: Vec<f64> = x.iter().zip(x0).map(|(a, b)| (a - b) / radius).collect();
        design[(r, 0)] = 1.0;
        let mut col = 1;
        for a in 0..j {
            design[(r, col)] = d[a];
            col += 1;
        }
        for a in 0..j {
            for b in a..j {
                design[(r, col)] = d[a] * d[b];
                col += 1;
            }
        }
    }
    let targets = DMatrix::from_fn(rows.len(), nearest.len(), |r, o| rows[r].1[o]);
    let svd = design.svd(true, true);
    let max_sv = svd.singular_values.max();
    match svd.solve(&targets, 1e-10 * max_sv) {
        Ok(beta) if beta.iter().all(|v| v.is_finite()) => Some(beta.row(0).iter().copied().collect()),
        _ => Some(nearest.to_vec()),
    }
}

fn quadratic_terms(j: usize) -> usize {
    1 + j + j * (j + 1) / 2
}

/// Training rows for `kind` from `C` samples labelled by `law`.
pub fn training_set_from_law(kind: MappingKind, law: &Law, cs: &[SymMat3]) -> Result<(TrainingSet, DatasetReport)> {
    let ss: Vec<SymMat3> = cs.iter().map(|c| law.stress(c)).collect::<Result<_>>()?;
    match kind {
        MappingKind::Classical6to6 => classical_training_set(cs, &ss),
        _ => {
            if kind.invariant_kind() != Some(law.kind()) {
                return Err(Error::KindMismatch {
                    expected: law.kind().name(),
                    got: kind.name(),
                });
            }
            invariant_training_set(kind, cs, &ss, law.direction().as_ref())
        }
    }
}

/// Training-time settings shared by all mapping kinds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateConfig {
    pub gpr: GprConfig,
    pub lagpr: LaGprConfig,
}

/// Where a model came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Identifier (typically a content hash) of the training data.
    pub training_set: String,
    pub law: String,
    pub seed: u64,
}

/// A single global kriging model, or the local approximate variant for large datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Regressor {
    Global { model: GprModel },
    Local { model: LocalGpr },
}

impl Regressor {
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Regressor::Global { model } => model.predict(x),
            Regressor::Local { model } => model.predict(x),
        }
    }

    pub fn predict_grad(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        match self {
            Regressor::Global { model } => model.predict_grad(x),
            Regressor::Local { model } => model.predict_grad(x),
        }
    }

    pub fn n_train(&self) -> usize {
        match self {
            Regressor::Global { model } => model.n_train(),
            Regressor::Local { model } => model.n_train(),
        }
    }

    /// Same regressor with the local refit policy replaced (no effect on global models).
    pub fn with_refit(&self, refit: RefitPolicy) -> Regressor {
        match self {
            Regressor::Global { model } => Regressor::Global { model: model.clone() },
            Regressor::Local { model } => Regressor::Local {
                model: model.with_refit(refit),
            },
        }
    }

    pub fn is_local(&self) -> bool {
        matches!(self, Regressor::Local { .. })
    }

    /// Fitted length scales per output in raw input units (anchor scales for the local variant).
    pub fn theta(&self) -> Vec<Vec<f64>> {
        match self {
            Regressor::Global { model } => model.theta_raw(),
            Regressor::Local { model } => model.anchor_theta().to_vec(),
        }
    }

    fn dims(&self) -> (usize, usize) {
        match self {
            Regressor::Global { model } => (model.n_inputs(), model.n_outputs()),
            Regressor::Local { model } => (model.n_inputs(), model.n_outputs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SurrogateFile")]
pub struct SurrogateModel {
    version: u32,
    kind: MappingKind,
    a0: Option<UnitVec3>,
    regressor: Regressor,
    provenance: Provenance,
}

#[derive(Deserialize)]
struct SurrogateFile {
    version: u32,
    kind: MappingKind,
    a0: Option<UnitVec3>,
    regressor: Regressor,
    provenance: Provenance,
}

impl TryFrom<SurrogateFile> for SurrogateModel {
    type Error = Error;

    fn try_from(f: SurrogateFile) -> Result<Self> {
        if f.version != SURROGATE_FORMAT_VERSION {
            return Err(Error::Persistence(format!(
                "unsupported surrogate format version {}",
                f.version
            )));
        }
        SurrogateModel::assemble(f.kind, f.regressor, f.a0, f.provenance)
    }
}

/// Fits a surrogate of `set.kind`; datasets above `cfg.lagpr.n_switch` rows use
/// local approximate GPR. `a0` is required for `TransIso5to6` and must be the
/// training law's fiber direction.
pub fn train_surrogate(
    set: &TrainingSet,
    a0: Option<UnitVec3>,
    cfg: &SurrogateConfig,
    provenance: Provenance,
) -> Result<SurrogateModel> {
    set.validate()?;
    cfg.gpr.validate()?;
    cfg.lagpr.validate()?;
    let regressor = if set.len() > cfg.lagpr.n_switch {
        Regressor::Local {
            model: LocalGpr::new(&set.inputs, &set.outputs, &cfg.lagpr, &cfg.gpr)?,
        }
    } else {
        Regressor::Global {
            model: fit(&set.inputs, &set.outputs, &cfg.gpr)?,
        }
    };
    SurrogateModel::assemble(set.kind, regressor, a0, provenance)
}

impl SurrogateModel {
    fn assemble(
        kind: MappingKind,
        regressor: Regressor,
        a0: Option<UnitVec3>,
        provenance: Provenance,
    ) -> Result<Self> {
        let (ni, no) = regressor.dims();
        if ni != kind.n_inputs() {
            return Err(Error::DimensionMismatch {
                expected: kind.n_inputs(),
                got: ni,
            });
        }
        if no != kind.n_outputs() {
            return Err(Error::DimensionMismatch {
                expected: kind.n_outputs(),
                got: no,
            });
        }
        let a0 = match kind {
            MappingKind::TransIso5to6 => Some(
                a0.ok_or_else(|| Error::InvalidConfig("TransIso5to6 requires a0".into()))?,
            ),
            _ => None,
        };
        Ok(SurrogateModel {
            version: SURROGATE_FORMAT_VERSION,
            kind,
            a0,
            regressor,
            provenance,
        })
    }

    pub fn kind(&self) -> MappingKind {
        self.kind
    }

    /// The same material described by an observer rotated by `R`: the fiber
    /// direction becomes `Rᵀa0`, the regression is unchanged.
    pub fn rotated_frame(&self, r: &Mat3) -> SurrogateModel {
        let mut m = self.clone();
        m.a0 = self.a0.map(|a| a.rotate_t(r));
        m
    }

    pub fn a0(&self) -> Option<UnitVec3> {
        self.a0
    }

    pub fn structural_tensor(&self) -> Option<SymMat3> {
        self.a0.map(|v| v.structural_tensor())
    }

    /// Copy of the model whose local regressor (if any) uses `refit` at prediction time.
    pub fn with_refit(&self, refit: RefitPolicy) -> SurrogateModel {
        SurrogateModel {
            regressor: self.regressor.with_refit(refit),
            ..self.clone()
        }
    }

    pub fn regressor(&self) -> &Regressor {
        &self.regressor
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn n_train(&self) -> usize {
        self.regressor.n_train()
    }

    /// Regression input for `C`: packed components or invariants.
    pub fn features(&self, c: &SymMat3) -> Result<Vec<f64>> {
        match self.kind.invariant_kind() {
            None => Ok(c.0.to_vec()),
            Some(ik) => Ok(invariants(ik, c, self.a0.as_ref())?.to_vec()),
        }
    }

    /// Predicted generator coefficients (physics-informed kinds only).
    pub fn predict_coefficients(&self, c: &SymMat3) -> Result<CoeffVector> {
        let ik = self.physics_kind()?;
        CoeffVector::new(ik, self.regressor.predict(&self.features(c)?)?)
    }

    pub fn predict_stress(&self, c: &SymMat3) -> Result<SymMat3> {
        match self.kind.invariant_kind() {
            None => {
                let y = self.regressor.predict(&c.0)?;
                Ok(SymMat3([y[0], y[1], y[2], y[3], y[4], y[5]]))
            }
            Some(ik) => {
                let basis = generator_basis(ik, c, self.structural_tensor().as_ref())?;
                reconstruct_stress(&self.predict_coefficients(c)?, &basis)
            }
        }
    }

    /// Material tangent `ℂ = 2∂Ŝ/∂C`.
    ///
    /// Physics-informed kinds use the chain rule through the invariants:
    /// `ℂ = 2 Σⱼ [Hⱼ ⊗ Σₖ (∂ĉⱼ/∂Iₖ) ∂Iₖ/∂C + ĉⱼ ∂Hⱼ/∂C]`. The classical kind
    /// falls back to central differences and is not consistent in that sense.
    pub fn predict_tangent(&self, c: &SymMat3) -> Result<Tensor4> {
        let Some(ik) = self.kind.invariant_kind() else {
            let t = finite_difference_tensor(c, CLASSICAL_TANGENT_STEP, |x| self.predict_stress(x))?;
            return Ok(t.scaled(2.0));
        };
        let a = self.structural_tensor();
        let basis = generator_basis(ik, c, a.as_ref())?;
        let dh = generator_gradients(ik, c, a.as_ref())?;
        let di = invariant_gradients(ik, c, a.as_ref(), self.a0.as_ref())?;
        let x = self.features(c)?;
        let coeffs = self.regressor.predict(&x)?;
        let jac = self.regressor.predict_grad(&x)?;

        let mut t = Tensor4::zeros();
        for (j, h) in basis.generators.iter().enumerate() {
            let mut dc = SymMat3::ZERO;
            for (k, g) in di.iter().enumerate() {
                dc = dc + *g * jac[j][k];
            }
            t.add_scaled(&Tensor4::dyad(h, &dc), 2.0);
            t.add_scaled(&dh[j], 2.0 * coeffs[j]);
        }
        Ok(t)
    }

    fn physics_kind(&self) -> Result<InvariantKind> {
        self.kind.invariant_kind().ok_or(Error::KindMismatch {
            expected: "physics-informed mapping",
            got: "Classical6to6",
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Persistence(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Persistence(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{BonetParams, MooneyRivlinParams};
    use crate::sampling::{lhs_sample, rng_from_seed, DomainBounds};
    use crate::tensors::right_cauchy_green;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn samples(n: usize, seed: u64) -> Vec<SymMat3> {
        let b = DomainBounds::new(0.175).unwrap();
        lhs_sample(&b, n, seed)
            .iter()
            .map(|f| right_cauchy_green(f).unwrap())
            .collect()
    }

    fn random_rotation(seed: u64) -> Mat3 {
        let mut rng = rng_from_seed(seed);
        Mat3::from_quaternion([
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ])
    }

    fn mr() -> Law {
        Law::MooneyRivlin(MooneyRivlinParams::default())
    }

    fn bonet() -> Law {
        Law::Bonet(BonetParams::default())
    }

    fn model(kind: MappingKind, law: &Law, n: usize, with_identity: bool) -> SurrogateModel {
        let mut cs = Vec::new();
        if with_identity {
            cs.push(SymMat3::IDENTITY);
        }
        cs.extend(samples(n, 11));
        let (set, _) = training_set_from_law(kind, law, &cs).unwrap();
        train_surrogate(&set, law.direction(), &SurrogateConfig::default(), Provenance::default()).unwrap()
    }

    #[test]
    fn kinds_have_expected_dimensions() {
        assert_eq!(MappingKind::Iso3to3.n_inputs(), 3);
        assert_eq!(MappingKind::TransIso5to6.n_outputs(), 6);
        assert_eq!(MappingKind::parse("classical").unwrap(), MappingKind::Classical6to6);
        assert!(MappingKind::parse("nope").is_err());
    }

    #[test]
    fn iso_reproduces_reference_stress() {
        let law = mr();
        let m = model(MappingKind::Iso3to3, &law, 60, true);
        let s = m.predict_stress(&SymMat3::IDENTITY).unwrap();
        let s0 = law.stress(&SymMat3::IDENTITY).unwrap();
        assert!(s.max_abs_diff(&s0) <= 1e-6 * s0.norm().max(1.0), "{s:?} {s0:?}");
        // Equals 2c2·I under the printed law.
        assert!((s0.0[0] - 1.6).abs() < 1e-12);
    }

    #[test]
    fn classical_interpolates_training_point() {
        let law = mr();
        let m = model(MappingKind::Classical6to6, &law, 40, true);
        let s = m.predict_stress(&SymMat3::IDENTITY).unwrap();
        let s0 = law.stress(&SymMat3::IDENTITY).unwrap();
        assert!(s.max_abs_diff(&s0) <= 1e-6 * s0.norm().max(1.0));
    }

    #[test]
    fn transiso_reproduces_training_stresses() {
        let law = bonet();
        let cs = samples(50, 3);
        let (set, rep) = training_set_from_law(MappingKind::TransIso5to6, &law, &cs).unwrap();
        assert!(rep.max_relative_residual <= 1e-8);
        let m = train_surrogate(&set, law.direction(), &SurrogateConfig::default(), Provenance::default()).unwrap();
        for c in cs.iter().take(10) {
            let s = law.stress(c).unwrap();
            let p = m.predict_stress(c).unwrap();
            assert!((p - s).norm() <= 1e-6 * s.norm().max(1.0), "{} {}", (p - s).norm(), s.norm());
        }
    }

    #[test]
    fn physics_informed_models_are_equivariant() {
        let law = mr();
        let m = model(MappingKind::Iso3to3, &law, 40, false);
        let c = samples(1, 99)[0];
        for seed in 0..5 {
            let r = random_rotation(seed);
            let lhs = m.predict_stress(&c.rotate_t(&r)).unwrap();
            let rhs = m.predict_stress(&c).unwrap().rotate_t(&r);
            assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * rhs.norm().max(1.0), "{}", lhs.max_abs_diff(&rhs));
        }
        let law = bonet();
        let m = model(MappingKind::TransIso5to6, &law, 40, false);
        let a0 = law.direction().unwrap();
        let r = Mat3::rotation_about(&a0, 0.7);
        let p = m.predict_stress(&c.rotate_t(&r)).unwrap();
        let q = m.predict_stress(&c).unwrap().rotate_t(&r);
        assert!(p.max_abs_diff(&q) <= 1e-12 * q.norm().max(1.0));
        // A general observer change also turns the fiber.
        let r = random_rotation(7);
        let p = m.rotated_frame(&r).predict_stress(&c.rotate_t(&r)).unwrap();
        let q = m.predict_stress(&c).unwrap().rotate_t(&r);
        assert!(p.max_abs_diff(&q) <= 1e-12 * q.norm().max(1.0), "{}", p.max_abs_diff(&q));
    }

    #[test]
    fn tangent_matches_finite_differences() {
        for (kind, law) in [(MappingKind::Iso3to3, mr()), (MappingKind::TransIso5to6, bonet())] {
            let m = model(kind, &law, 50, false);
            for c in samples(5, 21) {
                let t = m.predict_tangent(&c).unwrap();
                let fd = finite_difference_tensor(&c, 1e-5, |x| m.predict_stress(x))
                    .unwrap()
                    .scaled(2.0);
                let rel = t.max_abs_diff(&fd) / t.max_abs().max(1e-300);
                assert!(rel <= 1e-4, "{kind:?}: {rel}");
                assert!(t.minor_symmetry_defect() <= 1e-12 * t.max_abs());
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let law = bonet();
        let m = model(MappingKind::TransIso5to6, &law, 20, false);
        let back = SurrogateModel::from_json(&m.to_json().unwrap()).unwrap();
        let c = samples(1, 5)[0];
        assert_eq!(m.predict_stress(&c).unwrap(), back.predict_stress(&c).unwrap());
        assert!(SurrogateModel::from_json(&m.to_json().unwrap().replace("\"version\": 1", "\"version\": 9")).is_err());
    }

    #[test]
    fn dimension_checks() {
        let set = TrainingSet {
            kind: MappingKind::Iso3to3,
            inputs: vec![vec![3.0, 3.0]],
            outputs: vec![vec![0.0; 3]],
        };
        assert!(matches!(
            train_surrogate(&set, None, &SurrogateConfig::default(), Provenance::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(training_set_from_law(MappingKind::TransIso5to6, &mr(), &samples(3, 1)).is_err());
    }
}
