//! Experiment configuration: a TOML file with dotted keys such as `law.name`,
//! `domain.delta`, `sample.N`, `anneal.NT`, `gpr.n_inducing` and `seeds.*`.
//! Unknown keys are rejected.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use invsurr_core::gpr::{GprConfig, LaGprConfig, RefitPolicy};
use invsurr_core::laws::MooneyRivlinPreset;
use invsurr_core::surrogate::SurrogateConfig;
use invsurr_core::{
    AnnealConfig, BonetParams, DomainBounds, InvariantKind, Law, MappingKind, MooneyRivlinParams,
    UnitVec3,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawName {
    MooneyRivlin,
    Bonet,
}

/// `law.*`: the ground-truth law. Omitted constants take the law's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub name: LawName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<MooneyRivlinPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default)]
    pub stress_free_reference: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Fiber direction; normalized on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<[f64; 3]>,
}

impl LawConfig {
    pub fn build(&self) -> Result<Law> {
        let reject = |keys: &[(&str, bool)]| -> Result<()> {
            for (k, set) in keys {
                if *set {
                    return Err(CliError::Config(format!(
                        "law.{k} does not apply to law {:?}",
                        self.name
                    )));
                }
            }
            Ok(())
        };
        let law = match self.name {
            LawName::MooneyRivlin => {
                reject(&[
                    ("alpha", self.alpha.is_some()),
                    ("beta", self.beta.is_some()),
                    ("gamma", self.gamma.is_some()),
                    ("a0", self.a0.is_some()),
                ])?;
                let mut p = MooneyRivlinParams::preset(self.preset.unwrap_or(MooneyRivlinPreset::VolumetricFirst));
                p.c = self.c.unwrap_or(p.c);
                p.c1 = self.c1.unwrap_or(p.c1);
                p.c2 = self.c2.unwrap_or(p.c2);
                p.stress_free_reference = self.stress_free_reference;
                Law::MooneyRivlin(p)
            }
            LawName::Bonet => {
                reject(&[
                    ("preset", self.preset.is_some()),
                    ("c", self.c.is_some()),
                    ("c1", self.c1.is_some()),
                    ("c2", self.c2.is_some()),
                    ("stress_free_reference", self.stress_free_reference),
                ])?;
                let d = BonetParams::default();
                let a0 = match self.a0 {
                    Some(v) => UnitVec3::normalized(v)
                        .map_err(|e| CliError::Config(format!("law.a0: {e}")))?,
                    None => d.a0,
                };
                Law::Bonet(BonetParams {
                    alpha: self.alpha.unwrap_or(d.alpha),
                    beta: self.beta.unwrap_or(d.beta),
                    gamma: self.gamma.unwrap_or(d.gamma),
                    a0,
                })
            }
        };
        law.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(law)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// Half-width of the deformation-gradient box around the identity.
    pub delta: f64,
}

/// `counts.*`: dataset sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsConfig {
    /// LHS deformation-gradient candidates (the reference `F = I` is added on top).
    pub n_train: usize,
    pub n_test: usize,
    /// Rows kept from the deduplicated invariant dataset.
    pub invariant_cap: usize,
}

/// `sample.*`: space-filling design size and hull cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "default_hull_cloud")]
    pub hull_cloud: usize,
}

fn default_hull_cloud() -> usize {
    20_000
}

/// `anneal.*`: schedules for the principal and the pseudo invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealSection {
    #[serde(rename = "NT", default = "default_nt")]
    pub n_t: usize,
    #[serde(rename = "T0", default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(rename = "NT_aniso", default = "default_nt")]
    pub n_t_aniso: usize,
    #[serde(rename = "T0_aniso", default = "default_t0_aniso")]
    pub t0_aniso: f64,
    #[serde(default = "default_alpha")]
    pub alpha_aniso: f64,
}

fn default_nt() -> usize {
    2000
}
fn default_t0() -> f64 {
    1.0
}
fn default_t0_aniso() -> f64 {
    2.0 * PI
}
fn default_alpha() -> f64 {
    0.9995
}

impl Default for AnnealSection {
    fn default() -> Self {
        AnnealSection {
            n_t: default_nt(),
            t0: default_t0(),
            alpha: default_alpha(),
            n_t_aniso: default_nt(),
            t0_aniso: default_t0_aniso(),
            alpha_aniso: default_alpha(),
        }
    }
}

impl AnnealSection {
    pub fn iso(&self) -> AnnealConfig {
        AnnealConfig {
            n_t: self.n_t,
            t0: self.t0,
            alpha: self.alpha,
        }
    }

    pub fn aniso(&self) -> AnnealConfig {
        AnnealConfig {
            n_t: self.n_t_aniso,
            t0: self.t0_aniso,
            alpha: self.alpha_aniso,
        }
    }
}

/// `gpr.*`: kriging and local-GPR settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GprSection {
    pub nugget: f64,
    pub max_nugget: f64,
    pub starts: usize,
    pub evals_per_start: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_inducing: usize,
    pub n_switch: usize,
    /// Local-GPR policy for `evaluate`; sweeps always refit per query.
    pub evaluate_refit: RefitPolicy,
}

impl Default for GprSection {
    fn default() -> Self {
        let g = GprConfig::default();
        let l = LaGprConfig::default();
        GprSection {
            nugget: g.nugget,
            max_nugget: g.max_nugget,
            starts: g.starts,
            evals_per_start: g.evals_per_start,
            theta_min: g.theta_min,
            theta_max: g.theta_max,
            n_inducing: l.n_inducing,
            n_switch: l.n_switch,
            evaluate_refit: RefitPolicy::ReuseGlobalTheta,
        }
    }
}

/// `seeds.*`: every random stream is seeded explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub data: u64,
    pub test: u64,
    pub hull: u64,
    pub anneal: u64,
    pub gpr: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    /// `C ↦ S` on the LHS dataset.
    Classical,
    /// `I ↦ c` on the deduplicated LHS dataset.
    Invariant,
    /// `I ↦ c` on the annealed design.
    SpaceFilling,
}

impl ModelName {
    pub const ALL: [ModelName; 3] = [ModelName::Classical, ModelName::Invariant, ModelName::SpaceFilling];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Classical => "classical",
            ModelName::Invariant => "invariant",
            ModelName::SpaceFilling => "space-filling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub models: Vec<ModelName>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            models: ModelName::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub steps: usize,
    /// Half-range of the load parameter; defaults to 0.8 (F11, isotropic) or 1.0 (F12).
    pub range: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            steps: 161,
            range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub law: LawConfig,
    pub domain: DomainConfig,
    pub counts: CountsConfig,
    pub sample: SampleConfig,
    #[serde(default)]
    pub anneal: AnnealSection,
    #[serde(default)]
    pub gpr: GprSection,
    pub seeds: Seeds,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

/// Budgets of the full-size experiments.
pub const FULL_N_TEST: usize = 20_000;
pub const FULL_HULL_CLOUD: usize = 100_000;
pub const FULL_NT: usize = 7000;
pub const FULL_NT_ANISO: usize = 10_000;

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// `--seed N`: data, hull and anneal streams use `N`, the test set `N + 1000`.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seeds.data = seed;
        self.seeds.hull = seed;
        self.seeds.anneal = seed;
        self.seeds.test = seed.wrapping_add(1000);
        self
    }

    pub fn with_paper_scale(mut self) -> Self {
        self.counts.n_test = FULL_N_TEST;
        self.sample.hull_cloud = FULL_HULL_CLOUD;
        self.anneal.n_t = FULL_NT;
        self.anneal.n_t_aniso = FULL_NT_ANISO;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        self.law.build()?;
        if !(self.domain.delta > 0.0 && self.domain.delta < 1.0) {
            return bad(format!("domain.delta must lie in (0, 1), got {}", self.domain.delta));
        }
        if self.counts.n_test < 1 {
            return bad("counts.n_test must be at least 1".into());
        }
        if self.counts.n_train < 1 || self.counts.invariant_cap < 1 {
            return bad("counts.n_train and counts.invariant_cap must be at least 1".into());
        }
        if self.sample.n < 2 {
            return bad(format!("sample.N must be at least 2, got {}", self.sample.n));
        }
        if self.sample.hull_cloud < 4 {
            return bad("sample.hull_cloud must be at least 4".into());
        }
        if self.run.models.is_empty() {
            return bad("run.models is empty".into());
        }
        if self.sweep.steps < 2 {
            return bad("sweep.steps must be at least 2".into());
        }
        if self.sweep.range.is_some_and(|r| !(r > 0.0 && r <= 1.0)) {
            return bad("sweep.range must lie in (0, 1]".into());
        }
        self.anneal.iso().validate()?;
        self.anneal.aniso().validate()?;
        self.surrogate().gpr.validate()?;
        self.surrogate().lagpr.validate()?;
        Ok(())
    }

    pub fn law(&self) -> Law {
        self.law.build().expect("validated on load")
    }

    pub fn bounds(&self) -> DomainBounds {
        DomainBounds::new(self.domain.delta).expect("validated on load")
    }

    /// Mapping trained by a model on this config's law.
    pub fn mapping(&self, model: ModelName) -> MappingKind {
        match (model, self.law().kind()) {
            (ModelName::Classical, _) => MappingKind::Classical6to6,
            (_, InvariantKind::Iso) => MappingKind::Iso3to3,
            (_, InvariantKind::TransIso) => MappingKind::TransIso5to6,
        }
    }

    pub fn surrogate(&self) -> SurrogateConfig {
        let g = &self.gpr;
        SurrogateConfig {
            gpr: GprConfig {
                nugget: g.nugget,
                max_nugget: g.max_nugget,
                starts: g.starts,
                evals_per_start: g.evals_per_start,
                theta_min: g.theta_min,
                theta_max: g.theta_max,
                seed: self.seeds.gpr,
            },
            lagpr: LaGprConfig {
                n_inducing: g.n_inducing,
                refit: RefitPolicy::RefitPerQuery,
                n_switch: g.n_switch,
            },
        }
    }

    pub fn sweep_range(&self) -> f64 {
        self.sweep.range.unwrap_or(match self.law().kind() {
            InvariantKind::Iso => 0.8,
            InvariantKind::TransIso => 1.0,
        })
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(2 * bytes.len());
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
law.name = "mooney-rivlin"
domain.delta = 0.175
counts = { n_train = 100, n_test = 50, invariant_cap = 80 }
sample.N = 40
seeds = { data = 1, test = 2, hull = 3, anneal = 4, gpr = 5 }
"#;

    #[test]
    fn minimal_config_and_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.sample.hull_cloud, 20_000);
        assert_eq!(cfg.anneal.n_t, 2000);
        assert_eq!(cfg.run.models, ModelName::ALL.to_vec());
        assert_eq!(cfg.sweep_range(), 0.8);
        assert_eq!(cfg.surrogate().gpr.seed, 5);
        assert!(matches!(cfg.law(), Law::MooneyRivlin(p) if p.c2 == 0.8));
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        for text in [
            format!("{MINIMAL}\ngpr.bogus = 1"),
            format!("{MINIMAL}\nlaw.alpha = 1.0"),
            MINIMAL.replace("0.175", "1.5"),
            MINIMAL.replace("n_test = 50", "n_test = 0"),
            MINIMAL.replace("gpr = 5 ", ""),
        ] {
            let err = ExperimentConfig::from_toml(&text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
    }

    #[test]
    fn hash_tracks_overrides() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.hash(), cfg.clone().hash());
        assert_eq!(cfg.hash().len(), 64);
        assert_ne!(cfg.hash(), cfg.clone().with_seed(9).hash());
        let full = cfg.with_paper_scale();
        assert_eq!((full.counts.n_test, full.anneal.n_t), (FULL_N_TEST, FULL_NT));
    }
}
