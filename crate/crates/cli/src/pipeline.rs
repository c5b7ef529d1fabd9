//! The experiment stages. Each reads the outputs of earlier stages from the
//! output directory and writes its own files there.

use std::path::{Path, PathBuf};
use std::time::Instant;

use invsurr_core::gpr::RefitPolicy;
use invsurr_core::sampling::{anneal_aniso, anneal_iso, build_hull, lhs_sample, SampleSetMetadata};
use invsurr_core::surrogate::{
    classical_training_set, invariant_training_set, train_surrogate, training_set_from_law, DatasetReport,
    Provenance, TrainingSet,
};
use invsurr_core::tensors::right_cauchy_green;
use invsurr_core::{
    ConvexHull3, InvariantKind, Law, MappingKind, Mat3, SampleSet, SurrogateModel, SymMat3,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ModelName};
use crate::error::{CliError, Result};
use crate::io::{names, read_input, read_json, sha256_hex, write_atomic, write_json, Table, FULL, SYM};

/// A configuration bound to an output directory.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullSidecar {
    pub config_hash: String,
    pub seed: u64,
    pub n_cloud: usize,
    pub delta: f64,
    pub vertices: usize,
    pub faces: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub config_hash: String,
    #[serde(flatten)]
    pub meta: SampleSetMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub config_hash: String,
    pub model: ModelName,
    pub mapping: MappingKind,
    pub law: Law,
    pub seed: u64,
    /// `lhs` (Latin hypercube in F, standing in for TPLHD) or `annealed`.
    pub sampler: String,
    pub report: DatasetReport,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSidecar {
    pub config_hash: String,
    pub model: ModelName,
    pub dataset_hash: String,
    pub n_train: usize,
    pub local: bool,
}

/// One row of `errors.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub model: ModelName,
    pub n_train: usize,
    pub e_s: f64,
    pub e_s_normalized: f64,
    pub seconds: f64,
}

/// Stresses along a one-parameter load path.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// `F11` or `F12`.
    pub parameter: &'static str,
    pub t: Vec<f64>,
    pub truth: Vec<SymMat3>,
    pub predictions: Vec<(ModelName, Vec<SymMat3>)>,
}

/// `E_S = sqrt(Σ|ŝ − s|² / 6N)` and the same divided by the RMS true component.
pub fn stress_error(pred: &[SymMat3], truth: &[SymMat3]) -> (f64, f64) {
    assert_eq!(pred.len(), truth.len());
    let n = 6.0 * truth.len() as f64;
    let mut err = 0.0;
    let mut ref_sq = 0.0;
    for (p, s) in pred.iter().zip(truth) {
        for k in 0..6 {
            err += (p.0[k] - s.0[k]).powi(2);
            ref_sq += s.0[k].powi(2);
        }
    }
    let e_s = (err / n).sqrt();
    let rms = (ref_sq / n).sqrt();
    (e_s, if rms > 0.0 { e_s / rms } else { f64::NAN })
}

/// Applies `f` to every tensor in parallel, keeping input order.
pub fn par_stress<F>(cs: &[SymMat3], f: F) -> Result<Vec<SymMat3>>
where
    F: Fn(&SymMat3) -> invsurr_core::Result<SymMat3> + Sync + Send,
{
    Ok(cs.par_iter().map(f).collect::<invsurr_core::Result<Vec<_>>>()?)
}

/// Deformation gradients along the sweep and their parameter values.
pub fn sweep_path(kind: InvariantKind, range: f64, steps: usize) -> (&'static str, Vec<f64>, Vec<Mat3>) {
    let t: Vec<f64> = (0..steps)
        .map(|i| -range + 2.0 * range * i as f64 / (steps - 1) as f64)
        .collect();
    let (name, fs) = match kind {
        InvariantKind::Iso => ("F11", t.iter().map(|v| Mat3::diag(1.0 + v, 1.0, 1.0)).collect()),
        InvariantKind::TransIso => (
            "F12",
            t.iter()
                .map(|v| {
                    let mut f = Mat3::IDENTITY;
                    f.0[0][1] = *v;
                    f
                })
                .collect(),
        ),
    };
    (name, t, fs)
}

fn invariant_header(mapping: MappingKind) -> Vec<String> {
    let ni = mapping.n_inputs();
    let mut h: Vec<String> = (1..=ni).map(|k| format!("I{k}")).collect();
    h.extend((1..=mapping.n_outputs()).map(|k| format!("c{k}")));
    h
}

fn training_table(set: &TrainingSet) -> Table {
    let mut t = Table::new(invariant_header(set.kind));
    for (x, y) in set.inputs.iter().zip(&set.outputs) {
        t.rows.push(x.iter().chain(y).copied().collect());
    }
    t
}

fn sym_from(row: &[f64], cols: &[usize]) -> SymMat3 {
    SymMat3([row[cols[0]], row[cols[1]], row[cols[2]], row[cols[3]], row[cols[4]], row[cols[5]]])
}

impl Workspace {
    pub fn new(cfg: ExperimentConfig, out: impl Into<PathBuf>) -> Self {
        let hash = cfg.hash();
        Workspace {
            cfg,
            out: out.into(),
            hash,
        }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn dataset_path(&self, m: ModelName) -> PathBuf {
        self.out.join("data").join(format!("{}.csv", m.as_str()))
    }

    fn model_path(&self, m: ModelName) -> PathBuf {
        self.out.join("models").join(format!("{}.json", m.as_str()))
    }

    fn sidecar(path: &Path) -> PathBuf {
        path.with_extension("meta.json")
    }

    fn wants(&self, m: ModelName) -> bool {
        self.cfg.run.models.contains(&m)
    }

    pub fn write_config(&self) -> Result<()> {
        #[derive(Serialize)]
        struct Resolved<'a> {
            config_hash: &'a str,
            config: &'a ExperimentConfig,
        }
        write_json(
            &self.path("config.json"),
            &Resolved {
                config_hash: &self.hash,
                config: &self.cfg,
            },
        )
    }

    /// Convex hull of the invariant images of uniformly drawn deformation gradients.
    pub fn hull(&self) -> Result<ConvexHull3> {
        let c = &self.cfg;
        let hull = build_hull(&c.bounds(), c.sample.hull_cloud, c.seeds.hull)?;
        write_json(&self.path("hull.json"), &hull)?;
        write_json(
            &self.path("hull.meta.json"),
            &HullSidecar {
                config_hash: self.hash.clone(),
                seed: c.seeds.hull,
                n_cloud: c.sample.hull_cloud,
                delta: c.domain.delta,
                vertices: hull.vertices.len(),
                faces: hull.faces.len(),
            },
        )?;
        Ok(hull)
    }

    /// Annealed design over the hull; trans-isotropic laws add the pseudo invariants.
    pub fn sample(&self) -> Result<SampleSet> {
        let c = &self.cfg;
        let hull: ConvexHull3 = read_json(&self.path("hull.json"), "hull")?;
        let mut set = anneal_iso(&hull, c.sample.n, &c.anneal.iso(), c.seeds.anneal)?;
        if let Some(a0) = c.law().direction() {
            set = anneal_aniso(&set, &a0, &c.anneal.aniso(), c.seeds.anneal)?;
        }
        write_atomic(&self.path("samples.csv"), set.to_csv().as_bytes())?;
        write_json(
            &self.path("samples.meta.json"),
            &SampleSidecar {
                config_hash: self.hash.clone(),
                meta: set.metadata(Some(c.domain.delta)),
            },
        )?;
        Ok(set)
    }

    pub fn load_samples(&self) -> Result<SampleSet> {
        let side: SampleSidecar = read_json(&self.path("samples.meta.json"), "sample")?;
        let text = read_input(&self.path("samples.csv"), "sample")?;
        Ok(SampleSet::from_csv(&text, &side.meta)?)
    }

    /// Writes the datasets of all requested models and returns their reports.
    pub fn gen_data(&self) -> Result<Vec<(ModelName, DatasetReport)>> {
        let c = &self.cfg;
        let law = c.law();
        let mut fs = vec![Mat3::IDENTITY];
        fs.extend(lhs_sample(&c.bounds(), c.counts.n_train, c.seeds.data));
        let cs: Vec<SymMat3> = fs.iter().map(right_cauchy_green).collect::<invsurr_core::Result<_>>()?;
        let ss = par_stress(&cs, |x| law.stress(x))?;
        let mut out = Vec::new();

        if self.wants(ModelName::Classical) {
            let mut header = names("F", &FULL);
            header.extend(names("C", &SYM));
            header.extend(names("S", &SYM));
            let mut t = Table::new(header);
            for ((f, cc), s) in fs.iter().zip(&cs).zip(&ss) {
                t.rows.push(f.to_row_major().iter().chain(&cc.0).chain(&s.0).copied().collect());
            }
            let (_, report) = classical_training_set(&cs, &ss)?;
            self.write_dataset(ModelName::Classical, &t, "lhs", c.seeds.data, report.clone())?;
            out.push((ModelName::Classical, report));
        }
        if self.wants(ModelName::Invariant) {
            let mapping = c.mapping(ModelName::Invariant);
            let (set, mut report) = invariant_training_set(mapping, &cs, &ss, law.direction().as_ref())?;
            let set = set.truncated(c.counts.invariant_cap);
            report.kept = set.len();
            self.write_dataset(ModelName::Invariant, &training_table(&set), "lhs", c.seeds.data, report.clone())?;
            out.push((ModelName::Invariant, report));
        }
        if self.wants(ModelName::SpaceFilling) {
            let samples = self.load_samples()?;
            let (set, report) = training_set_from_law(c.mapping(ModelName::SpaceFilling), &law, &samples.tensors)?;
            self.write_dataset(
                ModelName::SpaceFilling,
                &training_table(&set),
                "annealed",
                c.seeds.anneal,
                report.clone(),
            )?;
            out.push((ModelName::SpaceFilling, report));
        }
        Ok(out)
    }

    fn write_dataset(&self, m: ModelName, t: &Table, sampler: &str, seed: u64, report: DatasetReport) -> Result<()> {
        let path = self.dataset_path(m);
        write_atomic(&path, t.to_csv().as_bytes())?;
        write_json(
            &Self::sidecar(&path),
            &DatasetSidecar {
                config_hash: self.hash.clone(),
                model: m,
                mapping: self.cfg.mapping(m),
                law: self.cfg.law(),
                seed,
                sampler: sampler.into(),
                report,
                rows: t.rows.len(),
            },
        )
    }

    /// The training set of `m` as stored on disk, with the hash of the file.
    pub fn load_dataset(&self, m: ModelName) -> Result<(TrainingSet, String)> {
        let path = self.dataset_path(m);
        let text = read_input(&path, "gen-data")?;
        let hash = sha256_hex(text.as_bytes());
        let table = Table::parse(&text, &path)?;
        let mapping = self.cfg.mapping(m);
        let set = if mapping == MappingKind::Classical6to6 {
            let ci = table.columns(&names("C", &SYM), &path)?;
            let si = table.columns(&names("S", &SYM), &path)?;
            let cs: Vec<SymMat3> = table.rows.iter().map(|r| sym_from(r, &ci)).collect();
            let ss: Vec<SymMat3> = table.rows.iter().map(|r| sym_from(r, &si)).collect();
            classical_training_set(&cs, &ss)?.0
        } else {
            let header = invariant_header(mapping);
            let idx = table.columns(&header, &path)?;
            let ni = mapping.n_inputs();
            TrainingSet {
                kind: mapping,
                inputs: table.rows.iter().map(|r| idx[..ni].iter().map(|&i| r[i]).collect()).collect(),
                outputs: table.rows.iter().map(|r| idx[ni..].iter().map(|&i| r[i]).collect()).collect(),
            }
        };
        Ok((set, hash))
    }

    /// Fits and saves one surrogate per requested model.
    pub fn train(&self) -> Result<Vec<(ModelName, SurrogateModel)>> {
        let c = &self.cfg;
        let law = c.law();
        let scfg = c.surrogate();
        let fitted: Vec<(ModelName, SurrogateModel, String, f64)> = c
            .run
            .models
            .par_iter()
            .map(|&m| {
                let (set, hash) = self.load_dataset(m)?;
                let t0 = Instant::now();
                let a0 = if set.kind == MappingKind::TransIso5to6 { law.direction() } else { None };
                let prov = Provenance {
                    training_set: hash.clone(),
                    law: law.id().into(),
                    seed: c.seeds.gpr,
                };
                let model = train_surrogate(&set, a0, &scfg, prov)?;
                Ok((m, model, hash, t0.elapsed().as_secs_f64()))
            })
            .collect::<Result<_>>()?;
        let mut timings = String::from("model,seconds\n");
        let mut out = Vec::new();
        for (m, model, hash, secs) in fitted {
            let path = self.model_path(m);
            write_atomic(&path, model.to_json()?.as_bytes())?;
            write_json(
                &Self::sidecar(&path),
                &ModelSidecar {
                    config_hash: self.hash.clone(),
                    model: m,
                    dataset_hash: hash,
                    n_train: model.n_train(),
                    local: model.regressor().is_local(),
                },
            )?;
            timings.push_str(&format!("{},{secs:.3}\n", m.as_str()));
            out.push((m, model));
        }
        write_atomic(&self.path("models/timings.csv"), timings.as_bytes())?;
        Ok(out)
    }

    /// Loads a saved model, refusing it if its dataset changed since training.
    pub fn load_model(&self, m: ModelName) -> Result<SurrogateModel> {
        let path = self.model_path(m);
        let side: ModelSidecar = read_json(&Self::sidecar(&path), "train")?;
        let data = read_input(&self.dataset_path(m), "gen-data")?;
        let actual = sha256_hex(data.as_bytes());
        if side.dataset_hash != actual {
            return Err(CliError::HashMismatch {
                model: m.as_str().into(),
                recorded: side.dataset_hash,
                actual,
            });
        }
        Ok(SurrogateModel::from_json(&read_input(&path, "train")?)?)
    }

    /// Test-set stress errors of every requested model.
    pub fn evaluate(&self) -> Result<Vec<ErrorRow>> {
        let c = &self.cfg;
        let law = c.law();
        let test: Vec<SymMat3> = lhs_sample(&c.bounds(), c.counts.n_test, c.seeds.test)
            .iter()
            .map(right_cauchy_green)
            .collect::<invsurr_core::Result<_>>()?;
        let truth = par_stress(&test, |x| law.stress(x))?;
        let mut rows = Vec::new();
        for &m in &c.run.models {
            let model = self.load_model(m)?.with_refit(c.gpr.evaluate_refit);
            let t0 = Instant::now();
            let pred = par_stress(&test, |x| model.predict_stress(x))?;
            let seconds = t0.elapsed().as_secs_f64();
            let (e_s, e_s_normalized) = stress_error(&pred, &truth);
            rows.push(ErrorRow {
                model: m,
                n_train: model.n_train(),
                e_s,
                e_s_normalized,
                seconds,
            });
        }
        let mut csv = String::from("model,n_train,E_S,E_S_normalized\n");
        let mut timings = String::from("model,seconds\n");
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                r.model.as_str(),
                r.n_train,
                crate::io::fmt_f64(r.e_s),
                crate::io::fmt_f64(r.e_s_normalized)
            ));
            timings.push_str(&format!("{},{:.3}\n", r.model.as_str(), r.seconds));
        }
        write_atomic(&self.path("errors.csv"), csv.as_bytes())?;
        write_atomic(&self.path("timings.csv"), timings.as_bytes())?;
        write_json(
            &self.path("errors.meta.json"),
            &serde_json::json!({
                "config_hash": self.hash,
                "n_test": c.counts.n_test,
                "test_seed": c.seeds.test,
                "local_refit": c.gpr.evaluate_refit,
                "law": law,
            }),
        )?;
        Ok(rows)
    }

    /// Load-path sweep through and far beyond the training domain. Local models
    /// refit their length scales at every point.
    pub fn sweep(&self) -> Result<SweepResult> {
        let c = &self.cfg;
        let law = c.law();
        let (parameter, t, fs) = sweep_path(law.kind(), c.sweep_range(), c.sweep.steps);
        let cs: Vec<SymMat3> = fs.iter().map(right_cauchy_green).collect::<invsurr_core::Result<_>>()?;
        let truth = par_stress(&cs, |x| law.stress(x))?;
        let mut predictions = Vec::new();
        for &m in &c.run.models {
            let model = self.load_model(m)?.with_refit(RefitPolicy::RefitPerQuery);
            predictions.push((m, par_stress(&cs, |x| model.predict_stress(x))?));
        }

        let mut header = vec![parameter.to_string()];
        header.extend(names("S", &SYM));
        for (m, _) in &predictions {
            header.extend(names(&format!("{}_S", m.as_str()), &SYM));
            header.extend(names(&format!("{}_abs_err", m.as_str()), &SYM));
        }
        let mut table = Table::new(header);
        for (i, ti) in t.iter().enumerate() {
            let mut row = vec![*ti];
            row.extend(truth[i].0);
            for (_, p) in &predictions {
                row.extend(p[i].0);
                row.extend((0..6).map(|k| (p[i].0[k] - truth[i].0[k]).abs()));
            }
            table.rows.push(row);
        }
        write_atomic(&self.path("sweep.csv"), table.to_csv().as_bytes())?;
        write_json(
            &self.path("sweep.meta.json"),
            &serde_json::json!({
                "config_hash": self.hash,
                "parameter": parameter,
                "training_boundary": [-c.domain.delta, c.domain.delta],
                "models": c.run.models,
            }),
        )?;
        Ok(SweepResult {
            parameter,
            t,
            truth,
            predictions,
        })
    }

    /// Every stage in order; the hull and design only when a space-filling model is requested.
    pub fn run_all(&self) -> Result<(Vec<ErrorRow>, SweepResult)> {
        self.write_config()?;
        if self.wants(ModelName::SpaceFilling) {
            self.hull()?;
            self.sample()?;
        }
        self.gen_data()?;
        self.train()?;
        let errors = self.evaluate()?;
        let sweep = self.sweep()?;
        Ok((errors, sweep))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use invsurr_core::MooneyRivlinParams;

    #[test]
    fn stress_error_of_exact_and_zero_models() {
        let law = Law::MooneyRivlin(MooneyRivlinParams::default());
        let cs: Vec<SymMat3> = (0..20)
            .map(|i| SymMat3::diag(1.0 + 0.01 * i as f64, 1.1, 0.9 - 0.005 * i as f64))
            .collect();
        let truth = par_stress(&cs, |c| law.stress(c)).unwrap();
        assert_eq!(stress_error(&truth, &truth), (0.0, 0.0));
        let zero = vec![SymMat3::ZERO; cs.len()];
        let rms = (truth.iter().flat_map(|s| s.0).map(|v| v * v).sum::<f64>() / 120.0).sqrt();
        let (e, en) = stress_error(&zero, &truth);
        assert!((e - rms).abs() <= 1e-14 * rms);
        assert!((en - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sweep_paths() {
        let (name, t, fs) = sweep_path(InvariantKind::Iso, 0.8, 161);
        assert_eq!((name, t.len()), ("F11", 161));
        assert_eq!(t[80], 0.0);
        assert!((t[0] + 0.8).abs() < 1e-15 && (t[160] - 0.8).abs() < 1e-15);
        assert_eq!(fs[80], Mat3::IDENTITY);
        let (name, _, fs) = sweep_path(InvariantKind::TransIso, 1.0, 161);
        assert_eq!(name, "F12");
        assert_eq!(fs[0].0[0][1], -1.0);
    }
}
