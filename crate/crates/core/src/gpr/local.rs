//! Local approximate GPR: a small kriging model on the nearest training rows of
//! each query.

use serde::{Deserialize, Serialize};

use super::{find_duplicate, fit, fit_with, GprConfig, GprModel, ThetaInit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefitPolicy {
    /// Re-estimate length scales for every query, starting from the anchor scales.
    RefitPerQuery,
    /// Use the anchor scales unchanged (much cheaper for large test sets).
    ReuseGlobalTheta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaGprConfig {
    pub n_inducing: usize,
    pub refit: RefitPolicy,
    /// Datasets up to this size use a single global model instead.
    pub n_switch: usize,
}

impl Default for LaGprConfig {
    fn default() -> Self {
        LaGprConfig {
            n_inducing: 60,
            refit: RefitPolicy::RefitPerQuery,
            n_switch: 400,
        }
    }
}

impl LaGprConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_inducing < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_inducing must be at least 2, got {}",
                self.n_inducing
            )));
        }
        Ok(())
    }
}

/// Indices of the `n` rows closest to `q` (Euclidean; ties by index), in ascending
/// index order so that `n ≥ N` selects the whole dataset unchanged.
pub fn nearest_rows(x: &[Vec<f64>], q: &[f64], n: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = x
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let s: f64 = r.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            (s, i)
        })
        .collect();
    let n = n.min(x.len());
    if n < d.len() {
        d.select_nth_unstable_by(n, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d.truncate(n);
    }
    let mut idx: Vec<usize> = d.into_iter().map(|p| p.1).collect();
    idx.sort_unstable();
    idx
}

fn subset(x: &[Vec<f64>], y: &[Vec<f64>], rows: &[usize]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    (
        rows.iter().map(|&i| x[i].clone()).collect(),
        rows.iter().map(|&i| y[i].clone()).collect(),
    )
}

/// Prediction from a kriging model fitted (full multistart search) on the
/// `n_inducing` nearest rows of `x*`.
pub fn lagpr_predict(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    q: &[f64],
    cfg: &LaGprConfig,
    gpr: &GprConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let rows = nearest_rows(x, q, cfg.n_inducing);
    let (xs, ys) = subset(x, y, &rows);
    fit(&xs, &ys, gpr)?.predict(q)
}

/// Dataset plus anchor length scales for local prediction.
///
/// The anchor scales come from one fit on the `n_inducing` rows nearest the
/// input centroid and are stored in raw input units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalGpr {
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    config: LaGprConfig,
    gpr: GprConfig,
    anchor_theta: Vec<Vec<f64>>,
}

impl LocalGpr {
    pub fn new(x: &[Vec<f64>], y: &[Vec<f64>], config: &LaGprConfig, gpr: &GprConfig) -> Result<Self> {
        config.validate()?;
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: x.len().max(1),
                got: y.len(),
            });
        }
        if let Some((a, b)) = find_duplicate(x) {
            return Err(Error::DuplicateInputs(a, b));
        }
        let j = x[0].len();
        let centroid: Vec<f64> = (0..j)
            .map(|k| x.iter().map(|r| r[k]).sum::<f64>() / x.len() as f64)
            .collect();
        let rows = nearest_rows(x, &centroid, config.n_inducing);
        let (xs, ys) = subset(x, y, &rows);
        let anchor = fit(&xs, &ys, gpr)?;
        Ok(LocalGpr {
            x: x.to_vec(),
            y: y.to_vec(),
            config: config.clone(),
            gpr: gpr.clone(),
            anchor_theta: anchor.theta_raw(),
        })
    }

    pub fn n_train(&self) -> usize {
        self.x.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.x[0].len()
    }

    pub fn n_outputs(&self) -> usize {
        self.y[0].len()
    }

    pub fn config(&self) -> &LaGprConfig {
        &self.config
    }

    pub fn with_refit(&self, refit: RefitPolicy) -> LocalGpr {
        let mut m = self.clone();
        m.config.refit = refit;
        m
    }

    pub fn anchor_theta(&self) -> &[Vec<f64>] {
        &self.anchor_theta
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn outputs(&self) -> &[Vec<f64>] {
        &self.y
    }

    /// The kriging model used for query `q`.
    pub fn local_model(&self, q: &[f64]) -> Result<GprModel> {
        if q.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs(),
                got: q.len(),
            });
        }
        let rows = nearest_rows(&self.x, q, self.config.n_inducing);
        let (xs, ys) = subset(&self.x, &self.y, &rows);
        let init = match self.config.refit {
            RefitPolicy::ReuseGlobalTheta => ThetaInit::Fixed(self.anchor_theta.clone()),
            RefitPolicy::RefitPerQuery => ThetaInit::WarmStart(self.anchor_theta.clone()),
        };
        fit_with(&xs, &ys, &self.gpr, &init)
    }

    pub fn predict(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.local_model(q)?.predict(q)
    }

    pub fn predict_grad(&self, q: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.local_model(q)?.predict_grad(q)
    }
}
