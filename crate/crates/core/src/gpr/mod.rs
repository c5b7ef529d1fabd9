//! Ordinary kriging with a separable Matérn 3/2 correlation.
//!
//! Every output is modeled independently with its own length scales, constant
//! mean and process variance. Length scales maximize the restricted likelihood
//! with the mean and variance profiled out. Inputs are scaled to `[0, 1]` and
//! outputs standardized before fitting; predictions are returned in raw units.

mod kernel;
mod local;

pub use kernel::{matern32, matern32_1d, matern32_1d_deriv, matern32_1d_m1, matern32_grad, matern32_m1};
pub use local::{lagpr_predict, nearest_rows, LaGprConfig, LocalGpr, RefitPolicy};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::rng_from_seed;

pub const MODEL_FORMAT_VERSION: u32 = 1;
/// Relative spread below which an output column is considered constant.
pub const CONSTANT_OUTPUT_TOL: f64 = 1e-10;
/// Inputs closer than this (raw units) are rejected as duplicates.
pub const DUPLICATE_DISTANCE: f64 = 1e-10;

const REFINE_PASSES: usize = 20;
/// Largest nugget-induced training residual (standardized units) accepted by the
/// length-scale search.
const INTERP_TOL: f64 = 1e-6;
const INTERP_PENALTY: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GprConfig {
    /// Initial diagonal jitter, escalated ×10 up to `max_nugget` on failure.
    pub nugget: f64,
    pub max_nugget: f64,
    pub starts: usize,
    pub evals_per_start: usize,
    /// Search box for the length scales, relative to each input's range.
    pub theta_min: f64,
    pub theta_max: f64,
    pub seed: u64,
}

impl Default for GprConfig {
    fn default() -> Self {
        GprConfig {
            nugget: 1e-10,
            max_nugget: 1e-6,
            starts: 8,
            evals_per_start: 200,
            theta_min: 1e-3,
            theta_max: 1e3,
            seed: 0,
        }
    }
}

impl GprConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.nugget >= 0.0
            && self.max_nugget >= self.nugget
            && self.starts >= 1
            && self.evals_per_start >= 1
            && self.theta_min > 0.0
            && self.theta_max > self.theta_min;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid GPR settings {self:?}")))
        }
    }

    fn nugget_ladder(&self) -> Vec<f64> {
        let mut out = vec![self.nugget];
        let mut v = self.nugget.max(1e-16);
        while v * 10.0 <= self.max_nugget * (1.0 + 1e-12) {
            v *= 10.0;
            out.push(v);
        }
        out
    }
}

/// Length scales (in normalized input units) and nugget of one output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub theta: Vec<f64>,
    pub nugget: f64,
}

/// How length scales are obtained; supplied scales are in raw input units.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaInit {
    Search,
    /// Single pattern search started from the given scales.
    WarmStart(Vec<Vec<f64>>),
    Fixed(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub x_lo: Vec<f64>,
    pub x_scale: Vec<f64>,
    pub y_mean: Vec<f64>,
    pub y_scale: Vec<f64>,
}

impl Normalization {
    fn from_data(x: &[Vec<f64>], y: &[Vec<f64>]) -> Self {
        let j = x[0].len();
        let d = y[0].len();
        let n = x.len() as f64;
        let mut x_lo = vec![f64::INFINITY; j];
        let mut x_hi = vec![f64::NEG_INFINITY; j];
        for row in x {
            for k in 0..j {
                x_lo[k] = x_lo[k].min(row[k]);
                x_hi[k] = x_hi[k].max(row[k]);
            }
        }
        let x_scale = (0..j)
            .map(|k| {
                let r = x_hi[k] - x_lo[k];
                if r > 0.0 {
                    r
                } else {
                    1.0
                }
            })
            .collect();
        let y_mean: Vec<f64> = (0..d).map(|o| y.iter().map(|r| r[o]).sum::<f64>() / n).collect();
        let y_scale = (0..d)
            .map(|o| {
                let var = y.iter().map(|r| (r[o] - y_mean[o]).powi(2)).sum::<f64>() / n;
                let s = var.sqrt();
                let max_abs = y.iter().fold(0.0f64, |m, r| m.max(r[o].abs()));
                // Columns that vary only at roundoff level are treated as constant.
                if s.is_finite() && s > CONSTANT_OUTPUT_TOL * max_abs {
                    s
                } else {
                    0.0
                }
            })
            .collect();
        Normalization {
            x_lo,
            x_scale,
            y_mean,
            y_scale,
        }
    }

    fn x(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.x_lo.iter().zip(&self.x_scale))
            .map(|(v, (lo, s))| (v - lo) / s)
            .collect()
    }

    /// Output `o` is constant over the training data.
    fn is_constant(&self, o: usize) -> bool {
        self.y_scale[o] == 0.0
    }

    fn y_scale_or_one(&self, o: usize) -> f64 {
        if self.is_constant(o) {
            1.0
        } else {
            self.y_scale[o]
        }
    }
}

/// Fitted multi-output kriging model. Immutable after fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GprModelFile", into = "GprModelFile")]
pub struct GprModel {
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    norm: Normalization,
    params: Vec<KernelParams>,
    /// Estimated constant mean per output (normalized units).
    mu: Vec<f64>,
    /// `R⁻¹(y − μ̂1)` per output (normalized units).
    weights: Vec<Vec<f64>>,
    xn: Vec<Vec<f64>>,
}

/// On-disk form of [`GprModel`]; the correlation factor is rebuilt on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GprModelFile {
    pub version: u32,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub normalization: Normalization,
    pub params: Vec<KernelParams>,
    pub mu: Vec<f64>,
}

impl From<GprModel> for GprModelFile {
    fn from(m: GprModel) -> Self {
        GprModelFile {
            version: MODEL_FORMAT_VERSION,
            x: m.x,
            y: m.y,
            normalization: m.norm,
            params: m.params,
            mu: m.mu,
        }
    }
}

impl TryFrom<GprModelFile> for GprModel {
    type Error = Error;

    fn try_from(f: GprModelFile) -> Result<Self> {
        if f.version != MODEL_FORMAT_VERSION {
            return Err(Error::Persistence(format!(
                "unsupported GPR model version {}",
                f.version
            )));
        }
        check_shapes(&f.x, &f.y)?;
        if f.params.len() != f.y[0].len() || f.mu.len() != f.y[0].len() {
            return Err(Error::Persistence("parameter count does not match outputs".into()));
        }
        let xn: Vec<Vec<f64>> = f.x.iter().map(|r| f.normalization.x(r)).collect();
        let diffs = PairDiffs::new(&xn);
        let mut mu = Vec::new();
        let mut weights = Vec::new();
        for (o, p) in f.params.iter().enumerate() {
            let yn = normalized_column(&f.y, &f.normalization, o);
            let chol = diffs
                .factor(&p.theta, p.nugget)
                .ok_or(Error::IllConditioned(p.nugget))?;
            let (m, w) = kriging_weights(&diffs, &p.theta, &chol, &yn);
            mu.push(m);
            weights.push(w);
        }
        Ok(GprModel {
            x: f.x,
            y: f.y,
            norm: f.normalization,
            params: f.params,
            mu,
            weights,
            xn,
        })
    }
}

fn check_shapes(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let (j, d) = (x[0].len(), y[0].len());
    if j == 0 || d == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    for (xr, yr) in x.iter().zip(y) {
        if xr.len() != j {
            return Err(Error::DimensionMismatch {
                expected: j,
                got: xr.len(),
            });
        }
        if yr.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: yr.len(),
            });
        }
        if xr.iter().chain(yr).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("training data contains non-finite values".into()));
        }
    }
    Ok(())
}

fn normalized_column(y: &[Vec<f64>], norm: &Normalization, o: usize) -> DVector<f64> {
    if norm.is_constant(o) {
        return DVector::zeros(y.len());
    }
    let s = norm.y_scale[o];
    DVector::from_iterator(y.len(), y.iter().map(|r| (r[o] - norm.y_mean[o]) / s))
}

/// Per-dimension absolute input differences of all pairs `i < j`.
struct PairDiffs {
    n: usize,
    j: usize,
    diffs: Vec<f64>,
}

impl PairDiffs {
    fn new(xn: &[Vec<f64>]) -> Self {
        let n = xn.len();
        let j = xn[0].len();
        let mut diffs = Vec::with_capacity(n * (n.saturating_sub(1)) / 2 * j);
        for a in 0..n {
            for b in (a + 1)..n {
                for k in 0..j {
                    diffs.push((xn[a][k] - xn[b][k]).abs());
                }
            }
        }
        PairDiffs { n, j, diffs }
    }

    fn correlation(&self, theta: &[f64], nugget: f64) -> DMatrix<f64> {
        const SQRT3: f64 = 1.732_050_807_568_877_2;
        let scale: Vec<f64> = theta.iter().map(|t| SQRT3 / t).collect();
        let mut r = DMatrix::identity(self.n, self.n) * (1.0 + nugget);
        let mut idx = 0;
        for a in 0..self.n {
            for b in (a + 1)..self.n {
                let mut sum = 0.0;
                let mut prod = 1.0;
                for k in 0..self.j {
                    let v = scale[k] * self.diffs[idx + k];
                    sum += v;
                    prod *= 1.0 + v;
                }
                idx += self.j;
                let c = prod * (-sum).exp();
                r[(a, b)] = c;
                r[(b, a)] = c;
            }
        }
        r
    }

    fn factor(&self, theta: &[f64], nugget: f64) -> Option<Cholesky<f64, Dyn>> {
        self.correlation(theta, nugget).cholesky()
    }
}

/// Restricted log-likelihood (constants dropped), GLS mean and kriging weights.
fn reml(chol: &Cholesky<f64, Dyn>, y: &DVector<f64>) -> (f64, f64, Vec<f64>) {
    let n = y.len();
    let ones = DVector::from_element(n, 1.0);
    let r1 = chol.solve(&ones);
    let ry = chol.solve(y);
    let s11 = r1.sum();
    let mu = ry.sum() / s11;
    let w = &ry - &r1 * mu;
    let resid = y - &ones * mu;
    let q = resid.dot(&w);
    let logdet: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let value = if n > 1 && q > 0.0 && s11 > 0.0 {
        let m = (n - 1) as f64;
        -0.5 * (m * (q / m).ln() + logdet + s11.ln())
    } else {
        f64::NEG_INFINITY
    };
    let value = if value.is_finite() {
        value
    } else {
        f64::NEG_INFINITY
    };
    (value, mu, w.iter().copied().collect())
}

/// GLS mean and kriging weights for exact interpolation of `y`.
///
/// The nugget only stabilizes the factorization: the weights are refined so that
/// the nugget-free predictor `μ + R₀w` reproduces the data, each pass using the
/// regularized factor as preconditioner.
fn kriging_weights(
    diffs: &PairDiffs,
    theta: &[f64],
    chol: &Cholesky<f64, Dyn>,
    y: &DVector<f64>,
) -> (f64, Vec<f64>) {
    let n = y.len();
    let ones = DVector::from_element(n, 1.0);
    let r1 = chol.solve(&ones);
    let s11 = r1.sum();
    let gls = |e: &DVector<f64>| {
        let re = chol.solve(e);
        let m = re.sum() / s11;
        (m, re - &r1 * m)
    };
    let (mut mu, mut w) = gls(y);
    let r0 = diffs.correlation(theta, 0.0);
    let scale = y.amax().max(1.0);
    let mut resid = y - &ones * mu - &r0 * &w;
    for _ in 0..REFINE_PASSES {
        let err = resid.amax();
        if err <= 1e-15 * scale {
            break;
        }
        let (dm, dw) = gls(&resid);
        let next_w = &w + &dw;
        let next = y - &ones * (mu + dm) - &r0 * &next_w;
        if !(next.amax() < err) {
            break;
        }
        mu += dm;
        w = next_w;
        resid = next;
    }
    (mu, w.iter().copied().collect())
}

/// Opportunistic compass search maximizing `f` inside the box `[lo, hi]`.
fn pattern_search<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x0: Vec<f64>,
    lo: f64,
    hi: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let mut x = x0;
    let mut fx = f(&x);
    let mut evals = 1;
    let mut step = 1.0;
    while evals < max_evals && step > 1e-4 {
        let mut improved = false;
        'poll: for k in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut cand = x.clone();
                cand[k] = (cand[k] + sign * step).clamp(lo, hi);
                if cand[k] == x[k] {
                    continue;
                }
                let fc = f(&cand);
                evals += 1;
                if fc > fx {
                    x = cand;
                    fx = fc;
                    improved = true;
                    break 'poll;
                }
                if evals >= max_evals {
                    break 'poll;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

struct OutputFit {
    params: KernelParams,
    mu: f64,
    weights: Vec<f64>,
}

const DEFAULT_THETA: f64 = 0.5;

fn fit_output(
    diffs: &PairDiffs,
    yn: &DVector<f64>,
    constant: bool,
    cfg: &GprConfig,
    init: Option<(&[f64], bool)>,
    seed: u64,
) -> Result<OutputFit> {
    let j = diffs.j;
    let (lo, hi) = (cfg.theta_min.ln(), cfg.theta_max.ln());
    let clamp = |t: &[f64]| -> Vec<f64> { t.iter().map(|v| v.ln().clamp(lo, hi)).collect() };
    let fixed = match init {
        Some((t, true)) => Some(clamp(t)),
        _ if constant || diffs.n == 1 => Some(vec![DEFAULT_THETA.ln(); j]),
        _ => None,
    };

    for nugget in cfg.nugget_ladder() {
        let log_theta = match &fixed {
            Some(t) => t.clone(),
            None => {
                let mut objective = |lt: &[f64]| {
                    let theta: Vec<f64> = lt.iter().map(|v| v.exp()).collect();
                    match diffs.factor(&theta, nugget) {
                        Some(ch) => {
                            let (value, _, w) = reml(&ch, yn);
                            // The nugget perturbs training residuals by τw; length scales
                            // where that exceeds INTERP_TOL are steered away from.
                            let err = nugget * w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                            if err > INTERP_TOL {
                                value - INTERP_PENALTY * (err / INTERP_TOL).ln()
                            } else {
                                value
                            }
                        }
                        None => f64::NEG_INFINITY,
                    }
                };
                let mut rng = rng_from_seed(seed);
                let mut starts: Vec<Vec<f64>> = Vec::new();
                match init {
                    Some((t, false)) => starts.push(clamp(t)),
                    _ => {
                        starts.push(vec![DEFAULT_THETA.ln(); j]);
                        for _ in 1..cfg.starts {
                            starts.push(
                                (0..j)
                                    .map(|_| rng.random_range(0.05f64.ln()..5.0f64.ln()))
                                    .collect(),
                            );
                        }
                    }
                }
                let mut best: Option<(Vec<f64>, f64)> = None;
                for s in starts {
                    let (x, fx) = pattern_search(&mut objective, s, lo, hi, cfg.evals_per_start);
                    if fx.is_finite() && best.as_ref().is_none_or(|b| fx > b.1) {
                        best = Some((x, fx));
                    }
                }
                match best {
                    Some((x, _)) => x,
                    None => continue,
                }
            }
        };
        let theta: Vec<f64> = log_theta.iter().map(|v| v.exp()).collect();
        if let Some(chol) = diffs.factor(&theta, nugget) {
            let (mu, weights) = kriging_weights(diffs, &theta, &chol, yn);
            if mu.is_finite() && weights.iter().all(|w| w.is_finite()) {
                return Ok(OutputFit {
                    params: KernelParams { theta, nugget },
                    mu,
                    weights,
                });
            }
        }
    }
    Err(Error::IllConditioned(cfg.max_nugget))
}

/// First pair of rows closer than [`DUPLICATE_DISTANCE`].
pub fn find_duplicate(x: &[Vec<f64>]) -> Option<(usize, usize)> {
    let tol2 = DUPLICATE_DISTANCE * DUPLICATE_DISTANCE;
    for a in 0..x.len() {
        for b in (a + 1)..x.len() {
            let d2: f64 = x[a].iter().zip(&x[b]).map(|(p, q)| (p - q) * (p - q)).sum();
            if d2 < tol2 {
                return Some((a, b));
            }
        }
    }
    None
}

/// Fits one kriging model per output column of `y`.
pub fn fit(x: &[Vec<f64>], y: &[Vec<f64>], cfg: &GprConfig) -> Result<GprModel> {
    fit_with(x, y, cfg, &ThetaInit::Search)
}

pub fn fit_with(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    cfg: &GprConfig,
    init: &ThetaInit,
) -> Result<GprModel> {
    cfg.validate()?;
    check_shapes(x, y)?;
    if let Some((a, b)) = find_duplicate(x) {
        return Err(Error::DuplicateInputs(a, b));
    }
    let norm = Normalization::from_data(x, y);
    let xn: Vec<Vec<f64>> = x.iter().map(|r| norm.x(r)).collect();
    let diffs = PairDiffs::new(&xn);
    let d = y[0].len();

    let supplied: Option<(Vec<Vec<f64>>, bool)> = match init {
        ThetaInit::Search => None,
        ThetaInit::WarmStart(t) => Some((t.clone(), false)),
        ThetaInit::Fixed(t) => Some((t.clone(), true)),
    };
    if let Some((t, _)) = &supplied {
        if t.len() != d || t.iter().any(|r| r.len() != norm.x_scale.len()) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: t.len(),
            });
        }
    }
    // Raw-unit length scales expressed in this model's normalized units.
    let supplied_norm: Option<(Vec<Vec<f64>>, bool)> = supplied.map(|(t, fixed)| {
        let scaled = t
            .iter()
            .map(|row| row.iter().zip(&norm.x_scale).map(|(v, s)| v / s).collect())
            .collect();
        (scaled, fixed)
    });

    let fits = (0..d)
        .into_par_iter()
        .map(|o| {
            let yn = normalized_column(y, &norm, o);
            let init = supplied_norm
                .as_ref()
                .map(|(t, fixed)| (t[o].as_slice(), *fixed));
            fit_output(
                &diffs,
                &yn,
                norm.is_constant(o),
                cfg,
                init,
                cfg.seed.wrapping_add(o as u64),
            )
        })
        .collect::<Result<Vec<OutputFit>>>()?;

    let mut params = Vec::with_capacity(d);
    let mut mu = Vec::with_capacity(d);
    let mut weights = Vec::with_capacity(d);
    for f in fits {
        params.push(f.params);
        mu.push(f.mu);
        weights.push(f.weights);
    }
    Ok(GprModel {
        x: x.to_vec(),
        y: y.to_vec(),
        norm,
        params,
        mu,
        weights,
        xn,
    })
}

impl GprModel {
    pub fn n_train(&self) -> usize {
        self.x.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.norm.x_lo.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.params.len()
    }

    pub fn normalization(&self) -> &Normalization {
        &self.norm
    }

    pub fn params(&self) -> &[KernelParams] {
        &self.params
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn outputs(&self) -> &[Vec<f64>] {
        &self.y
    }

    /// Estimated constant means in raw output units.
    pub fn mean(&self) -> Vec<f64> {
        (0..self.n_outputs())
            .map(|o| self.norm.y_mean[o] + self.norm.y_scale_or_one(o) * self.mu[o])
            .collect()
    }

    /// Length scales per output in raw input units.
    pub fn theta_raw(&self) -> Vec<Vec<f64>> {
        self.params
            .iter()
            .map(|p| p.theta.iter().zip(&self.norm.x_scale).map(|(t, s)| t * s).collect())
            .collect()
    }

    fn check_query(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Mean prediction `μ̂ + r(x)ᵀR⁻¹(y − μ̂1)` per output.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_query(x)?;
        let xs = self.norm.x(x);
        Ok((0..self.n_outputs())
            .map(|o| {
                let theta = &self.params[o].theta;
                // The weights sum to zero up to rounding, so Σwᵢ(kᵢ−1) carries the
                // signal without the cancellation of Σwᵢkᵢ when kᵢ ≈ 1.
                let wsum: f64 = self.weights[o].iter().sum();
                let s: f64 = wsum
                    + self
                        .xn
                        .iter()
                        .zip(&self.weights[o])
                        .map(|(xi, w)| w * matern32_m1(&xs, xi, theta))
                        .sum::<f64>();
                self.norm.y_mean[o] + self.norm.y_scale_or_one(o) * (self.mu[o] + s)
            })
            .collect())
    }

    /// Jacobian `∂ŷ/∂x` (outputs × inputs) of the mean prediction.
    pub fn predict_grad(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_query(x)?;
        let xs = self.norm.x(x);
        let j = self.n_inputs();
        Ok((0..self.n_outputs())
            .map(|o| {
                let theta = &self.params[o].theta;
                let mut g = vec![0.0; j];
                for (xi, w) in self.xn.iter().zip(&self.weights[o]) {
                    if *w == 0.0 {
                        continue;
                    }
                    for (k, dk) in matern32_grad(&xs, xi, theta).into_iter().enumerate() {
                        g[k] += w * dk;
                    }
                }
                let ys = self.norm.y_scale_or_one(o);
                (0..j).map(|k| ys * g[k] / self.norm.x_scale[k]).collect()
            })
            .collect())
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
    use std::f64::consts::PI;

    fn sin_data(n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let x: Vec<Vec<f64>> = (0..n).map(|i| vec![PI * i as f64 / (n - 1) as f64]).collect();
        let y = x.iter().map(|r| vec![r[0].sin()]).collect();
        (x, y)
    }

    #[test]
    fn interpolates_sine() {
        let (x, y) = sin_data(20);
        let m = fit(&x, &y, &GprConfig::default()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            let p = m.predict(xi).unwrap()[0];
            assert!((p - yi[0]).abs() <= 1e-6 * (1.0 + yi[0].abs()));
        }
        let p = m.predict(&[PI / 5.0]).unwrap()[0];
        assert!((p - (PI / 5.0).sin()).abs() <= 1e-3, "{p}");
        let g = m.predict_grad(&[PI / 4.0]).unwrap()[0][0];
        assert!((g - (PI / 4.0).cos()).abs() <= 5e-2, "{g}");
    }

    #[test]
    fn single_point_and_constant_outputs() {
        let m = fit(&[vec![0.2, 0.3]], &[vec![4.0]], &GprConfig::default()).unwrap();
        assert_eq!(m.predict(&[0.2, 0.3]).unwrap(), vec![4.0]);
        assert_eq!(m.mean(), vec![4.0]);

        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.1, (i * i) as f64 * 0.01]).collect();
        let y = vec![vec![5.0]; 10];
        let m = fit(&x, &y, &GprConfig::default()).unwrap();
        assert!((m.mean()[0] - 5.0).abs() < 1e-12);
        assert!((m.predict(&[0.33, 0.2]).unwrap()[0] - 5.0).abs() < 1e-8);
        assert!(m.predict_grad(&[0.33, 0.2]).unwrap()[0][0].abs() < 1e-12);
    }

    #[test]
    fn reverts_to_mean_far_away() {
        let (x, y) = sin_data(15);
        let m = fit(&x, &y, &GprConfig::default()).unwrap();
        let far = m.predict(&[1e4]).unwrap()[0];
        assert!((far - m.mean()[0]).abs() < 1e-12);
    }

    #[test]
    fn duplicate_inputs_are_rejected() {
        let x = vec![vec![0.0], vec![1.0], vec![0.0]];
        let y = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert_eq!(
            fit(&x, &y, &GprConfig::default()).unwrap_err(),
            Error::DuplicateInputs(0, 2)
        );
    }

    #[test]
    fn json_round_trip_reproduces_predictions() {
        let (x, y) = sin_data(12);
        let m = fit(&x, &y, &GprConfig::default()).unwrap();
        let back = GprModel::from_json(&m.to_json().unwrap()).unwrap();
        for q in [0.1, 1.3, 2.9] {
            let a = m.predict(&[q]).unwrap()[0];
            let b = back.predict(&[q]).unwrap()[0];
            assert!((a - b).abs() <= 1e-12);
        }
        assert_eq!(m, back);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng_from_seed(4);
        let x: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.random::<f64>(), 2.0 * rng.random::<f64>()])
            .collect();
        let y: Vec<Vec<f64>> = x
            .iter()
            .map(|r| vec![(3.0 * r[0]).sin() * r[1], r[0] * r[0] - r[1]])
            .collect();
        let m = fit(&x, &y, &GprConfig::default()).unwrap();
        for _ in 0..10 {
            let q = vec![rng.random::<f64>(), 2.0 * rng.random::<f64>()];
            let g = m.predict_grad(&q).unwrap();
            for k in 0..2 {
                let h = 1e-5 * m.norm.x_scale[k];
                let mut qp = q.clone();
                let mut qm = q.clone();
                qp[k] += h;
                qm[k] -= h;
                let (fp, fm) = (m.predict(&qp).unwrap(), m.predict(&qm).unwrap());
                for o in 0..2 {
                    let fd = (fp[o] - fm[o]) / (2.0 * h);
                    assert!((fd - g[o][k]).abs() <= 1e-4 * g[o][k].abs().max(1.0), "{fd} {}", g[o][k]);
                }
            }
        }
    }

    #[test]
    fn nugget_ladder_escalates_by_decades() {
        let l = GprConfig::default().nugget_ladder();
        assert_eq!(l.len(), 5);
        assert!((l[4] - 1e-6).abs() < 1e-18);
    }
}
