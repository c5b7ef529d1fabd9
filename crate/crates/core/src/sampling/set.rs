use serde::{Deserialize, Serialize};

use super::{physicality_check, AnnealConfig};
use crate::error::{Error, Result};
use crate::tensors::{InvariantKind, InvariantPoint, SymMat3, UnitVec3};

pub const ALGORITHM_VERSION: &str = "invsurr-anneal/1";

/// Acceptance bookkeeping of one annealing run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnealStats {
    pub proposed: usize,
    pub accepted: usize,
    /// Smallest nearest-neighbor distance gain among accepted moves.
    pub min_gain: Option<f64>,
}

impl AnnealStats {
    pub(crate) fn record(&mut self, d: f64, d_test: f64) {
        self.accepted += 1;
        let gain = d_test - d;
        self.min_gain = Some(self.min_gain.map_or(gain, |g| g.min(gain)));
    }
}

/// Space-filling design with the tensors realizing each invariant point.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub kind: InvariantKind,
    pub points: Vec<InvariantPoint>,
    pub tensors: Vec<SymMat3>,
    /// Rotation angles per point (TransIso only).
    pub angles: Option<Vec<[f64; 3]>>,
    pub direction: Option<UnitVec3>,
    pub pinned: usize,
    pub seed: u64,
    pub config: AnnealConfig,
    pub stats: AnnealStats,
}

/// Sidecar describing how a [`SampleSet`] CSV was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSetMetadata {
    pub algorithm_version: String,
    pub kind: InvariantKind,
    pub n: usize,
    pub pinned: usize,
    pub seed: u64,
    pub delta: Option<f64>,
    pub anneal: AnnealConfig,
    pub direction: Option<UnitVec3>,
    pub angles: Option<Vec<[f64; 3]>>,
    pub stats: AnnealStats,
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn invariant_rows(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.to_vec()).collect()
    }

    pub fn csv_header(kind: InvariantKind) -> String {
        let mut cols = vec!["I1", "I2", "I3"];
        if kind == InvariantKind::TransIso {
            cols.extend(["I4", "I5"]);
        }
        cols.extend(["C11", "C12", "C13", "C22", "C23", "C33", "pinned"]);
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::csv_header(self.kind);
        out.push('\n');
        for (i, (p, c)) in self.points.iter().zip(&self.tensors).enumerate() {
            let mut fields: Vec<String> = p.to_vec().into_iter().map(fmt).collect();
            fields.extend(c.0.iter().map(|v| fmt(*v)));
            fields.push(if i == self.pinned { "1" } else { "0" }.to_string());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn metadata(&self, delta: Option<f64>) -> SampleSetMetadata {
        SampleSetMetadata {
            algorithm_version: ALGORITHM_VERSION.to_string(),
            kind: self.kind,
            n: self.len(),
            pinned: self.pinned,
            seed: self.seed,
            delta,
            anneal: self.config,
            direction: self.direction,
            angles: self.angles.clone(),
            stats: self.stats,
        }
    }

    /// Parses a CSV written by [`SampleSet::to_csv`], re-checking physicality and
    /// the single pinned reference.
    pub fn from_csv(text: &str, meta: &SampleSetMetadata) -> Result<Self> {
        let bad = |msg: String| Error::Persistence(msg);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty sample file".into()))?;
        if header.trim() != Self::csv_header(meta.kind) {
            return Err(bad(format!("unexpected sample header {header:?}")));
        }
        let ni = meta.kind.n_invariants();
        let mut points = Vec::new();
        let mut tensors = Vec::new();
        let mut pinned = Vec::new();
        for (row, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != ni + 7 {
                return Err(bad(format!("row {row}: expected {} fields", ni + 7)));
            }
            let nums = fields[..ni + 6]
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| bad(format!("row {row}: {e}")))?;
            let p = InvariantPoint::from_slice(&nums[..ni])?;
            if !physicality_check(&p) {
                return Err(Error::Unphysical(p.i1, p.i2, p.i3));
            }
            points.push(p);
            let mut c = [0.0; 6];
            c.copy_from_slice(&nums[ni..]);
            tensors.push(SymMat3(c));
            if fields[ni + 6].trim() == "1" {
                pinned.push(points.len() - 1);
            }
        }
        if pinned.len() != 1 {
            return Err(bad(format!(
                "expected exactly one pinned row, found {}",
                pinned.len()
            )));
        }
        Ok(SampleSet {
            kind: meta.kind,
            points,
            tensors,
            angles: meta.angles.clone(),
            direction: meta.direction,
            pinned: pinned[0],
            seed: meta.seed,
            config: meta.anneal,
            stats: meta.stats,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let set = SampleSet {
            kind: InvariantKind::Iso,
            points: vec![
                InvariantPoint::iso(3.3, 3.54, 1.232),
                InvariantPoint::REFERENCE_ISO,
            ],
            tensors: vec![SymMat3::diag(0.8, 1.1, 1.4), SymMat3::IDENTITY],
            angles: None,
            direction: None,
            pinned: 1,
            seed: 7,
            config: AnnealConfig::iso(),
            stats: AnnealStats::default(),
        };
        let text = set.to_csv();
        assert!(text.starts_with("I1,I2,I3,C11,C12,C13,C22,C23,C33,pinned\n"));
        let meta = set.metadata(Some(0.175));
        let json = serde_json::to_string(&meta).unwrap();
        let meta: SampleSetMetadata = serde_json::from_str(&json).unwrap();
        let back = SampleSet::from_csv(&text, &meta).unwrap();
        assert_eq!(back.points, set.points);
        assert_eq!(back.tensors, set.tensors);
        assert_eq!(back.pinned, 1);
    }
}
