//! JSON documents for channels and lift candidates.
//!
//! A channel document is `{"kind": "kraus" | "choi" | "super" | "stochastic",
//! "dim": d, "data": ...}`. Matrices are row-major nested arrays whose entries
//! are real numbers or `[re, im]` pairs. A bare nested array of reals is read
//! as a stochastic matrix.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::{Channel, ChoiMatrix, KrausSet, Superoperator};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::lift::ReversibleLiftCandidate;
use crate::operator::{matrix_from_rows, matrix_to_rows, CMat, Entry};
use crate::stochastic::StochasticMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Kraus,
    Choi,
    Super,
    Stochastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDocument {
    pub kind: ChannelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub data: Value,
}

/// A parsed channel together with the chain it came from, if any.
#[derive(Debug, Clone)]
pub struct ChannelInput {
    pub kind: ChannelKind,
    pub channel: Channel,
    pub stochastic: Option<StochasticMatrix>,
}

impl ChannelDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        if value.is_array() {
            return Ok(Self { kind: ChannelKind::Stochastic, dim: None, data: value });
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn from_kraus(ops: &[CMat]) -> Self {
        let data = ops.iter().map(matrix_to_rows).collect::<Vec<_>>();
        Self { kind: ChannelKind::Kraus, dim: ops.first().map(|k| k.nrows()), data: serde_json::json!(data) }
    }

    pub fn from_superoperator(s: &Superoperator) -> Self {
        Self { kind: ChannelKind::Super, dim: Some(s.dim()), data: serde_json::json!(matrix_to_rows(s.matrix())) }
    }

    pub fn from_choi(choi: &ChoiMatrix) -> Self {
        let d = (choi.matrix().nrows() as f64).sqrt().round() as usize;
        Self { kind: ChannelKind::Choi, dim: Some(d), data: serde_json::json!(matrix_to_rows(choi.matrix())) }
    }

    pub fn from_stochastic(p: &StochasticMatrix) -> Self {
        Self { kind: ChannelKind::Stochastic, dim: Some(p.n()), data: serde_json::json!(p.rows()) }
    }

    pub fn to_input(&self, cfg: &Config) -> Result<ChannelInput> {
        let (channel, stochastic) = match self.kind {
            ChannelKind::Kraus => {
                let mats: Vec<Vec<Vec<Entry>>> = serde_json::from_value(self.data.clone())?;
                let ops = mats.iter().map(|m| matrix_from_rows(m)).collect::<Result<Vec<_>>>()?;
                let ks = KrausSet::new(ops)?;
                (Channel::from_kraus(ks, cfg), None)
            }
            ChannelKind::Choi => {
                let m = self.matrix_data()?;
                let d = self.square_root_dim(&m)?;
                (Channel::from_choi(ChoiMatrix::new(d, m)?, cfg), None)
            }
            ChannelKind::Super => {
                let m = self.matrix_data()?;
                let d = self.square_root_dim(&m)?;
                (Channel::from_superoperator(Superoperator::from_matrix(d, m)?, cfg), None)
            }
            ChannelKind::Stochastic => {
                let p: StochasticMatrix = serde_json::from_value(self.data.clone())?;
                (Channel::from_stochastic(&p), Some(p))
            }
        };
        if let Some(d) = self.dim {
            if d != channel.dim() {
                return Err(Error::Dimension(format!("document declares dim {d} but data has dim {}", channel.dim())));
            }
        }
        Ok(ChannelInput { kind: self.kind, channel, stochastic })
    }

    fn matrix_data(&self) -> Result<CMat> {
        let rows: Vec<Vec<Entry>> = serde_json::from_value(self.data.clone())?;
        matrix_from_rows(&rows)
    }

    fn square_root_dim(&self, m: &CMat) -> Result<usize> {
        let side = m.nrows();
        let d = (side as f64).sqrt().round() as usize;
        if d * d != side || m.ncols() != side {
            return Err(Error::Dimension(format!("a {}x{} matrix is not d^2 x d^2", side, m.ncols())));
        }
        Ok(d)
    }
}

/// `{"basis": [...], "alpha": [[...]], "e": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateDocument {
    pub basis: Vec<Vec<Vec<Entry>>>,
    pub alpha: Vec<Vec<Entry>>,
    pub e: Vec<Vec<Vec<Entry>>>,
}

impl CandidateDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_candidate(&self) -> Result<ReversibleLiftCandidate> {
        let basis = self.basis.iter().map(|m| matrix_from_rows(m)).collect::<Result<Vec<_>>>()?;
        let e = self.e.iter().map(|m| matrix_from_rows(m)).collect::<Result<Vec<_>>>()?;
        ReversibleLiftCandidate::new(basis, matrix_from_rows(&self.alpha)?, e)
    }

    pub fn from_candidate(cand: &ReversibleLiftCandidate) -> Self {
        let conv = |m: &CMat| matrix_to_rows(m).into_iter().map(|r| r.into_iter().map(Entry::Complex).collect()).collect();
        Self { basis: cand.basis.iter().map(conv).collect(), alpha: conv(&cand.alpha), e: cand.e.iter().map(conv).collect() }
    }
}
