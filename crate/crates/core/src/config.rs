//! Tolerances and run parameters shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One record holding every tolerance and sampling knob. It is passed
/// explicitly to each operation that needs it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Entrywise slack for self-adjointness and unitality.
    pub tol_herm: f64,
    /// A Choi matrix is accepted as PSD when its least eigenvalue is `>= -tol_psd`.
    pub tol_psd: f64,
    /// `lambda` is peripheral iff `|lambda| > 1 - tol_per`.
    pub tol_per: f64,
    /// Single-linkage radius for eigenvalue clustering.
    pub tol_cluster: f64,
    pub tol_alg: f64,
    pub tol_span: f64,
    pub tol_idem: f64,
    pub tol_bio: f64,
    pub tol_recon: f64,
    /// Number of iterates used by the asymptotic verifications.
    pub k_max: usize,
    /// Number of random functionals per verification.
    pub samples: usize,
    pub seed: u64,
    /// Largest admissible superoperator side `(n*d)^2`.
    pub dim_ceiling: usize,
    /// Search bound for the simultaneous return-time search.
    pub kuperberg_max: u64,
    pub kuperberg_epsilon: f64,
    /// Horizon of the decay certificates.
    pub n_max: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            tol_herm: 1e-10,
            tol_psd: 1e-9,
            tol_per: 1e-9,
            tol_cluster: 1e-8,
            tol_alg: 1e-8,
            tol_span: 1e-8,
            tol_idem: 1e-8,
            tol_bio: 1e-8,
            tol_recon: 1e-8,
            k_max: 100,
            samples: 64,
            seed: 0,
            dim_ceiling: 256,
            kuperberg_max: 1_000_000,
            kuperberg_epsilon: 1e-6,
            n_max: 200,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let tols = [
            ("tol_herm", self.tol_herm),
            ("tol_psd", self.tol_psd),
            ("tol_per", self.tol_per),
            ("tol_cluster", self.tol_cluster),
            ("tol_alg", self.tol_alg),
            ("tol_span", self.tol_span),
            ("tol_idem", self.tol_idem),
            ("tol_bio", self.tol_bio),
            ("tol_recon", self.tol_recon),
            ("kuperberg_epsilon", self.kuperberg_epsilon),
        ];
        for (name, value) in tols {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {value}")));
            }
        }
        if self.dim_ceiling == 0 {
            return Err(Error::InvalidInput("dim_ceiling must be positive".into()));
        }
        Ok(())
    }

    /// Rejects an amplification whose superoperator side `side` is too large.
    pub fn guard(&self, side: usize) -> Result<()> {
        if side > self.dim_ceiling {
            return Err(Error::ResourceGuard { side, ceiling: self.dim_ceiling });
        }
        Ok(())
    }
}
