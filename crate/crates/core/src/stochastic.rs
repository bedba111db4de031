use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{c, CMat};

/// Row sums must equal one within this slack.
pub const TOL_ROW: f64 = 1e-12;
/// Entries in `[-TOL_NEG, 0)` are rounding noise and are clamped to zero.
pub const TOL_NEG: f64 = 1e-14;

/// A row-stochastic matrix `P` acting on functions by `(Px)_i = sum_j p_ij x_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct StochasticMatrix {
    rows: Vec<Vec<f64>>,
    clamped: usize,
}

impl StochasticMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotStochastic("empty matrix".into()));
        }
        let mut rows = rows;
        let mut clamped = 0;
        for (i, row) in rows.iter_mut().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, p) in row.iter_mut().enumerate() {
                if !p.is_finite() {
                    return Err(Error::NotStochastic(format!("entry ({i},{j}) is not finite")));
                }
                if *p < 0.0 {
                    if *p >= -TOL_NEG {
                        *p = 0.0;
                        clamped += 1;
                    } else {
                        return Err(Error::NotStochastic(format!("entry ({i},{j}) = {p} is negative")));
                    }
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > TOL_ROW {
                return Err(Error::NotStochastic(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { rows, clamped })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Number of slightly negative entries that were clamped to zero.
    pub fn clamped_entries(&self) -> usize {
        self.clamped
    }

    pub fn to_complex(&self) -> CMat {
        let n = self.n();
        CMat::from_fn(n, n, |i, j| c(self.rows[i][j], 0.0))
    }

    /// Indices `j` with `p_ij > 0`.
    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i].iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(j, _)| j)
    }
}

impl TryFrom<Vec<Vec<f64>>> for StochasticMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<StochasticMatrix> for Vec<Vec<f64>> {
    fn from(m: StochasticMatrix) -> Self {
        m.rows
    }
}
