use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CfTriple, FrequencyGrid};
use crate::error::{Error, Result};

/// Where a simulated sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub stream: u64,
}

/// Observed increments `X_t - X_{t-1}`, `t = 1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    increments: Vec<f64>,
    seed: Option<SeedRecord>,
}

impl SampleSet {
    pub fn new(increments: Vec<f64>) -> Result<Self> {
        if increments.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(index) = increments.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self {
            increments,
            seed: None,
        })
    }

    pub fn with_seed(mut self, seed: SeedRecord) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn n(&self) -> usize {
        self.increments.len()
    }

    pub fn seed(&self) -> Option<SeedRecord> {
        self.seed
    }

    pub fn mean(&self) -> f64 {
        self.increments.iter().sum::<f64>() / self.n() as f64
    }

    /// Biased (1/n) sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.increments.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / self.n() as f64
    }

    /// `φ̂_n^{(k)}(u) = n^{-1} Σ (iZ_t)^k e^{iuZ_t}` for `k ∈ {0, 1, 2}`.
    pub fn empirical_cf(&self, u: f64, k: usize) -> Complex64 {
        assert!(k <= 2, "derivative order {k} not supported");
        self.empirical_cf_all(u)[k]
    }

    /// All three derivative orders at `u`.
    pub fn empirical_cf_all(&self, u: f64) -> CfTriple {
        let mut s = [Complex64::new(0.0, 0.0); 3];
        for &z in &self.increments {
            let e = Complex64::from_polar(1.0, u * z);
            s[0] += e;
            s[1] += e * z;
            s[2] += e * (z * z);
        }
        finish(s, self.n())
    }

    /// Empirical CF triples at every grid node.
    ///
    /// Uniform grids advance the phases `e^{i k h Z}` by multiplication and
    /// use `φ̂^{(k)}(-u) = (-1)^k conj φ̂^{(k)}(u)` for the negative half.
    pub fn empirical_cf_on_grid(&self, grid: &FrequencyGrid) -> Vec<CfTriple> {
        let Some(step) = grid.step() else {
            return grid.nodes().iter().map(|&u| self.empirical_cf_all(u)).collect();
        };
        const REANCHOR: usize = 32;
        let zero = grid.zero_index();
        let half = grid.len() - zero;
        let mut sums = vec![[Complex64::new(0.0, 0.0); 3]; half];
        for &z in &self.increments {
            let inc = Complex64::from_polar(1.0, step * z);
            let mut e = Complex64::new(1.0, 0.0);
            for (k, acc) in sums.iter_mut().enumerate() {
                if k > 0 {
                    e = if k % REANCHOR == 0 {
                        Complex64::from_polar(1.0, k as f64 * step * z)
                    } else {
                        e * inc
                    };
                }
                acc[0] += e;
                acc[1] += e * z;
                acc[2] += e * (z * z);
            }
        }
        let n = self.n();
        let positive: Vec<CfTriple> = sums.into_iter().map(|s| finish(s, n)).collect();
        let mut out = Vec::with_capacity(grid.len());
        for t in positive[1..].iter().rev() {
            out.push([t[0].conj(), -t[1].conj(), t[2].conj()]);
        }
        out.extend(positive);
        out
    }
}

fn finish(s: [Complex64; 3], n: usize) -> CfTriple {
    let inv = 1.0 / n as f64;
    [s[0] * inv, s[1] * Complex64::new(0.0, inv), s[2] * -inv]
}
