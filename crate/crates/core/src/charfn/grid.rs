use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a uniform symmetric frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub u_max: f64,
    pub step: f64,
    pub delta: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            u_max: 20.0,
            step: 0.05,
            delta: 0.25,
        }
    }
}

impl GridParams {
    pub fn build(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::uniform(self.u_max, self.step, self.delta)
    }
}

/// Symmetric set of frequencies containing zero, with the logarithmic
/// weight `w(u) = log(e + |u|)^{-1/2 - δ}` precomputed per node.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    delta: f64,
    step: Option<f64>,
    zero: usize,
}

impl FrequencyGrid {
    /// Nodes `k * step` for `|k * step| <= u_max`.
    pub fn uniform(u_max: f64, step: f64, delta: f64) -> Result<Self> {
        if !(u_max.is_finite() && u_max > 0.0) {
            return Err(Error::param("u_max", format!("{u_max} must be positive")));
        }
        if !(step.is_finite() && step > 0.0 && step <= u_max) {
            return Err(Error::param("step", format!("{step} must lie in (0, u_max]")));
        }
        let half = (u_max / step * (1.0 + 1e-12)).floor() as i64;
        let nodes: Vec<f64> = (-half..=half).map(|k| k as f64 * step).collect();
        let mut grid = Self::from_nodes(nodes, delta)?;
        grid.step = Some(step);
        Ok(grid)
    }

    /// Arbitrary nodes; they must contain zero and be symmetric.
    pub fn from_nodes(mut nodes: Vec<f64>, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::param("delta", format!("{delta} must be positive")));
        }
        if nodes.iter().any(|u| !u.is_finite()) {
            return Err(Error::param("nodes", "non-finite frequency"));
        }
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let zero = nodes
            .iter()
            .position(|&u| u == 0.0)
            .ok_or_else(|| Error::param("nodes", "grid must contain 0"))?;
        let n = nodes.len();
        if (0..n).any(|i| nodes[i] != -nodes[n - 1 - i]) {
            return Err(Error::param("nodes", "grid must be symmetric about 0"));
        }
        let weights = nodes.iter().map(|&u| log_weight(u, delta)).collect();
        Ok(Self {
            nodes,
            weights,
            delta,
            step: None,
            zero,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Spacing, for grids built by [`uniform`](Self::uniform).
    pub fn step(&self) -> Option<f64> {
        self.step
    }

    /// Largest node.
    pub fn u_max(&self) -> f64 {
        *self.nodes.last().expect("grid contains 0")
    }

    /// Position of `u = 0` in [`nodes`](Self::nodes).
    pub fn zero_index(&self) -> usize {
        self.zero
    }
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        GridParams::default().build().expect("default grid is valid")
    }
}

/// `w(u) = log(e + |u|)^{-1/2 - δ}`.
pub fn log_weight(u: f64, delta: f64) -> f64 {
    (std::f64::consts::E + u.abs()).ln().powf(-0.5 - delta)
}
