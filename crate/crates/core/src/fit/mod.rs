//! Minimum-distance estimator: local minimization of
//! `d⁽²⁾(φ(·; b, ν_σ), φ̂_n)` over the drift, the atom at zero and the bin
//! values, constrained to nonnegative measures.

mod search;

use serde::{Deserialize, Serialize};

use crate::charfn::{d2_tables, CfTriple, CharExponentModel, FrequencyGrid, SampleSet};
use crate::error::{Error, Result};
use crate::measure::GridMeasure;
use search::{pattern_search, Direction, LinearCfObjective, SearchSettings};

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub freq_grid: FrequencyGrid,
    /// `c` in the slack `δ_n = c n^{-1/2}`.
    pub delta_n_const: f64,
    /// Budget of sweeps over all search directions.
    pub max_iters: usize,
    pub step_tol: f64,
    pub objective_tol: f64,
    /// After the descent, move to the point of smallest weighted `L²`
    /// misfit among those with `d⁽²⁾ <= best + δ_n`.
    pub select_within_slack: bool,
}

impl FitConfig {
    pub fn new(
        freq_grid: FrequencyGrid,
        delta_n_const: f64,
        max_iters: usize,
        step_tol: f64,
        objective_tol: f64,
    ) -> Result<Self> {
        if max_iters == 0 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        for (name, v) in [
            ("delta_n_const", delta_n_const),
            ("step_tol", step_tol),
            ("objective_tol", objective_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        Ok(Self {
            freq_grid,
            delta_n_const,
            max_iters,
            step_tol,
            objective_tol,
            select_within_slack: true,
        })
    }

    /// `δ_n` for a sample of size `n`.
    pub fn delta_n(&self, n: usize) -> f64 {
        self.delta_n_const / (n as f64).sqrt()
    }
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            freq_grid: FrequencyGrid::default(),
            delta_n_const: 1.0,
            max_iters: 2000,
            step_tol: 1e-6,
            objective_tol: 1e-10,
            select_within_slack: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub b_hat: f64,
    pub nu_hat: GridMeasure,
    /// Achieved `d⁽²⁾` against the target.
    pub objective: f64,
    /// Smallest `d⁽²⁾` reached by the descent; `objective <= best_objective + delta_n`.
    pub best_objective: f64,
    /// `d⁽²⁾` at the start point.
    pub pilot_objective: f64,
    /// Completed sweeps of the descent.
    pub iterations: usize,
    /// Completed sweeps of the selection within the slack.
    pub selection_iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub delta_n: f64,
    /// Weighted `L²` misfit of the result.
    pub l2_misfit: f64,
    /// `d⁽²⁾` after every descent sweep, nonincreasing.
    pub history: Vec<f64>,
}

impl FitResult {
    pub fn model(&self) -> CharExponentModel {
        CharExponentModel::new(self.b_hat, self.nu_hat.clone())
    }
}

/// `d⁽²⁾(φ(·; b, ν_σ), φ̂_n)` on the grid.
pub fn objective(b: f64, measure: &GridMeasure, samples: &SampleSet, grid: &FrequencyGrid) -> Result<f64> {
    let model = CharExponentModel::new(b, measure.clone());
    d2_tables(&model.cf_on_grid(grid), &samples.empirical_cf_on_grid(grid), grid)
}

/// Fits against the empirical CF of `samples`, starting from `start`.
pub fn minimize(samples: &SampleSet, start: (f64, &GridMeasure), cfg: &FitConfig) -> Result<FitResult> {
    let target = samples.empirical_cf_on_grid(&cfg.freq_grid);
    minimize_against(&target, samples.n(), start, cfg)
}

/// [`minimize`] against an arbitrary target table on `cfg.freq_grid`, e.g.
/// an exact model CF in place of the empirical one. `n` only sets `δ_n`.
pub fn minimize_against(
    target: &[CfTriple],
    n: usize,
    start: (f64, &GridMeasure),
    cfg: &FitConfig,
) -> Result<FitResult> {
    let (b0, nu0) = start;
    if target.len() != cfg.freq_grid.len() {
        return Err(Error::param("target", "length must match the grid"));
    }
    if !b0.is_finite() {
        return Err(Error::param("b", format!("{b0} is not finite")));
    }
    let shape = nu0.shape();
    let w = shape.bin_width();
    let m = shape.bins;
    let obj = LinearCfObjective::new(target, &cfg.freq_grid, shape);

    let mut x0 = Vec::with_capacity(2 + m);
    x0.push(b0);
    x0.push(nu0.atom_mass());
    x0.extend_from_slice(nu0.bins());

    // mass of one unit of each parameter
    let mut mass_per_unit = vec![0.0, 1.0];
    mass_per_unit.extend(std::iter::repeat_n(w, m));

    let total = nu0.total_mass().max(1e-3);
    let mut dirs = vec![
        Direction {
            terms: vec![(0, 1.0)],
            step: 0.05 * total.sqrt(),
        },
        Direction {
            terms: vec![(1, 1.0)],
            step: 0.1 * total,
        },
    ];
    for j in 0..m {
        dirs.push(Direction {
            terms: vec![(2 + j, 1.0 / w)],
            step: 0.1 * total,
        });
    }
    // mass transfers between neighbouring cells, with the atom placed
    // between the negative and nonnegative bins
    let mut cells: Vec<usize> = (0..m).filter(|&j| shape.center(j) < 0.0).map(|j| 2 + j).collect();
    cells.push(1);
    cells.extend((0..m).filter(|&j| shape.center(j) >= 0.0).map(|j| 2 + j));
    for pair in cells.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        dirs.push(Direction {
            terms: vec![(p, 1.0 / mass_per_unit[p]), (q, -1.0 / mass_per_unit[q])],
            step: 0.05 * total,
        });
    }

    let settings = SearchSettings {
        max_sweeps: cfg.max_iters,
        step_tol: cfg.step_tol,
        objective_tol: cfg.objective_tol,
        first_bounded: 1,
        mass_per_unit,
    };
    let d2 = |psi: &[CfTriple], dir: Option<(&[CfTriple], f64)>, bound: f64| obj.d2(psi, dir, bound);
    let start_value = obj.d2(&obj.psi(&x0), None, f64::INFINITY).ok_or_else(|| {
        let model = CharExponentModel::new(b0, nu0.clone());
        let u = cfg
            .freq_grid
            .nodes()
            .iter()
            .copied()
            .find(|&u| model.cf(u).iter().any(|c| !(c.re.is_finite() && c.im.is_finite())))
            .unwrap_or(f64::NAN);
        Error::NonFinite {
            what: "objective at start",
            u,
        }
    })?;
    let non_finite = || Error::NonFinite {
        what: "objective",
        u: f64::NAN,
    };
    let descent = pattern_search(&obj, &d2, x0, dirs.clone(), &settings).ok_or_else(non_finite)?;
    let delta_n = cfg.delta_n(n);
    let best = descent.value;

    let (x, selection_sweeps, selection_evals, selection_converged) = if cfg.select_within_slack {
        let cap = (best + delta_n).min(start_value);
        let l2 = |psi: &[CfTriple], dir: Option<(&[CfTriple], f64)>, bound: f64| {
            obj.l2_capped(psi, dir, bound, cap)
        };
        match pattern_search(&obj, &l2, descent.x.clone(), dirs, &settings) {
            Some(sel) => (sel.x, sel.sweeps, sel.evaluations, sel.converged),
            None => (descent.x.clone(), 0, 0, true),
        }
    } else {
        (descent.x.clone(), 0, 0, true)
    };

    let psi = obj.psi(&x);
    let objective = obj.d2(&psi, None, f64::INFINITY).ok_or_else(non_finite)?;
    let l2_misfit = obj.l2_capped(&psi, None, f64::INFINITY, f64::INFINITY).ok_or_else(non_finite)?;
    let nu_hat = GridMeasure::with_shape(x[1], shape, x[2..].to_vec())?;
    Ok(FitResult {
        b_hat: x[0],
        nu_hat,
        objective,
        best_objective: best,
        pilot_objective: start_value,
        iterations: descent.sweeps,
        selection_iterations: selection_sweeps,
        evaluations: descent.evaluations + selection_evals,
        converged: descent.converged && selection_converged,
        delta_n,
        l2_misfit,
        history: descent.history,
    })
}

/// `ν̂([a, ∞)) = ∫_a^∞ x^{-2} ν̂_σ(dx)` for each threshold `a > 0`.
pub fn functional_report(result: &FitResult, thresholds: &[f64]) -> Result<Vec<f64>> {
    thresholds
        .iter()
        .map(|&a| jump_tail(&result.nu_hat, a))
        .collect()
}

/// `∫_a^∞ x^{-2} ν_σ(dx)` for one measure.
pub fn jump_tail(measure: &GridMeasure, a: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::param("threshold", format!("{a} must be positive")));
    }
    measure.integrate_with_breaks(
        |x| if x >= a { 1.0 / (x * x) } else { 0.0 },
        0.0,
        &[a],
    )
}

/// Relative frequency of increments strictly above `a`.
pub fn hf_baseline(samples: &SampleSet, a: f64) -> f64 {
    let hits = samples.increments().iter().filter(|&&x| x > a).count();
    hits as f64 / samples.n() as f64
}
