//! Projected pattern search for the `d⁽²⁾` objective.
//!
//! `Ψ, Ψ', Ψ''` are linear in the parameters `(b, atom, bins)`, so each
//! parameter contributes a fixed column of kernel integrals on the grid and
//! a trial point costs one pass over the nodes.

use num_complex::Complex64;

use crate::charfn::{bin_kernel_integrals, CfTriple, FrequencyGrid};
use crate::measure::MeasureShape;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ZERO3: CfTriple = [ZERO; 3];

/// `d⁽²⁾(φ(·; x), target)` as a function of the parameter vector
/// `x = (b, atom, v_0, .., v_{m-1})`.
pub(crate) struct LinearCfObjective {
    weights_sq: Vec<f64>,
    target: Vec<CfTriple>,
    columns: Vec<Vec<CfTriple>>,
}

impl LinearCfObjective {
    pub fn new(target: &[CfTriple], grid: &FrequencyGrid, shape: MeasureShape) -> Self {
        // low frequencies first: they carry most of the misfit, which makes
        // the early exit in `eval` effective
        let mut order: Vec<usize> = (0..grid.len()).collect();
        order.sort_by(|&a, &b| grid.nodes()[a].abs().total_cmp(&grid.nodes()[b].abs()));
        let m = shape.bins;
        let mut columns = vec![Vec::with_capacity(order.len()); 2 + m];
        for &i in &order {
            let u = grid.nodes()[i];
            columns[0].push([
                Complex64::new(0.0, u),
                Complex64::new(0.0, 1.0),
                ZERO,
            ]);
            columns[1].push([
                Complex64::new(-0.5 * u * u, 0.0),
                Complex64::new(-u, 0.0),
                Complex64::new(-1.0, 0.0),
            ]);
            if m > 0 {
                for (j, col) in bin_kernel_integrals(shape, u).into_iter().enumerate() {
                    columns[2 + j].push(col);
                }
            }
        }
        Self {
            weights_sq: order.iter().map(|&i| grid.weights()[i].powi(2)).collect(),
            target: order.iter().map(|&i| target[i]).collect(),
            columns,
        }
    }

    /// `(Ψ, Ψ', Ψ'')` on the (reordered) nodes for parameters `x`.
    pub fn psi(&self, x: &[f64]) -> Vec<CfTriple> {
        let mut psi = vec![ZERO3; self.target.len()];
        for (p, &xp) in x.iter().enumerate() {
            if xp != 0.0 {
                add_scaled(&mut psi, &self.columns[p], xp);
            }
        }
        psi
    }

    /// Column combination `Σ c_p column_p`.
    pub fn direction(&self, terms: &[(usize, f64)]) -> Vec<CfTriple> {
        let mut d = vec![ZERO3; self.target.len()];
        for &(p, c) in terms {
            add_scaled(&mut d, &self.columns[p], c);
        }
        d
    }

    /// `d⁽²⁾` at `psi + t * dir`. Returns `None` as soon as the value is
    /// known to be at least `bound`, and for non-finite values.
    pub fn d2(&self, psi: &[CfTriple], dir: Option<(&[CfTriple], f64)>, bound: f64) -> Option<f64> {
        let mut sup = [0.0f64; 3];
        for i in 0..psi.len() {
            let sq = self.residuals_sq(psi, dir, i);
            for k in 0..3 {
                sup[k] = sup[k].max(sq[k]);
            }
            if i % 16 == 15 && !(sup_sum(&sup) < bound) {
                return None;
            }
        }
        let value = sup_sum(&sup);
        (value.is_finite() && value < bound).then_some(value)
    }

    /// The weighted `L²` misfit `Σ_u Σ_k w(u)² |φ^{(k)} - target_k|²` at
    /// `psi + t * dir`, or `None` if it is at least `bound` or if `d⁽²⁾`
    /// exceeds `cap`.
    pub fn l2_capped(
        &self,
        psi: &[CfTriple],
        dir: Option<(&[CfTriple], f64)>,
        bound: f64,
        cap: f64,
    ) -> Option<f64> {
        let mut sup = [0.0f64; 3];
        let mut total = 0.0;
        for i in 0..psi.len() {
            let sq = self.residuals_sq(psi, dir, i);
            for k in 0..3 {
                sup[k] = sup[k].max(sq[k]);
                total += sq[k];
            }
            if i % 16 == 15 && !(total < bound && sup_sum(&sup) <= cap) {
                return None;
            }
        }
        (total.is_finite() && total < bound && sup_sum(&sup) <= cap).then_some(total)
    }

    fn residuals_sq(&self, psi: &[CfTriple], dir: Option<(&[CfTriple], f64)>, i: usize) -> [f64; 3] {
        let mut p = psi[i];
        if let Some((d, t)) = dir {
            for k in 0..3 {
                p[k] += d[i][k] * t;
            }
        }
        let phi = p[0].exp();
        let phi1 = p[1] * phi;
        let phi2 = (p[2] + p[1] * p[1]) * phi;
        let w2 = self.weights_sq[i];
        let tg = &self.target[i];
        [
            w2 * (phi - tg[0]).norm_sqr(),
            w2 * (phi1 - tg[1]).norm_sqr(),
            w2 * (phi2 - tg[2]).norm_sqr(),
        ]
    }
}

fn sup_sum(sup_sq: &[f64; 3]) -> f64 {
    sup_sq[0].sqrt() + sup_sq[1].sqrt() + sup_sq[2].sqrt()
}

fn add_scaled(acc: &mut [CfTriple], col: &[CfTriple], c: f64) {
    for (a, v) in acc.iter_mut().zip(col) {
        for k in 0..3 {
            a[k] += v[k] * c;
        }
    }
}

/// Improvements below this are treated as rounding noise.
const ROUNDING_FLOOR: f64 = 1e-14;

/// A search direction in parameter space with its step scale.
#[derive(Clone)]
pub(crate) struct Direction {
    pub terms: Vec<(usize, f64)>,
    pub step: f64,
}

pub(crate) struct SearchSettings {
    pub max_sweeps: usize,
    pub step_tol: f64,
    /// Stall tolerance, relative to `max(1, value)`.
    pub objective_tol: f64,
    /// Parameters with index `>= first_bounded` are constrained to `>= 0`.
    pub first_bounded: usize,
    /// Mass of one unit of each parameter, for tie-breaking.
    pub mass_per_unit: Vec<f64>,
}

pub(crate) struct SearchOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub sweeps: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Value after every sweep.
    pub history: Vec<f64>,
}

/// Running `Ψ` table and a criterion evaluated on it: `eval(psi, step, bound)`
/// gives the value at `psi + t * dir`, or `None` when it is not below `bound`.
pub(crate) type Criterion<'a> =
    dyn Fn(&[CfTriple], Option<(&[CfTriple], f64)>, f64) -> Option<f64> + 'a;

/// Sweeps over the directions, trying `±step` (truncated to stay feasible)
/// and accepting strict improvements, or ties that lower the total mass.
/// Steps double after success and halve after failure.
pub(crate) fn pattern_search(
    obj: &LinearCfObjective,
    eval: &Criterion<'_>,
    x0: Vec<f64>,
    mut dirs: Vec<Direction>,
    settings: &SearchSettings,
) -> Option<SearchOutcome> {
    const STALL_SWEEPS: usize = 10;
    let mut x = x0;
    let mut psi = obj.psi(&x);
    let mut f = eval(&psi, None, f64::INFINITY)?;
    let contribs: Vec<Vec<CfTriple>> = dirs.iter().map(|d| obj.direction(&d.terms)).collect();
    let mass_change: Vec<f64> = dirs
        .iter()
        .map(|d| d.terms.iter().map(|&(p, c)| c * settings.mass_per_unit[p]).sum())
        .collect();
    let max_step: Vec<f64> = dirs.iter().map(|d| d.step * 16.0).collect();

    let mut evaluations = 1;
    let mut history = Vec::new();
    let mut stalled = 0;
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < settings.max_sweeps {
        sweeps += 1;
        let f_before = f;
        for (di, dir) in dirs.iter_mut().enumerate() {
            let mut accepted = false;
            for sign in [1.0, -1.0] {
                let t = feasible_step(&x, &dir.terms, sign * dir.step, settings.first_bounded);
                if t == 0.0 {
                    continue;
                }
                evaluations += 1;
                let bound = if mass_change[di] * t < 0.0 {
                    f.next_up()
                } else {
                    f - ROUNDING_FLOOR
                };
                if let Some(ft) = eval(&psi, Some((&contribs[di], t)), bound) {
                    for &(p, c) in &dir.terms {
                        x[p] += c * t;
                        if p >= settings.first_bounded && x[p] < 0.0 {
                            x[p] = 0.0;
                        }
                    }
                    add_scaled(&mut psi, &contribs[di], t);
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            dir.step = if accepted {
                (dir.step * 2.0).min(max_step[di])
            } else {
                dir.step * 0.5
            };
        }
        // drop accumulated rounding in the running Ψ unless that breaks a
        // constraint of the criterion
        let fresh = obj.psi(&x);
        evaluations += 1;
        if let Some(v) = eval(&fresh, None, f64::INFINITY) {
            psi = fresh;
            f = v;
        }
        history.push(f);
        if dirs.iter().all(|d| d.step < settings.step_tol) {
            converged = true;
            break;
        }
        if f_before - f < settings.objective_tol * f.max(1.0) {
            stalled += 1;
            if stalled >= STALL_SWEEPS {
                converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
    }
    Some(SearchOutcome {
        x,
        value: f,
        sweeps,
        evaluations,
        converged,
        history,
    })
}

/// Largest `t` with `|t| <= |step|` and the same sign keeping all bounded
/// parameters nonnegative.
fn feasible_step(x: &[f64], terms: &[(usize, f64)], step: f64, first_bounded: usize) -> f64 {
    let mut t = step;
    for &(p, c) in terms {
        if p < first_bounded {
            continue;
        }
        let rate = c * t.signum();
        if rate < 0.0 {
            let limit = x[p] / -c;
            if limit.abs() < t.abs() {
                t = limit.abs() * t.signum();
            }
        }
    }
    if t.abs() < 1e-300 {
        0.0
    } else {
        t
    }
}
