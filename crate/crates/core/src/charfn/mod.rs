//! Model and empirical characteristic functions with two derivatives, the
//! logarithmic frequency weight, and the weighted `C²` distance `d⁽²⁾`.

mod empirical;
mod grid;
mod model;

use num_complex::Complex64;

pub use empirical::{SampleSet, SeedRecord};
pub use grid::{log_weight, FrequencyGrid, GridParams};
pub use model::{
    bin_kernel_integrals, cf_from_psi, kernels, CharExponentModel, KERNEL_TAYLOR_CUTOFF,
};

use crate::error::{Error, Result};

/// A function value with its first two derivatives.
pub type CfTriple = [Complex64; 3];

/// `d⁽²⁾(f, g) = Σ_{k=0}^{2} max_u w(u) |f^{(k)}(u) - g^{(k)}(u)|` over the
/// grid nodes.
pub fn d2_distance<F, G>(f: F, g: G, grid: &FrequencyGrid) -> Result<f64>
where
    F: Fn(f64) -> CfTriple,
    G: Fn(f64) -> CfTriple,
{
    let mut sup = [0.0f64; 3];
    for (&u, &w) in grid.nodes().iter().zip(grid.weights()) {
        accumulate(&mut sup, &f(u), &g(u), w, u)?;
    }
    Ok(sup.iter().sum())
}

/// [`d2_distance`] for values already tabulated on the grid nodes.
pub fn d2_tables(a: &[CfTriple], b: &[CfTriple], grid: &FrequencyGrid) -> Result<f64> {
    Ok(d2_components(a, b, grid)?.iter().sum())
}

/// The three weighted sup-norms making up `d⁽²⁾`.
pub fn d2_components(a: &[CfTriple], b: &[CfTriple], grid: &FrequencyGrid) -> Result<[f64; 3]> {
    assert_eq!(a.len(), grid.len());
    assert_eq!(b.len(), grid.len());
    let mut sup = [0.0f64; 3];
    for (i, (&u, &w)) in grid.nodes().iter().zip(grid.weights()).enumerate() {
        accumulate(&mut sup, &a[i], &b[i], w, u)?;
    }
    Ok(sup)
}

fn accumulate(sup: &mut [f64; 3], a: &CfTriple, b: &CfTriple, w: f64, u: f64) -> Result<()> {
    for k in 0..3 {
        let d = (a[k] - b[k]).norm();
        if !d.is_finite() {
            return Err(Error::NonFinite {
                what: "characteristic function",
                u,
            });
        }
        sup[k] = sup[k].max(w * d);
    }
    Ok(())
}

/// `max_u w(u) |√n (φ̂_n^{(k)}(u) - φ^{(k)}(u))|` for `k = 0, 1, 2`, the grid
/// restriction of `‖C_n^{(k)}‖_{L∞(w)}`.
pub fn cf_process_norms(
    samples: &SampleSet,
    truth: &[CfTriple],
    grid: &FrequencyGrid,
) -> [f64; 3] {
    let emp = samples.empirical_cf_on_grid(grid);
    let scale = (samples.n() as f64).sqrt();
    let mut sup = [0.0f64; 3];
    for (i, &w) in grid.weights().iter().enumerate() {
        for k in 0..3 {
            sup[k] = sup[k].max(w * scale * (emp[i][k] - truth[i][k]).norm());
        }
    }
    sup
}

/// Single-order form of [`cf_process_norms`].
pub fn cf_process_norm(
    samples: &SampleSet,
    truth: &CharExponentModel,
    k: usize,
    grid: &FrequencyGrid,
) -> f64 {
    assert!(k <= 2, "derivative order {k} not supported");
    cf_process_norms(samples, &truth.cf_on_grid(grid), grid)[k]
}
