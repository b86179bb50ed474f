//! Plug-in first stage: `b̃_n = X_n / n` and a thresholded spectral estimate
//! of `Fν_σ`, projected onto a bin grid to start the minimum-distance fit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfn::{bin_kernel_integrals, CfTriple, FrequencyGrid, SampleSet};
use crate::error::{Error, Result};
use crate::measure::{GridMeasure, MeasureShape};

/// Relative ridge added to singular normal equations.
pub const RIDGE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PilotConfig {
    kappa: f64,
    grid: FrequencyGrid,
    target: MeasureShape,
}

impl PilotConfig {
    pub fn new(kappa: f64, grid: FrequencyGrid, target: MeasureShape) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::param("kappa", format!("{kappa} must be positive")));
        }
        Ok(Self {
            kappa,
            grid,
            target,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn target(&self) -> MeasureShape {
        self.target
    }
}

impl Default for PilotConfig {
    /// `κ = 1`, the default grid, 16 bins on `[-10, 10]`.
    fn default() -> Self {
        Self {
            kappa: 1.0,
            grid: FrequencyGrid::default(),
            target: MeasureShape::default(),
        }
    }
}

/// `b̃_n`, the sample mean of the increments.
pub fn pilot_mean(samples: &SampleSet) -> f64 {
    samples.mean()
}

/// Pilot value of `Fν_σ(u)` from an empirical CF triple; zero when
/// `|φ̂_n(u)| < κ n^{-1/2}`.
///
/// Uses `Fν_σ = -(log φ)'' = (φ'/φ)² - φ''/φ`.
pub fn pilot_fnu_from(cf: &CfTriple, kappa: f64, n: usize) -> Complex64 {
    let phi = cf[0];
    if phi.norm() < kappa / (n as f64).sqrt() {
        return Complex64::new(0.0, 0.0);
    }
    let r1 = cf[1] / phi;
    r1 * r1 - cf[2] / phi
}

/// The pilot `Fν̃_σ(u)` for a sample.
pub fn pilot_fnu(samples: &SampleSet, cfg: &PilotConfig, u: f64) -> Complex64 {
    pilot_fnu_from(&samples.empirical_cf_all(u), cfg.kappa, samples.n())
}

/// Result of [`project_pilot`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PilotEstimate {
    pub b_tilde: f64,
    /// Projected measure: clipped at zero, no atom.
    pub nu_tilde: GridMeasure,
    /// Least-squares coefficients before clipping.
    pub raw_bins: Vec<f64>,
    /// Set when the normal equations needed the ridge term.
    pub ridge_used: bool,
    /// Number of grid nodes where the threshold indicator was on.
    pub active_nodes: usize,
}

/// Pilot `Fν̃_σ` on all grid nodes, with the indicator mask.
pub fn pilot_fnu_on_grid(samples: &SampleSet, cfg: &PilotConfig) -> (Vec<Complex64>, Vec<bool>) {
    let n = samples.n();
    let threshold = cfg.kappa / (n as f64).sqrt();
    samples
        .empirical_cf_on_grid(&cfg.grid)
        .iter()
        .map(|cf| (pilot_fnu_from(cf, cfg.kappa, n), cf[0].norm() >= threshold))
        .unzip()
}

/// Two-stage start: `(b̃_n, ν̃)` with `ν̃` the projection of the pilot
/// spectral estimate onto `cfg.target`.
pub fn project_pilot(samples: &SampleSet, cfg: &PilotConfig) -> Result<PilotEstimate> {
    let (fnu, mask) = pilot_fnu_on_grid(samples, cfg);
    let (raw, ridge_used) = project_fnu(&fnu, &mask, &cfg.grid, cfg.target)?;
    let clipped = raw.iter().map(|v| v.max(0.0)).collect();
    Ok(PilotEstimate {
        b_tilde: pilot_mean(samples),
        nu_tilde: GridMeasure::with_shape(0.0, cfg.target, clipped)?,
        raw_bins: raw,
        ridge_used,
        active_nodes: mask.iter().filter(|&&m| m).count(),
    })
}

/// Weighted least squares for step-density values `v` (no atom) with
/// `Σ_j v_j ∫_{bin j} e^{iux} dx ≈ fnu(u)` on the masked grid nodes,
/// weights `w(u)²`. Returns the unclipped coefficients and whether the
/// ridge fallback was used.
pub fn project_fnu(
    fnu: &[Complex64],
    mask: &[bool],
    grid: &FrequencyGrid,
    shape: MeasureShape,
) -> Result<(Vec<f64>, bool)> {
    let m = shape.bins;
    if fnu.len() != grid.len() || mask.len() != grid.len() {
        return Err(Error::param("fnu", "length must match the grid"));
    }
    if m == 0 {
        return Ok((Vec::new(), false));
    }
    let mut normal = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (i, &u) in grid.nodes().iter().enumerate() {
        if !mask[i] {
            continue;
        }
        let y = fnu[i];
        if !(y.re.is_finite() && y.im.is_finite()) {
            return Err(Error::NonFinite {
                what: "pilot transform",
                u,
            });
        }
        let w2 = grid.weights()[i].powi(2);
        // columns: transform of the unit density on each bin = -∫ k₂
        let cols: Vec<Complex64> = bin_kernel_integrals(shape, u).iter().map(|c| -c[2]).collect();
        for j in 0..m {
            rhs[j] += w2 * (cols[j].conj() * y).re;
            for k in j..m {
                normal[(j, k)] += w2 * (cols[j].conj() * cols[k]).re;
            }
        }
    }
    for j in 0..m {
        for k in 0..j {
            normal[(j, k)] = normal[(k, j)];
        }
    }
    let eig = normal.clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.max();
    let min_eig = eig.eigenvalues.min();
    let singular = !(max_eig > 0.0) || min_eig <= 1e-12 * max_eig;
    if singular {
        let ridge = RIDGE * (normal.trace() / m as f64).max(f64::MIN_POSITIVE);
        for j in 0..m {
            normal[(j, j)] += ridge;
        }
    }
    let solution = normal
        .cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or_else(|| Error::param("pilot", "normal equations are not positive definite"))?;
    Ok((solution.iter().copied().collect(), singular))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{sample_increments, truth_model, ModelKind, ModelSpec};

    #[test]
    fn mean_of_constant_and_small_samples() {
        let s = SampleSet::new(vec![2.5; 4]).unwrap();
        assert_eq!(pilot_mean(&s), 2.5);
        let s = SampleSet::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(pilot_mean(&s), 2.0);
    }

    #[test]
    fn fnu_at_zero_is_sample_variance() {
        let s = SampleSet::new(vec![0.3, -1.2, 2.2, 0.9, 0.0, -0.4]).unwrap();
        let got = pilot_fnu(&s, &PilotConfig::default(), 0.0);
        assert!((got.re - s.variance()).abs() < 1e-13);
        assert!(got.im.abs() < 1e-13);
    }

    #[test]
    fn below_threshold_is_zero() {
        // φ̂(π/2) = 0 for the sample {1, -1}
        let s = SampleSet::new(vec![1.0, -1.0]).unwrap();
        let got = pilot_fnu(&s, &PilotConfig::default(), std::f64::consts::FRAC_PI_2);
        assert_eq!(got, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn exact_transform_round_trip() {
        let shape = MeasureShape::default();
        let bins: Vec<f64> = (0..16).map(|j| ((j * 5 % 7) as f64) / 10.0).collect();
        let m = GridMeasure::with_shape(0.0, shape, bins.clone()).unwrap();
        let grid = FrequencyGrid::default();
        let fnu: Vec<Complex64> = grid.nodes().iter().map(|&u| m.fourier_transform(u)).collect();
        let mask = vec![true; grid.len()];
        let (got, ridge) = project_fnu(&fnu, &mask, &grid, shape).unwrap();
        assert!(!ridge);
        for (g, b) in got.iter().zip(&bins) {
            assert!((g - b).abs() < 1e-6);
        }
    }

    #[test]
    fn single_active_node_needs_ridge() {
        let grid = FrequencyGrid::default();
        let mut mask = vec![false; grid.len()];
        mask[grid.zero_index()] = true;
        let fnu = vec![Complex64::new(2.0, 0.0); grid.len()];
        let (v, ridge) = project_fnu(&fnu, &mask, &grid, MeasureShape::default()).unwrap();
        assert!(ridge);
        let mass: f64 = v.iter().sum::<f64>() * MeasureShape::default().bin_width();
        assert!((mass - 2.0).abs() < 1e-6);
    }

    #[test]
    fn gaussian_pilot_has_no_atom() {
        let spec = ModelSpec::new(ModelKind::pure_gaussian(), 11).unwrap();
        let s = sample_increments(&spec, 20_000).unwrap();
        let p = project_pilot(&s, &PilotConfig::default()).unwrap();
        assert_eq!(p.nu_tilde.atom_mass(), 0.0);
        assert!(p.nu_tilde.bins().iter().all(|&v| v >= 0.0));
        // the unit Gaussian variance ends up in the bins next to zero
        let v = p.nu_tilde.bins();
        assert!(v[7] + v[8] > v[0] + v[15]);
    }

    #[test]
    fn pilot_close_to_truth_at_one() {
        let spec = ModelSpec::new(ModelKind::brownian_gamma(), 5).unwrap();
        let truth = truth_model(&spec, MeasureShape::new(-25.0, 25.0, 2048).unwrap()).unwrap();
        let target = truth.model.nu_sigma.fourier_transform(1.0);
        let s = sample_increments(&spec, 10_000).unwrap();
        let got = pilot_fnu(&s, &PilotConfig::default(), 1.0);
        // n^{-1/2}/|φ(1)| (1 + |Ψ'(1)|²) ≈ 0.01/0.43 · 3.5
        assert!((got - target).norm() < 0.25, "{got} vs {target}");
    }
}
