use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CfTriple, FrequencyGrid};
use crate::measure::{sinc, GridMeasure, MeasureShape};
use crate::special::e1_e2;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Below this `|ux|` the pointwise kernels switch to their Taylor series.
pub const KERNEL_TAYLOR_CUTOFF: f64 = 1e-4;

/// Mean `b` together with `ν_σ`; determines
/// `Ψ(u) = iub + ∫ (e^{iux} - 1 - iux)/x² ν_σ(dx)` and `φ = exp Ψ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharExponentModel {
    pub b: f64,
    pub nu_sigma: GridMeasure,
}

impl CharExponentModel {
    pub fn new(b: f64, nu_sigma: GridMeasure) -> Self {
        Self { b, nu_sigma }
    }

    /// `(Ψ(u), Ψ'(u), Ψ''(u))`.
    pub fn psi_derivatives(&self, u: f64) -> CfTriple {
        let m = &self.nu_sigma;
        let atom = m.atom_mass();
        let mut psi = [
            Complex64::new(-0.5 * atom * u * u, u * self.b),
            Complex64::new(-atom * u, self.b),
            Complex64::new(-atom, 0.0),
        ];
        if !m.bins().is_empty() {
            let cols = bin_kernel_integrals(m.shape(), u);
            for (v, col) in m.bins().iter().zip(&cols) {
                if *v != 0.0 {
                    for k in 0..3 {
                        psi[k] += col[k] * *v;
                    }
                }
            }
        }
        psi
    }

    /// `(φ(u), φ'(u), φ''(u))`.
    pub fn cf(&self, u: f64) -> CfTriple {
        cf_from_psi(self.psi_derivatives(u))
    }

    /// [`cf`](Self::cf) at every grid node.
    pub fn cf_on_grid(&self, grid: &FrequencyGrid) -> Vec<CfTriple> {
        grid.nodes().par_iter().map(|&u| self.cf(u)).collect()
    }

    /// Variance of the unit-time increment, `ν_σ(ℝ)`.
    pub fn variance(&self) -> f64 {
        self.nu_sigma.total_mass()
    }
}

/// `φ = e^Ψ`, `φ' = Ψ'φ`, `φ'' = (Ψ'' + Ψ'²)φ`.
pub fn cf_from_psi(psi: CfTriple) -> CfTriple {
    let phi = psi[0].exp();
    [phi, psi[1] * phi, (psi[2] + psi[1] * psi[1]) * phi]
}

/// Pointwise kernels `(k₀, k₁, k₂)` with
/// `k₀ = (e^{iux} - 1 - iux)/x²`, `k₁ = ∂_u k₀`, `k₂ = ∂_u k₁ = -e^{iux}`.
pub fn kernels(u: f64, x: f64) -> CfTriple {
    let z = u * x;
    let k2 = -Complex64::from_polar(1.0, z);
    if z.abs() < KERNEL_TAYLOR_CUTOFF {
        // four Taylor terms of (e^{iz} - 1 - iz)/z² and i(e^{iz} - 1)/z
        let k0 = Complex64::new(-0.5 + z * z / 24.0, -z / 6.0 + z * z * z / 120.0) * (u * u);
        let k1 = Complex64::new(z * z / 6.0 - 1.0, z * z * z / 24.0 - 0.5 * z) * u;
        return [k0, k1, k2];
    }
    let s = z.sin();
    let cm1 = -2.0 * (0.5 * z).sin().powi(2);
    let k0 = Complex64::new(cm1, s - z) / (x * x);
    let k1 = I * Complex64::new(cm1, s) / x;
    [k0, k1, k2]
}

/// `(∫ k₀, ∫ k₁, ∫ k₂)` over each bin of `shape`, in closed form.
pub fn bin_kernel_integrals(shape: MeasureShape, u: f64) -> Vec<CfTriple> {
    let edges = shape.edges();
    let prim: Vec<(Complex64, Complex64)> = edges.iter().map(|&x| e1_e2(u * x)).collect();
    let w = shape.bin_width();
    let width_factor = w * sinc(0.5 * u * w);
    (0..shape.bins)
        .map(|j| {
            let (e1a, e2a) = prim[j];
            let (e1b, e2b) = prim[j + 1];
            let c = 0.5 * (edges[j] + edges[j + 1]);
            [
                (e2b - e2a) * u,
                I * (e1b - e1a),
                -Complex64::from_polar(width_factor, u * c),
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{truth_model, ModelKind, ModelSpec};

    fn example_model() -> CharExponentModel {
        let spec = ModelSpec::new(ModelKind::brownian_gamma(), 0).unwrap();
        truth_model(&spec, MeasureShape::new(-25.0, 25.0, 2048).unwrap())
            .unwrap()
            .model
    }

    // Ψ(u) = -u²/2 - log(1 - iu) for b = 1, ν_σ = δ₀ + x e^{-x} dx
    fn example_psi(u: f64) -> Complex64 {
        -0.5 * u * u - (Complex64::new(1.0, -u)).ln()
    }

    #[test]
    fn brownian_case() {
        let m = CharExponentModel::new(0.7, GridMeasure::atom(2.0).unwrap());
        let u = 1.3;
        let p = m.psi_derivatives(u);
        assert!((p[0] - Complex64::new(-2.0 * u * u / 2.0, u * 0.7)).norm() < 1e-15);
        assert!((p[1] - Complex64::new(-2.0 * u, 0.7)).norm() < 1e-15);
        assert!((p[2] - Complex64::new(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn values_at_zero() {
        let nu = GridMeasure::new(0.4, -3.0, 5.0, vec![0.2, 1.0, 0.0, 0.5]).unwrap();
        let m = CharExponentModel::new(-1.5, nu.clone());
        let p = m.psi_derivatives(0.0);
        assert_eq!(p[0], Complex64::new(0.0, 0.0));
        assert_eq!(p[1], Complex64::new(0.0, -1.5));
        assert!((p[2].re + nu.total_mass()).abs() < 1e-15);
        let c = m.cf(0.0);
        assert_eq!(c[0], Complex64::new(1.0, 0.0));
        assert!((c[2] - (p[2] - 1.5 * 1.5)).norm() < 1e-15);
    }

    #[test]
    fn example_exponent_closed_form() {
        let m = example_model();
        for k in -30..=30 {
            let u = k as f64 * 0.1;
            let p = m.psi_derivatives(u);
            // the discretisation error grows like (u w)^4
            let tol = 1e-7 * (1.0 + u.powi(4));
            assert!((p[0] - example_psi(u)).norm() < tol, "Ψ({u})");
            // oracle for Ψ': central difference of the closed form
            let h = 1e-5;
            let fd = (example_psi(u + h) - example_psi(u - h)) / (2.0 * h);
            assert!((p[1] - fd).norm() < tol, "Ψ'({u})");
        }
    }

    #[test]
    fn bilateral_gamma_cf() {
        let spec = ModelSpec::new(ModelKind::bilateral_gamma(), 0).unwrap();
        let m = truth_model(&spec, MeasureShape::new(-40.0, 40.0, 4096).unwrap())
            .unwrap()
            .model;
        for k in 0..=40 {
            let u = k as f64 * 0.25;
            let want = (1.0 + u * u).powf(-0.5);
            assert!((m.cf(u)[0] - want).norm() < 1e-5, "u = {u}");
        }
    }

    #[test]
    fn bin_integrals_match_kernel_quadrature() {
        let shape = MeasureShape::new(-3.0, 4.5, 5).unwrap();
        let (nodes, weights) = crate::quadrature::GAUSS_LEGENDRE_8;
        for &u in &[-7.0, -0.3, 1e-6, 2.0, 11.0] {
            let cols = bin_kernel_integrals(shape, u);
            for (j, col) in cols.iter().enumerate() {
                let (a, b) = shape.bin_edges(j);
                let panels = 200;
                let h = (b - a) / panels as f64;
                let mut q = [Complex64::new(0.0, 0.0); 3];
                for p in 0..panels {
                    for (t, w) in nodes.iter().zip(&weights) {
                        let x = a + h * (p as f64 + 0.5 * (t + 1.0));
                        let k = kernels(u, x);
                        for r in 0..3 {
                            q[r] += k[r] * (0.5 * h * w);
                        }
                    }
                }
                for r in 0..3 {
                    assert!((col[r] - q[r]).norm() < 1e-10, "u={u} bin={j} k={r}");
                }
            }
        }
    }

    #[test]
    fn taylor_kernels_are_continuous() {
        let u = 2.0;
        let x = KERNEL_TAYLOR_CUTOFF / u;
        let lo = kernels(u, x * (1.0 - 1e-9));
        let hi = kernels(u, x * (1.0 + 1e-9));
        for r in 0..3 {
            assert!((lo[r] - hi[r]).norm() < 1e-9 * u * u, "k{r}");
        }
        let at_zero = kernels(u, 0.0);
        assert_eq!(at_zero[0], Complex64::new(-2.0, 0.0));
        assert_eq!(at_zero[1], Complex64::new(-2.0, 0.0));
    }
}
