//! Finite Borel measures on a bounded interval: a point mass at zero plus a
//! piecewise-constant density on equal-width bins.
//!
//! This is the representation of `ν_σ(dx) = σ² δ₀(dx) + x² ν(dx)`. The total
//! mass equals the variance of the unit-time increment.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfn::FrequencyGrid;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Support and bin layout of a [`GridMeasure`], without values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureShape {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl MeasureShape {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < 0.0 && 0.0 < hi) {
            return Err(Error::InvalidMeasure(format!(
                "support [{lo}, {hi}] must satisfy lo < 0 < hi"
            )));
        }
        Ok(Self { lo, hi, bins })
    }

    pub fn bin_width(&self) -> f64 {
        if self.bins == 0 {
            0.0
        } else {
            (self.hi - self.lo) / self.bins as f64
        }
    }

    /// Left and right edge of bin `j`.
    pub fn bin_edges(&self, j: usize) -> (f64, f64) {
        let w = self.bin_width();
        let a = self.lo + w * j as f64;
        let b = if j + 1 == self.bins {
            self.hi
        } else {
            self.lo + w * (j + 1) as f64
        };
        (a, b)
    }

    /// All `bins + 1` edges.
    pub fn edges(&self) -> Vec<f64> {
        let w = self.bin_width();
        (0..=self.bins)
            .map(|k| {
                if k == self.bins {
                    self.hi
                } else {
                    self.lo + w * k as f64
                }
            })
            .collect()
    }

    pub fn center(&self, j: usize) -> f64 {
        let (a, b) = self.bin_edges(j);
        0.5 * (a + b)
    }

    /// Indices of the bins whose closure contains zero (one or two bins).
    pub fn bins_touching_zero(&self) -> Vec<usize> {
        (0..self.bins)
            .filter(|&j| {
                let (a, b) = self.bin_edges(j);
                a <= 0.0 && 0.0 <= b
            })
            .collect()
    }
}

impl Default for MeasureShape {
    /// `[-10, 10]` with 16 bins.
    fn default() -> Self {
        Self {
            lo: -10.0,
            hi: 10.0,
            bins: 16,
        }
    }
}

/// Point mass at zero plus a nonnegative step density on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridMeasureRepr", into = "GridMeasureRepr")]
pub struct GridMeasure {
    atom_mass: f64,
    shape: MeasureShape,
    bins: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridMeasureRepr {
    atom_mass: f64,
    support: [f64; 2],
    bins: Vec<f64>,
}

impl TryFrom<GridMeasureRepr> for GridMeasure {
    type Error = Error;

    fn try_from(r: GridMeasureRepr) -> Result<Self> {
        GridMeasure::new(r.atom_mass, r.support[0], r.support[1], r.bins)
    }
}

impl From<GridMeasure> for GridMeasureRepr {
    fn from(m: GridMeasure) -> Self {
        GridMeasureRepr {
            atom_mass: m.atom_mass,
            support: [m.shape.lo, m.shape.hi],
            bins: m.bins,
        }
    }
}

impl GridMeasure {
    pub fn new(atom_mass: f64, lo: f64, hi: f64, bins: Vec<f64>) -> Result<Self> {
        let shape = MeasureShape::new(lo, hi, bins.len())?;
        Self::with_shape(atom_mass, shape, bins)
    }

    pub fn with_shape(atom_mass: f64, shape: MeasureShape, bins: Vec<f64>) -> Result<Self> {
        if !(atom_mass.is_finite() && atom_mass >= 0.0) {
            return Err(Error::InvalidMeasure(format!(
                "atom mass {atom_mass} must be finite and nonnegative"
            )));
        }
        if bins.len() != shape.bins {
            return Err(Error::InvalidMeasure(format!(
                "expected {} bin values, got {}",
                shape.bins,
                bins.len()
            )));
        }
        if let Some((j, v)) = bins
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidMeasure(format!(
                "bin {j} has value {v}; densities must be finite and nonnegative"
            )));
        }
        Ok(Self {
            atom_mass,
            shape,
            bins,
        })
    }

    /// The zero measure on `shape`.
    pub fn zeros(shape: MeasureShape) -> Self {
        Self {
            atom_mass: 0.0,
            shape,
            bins: vec![0.0; shape.bins],
        }
    }

    /// A pure point mass at zero with no bins.
    pub fn atom(mass: f64) -> Result<Self> {
        Self::new(mass, -1.0, 1.0, Vec::new())
    }

    pub fn atom_mass(&self) -> f64 {
        self.atom_mass
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn shape(&self) -> MeasureShape {
        self.shape
    }

    pub fn support(&self) -> (f64, f64) {
        (self.shape.lo, self.shape.hi)
    }

    pub fn bin_width(&self) -> f64 {
        self.shape.bin_width()
    }

    /// Mass of the absolutely continuous part.
    pub fn continuous_mass(&self) -> f64 {
        self.bins.iter().sum::<f64>() * self.bin_width()
    }

    pub fn total_mass(&self) -> f64 {
        self.atom_mass + self.continuous_mass()
    }

    /// Value of the step density at `x` (zero outside the support).
    pub fn density_at(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if self.bins.is_empty() || !(lo..hi).contains(&x) {
            return 0.0;
        }
        let j = ((x - lo) / self.bin_width()) as usize;
        self.bins[j.min(self.bins.len() - 1)]
    }

    /// `∫ e^{iux} m(dx)`, exact per bin.
    pub fn fourier_transform(&self, u: f64) -> Complex64 {
        let w = self.bin_width();
        let mut acc = Complex64::new(0.0, 0.0);
        if self.shape.bins > 0 {
            // ∫_bin e^{iux} dx = w e^{iuc} sinc(uw/2); phases advance by e^{iuw}.
            let half = 0.5 * u * w;
            let width_factor = w * sinc(half);
            let step = Complex64::from_polar(1.0, u * w);
            let c0 = self.shape.center(0);
            let mut phase = Complex64::from_polar(1.0, u * c0);
            for (j, &v) in self.bins.iter().enumerate() {
                if j > 0 && j % 64 == 0 {
                    phase = Complex64::from_polar(1.0, u * self.shape.center(j));
                }
                acc += phase * v;
                phase *= step;
            }
            acc *= width_factor;
        }
        acc + self.atom_mass
    }

    /// `∫ f dm` with 8-node Gauss-Legendre per bin. `zero_value` is the
    /// value used for `f` at the atom.
    pub fn integrate<F>(&self, f: F, zero_value: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        self.integrate_with_breaks(f, zero_value, &[])
    }

    /// Like [`integrate`](Self::integrate), but bins containing one of
    /// `breaks` in their interior are split there, so `f` may jump at the
    /// break points without losing accuracy.
    pub fn integrate_with_breaks<F>(&self, f: F, zero_value: f64, breaks: &[f64]) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        if !zero_value.is_finite() {
            return Err(Error::NonFiniteIntegrand { x: 0.0 });
        }
        let mut eval = |x: f64| {
            let y = f(x);
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::NonFiniteIntegrand { x })
            }
        };
        let mut acc = self.atom_mass * zero_value;
        let mut cuts = Vec::new();
        for (j, &v) in self.bins.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let (a, b) = self.shape.bin_edges(j);
            cuts.clear();
            cuts.push(a);
            cuts.extend(breaks.iter().copied().filter(|&t| a < t && t < b));
            cuts.sort_by(f64::total_cmp);
            cuts.push(b);
            let mut s = 0.0;
            for seg in cuts.windows(2) {
                s += gauss_legendre(&mut eval, seg[0], seg[1])?;
            }
            acc += v * s;
        }
        Ok(acc)
    }

    /// `α a + β b` for two measures on the same shape, `α, β ≥ 0`.
    pub fn combine(alpha: f64, a: &GridMeasure, beta: f64, b: &GridMeasure) -> Result<Self> {
        if a.shape != b.shape {
            return Err(Error::InvalidMeasure("shapes differ".into()));
        }
        let bins = a
            .bins
            .iter()
            .zip(&b.bins)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        Self::with_shape(alpha * a.atom_mass + beta * b.atom_mass, a.shape, bins)
    }
}

/// `sin(x)/x` with the removable singularity filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Configuration of the dual-smoothness loss.
#[derive(Debug, Clone)]
pub struct LossConfig {
    s: f64,
    grid: FrequencyGrid,
}

impl LossConfig {
    pub fn new(s: f64, grid: FrequencyGrid) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::param("s", format!("{s} must be finite and >= 0")));
        }
        Ok(Self { s, grid })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }
}

/// `ℓ_s(a, b) = sup_u (1+|u|)^{-s} |F(a - b)(u)|`.
///
/// The supremum is taken over the grid nodes and combined with a certified
/// bound on `|u| > U_max`: there `|F(a-b)(u)|` is at most the atom difference
/// plus `TV(h) / U_max`, `h` being the difference of the step densities.
/// Both parts are subadditive, so the result is a pseudometric.
pub fn loss_ls(a: &GridMeasure, b: &GridMeasure, cfg: &LossConfig) -> f64 {
    let grid = cfg.grid();
    let mut sup = grid
        .nodes()
        .iter()
        .map(|&u| (1.0 + u.abs()).powf(-cfg.s) * (a.fourier_transform(u) - b.fourier_transform(u)).norm())
        .fold(0.0, f64::max);
    sup = sup.max(loss_tail_bound(a, b, cfg.s, grid.u_max()));
    sup
}

/// Loss against a reference whose Fourier transform on the grid is already
/// known. `reference_ft` must align with the grid nodes.
pub fn loss_ls_against(
    a: &GridMeasure,
    reference: &GridMeasure,
    reference_ft: &[Complex64],
    cfg: &LossConfig,
) -> f64 {
    let grid = cfg.grid();
    debug_assert_eq!(reference_ft.len(), grid.len());
    let sup = grid
        .nodes()
        .iter()
        .zip(reference_ft)
        .map(|(&u, fr)| (1.0 + u.abs()).powf(-cfg.s) * (a.fourier_transform(u) - fr).norm())
        .fold(0.0, f64::max);
    sup.max(loss_tail_bound(a, reference, cfg.s, grid.u_max()))
}

fn loss_tail_bound(a: &GridMeasure, b: &GridMeasure, s: f64, u_max: f64) -> f64 {
    let atoms = (a.atom_mass - b.atom_mass).abs();
    let continuous = if u_max > 0.0 {
        difference_variation(a, b) / u_max
    } else {
        a.continuous_mass() + b.continuous_mass()
    };
    (1.0 + u_max).powf(-s) * (atoms + continuous)
}

/// Total variation on ℝ of the difference of the two step densities.
fn difference_variation(a: &GridMeasure, b: &GridMeasure) -> f64 {
    let mut cuts: Vec<f64> = a.shape.edges();
    cuts.extend(b.shape.edges());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut prev = 0.0;
    let mut tv = 0.0;
    for seg in cuts.windows(2) {
        let mid = 0.5 * (seg[0] + seg[1]);
        let h = a.density_at(mid) - b.density_at(mid);
        tv += (h - prev).abs();
        prev = h;
    }
    tv + prev.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exp_density(shape: MeasureShape) -> GridMeasure {
        // bin averages of x e^{-x} on x > 0
        let cdf = |x: f64| {
            let x = x.max(0.0);
            1.0 - (1.0 + x) * (-x).exp()
        };
        let w = shape.bin_width();
        let bins = (0..shape.bins)
            .map(|j| {
                let (a, b) = shape.bin_edges(j);
                (cdf(b) - cdf(a)) / w
            })
            .collect();
        GridMeasure::with_shape(1.0, shape, bins).unwrap()
    }

    #[test]
    fn atom_transform_is_constant() {
        let m = GridMeasure::atom(1.0).unwrap();
        assert_eq!(m.fourier_transform(3.7), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn transform_at_zero_is_total_mass() {
        let m = GridMeasure::new(0.3, -2.0, 3.0, vec![0.1, 0.0, 2.0, 0.4, 1.5]).unwrap();
        let f0 = m.fourier_transform(0.0);
        assert!((f0.re - m.total_mass()).abs() < 1e-15);
        assert_eq!(f0.im, 0.0);
    }

    #[test]
    fn exponential_example_transform() {
        // atom 1 + x e^{-x} dx has transform 1 + (1 - iu)^{-2}
        let m = exp_density(MeasureShape::new(-1.0, 40.0, 8200).unwrap());
        let got = m.fourier_transform(1.0);
        let one_minus_i = Complex64::new(1.0, -1.0);
        let want = 1.0 + (one_minus_i * one_minus_i).inv();
        // bin averaging is second order in the width (0.005 here)
        assert!((got - want).norm() < 1e-5, "{got} vs {want}");
    }

    #[test]
    fn integrate_constant_gives_mass() {
        let m = GridMeasure::new(0.7, -2.0, 2.0, vec![0.5, 0.25, 1.0, 0.0]).unwrap();
        let got = m.integrate(|_| 1.0, 1.0).unwrap();
        assert!((got - m.total_mass()).abs() < 1e-14);
    }

    #[test]
    fn integrate_square_ignores_atom() {
        let m = GridMeasure::atom(1.0).unwrap();
        assert_eq!(m.integrate(|x| x * x, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn integrate_rejects_non_finite() {
        let m = GridMeasure::new(0.0, -1.0, 1.0, vec![1.0, 1.0]).unwrap();
        let err = m.integrate(|x| 1.0 / x.max(0.0), 0.0).unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn jump_probability_functional() {
        // ∫_1^∞ x^{-2} · x e^{-x} dx = E_1(1)
        let oracle = {
            // brute force midpoint quadrature of e^{-x}/x on [1, 60]
            let n = 2_000_000;
            let h = 59.0 / n as f64;
            (0..n)
                .map(|k| {
                    let x = 1.0 + h * (k as f64 + 0.5);
                    (-x).exp() / x
                })
                .sum::<f64>()
                * h
        };
        assert!((oracle - 0.219_383_934_395_520_3).abs() < 1e-9);
        let m = exp_density(MeasureShape::new(-25.0, 25.0, 2048).unwrap());
        let f = |x: f64| if x >= 1.0 { x.powi(-2) } else { 0.0 };
        let got = m.integrate_with_breaks(f, 0.0, &[1.0]).unwrap();
        assert!((got - oracle).abs() < 1e-4, "{got}");
    }

    #[test]
    fn integrate_matches_transform() {
        let shape = MeasureShape::new(-10.0, 10.0, 256).unwrap();
        let bins = (0..256).map(|j| ((j * 37) % 11) as f64 / 7.0).collect();
        let m = GridMeasure::with_shape(0.4, shape, bins).unwrap();
        for &u in &[-5.0, -0.7, 0.0, 1.3, 5.0] {
            let re = m.integrate(|x: f64| (u * x).cos(), 1.0).unwrap();
            let im = m.integrate(|x: f64| (u * x).sin(), 0.0).unwrap();
            let ft = m.fourier_transform(u);
            assert!((ft - Complex64::new(re, im)).norm() < 1e-8, "u = {u}");
        }
    }

    #[test]
    fn loss_of_equal_measures_is_zero() {
        let m = GridMeasure::new(0.3, -2.0, 3.0, vec![0.1, 0.0, 2.0, 0.4, 1.5]).unwrap();
        let cfg = LossConfig::new(1.0, FrequencyGrid::default()).unwrap();
        assert_eq!(loss_ls(&m, &m, &cfg), 0.0);
    }

    #[test]
    fn loss_between_atoms() {
        let a = GridMeasure::atom(1.0).unwrap();
        let b = GridMeasure::atom(0.4).unwrap();
        let cfg = LossConfig::new(0.0, FrequencyGrid::default()).unwrap();
        assert!((loss_ls(&a, &b, &cfg) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn loss_atom_versus_narrow_uniform() {
        // brute force sup over [-200, 200] at step 1e-3 of
        // (1+|u|)^{-1} |1 - e^{iu} sinc(0.01 u)|
        let oracle = (-200_000..=200_000)
            .map(|k| {
                let u = k as f64 * 1e-3;
                let fb = Complex64::from_polar(sinc(0.01 * u), u);
                (1.0 - fb).norm() / (1.0 + u.abs())
            })
            .fold(0.0, f64::max);
        let a = GridMeasure::new(1.0, -1.01, 1.01, vec![0.0; 101]).unwrap();
        let mut bins = vec![0.0; 101];
        bins[100] = 50.0;
        let b = GridMeasure::new(0.0, -1.01, 1.01, bins).unwrap();
        let grid = FrequencyGrid::uniform(20.0, 1e-3, 0.25).unwrap();
        let cfg = LossConfig::new(1.0, grid).unwrap();
        let got = loss_ls(&a, &b, &cfg);
        assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
    }

    #[test]
    fn json_layout_is_stable() {
        let m = GridMeasure::new(0.5, -1.0, 1.0, vec![0.25, 0.0]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"atom_mass":0.5,"support":[-1.0,1.0],"bins":[0.25,0.0]}"#);
        let back: GridMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<GridMeasure>(
            r#"{"atom_mass":-1,"support":[-1,1],"bins":[]}"#
        )
        .is_err());
    }

    #[test]
    fn rejects_bad_support() {
        assert!(GridMeasure::new(0.0, 0.5, 1.0, vec![1.0]).is_err());
        assert!(GridMeasure::new(0.0, -1.0, 1.0, vec![-0.1]).is_err());
    }

    fn arb_measure(shape: MeasureShape) -> impl Strategy<Value = GridMeasure> {
        (0.0..2.0f64, prop::collection::vec(0.0..1.5f64, shape.bins))
            .prop_map(move |(a, v)| GridMeasure::with_shape(a, shape, v).unwrap())
    }

    fn coarse_loss(s: f64) -> LossConfig {
        LossConfig::new(s, FrequencyGrid::uniform(20.0, 0.25, 0.25).unwrap()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn transform_is_linear(
            a in arb_measure(MeasureShape::default()),
            b in arb_measure(MeasureShape::default()),
            alpha in 0.0..3.0f64, beta in 0.0..3.0f64, u in -20.0..20.0f64,
        ) {
            let c = GridMeasure::combine(alpha, &a, beta, &b).unwrap();
            let lhs = c.fourier_transform(u);
            let rhs = a.fourier_transform(u) * alpha + b.fourier_transform(u) * beta;
            prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + c.total_mass()));
        }

        #[test]
        fn transform_bounded_by_mass(a in arb_measure(MeasureShape::default()), u in -50.0..50.0f64) {
            prop_assert!(a.fourier_transform(u).norm() <= a.total_mass() * (1.0 + 1e-12));
        }

        #[test]
        fn loss_is_pseudometric(
            a in arb_measure(MeasureShape::default()),
            b in arb_measure(MeasureShape::default()),
            c in arb_measure(MeasureShape::new(-6.0, 4.0, 10).unwrap()),
            s in 0.0..3.0f64,
        ) {
            let cfg = coarse_loss(s);
            let ab = loss_ls(&a, &b, &cfg);
            prop_assert_eq!(ab, loss_ls(&b, &a, &cfg));
            prop_assert_eq!(loss_ls(&a, &a, &cfg), 0.0);
            let ac = loss_ls(&a, &c, &cfg);
            let cb = loss_ls(&c, &b, &cfg);
            prop_assert!(ab <= ac + cb + 1e-12);
        }

        #[test]
        fn loss_nonincreasing_in_s(
            a in arb_measure(MeasureShape::default()),
            b in arb_measure(MeasureShape::default()),
            s in 0.0..3.0f64, ds in 0.0..2.0f64,
        ) {
            prop_assert!(loss_ls(&a, &b, &coarse_loss(s + ds)) <= loss_ls(&a, &b, &coarse_loss(s)) + 1e-15);
        }
    }
}
