//! Seeded samplers of unit-time increments for a few Lévy models, each with
//! its exact Lévy–Khinchine characteristics.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded with the
//! spec's 64-bit seed. Replication `r` draws from ChaCha stream `r`, so
//! replications are independent and reproducible in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::charfn::{CharExponentModel, SampleSet, SeedRecord};
use crate::error::{Error, Result};
use crate::measure::{GridMeasure, MeasureShape};

/// Small-jump cutoff of the tempered Cauchy sampler. Jumps below it are
/// replaced by a Gaussian with the same variance.
pub const TEMPERED_CAUCHY_CUTOFF: f64 = 0.01;

/// Model family and its parameters. `b` is always the mean of `X_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// `b + σ W_1`.
    PureGaussian { b: f64, sigma: f64 },
    /// Brownian motion plus a Gamma subordinator with Lévy density
    /// `shape · x^{-1} e^{-rate x}` on `x > 0`.
    BrownianGamma {
        b: f64,
        sigma: f64,
        shape: f64,
        rate: f64,
    },
    /// Brownian motion plus `Poisson(intensity)` many
    /// `N(jump_mean, jump_std²)` jumps.
    CompoundPoissonGaussianJumps {
        b: f64,
        sigma: f64,
        intensity: f64,
        jump_mean: f64,
        jump_std: f64,
    },
    /// `b + G₁ - G₂` with independent `Gamma(shape = β/2, rate = γ)`;
    /// characteristic function `e^{iub} (1 + u²/γ²)^{-β/2}`.
    BilateralGamma { b: f64, gamma: f64, beta: f64 },
    /// Symmetric tempered stable law of index one:
    /// `x² ν(dx) = scale · e^{-decay |x|} dx`, so `|φ|` decays exponentially.
    TemperedCauchy { b: f64, scale: f64, decay: f64 },
}

impl ModelKind {
    pub fn pure_gaussian() -> Self {
        ModelKind::PureGaussian { b: 0.0, sigma: 1.0 }
    }

    /// `N(0,1) * Exp(1)` shifted to mean 1.
    pub fn brownian_gamma() -> Self {
        ModelKind::BrownianGamma {
            b: 1.0,
            sigma: 1.0,
            shape: 1.0,
            rate: 1.0,
        }
    }

    pub fn compound_poisson() -> Self {
        ModelKind::CompoundPoissonGaussianJumps {
            b: 0.5,
            sigma: 0.0,
            intensity: 1.0,
            jump_mean: 0.5,
            jump_std: 0.5,
        }
    }

    pub fn bilateral_gamma() -> Self {
        ModelKind::BilateralGamma {
            b: 0.0,
            gamma: 1.0,
            beta: 1.0,
        }
    }

    pub fn tempered_cauchy() -> Self {
        ModelKind::TemperedCauchy {
            b: 0.0,
            scale: 0.5,
            decay: 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::PureGaussian { .. } => "pure_gaussian",
            ModelKind::BrownianGamma { .. } => "brownian_gamma",
            ModelKind::CompoundPoissonGaussianJumps { .. } => "compound_poisson_gaussian_jumps",
            ModelKind::BilateralGamma { .. } => "bilateral_gamma",
            ModelKind::TemperedCauchy { .. } => "tempered_cauchy",
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ModelKind::PureGaussian { b, .. }
            | ModelKind::BrownianGamma { b, .. }
            | ModelKind::CompoundPoissonGaussianJumps { b, .. }
            | ModelKind::BilateralGamma { b, .. }
            | ModelKind::TemperedCauchy { b, .. } => b,
        }
    }

    /// Lower bound class of `|φ(u)|` as `|u| → ∞`.
    pub fn decay_case(&self) -> DecayCase {
        if self.gaussian_variance() > 0.0 {
            return DecayCase::Gaussian;
        }
        match self {
            ModelKind::TemperedCauchy { .. } => DecayCase::Exponential,
            _ => DecayCase::Polynomial,
        }
    }

    /// Gaussian variance `σ²`, the atom of `ν_σ`.
    pub fn gaussian_variance(&self) -> f64 {
        match *self {
            ModelKind::PureGaussian { sigma, .. }
            | ModelKind::BrownianGamma { sigma, .. }
            | ModelKind::CompoundPoissonGaussianJumps { sigma, .. } => sigma * sigma,
            ModelKind::BilateralGamma { .. } | ModelKind::TemperedCauchy { .. } => 0.0,
        }
    }

    /// `∫_{-∞}^{x} y² ν(dy)`.
    pub fn jump_mass_below(&self, x: f64) -> f64 {
        match *self {
            ModelKind::PureGaussian { .. } => 0.0,
            ModelKind::BrownianGamma { shape, rate, .. } => {
                if x <= 0.0 {
                    0.0
                } else {
                    shape * (1.0 - (1.0 + rate * x) * (-rate * x).exp()) / (rate * rate)
                }
            }
            ModelKind::CompoundPoissonGaussianJumps {
                intensity,
                jump_mean,
                jump_std,
                ..
            } => {
                let z = (x - jump_mean) / jump_std;
                let cdf = 0.5 * erfc(-z / std::f64::consts::SQRT_2);
                let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
                intensity
                    * ((jump_mean * jump_mean + jump_std * jump_std) * cdf
                        - jump_std * pdf * (jump_mean + x))
            }
            ModelKind::BilateralGamma { gamma, beta, .. } => {
                let side = |t: f64| (1.0 + gamma * t) * (-gamma * t).exp();
                let half = 0.5 * beta / (gamma * gamma);
                if x < 0.0 {
                    half * side(-x)
                } else {
                    half * (2.0 - side(x))
                }
            }
            ModelKind::TemperedCauchy { scale, decay, .. } => {
                if x < 0.0 {
                    scale * (decay * x).exp() / decay
                } else {
                    scale * (2.0 - (-decay * x).exp()) / decay
                }
            }
        }
    }

    /// `∫ x² ν(dx)`.
    pub fn jump_mass(&self) -> f64 {
        match *self {
            ModelKind::PureGaussian { .. } => 0.0,
            ModelKind::BrownianGamma { shape, rate, .. } => shape / (rate * rate),
            ModelKind::CompoundPoissonGaussianJumps {
                intensity,
                jump_mean,
                jump_std,
                ..
            } => intensity * (jump_mean * jump_mean + jump_std * jump_std),
            ModelKind::BilateralGamma { gamma, beta, .. } => beta / (gamma * gamma),
            ModelKind::TemperedCauchy { scale, decay, .. } => 2.0 * scale / decay,
        }
    }

    /// `Var(X_1) = ν_σ(ℝ)`.
    pub fn variance(&self) -> f64 {
        self.gaussian_variance() + self.jump_mass()
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} must be positive")))
            }
        }
        fn nonneg(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} must be nonnegative")))
            }
        }
        if !self.mean().is_finite() {
            return Err(Error::param("b", "must be finite"));
        }
        match *self {
            ModelKind::PureGaussian { sigma, .. } => nonneg("sigma", sigma),
            ModelKind::BrownianGamma {
                sigma, shape, rate, ..
            } => {
                nonneg("sigma", sigma)?;
                positive("shape", shape)?;
                positive("rate", rate)
            }
            ModelKind::CompoundPoissonGaussianJumps {
                sigma,
                intensity,
                jump_mean,
                jump_std,
                ..
            } => {
                nonneg("sigma", sigma)?;
                positive("intensity", intensity)?;
                positive("jump_std", jump_std)?;
                if jump_mean.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("jump_mean", "must be finite"))
                }
            }
            ModelKind::BilateralGamma { gamma, beta, .. } => {
                positive("gamma", gamma)?;
                positive("beta", beta)
            }
            ModelKind::TemperedCauchy { scale, decay, .. } => {
                positive("scale", scale)?;
                positive("decay", decay)
            }
        }
    }
}

/// How fast `|φ|` may decay: `e^{-cu²}`, `e^{-c|u|}` or `|u|^{-β}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayCase {
    Gaussian,
    Exponential,
    Polynomial,
}

/// A model family plus the seed of its random stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, seed })
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// `n` i.i.d. unit-time increments from stream 0 of the spec's seed.
pub fn sample_increments(spec: &ModelSpec, n: usize) -> Result<SampleSet> {
    sample_increments_stream(spec, n, 0)
}

/// `n` increments from ChaCha stream `stream`.
pub fn sample_increments_stream(spec: &ModelSpec, n: usize, stream: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    spec.kind.validate()?;
    let mut rng = spec.rng(stream);
    let draws = match spec.kind {
        ModelKind::PureGaussian { b, sigma } => (0..n)
            .map(|_| b + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
        ModelKind::BrownianGamma {
            b,
            sigma,
            shape,
            rate,
        } => {
            let gamma = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::param("shape", e.to_string()))?;
            let drift = b - shape / rate;
            (0..n)
                .map(|_| {
                    let w: f64 = rng.sample(StandardNormal);
                    drift + sigma * w + gamma.sample(&mut rng)
                })
                .collect()
        }
        ModelKind::CompoundPoissonGaussianJumps {
            b,
            sigma,
            intensity,
            jump_mean,
            jump_std,
        } => {
            let count = Poisson::new(intensity).map_err(|e| Error::param("intensity", e.to_string()))?;
            let jump = Normal::new(jump_mean, jump_std).map_err(|e| Error::param("jump_std", e.to_string()))?;
            let drift = b - intensity * jump_mean;
            (0..n)
                .map(|_| {
                    let w: f64 = rng.sample(StandardNormal);
                    let k = count.sample(&mut rng) as u64;
                    let jumps: f64 = (0..k).map(|_| jump.sample(&mut rng)).sum();
                    drift + sigma * w + jumps
                })
                .collect()
        }
        ModelKind::BilateralGamma { b, gamma, beta } => {
            let g = Gamma::new(0.5 * beta, 1.0 / gamma).map_err(|e| Error::param("beta", e.to_string()))?;
            (0..n)
                .map(|_| b + g.sample(&mut rng) - g.sample(&mut rng))
                .collect()
        }
        ModelKind::TemperedCauchy { b, scale, decay } => {
            sample_tempered_cauchy(&mut rng, n, b, scale, decay)?
        }
    };
    Ok(SampleSet::new(draws)?.with_seed(SeedRecord {
        seed: spec.seed,
        stream,
    }))
}

fn sample_tempered_cauchy(
    rng: &mut ChaCha8Rng,
    n: usize,
    b: f64,
    scale: f64,
    decay: f64,
) -> Result<Vec<f64>> {
    let eps = TEMPERED_CAUCHY_CUTOFF;
    // Jumps with |x| >= eps: thin a Poisson process of intensity scale/x²
    // with acceptance e^{-decay |x|}.
    let proposals = Poisson::new(2.0 * scale / eps).map_err(|e| Error::param("scale", e.to_string()))?;
    let small_sd = (2.0 * scale * (1.0 - (-decay * eps).exp()) / decay).sqrt();
    Ok((0..n)
        .map(|_| {
            let w: f64 = rng.sample(StandardNormal);
            let k = proposals.sample(rng) as u64;
            let mut jumps = 0.0;
            for _ in 0..k {
                let u: f64 = 1.0 - rng.random::<f64>();
                let size = eps / u;
                let keep: f64 = rng.random();
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                if keep < (-decay * size).exp() {
                    jumps += sign * size;
                }
            }
            b + small_sd * w + jumps
        })
        .collect())
}

/// Ground-truth characteristics discretised on a bin layout.
#[derive(Debug, Clone)]
pub struct TruthModel {
    pub model: CharExponentModel,
    /// `∫ x² ν(dx)` outside the support, which the grid cannot represent.
    pub truncated_mass: f64,
}

/// Discretises `ν_σ` of `spec` onto `shape`.
///
/// Bin values are bin averages of `x² ν(dx)/dx` corrected by one twelfth of
/// their second difference, which removes the leading `O(w²)` error in the
/// characteristic exponent. Negative corrected values in the bins touching
/// zero are moved into the atom when it can absorb them; any other negative
/// value is clipped.
pub fn truth_model(spec: &ModelSpec, shape: MeasureShape) -> Result<TruthModel> {
    spec.kind.validate()?;
    let kind = spec.kind;
    let total = kind.variance();
    let truncated = kind.jump_mass_below(shape.lo) + (kind.jump_mass() - kind.jump_mass_below(shape.hi));
    if truncated > 1e-4 * total {
        log::warn!(
            "{}: support [{}, {}] truncates jump mass {truncated:.3e} of total {total:.3e}",
            kind.name(),
            shape.lo,
            shape.hi
        );
    }
    let mut atom = kind.gaussian_variance();
    let m = shape.bins;
    let bins = if m == 0 || kind.jump_mass() == 0.0 {
        vec![0.0; m]
    } else {
        let w = shape.bin_width();
        // averages on bins -1..=m
        let avg: Vec<f64> = (-1..=m as i64)
            .map(|j| {
                let a = shape.lo + w * j as f64;
                (kind.jump_mass_below(a + w) - kind.jump_mass_below(a)).max(0.0) / w
            })
            .collect();
        let mut v: Vec<f64> = (1..=m)
            .map(|j| avg[j] - (avg[j + 1] - 2.0 * avg[j] + avg[j - 1]) / 12.0)
            .collect();
        for j in shape.bins_touching_zero() {
            if v[j] < 0.0 && atom + v[j] * w >= 0.0 {
                atom += v[j] * w;
                v[j] = 0.0;
            }
        }
        v.iter_mut().for_each(|x| *x = x.max(0.0));
        v
    };
    let measure = GridMeasure::with_shape(atom.max(0.0), shape, bins)?;
    Ok(TruthModel {
        model: CharExponentModel::new(kind.mean(), measure),
        truncated_mass: truncated,
    })
}
