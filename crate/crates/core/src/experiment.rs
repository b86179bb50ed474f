//! Monte Carlo harnesses: the worked example (Gaussian plus one-sided
//! exponential jumps), the boundedness check of the normalized CF process,
//! and the loss-versus-`n` rate study. Replications run in parallel on
//! independent ChaCha streams, so every report is a function of the plan.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::{cf_process_norms, CfTriple, FrequencyGrid, SampleSet};
use crate::error::{Error, Result};
use crate::fit::{hf_baseline, jump_tail, minimize, FitConfig, FitResult};
use crate::measure::{loss_ls_against, GridMeasure, LossConfig, MeasureShape};
use crate::pilot::{project_pilot, PilotConfig};
use crate::sim::{sample_increments_stream, truth_model, DecayCase, ModelKind, ModelSpec, TruthModel};

/// Support and resolution used to discretize true measures.
pub fn truth_shape() -> MeasureShape {
    MeasureShape {
        lo: -25.0,
        hi: 25.0,
        bins: 2048,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub model: ModelSpec,
    pub n_values: Vec<usize>,
    pub replications: usize,
    pub s_values: Vec<f64>,
    pub output_dir: Option<PathBuf>,
    /// Worker threads; 0 lets rayon decide.
    pub parallelism: usize,
}

impl ExperimentPlan {
    pub fn new(model: ModelSpec, n_values: Vec<usize>, replications: usize) -> Result<Self> {
        let plan = Self {
            model,
            n_values,
            replications,
            s_values: vec![1.0],
            output_dir: None,
            parallelism: 0,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// The worked example: default model, `n = 1000`, 20 replications.
    pub fn example(seed: u64) -> Self {
        Self {
            model: ModelSpec {
                kind: ModelKind::brownian_gamma(),
                seed,
            },
            n_values: vec![1000],
            replications: 20,
            s_values: vec![1.0, 2.0],
            output_dir: None,
            parallelism: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.kind.validate()?;
        if self.replications == 0 {
            return Err(Error::param("replications", "must be at least 1"));
        }
        if self.n_values.is_empty() || self.n_values[0] == 0 {
            return Err(Error::param("n_values", "must be nonempty and positive"));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("n_values", "must be strictly increasing"));
        }
        if self.s_values.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::param("s_values", "must be finite and >= 0"));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.parallelism)
            .build()
            .map_err(|e| Error::param("parallelism", e.to_string()))
    }
}

/// Estimator settings shared by the harnesses.
#[derive(Debug, Clone)]
pub struct EstimatorSettings {
    pub pilot: PilotConfig,
    pub fit: FitConfig,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            pilot: PilotConfig::default(),
            fit: FitConfig::default(),
        }
    }
}

impl EstimatorSettings {
    /// Pilot and fit on `shape`, other settings at their defaults.
    pub fn with_shape(shape: MeasureShape) -> Self {
        let fit = FitConfig::default();
        Self {
            pilot: PilotConfig::new(1.0, fit.freq_grid.clone(), shape).expect("kappa is positive"),
            fit,
        }
    }

    /// Pilot followed by the constrained fit.
    pub fn estimate(&self, samples: &SampleSet) -> Result<(f64, GridMeasure, FitResult)> {
        let pilot = project_pilot(samples, &self.pilot)?;
        let fit = minimize(samples, (pilot.b_tilde, &pilot.nu_tilde), &self.fit)?;
        Ok((pilot.b_tilde, pilot.nu_tilde, fit))
    }
}

// ---------------------------------------------------------------------------
// worked example

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleRow {
    pub replication: usize,
    pub seed: u64,
    pub stream: u64,
    pub b_tilde: f64,
    pub b_hat: f64,
    /// `ν̂_σ({0})^{1/2}`.
    pub sigma_hat: f64,
    /// `ν̂([1, ∞))`.
    pub jump_tail_hat: f64,
    pub jump_tail_pilot: f64,
    pub hf_baseline: f64,
    pub objective: f64,
    pub pilot_objective: f64,
    /// `d⁽²⁾` of the true CF against the same sample.
    pub truth_objective: f64,
    pub total_mass: f64,
    pub sample_variance: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExampleSummary {
    pub median_abs_b_error: f64,
    pub median_abs_sigma_error: f64,
    pub median_jump_tail: f64,
    pub mean_hf_baseline: f64,
    /// Share of replications where the fit is at least as close to the
    /// empirical CF as the truth.
    pub share_closer_than_truth: f64,
    pub true_b: f64,
    pub true_sigma: f64,
    pub true_jump_tail: f64,
}

/// One point of the CF comparison curves of the first replication.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurveRow {
    pub u: f64,
    pub empirical_re: f64,
    pub empirical_im: f64,
    pub true_re: f64,
    pub true_im: f64,
    pub pilot_re: f64,
    pub pilot_im: f64,
    pub fit_re: f64,
    pub fit_im: f64,
}

/// Step densities of `ν_σ` (without the atom) on a common `x` grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DensityRow {
    pub x: f64,
    pub truth: f64,
    pub pilot: f64,
    pub fit: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HistogramRow {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleReport {
    pub plan: ExperimentPlan,
    pub rows: Vec<ExampleRow>,
    pub summary: ExampleSummary,
    pub curves: Vec<CurveRow>,
    pub densities: Vec<DensityRow>,
    pub histogram: Vec<HistogramRow>,
}

/// Runs pilot and fit on `plan.replications` samples of size
/// `plan.n_values[0]` and compares with the truth.
pub fn run_example(plan: &ExperimentPlan, settings: &EstimatorSettings) -> Result<ExampleReport> {
    plan.validate()?;
    let n = plan.n_values[0];
    let truth = truth_model(&plan.model, truth_shape())?;
    let grid = &settings.fit.freq_grid;
    let truth_cf = truth.model.cf_on_grid(grid);
    let true_tail = jump_tail(&truth.model.nu_sigma, 1.0)?;

    let pool = plan.pool()?;
    let results: Vec<Result<(ExampleRow, Option<Figures>)>> = pool.install(|| {
        (0..plan.replications)
            .into_par_iter()
            .map(|r| example_replication(plan, settings, &truth, &truth_cf, n, r))
            .collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    let mut figures = None;
    for res in results {
        let (row, fig) = res?;
        rows.push(row);
        if fig.is_some() {
            figures = fig;
        }
    }
    let figures = figures.expect("replication 0 always produces figures");

    let true_b = truth.model.b;
    let true_sigma = truth.model.nu_sigma.atom_mass().sqrt();
    let closer = rows.iter().filter(|r| r.objective <= r.truth_objective).count();
    let summary = ExampleSummary {
        median_abs_b_error: median(rows.iter().map(|r| (r.b_hat - true_b).abs()).collect()),
        median_abs_sigma_error: median(rows.iter().map(|r| (r.sigma_hat - true_sigma).abs()).collect()),
        median_jump_tail: median(rows.iter().map(|r| r.jump_tail_hat).collect()),
        mean_hf_baseline: rows.iter().map(|r| r.hf_baseline).sum::<f64>() / rows.len() as f64,
        share_closer_than_truth: closer as f64 / rows.len() as f64,
        true_b,
        true_sigma,
        true_jump_tail: true_tail,
    };
    Ok(ExampleReport {
        plan: plan.clone(),
        rows,
        summary,
        curves: figures.curves,
        densities: figures.densities,
        histogram: figures.histogram,
    })
}

struct Figures {
    curves: Vec<CurveRow>,
    densities: Vec<DensityRow>,
    histogram: Vec<HistogramRow>,
}

fn example_replication(
    plan: &ExperimentPlan,
    settings: &EstimatorSettings,
    truth: &TruthModel,
    truth_cf: &[CfTriple],
    n: usize,
    r: usize,
) -> Result<(ExampleRow, Option<Figures>)> {
    let grid = &settings.fit.freq_grid;
    let samples = sample_increments_stream(&plan.model, n, r as u64)?;
    let (b_tilde, pilot, fit) = settings.estimate(&samples)?;
    let empirical = samples.empirical_cf_on_grid(grid);
    let truth_objective = crate::charfn::d2_tables(truth_cf, &empirical, grid)?;
    let row = ExampleRow {
        replication: r,
        seed: plan.model.seed,
        stream: r as u64,
        b_tilde,
        b_hat: fit.b_hat,
        sigma_hat: fit.nu_hat.atom_mass().sqrt(),
        jump_tail_hat: jump_tail(&fit.nu_hat, 1.0)?,
        jump_tail_pilot: jump_tail(&pilot, 1.0)?,
        hf_baseline: hf_baseline(&samples, 1.0),
        objective: fit.objective,
        pilot_objective: fit.pilot_objective,
        truth_objective,
        total_mass: fit.nu_hat.total_mass(),
        sample_variance: samples.variance(),
        iterations: fit.iterations,
        converged: fit.converged,
    };
    if r != 0 {
        return Ok((row, None));
    }
    let pilot_model = crate::charfn::CharExponentModel::new(b_tilde, pilot.clone());
    let fit_model = fit.model();
    let curves = grid
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, &u)| u >= 0.0)
        .map(|(i, &u)| {
            let p = pilot_model.cf(u)[0];
            let f = fit_model.cf(u)[0];
            CurveRow {
                u,
                empirical_re: empirical[i][0].re,
                empirical_im: empirical[i][0].im,
                true_re: truth_cf[i][0].re,
                true_im: truth_cf[i][0].im,
                pilot_re: p.re,
                pilot_im: p.im,
                fit_re: f.re,
                fit_im: f.im,
            }
        })
        .collect();
    let (lo, hi) = fit.nu_hat.support();
    let densities = (0..=400)
        .map(|j| {
            let x = lo + (hi - lo) * j as f64 / 400.0;
            DensityRow {
                x,
                truth: truth.model.nu_sigma.density_at(x),
                pilot: pilot.density_at(x),
                fit: fit.nu_hat.density_at(x),
            }
        })
        .collect();
    let figures = Figures {
        curves,
        densities,
        histogram: histogram(samples.increments(), 40),
    };
    Ok((row, Some(figures)))
}

fn histogram(xs: &[f64], bins: usize) -> Vec<HistogramRow> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
    let mut counts = vec![0usize; bins];
    for &x in xs {
        let j = (((x - lo) / width) as usize).min(bins - 1);
        counts[j] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(j, count)| HistogramRow {
            lo: lo + width * j as f64,
            hi: lo + width * (j + 1) as f64,
            count,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// boundedness of the normalized CF process

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct T41Row {
    pub n: usize,
    pub k: usize,
    pub mean_norm: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct T41Table {
    pub model: ModelSpec,
    pub replications: usize,
    pub rows: Vec<T41Row>,
    /// `mean(n_max) / mean(n_min)` per derivative order `k` (NaN when the
    /// smaller mean is zero).
    pub ratios: [f64; 3],
    /// Orders whose ratio exceeds the limit.
    pub flagged: Vec<usize>,
}

/// Ratio above which [`run_t41_check`] flags an order.
pub const T41_RATIO_LIMIT: f64 = 1.5;

/// Monte Carlo means of `‖C_n^{(k)}‖_{L∞(w)}` on `grid` for all `k ≤ 2`.
pub fn run_t41_check(
    model: &ModelSpec,
    n_values: &[usize],
    replications: usize,
    grid: &FrequencyGrid,
) -> Result<T41Table> {
    let plan = ExperimentPlan::new(*model, n_values.to_vec(), replications)?;
    let truth = truth_model(model, truth_shape())?;
    let truth_cf = truth.model.cf_on_grid(grid);
    let pool = plan.pool()?;
    let mut rows = Vec::new();
    let mut means = Vec::new();
    for &n in n_values {
        let norms: Vec<Result<[f64; 3]>> = pool.install(|| {
            (0..replications)
                .into_par_iter()
                .map(|r| {
                    let s = sample_increments_stream(model, n, r as u64)?;
                    Ok(cf_process_norms(&s, &truth_cf, grid))
                })
                .collect()
        });
        let norms = norms.into_iter().collect::<Result<Vec<_>>>()?;
        let mut mean_k = [0.0; 3];
        for k in 0..3 {
            let xs: Vec<f64> = norms.iter().map(|v| v[k]).collect();
            let (mean, se) = mean_and_se(&xs);
            mean_k[k] = mean;
            rows.push(T41Row {
                n,
                k,
                mean_norm: mean,
                std_error: se,
            });
        }
        means.push(mean_k);
    }
    let first = means[0];
    let last = means[means.len() - 1];
    let ratios = [0, 1, 2].map(|k| {
        if first[k] > 0.0 {
            last[k] / first[k]
        } else if last[k] == 0.0 {
            1.0
        } else {
            f64::NAN
        }
    });
    let flagged = (0..3).filter(|&k| !(ratios[k] <= T41_RATIO_LIMIT)).collect();
    Ok(T41Table {
        model: *model,
        replications,
        rows,
        ratios,
        flagged,
    })
}

// ---------------------------------------------------------------------------
// rate study

/// Settings of the rate study.
#[derive(Debug, Clone)]
pub struct RateSettings {
    /// Fit shape; `None` picks one from the model's jump distribution.
    pub fit_shape: Option<MeasureShape>,
    /// Frequency cut-off of the loss grid.
    pub loss_u_max: f64,
    pub loss_step: f64,
}

impl Default for RateSettings {
    fn default() -> Self {
        Self {
            fit_shape: None,
            loss_u_max: 200.0,
            loss_step: 0.05,
        }
    }
}

/// 20 bins covering the central 99.8% of the jump part of `ν_σ`, widened
/// by 10% and always containing `[-0.5, 0.5]`.
pub fn fit_shape_for(kind: &ModelKind) -> MeasureShape {
    let total = kind.jump_mass();
    if total == 0.0 {
        return MeasureShape::default();
    }
    let quantile = |p: f64| {
        let target = p * total;
        let (mut a, mut b) = (-100.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if kind.jump_mass_below(mid) < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let (q_lo, q_hi) = (quantile(1e-3), quantile(1.0 - 1e-3));
    let pad = 0.1 * (q_hi - q_lo);
    MeasureShape {
        lo: (q_lo - pad).min(-0.5),
        hi: (q_hi + pad).max(0.5),
        bins: 20,
    }
}

/// `β` in `|φ(u)| ≈ |u|^{-β}`, measured as the log-log slope of `|φ|`
/// between `u = 10` and `u = 20` on the true model.
pub fn measured_decay_exponent(truth: &TruthModel) -> f64 {
    let a = truth.model.cf(10.0)[0].norm();
    let b = truth.model.cf(20.0)[0].norm();
    -((b / a).ln() / 2f64.ln())
}

/// `-s/(2β) ∨ -1/2`.
pub fn target_slope(s: f64, beta: f64) -> f64 {
    if beta <= 0.0 {
        -0.5
    } else {
        // `+ 0.0` turns `-0.0` into `0.0` for `s = 0`
        (-s / (2.0 * beta)).max(-0.5) + 0.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub s: f64,
    pub median_loss: f64,
    pub losses: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateSlope {
    pub s: f64,
    /// Least-squares log-log slope of the median loss; absent for a single `n`.
    pub slope: Option<f64>,
    /// `-s/(2β) ∨ -1/2`, reported for polynomially decaying CFs only.
    pub target: Option<f64>,
    pub strictly_decreasing: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateTable {
    pub plan: ExperimentPlan,
    pub fit_shape: MeasureShape,
    pub decay_case: DecayCase,
    pub decay_exponent: f64,
    pub rows: Vec<RateRow>,
    pub slopes: Vec<RateSlope>,
}

/// Median `ℓ_s(ν̂, ν_σ)` over replications for each `(n, s)` of the plan.
pub fn run_rate_study(plan: &ExperimentPlan, rate: &RateSettings) -> Result<RateTable> {
    plan.validate()?;
    let truth = truth_model(&plan.model, truth_shape())?;
    let shape = rate.fit_shape.unwrap_or_else(|| fit_shape_for(&plan.model.kind));
    let settings = EstimatorSettings::with_shape(shape);
    let loss_grid = FrequencyGrid::uniform(rate.loss_u_max, rate.loss_step, settings.fit.freq_grid.delta())?;
    let truth_ft: Vec<Complex64> = loss_grid
        .nodes()
        .par_iter()
        .map(|&u| truth.model.nu_sigma.fourier_transform(u))
        .collect();
    let loss_cfgs = plan
        .s_values
        .iter()
        .map(|&s| LossConfig::new(s, loss_grid.clone()))
        .collect::<Result<Vec<_>>>()?;

    let pool = plan.pool()?;
    let mut rows = Vec::new();
    for &n in &plan.n_values {
        let per_rep: Vec<Result<Vec<f64>>> = pool.install(|| {
            (0..plan.replications)
                .into_par_iter()
                .map(|r| {
                    let samples = sample_increments_stream(&plan.model, n, r as u64)?;
                    let (_, _, fit) = settings.estimate(&samples)?;
                    Ok(loss_cfgs
                        .iter()
                        .map(|cfg| loss_ls_against(&fit.nu_hat, &truth.model.nu_sigma, &truth_ft, cfg))
                        .collect())
                })
                .collect()
        });
        let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;
        for (j, &s) in plan.s_values.iter().enumerate() {
            let losses: Vec<f64> = per_rep.iter().map(|l| l[j]).collect();
            rows.push(RateRow {
                n,
                s,
                median_loss: median(losses.clone()),
                losses,
            });
        }
    }
    let beta = measured_decay_exponent(&truth);
    let case = plan.model.kind.decay_case();
    let slopes = plan
        .s_values
        .iter()
        .map(|&s| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.s == s)
                .map(|r| ((r.n as f64).ln(), r.median_loss.ln()))
                .collect();
            RateSlope {
                s,
                slope: (pts.len() >= 2).then(|| least_squares_slope(&pts)),
                target: (case == DecayCase::Polynomial).then(|| target_slope(s, beta)),
                strictly_decreasing: pts.windows(2).all(|w| w[1].1 < w[0].1),
            }
        })
        .collect();
    Ok(RateTable {
        plan: plan.clone(),
        fit_shape: shape,
        decay_case: case,
        decay_exponent: beta,
        rows,
        slopes,
    })
}

// ---------------------------------------------------------------------------
// small statistics and writers

/// Median; the mean of the two middle values for even lengths.
pub fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty(), "median of an empty list");
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Writes `rows` as CSV with a header from the field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes pretty-printed JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::to_writer_pretty(BufWriter::new(file), value)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct IncrementRow {
    increment: f64,
}

/// Writes increments as a one-column CSV with header `increment`.
pub fn write_increments_csv(path: &Path, samples: &SampleSet) -> Result<()> {
    let rows: Vec<IncrementRow> = samples
        .increments()
        .iter()
        .map(|&increment| IncrementRow { increment })
        .collect();
    write_csv(path, &rows)
}

/// Reads increments from the first column of a CSV file with a header row.
pub fn read_increments_csv(path: &Path) -> Result<SampleSet> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut xs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let field = record.get(0).unwrap_or("").trim();
        let x: f64 = field.parse().map_err(|_| {
            Error::param(
                "increments",
                format!("{}: line {}: `{field}` is not a number", path.display(), xs.len() + 2),
            )
        })?;
        xs.push(x);
    }
    SampleSet::new(xs)
}

/// Creates `dir` if needed.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

impl ExampleReport {
    /// `example_rows.csv`, `example_cf.csv`, `example_density.csv`,
    /// `example_histogram.csv` and `example_report.json` in `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        ensure_dir(dir)?;
        write_csv(&dir.join("example_rows.csv"), &self.rows)?;
        write_csv(&dir.join("example_cf.csv"), &self.curves)?;
        write_csv(&dir.join("example_density.csv"), &self.densities)?;
        write_csv(&dir.join("example_histogram.csv"), &self.histogram)?;
        write_json(&dir.join("example_report.json"), self)
    }
}

impl T41Table {
    /// `t41_<model>.csv` and `t41_<model>.json` in `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        ensure_dir(dir)?;
        let name = self.model.kind.name();
        write_csv(&dir.join(format!("t41_{name}.csv")), &self.rows)?;
        write_json(&dir.join(format!("t41_{name}.json")), self)
    }
}

#[derive(Serialize)]
struct FlatRateRow {
    n: usize,
    s: f64,
    median_loss: f64,
}

impl RateTable {
    /// `rates_<model>.csv` (medians) and `rates_<model>.json` in `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        ensure_dir(dir)?;
        let name = self.plan.model.kind.name();
        let flat: Vec<FlatRateRow> = self
            .rows
            .iter()
            .map(|r| FlatRateRow {
                n: r.n,
                s: r.s,
                median_loss: r.median_loss,
            })
            .collect();
        write_csv(&dir.join(format!("rates_{name}.csv")), &flat)?;
        write_json(&dir.join(format!("rates_{name}.json")), self)
    }
}
