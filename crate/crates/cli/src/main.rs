use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lkfit::charfn::{FrequencyGrid, GridParams};
use lkfit::experiment::{
    ensure_dir, read_increments_csv, run_example, run_rate_study, run_t41_check, write_csv,
    write_increments_csv, write_json, EstimatorSettings, ExperimentPlan, RateSettings,
};
use lkfit::fit::{functional_report, minimize, FitConfig};
use lkfit::pilot::{pilot_fnu_on_grid, project_pilot, PilotConfig, PilotEstimate};
use lkfit::sim::{sample_increments_stream, ModelKind, ModelSpec};
use lkfit::{Error, GridMeasure, MeasureShape};

#[derive(Parser)]
#[command(name = "lkfit", version, about = "Estimate Lévy-Khinchine characteristics from increments")]
struct Cli {
    /// Directory for all outputs.
    #[arg(long, global = true, env = "LKFIT_OUTPUT_DIR", default_value = "lkfit-out")]
    output_dir: PathBuf,

    /// Worker threads for Monte Carlo runs (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw increments from a model.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Random stream (replication index).
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Pilot estimate from an increments CSV.
    Pilot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        shape: ShapeArgs,
    },
    /// Minimum-distance fit from an increments CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Start from this pilot JSON instead of computing the pilot.
        #[arg(long)]
        pilot: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        /// `c` in the slack `c / sqrt(n)`.
        #[arg(long, default_value_t = 1.0)]
        delta_n_const: f64,
        /// Stop after the descent, without selecting within the slack.
        #[arg(long)]
        no_selection: bool,
        /// Thresholds `a` for the reported jump tails `ν̂([a, ∞))`.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        thresholds: Vec<f64>,
    },
    /// Worked example: Gaussian plus exponential jumps, pilot and fit per replication.
    Example {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        replications: usize,
    },
    /// Monte Carlo means of the normalized CF process norms.
    T41Check {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        n_values: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        replications: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Median loss against the truth as a function of n.
    Rates {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "500,2000,8000")]
        n_values: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        replications: usize,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        s_values: Vec<f64>,
        #[arg(long, default_value_t = 200.0)]
        loss_u_max: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelName {
    PureGaussian,
    BrownianGamma,
    CompoundPoisson,
    BilateralGamma,
    TemperedCauchy,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "brownian-gamma")]
    model: ModelName,
    /// Model parameters as JSON, e.g. `{"kind":"pure_gaussian","b":0,"sigma":2}`;
    /// overrides `--model`.
    #[arg(long)]
    model_json: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl ModelArgs {
    fn spec(&self) -> lkfit::Result<ModelSpec> {
        let kind = match &self.model_json {
            Some(json) => serde_json::from_str(json)?,
            None => match self.model {
                ModelName::PureGaussian => ModelKind::pure_gaussian(),
                ModelName::BrownianGamma => ModelKind::brownian_gamma(),
                ModelName::CompoundPoisson => ModelKind::compound_poisson(),
                ModelName::BilateralGamma => ModelKind::bilateral_gamma(),
                ModelName::TemperedCauchy => ModelKind::tempered_cauchy(),
            },
        };
        ModelSpec::new(kind, self.seed)
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 20.0)]
    u_max: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    /// Exponent offset `δ` of the weight `log(e + |u|)^{-1/2-δ}`.
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
}

impl GridArgs {
    fn build(&self) -> lkfit::Result<FrequencyGrid> {
        GridParams {
            u_max: self.u_max,
            step: self.step,
            delta: self.delta,
        }
        .build()
    }
}

#[derive(Args)]
struct ShapeArgs {
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = 10.0)]
    hi: f64,
    #[arg(long, default_value_t = 16)]
    bins: usize,
}

impl ShapeArgs {
    fn build(&self) -> lkfit::Result<MeasureShape> {
        MeasureShape::new(self.lo, self.hi, self.bins)
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

#[derive(Serialize)]
struct FnuRow {
    u: f64,
    re: f64,
    im: f64,
    active: bool,
}

#[derive(Serialize)]
struct FitCfRow {
    u: f64,
    empirical_re: f64,
    empirical_im: f64,
    fit_re: f64,
    fit_im: f64,
}

#[derive(Serialize)]
struct DensityRow {
    x: f64,
    density: f64,
}

#[derive(Serialize)]
struct FitOutput<'a> {
    #[serde(flatten)]
    result: &'a lkfit::FitResult,
    thresholds: &'a [f64],
    jump_tails: Vec<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = ErrorReport {
                error: e.kind(),
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> lkfit::Result<()> {
    let out = cli.output_dir.as_path();
    ensure_dir(out)?;
    match &cli.command {
        Command::Simulate { model, n, stream } => {
            let spec = model.spec()?;
            let samples = sample_increments_stream(&spec, *n, *stream)?;
            write_increments_csv(&out.join("increments.csv"), &samples)?;
            write_json(&out.join("model.json"), &spec)?;
            println!("{}", out.join("increments.csv").display());
        }
        Command::Pilot {
            input,
            kappa,
            grid,
            shape,
        } => {
            let samples = read_increments_csv(input)?;
            let cfg = PilotConfig::new(*kappa, grid.build()?, shape.build()?)?;
            let pilot = project_pilot(&samples, &cfg)?;
            let (fnu, mask) = pilot_fnu_on_grid(&samples, &cfg);
            let rows: Vec<FnuRow> = cfg
                .grid()
                .nodes()
                .iter()
                .zip(fnu.iter().zip(&mask))
                .map(|(&u, (f, &active))| FnuRow {
                    u,
                    re: f.re,
                    im: f.im,
                    active,
                })
                .collect();
            write_json(&out.join("pilot.json"), &pilot)?;
            write_csv(&out.join("pilot_fnu.csv"), &rows)?;
            println!("{}", out.join("pilot.json").display());
        }
        Command::Fit {
            input,
            pilot,
            kappa,
            grid,
            shape,
            max_iters,
            delta_n_const,
            no_selection,
            thresholds,
        } => {
            let samples = read_increments_csv(input)?;
            let grid = grid.build()?;
            let (b0, nu0) = match pilot {
                Some(path) => {
                    let p: PilotEstimate = read_json(path)?;
                    (p.b_tilde, p.nu_tilde)
                }
                None => {
                    let cfg = PilotConfig::new(*kappa, grid.clone(), shape.build()?)?;
                    let p = project_pilot(&samples, &cfg)?;
                    (p.b_tilde, p.nu_tilde)
                }
            };
            let mut cfg = FitConfig::new(grid, *delta_n_const, *max_iters, 1e-6, 1e-10)?;
            cfg.select_within_slack = !no_selection;
            let result = minimize(&samples, (b0, &nu0), &cfg)?;
            write_fit_outputs(out, &samples, &result, &cfg, thresholds)?;
            println!("{}", out.join("fit.json").display());
        }
        Command::Example {
            seed,
            n,
            replications,
        } => {
            let mut plan = ExperimentPlan::example(*seed);
            plan.n_values = vec![*n];
            plan.replications = *replications;
            plan.parallelism = cli.threads;
            plan.output_dir = Some(out.to_path_buf());
            let report = run_example(&plan, &EstimatorSettings::default())?;
            report.write(out)?;
            println!("{}", serde_json::to_string_pretty(&report.summary)?);
        }
        Command::T41Check {
            model,
            n_values,
            replications,
            grid,
        } => {
            let table = run_t41_check(&model.spec()?, n_values, *replications, &grid.build()?)?;
            table.write(out)?;
            println!("ratios {:?}, flagged orders {:?}", table.ratios, table.flagged);
        }
        Command::Rates {
            model,
            n_values,
            replications,
            s_values,
            loss_u_max,
        } => {
            let mut plan = ExperimentPlan::new(model.spec()?, n_values.clone(), *replications)?;
            plan.s_values = s_values.clone();
            plan.parallelism = cli.threads;
            plan.output_dir = Some(out.to_path_buf());
            plan.validate()?;
            let rate = RateSettings {
                loss_u_max: *loss_u_max,
                ..RateSettings::default()
            };
            let table = run_rate_study(&plan, &rate)?;
            table.write(out)?;
            println!("{}", serde_json::to_string_pretty(&table.slopes)?);
        }
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> lkfit::Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn write_fit_outputs(
    out: &Path,
    samples: &lkfit::SampleSet,
    result: &lkfit::FitResult,
    cfg: &FitConfig,
    thresholds: &[f64],
) -> lkfit::Result<()> {
    let grid = &cfg.freq_grid;
    let empirical = samples.empirical_cf_on_grid(grid);
    let model = result.model();
    let cf_rows: Vec<FitCfRow> = grid
        .nodes()
        .iter()
        .zip(&empirical)
        .map(|(&u, e)| {
            let f = model.cf(u)[0];
            FitCfRow {
                u,
                empirical_re: e[0].re,
                empirical_im: e[0].im,
                fit_re: f.re,
                fit_im: f.im,
            }
        })
        .collect();
    write_csv(&out.join("fit_cf.csv"), &cf_rows)?;
    write_csv(&out.join("fit_density.csv"), &density_rows(&result.nu_hat))?;
    let output = FitOutput {
        result,
        thresholds,
        jump_tails: functional_report(result, thresholds)?,
    };
    write_json(&out.join("fit.json"), &output)
}

fn density_rows(m: &GridMeasure) -> Vec<DensityRow> {
    let (lo, hi) = m.support();
    (0..=400)
        .map(|j| {
            let x = lo + (hi - lo) * j as f64 / 400.0;
            DensityRow {
                x,
                density: m.density_at(x),
            }
        })
        .collect()
}
