use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use adcp::bounds::{
    adaptive_lower_bound, check_common, corollary_total, css_columns_per_round, css_rounds, css_sample_complexity,
    detection_constants, detection_min_samples, matrix_budget, passive_lower_bound, recursive_total,
    tensor_budget_schedule, tensor_total, BoundParams,
};
use adcp::css::{css_complete, squared_error, CssConfig};
use adcp::experiments::{run_sweep, table1_preset, write_outputs, SweepConfig, SweepOutput, SUCCESS_THRESHOLD};
use adcp::instance::{gen_matrix, gen_tensor, Family, SamplingKind, SyntheticSpec};
use adcp::noiseless::{complete_matrix, complete_tensor, NoiselessConfig};
use adcp::{seed, Error, Result};

#[derive(Parser)]
#[command(name = "adcp", version, about = "Adaptive-sampling low-rank matrix and tensor completion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complete a synthetic matrix with the noiseless streaming algorithm.
    Complete(CompleteArgs),
    /// Complete a synthetic order-T tensor recursively.
    Tensor(TensorArgs),
    /// Run noisy column subset selection on a unit-norm synthetic matrix.
    Css(CssArgs),
    /// Evaluate a closed-form bound.
    Bounds(BoundsArgs),
    /// Run an experiment described by a JSON config.
    Sweep(SweepArgs),
    /// Run a named benchmark preset.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CompleteArgs {
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long)]
    rank: usize,
    /// Samples per column.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `gaussian`, `blockdiag:<mu0>` or `coherent:<theta>`.
    #[arg(long, default_value = "gaussian")]
    family: Family,
    /// Per-entry noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = Sampling::WithReplacement)]
    sampling: Sampling,
}

#[derive(Args)]
struct TensorArgs {
    /// Comma-separated mode sizes, first index fastest.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long)]
    rank: usize,
    /// Comma-separated per-level budgets (one per mode; the first is
    /// unused). Defaults to the theoretical schedule capped at slice sizes.
    #[arg(long, value_delimiter = ',')]
    budgets: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "gaussian")]
    family: Family,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
}

#[derive(Args)]
struct CssArgs {
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long)]
    rank: usize,
    #[arg(long)]
    rounds: usize,
    /// Columns drawn per round.
    #[arg(long)]
    per_round: usize,
    /// Samples per column for estimation and reconstruction.
    #[arg(long)]
    m: usize,
    /// Noise level; each entry gets standard deviation `sigma/√(n1 n2)`.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Row-space coherence mix in `[0, 1]`.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Rank of the reconstruction subspace; defaults to `--rank`.
    #[arg(long)]
    truncate: Option<usize>,
    /// Reconstruct from the full span of the selected columns instead.
    #[arg(long, conflicts_with = "truncate")]
    full_span: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampling {
    WithReplacement,
    Bernoulli,
}

impl From<Sampling> for SamplingKind {
    fn from(s: Sampling) -> Self {
        match s {
            Sampling::WithReplacement => SamplingKind::WithReplacement,
            Sampling::Bernoulli => SamplingKind::Bernoulli,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Formula {
    /// Samples per column for a matrix.
    MatrixBudget,
    /// Per-level budgets m_1..m_T.
    TensorSchedule,
    /// Expected total samples for a tensor.
    TensorTotal,
    /// Matrix expected total with the r n1 term.
    CorollaryTotal,
    /// Worst case of the recursive algorithm at given budgets.
    RecursiveTotal,
    /// Necessary samples for passive uniform sampling.
    PassiveLower,
    /// Parameter-counting bound r Σ n_t.
    AdaptiveLower,
    /// Subspace-detection constants.
    Detection,
    /// Smallest m for the detection theorem.
    DetectionMinSamples,
    /// Noisy column subset selection parameters.
    Css,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(value_enum)]
    formula: Formula,
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value_t = 1.0)]
    mu0: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    budgets: Vec<usize>,
    /// Tensor order, when `dims` is not given.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    mu_u: f64,
    #[arg(long, default_value_t = 1.0)]
    mu_v: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Omit the timestamp line and zero the wall times.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Table1,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    preset: Preset,
    /// Include the n = 5000 and n = 10000 rows.
    #[arg(long)]
    large: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    deterministic: bool,
}

fn kv(key: &str, value: impl std::fmt::Display) {
    println!("{key}={value}");
}

fn list<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn complete(a: CompleteArgs) -> Result<()> {
    let spec = SyntheticSpec::matrix(a.n1, a.n2, a.rank, a.family, a.seed).with_noise(a.sigma);
    let (inst, mut oracle) = gen_matrix(&spec)?;
    let cfg = NoiselessConfig { sampling: a.sampling.into(), ..NoiselessConfig::matrix(a.m) };
    let mut rep = complete_matrix(&mut oracle, a.n1, a.n2, &cfg, &mut seed::rng(a.seed, &[1]))?;
    let err = rep.evaluate(inst.ground_truth(), SUCCESS_THRESHOLD)?;
    kv("n1", a.n1);
    kv("n2", a.n2);
    kv("rank", a.rank);
    kv("m", a.m);
    kv("seed", a.seed);
    kv("family", &spec.family);
    kv("sigma", a.sigma);
    kv("mu_u", inst.mode_coherence()[0]);
    kv("mu_v", inst.mode_coherence()[1]);
    kv("entries_observed", rep.entries_observed);
    kv("entries_gross", rep.entries_gross);
    kv("oracle_count", oracle.observed_count());
    kv("fully_observed_columns", rep.fully_observed_units);
    kv("basis_dim", rep.basis_dim_final);
    kv("resamples", rep.resamples);
    kv("rel_error", err);
    kv("success", err <= SUCCESS_THRESHOLD);
    kv("wall_time", rep.wall_time);
    Ok(())
}

fn tensor(a: TensorArgs) -> Result<()> {
    let spec = SyntheticSpec::tensor(&a.dims, a.rank, a.family, a.seed);
    let (inst, mut oracle) = gen_tensor(&spec)?;
    let budgets = if a.budgets.is_empty() {
        check_common(a.rank, inst.mu0_leading_modes(), a.delta)?;
        let schedule = tensor_budget_schedule(a.rank, inst.mu0_leading_modes(), a.delta, a.dims.len());
        let mut slice = 1;
        schedule
            .iter()
            .enumerate()
            .map(|(t, &m)| {
                let cap = slice;
                slice *= a.dims[t];
                (m.ceil() as usize).clamp(1, cap)
            })
            .collect()
    } else {
        a.budgets.clone()
    };
    let cfg = NoiselessConfig::tensor(budgets.clone());
    let mut rep = complete_tensor(&mut oracle, &a.dims, &cfg, &mut seed::rng(a.seed, &[1]))?;
    let err = rep.evaluate(inst.ground_truth(), SUCCESS_THRESHOLD)?;
    kv("dims", list(&a.dims));
    kv("rank", a.rank);
    kv("budgets", list(&budgets));
    kv("seed", a.seed);
    kv("mu0", inst.mu0_leading_modes());
    kv("entries_observed", rep.entries_observed);
    kv("entries_gross", rep.entries_gross);
    kv("oracle_count", oracle.observed_count());
    kv("units_per_level", list(&rep.units_per_level));
    kv("fully_observed_subtensors", rep.fully_observed_units);
    kv("resamples", rep.resamples);
    kv("rel_error", err);
    kv("success", err <= SUCCESS_THRESHOLD);
    kv("wall_time", rep.wall_time);
    Ok(())
}

fn css(a: CssArgs) -> Result<()> {
    let per_entry = a.sigma / ((a.n1 * a.n2) as f64).sqrt();
    let spec = SyntheticSpec::matrix(a.n1, a.n2, a.rank, Family::CoherentRow { theta: a.theta }, a.seed)
        .with_unit_frobenius()
        .with_noise(per_entry);
    let (inst, oracle) = gen_matrix(&spec)?;
    let mut oracle = oracle.with_log();
    let truncate_rank = if a.full_span { None } else { Some(a.truncate.unwrap_or(a.rank)) };
    let cfg = CssConfig { truncate_rank, ..CssConfig::new(a.rounds, a.per_round, a.m) };
    let rep = css_complete(&mut oracle, a.n1, a.n2, &cfg, &mut seed::rng(a.seed, &[1]))?;
    let truth = inst.ground_truth();
    let sq = squared_error(&rep.completion.estimate, truth)?;
    let noise = oracle.observed_noise_energy().unwrap_or(0.0);
    kv("n1", a.n1);
    kv("n2", a.n2);
    kv("rank", a.rank);
    kv("rounds", a.rounds);
    kv("per_round", a.per_round);
    kv("m", a.m);
    kv("sigma", a.sigma);
    kv("theta", a.theta);
    kv("seed", a.seed);
    kv("mu_v", inst.mode_coherence()[1]);
    kv("selected_columns", rep.selected_columns.len());
    kv("basis_dims", list(&rep.basis_dims));
    kv("estimation_draws", rep.estimation_draws);
    kv("full_column_draws", rep.full_column_draws);
    kv("reconstruction_draws", rep.reconstruction_draws);
    kv("entries_observed", rep.completion.entries_observed);
    kv("oracle_count", oracle.observed_count());
    kv("failed_columns", rep.completion.failed_units.len());
    kv("sq_error", sq);
    kv("rel_error", rep.completion.estimate.relative_error(truth)?);
    kv("noise_energy", noise);
    kv("bound", 1.0 / (a.n1 * a.n2) as f64 + noise);
    kv("wall_time", rep.completion.wall_time);
    if !rep.completion.failed_units.is_empty() {
        return Err(Error::RankDeficient { rows: a.m, cols: rep.final_basis.dim() });
    }
    Ok(())
}

fn need<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidArgument(format!("--{name} is required for this formula")))
}

fn bounds(a: BoundsArgs) -> Result<()> {
    match a.formula {
        Formula::MatrixBudget => {
            check_common(a.r, a.mu0, a.delta)?;
            kv("matrix_budget", matrix_budget(a.r, a.mu0, a.delta));
        }
        Formula::TensorSchedule => {
            check_common(a.r, a.mu0, a.delta)?;
            let order = match a.order {
                Some(t) => t,
                None if !a.dims.is_empty() => a.dims.len(),
                None => return Err(Error::InvalidArgument("--order or --dims is required".into())),
            };
            for (t, m) in tensor_budget_schedule(a.r, a.mu0, a.delta, order).iter().enumerate() {
                kv(&format!("m_{}", t + 1), m);
            }
        }
        Formula::TensorTotal | Formula::CorollaryTotal => {
            check_common(a.r, a.mu0, a.delta)?;
            if a.dims.is_empty() {
                return Err(Error::InvalidArgument("--dims is required".into()));
            }
            kv("tensor_total", tensor_total(a.r, a.mu0, a.delta, &a.dims));
            if let [n1, n2] = a.dims[..] {
                kv("corollary_total", corollary_total(a.r, a.mu0, a.delta, n1, n2));
            }
        }
        Formula::RecursiveTotal => {
            if a.dims.is_empty() || a.budgets.len() != a.dims.len() {
                return Err(Error::InvalidArgument("--dims and --budgets of equal length are required".into()));
            }
            kv("recursive_total", recursive_total(a.r, &a.dims, &a.budgets));
        }
        Formula::PassiveLower => {
            let p = BoundParams { dims: a.dims.clone(), rank: a.r, mu0: a.mu0, delta: a.delta, epsilon: a.epsilon };
            p.validate()?;
            let b = passive_lower_bound(&p);
            kv("passive_lower_bound", b.value);
            kv("side_condition", b.side_condition);
            kv("reliable", b.reliable);
            kv("exact_threshold", b.exact_threshold);
        }
        Formula::AdaptiveLower => {
            kv("adaptive_lower_bound", adaptive_lower_bound(&a.dims, a.r));
        }
        Formula::Detection => {
            let m = need(a.m, "m")?;
            let n = need(a.n, "n")?;
            let d = need(a.d, "d")?;
            let c = detection_constants(m, n, d, a.mu_u, a.mu_v, a.delta);
            kv("alpha", c.alpha);
            kv("beta", c.beta);
            kv("gamma", c.gamma);
            kv("lower_factor", c.lower_factor);
            kv("upper_factor", c.upper_factor);
            kv("in_regime", c.in_regime);
        }
        Formula::DetectionMinSamples => {
            kv("detection_min_samples", detection_min_samples(need(a.d, "d")?, a.mu_u, a.delta));
        }
        Formula::Css => {
            let [n1, n2] = a.dims[..] else {
                return Err(Error::InvalidArgument("--dims n1,n2 is required".into()));
            };
            let rounds = css_rounds(n1, n2);
            kv("rounds", rounds);
            kv("columns_per_round", css_columns_per_round(rounds, a.r, a.delta, a.epsilon));
            kv("sample_complexity", css_sample_complexity(rounds, a.r, a.delta, a.epsilon, n1, n2, a.mu0));
        }
    }
    Ok(())
}

fn emit(out: &SweepOutput, path: Option<PathBuf>, deterministic: bool) -> Result<()> {
    match path {
        Some(p) => {
            let files = write_outputs(out, &p, deterministic)?;
            kv("rows", out.table.len());
            kv("csv", files.csv.display());
            if let Some(s) = files.summary {
                kv("summary", s.display());
            }
            kv("plot", files.plot.display());
        }
        None => {
            print!("{}", out.table.to_csv(None));
            if let Some(s) = &out.summary {
                println!();
                print!("{}", s.to_csv(None));
            }
        }
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut config = SweepConfig::from_path(&a.config)?;
    config.deterministic |= a.deterministic;
    let out = run_sweep(&config)?;
    emit(&out, a.output.or(config.output.clone()), config.deterministic)
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut config = match a.preset {
        Preset::Table1 => table1_preset(a.large),
    };
    config.seed = a.seed;
    config.deterministic = a.deterministic;
    let out = run_sweep(&config)?;
    emit(&out, a.output, config.deterministic)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Complete(a) => complete(a),
        Command::Tensor(a) => tensor(a),
        Command::Css(a) => css(a),
        Command::Bounds(a) => bounds(a),
        Command::Sweep(a) => sweep(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
