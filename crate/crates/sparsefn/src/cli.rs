//! The `sparsefn` command line.
//!
//! Exit codes: 0 on success, 1 for rejected input, 2 for numerical failure.
//! Every JSON document carries `tool_version`, `config_hash` and `seed`; for
//! subcommands without a config file the hash covers the resolved arguments.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sparsefn_core::estimators::{
    adaptive_estimate, collier_estimate, default_zeta, family_estimate, lepski_select, linear_test,
    nonsymmetric_estimate, oracle_estimate, plug_in_estimate, unknown_sigma_estimate,
    EstimateResult, EstimationInput, Sigma, Variant,
};
use sparsefn_core::loading::drop_zeros;
use sparsefn_core::lowerbound::{build_prior, chi2_mixture_bound};
use sparsefn_core::rates::{
    adaptive_rate, closed_form_rate, oracle_rate, AdaptiveRates, ClosedFormKind, ClosedFormParams,
};
use sparsefn_core::rng::stream_rng;
use sparsefn_core::threshold::{solve_adaptive_beta, solve_beta, solve_lambda_h};
use sparsefn_core::{LoadingSpec, LoadingVector, Tolerances};

use crate::config::parse_config;
use crate::output::{hash_json, provenance_line, report_csv, report_json};
use crate::sim::simulate;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<sparsefn_core::Error> for CliError {
    fn from(e: sparsefn_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "sparsefn",
    version,
    about = "Estimate and test sparse linear functionals"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a threshold equation and print the root.
    Solve(SolveArgs),
    /// Oracle and adaptive rates, as JSON at one s or as a CSV over an s grid.
    Rate(RateArgs),
    /// Estimate L(θ) = η⊤θ from observations.
    Estimate(EstimateArgs),
    /// Test L(θ) = t0.
    Test(TestArgs),
    /// Build the least favourable prior, report its moments and bounds.
    Prior(PriorArgs),
    /// Run a Monte Carlo experiment from a config file.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
enum SpecKind {
    Homogeneous,
    TwoPhase,
    ExpDecay,
}

#[derive(Debug, Clone, Args, Serialize)]
struct LoadingArgs {
    /// Generated loading family.
    #[arg(long, value_enum, conflicts_with = "loading_file")]
    loading_spec: Option<SpecKind>,
    /// Dimension of a generated loading.
    #[arg(long)]
    d: Option<usize>,
    /// Two-phase: the head has floor(d^gamma_d) entries.
    #[arg(long, default_value_t = 0.4)]
    gamma_d: f64,
    /// Two-phase: head entries equal d^gamma_lambda.
    #[arg(long, default_value_t = 0.2)]
    gamma_lambda: f64,
    /// Exp-decay: η_j = exp(-c (j-1)^gamma).
    #[arg(long, default_value_t = 1.0)]
    decay_c: f64,
    #[arg(long, default_value_t = 1.0)]
    decay_gamma: f64,
    /// Loadings, one per line, in coordinate order.
    #[arg(long)]
    loading_file: Option<PathBuf>,
    /// Drop zero loadings from --loading-file (and the matching observations).
    #[arg(long, default_value_t = false)]
    drop_zeros: bool,
}

/// A loading plus the original indices it retains after dropping zeros.
struct ResolvedLoading {
    spec: LoadingSpec,
    vector: LoadingVector,
    kept: Option<Vec<usize>>,
    original_len: usize,
}

impl LoadingArgs {
    fn resolve(&self) -> CliResult<ResolvedLoading> {
        if let Some(path) = &self.loading_file {
            let values = read_floats(path)?;
            let original_len = values.len();
            let (values, kept) = if self.drop_zeros {
                let (kept_values, dropped) = drop_zeros(&values);
                if !dropped.is_empty() {
                    log::info!("dropped {} zero loadings", dropped.len());
                }
                let kept = (0..values.len()).filter(|j| !dropped.contains(j)).collect();
                (kept_values, Some(kept))
            } else {
                (values, None)
            };
            let spec = LoadingSpec::Explicit { values };
            let vector = LoadingVector::from_spec(&spec)?;
            return Ok(ResolvedLoading {
                spec,
                vector,
                kept,
                original_len,
            });
        }
        let kind = self.loading_spec.ok_or_else(|| {
            CliError::Input("one of --loading-spec or --loading-file is required".into())
        })?;
        let d = self
            .d
            .ok_or_else(|| CliError::Input("--d is required with --loading-spec".into()))?;
        let spec = match kind {
            SpecKind::Homogeneous => LoadingSpec::Homogeneous { d },
            SpecKind::TwoPhase => LoadingSpec::TwoPhase {
                d,
                gamma_d: self.gamma_d,
                gamma_lambda: self.gamma_lambda,
            },
            SpecKind::ExpDecay => LoadingSpec::ExpDecay {
                d,
                c: self.decay_c,
                gamma: self.decay_gamma,
            },
        };
        let vector = LoadingVector::from_spec(&spec)?;
        Ok(ResolvedLoading {
            spec,
            vector,
            kept: None,
            original_len: d,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum EquationArg {
    Oracle,
    Adaptive,
    Asym,
}

#[derive(Debug, Args, Serialize)]
struct SolveArgs {
    #[command(flatten)]
    loading: LoadingArgs,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Sparsity; the oracle target is s/2.
    #[arg(long)]
    s: Option<usize>,
    /// Explicit right-hand side for the oracle equation instead of s/2.
    #[arg(long)]
    target: Option<f64>,
    #[arg(long, value_enum, default_value_t = EquationArg::Oracle)]
    equation: EquationArg,
    /// Cap on bracket doublings before the solve is reported as failed.
    #[arg(long, default_value_t = 120)]
    max_doublings: u32,
    #[arg(long, default_value_t = 200)]
    max_iter: u32,
}

#[derive(Debug, Args, Serialize)]
struct RateArgs {
    #[command(flatten)]
    loading: LoadingArgs,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Sparsity of the JSON report.
    #[arg(long)]
    s: Option<usize>,
    /// Emit a CSV over s = 1..=s-max instead of JSON.
    #[arg(long, default_value_t = false)]
    csv: bool,
    /// Last s of the CSV grid (default min(d, 100)).
    #[arg(long)]
    s_max: Option<usize>,
    /// Closed form for the ratio column (default: the one matching the loading family).
    #[arg(long)]
    closed_form: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct NoiseArgs {
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    tau: f64,
    /// Known noise level.
    #[arg(long, conflicts_with = "sigma_unknown")]
    sigma: Option<f64>,
    /// Estimate the noise level by median of means.
    #[arg(long, default_value_t = false)]
    sigma_unknown: bool,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Observations, one per line, in coordinate order.
    #[arg(long)]
    y_file: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum VariantArg {
    Oracle,
    Family,
    Adaptive,
    Nonsym,
    UnknownSigma,
    Collier,
    PlugIn,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Oracle => Variant::Oracle,
            VariantArg::Family => Variant::Family,
            VariantArg::Adaptive => Variant::Adaptive,
            VariantArg::Nonsym => Variant::Nonsym,
            VariantArg::UnknownSigma => Variant::UnknownSigma,
            VariantArg::Collier => Variant::Collier,
            VariantArg::PlugIn => Variant::PlugIn,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    loading: LoadingArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, value_enum, default_value_t = VariantArg::Oracle)]
    variant: VariantArg,
    /// Sparsity (ignored by the adaptive variant).
    #[arg(long, default_value_t = 1)]
    s: usize,
    /// Lepski constant (default 1e3 for alpha >= 2, else 1e4).
    #[arg(long)]
    zeta: Option<f64>,
    /// Median-of-means blocks are floor(gamma_split * d).
    #[arg(long, default_value_t = 0.5)]
    gamma_split: f64,
    /// Non-symmetric threshold constant (default tau * 4^(1/alpha)).
    #[arg(long)]
    c_h: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct TestArgs {
    #[command(flatten)]
    loading: LoadingArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 1)]
    s: usize,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    /// Rejection constant: reject when |L̂ - t0| > B σ √Φ_o.
    #[arg(long = "B", alias = "b", default_value_t = 1.0)]
    b: f64,
}

#[derive(Debug, Args, Serialize)]
struct PriorArgs {
    #[command(flatten)]
    loading: LoadingArgs,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long)]
    s: usize,
    #[arg(long, default_value_t = 0.5)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c_alpha1: f64,
    #[arg(long, default_value_t = 1.0)]
    c_alpha2: f64,
    /// Number of θ draws written to --out.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "SPARSEFN_WORKERS", default_value_t = 0)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn read_floats(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Input(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::Input(format!("stdout: {e}")))
        }
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    tool_version: &'static str,
    config_hash: String,
    seed: Option<u64>,
    #[serde(flatten)]
    result: &'a T,
}

fn print_json<A: Serialize, T: Serialize>(
    command: &str,
    args: &A,
    seed: Option<u64>,
    result: &T,
) -> CliResult<()> {
    let doc = Stamped {
        tool_version: crate::TOOL_VERSION,
        config_hash: hash_json(&(command, args)),
        seed,
        result,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("result serialises");
    text.push('\n');
    write_out(None, &text)
}

fn solve(args: &SolveArgs) -> CliResult<()> {
    let l = args.loading.resolve()?.vector;
    let tol = Tolerances {
        max_doublings: args.max_doublings,
        max_iter: args.max_iter,
        ..Tolerances::default()
    };
    if let Some(s) = args.s {
        if s == 0 || s > l.len() {
            return Err(CliError::Input(format!(
                "--s {s} must lie in [1, {}]",
                l.len()
            )));
        }
    }
    let need_s = || {
        args.s
            .ok_or_else(|| CliError::Input("--s is required for this equation".into()))
    };
    let sol = match args.equation {
        EquationArg::Oracle => {
            let target = match args.target {
                Some(t) => t,
                None => need_s()? as f64 / 2.0,
            };
            solve_beta(&l, args.alpha, target, &tol)?
        }
        EquationArg::Adaptive => solve_adaptive_beta(&l, args.alpha, need_s()?, &tol)?,
        EquationArg::Asym => solve_lambda_h(&l, args.alpha, need_s()?, &tol)?,
    };
    print_json("solve", args, None, &sol)
}

fn closed_form_for(
    spec: &LoadingSpec,
    l: &LoadingVector,
    alpha: f64,
    named: Option<&str>,
) -> CliResult<Option<(ClosedFormKind, ClosedFormParams)>> {
    let d = l.len();
    let mut p = ClosedFormParams::new(d, alpha);
    if let LoadingSpec::TwoPhase {
        gamma_d,
        gamma_lambda,
        ..
    } = spec
    {
        p.gamma_d = *gamma_d;
        p.gamma_lambda = *gamma_lambda;
    }
    p.j0 = l.effective_dimension().min(d);
    let kind = match named {
        Some(n) => n.parse::<ClosedFormKind>()?,
        None => match spec {
            LoadingSpec::Homogeneous { .. } => ClosedFormKind::HomogeneousOracle,
            LoadingSpec::TwoPhase { .. } => ClosedFormKind::TwoPhaseOracle,
            LoadingSpec::ExpDecay { .. } => ClosedFormKind::ExpDecayOracle,
            LoadingSpec::Explicit { .. } => return Ok(None),
        },
    };
    Ok(Some((kind, p)))
}

fn is_adaptive_form(k: ClosedFormKind) -> bool {
    matches!(
        k,
        ClosedFormKind::HomogeneousAdaptive
            | ClosedFormKind::TwoPhaseAdaptive
            | ClosedFormKind::ExpDecayAdaptive
    )
}

#[derive(Serialize)]
struct RateReport {
    oracle: sparsefn_core::RateProfile,
    adaptive: sparsefn_core::AdaptiveRateProfile,
}

fn rate(args: &RateArgs) -> CliResult<()> {
    let resolved = args.loading.resolve()?;
    let l = &resolved.vector;
    if !args.csv {
        let s = args
            .s
            .ok_or_else(|| CliError::Input("--s is required without --csv".into()))?;
        let report = RateReport {
            oracle: oracle_rate(l, args.alpha, s)?,
            adaptive: adaptive_rate(l, args.alpha, s)?,
        };
        return print_json("rate", args, None, &report);
    }
    let d = l.len();
    let s_max = args.s_max.unwrap_or(d.min(100));
    if s_max == 0 || s_max > d {
        return Err(CliError::Input(format!("--s-max must lie in [1, {d}]")));
    }
    let form = closed_form_for(&resolved.spec, l, args.alpha, args.closed_form.as_deref())?;
    let rates = AdaptiveRates::new(l, args.alpha)?;
    let mut out = provenance_line(&hash_json(&("rate", args)), None);
    out.push_str(
        "s,beta,lambda_o,nu,j1,phi_o,lambda_star,nu_star,phi_star,phi_adp,closed_form,ratio\n",
    );
    for s in 1..=s_max {
        let p = oracle_rate(l, args.alpha, s)?;
        let a = rates.profile(s);
        let (cf, ratio) = match form {
            Some((kind, params)) => {
                let v = closed_form_rate(kind, &params, s as f64)?;
                let num = if is_adaptive_form(kind) {
                    a.phi_adp
                } else {
                    p.phi_o
                };
                (v.to_string(), (num / v).to_string())
            }
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s,
            p.beta,
            p.lambda_o,
            p.nu,
            p.j1,
            p.phi_o,
            a.lambda_star,
            a.nu_star,
            a.phi_star,
            a.phi_adp,
            cf,
            ratio
        ));
    }
    write_out(None, &out)
}

/// Observations restricted to the retained coordinates.
fn observations(noise: &NoiseArgs, resolved: &ResolvedLoading) -> CliResult<Vec<f64>> {
    let y = read_floats(&noise.y_file)?;
    match &resolved.kept {
        Some(kept) => {
            if y.len() != resolved.original_len {
                return Err(CliError::Input(format!(
                    "{} observations for a loading file of {} entries",
                    y.len(),
                    resolved.original_len
                )));
            }
            Ok(kept.iter().map(|&j| y[j]).collect())
        }
        None => Ok(y),
    }
}

fn sigma_of(noise: &NoiseArgs) -> CliResult<Sigma> {
    match (noise.sigma, noise.sigma_unknown) {
        (Some(s), false) => Ok(Sigma::Known(s)),
        (None, true) => Ok(Sigma::Unknown),
        (None, false) => Err(CliError::Input(
            "one of --sigma or --sigma-unknown is required".into(),
        )),
        (Some(_), true) => Err(CliError::Input(
            "--sigma conflicts with --sigma-unknown".into(),
        )),
    }
}

/// Maps kept indices of a reduced loading back to the file's coordinates.
fn remap(mut r: EstimateResult, kept: &Option<Vec<usize>>) -> EstimateResult {
    if let Some(k) = kept {
        r.kept_indices = r.kept_indices.iter().map(|&i| k[i]).collect();
    }
    r
}

#[derive(Serialize)]
struct EstimateReport {
    #[serde(flatten)]
    result: EstimateResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma2_hat: Option<f64>,
}

fn estimate(args: &EstimateArgs) -> CliResult<()> {
    let resolved = args.loading.resolve()?;
    let l = &resolved.vector;
    let y = observations(&args.noise, &resolved)?;
    let variant: Variant = args.variant.into();
    let mut sigma = sigma_of(&args.noise)?;
    if variant == Variant::UnknownSigma {
        // The noise level is estimated whatever was passed.
        sigma = Sigma::Unknown;
    }
    let input = EstimationInput::new(&y, l, args.noise.alpha, args.noise.tau, sigma)?
        .with_kappa(args.noise.kappa)?;
    let zeta = args.zeta.unwrap_or_else(|| default_zeta(args.noise.alpha));
    let mut sigma2_hat = None;
    let result = match variant {
        Variant::Oracle => oracle_estimate(&input, args.s)?,
        Variant::Family => family_estimate(&input, args.s)?,
        Variant::Adaptive => {
            let sel = lepski_select(&input, zeta)?;
            log::info!("lepski selected s = {}", sel.s_hat);
            adaptive_estimate(&input, zeta)?
        }
        Variant::Nonsym => nonsymmetric_estimate(&input, args.s, args.c_h)?,
        Variant::Collier => collier_estimate(&input, args.s)?,
        Variant::PlugIn => plug_in_estimate(&input, args.s)?,
        Variant::UnknownSigma => {
            sigma2_hat = Some(sparsefn_core::estimators::mom_sigma(&y, args.gamma_split)?);
            unknown_sigma_estimate(&input, args.s, args.gamma_split)?
        }
    };
    let report = EstimateReport {
        result: remap(result, &resolved.kept),
        sigma2_hat,
    };
    print_json("estimate", args, None, &report)
}

fn test(args: &TestArgs) -> CliResult<()> {
    let resolved = args.loading.resolve()?;
    let y = observations(&args.noise, &resolved)?;
    let sigma = sigma_of(&args.noise)?;
    let input = EstimationInput::new(
        &y,
        &resolved.vector,
        args.noise.alpha,
        args.noise.tau,
        sigma,
    )?
    .with_kappa(args.noise.kappa)?;
    let outcome = linear_test(&input, args.s, args.t0, args.b)?;
    print_json("test", args, None, &outcome)
}

#[derive(Serialize)]
struct PriorReport {
    s: usize,
    alpha: f64,
    c1: f64,
    c_alpha1: f64,
    c_alpha2: f64,
    lambda_o: f64,
    nu: f64,
    sum_pi: f64,
    separation_level: f64,
    moments: sparsefn_core::lowerbound::PriorMoments,
    chi2_bound: f64,
    tv_bound: f64,
    samples_written: usize,
}

fn prior(args: &PriorArgs) -> CliResult<()> {
    let l = args.loading.resolve()?.vector;
    let p = build_prior(&l, args.alpha, args.s, args.c1, args.c_alpha2)?;
    let chi = chi2_mixture_bound(&p, args.c_alpha1)?;
    if args.samples > 0 {
        let path = args
            .out
            .as_deref()
            .ok_or_else(|| CliError::Input("--samples needs --out".into()))?;
        let mut text = String::new();
        for k in 0..args.samples {
            let theta = p.sample_with(&mut stream_rng(args.seed, &[k as u64]));
            let line: Vec<String> = theta.iter().map(|v| v.to_string()).collect();
            text.push_str(&line.join(" "));
            text.push('\n');
        }
        write_out(Some(path), &text)?;
    }
    let report = PriorReport {
        s: args.s,
        alpha: args.alpha,
        c1: args.c1,
        c_alpha1: args.c_alpha1,
        c_alpha2: args.c_alpha2,
        lambda_o: p.lambda_o,
        nu: p.nu,
        sum_pi: p.pi.iter().sum(),
        separation_level: p.separation_level(),
        moments: p.moments(&l),
        chi2_bound: chi.bound,
        tv_bound: chi.tv,
        samples_written: args.samples,
    };
    print_json("prior", args, Some(args.seed), &report)
}

fn simulate_cmd(args: &SimulateArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.config.display())))?;
    let config = parse_config(&text).map_err(|e| CliError::Input(e.to_string()))?;
    let report = simulate(&config, args.workers).map_err(|e| {
        if e.numerical {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    })?;
    let rendered = match args.format {
        Format::Csv => report_csv(&report),
        Format::Json => report_json(&report),
    };
    write_out(args.out.as_deref(), &rendered)
}

/// Parses `argv` and runs the subcommand; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Rate(a) => rate(a),
        Command::Estimate(a) => estimate(a),
        Command::Test(a) => test(a),
        Command::Prior(a) => prior(a),
        Command::Simulate(a) => simulate_cmd(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("sparsefn: {e}");
            e.exit_code()
        }
    }
}
