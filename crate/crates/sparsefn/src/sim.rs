//! Seeded, replicated Monte Carlo experiments.
//!
//! Replicate `r` of a cell with seed `c` draws its noise from the stream
//! `(c, [r, 0])` and, for random θ, its parameter from `(c, [r, 1])`. All
//! estimators of a cell see the same replicates, so their risks are paired.
//! Replicates run on the ambient rayon pool and are reduced in replicate
//! order, which makes every report independent of the worker count.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use sparsefn_core::estimators::{
    collier_rule, family_rule, mom_blocks, mom_sigma_blocks, nonsymmetric_rule, oracle_rule,
    Lepski, LinearTest, ThresholdRule, UnknownSigma, Variant,
};
use sparsefn_core::lowerbound::{build_prior, LeastFavorablePrior};
use sparsefn_core::math::CompensatedSum;
use sparsefn_core::rates::{oracle_rate, AdaptiveRates, RateProfile};
use sparsefn_core::rng::{stream_rng, stream_seed};
use sparsefn_core::{LoadingSpec, LoadingVector, NoiseModel};

use crate::config::{
    EstimatorBlock, ExperimentConfig, Placement, Signs, SimKind, SpikeScale, TestBlock, ThetaSpec,
};
use crate::stats::{mean_and_se, upper_quantile};

/// A failed simulation, with enough context to reproduce the failing draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SimError {
    pub message: String,
    /// Numerical failure (solver) rather than a rejected input.
    pub numerical: bool,
    pub cell: Option<String>,
    pub replicate: Option<usize>,
    pub sub_seed: Option<u64>,
}

impl SimError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            numerical: false,
            cell: None,
            replicate: None,
            sub_seed: None,
        }
    }

    fn in_cell(mut self, cell: &Cell) -> Self {
        self.cell.get_or_insert_with(|| cell.to_string());
        self
    }
}

impl From<sparsefn_core::Error> for SimError {
    fn from(e: sparsefn_core::Error) -> Self {
        Self {
            numerical: e.is_numerical(),
            ..Self::input(e.to_string())
        }
    }
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)?;
        if let Some(c) = &self.cell {
            write!(f, " [cell {c}]")?;
        }
        if let (Some(r), Some(s)) = (self.replicate, self.sub_seed) {
            write!(f, " [replicate {r}, sub-seed {s}]")?;
        }
        Ok(())
    }
}

impl std::error::Error for SimError {}

/// Coordinates of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub d: usize,
    pub s: usize,
    pub alpha: f64,
    pub rho: Option<f64>,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} s={} alpha={}", self.d, self.s, self.alpha)?;
        if let Some(r) = self.rho {
            write!(f, " rho={r}")?;
        }
        Ok(())
    }
}

/// One fully resolved cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub loading: LoadingSpec,
    pub noise: NoiseModel,
    pub sigma: f64,
    pub theta: ThetaSpec,
    pub estimator: EstimatorBlock,
    /// Sparsity handed to the non-adaptive estimators and used for rates.
    pub s_assumed: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn cell(&self) -> Cell {
        Cell {
            d: self.loading.dimension(),
            s: self.s_assumed,
            alpha: self.noise.alpha,
            rho: self.theta.rho(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    PhiO,
    PhiAdp,
}

impl RateKind {
    pub fn name(self) -> &'static str {
        match self {
            RateKind::PhiO => "phi_o",
            RateKind::PhiAdp => "phi_adp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskRow {
    pub cell: Cell,
    pub estimator: Variant,
    pub n_rep: usize,
    pub mse: f64,
    pub mse_se: f64,
    pub rate_kind: RateKind,
    /// `σ² Φ` for the rate named by `rate_kind`.
    pub rate_value: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomRow {
    pub cell: Cell,
    pub n_rep: usize,
    pub blocks: usize,
    /// Fraction of replicates with `σ̂²/σ² ∈ [1/2, 3/2]`.
    pub coverage: f64,
    pub mean_abs_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerRow {
    pub cell: Cell,
    /// Separation in units of `σ √Φ_o`.
    pub a: f64,
    pub rho: f64,
    pub b: f64,
    pub b_calibrated: bool,
    pub n_rep: usize,
    /// Worst rejection frequency over the null fixtures.
    pub type_i: f64,
    /// Worst acceptance frequency over the alternatives at `rho`.
    pub type_ii: f64,
    pub type_i_by_fixture: Vec<f64>,
    pub type_ii_by_alternative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum Rows {
    Risk(Vec<RiskRow>),
    MomCoverage(Vec<MomRow>),
    TestPower(Vec<PowerRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub results: Rows,
}

/// Runs `f` on a dedicated pool of `workers` threads (0 picks the rayon
/// default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
        .install(f)
}

/// Where the θ of each replicate comes from.
enum ThetaSource {
    Fixed(Vec<f64>),
    Prior(LeastFavorablePrior),
}

impl ThetaSource {
    fn draw(&self, seed: u64, r: usize, sigma: f64) -> Vec<f64> {
        match self {
            ThetaSource::Fixed(t) => t.clone(),
            ThetaSource::Prior(p) => {
                let mut rng = stream_rng(seed, &[r as u64, 1]);
                p.sample_with(&mut rng)
                    .into_iter()
                    .map(|v| sigma * v)
                    .collect()
            }
        }
    }
}

/// Sorted positions of `k` spikes.
fn spike_positions(d: usize, k: usize, placement: Placement) -> Vec<usize> {
    match placement {
        Placement::Head => (0..k).collect(),
        Placement::Tail => (d - k..d).collect(),
        Placement::Spread => (0..k).map(|i| i * d / k).collect(),
    }
}

fn theta_source(cfg: &SimConfig, l: &LoadingVector) -> Result<ThetaSource, SimError> {
    let d = l.len();
    Ok(match &cfg.theta {
        ThetaSpec::Zero => ThetaSource::Fixed(vec![0.0; d]),
        ThetaSpec::Fixed { support, values } => {
            let mut t = vec![0.0; d];
            for (&j, &v) in support.iter().zip(values) {
                if j >= d {
                    return Err(SimError::input(format!(
                        "theta support index {j} out of range for dimension {d}"
                    )));
                }
                t[j] = v;
            }
            ThetaSource::Fixed(t)
        }
        ThetaSpec::SpikeGrid {
            s_true,
            rho,
            placement,
            signs,
            scale,
        } => {
            if *s_true > d {
                return Err(SimError::input(format!(
                    "s_true = {s_true} exceeds dimension {d}"
                )));
            }
            let unit = match scale {
                SpikeScale::Absolute => None,
                SpikeScale::Threshold => Some(
                    cfg.sigma * cfg.noise.tau * oracle_rate(l, cfg.noise.alpha, *s_true)?.lambda_o,
                ),
            };
            let mut t = vec![0.0; d];
            for (n, k) in spike_positions(d, *s_true, *placement)
                .into_iter()
                .enumerate()
            {
                let eta = l.values()[k];
                let mag = match unit {
                    Some(u) => rho * u / eta.abs(),
                    None => *rho,
                };
                let sign = match signs {
                    Signs::Aligned => eta.signum(),
                    Signs::Alternating if n % 2 == 0 => eta.signum(),
                    Signs::Alternating => -eta.signum(),
                };
                t[l.order()[k]] = sign * mag;
            }
            ThetaSource::Fixed(t)
        }
        ThetaSpec::Prior { s, c1, c_alpha2 } => {
            ThetaSource::Prior(build_prior(l, cfg.noise.alpha, *s, *c1, *c_alpha2)?)
        }
    })
}

/// An estimator with its per-configuration work done.
enum Prepared {
    Rule(ThresholdRule),
    Lepski(Box<Lepski>),
    Unknown(UnknownSigma),
}

impl Prepared {
    fn value(&self, l: &LoadingVector, y: &[f64], sigma: f64) -> Result<f64, SimError> {
        Ok(match self {
            Prepared::Rule(r) => r.value(l, y, sigma),
            Prepared::Lepski(lep) => {
                let sel = lep.select(l, y, sigma);
                sel.estimates[sel.s_hat - 1]
            }
            Prepared::Unknown(u) => u.estimate(l, y)?.0.value,
        })
    }
}

struct CellSetup {
    loading: LoadingVector,
    oracle: RateProfile,
    adaptive: Option<AdaptiveRates>,
}

impl CellSetup {
    fn new(cfg: &SimConfig, need_adaptive: bool) -> Result<Self, SimError> {
        let loading = LoadingVector::from_spec(&cfg.loading)?;
        let oracle = oracle_rate(&loading, cfg.noise.alpha, cfg.s_assumed)?;
        let adaptive = if need_adaptive {
            Some(AdaptiveRates::new(&loading, cfg.noise.alpha)?)
        } else {
            None
        };
        Ok(Self {
            loading,
            oracle,
            adaptive,
        })
    }

    fn prepare(&self, cfg: &SimConfig, variant: Variant) -> Result<Prepared, SimError> {
        let l = &self.loading;
        let (alpha, tau) = (cfg.noise.alpha, cfg.noise.tau);
        let e = &cfg.estimator;
        let s = cfg.s_assumed;
        Ok(match variant {
            Variant::Oracle => Prepared::Rule(oracle_rule(l, alpha, tau, e.kappa, s)?.0),
            Variant::Family => {
                let rates = self.adaptive.as_ref().expect("adaptive rates prepared");
                Prepared::Rule(family_rule(rates, tau, e.kappa, s))
            }
            Variant::Adaptive => {
                let rates = self.adaptive.clone().expect("adaptive rates prepared");
                Prepared::Lepski(Box::new(Lepski::from_rates(
                    rates,
                    tau,
                    e.kappa,
                    e.zeta_for(alpha),
                )))
            }
            Variant::Nonsym => Prepared::Rule(nonsymmetric_rule(l, alpha, tau, s, e.c_h)?),
            Variant::Collier => Prepared::Rule(collier_rule(l, s)?),
            Variant::PlugIn => Prepared::Rule(ThresholdRule::plug_in(l, Variant::PlugIn, s)),
            Variant::UnknownSigma => {
                Prepared::Unknown(UnknownSigma::new(l, alpha, tau, e.kappa, s, e.gamma_split)?)
            }
        })
    }
}

fn needs_adaptive(variants: &[Variant]) -> bool {
    variants
        .iter()
        .any(|v| matches!(v, Variant::Family | Variant::Adaptive))
}

/// `y = θ + σ ξ` for replicate `r`.
fn observe(
    cfg: &SimConfig,
    sampler: &sparsefn_core::noise::Sampler,
    theta: &[f64],
    r: usize,
) -> Vec<f64> {
    let mut rng = stream_rng(cfg.seed, &[r as u64, 0]);
    let mut y = vec![0.0; theta.len()];
    sampler.fill(&mut rng, &mut y);
    for (v, t) in y.iter_mut().zip(theta) {
        *v = t + cfg.sigma * *v;
    }
    y
}

fn replicate_error(e: SimError, cfg: &SimConfig, r: usize) -> SimError {
    SimError {
        replicate: Some(r),
        sub_seed: Some(stream_seed(cfg.seed, &[r as u64, 0])),
        ..e
    }
}

/// Runs `f` for every replicate in parallel and returns the results in
/// replicate order; the first failing replicate wins.
fn replicates<T: Send>(
    cfg: &SimConfig,
    f: impl Fn(usize) -> Result<T, SimError> + Sync,
) -> Result<Vec<T>, SimError> {
    let out: Vec<Result<T, SimError>> = (0..cfg.replicates).into_par_iter().map(&f).collect();
    out.into_iter()
        .enumerate()
        .map(|(r, v)| v.map_err(|e| replicate_error(e, cfg, r)))
        .collect()
}

fn ratio(mse: f64, rate: f64) -> f64 {
    if rate > 0.0 {
        mse / rate
    } else if mse == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Empirical risk of every configured estimator on one cell.
pub fn run_risk(cfg: &SimConfig) -> Result<Vec<RiskRow>, SimError> {
    let cell = cfg.cell();
    run_risk_inner(cfg).map_err(|e| e.in_cell(&cell))
}

fn run_risk_inner(cfg: &SimConfig) -> Result<Vec<RiskRow>, SimError> {
    let variants = &cfg.estimator.variants;
    let setup = CellSetup::new(cfg, needs_adaptive(variants))?;
    let l = &setup.loading;
    let prepared = variants
        .iter()
        .map(|&v| setup.prepare(cfg, v))
        .collect::<Result<Vec<_>, _>>()?;
    let source = theta_source(cfg, l)?;
    let sampler = cfg.noise.sampler();

    let errors = replicates(cfg, |r| {
        let theta = source.draw(cfg.seed, r, cfg.sigma);
        let truth = l.functional(&theta);
        let y = observe(cfg, &sampler, &theta, r);
        prepared
            .iter()
            .map(|p| {
                let e = p.value(l, &y, cfg.sigma)? - truth;
                Ok(e * e)
            })
            .collect::<Result<Vec<f64>, SimError>>()
    })?;

    let s2 = cfg.sigma * cfg.sigma;
    let rows = variants
        .iter()
        .enumerate()
        .map(|(k, &variant)| {
            let sq: Vec<f64> = errors.iter().map(|e| e[k]).collect();
            let (mse, mse_se) = mean_and_se(&sq);
            let (rate_kind, phi) = match variant {
                Variant::Adaptive => (
                    RateKind::PhiAdp,
                    setup
                        .adaptive
                        .as_ref()
                        .expect("adaptive rates prepared")
                        .phi_adp(cfg.s_assumed),
                ),
                _ => (RateKind::PhiO, setup.oracle.phi_o),
            };
            let rate_value = s2 * phi;
            RiskRow {
                cell: cfg.cell(),
                estimator: variant,
                n_rep: cfg.replicates,
                mse,
                mse_se,
                rate_kind,
                rate_value,
                ratio: ratio(mse, rate_value),
            }
        })
        .collect();
    Ok(rows)
}

/// Coverage of the median-of-means noise level on one cell.
pub fn run_mom_coverage(cfg: &SimConfig) -> Result<MomRow, SimError> {
    let cell = cfg.cell();
    run_mom_inner(cfg).map_err(|e| e.in_cell(&cell))
}

fn run_mom_inner(cfg: &SimConfig) -> Result<MomRow, SimError> {
    if cfg.sigma.is_nan() || cfg.sigma <= 0.0 {
        return Err(SimError::input("coverage needs sigma > 0"));
    }
    let l = LoadingVector::from_spec(&cfg.loading)?;
    let blocks = mom_blocks(l.len(), cfg.estimator.gamma_split)?;
    if let Some(s) = cfg.theta.sparsity() {
        if 4 * s >= blocks {
            log::warn!(
                "s_true = {s} is not below floor(gamma d)/4 = {}",
                blocks as f64 / 4.0
            );
        }
    }
    let source = theta_source(cfg, &l)?;
    let sampler = cfg.noise.sampler();
    let s2 = cfg.sigma * cfg.sigma;
    let draws = replicates(cfg, |r| {
        let theta = source.draw(cfg.seed, r, cfg.sigma);
        let y = observe(cfg, &sampler, &theta, r);
        let q = mom_sigma_blocks(&y, blocks)? / s2;
        Ok((covered(q), (q - 1.0).abs()))
    })?;
    let n = draws.len() as f64;
    let inside = draws.iter().filter(|d| d.0).count() as f64;
    let err = draws
        .iter()
        .map(|d| d.1)
        .collect::<CompensatedSum>()
        .value();
    Ok(MomRow {
        cell: cfg.cell(),
        n_rep: cfg.replicates,
        blocks,
        coverage: inside / n,
        mean_abs_rel_err: err / n,
    })
}

/// `σ̂²/σ² ∈ [1/2, 3/2]`.
fn covered(q: f64) -> bool {
    (0.5..=1.5).contains(&q)
}

/// Null and alternative parameter vectors of the linear test.
struct TestFixtures {
    nulls: Vec<Vec<f64>>,
    /// `alternatives[a][k]`: alternative `k` at the `a`-th separation.
    alternatives: Vec<Vec<Vec<f64>>>,
}

fn test_fixtures(l: &LoadingVector, s: usize, t0: f64, unit: f64, rhos: &[f64]) -> TestFixtures {
    let d = l.len();
    let at = |k: usize, target: f64, t: &mut Vec<f64>| t[l.order()[k]] = target / l.values()[k];
    // The largest loading carries t₀, the tail carries everything else.
    let mut base = vec![0.0; d];
    let used = usize::from(t0 != 0.0);
    if used == 1 {
        at(0, t0, &mut base);
    }
    let free = s.saturating_sub(used).min(d - used);

    let mut nulls = vec![base.clone()];
    let pairs = free / 2;
    if pairs > 0 && unit > 0.0 {
        let mut t = base.clone();
        for p in 0..pairs {
            at(d - 1 - 2 * p, unit, &mut t);
            at(d - 2 - 2 * p, -unit, &mut t);
        }
        nulls.push(t);
    }

    let alternatives = rhos
        .iter()
        .map(|&rho| {
            if free == 0 {
                let mut t = base.clone();
                at(0, t0 + rho, &mut t);
                return vec![t];
            }
            let mut spread = base.clone();
            for k in d - free..d {
                at(k, rho / free as f64, &mut spread);
            }
            let mut single = base.clone();
            at(d - 1, rho, &mut single);
            vec![spread, single]
        })
        .collect();
    TestFixtures {
        nulls,
        alternatives,
    }
}

/// Type I and II error frequencies of the linear test on one cell.
pub fn run_test_power(cfg: &SimConfig, test: &TestBlock) -> Result<Vec<PowerRow>, SimError> {
    let cell = cfg.cell();
    run_power_inner(cfg, test).map_err(|e| e.in_cell(&cell))
}

fn run_power_inner(cfg: &SimConfig, test: &TestBlock) -> Result<Vec<PowerRow>, SimError> {
    let l = LoadingVector::from_spec(&cfg.loading)?;
    let s = cfg.s_assumed;
    let (alpha, tau, sigma) = (cfg.noise.alpha, cfg.noise.tau, cfg.sigma);
    let lt = LinearTest::new(&l, alpha, tau, cfg.estimator.kappa, s, 1.0)?;
    let rate = oracle_rate(&l, alpha, s)?;
    let scale = sigma * rate.phi_o.sqrt();
    let unit = sigma * tau * rate.lambda_o;
    let rhos: Vec<f64> = test.a_grid.iter().map(|a| a * scale).collect();
    let fx = test_fixtures(&l, s, test.t0, unit, &rhos);
    let sampler = cfg.noise.sampler();

    let (b, calibrated) = match test.b {
        Some(b) => (b, false),
        None => (calibrate_b(cfg, test, &l, &lt, &fx.nulls, scale)?, true),
    };
    let lt = lt.with_b(b);

    let decisions = replicates(cfg, |r| {
        let mut rng = stream_rng(cfg.seed, &[r as u64, 0]);
        let mut xi = vec![0.0; l.len()];
        sampler.fill(&mut rng, &mut xi);
        let reject = |theta: &[f64]| {
            let y: Vec<f64> = theta.iter().zip(&xi).map(|(t, x)| t + sigma * x).collect();
            lt.run(&l, &y, sigma, test.t0).decision
        };
        let nulls: Vec<u8> = fx.nulls.iter().map(|t| reject(t)).collect();
        let alts: Vec<Vec<u8>> = fx
            .alternatives
            .iter()
            .map(|set| set.iter().map(|t| reject(t)).collect())
            .collect();
        Ok((nulls, alts))
    })?;

    let n = decisions.len() as f64;
    let type_i_by_fixture: Vec<f64> = (0..fx.nulls.len())
        .map(|f| decisions.iter().map(|d| f64::from(d.0[f])).sum::<f64>() / n)
        .collect();
    let type_i = type_i_by_fixture.iter().copied().fold(0.0, f64::max);
    let rows = test
        .a_grid
        .iter()
        .enumerate()
        .map(|(ai, &a)| {
            let by_alt: Vec<f64> = (0..fx.alternatives[ai].len())
                .map(|k| {
                    decisions
                        .iter()
                        .map(|d| f64::from(1 - d.1[ai][k]))
                        .sum::<f64>()
                        / n
                })
                .collect();
            PowerRow {
                cell: cfg.cell(),
                a,
                rho: rhos[ai],
                b,
                b_calibrated: calibrated,
                n_rep: cfg.replicates,
                type_i,
                type_ii: by_alt.iter().copied().fold(0.0, f64::max),
                type_i_by_fixture: type_i_by_fixture.clone(),
                type_ii_by_alternative: by_alt,
            }
        })
        .collect();
    Ok(rows)
}

/// Smallest `B` whose rejection frequency on every null fixture is at most
/// `ε`, estimated on replicates drawn from the calibration stream `(c, [r, 2])`.
fn calibrate_b(
    cfg: &SimConfig,
    test: &TestBlock,
    l: &LoadingVector,
    lt: &LinearTest,
    nulls: &[Vec<f64>],
    scale: f64,
) -> Result<f64, SimError> {
    let n = test.calibration_replicates.unwrap_or(cfg.replicates);
    let calib = SimConfig {
        replicates: n,
        ..cfg.clone()
    };
    let sampler = cfg.noise.sampler();
    let sigma = cfg.sigma;
    let stats = replicates(&calib, |r| {
        let mut rng = stream_rng(cfg.seed, &[r as u64, 2]);
        let mut xi = vec![0.0; l.len()];
        sampler.fill(&mut rng, &mut xi);
        Ok(nulls
            .iter()
            .map(|theta| {
                let y: Vec<f64> = theta.iter().zip(&xi).map(|(t, x)| t + sigma * x).collect();
                let st = lt.run(l, &y, sigma, test.t0).statistic;
                if scale > 0.0 {
                    st / scale
                } else {
                    0.0
                }
            })
            .collect::<Vec<f64>>())
    })?;
    let q = 1.0 - test.calibration_epsilon;
    let b = (0..nulls.len())
        .map(|f| {
            let col: Vec<f64> = stats.iter().map(|v| v[f]).collect();
            upper_quantile(&col, q)
        })
        .fold(0.0, f64::max);
    Ok(b.max(f64::MIN_POSITIVE))
}

const AXIS_ALPHA: u64 = 1;
const AXIS_D: u64 = 2;
const AXIS_RHO: u64 = 3;
const AXIS_S: u64 = 4;

fn sorted_usize(v: &[usize], base: usize) -> Vec<usize> {
    if v.is_empty() {
        return vec![base];
    }
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn sorted_f64(v: &[f64], base: f64) -> Vec<f64> {
    if v.is_empty() {
        return vec![base];
    }
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// The cells of a config in canonical (ascending) order, each with its
/// derived seed. Only axes with more than one value enter the seed, keyed by
/// axis name, so a single-cell grid uses the master seed and the order in
/// which axis values are listed never matters.
pub fn expand_grid(config: &ExperimentConfig) -> Vec<SimConfig> {
    let g = &config.simulation.grid;
    let ds = sorted_usize(&g.d, config.loading.dimension());
    let ss = sorted_usize(&g.s, config.base_sparsity());
    let alphas = sorted_f64(&g.alpha, config.noise.alpha);
    let rhos: Vec<Option<f64>> = if g.rho.is_empty() {
        vec![config.theta.rho()]
    } else {
        sorted_f64(&g.rho, 0.0).into_iter().map(Some).collect()
    };
    let mut cells = Vec::new();
    for &d in &ds {
        for &s in &ss {
            for &alpha in &alphas {
                for &rho in &rhos {
                    let mut keys = Vec::new();
                    if alphas.len() > 1 {
                        keys.extend([AXIS_ALPHA, alpha.to_bits()]);
                    }
                    if ds.len() > 1 {
                        keys.extend([AXIS_D, d as u64]);
                    }
                    if rhos.len() > 1 {
                        keys.extend([AXIS_RHO, rho.unwrap_or(0.0).to_bits()]);
                    }
                    if ss.len() > 1 {
                        keys.extend([AXIS_S, s as u64]);
                    }
                    let seed = if keys.is_empty() {
                        config.seed
                    } else {
                        stream_seed(config.seed, &keys)
                    };
                    cells.push(cell_config(config, d, s, alpha, rho, seed));
                }
            }
        }
    }
    cells
}

fn cell_config(
    config: &ExperimentConfig,
    d: usize,
    s: usize,
    alpha: f64,
    rho: Option<f64>,
    seed: u64,
) -> SimConfig {
    let grid = &config.simulation.grid;
    let mut theta = config.theta.clone();
    match &mut theta {
        ThetaSpec::SpikeGrid { s_true, rho: r, .. } => {
            if !grid.s.is_empty() {
                *s_true = s;
            }
            if let Some(v) = rho {
                *r = v;
            }
        }
        ThetaSpec::Prior { s: ps, .. } if !grid.s.is_empty() => *ps = s,
        _ => {}
    }
    SimConfig {
        loading: config.loading.with_dimension(d),
        noise: NoiseModel {
            alpha,
            ..config.noise
        },
        sigma: config.simulation.sigma,
        theta,
        estimator: config.estimator.clone(),
        s_assumed: s,
        replicates: config.simulation.replicates,
        seed,
    }
}

/// Runs the experiment a config describes, one cell after another, each cell
/// fanned out over `workers` threads.
pub fn simulate(config: &ExperimentConfig, workers: usize) -> Result<SimulationReport, SimError> {
    let cells = expand_grid(config);
    let test = &config.simulation.test;
    let results = with_workers(workers, || -> Result<Rows, SimError> {
        Ok(match config.simulation.kind {
            SimKind::Risk => {
                let mut rows = Vec::new();
                for c in &cells {
                    log::info!("risk cell {}", c.cell());
                    rows.extend(run_risk(c)?);
                }
                Rows::Risk(rows)
            }
            SimKind::MomCoverage => Rows::MomCoverage(
                cells
                    .iter()
                    .map(|c| {
                        log::info!("coverage cell {}", c.cell());
                        run_mom_coverage(c)
                    })
                    .collect::<Result<_, _>>()?,
            ),
            SimKind::TestPower => {
                let mut rows = Vec::new();
                for c in &cells {
                    log::info!("test cell {}", c.cell());
                    rows.extend(run_test_power(c, test)?);
                }
                Rows::TestPower(rows)
            }
        })
    })?;
    Ok(SimulationReport {
        tool_version: crate::TOOL_VERSION.to_string(),
        config_hash: config.hash(),
        seed: config.seed,
        results,
    })
}
