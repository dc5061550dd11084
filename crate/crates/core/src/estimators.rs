//! Thresholding estimators of `L(θ) = η⊤θ`, Lepski selection, the
//! median-of-means noise level and the linear-functional test.
//!
//! Every estimator has the same shape: the first `cutoff` coordinates in
//! sorted-loading order are always kept (plug-in part), the remaining ones are
//! kept only when a statistic exceeds a threshold. The statistic is `|η_j y_j|`
//! for the symmetric-noise estimators and `|y_j|` for the non-symmetric and
//! Collier estimators. A [`ThresholdRule`] captures one such configuration
//! with its threshold per unit noise level, so the expensive threshold solve
//! runs once per configuration rather than once per observation vector.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;

use crate::loading::LoadingVector;
use crate::math::{lower_median, CompensatedSum};
use crate::rates::{j3_index, oracle_rate, AdaptiveRates, RateProfile};
use crate::rng::stream_rng;
use crate::threshold::check_sparsity;
use crate::{Error, Result};

/// Noise level of the observations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Sigma {
    Known(f64),
    Unknown,
}

impl Sigma {
    fn known(self) -> Result<f64> {
        match self {
            Sigma::Known(s) => Ok(s),
            Sigma::Unknown => Err(Error::Precondition(
                "this estimator needs a known noise level".into(),
            )),
        }
    }
}

/// Observations `y_j = θ_j + σ ξ_j` in the loading's original coordinate order,
/// plus the noise description.
#[derive(Debug, Clone, Copy)]
pub struct EstimationInput<'a> {
    pub y: &'a [f64],
    pub loading: &'a LoadingVector,
    pub alpha: f64,
    pub tau: f64,
    pub sigma: Sigma,
    /// Threshold multiplier; 1 by default.
    pub kappa: f64,
}

impl<'a> EstimationInput<'a> {
    pub fn new(
        y: &'a [f64],
        loading: &'a LoadingVector,
        alpha: f64,
        tau: f64,
        sigma: Sigma,
    ) -> Result<Self> {
        let input = Self {
            y,
            loading,
            alpha,
            tau,
            sigma,
            kappa: 1.0,
        };
        input.validate()?;
        Ok(input)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = kappa;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.y.len() != self.loading.len() {
            return Err(Error::Precondition(alloc::format!(
                "{} observations for a loading of dimension {}",
                self.y.len(),
                self.loading.len()
            )));
        }
        if let Some(j) = self.y.iter().position(|v| !v.is_finite()) {
            return Err(Error::param("y", alloc::format!("entry {j} is not finite")));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::param("alpha", "must be finite and positive"));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::param("tau", "must be finite and positive"));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::param("kappa", "must be finite and positive"));
        }
        if let Sigma::Known(s) = self.sigma {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::param("sigma", "must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Variant {
    Oracle,
    Family,
    Adaptive,
    Nonsym,
    UnknownSigma,
    Collier,
    PlugIn,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Oracle,
        Variant::Family,
        Variant::Adaptive,
        Variant::Nonsym,
        Variant::UnknownSigma,
        Variant::Collier,
        Variant::PlugIn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Oracle => "oracle",
            Variant::Family => "family",
            Variant::Adaptive => "adaptive",
            Variant::Nonsym => "nonsym",
            Variant::UnknownSigma => "unknown-sigma",
            Variant::Collier => "collier",
            Variant::PlugIn => "plug-in",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::param("variant", String::from(s)))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EstimateResult {
    pub value: f64,
    pub s_used: usize,
    /// Threshold applied to the statistic of the non-plug-in coordinates.
    pub threshold: f64,
    /// Surviving coordinates (plug-in ones included), 0-based in the caller's
    /// original order, ascending.
    pub kept_indices: Vec<usize>,
    pub variant: Variant,
}

/// What a rule compares against its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// `|η_j y_j|`.
    Weighted,
    /// `|y_j|`.
    Raw,
}

/// A fully specified thresholding estimator: keep sorted positions
/// `k < cutoff`, keep the rest when `statistic > level · σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRule {
    pub variant: Variant,
    pub s_used: usize,
    pub cutoff: usize,
    /// Threshold per unit of noise level.
    pub level: f64,
    pub statistic: Statistic,
}

impl ThresholdRule {
    pub fn plug_in(loading: &LoadingVector, variant: Variant, s_used: usize) -> Self {
        Self {
            variant,
            s_used,
            cutoff: loading.len(),
            level: 0.0,
            statistic: Statistic::Weighted,
        }
    }

    /// Value only, without allocating the kept set.
    pub fn value(&self, loading: &LoadingVector, y: &[f64], sigma: f64) -> f64 {
        let thr = self.level * sigma;
        let mut acc = CompensatedSum::new();
        for (k, (&i, &eta)) in loading.order().iter().zip(loading.values()).enumerate() {
            let p = eta * y[i];
            if k < self.cutoff || self.exceeds(p, y[i], thr) {
                acc.add(p);
            }
        }
        acc.value()
    }

    #[inline]
    fn exceeds(&self, weighted: f64, raw: f64, thr: f64) -> bool {
        match self.statistic {
            Statistic::Weighted => weighted.abs() > thr,
            Statistic::Raw => raw.abs() > thr,
        }
    }

    pub fn apply(&self, loading: &LoadingVector, y: &[f64], sigma: f64) -> EstimateResult {
        let thr = self.level * sigma;
        let mut acc = CompensatedSum::new();
        let mut kept = Vec::new();
        for (k, (&i, &eta)) in loading.order().iter().zip(loading.values()).enumerate() {
            let p = eta * y[i];
            if k < self.cutoff || self.exceeds(p, y[i], thr) {
                acc.add(p);
                kept.push(i);
            }
        }
        kept.sort_unstable();
        EstimateResult {
            value: acc.value(),
            s_used: self.s_used,
            threshold: if self.cutoff >= loading.len() {
                0.0
            } else {
                thr
            },
            kept_indices: kept,
            variant: self.variant,
        }
    }
}

/// Rule of the oracle estimator: plug-in over `j ≤ j₁(s)`, threshold
/// `κ τ λ_o(s)` on `|η_j y_j|` elsewhere.
pub fn oracle_rule(
    loading: &LoadingVector,
    alpha: f64,
    tau: f64,
    kappa: f64,
    s: usize,
) -> Result<(ThresholdRule, RateProfile)> {
    let p = oracle_rate(loading, alpha, s)?;
    Ok((
        ThresholdRule {
            variant: Variant::Oracle,
            s_used: s,
            cutoff: p.j1,
            level: kappa * tau * p.lambda_o,
            statistic: Statistic::Weighted,
        },
        p,
    ))
}

/// Rule of the non-adaptive family member at `s`, built from precomputed
/// adaptive levels. Beyond `s₀` it is the plug-in estimator.
pub fn family_rule(rates: &AdaptiveRates, tau: f64, kappa: f64, s: usize) -> ThresholdRule {
    let level = rates.level(s);
    ThresholdRule {
        variant: Variant::Family,
        s_used: s,
        cutoff: level.j2,
        level: kappa * tau * level.lambda,
        statistic: Statistic::Weighted,
    }
}

/// `τ 4^{1/α}`, the default constant of the non-symmetric threshold.
pub fn default_c_h(alpha: f64, tau: f64) -> f64 {
    tau * libm::pow(4.0, 1.0 / alpha)
}

/// Rule of the non-symmetric estimator: plug-in over `j ≤ j₃(s)`, threshold
/// `c_H log^{1/α}(ed/s)` on `|y_j|` elsewhere.
pub fn nonsymmetric_rule(
    loading: &LoadingVector,
    alpha: f64,
    tau: f64,
    s: usize,
    c_h: Option<f64>,
) -> Result<ThresholdRule> {
    let d = loading.len();
    check_sparsity(s, d)?;
    let c_h = c_h.unwrap_or_else(|| default_c_h(alpha, tau));
    if !(c_h.is_finite() && c_h > 0.0) {
        return Err(Error::param("c_h", "must be finite and positive"));
    }
    let l = 1.0 + libm::log(d as f64 / s as f64);
    Ok(ThresholdRule {
        variant: Variant::Nonsym,
        s_used: s,
        cutoff: j3_index(d, s, alpha),
        level: c_h * libm::pow(l, 1.0 / alpha),
        statistic: Statistic::Raw,
    })
}

/// Rule of the homogeneous-loading baseline: threshold `√(2 log(1 + d/s²))`
/// on `|y_j|` when `s < √d`, plug-in otherwise.
pub fn collier_rule(loading: &LoadingVector, s: usize) -> Result<ThresholdRule> {
    if !loading.is_homogeneous() {
        return Err(Error::Precondition(
            "the collier estimator requires a homogeneous (all-ones) loading".into(),
        ));
    }
    let d = loading.len();
    check_sparsity(s, d)?;
    let sf = s as f64;
    let df = d as f64;
    if sf * sf >= df {
        return Ok(ThresholdRule::plug_in(loading, Variant::Collier, s));
    }
    Ok(ThresholdRule {
        variant: Variant::Collier,
        s_used: s,
        cutoff: 0,
        level: libm::sqrt(2.0 * libm::log1p(df / (sf * sf))),
        statistic: Statistic::Raw,
    })
}

pub fn oracle_estimate(input: &EstimationInput<'_>, s: usize) -> Result<EstimateResult> {
    input.validate()?;
    let sigma = input.sigma.known()?;
    let (rule, _) = oracle_rule(input.loading, input.alpha, input.tau, input.kappa, s)?;
    Ok(rule.apply(input.loading, input.y, sigma))
}

/// The summed observations `Σ η_j y_j`.
pub fn plug_in_estimate(input: &EstimationInput<'_>, s: usize) -> Result<EstimateResult> {
    input.validate()?;
    Ok(
        ThresholdRule::plug_in(input.loading, Variant::PlugIn, s).apply(
            input.loading,
            input.y,
            0.0,
        ),
    )
}

pub fn collier_estimate(input: &EstimationInput<'_>, s: usize) -> Result<EstimateResult> {
    input.validate()?;
    let sigma = input.sigma.known()?;
    Ok(collier_rule(input.loading, s)?.apply(input.loading, input.y, sigma))
}

pub fn family_estimate(input: &EstimationInput<'_>, s: usize) -> Result<EstimateResult> {
    input.validate()?;
    let sigma = input.sigma.known()?;
    check_sparsity(s, input.loading.len())?;
    let rates = AdaptiveRates::new(input.loading, input.alpha)?;
    Ok(family_rule(&rates, input.tau, input.kappa, s).apply(input.loading, input.y, sigma))
}

pub fn nonsymmetric_estimate(
    input: &EstimationInput<'_>,
    s: usize,
    c_h: Option<f64>,
) -> Result<EstimateResult> {
    input.validate()?;
    let sigma = input.sigma.known()?;
    Ok(
        nonsymmetric_rule(input.loading, input.alpha, input.tau, s, c_h)?.apply(
            input.loading,
            input.y,
            sigma,
        ),
    )
}

/// Outcome of Lepski selection with its diagnostic table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LepskiSelection {
    pub s_hat: usize,
    /// `L̂*_s` for `s = 1, …, s₀`.
    pub estimates: Vec<f64>,
    /// `ω_s = √(ζ σ² Φ_adp(s))` for `s = 1, …, s₀`.
    pub omegas: Vec<f64>,
}

/// Lepski-type adaptive estimator, prepared for one `(η, α, τ, κ, ζ)`.
#[derive(Debug, Clone)]
pub struct Lepski {
    rates: AdaptiveRates,
    rules: Vec<ThresholdRule>,
    sqrt_phi_adp: Vec<f64>,
    zeta: f64,
}

/// `1000` for `α ≥ 2`, `10⁴` otherwise.
pub fn default_zeta(alpha: f64) -> f64 {
    if alpha >= 2.0 {
        1e3
    } else {
        1e4
    }
}

impl Lepski {
    pub fn new(
        loading: &LoadingVector,
        alpha: f64,
        tau: f64,
        kappa: f64,
        zeta: f64,
    ) -> Result<Self> {
        if !(zeta.is_finite() && zeta > 0.0) {
            return Err(Error::param("zeta", "must be finite and positive"));
        }
        let rates = AdaptiveRates::new(loading, alpha)?;
        Ok(Self::from_rates(rates, tau, kappa, zeta))
    }

    pub fn from_rates(rates: AdaptiveRates, tau: f64, kappa: f64, zeta: f64) -> Self {
        let s0 = rates.s0();
        let rules = (1..=s0)
            .map(|s| family_rule(&rates, tau, kappa, s))
            .collect();
        let sqrt_phi_adp = (1..=s0).map(|s| libm::sqrt(rates.phi_adp(s))).collect();
        Self {
            rates,
            rules,
            sqrt_phi_adp,
            zeta,
        }
    }

    pub fn rates(&self) -> &AdaptiveRates {
        &self.rates
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Smallest `s ∈ [1, s_*]` whose estimate lies within `ω_{s'}` of every
    /// `L̂*_{s'}`, `s < s' ≤ s₀`; `s₀` when there is none. Comparisons beyond
    /// `s₀` are implied since the family is constant there.
    pub fn select(&self, loading: &LoadingVector, y: &[f64], sigma: f64) -> LepskiSelection {
        let estimates: Vec<f64> = self
            .rules
            .iter()
            .map(|r| r.value(loading, y, sigma))
            .collect();
        let scale = libm::sqrt(self.zeta) * sigma;
        let omegas: Vec<f64> = self.sqrt_phi_adp.iter().map(|p| scale * p).collect();
        let s0 = estimates.len();
        // Scan downward keeping the intersection of [L̂_{s'} - ω_{s'}, L̂_{s'} + ω_{s'}].
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let mut s_hat = s0;
        for s in (1..s0).rev() {
            let k = s; // index of s + 1
            lo = lo.max(estimates[k] - omegas[k]);
            hi = hi.min(estimates[k] + omegas[k]);
            let v = estimates[s - 1];
            if v >= lo && v <= hi {
                s_hat = s;
            }
        }
        LepskiSelection {
            s_hat,
            estimates,
            omegas,
        }
    }

    pub fn estimate(&self, loading: &LoadingVector, y: &[f64], sigma: f64) -> EstimateResult {
        let sel = self.select(loading, y, sigma);
        let mut r = self.rules[sel.s_hat - 1].apply(loading, y, sigma);
        r.variant = Variant::Adaptive;
        r
    }
}

pub fn lepski_select(input: &EstimationInput<'_>, zeta: f64) -> Result<LepskiSelection> {
    input.validate()?;
    let sigma = input.sigma.known()?;
    let l = Lepski::new(input.loading, input.alpha, input.tau, input.kappa, zeta)?;
    Ok(l.select(input.loading, input.y, sigma))
}

pub fn adaptive_estimate(input: &EstimationInput<'_>, zeta: f64) -> Result<EstimateResult> {
    input.validate()?;
    let sigma = input.sigma.known()?;
    let l = Lepski::new(input.loading, input.alpha, input.tau, input.kappa, zeta)?;
    Ok(l.estimate(input.loading, input.y, sigma))
}

/// Number of median-of-means blocks, `⌊γ d⌋`.
pub fn mom_blocks(d: usize, gamma_split: f64) -> Result<usize> {
    if !(gamma_split > 0.0 && gamma_split <= 0.5) {
        return Err(Error::param("gamma_split", "must lie in (0, 1/2]"));
    }
    let m = libm::floor(gamma_split * d as f64) as usize;
    if d < 2 || m == 0 {
        return Err(Error::Precondition(alloc::format!(
            "median of means needs d >= 2 and floor(gamma * d) >= 1 (d = {d}, gamma = {gamma_split})"
        )));
    }
    Ok(m)
}

/// Median over `m` contiguous blocks of the block means of `y_j²`. The first
/// `d mod m` blocks hold one extra element; for even `m` the lower middle
/// value is taken.
pub fn mom_sigma_blocks(y: &[f64], m: usize) -> Result<f64> {
    let d = y.len();
    if m == 0 || m > d {
        return Err(Error::param(
            "blocks",
            alloc::format!("{m} blocks for {d} values"),
        ));
    }
    let base = d / m;
    let extra = d % m;
    let mut means = Vec::with_capacity(m);
    let mut start = 0;
    for b in 0..m {
        let len = base + usize::from(b < extra);
        let block = &y[start..start + len];
        let s = crate::math::sum(block.iter().map(|v| v * v));
        means.push(s / len as f64);
        start += len;
    }
    Ok(lower_median(&mut means))
}

/// Median-of-means estimate `σ̂²` with `⌊γ d⌋` blocks.
pub fn mom_sigma(y: &[f64], gamma_split: f64) -> Result<f64> {
    mom_sigma_blocks(y, mom_blocks(y.len(), gamma_split)?)
}

/// As [`mom_sigma`] after a seeded permutation of the observations.
pub fn mom_sigma_shuffled(y: &[f64], gamma_split: f64, seed: u64) -> Result<f64> {
    let m = mom_blocks(y.len(), gamma_split)?;
    let mut v = y.to_vec();
    v.shuffle(&mut stream_rng(seed, &[]));
    mom_sigma_blocks(&v, m)
}

/// Oracle estimator with `σ` replaced by the median-of-means estimate and the
/// threshold inflated by `√2`.
#[derive(Debug, Clone)]
pub struct UnknownSigma {
    rule: ThresholdRule,
    blocks: usize,
}

impl UnknownSigma {
    pub fn new(
        loading: &LoadingVector,
        alpha: f64,
        tau: f64,
        kappa: f64,
        s: usize,
        gamma_split: f64,
    ) -> Result<Self> {
        let blocks = mom_blocks(loading.len(), gamma_split)?;
        if 4 * s >= blocks {
            log::warn!(
                "s = {s} is not below floor(gamma * d)/4 = {}; the median-of-means level may be contaminated",
                blocks as f64 / 4.0
            );
        }
        let (mut rule, _) = oracle_rule(loading, alpha, tau, kappa, s)?;
        rule.variant = Variant::UnknownSigma;
        rule.level *= core::f64::consts::SQRT_2;
        Ok(Self { rule, blocks })
    }

    /// Estimate together with `σ̂²`.
    pub fn estimate(&self, loading: &LoadingVector, y: &[f64]) -> Result<(EstimateResult, f64)> {
        let sigma2 = mom_sigma_blocks(y, self.blocks)?;
        Ok((self.rule.apply(loading, y, libm::sqrt(sigma2)), sigma2))
    }
}

pub fn unknown_sigma_estimate(
    input: &EstimationInput<'_>,
    s: usize,
    gamma_split: f64,
) -> Result<EstimateResult> {
    input.validate()?;
    let est = UnknownSigma::new(
        input.loading,
        input.alpha,
        input.tau,
        input.kappa,
        s,
        gamma_split,
    )?;
    Ok(est.estimate(input.loading, input.y)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TestOutcome {
    /// 1 rejects `L(θ) = t₀`.
    pub decision: u8,
    /// `|L̂_s - t₀|`.
    pub statistic: f64,
    /// `B σ √Φ_o(s)`.
    pub threshold: f64,
}

/// The test `1{|L̂_s - t₀| > B σ √Φ_o(s)}`, prepared for one configuration.
#[derive(Debug, Clone)]
pub struct LinearTest {
    rule: ThresholdRule,
    sqrt_phi_o: f64,
    b: f64,
}

impl LinearTest {
    pub fn new(
        loading: &LoadingVector,
        alpha: f64,
        tau: f64,
        kappa: f64,
        s: usize,
        b: f64,
    ) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::param("B", "must be finite and positive"));
        }
        if s == 1 {
            log::warn!("the linear test is analysed for s >= 2; running with s = 1");
        }
        let (rule, p) = oracle_rule(loading, alpha, tau, kappa, s)?;
        Ok(Self {
            rule,
            sqrt_phi_o: libm::sqrt(p.phi_o),
            b,
        })
    }

    pub fn with_b(&self, b: f64) -> Self {
        Self { b, ..self.clone() }
    }

    pub fn run(&self, loading: &LoadingVector, y: &[f64], sigma: f64, t0: f64) -> TestOutcome {
        let statistic = (self.rule.value(loading, y, sigma) - t0).abs();
        let threshold = self.b * sigma * self.sqrt_phi_o;
        TestOutcome {
            decision: u8::from(statistic > threshold),
            statistic,
            threshold,
        }
    }
}

pub fn linear_test(input: &EstimationInput<'_>, s: usize, t0: f64, b: f64) -> Result<TestOutcome> {
    input.validate()?;
    let sigma = input.sigma.known()?;
    let t = LinearTest::new(input.loading, input.alpha, input.tau, input.kappa, s, b)?;
    Ok(t.run(input.loading, input.y, sigma, t0))
}
