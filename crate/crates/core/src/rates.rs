//! Rate functionals and index cutoffs.
//!
//! For a loading vector `η` (sorted by decreasing magnitude), noise index `α`
//! and sparsity `s`:
//!
//! - oracle: `β` solves `φ(β) = s/2`, `λ_o = β₊^{1/α}`,
//!   `ν² = Σ η_j² exp(-(λ_o/|η_j|)^α)`, `j₁ = #{j : |η_j| ≥ λ_o}` and
//!   `Φ_o = (λ_o s + ν)²`;
//! - adaptive: `β_*` solves `φ(β) = s/(2√log(es))`,
//!   `ν_*² = log(es) Σ η_j² exp(-(λ_*/|η_j|)^α)`, `Φ_* = s²λ_*² + ν_*²` up to
//!   `s₀ = s_* + 1` where `s_*` is the last `s` with `λ_*(s) > 0`, constant after;
//!   `Φ_adp` adds the floor `Φ_*(1) log²(e(s ∧ s₀))` when `α < 2`.

use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use crate::loading::LoadingVector;
use crate::threshold::{
    adaptive_target, check_sparsity, lambda_from_beta, Equation, PhiObjective, ThresholdSolution,
    Tolerances,
};
use crate::{Error, Result};

/// Oracle rate quantities at one sparsity level.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RateProfile {
    pub s: usize,
    pub alpha: f64,
    pub beta: f64,
    pub lambda_o: f64,
    pub nu: f64,
    pub j1: usize,
    pub phi_o: f64,
}

/// Number of leading (sorted) loadings with `|η_j| ≥ lambda`; ties count.
pub fn count_at_least(loading: &LoadingVector, lambda: f64) -> usize {
    loading.values().partition_point(|v| v.abs() >= lambda)
}

fn nu_from(obj: &PhiObjective, beta: f64) -> f64 {
    libm::exp(0.5 * obj.log_energy(beta.max(0.0)))
}

impl RateProfile {
    fn from_solution(
        obj: &PhiObjective,
        loading: &LoadingVector,
        s: usize,
        sol: &ThresholdSolution,
    ) -> Self {
        let nu = nu_from(obj, sol.beta);
        let lambda_o = sol.lambda;
        let t = lambda_o * s as f64 + nu;
        Self {
            s,
            alpha: obj.alpha(),
            beta: sol.beta,
            lambda_o,
            nu,
            j1: count_at_least(loading, lambda_o),
            phi_o: t * t,
        }
    }
}

/// Oracle rate profile with default tolerances.
pub fn oracle_rate(loading: &LoadingVector, alpha: f64, s: usize) -> Result<RateProfile> {
    oracle_rate_with(loading, alpha, s, &Tolerances::default())
}

pub fn oracle_rate_with(
    loading: &LoadingVector,
    alpha: f64,
    s: usize,
    tol: &Tolerances,
) -> Result<RateProfile> {
    check_sparsity(s, loading.len())?;
    let obj = PhiObjective::new(loading, alpha)?;
    let sol = obj.solve(s as f64 / 2.0, tol, Equation::Oracle)?;
    Ok(RateProfile::from_solution(&obj, loading, s, &sol))
}

/// `(λ_o² s², Σ_{j ≤ j₁} η_j²)`, the two pieces of the alternative expression
/// of the oracle rate.
pub fn oracle_rate_decomposed(loading: &LoadingVector, alpha: f64, s: usize) -> Result<(f64, f64)> {
    let p = oracle_rate(loading, alpha, s)?;
    let ls = p.lambda_o * s as f64;
    Ok((ls * ls, loading.head_energy(p.j1)))
}

/// Adaptive quantities at one sparsity level.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StarLevel {
    pub s: usize,
    pub beta: f64,
    pub lambda: f64,
    pub nu: f64,
    pub j2: usize,
    /// `s² λ_*² + ν_*²`.
    pub phi_star: f64,
}

fn star_level(
    obj: &PhiObjective,
    loading: &LoadingVector,
    s: usize,
    tol: &Tolerances,
    hint: Option<f64>,
) -> Result<StarLevel> {
    let target = adaptive_target(s as f64);
    let sol = match hint {
        Some(h) => obj.solve_near(target, tol, Equation::Adaptive, h)?,
        None => obj.solve(target, tol, Equation::Adaptive)?,
    };
    let log_es = 1.0 + libm::log(s as f64);
    let nu = libm::sqrt(log_es) * nu_from(obj, sol.beta);
    let sl = s as f64 * sol.lambda;
    Ok(StarLevel {
        s,
        beta: sol.beta,
        lambda: sol.lambda,
        nu,
        j2: count_at_least(loading, sol.lambda),
        phi_star: sl * sl + nu * nu,
    })
}

/// Largest `s ∈ [1, d]` with `λ_*(s) > 0`, by binary search on the monotone
/// map `s ↦ λ_*(s)`. `λ_*(1) > 0` always holds because `φ(0) ≥ 1 > 1/2`.
fn find_s_star(obj: &PhiObjective, d: usize, tol: &Tolerances) -> Result<usize> {
    let positive = |s: usize| -> Result<bool> {
        Ok(obj
            .solve(adaptive_target(s as f64), tol, Equation::Adaptive)?
            .lambda
            > 0.0)
    };
    if positive(d)? {
        return Ok(d);
    }
    if !positive(1)? {
        return Ok(0);
    }
    // Invariant: positive(lo), !positive(hi).
    let (mut lo, mut hi) = (1usize, d);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Adaptive rate profile at a single `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AdaptiveRateProfile {
    pub s: usize,
    pub alpha: f64,
    pub beta_star: f64,
    pub lambda_star: f64,
    pub nu_star: f64,
    pub j2: usize,
    pub s_star: usize,
    pub s0: usize,
    pub phi_star: f64,
    pub phi_adp: f64,
}

fn phi_adp_from(alpha: f64, s_clipped: usize, phi_star_s: f64, phi_star_1: f64) -> f64 {
    if alpha < 2.0 {
        let l = 1.0 + libm::log(s_clipped as f64);
        phi_star_s.max(phi_star_1 * l * l)
    } else {
        phi_star_s
    }
}

/// Adaptive rate profile at `s` with default tolerances. Costs `O(log d)` solves.
pub fn adaptive_rate(loading: &LoadingVector, alpha: f64, s: usize) -> Result<AdaptiveRateProfile> {
    adaptive_rate_with(loading, alpha, s, &Tolerances::default())
}

pub fn adaptive_rate_with(
    loading: &LoadingVector,
    alpha: f64,
    s: usize,
    tol: &Tolerances,
) -> Result<AdaptiveRateProfile> {
    let d = loading.len();
    check_sparsity(s, d)?;
    let obj = PhiObjective::new(loading, alpha)?;
    let s_star = find_s_star(&obj, d, tol)?;
    let s0 = s_star + 1;
    let sc = s.min(s0);
    let level = star_level(&obj, loading, sc, tol, None)?;
    let first = if sc == 1 {
        level
    } else {
        star_level(&obj, loading, 1, tol, None)?
    };
    Ok(AdaptiveRateProfile {
        s,
        alpha,
        beta_star: level.beta,
        lambda_star: level.lambda,
        nu_star: level.nu,
        j2: level.j2,
        s_star,
        s0,
        phi_star: level.phi_star,
        phi_adp: phi_adp_from(alpha, sc, level.phi_star, first.phi_star),
    })
}

/// All adaptive levels `s = 1, …, s₀` of one `(η, α)`, as needed by Lepski
/// selection. When `s₀ = d + 1` the last stored level lies outside `[1, d]`.
#[derive(Debug, Clone)]
pub struct AdaptiveRates {
    alpha: f64,
    d: usize,
    s_star: usize,
    levels: Vec<StarLevel>,
}

impl AdaptiveRates {
    pub fn new(loading: &LoadingVector, alpha: f64) -> Result<Self> {
        Self::with_tolerances(loading, alpha, &Tolerances::default())
    }

    pub fn with_tolerances(loading: &LoadingVector, alpha: f64, tol: &Tolerances) -> Result<Self> {
        let d = loading.len();
        let obj = PhiObjective::new(loading, alpha)?;
        let s_star = find_s_star(&obj, d, tol)?;
        // Neighbouring levels have nearby roots; each solve starts from the last.
        let mut levels: Vec<StarLevel> = Vec::with_capacity(s_star + 1);
        for s in 1..=s_star + 1 {
            let hint = levels.last().map(|l| l.beta);
            levels.push(star_level(&obj, loading, s, tol, hint)?);
        }
        Ok(Self {
            alpha,
            d,
            s_star,
            levels,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn s_star(&self) -> usize {
        self.s_star
    }

    pub fn s0(&self) -> usize {
        self.s_star + 1
    }

    /// Largest sparsity at which the family estimator needs to be evaluated,
    /// `min(s₀, d)`.
    pub fn s_max(&self) -> usize {
        self.s0().min(self.d)
    }

    /// Level at `min(s, s₀)`. Panics for `s = 0`.
    pub fn level(&self, s: usize) -> &StarLevel {
        assert!(s >= 1, "sparsity levels start at 1");
        &self.levels[s.min(self.s0()) - 1]
    }

    pub fn levels(&self) -> &[StarLevel] {
        &self.levels
    }

    pub fn phi_star(&self, s: usize) -> f64 {
        self.level(s).phi_star
    }

    pub fn phi_adp(&self, s: usize) -> f64 {
        let sc = s.min(self.s0());
        phi_adp_from(self.alpha, sc, self.phi_star(sc), self.phi_star(1))
    }

    pub fn profile(&self, s: usize) -> AdaptiveRateProfile {
        let l = self.level(s);
        AdaptiveRateProfile {
            s,
            alpha: self.alpha,
            beta_star: l.beta,
            lambda_star: l.lambda,
            nu_star: l.nu,
            j2: l.j2,
            s_star: self.s_star,
            s0: self.s0(),
            phi_star: l.phi_star,
            phi_adp: self.phi_adp(s),
        }
    }

    /// Worst constants `(K₁, K₂)` over `1 ≤ s ≤ s' ≤ s₀` in
    /// `Φ_*(s)/log(es) ≤ K₁ Φ_*(s')/log(es')` and
    /// `Φ_*(s')/(s'² log(es')) ≤ K₂ Φ_*(s)/(s² log(es))`.
    pub fn almost_monotone_constants(&self) -> (f64, f64) {
        let mut k1: f64 = 1.0;
        let mut k2: f64 = 1.0;
        let mut max_f = f64::NEG_INFINITY;
        let mut min_g = f64::INFINITY;
        for l in &self.levels {
            let s = l.s as f64;
            let log_es = 1.0 + libm::log(s);
            let f = l.phi_star / log_es;
            let g = l.phi_star / (s * s * log_es);
            max_f = max_f.max(f);
            min_g = min_g.min(g);
            k1 = k1.max(max_f / f);
            k2 = k2.max(g / min_g);
        }
        (k1, k2)
    }
}

/// `⌈s² log^{2/α}(ed/s)⌉ ∧ d`.
pub fn j3_index(d: usize, s: usize, alpha: f64) -> usize {
    let sf = s as f64;
    let l = 1.0 + libm::log(d as f64 / sf);
    let v = libm::ceil(sf * sf * libm::pow(l, 2.0 / alpha));
    if v >= d as f64 {
        d
    } else {
        v as usize
    }
}

/// The explicit rate expressions of the example loading families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ClosedFormKind {
    HomogeneousOracle,
    HomogeneousAdaptive,
    TwoPhaseOracle,
    TwoPhaseAdaptive,
    ExpDecayOracle,
    ExpDecayAdaptive,
}

impl ClosedFormKind {
    pub const ALL: [ClosedFormKind; 6] = [
        ClosedFormKind::HomogeneousOracle,
        ClosedFormKind::HomogeneousAdaptive,
        ClosedFormKind::TwoPhaseOracle,
        ClosedFormKind::TwoPhaseAdaptive,
        ClosedFormKind::ExpDecayOracle,
        ClosedFormKind::ExpDecayAdaptive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClosedFormKind::HomogeneousOracle => "homogeneous_oracle",
            ClosedFormKind::HomogeneousAdaptive => "homogeneous_adaptive",
            ClosedFormKind::TwoPhaseOracle => "two_phase_oracle",
            ClosedFormKind::TwoPhaseAdaptive => "two_phase_adaptive",
            ClosedFormKind::ExpDecayOracle => "exp_decay_oracle",
            ClosedFormKind::ExpDecayAdaptive => "exp_decay_adaptive",
        }
    }
}

impl FromStr for ClosedFormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::param("example_kind", String::from(s)))
    }
}

/// Parameters of [`closed_form_rate`]; fields a kind does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormParams {
    pub d: usize,
    pub alpha: f64,
    pub gamma_d: f64,
    pub gamma_lambda: f64,
    /// Effective dimension for the exponentially decaying family.
    pub j0: usize,
}

impl ClosedFormParams {
    pub fn new(d: usize, alpha: f64) -> Self {
        Self {
            d,
            alpha,
            gamma_d: 0.0,
            gamma_lambda: 0.0,
            j0: d,
        }
    }
}

// s² log^{2/α}(1 + m^{α/2} g / s^α), the shape shared by every closed form.
fn shape(m: f64, s: f64, alpha: f64, g: f64) -> f64 {
    let inner = libm::log1p(libm::pow(m, alpha / 2.0) * g / libm::pow(s, alpha));
    s * s * libm::pow(inner, 2.0 / alpha)
}

/// Evaluates the explicit rate of an example family at sparsity `s`, up to
/// the unstated multiplicative constants. Two-phase rates use the sum of the
/// two sub-vector rates, which is valid on both sides of the phase transition.
pub fn closed_form_rate(kind: ClosedFormKind, p: &ClosedFormParams, s: f64) -> Result<f64> {
    if !(s.is_finite() && s >= 1.0) {
        return Err(Error::param("s", "must be at least 1"));
    }
    if !(p.alpha.is_finite() && p.alpha > 0.0) {
        return Err(Error::param("alpha", "must be finite and positive"));
    }
    if p.d == 0 {
        return Err(Error::param("d", "must be positive"));
    }
    let a = p.alpha;
    let d = p.d as f64;
    let adapt = libm::pow(1.0 + libm::log(s), a / 2.0);
    let two_phase = |g: f64| {
        let lam2 = libm::pow(d, 2.0 * p.gamma_lambda);
        let d0 = libm::pow(d, p.gamma_d);
        lam2 * shape(d0, s, a, g) + shape(d, s, a, g)
    };
    Ok(match kind {
        ClosedFormKind::HomogeneousOracle => shape(d, s, a, 1.0),
        ClosedFormKind::HomogeneousAdaptive => shape(d, s, a, adapt),
        ClosedFormKind::TwoPhaseOracle => two_phase(1.0),
        ClosedFormKind::TwoPhaseAdaptive => two_phase(adapt),
        ClosedFormKind::ExpDecayOracle => shape(p.j0 as f64, s, a, 1.0),
        ClosedFormKind::ExpDecayAdaptive => shape(p.j0 as f64, s, a, adapt),
    })
}

/// Ratios bearing on the growth condition of the loading vector.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AssumptionDiagnostic {
    pub s_cut: usize,
    pub gamma0: f64,
    /// `max_{s ≤ s_cut} Φ_adp(s)/Φ_o(s)` and its argmax.
    pub max_adp_over_oracle: f64,
    pub argmax_s: usize,
    /// `min_{s ≥ s_cut} Φ_adp(s)/(Φ_o(1) (s ∧ s₀)^{γ₀})` and its argmin.
    pub min_growth_ratio: f64,
    pub argmin_s: usize,
}

/// Computes the two growth-condition ratios. No pass/fail is decided here.
pub fn check_assumption(
    loading: &LoadingVector,
    alpha: f64,
    s_cut: usize,
    gamma0: f64,
) -> Result<AssumptionDiagnostic> {
    let d = loading.len();
    check_sparsity(s_cut, d)?;
    if !(gamma0 > 0.0 && gamma0 < 2.0) {
        return Err(Error::param("gamma0", "must lie in (0, 2)"));
    }
    let tol = Tolerances::default();
    let rates = AdaptiveRates::with_tolerances(loading, alpha, &tol)?;
    let obj = PhiObjective::new(loading, alpha)?;
    let oracle = |s: usize| -> Result<f64> {
        let sol = obj.solve(s as f64 / 2.0, &tol, Equation::Oracle)?;
        Ok(RateProfile::from_solution(&obj, loading, s, &sol).phi_o)
    };
    let mut max_first = f64::NEG_INFINITY;
    let mut argmax_s = 1;
    for s in 1..=s_cut {
        let r = rates.phi_adp(s) / oracle(s)?;
        if r > max_first {
            max_first = r;
            argmax_s = s;
        }
    }
    // Beyond s₀ the ratio is constant, so the search stops there.
    let phi_o1 = oracle(1)?;
    let upper = rates.s_max().max(s_cut);
    let mut min_second = f64::INFINITY;
    let mut argmin_s = s_cut;
    for s in s_cut..=upper {
        let sc = s.min(rates.s0()) as f64;
        let r = rates.phi_adp(s) / (phi_o1 * libm::pow(sc, gamma0));
        if r < min_second {
            min_second = r;
            argmin_s = s;
        }
    }
    Ok(AssumptionDiagnostic {
        s_cut,
        gamma0,
        max_adp_over_oracle: max_first,
        argmax_s,
        min_growth_ratio: min_second,
        argmin_s,
    })
}

/// `β₊^{1/α}` for the oracle equation at a real-valued sparsity, used when a
/// rescaled sparsity such as `s/√log(es)` is needed.
pub fn lambda_at_target(loading: &LoadingVector, alpha: f64, target: f64) -> Result<f64> {
    let obj = PhiObjective::new(loading, alpha)?;
    let sol = obj.solve(target, &Tolerances::default(), Equation::Oracle)?;
    Ok(lambda_from_beta(sol.beta, alpha))
}
