//! Unit-variance noise families and tail-class conformance checks.
//!
//! Class `G(α, τ)` holds symmetric laws with `P(|W| ≥ t) ≤ 2exp(-2(t/τ)^α)`;
//! class `H(α, τ)` drops symmetry and has `P(|W| ≥ t) ≤ 2exp(-(t/τ)^α)`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::math::gamma_ratio;
use crate::rng::{stream_rng, StreamRng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NoiseFamily {
    Gaussian,
    /// `S σ_α G^{1/α}` with a fair sign `S` and `G ~ Gamma(1/α, 1)`; density
    /// proportional to `exp(-|x/σ_α|^α)`.
    SymmWeibull,
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    UniformSym,
    /// `E - 1` with `E` standard exponential. Not symmetric.
    ShiftedExponential,
}

impl NoiseFamily {
    pub fn is_symmetric(self) -> bool {
        !matches!(self, NoiseFamily::ShiftedExponential)
    }

    pub fn name(self) -> &'static str {
        match self {
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::SymmWeibull => "symm_weibull",
            NoiseFamily::Rademacher => "rademacher",
            NoiseFamily::UniformSym => "uniform_sym",
            NoiseFamily::ShiftedExponential => "shifted_exponential",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum NoiseClass {
    G,
    H,
}

/// Tail bound of a class at `t`.
pub fn tail_bound(class: NoiseClass, alpha: f64, tau: f64, t: f64) -> f64 {
    let u = libm::pow(t / tau, alpha);
    match class {
        NoiseClass::G => 2.0 * libm::exp(-2.0 * u),
        NoiseClass::H => 2.0 * libm::exp(-u),
    }
}

/// `σ_α = √(Γ(1/α)/Γ(3/α))`, the scale giving `exp(-|x/σ_α|^α)` unit variance.
pub fn sigma_alpha(alpha: f64) -> f64 {
    libm::sqrt(gamma_ratio(1.0 / alpha, 3.0 / alpha))
}

/// `τ_α = σ_α (1 - 2^{-α})^{-1/α}`.
pub fn minimal_tau(alpha: f64) -> f64 {
    sigma_alpha(alpha) * libm::pow(1.0 - libm::pow(2.0, -alpha), -1.0 / alpha)
}

/// A noise law together with the class it is declared to belong to.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct NoiseModel {
    pub family: NoiseFamily,
    pub alpha: f64,
    pub tau: f64,
    pub class: NoiseClass,
}

impl NoiseModel {
    pub fn new(family: NoiseFamily, alpha: f64, tau: f64, class: NoiseClass) -> Result<Self> {
        let m = Self {
            family,
            alpha,
            tau,
            class,
        };
        m.validate()?;
        Ok(m)
    }

    /// Standard Gaussian declared in `G(2, 2)`.
    pub fn gaussian() -> Self {
        Self {
            family: NoiseFamily::Gaussian,
            alpha: 2.0,
            tau: 2.0,
            class: NoiseClass::G,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::param("alpha", "must be finite and positive"));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::param("tau", "must be finite and positive"));
        }
        if self.class == NoiseClass::G && !self.family.is_symmetric() {
            return Err(Error::param(
                "class",
                alloc::format!(
                    "{} is not symmetric and cannot be declared in class G",
                    self.family.name()
                ),
            ));
        }
        Ok(())
    }

    /// A sampler bound to this model. Constructing it once avoids rebuilding
    /// the gamma distribution per draw.
    pub fn sampler(&self) -> Sampler {
        let inner = match self.family {
            NoiseFamily::Gaussian => Inner::Gaussian,
            NoiseFamily::SymmWeibull => Inner::SymmWeibull {
                gamma: Gamma::new(1.0 / self.alpha, 1.0).expect("shape validated positive"),
                scale: sigma_alpha(self.alpha),
                inv_alpha: 1.0 / self.alpha,
            },
            NoiseFamily::Rademacher => Inner::Rademacher,
            NoiseFamily::UniformSym => Inner::UniformSym,
            NoiseFamily::ShiftedExponential => Inner::ShiftedExponential,
        };
        Sampler { inner }
    }

    /// `n` draws from the stream identified by `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, &[]);
        let sampler = self.sampler();
        (0..n).map(|_| sampler.draw(&mut rng)).collect()
    }

    /// Exact `P(|W| ≥ t)` where it has an elementary closed form.
    pub fn exact_tail(&self, t: f64) -> Option<f64> {
        let t = t.max(0.0);
        match self.family {
            NoiseFamily::Rademacher => Some(if t <= 1.0 { 1.0 } else { 0.0 }),
            NoiseFamily::UniformSym => Some((1.0 - t / libm::sqrt(3.0)).max(0.0)),
            NoiseFamily::Gaussian => Some(libm::erfc(t / libm::sqrt(2.0))),
            NoiseFamily::ShiftedExponential => {
                // P(E ≥ 1 + t) + P(E ≤ 1 - t).
                let upper = libm::exp(-(1.0 + t));
                let lower = if t < 1.0 {
                    -libm::expm1(-(1.0 - t))
                } else {
                    0.0
                };
                Some(upper + lower)
            }
            NoiseFamily::SymmWeibull => None,
        }
    }
}

#[derive(Debug, Clone)]
enum Inner {
    Gaussian,
    SymmWeibull {
        gamma: Gamma<f64>,
        scale: f64,
        inv_alpha: f64,
    },
    Rademacher,
    UniformSym,
    ShiftedExponential,
}

#[derive(Debug, Clone)]
pub struct Sampler {
    inner: Inner,
}

impl Sampler {
    #[inline]
    pub fn draw(&self, rng: &mut StreamRng) -> f64 {
        match &self.inner {
            Inner::Gaussian => StandardNormal.sample(rng),
            Inner::SymmWeibull {
                gamma,
                scale,
                inv_alpha,
            } => {
                let g: f64 = gamma.sample(rng);
                let mag = scale * libm::pow(g, *inv_alpha);
                if rng.random::<bool>() {
                    mag
                } else {
                    -mag
                }
            }
            Inner::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Inner::UniformSym => {
                let r3 = libm::sqrt(3.0);
                rng.random_range(-r3..r3)
            }
            Inner::ShiftedExponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
        }
    }

    pub fn fill(&self, rng: &mut StreamRng, out: &mut [f64]) {
        for x in out {
            *x = self.draw(rng);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TailCheckRow {
    pub t: f64,
    pub empirical: f64,
    pub bound: f64,
    /// `bound - empirical`.
    pub margin: f64,
    /// Binomial standard error of the empirical frequency under the bound.
    pub std_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TailReport {
    pub n: usize,
    pub rows: Vec<TailCheckRow>,
}

impl TailReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Compares empirical exceedance frequencies `P(|W| ≥ t)` against the declared
/// class bound. A row passes when the margin is at least minus three standard
/// errors.
pub fn tail_check(model: &NoiseModel, t_grid: &[f64], n: usize, seed: u64) -> TailReport {
    let draws = model.sample(n, seed);
    let rows = t_grid
        .iter()
        .map(|&t| {
            let hits = draws.iter().filter(|x| x.abs() >= t).count();
            let empirical = hits as f64 / n as f64;
            let bound = tail_bound(model.class, model.alpha, model.tau, t);
            let p = bound.clamp(0.0, 1.0);
            let std_err = libm::sqrt(p * (1.0 - p) / n as f64);
            let margin = bound - empirical;
            TailCheckRow {
                t,
                empirical,
                bound,
                margin,
                std_err,
                pass: margin >= -3.0 * std_err,
            }
        })
        .collect();
    TailReport { n, rows }
}
