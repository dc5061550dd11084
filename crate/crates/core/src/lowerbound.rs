//! The random-sparsity prior behind the minimax lower bound.
//!
//! Coordinate `j` is active independently with probability
//! `π_j = c₁ |η_j| exp(-β₊/|η_j|^α) / ν`, and an active coordinate takes the
//! value `γ_j = C₂ sign(η_j)` on the plug-in block `j ≤ j₁` and
//! `γ_j = C₂ λ_o / η_j` beyond it, so `η_j γ_j = C₂ max(|η_j|, λ_o)`.
//! Because `β` solves `φ(β) = s/2`, `Σ_j π_j = c₁ s / 2` whenever `λ_o > 0`.

use alloc::vec::Vec;

use rand::Rng;

use crate::loading::LoadingVector;
use crate::math::{gamma, sum};
use crate::noise::sigma_alpha;
use crate::rates::{oracle_rate, RateProfile};
use crate::rng::{stream_rng, StreamRng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LeastFavorablePrior {
    /// Activation probabilities, original coordinate order.
    pub pi: Vec<f64>,
    /// Values of active coordinates, original coordinate order.
    pub gamma: Vec<f64>,
    pub c1: f64,
    pub c_alpha2: f64,
    pub s: usize,
    pub alpha: f64,
    pub lambda_o: f64,
    pub nu: f64,
    #[cfg_attr(feature = "serde", serde(skip))]
    log_pi: Vec<f64>,
}

pub fn build_prior(
    loading: &LoadingVector,
    alpha: f64,
    s: usize,
    c1: f64,
    c_alpha2: f64,
) -> Result<LeastFavorablePrior> {
    if !(c1 > 0.0 && c1 < 2.0) {
        return Err(Error::param("c1", "must lie in (0, 2)"));
    }
    if !(c_alpha2.is_finite() && c_alpha2 > 0.0) {
        return Err(Error::param("c_alpha2", "must be finite and positive"));
    }
    let RateProfile {
        beta,
        lambda_o,
        nu,
        j1,
        ..
    } = oracle_rate(loading, alpha, s)?;
    let beta_plus = beta.max(0.0);
    let log_nu = libm::log(nu);
    let d = loading.len();
    let mut pi = alloc::vec![0.0; d];
    let mut log_pi = alloc::vec![0.0; d];
    let mut gam = alloc::vec![0.0; d];
    for (k, (&i, &eta)) in loading.order().iter().zip(loading.values()).enumerate() {
        let a = eta.abs();
        let damp = if beta_plus == 0.0 {
            0.0
        } else {
            beta_plus * libm::exp(-alpha * libm::log(a))
        };
        let lp = libm::log(c1) + libm::log(a) - damp - log_nu;
        let p = libm::exp(lp);
        if p >= 1.0 {
            return Err(Error::Precondition(alloc::format!(
                "activation probability {p} >= 1 at coordinate {i}; c1 = {c1} is too large for this loading"
            )));
        }
        pi[i] = p;
        log_pi[i] = lp;
        gam[i] = if k < j1 {
            c_alpha2 * eta.signum()
        } else {
            c_alpha2 * lambda_o / eta
        };
    }
    Ok(LeastFavorablePrior {
        pi,
        gamma: gam,
        c1,
        c_alpha2,
        s,
        alpha,
        lambda_o,
        nu,
        log_pi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PriorMoments {
    pub mean_support: f64,
    pub var_support: f64,
    pub mean_l: f64,
    pub var_l: f64,
}

impl LeastFavorablePrior {
    /// `(c₁/8) C₂ (λ_o s + ν)`, the level `L(θ)` exceeds with high prior probability.
    pub fn separation_level(&self) -> f64 {
        self.c1 / 8.0 * self.c_alpha2 * (self.lambda_o * self.s as f64 + self.nu)
    }

    pub fn moments(&self, loading: &LoadingVector) -> PriorMoments {
        prior_moments(self, loading)
    }

    /// One draw `θ_j = b_j γ_j`, `b_j ~ Bernoulli(π_j)`, original order.
    pub fn sample_with(&self, rng: &mut StreamRng) -> Vec<f64> {
        self.pi
            .iter()
            .zip(&self.gamma)
            .map(|(&p, &g)| if rng.random::<f64>() < p { g } else { 0.0 })
            .collect()
    }
}

pub fn prior_moments(prior: &LeastFavorablePrior, loading: &LoadingVector) -> PriorMoments {
    let eta = loading.original_values();
    let mean_support = sum(prior.pi.iter().copied());
    let var_support = sum(prior.pi.iter().map(|p| p * (1.0 - p)));
    let mean_l = sum(eta
        .iter()
        .zip(&prior.gamma)
        .zip(&prior.pi)
        .map(|((e, g), p)| e * g * p));
    let var_l = sum(eta
        .iter()
        .zip(&prior.gamma)
        .zip(&prior.pi)
        .map(|((e, g), p)| {
            let eg = e * g;
            eg * eg * p * (1.0 - p)
        }));
    PriorMoments {
        mean_support,
        var_support,
        mean_l,
        var_l,
    }
}

pub fn sample_prior(prior: &LeastFavorablePrior, seed: u64) -> Vec<f64> {
    prior.sample_with(&mut stream_rng(seed, &[]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Chi2Bound {
    /// Upper bound on `1 + χ²` between the two mixtures.
    pub bound: f64,
    /// `√(bound - 1)/2`, the implied total-variation bound.
    pub tv: f64,
}

/// `exp(Σ_j π_j² C₁ exp(|γ_j/C₂|^α))`, evaluated in the log domain so that
/// tiny `π_j` paired with large `γ_j` do not overflow.
pub fn chi2_mixture_bound(prior: &LeastFavorablePrior, c_alpha1: f64) -> Result<Chi2Bound> {
    if !(c_alpha1.is_finite() && c_alpha1 >= 1.0) {
        return Err(Error::param("c_alpha1", "must be at least 1"));
    }
    let log_c1 = libm::log(c_alpha1);
    let exponent = sum(prior.log_pi.iter().zip(&prior.gamma).map(|(&lp, &g)| {
        let u = libm::pow((g / prior.c_alpha2).abs(), prior.alpha);
        libm::exp(2.0 * lp + log_c1 + u)
    }));
    let bound = libm::exp(exponent);
    Ok(Chi2Bound {
        bound,
        tv: 0.5 * libm::sqrt(libm::expm1(exponent)),
    })
}

/// Unit-variance density proportional to `exp(-|x/σ_α|^α)`.
pub fn extremal_density(alpha: f64, x: f64) -> f64 {
    let s = sigma_alpha(alpha);
    libm::exp(-libm::pow((x / s).abs(), alpha)) / (2.0 * s * gamma(1.0 + 1.0 / alpha))
}

/// `1 + χ²(f(· - γ) ‖ f)` for the extremal density, by composite Simpson
/// quadrature split at the kinks `0` and `γ`.
pub fn extremal_chi2_quadrature(alpha: f64, shift: f64) -> f64 {
    let s = sigma_alpha(alpha);
    let norm = 2.0 * s * gamma(1.0 + 1.0 / alpha);
    let integrand = |x: f64| {
        let a = libm::pow(((x - shift) / s).abs(), alpha);
        let b = libm::pow((x / s).abs(), alpha);
        libm::exp(b - 2.0 * a) / norm
    };
    let reach = shift.abs() + 80.0 * s;
    let (lo, hi) = if shift >= 0.0 {
        (0.0, shift)
    } else {
        (shift, 0.0)
    };
    let mut pts = alloc::vec![lo - reach, lo];
    if hi > lo {
        pts.push(hi);
    }
    pts.push(hi + reach);
    pts.windows(2)
        .map(|w| simpson(&integrand, w[0], w[1], 20_000))
        .sum()
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loading::LoadingSpec;
    use approx::assert_relative_eq;

    fn homogeneous(d: usize) -> LoadingVector {
        LoadingVector::from_spec(&LoadingSpec::Homogeneous { d }).unwrap()
    }

    #[test]
    fn homogeneous_fixture() {
        let l = homogeneous(100);
        let p = build_prior(&l, 2.0, 5, 1.0, 1.0).unwrap();
        for &pi in &p.pi {
            assert_relative_eq!(pi, 0.025, epsilon = 1e-10);
        }
        let m = p.moments(&l);
        assert_relative_eq!(m.mean_support, 2.5, epsilon = 1e-8);
        assert_relative_eq!(m.var_support, 2.4375, epsilon = 1e-8);
        // Every γ_j = λ_o since j₁ = 0.
        assert_relative_eq!(p.gamma[0], p.lambda_o, epsilon = 1e-15);
    }

    #[test]
    fn head_coordinates_get_signs() {
        let l = LoadingVector::new(alloc::vec![-5.0, 1.0, 0.1, 0.1, 0.1]).unwrap();
        let p = build_prior(&l, 2.0, 2, 0.5, 1.5).unwrap();
        let eta = l.original_values();
        for j in 0..5 {
            assert_relative_eq!(
                eta[j] * p.gamma[j],
                1.5 * eta[j].abs().max(p.lambda_o),
                epsilon = 1e-12
            );
        }
        assert_eq!(p.gamma[0], -1.5);
    }

    #[test]
    fn mean_functional_lower_bound() {
        for (d, s) in [(100usize, 5usize), (400, 3), (50, 12)] {
            let l = homogeneous(d);
            let p = build_prior(&l, 2.0, s, 1.0, 1.0).unwrap();
            let m = p.moments(&l);
            assert!(m.mean_l >= 0.25 * (p.lambda_o * s as f64 + p.nu) - 1e-12);
            assert!(m.var_l <= 1.0 * l.values()[0].abs().max(p.lambda_o) * m.mean_l + 1e-12);
        }
    }

    #[test]
    fn rejects_large_c1() {
        let l = LoadingVector::new(alloc::vec![1.0]).unwrap();
        assert!(build_prior(&l, 2.0, 1, 2.5, 1.0).is_err());
        assert!(build_prior(&l, 2.0, 1, 1.0, 0.0).is_err());
        // d = 1, s = 1 gives π = c₁/2.
        assert!(build_prior(&l, 2.0, 1, 1.9, 1.0).is_ok());
    }

    #[test]
    fn chi2_fixture_and_monotonicity() {
        let l = homogeneous(100);
        let p = build_prior(&l, 2.0, 5, 1.0, 1.0).unwrap();
        let direct: f64 =
            p.pi.iter()
                .zip(&p.gamma)
                .map(|(pi, g)| pi * pi * libm::exp(g * g))
                .sum();
        let b = chi2_mixture_bound(&p, 1.0).unwrap();
        assert_relative_eq!(b.bound, libm::exp(direct), max_relative = 1e-12);
        assert_relative_eq!(
            b.tv,
            0.5 * libm::sqrt(libm::exp(direct) - 1.0),
            max_relative = 1e-10
        );

        let mut last = 0.0;
        for c1 in [0.1, 0.3, 0.6, 1.0, 1.5] {
            let v = chi2_mixture_bound(&build_prior(&l, 2.0, 5, c1, 1.0).unwrap(), 1.0)
                .unwrap()
                .bound;
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn tiny_activation_bound_near_one() {
        let l = homogeneous(100);
        let p = build_prior(&l, 2.0, 5, 1e-12, 1.0).unwrap();
        let b = chi2_mixture_bound(&p, 1.0).unwrap();
        assert!(b.bound - 1.0 < 1e-20);
        assert!(b.tv < 1e-10);
        let mut rng = stream_rng(1, &[]);
        let nonzero: usize = (0..10_000)
            .map(|_| {
                p.sample_with(&mut rng)
                    .iter()
                    .filter(|v| **v != 0.0)
                    .count()
            })
            .sum();
        assert!((nonzero as f64) / (10_000.0 * 100.0) <= 1e-6);
    }

    #[test]
    fn extremal_density_integrates_to_one() {
        for alpha in [1.0, 2.0] {
            assert_relative_eq!(extremal_chi2_quadrature(alpha, 0.0), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let b = libm::sqrt(2.0);
        for g in [0.1, 0.5, 1.0, 2.0, 3.0] {
            assert_relative_eq!(
                extremal_chi2_quadrature(2.0, g),
                libm::exp(g * g),
                max_relative = 1e-8
            );
            let laplace = 2.0 / 3.0 * libm::exp(b * g) + 1.0 / 3.0 * libm::exp(-2.0 * b * g);
            assert_relative_eq!(
                extremal_chi2_quadrature(1.0, g),
                laplace,
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let l = homogeneous(30);
        let p = build_prior(&l, 1.0, 3, 0.5, 1.0).unwrap();
        assert_eq!(sample_prior(&p, 4), sample_prior(&p, 4));
    }
}
