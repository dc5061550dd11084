//! Threshold equations and their monotone root finding.
//!
//! The oracle objective
//!
//! ```text
//! φ(β) = Σ_j |η_j| exp(-β/|η_j|^α) / sqrt(Σ_j η_j² exp(-β/|η_j|^α))
//! ```
//!
//! is continuous and strictly decreasing in β, tends to `+∞` as `β → -∞` and to
//! `0` as `β → +∞`, so `φ(β) = target` has exactly one root for every positive
//! target. It is evaluated in the log domain and solved by bracket doubling from
//! `β = 0` (or from a nearby root) followed by Illinois false position with
//! bisection fallback. The non-symmetric threshold `λ_H` solves a tail-count
//! equation by plain bisection.

use crate::loading::LoadingVector;
use crate::math::{log_sum_exp, CompensatedSum};
use crate::{Error, Result};
use alloc::vec::Vec;

/// Stopping rules for the bracketing solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    /// Relative tolerance on the objective, `|f(root) - target| ≤ rel·target + abs`.
    pub rel: f64,
    pub abs: f64,
    pub max_iter: u32,
    /// Maximum number of bracket doublings (steps ±1, ±2, ±4, ...).
    pub max_doublings: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 0.0,
            max_iter: 200,
            max_doublings: 120,
        }
    }
}

/// Which implicit equation a solution belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Equation {
    Oracle,
    Adaptive,
    Asym,
}

impl Equation {
    pub fn name(self) -> &'static str {
        match self {
            Equation::Oracle => "oracle",
            Equation::Adaptive => "adaptive",
            Equation::Asym => "asym",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ThresholdSolution {
    pub equation: Equation,
    pub target: f64,
    /// Root of the objective. For [`Equation::Asym`] this is `λ_H` itself.
    pub beta: f64,
    /// `max(β, 0)^{1/α}`, or `λ_H`.
    pub lambda: f64,
    /// `|objective(beta) - target|`.
    pub residual: f64,
    pub iterations: u32,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::param("alpha", "must be finite and positive"))
    }
}

// β |η|^{-α} with 0 · ∞ read as 0.
#[inline]
fn scaled(beta: f64, inv_pow: f64) -> f64 {
    if beta == 0.0 {
        0.0
    } else {
        beta * inv_pow
    }
}

// Outcome of the cold bracket search: a root found on the way, or a
// bracket `(lo, hi, g(lo), g(hi), best, evaluations)`.
enum Start {
    Done(f64, f64, u32),
    Bracket((f64, f64, f64, f64, (f64, f64), u32)),
}

/// The oracle objective for a fixed `(loading, α)`, with `log|η_j|` and
/// `|η_j|^{-α}` precomputed so repeated evaluations cost two exponentials per
/// coordinate.
#[derive(Debug, Clone)]
pub struct PhiObjective {
    alpha: f64,
    abs: Vec<f64>,
    log_abs: Vec<f64>,
    inv_pow: Vec<f64>,
}

impl PhiObjective {
    pub fn new(loading: &LoadingVector, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let log_abs: Vec<f64> = loading
            .values()
            .iter()
            .map(|e| libm::log(e.abs()))
            .collect();
        let inv_pow = log_abs.iter().map(|&la| libm::exp(-alpha * la)).collect();
        Ok(Self {
            alpha,
            abs: loading.values().iter().map(|e| e.abs()).collect(),
            log_abs,
            inv_pow,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `log φ(β)`.
    pub fn log_value(&self, beta: f64) -> f64 {
        let mut m1 = f64::NEG_INFINITY;
        let mut m2 = f64::NEG_INFINITY;
        for (&la, &ip) in self.log_abs.iter().zip(&self.inv_pow) {
            let a = la - scaled(beta, ip);
            m1 = m1.max(a);
            m2 = m2.max(a + la);
        }
        // An infinite term means β < 0 meets a loading so small that |η|^{-α}
        // overflows; φ is then beyond f64 range. All terms vanishing is the
        // opposite limit.
        if m1 == f64::INFINITY {
            return f64::INFINITY;
        }
        if m1 == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let mut s1 = CompensatedSum::new();
        let mut s2 = CompensatedSum::new();
        // exp(a + la - m2) = exp(a - m1) |η| exp(m1 - m2): one exponential per
        // coordinate unless the rescaling factor leaves the normal range.
        let c = libm::exp(m1 - m2);
        if c.is_normal() && self.abs.iter().all(|v| (v * c).is_normal()) {
            for ((&la, &ip), &v) in self.log_abs.iter().zip(&self.inv_pow).zip(&self.abs) {
                let t = libm::exp(la - scaled(beta, ip) - m1);
                s1.add(t);
                s2.add(t * v * c);
            }
        } else {
            for (&la, &ip) in self.log_abs.iter().zip(&self.inv_pow) {
                let a = la - scaled(beta, ip);
                s1.add(libm::exp(a - m1));
                s2.add(libm::exp(a + la - m2));
            }
        }
        (m1 + libm::log(s1.value())) - 0.5 * (m2 + libm::log(s2.value()))
    }

    /// `log Σ_j η_j² exp(-β/|η_j|^α)`.
    pub fn log_energy(&self, beta: f64) -> f64 {
        log_sum_exp(
            self.log_abs
                .iter()
                .zip(&self.inv_pow)
                .map(move |(&la, &ip)| 2.0 * la - scaled(beta, ip)),
        )
    }

    /// Solves `φ(β) = target`.
    pub fn solve(
        &self,
        target: f64,
        tol: &Tolerances,
        equation: Equation,
    ) -> Result<ThresholdSolution> {
        self.solve_inner(target, tol, equation, None)
    }

    /// Like [`solve`](Self::solve), but brackets the root by stepping outward
    /// from `hint`, e.g. the root for a neighbouring target. Falls back to the
    /// search from zero when that bracket would reach zero.
    pub fn solve_near(
        &self,
        target: f64,
        tol: &Tolerances,
        equation: Equation,
        hint: f64,
    ) -> Result<ThresholdSolution> {
        self.solve_inner(target, tol, equation, Some(hint))
    }

    fn solve_inner(
        &self,
        target: f64,
        tol: &Tolerances,
        equation: Equation,
        hint: Option<f64>,
    ) -> Result<ThresholdSolution> {
        if !(target.is_finite() && target > 0.0) {
            return Err(Error::param("target", "must be finite and positive"));
        }
        let alpha = self.alpha;
        let log_target = libm::log(target);
        // g is decreasing; the root is where it crosses zero.
        let g = |beta: f64| -> Result<f64> {
            let v = self.log_value(beta) - log_target;
            if v.is_nan() {
                Err(Error::NonFinite { at: beta })
            } else {
                Ok(v)
            }
        };
        let residual_of = |gv: f64| target * libm::fabs(libm::expm1(gv));
        let allowed = tol.rel * target + tol.abs;
        let finish = |beta: f64, gv: f64, iterations: u32| ThresholdSolution {
            equation,
            target,
            beta,
            lambda: lambda_from_beta(beta, alpha),
            residual: residual_of(gv),
            iterations,
        };

        let mut warm = None;
        if let Some(x0) = hint.filter(|h| h.is_finite() && *h != 0.0) {
            let gx = g(x0)?;
            if residual_of(gx) <= allowed {
                return Ok(finish(x0, gx, 1));
            }
            let dir = if gx > 0.0 { 1.0 } else { -1.0 };
            let mut delta = 1e-3 * libm::fabs(x0).max(1.0);
            let (mut inner, mut g_inner) = (x0, gx);
            let mut evals = 1;
            for _ in 0..tol.max_doublings {
                let outer = inner + dir * delta;
                if outer == 0.0 || outer.signum() != x0.signum() {
                    break;
                }
                let g_outer = g(outer)?;
                evals += 1;
                if (dir > 0.0) == (g_outer <= 0.0) {
                    let best = if libm::fabs(g_outer) < libm::fabs(g_inner) {
                        (outer, g_outer)
                    } else {
                        (inner, g_inner)
                    };
                    warm = Some(if dir > 0.0 {
                        (inner, outer, g_inner, g_outer, best, evals)
                    } else {
                        (outer, inner, g_outer, g_inner, best, evals)
                    });
                    break;
                }
                inner = outer;
                g_inner = g_outer;
                delta *= 2.0;
            }
        }
        let (mut lo, mut hi, mut glo, mut ghi, mut best, used) = match warm {
            Some(w) => w,
            None => match self.cold_bracket(&g, &residual_of, allowed, tol, equation, target)? {
                Start::Done(beta, gv, iterations) => return Ok(finish(beta, gv, iterations)),
                Start::Bracket(b) => b,
            },
        };

        // Illinois false position on g, which is smooth and nearly linear
        // near the root. A step that fails to halve the bracket is followed
        // by a bisection step, so the worst case stays that of bisection.
        let mut side = 0i8;
        let mut bisect = false;
        for iter in used + 1..=tol.max_iter {
            let width = hi - lo;
            let secant = lo - glo * width / (ghi - glo);
            let mid = if bisect || !secant.is_finite() || secant <= lo || secant >= hi {
                lo + 0.5 * width
            } else {
                secant
            };
            let gm = g(mid)?;
            if libm::fabs(gm) < libm::fabs(best.1) {
                best = (mid, gm);
            }
            if residual_of(gm) <= allowed {
                return Ok(finish(mid, gm, iter));
            }
            if mid <= lo || mid >= hi {
                // Bracket exhausted at f64 resolution.
                return if residual_of(best.1) <= allowed {
                    Ok(finish(best.0, best.1, iter))
                } else {
                    Err(Error::NotConverged {
                        iterations: iter,
                        residual: residual_of(best.1),
                    })
                };
            }
            if gm > 0.0 {
                lo = mid;
                glo = gm;
                if side == 1 {
                    ghi *= 0.5;
                }
                side = 1;
            } else {
                hi = mid;
                ghi = gm;
                if side == -1 {
                    glo *= 0.5;
                }
                side = -1;
            }
            bisect = !bisect && hi - lo > 0.5 * width;
        }
        Err(Error::NotConverged {
            iterations: tol.max_iter,
            residual: residual_of(best.1),
        })
    }

    // Bracket search outward from β = 0, for when no usable hint exists.
    fn cold_bracket(
        &self,
        g: &impl Fn(f64) -> Result<f64>,
        residual_of: &impl Fn(f64) -> f64,
        allowed: f64,
        tol: &Tolerances,
        equation: Equation,
        target: f64,
    ) -> Result<Start> {
        let g0 = g(0.0)?;
        if residual_of(g0) <= allowed {
            return Ok(Start::Done(0.0, g0, 0));
        }
        let step = if g0 > 0.0 { 1.0 } else { -1.0 };
        let (mut lo, mut hi) = bracket(&g, step, tol.max_doublings, equation, target)?;
        let mut best = if g0 > 0.0 { (hi, g(hi)?) } else { (lo, g(lo)?) };
        let mut used = 0;
        if lo == 0.0 || hi == 0.0 {
            // The bracket touches zero. Narrow the magnitude of the root on a
            // log scale first, so roots very close to zero (tiny loadings) are
            // reached without a thousand halvings.
            let crossed = |v: f64| if step > 0.0 { v <= 0.0 } else { v > 0.0 };
            let tiny = step * f64::MIN_POSITIVE;
            let gt = g(tiny)?;
            if crossed(gt) {
                // Root within the smallest normal magnitude of zero; zero is
                // the nearest representable answer for β₊.
                let (b, gb) = if libm::fabs(gt) < libm::fabs(g0) {
                    (tiny, gt)
                } else {
                    (0.0, g0)
                };
                log::debug!("{} root lies within {tiny:e} of zero", equation.name());
                return Ok(Start::Done(b, gb, 1));
            }
            let outer = if lo == 0.0 { hi } else { lo };
            let mut a = libm::log(f64::MIN_POSITIVE);
            let mut b = libm::log(libm::fabs(outer));
            while b - a > core::f64::consts::LN_2 && used < tol.max_iter {
                let m = 0.5 * (a + b);
                let x = step * libm::exp(m);
                let v = g(x)?;
                used += 1;
                if libm::fabs(v) < libm::fabs(best.1) {
                    best = (x, v);
                }
                if residual_of(v) <= allowed {
                    return Ok(Start::Done(x, v, used));
                }
                if crossed(v) {
                    b = m;
                } else {
                    a = m;
                }
            }
            let (inner, outer) = (step * libm::exp(a), step * libm::exp(b));
            (lo, hi) = if step > 0.0 {
                (inner, outer)
            } else {
                (outer, inner)
            };
        }
        Ok(Start::Bracket((lo, hi, g(lo)?, g(hi)?, best, used)))
    }
}

/// `log φ(β)`.
pub fn log_phi_objective(loading: &LoadingVector, alpha: f64, beta: f64) -> f64 {
    match PhiObjective::new(loading, alpha) {
        Ok(obj) => obj.log_value(beta),
        Err(_) => f64::NAN,
    }
}

/// `φ(β)`. May underflow to zero for very large β; [`log_phi_objective`] does not.
pub fn phi_objective(loading: &LoadingVector, alpha: f64, beta: f64) -> f64 {
    libm::exp(log_phi_objective(loading, alpha, beta))
}

/// `β₊^{1/α}`.
pub fn lambda_from_beta(beta: f64, alpha: f64) -> f64 {
    if beta > 0.0 {
        libm::pow(beta, 1.0 / alpha)
    } else {
        0.0
    }
}

/// Right-hand side of the adaptive equation, `s / (2 sqrt(log(e s)))`.
pub fn adaptive_target(s: f64) -> f64 {
    s / (2.0 * libm::sqrt(1.0 + libm::log(s)))
}

/// Solves `φ(β) = target` for the unique β.
pub fn solve_beta(
    loading: &LoadingVector,
    alpha: f64,
    target: f64,
    tol: &Tolerances,
) -> Result<ThresholdSolution> {
    PhiObjective::new(loading, alpha)?.solve(target, tol, Equation::Oracle)
}

/// Solves the adaptive equation at sparsity `s`, i.e. target `s/(2√log(es))`.
pub fn solve_adaptive_beta(
    loading: &LoadingVector,
    alpha: f64,
    s: usize,
    tol: &Tolerances,
) -> Result<ThresholdSolution> {
    check_sparsity(s, loading.len())?;
    PhiObjective::new(loading, alpha)?.solve(adaptive_target(s as f64), tol, Equation::Adaptive)
}

pub(crate) fn check_sparsity(s: usize, d: usize) -> Result<()> {
    if s == 0 || s > d {
        Err(Error::Precondition(alloc::format!(
            "sparsity s = {s} must lie in [1, {d}]"
        )))
    } else {
        Ok(())
    }
}

/// Doubles away from zero in the direction of `step` until `g` changes sign.
/// Returns `(lo, hi)` with `g(lo) > 0 ≥ g(hi)`.
fn bracket(
    g: &impl Fn(f64) -> Result<f64>,
    step: f64,
    max_doublings: u32,
    equation: Equation,
    target: f64,
) -> Result<(f64, f64)> {
    let mut inner = 0.0;
    let mut outer = step;
    for _ in 0..=max_doublings {
        let v = g(outer)?;
        let crossed = if step > 0.0 { v <= 0.0 } else { v > 0.0 };
        if crossed {
            return Ok(if step > 0.0 {
                (inner, outer)
            } else {
                (outer, inner)
            });
        }
        inner = outer;
        outer *= 2.0;
    }
    Err(Error::BracketFailed {
        equation: equation.name(),
        target,
        expansions: max_doublings,
    })
}

/// `Σ_{j = s², …, d} exp(-(λ/|η_j|)^α)` over sorted loadings (1-based `j`).
pub fn lambda_h_objective(loading: &LoadingVector, alpha: f64, s: usize, lambda: f64) -> f64 {
    let start = s * s - 1;
    crate::math::sum(
        loading.values()[start.min(loading.len())..]
            .iter()
            .map(|&eta| libm::exp(-libm::pow(lambda / eta.abs(), alpha))),
    )
}

/// Solves the non-symmetric threshold equation for `λ_H ≥ 0`.
///
/// Requires `s² + s ≤ d + 1`, otherwise the tail sum can never reach `s`.
pub fn solve_lambda_h(
    loading: &LoadingVector,
    alpha: f64,
    s: usize,
    tol: &Tolerances,
) -> Result<ThresholdSolution> {
    check_alpha(alpha)?;
    let d = loading.len();
    if s == 0 || s * s + s > d + 1 {
        return Err(Error::Precondition(alloc::format!(
            "lambda_H needs 1 <= s and s^2 + s <= d + 1 (s = {s}, d = {d})"
        )));
    }
    let target = s as f64;
    let allowed = tol.rel * target + tol.abs;
    let g = |lambda: f64| lambda_h_objective(loading, alpha, s, lambda) - target;
    let finish = |lambda: f64, gv: f64, iterations: u32| ThresholdSolution {
        equation: Equation::Asym,
        target,
        beta: lambda,
        lambda,
        residual: libm::fabs(gv),
        iterations,
    };
    let g0 = g(0.0);
    if libm::fabs(g0) <= allowed {
        return Ok(finish(0.0, g0, 0));
    }
    let (mut lo, mut hi) = bracket(
        &|l| Ok(g(l)),
        1.0,
        tol.max_doublings,
        Equation::Asym,
        target,
    )?;
    let mut best = (hi, g(hi));
    for iter in 1..=tol.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        let gm = g(mid);
        if libm::fabs(gm) < libm::fabs(best.1) {
            best = (mid, gm);
        }
        if libm::fabs(gm) <= allowed {
            return Ok(finish(mid, gm, iter));
        }
        if mid <= lo || mid >= hi {
            return if libm::fabs(best.1) <= allowed {
                Ok(finish(best.0, best.1, iter))
            } else {
                Err(Error::NotConverged {
                    iterations: iter,
                    residual: libm::fabs(best.1),
                })
            };
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NotConverged {
        iterations: tol.max_iter,
        residual: libm::fabs(best.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loading::LoadingSpec;
    use alloc::vec;
    use alloc::vec::Vec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn homogeneous(d: usize) -> LoadingVector {
        LoadingVector::from_spec(&LoadingSpec::Homogeneous { d }).unwrap()
    }

    // Direct evaluation, no log-domain tricks.
    fn phi_naive(eta: &[f64], alpha: f64, beta: f64) -> f64 {
        let w: Vec<f64> = eta
            .iter()
            .map(|e| libm::exp(-beta / libm::pow(e.abs(), alpha)))
            .collect();
        let num: f64 = eta.iter().zip(&w).map(|(e, w)| e.abs() * w).sum();
        let den: f64 = eta.iter().zip(&w).map(|(e, w)| e * e * w).sum();
        num / libm::sqrt(den)
    }

    #[test]
    fn phi_homogeneous_at_zero() {
        assert_relative_eq!(
            phi_objective(&homogeneous(4), 1.3, 0.0),
            2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn phi_single_coordinate() {
        let l = LoadingVector::new(vec![2.0]).unwrap();
        assert_relative_eq!(phi_objective(&l, 1.0, 0.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn phi_two_coordinates() {
        let l = LoadingVector::new(vec![2.0, 1.0]).unwrap();
        let expect = phi_naive(&[2.0, 1.0], 1.0, 1.0);
        assert_relative_eq!(expect, 0.945806, epsilon = 1e-6);
        assert_relative_eq!(phi_objective(&l, 1.0, 1.0), expect, max_relative = 1e-14);
    }

    #[test]
    fn solve_homogeneous_closed_form() {
        let l = homogeneous(100);
        let sol = solve_beta(&l, 2.0, 2.5, &Tolerances::default()).unwrap();
        assert_relative_eq!(sol.beta, 2.0 * libm::log(4.0), epsilon = 1e-9);
        assert_relative_eq!(sol.lambda, 1.665109, epsilon = 1e-6);
        assert!(sol.residual <= 1e-10 * 2.5);
    }

    #[test]
    fn solve_at_phi_zero_gives_zero() {
        let sol = solve_beta(&homogeneous(4), 2.0, 2.0, &Tolerances::default()).unwrap();
        assert_eq!(sol.beta, 0.0);
        assert_eq!(sol.lambda, 0.0);
    }

    #[test]
    fn negative_root_has_zero_lambda() {
        let sol = solve_beta(&homogeneous(4), 2.0, 3.0, &Tolerances::default()).unwrap();
        assert!(sol.beta < 0.0);
        assert_eq!(sol.lambda, 0.0);
        assert_relative_eq!(sol.beta, 2.0 * libm::log(2.0 * 2.0 / 6.0), epsilon = 1e-9);
    }

    #[test]
    fn adaptive_s1_matches_oracle() {
        let l = LoadingVector::new(vec![3.0, 1.0, 0.2, 0.7]).unwrap();
        let tol = Tolerances::default();
        let a = solve_adaptive_beta(&l, 1.5, 1, &tol).unwrap();
        let o = solve_beta(&l, 1.5, 0.5, &tol).unwrap();
        assert_eq!(a.beta, o.beta);
    }

    #[test]
    fn adaptive_homogeneous_closed_form() {
        let l = homogeneous(100);
        let sol = solve_adaptive_beta(&l, 2.0, 5, &Tolerances::default()).unwrap();
        let expect = 2.0 * libm::log(2.0 * 10.0 * libm::sqrt(1.0 + libm::log(5.0)) / 5.0);
        assert_relative_eq!(sol.beta, expect, epsilon = 1e-9);
        assert_relative_eq!(sol.beta, 3.731, epsilon = 1e-3);
        assert_relative_eq!(
            sol.target,
            2.5 / libm::sqrt(1.0 + libm::log(5.0)),
            epsilon = 1e-15
        );
        assert_relative_eq!(sol.target, 1.5476, epsilon = 1e-4);
    }

    #[test]
    fn adaptive_rejects_out_of_range() {
        let l = homogeneous(3);
        assert!(solve_adaptive_beta(&l, 2.0, 0, &Tolerances::default()).is_err());
        assert!(solve_adaptive_beta(&l, 2.0, 4, &Tolerances::default()).is_err());
    }

    #[test]
    fn lambda_h_homogeneous() {
        let l = homogeneous(110);
        let sol = solve_lambda_h(&l, 1.0, 10, &Tolerances::default()).unwrap();
        assert_relative_eq!(sol.lambda, libm::log(1.1), epsilon = 1e-9);
        assert!(libm::fabs(lambda_h_objective(&l, 1.0, 10, sol.lambda) - 10.0) <= 1e-9);
    }

    #[test]
    fn lambda_h_boundary_is_zero() {
        // d - s² + 1 = s with s = 3 → d = 11.
        let l = homogeneous(11);
        let sol = solve_lambda_h(&l, 2.0, 3, &Tolerances::default()).unwrap();
        assert_eq!(sol.lambda, 0.0);
    }

    #[test]
    fn lambda_h_precondition() {
        let l = homogeneous(10);
        let err = solve_lambda_h(&l, 2.0, 3, &Tolerances::default()).unwrap_err();
        assert!(!err.is_numerical());
    }

    #[test]
    fn rejects_bad_target_and_alpha() {
        let l = homogeneous(3);
        assert!(solve_beta(&l, 2.0, 0.0, &Tolerances::default()).is_err());
        assert!(solve_beta(&l, -1.0, 1.0, &Tolerances::default()).is_err());
    }

    #[test]
    fn warm_start_matches_cold_solve() {
        let l = LoadingVector::new(vec![3.0, -1.0, 0.5, 0.5, 0.01, 1e-4]).unwrap();
        let obj = PhiObjective::new(&l, 1.5).unwrap();
        let tol = Tolerances::default();
        for target in [0.05, 0.5, 1.0, 3.0] {
            let cold = obj.solve(target, &tol, Equation::Oracle).unwrap();
            // Hints on either side of the root and across zero.
            for hint in [cold.beta + 5.0, cold.beta - 0.1, -7.0, 1e-9, 40.0] {
                let warm = obj
                    .solve_near(target, &tol, Equation::Oracle, hint)
                    .unwrap();
                assert!(warm.residual <= 1e-10 * target, "hint {hint}");
                assert_relative_eq!(warm.beta, cold.beta, max_relative = 1e-8, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn bracket_cap_reports_numerical_failure() {
        let tol = Tolerances {
            max_doublings: 2,
            ..Tolerances::default()
        };
        let err = solve_beta(&homogeneous(10_000), 2.0, 1e-6, &tol).unwrap_err();
        assert!(err.is_numerical());
    }

    #[test]
    fn stable_over_extreme_range() {
        let eta: Vec<f64> = (0..25)
            .map(|k| libm::pow(10.0, -6.0 + 0.5 * k as f64))
            .collect();
        let l = LoadingVector::new(eta).unwrap();
        for &alpha in &[0.5, 1.0, 2.0] {
            for &beta in &[-1e6, -1.0, 0.0, 1.0, 1e6] {
                let v = log_phi_objective(&l, alpha, beta);
                assert!(v.is_finite(), "alpha {alpha} beta {beta}");
                // φ itself is representable only while log φ stays below the f64 range.
                if v < 700.0 {
                    assert!(phi_objective(&l, alpha, beta).is_finite());
                }
            }
        }
    }

    fn loading_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0f64..3.0, 1..200)
            .prop_map(|v| v.into_iter().map(|e| libm::pow(10.0, e)).collect())
    }

    proptest! {
        #[test]
        fn log_domain_matches_naive(eta in loading_strategy(), alpha in 0.5f64..3.0, beta in -0.5f64..0.5) {
            let l = LoadingVector::new(eta.clone()).unwrap();
            let naive = phi_naive(&eta, alpha, beta);
            prop_assume!(naive.is_finite() && naive > 0.0);
            prop_assert!((phi_objective(&l, alpha, beta) - naive).abs() <= 1e-9 * naive);
        }

        #[test]
        fn scale_covariance(eta in loading_strategy(), alpha in 0.5f64..3.0, beta in -2.0f64..2.0, c in 0.1f64..10.0) {
            let l = LoadingVector::new(eta).unwrap();
            let scaled = l.scaled(c).unwrap();
            let lhs = log_phi_objective(&scaled, alpha, beta);
            // φ is homogeneous of degree zero in η, so only β rescales.
            let rhs = log_phi_objective(&l, alpha, beta / libm::pow(c, alpha));
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }

        #[test]
        fn solve_round_trip(eta in loading_strategy(), alpha in 0.5f64..3.0, frac in 0.01f64..1.0) {
            let l = LoadingVector::new(eta).unwrap();
            let target = frac * l.len() as f64 / 2.0;
            let sol = solve_beta(&l, alpha, target, &Tolerances::default()).unwrap();
            let back = phi_objective(&l, alpha, sol.beta);
            prop_assert!((back - target).abs() <= 1e-10 * target + 1e-15);
            prop_assert_eq!(sol.lambda == 0.0, sol.beta <= 0.0);
        }
    }
}
