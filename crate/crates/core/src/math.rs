//! Small numeric helpers shared across the crate.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn sum(iter: impl IntoIterator<Item = f64>) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `log Σ exp(x_i)`, shifted by the maximum. Returns `-inf` for an empty
/// input or when every term is `-inf`.
pub fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let s = sum(values.map(|v| libm::exp(v - max)));
    max + libm::log(s)
}

/// `Γ(x)` for `x > 0`, falling back to `exp(lgamma)` where `tgamma` overflows.
pub fn gamma(x: f64) -> f64 {
    if x < 170.0 {
        libm::tgamma(x)
    } else {
        libm::exp(libm::lgamma(x))
    }
}

/// Ratio `Γ(a)/Γ(b)` without intermediate overflow.
/// When `b - a` is a small positive integer the ratio is computed from the
/// recurrence `Γ(x + 1) = x Γ(x)`, which is exact for e.g. `Γ(1/2)/Γ(3/2) = 2`.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    let n = b - a;
    if (1.0..=64.0).contains(&n) && libm::floor(n) == n {
        let mut prod = 1.0;
        for k in 0..n as usize {
            prod *= a + k as f64;
        }
        return 1.0 / prod;
    }
    if a < 170.0 && b < 170.0 {
        libm::tgamma(a) / libm::tgamma(b)
    } else {
        libm::exp(libm::lgamma(a) - libm::lgamma(b))
    }
}

/// Lower-middle median of a slice (sorts a copy in place).
pub fn lower_median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    values.sort_by(f64::total_cmp);
    values[(values.len() - 1) / 2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum(xs.iter().copied()), 2.0);
    }

    #[test]
    fn log_sum_exp_matches_naive() {
        let xs = [0.1, -2.0, 3.5, 1.25];
        let naive = libm::log(xs.iter().map(|&x| libm::exp(x)).sum::<f64>());
        assert!((log_sum_exp(xs.iter().copied()) - naive).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        let xs = [1e300, 1e300];
        let v = log_sum_exp(xs.iter().copied());
        assert!(v.is_finite());
        assert_eq!(log_sum_exp([].iter().copied()), f64::NEG_INFINITY);
        let big: Vec<f64> = vec![-1e18, -1e18 + 1.0];
        assert!(log_sum_exp(big.iter().copied()).is_finite());
    }

    #[test]
    fn gamma_ratio_half() {
        assert_eq!(gamma_ratio(0.5, 1.5), 2.0);
        let r = gamma_ratio(200.0, 199.0);
        assert!((r - 199.0).abs() < 1e-8);
    }

    #[test]
    fn lower_median_even_and_odd() {
        assert_eq!(lower_median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(lower_median(&mut [12.5, 2.5]), 2.5);
    }
}
