//! Loading vectors: validation, sorting and the generated example families.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// How a loading vector is produced.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum LoadingSpec {
    /// Caller-supplied loadings in their original coordinate order.
    Explicit { values: Vec<f64> },
    /// `η = 1_d`.
    Homogeneous { d: usize },
    /// `⌊d^γ_d⌋` entries equal to `d^γ_λ`, followed by ones.
    TwoPhase {
        d: usize,
        gamma_d: f64,
        gamma_lambda: f64,
    },
    /// `η_j = exp(-c (j-1)^γ)`.
    ExpDecay { d: usize, c: f64, gamma: f64 },
}

/// Where a [`LoadingVector`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Provenance {
    Explicit,
    Homogeneous,
    TwoPhase,
    ExpDecay,
}

impl LoadingSpec {
    pub fn dimension(&self) -> usize {
        match self {
            LoadingSpec::Explicit { values } => values.len(),
            LoadingSpec::Homogeneous { d }
            | LoadingSpec::TwoPhase { d, .. }
            | LoadingSpec::ExpDecay { d, .. } => *d,
        }
    }

    /// Same family at a different dimension. Explicit specs are returned unchanged.
    pub fn with_dimension(&self, d: usize) -> LoadingSpec {
        let mut spec = self.clone();
        match &mut spec {
            LoadingSpec::Explicit { .. } => {}
            LoadingSpec::Homogeneous { d: dd }
            | LoadingSpec::TwoPhase { d: dd, .. }
            | LoadingSpec::ExpDecay { d: dd, .. } => *dd = d,
        }
        spec
    }

    /// Number of leading large entries of a two-phase vector.
    pub fn two_phase_head(d: usize, gamma_d: f64) -> usize {
        // Guard against d^γ landing a hair under an integer.
        let head = libm::floor(libm::pow(d as f64, gamma_d) + 1e-9);
        (head as usize).min(d)
    }
}

/// Nonzero loadings sorted by decreasing absolute value, together with the
/// permutation back to the caller's coordinate order.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingVector {
    values: Vec<f64>,
    order: Vec<usize>,
    provenance: Provenance,
}

impl LoadingVector {
    /// Validates and sorts explicit loadings. Zeros are rejected; use
    /// [`drop_zeros`] first if they should be removed.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_provenance(values, Provenance::Explicit)
    }

    fn with_provenance(values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidLoading("dimension must be at least 1".into()));
        }
        if let Some((j, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v == 0.0)
        {
            return Err(Error::InvalidLoading(format!(
                "entry {j} is {v}; loadings must be finite and nonzero"
            )));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
        let sorted = order.iter().map(|&i| values[i]).collect();
        Ok(Self {
            values: sorted,
            order,
            provenance,
        })
    }

    pub fn from_spec(spec: &LoadingSpec) -> Result<Self> {
        match spec {
            LoadingSpec::Explicit { values } => Self::new(values.clone()),
            LoadingSpec::Homogeneous { d } => {
                check_dimension(*d)?;
                Self::with_provenance(alloc::vec![1.0; *d], Provenance::Homogeneous)
            }
            &LoadingSpec::TwoPhase {
                d,
                gamma_d,
                gamma_lambda,
            } => {
                check_dimension(d)?;
                if !(gamma_d.is_finite() && gamma_d > 0.0) {
                    return Err(Error::param("gamma_d", "must be positive"));
                }
                if !(gamma_lambda.is_finite() && gamma_lambda > 0.0) {
                    return Err(Error::param("gamma_lambda", "must be positive"));
                }
                if 2.0 * gamma_lambda + gamma_d >= 1.0 {
                    log::info!(
                        "two-phase loading outside the phase-transition regime (2*gamma_lambda + gamma_d = {})",
                        2.0 * gamma_lambda + gamma_d
                    );
                }
                let head = LoadingSpec::two_phase_head(d, gamma_d);
                let big = libm::pow(d as f64, gamma_lambda);
                let values = (0..d).map(|j| if j < head { big } else { 1.0 }).collect();
                Self::with_provenance(values, Provenance::TwoPhase)
            }
            &LoadingSpec::ExpDecay { d, c, gamma } => {
                check_dimension(d)?;
                if !(c.is_finite() && c >= 0.0) {
                    return Err(Error::param("c", "must be finite and non-negative"));
                }
                if !(gamma.is_finite() && gamma >= 1.0) {
                    return Err(Error::param("gamma", "must be at least 1 (convex φ)"));
                }
                let values = (0..d)
                    .map(|j| libm::exp(-c * libm::pow(j as f64, gamma)))
                    .collect();
                Self::with_provenance(values, Provenance::ExpDecay)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Loadings in sorted (decreasing magnitude) order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `order()[k]` is the caller's index of the `k`-th sorted loading.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Loadings in the caller's original order.
    pub fn original_values(&self) -> Vec<f64> {
        self.to_original(&self.values)
    }

    /// Maps a vector indexed by sorted position back to original order.
    pub fn to_original(&self, sorted: &[f64]) -> Vec<f64> {
        assert_eq!(sorted.len(), self.len());
        let mut out = alloc::vec![0.0; self.len()];
        for (k, &i) in self.order.iter().enumerate() {
            out[i] = sorted[k];
        }
        out
    }

    /// Maps a vector in original order to sorted position order.
    pub fn to_sorted(&self, original: &[f64]) -> Vec<f64> {
        assert_eq!(original.len(), self.len());
        self.order.iter().map(|&i| original[i]).collect()
    }

    /// True when every loading equals one.
    pub fn is_homogeneous(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0)
    }

    /// `Σ_{j ≤ k} η_j²` over the `k` largest loadings.
    pub fn head_energy(&self, k: usize) -> f64 {
        crate::math::sum(self.values[..k.min(self.len())].iter().map(|v| v * v))
    }

    /// `L(θ) = η⊤θ` with `θ` in original order.
    pub fn functional(&self, theta: &[f64]) -> f64 {
        assert_eq!(theta.len(), self.len());
        crate::math::sum(
            self.order
                .iter()
                .zip(&self.values)
                .map(|(&i, &eta)| eta * theta[i]),
        )
    }

    /// Every loading multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let original = self.original_values().into_iter().map(|v| v * c).collect();
        Self::with_provenance(original, self.provenance)
    }

    /// `j₀ = min{j : |η_j| < 1/2}`, or `d + 1` when no loading is that small.
    pub fn effective_dimension(&self) -> usize {
        self.values
            .iter()
            .position(|v| v.abs() < 0.5)
            .map_or(self.len() + 1, |k| k + 1)
    }
}

/// Removes zero loadings, returning the kept values and the dropped indices.
pub fn drop_zeros(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut kept = Vec::with_capacity(values.len());
    let mut dropped = Vec::new();
    for (j, &v) in values.iter().enumerate() {
        if v == 0.0 {
            dropped.push(j);
        } else {
            kept.push(v);
        }
    }
    (kept, dropped)
}

fn check_dimension(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::InvalidLoading("dimension must be at least 1".into()))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn homogeneous_is_all_ones() {
        let l = LoadingVector::from_spec(&LoadingSpec::Homogeneous { d: 4 }).unwrap();
        assert_eq!(l.values(), &[1.0, 1.0, 1.0, 1.0]);
        assert!(l.is_homogeneous());
        assert_eq!(l.effective_dimension(), 5);
    }

    #[test]
    fn exp_decay_linear_phi() {
        let l = LoadingVector::from_spec(&LoadingSpec::ExpDecay {
            d: 3,
            c: 1.0,
            gamma: 1.0,
        })
        .unwrap();
        let expect = [1.0, 0.367879441171442, 0.1353352832366127];
        for (a, b) in l.values().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(l.effective_dimension(), 2);
    }

    #[test]
    fn two_phase_counts_and_values() {
        let l = LoadingVector::from_spec(&LoadingSpec::TwoPhase {
            d: 16,
            gamma_d: 0.5,
            gamma_lambda: 0.25,
        })
        .unwrap();
        assert_eq!(&l.values()[..4], &[2.0; 4]);
        assert!(l.values()[4..].iter().all(|&v| v == 1.0));
        assert_eq!(l.len(), 16);
    }

    #[test]
    fn effective_dimension_first_entry_small() {
        let l = LoadingVector::new(vec![0.4]).unwrap();
        assert_eq!(l.effective_dimension(), 1);
    }

    #[test]
    fn rejects_zero_nonfinite_and_empty() {
        assert!(LoadingVector::new(vec![]).is_err());
        assert!(LoadingVector::new(vec![1.0, 0.0]).is_err());
        assert!(LoadingVector::new(vec![f64::NAN]).is_err());
        assert!(LoadingVector::from_spec(&LoadingSpec::Homogeneous { d: 0 }).is_err());
        assert!(LoadingVector::from_spec(&LoadingSpec::TwoPhase {
            d: 10,
            gamma_d: 0.0,
            gamma_lambda: 0.2
        })
        .is_err());
        assert!(LoadingVector::from_spec(&LoadingSpec::ExpDecay {
            d: 10,
            c: 1.0,
            gamma: 0.5
        })
        .is_err());
    }

    #[test]
    fn drop_zeros_reports_indices() {
        let (kept, dropped) = drop_zeros(&[1.0, 0.0, -2.0, 0.0]);
        assert_eq!(kept, vec![1.0, -2.0]);
        assert_eq!(dropped, vec![1, 3]);
    }

    #[test]
    fn sorts_by_magnitude_keeping_sign() {
        let l = LoadingVector::new(vec![0.5, -3.0, 2.0]).unwrap();
        assert_eq!(l.values(), &[-3.0, 2.0, 0.5]);
        assert_eq!(l.order(), &[1, 2, 0]);
        assert_eq!(l.functional(&[1.0, 1.0, 1.0]), -0.5);
    }

    proptest! {
        #[test]
        fn explicit_round_trip(values in prop::collection::vec(
            prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3], 1..60)) {
            let l = LoadingVector::new(values.clone()).unwrap();
            prop_assert_eq!(l.original_values(), values);
            for w in l.values().windows(2) {
                prop_assert!(w[0].abs() >= w[1].abs());
            }
        }

        #[test]
        fn effective_dimension_monotone_under_shrinking(
            values in prop::collection::vec(1e-3f64..2.0, 1..40),
            c in 0.01f64..=1.0,
        ) {
            let l = LoadingVector::new(values).unwrap();
            let shrunk = l.scaled(c).unwrap();
            prop_assert!(shrunk.effective_dimension() <= l.effective_dimension());
        }
    }
}
