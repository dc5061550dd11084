//! Experiment configuration files.
//!
//! A config is a single JSON object. Unknown keys are rejected everywhere and
//! every error carries the dotted path of the offending field.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};
use sparsefn_core::estimators::{default_zeta, Variant};
use sparsefn_core::{LoadingSpec, NoiseClass, NoiseModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(deserialize_with = "de_loading")]
    pub loading: LoadingSpec,
    pub noise: NoiseModel,
    #[serde(default)]
    pub estimator: EstimatorBlock,
    #[serde(default, deserialize_with = "de_theta")]
    pub theta: ThetaSpec,
    #[serde(default)]
    pub simulation: SimulationBlock,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorBlock {
    /// Estimators evaluated on the same replicates of every cell.
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    /// Sparsity handed to non-adaptive estimators. Defaults to the sparsity of
    /// `theta`, or 1 when `theta` has none.
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default = "one")]
    pub kappa: f64,
    /// Lepski constant; `None` selects 1e3 for α ≥ 2 and 1e4 otherwise.
    #[serde(default)]
    pub zeta: Option<f64>,
    #[serde(default = "half")]
    pub gamma_split: f64,
    /// Constant of the non-symmetric threshold; `None` selects `τ 4^{1/α}`.
    #[serde(default)]
    pub c_h: Option<f64>,
}

impl Default for EstimatorBlock {
    fn default() -> Self {
        Self {
            variants: default_variants(),
            s: None,
            kappa: 1.0,
            zeta: None,
            gamma_split: 0.5,
            c_h: None,
        }
    }
}

impl EstimatorBlock {
    pub fn zeta_for(&self, alpha: f64) -> f64 {
        self.zeta.unwrap_or_else(|| default_zeta(alpha))
    }
}

fn default_variants() -> Vec<Variant> {
    vec![Variant::Oracle]
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

/// Where spikes go, in sorted-loading order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Smallest loadings.
    #[default]
    Tail,
    /// Largest loadings.
    Head,
    /// Evenly spaced over all positions.
    Spread,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signs {
    /// `sign(θ_j) = sign(η_j)`, so every spike pushes `L(θ)` the same way.
    #[default]
    Aligned,
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpikeScale {
    /// `|θ_j| = ρ σ τ λ_o / |η_j|`, i.e. `|η_j θ_j|` sits at `ρ` times the
    /// oracle threshold.
    #[default]
    Threshold,
    /// `|θ_j| = ρ`.
    Absolute,
}

/// How the true `θ` of a replicate is produced.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaSpec {
    #[default]
    Zero,
    /// Explicit support (0-based, original order) and values.
    Fixed {
        support: Vec<usize>,
        values: Vec<f64>,
    },
    SpikeGrid {
        s_true: usize,
        rho: f64,
        placement: Placement,
        signs: Signs,
        scale: SpikeScale,
    },
    /// A fresh draw from the least favourable prior in every replicate.
    Prior { s: usize, c1: f64, c_alpha2: f64 },
}

// Tagged enums are read through flat mirror structs: serde buffers the body
// of an internally tagged enum, which would hide the path of a mistyped field.

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum LoadingKind {
    Explicit,
    Homogeneous,
    TwoPhase,
    ExpDecay,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadingRaw {
    kind: LoadingKind,
    d: Option<usize>,
    values: Option<Vec<f64>>,
    gamma_d: Option<f64>,
    gamma_lambda: Option<f64>,
    c: Option<f64>,
    gamma: Option<f64>,
}

fn need<T, E: serde::de::Error>(v: Option<T>, field: &str, kind: &str) -> Result<T, E> {
    v.ok_or_else(|| E::custom(format!("kind `{kind}` needs field `{field}`")))
}

fn unused<E: serde::de::Error>(fields: &[(&str, bool)], kind: &str) -> Result<(), E> {
    match fields.iter().find(|f| f.1) {
        Some((name, _)) => Err(E::custom(format!(
            "field `{name}` does not apply to kind `{kind}`"
        ))),
        None => Ok(()),
    }
}

fn de_loading<'de, D: Deserializer<'de>>(de: D) -> Result<LoadingSpec, D::Error> {
    let r = LoadingRaw::deserialize(de)?;
    let spec = match r.kind {
        LoadingKind::Explicit => {
            let k = "explicit";
            unused(
                &[
                    ("d", r.d.is_some()),
                    ("gamma_d", r.gamma_d.is_some()),
                    ("gamma_lambda", r.gamma_lambda.is_some()),
                    ("c", r.c.is_some()),
                    ("gamma", r.gamma.is_some()),
                ],
                k,
            )?;
            LoadingSpec::Explicit {
                values: need(r.values, "values", k)?,
            }
        }
        LoadingKind::Homogeneous => {
            let k = "homogeneous";
            unused(
                &[
                    ("values", r.values.is_some()),
                    ("gamma_d", r.gamma_d.is_some()),
                    ("gamma_lambda", r.gamma_lambda.is_some()),
                    ("c", r.c.is_some()),
                    ("gamma", r.gamma.is_some()),
                ],
                k,
            )?;
            LoadingSpec::Homogeneous {
                d: need(r.d, "d", k)?,
            }
        }
        LoadingKind::TwoPhase => {
            let k = "two_phase";
            unused(
                &[
                    ("values", r.values.is_some()),
                    ("c", r.c.is_some()),
                    ("gamma", r.gamma.is_some()),
                ],
                k,
            )?;
            LoadingSpec::TwoPhase {
                d: need(r.d, "d", k)?,
                gamma_d: need(r.gamma_d, "gamma_d", k)?,
                gamma_lambda: need(r.gamma_lambda, "gamma_lambda", k)?,
            }
        }
        LoadingKind::ExpDecay => {
            let k = "exp_decay";
            unused(
                &[
                    ("values", r.values.is_some()),
                    ("gamma_d", r.gamma_d.is_some()),
                    ("gamma_lambda", r.gamma_lambda.is_some()),
                ],
                k,
            )?;
            LoadingSpec::ExpDecay {
                d: need(r.d, "d", k)?,
                c: need(r.c, "c", k)?,
                gamma: need(r.gamma, "gamma", k)?,
            }
        }
    };
    Ok(spec)
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum ThetaKind {
    Zero,
    Fixed,
    SpikeGrid,
    Prior,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThetaRaw {
    kind: ThetaKind,
    support: Option<Vec<usize>>,
    values: Option<Vec<f64>>,
    s_true: Option<usize>,
    rho: Option<f64>,
    placement: Option<Placement>,
    signs: Option<Signs>,
    scale: Option<SpikeScale>,
    s: Option<usize>,
    c1: Option<f64>,
    c_alpha2: Option<f64>,
}

fn de_theta<'de, D: Deserializer<'de>>(de: D) -> Result<ThetaSpec, D::Error> {
    let r = ThetaRaw::deserialize(de)?;
    let fixed = [
        ("support", r.support.is_some()),
        ("values", r.values.is_some()),
    ];
    let spikes = [
        ("s_true", r.s_true.is_some()),
        ("rho", r.rho.is_some()),
        ("placement", r.placement.is_some()),
        ("signs", r.signs.is_some()),
        ("scale", r.scale.is_some()),
    ];
    let prior = [
        ("s", r.s.is_some()),
        ("c1", r.c1.is_some()),
        ("c_alpha2", r.c_alpha2.is_some()),
    ];
    Ok(match r.kind {
        ThetaKind::Zero => {
            let k = "zero";
            unused(&fixed, k)?;
            unused(&spikes, k)?;
            unused(&prior, k)?;
            ThetaSpec::Zero
        }
        ThetaKind::Fixed => {
            let k = "fixed";
            unused(&spikes, k)?;
            unused(&prior, k)?;
            ThetaSpec::Fixed {
                support: need(r.support, "support", k)?,
                values: need(r.values, "values", k)?,
            }
        }
        ThetaKind::SpikeGrid => {
            let k = "spike_grid";
            unused(&fixed, k)?;
            unused(&prior, k)?;
            ThetaSpec::SpikeGrid {
                s_true: need(r.s_true, "s_true", k)?,
                rho: need(r.rho, "rho", k)?,
                placement: r.placement.unwrap_or_default(),
                signs: r.signs.unwrap_or_default(),
                scale: r.scale.unwrap_or_default(),
            }
        }
        ThetaKind::Prior => {
            let k = "prior";
            unused(&fixed, k)?;
            unused(&spikes, k)?;
            ThetaSpec::Prior {
                s: need(r.s, "s", k)?,
                c1: r.c1.unwrap_or(0.5),
                c_alpha2: r.c_alpha2.unwrap_or(1.0),
            }
        }
    })
}

impl ThetaSpec {
    /// Declared sparsity, `None` for the zero vector.
    pub fn sparsity(&self) -> Option<usize> {
        match self {
            ThetaSpec::Zero => None,
            ThetaSpec::Fixed { support, .. } => Some(support.len()),
            ThetaSpec::SpikeGrid { s_true, .. } => Some(*s_true),
            ThetaSpec::Prior { s, .. } => Some(*s),
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match self {
            ThetaSpec::SpikeGrid { rho, .. } => Some(*rho),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimKind {
    #[default]
    Risk,
    MomCoverage,
    TestPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    #[serde(default)]
    pub kind: SimKind,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub test: TestBlock,
    /// Upper bound on the number of grid cells.
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

impl Default for SimulationBlock {
    fn default() -> Self {
        Self {
            kind: SimKind::Risk,
            replicates: default_replicates(),
            sigma: 1.0,
            grid: Grid::default(),
            test: TestBlock::default(),
            max_cells: default_max_cells(),
        }
    }
}

fn default_replicates() -> usize {
    1000
}

fn default_max_cells() -> usize {
    10_000
}

/// Sweep axes. An empty axis keeps the base value from the rest of the config.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub d: Vec<usize>,
    #[serde(default)]
    pub s: Vec<usize>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    /// Spike magnitude multipliers; only meaningful for `spike_grid` θ.
    #[serde(default)]
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestBlock {
    #[serde(default)]
    pub t0: f64,
    /// Fixed test constant; calibrated on null replicates when absent.
    #[serde(default, rename = "B")]
    pub b: Option<f64>,
    /// Separations `ρ = A σ √Φ_o` at which type II errors are measured.
    #[serde(default = "default_a_grid")]
    pub a_grid: Vec<f64>,
    /// Target type I error of the calibrated constant.
    #[serde(default = "default_epsilon")]
    pub calibration_epsilon: f64,
    /// Null replicates used for calibration; defaults to `replicates`.
    #[serde(default)]
    pub calibration_replicates: Option<usize>,
}

impl Default for TestBlock {
    fn default() -> Self {
        Self {
            t0: 0.0,
            b: None,
            a_grid: default_a_grid(),
            calibration_epsilon: default_epsilon(),
            calibration_replicates: None,
        }
    }
}

fn default_a_grid() -> Vec<f64> {
    vec![0.05, 0.5, 1.0, 2.0, 4.0, 8.0]
}

fn default_epsilon() -> f64 {
    0.01
}

/// A rejected config, with the dotted path of the field at fault.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn at(path: &str, message: impl Into<String>) -> Self {
        Self {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parses and validates a config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig =
        serde_path_to_error::deserialize(de).map_err(|e| ConfigError {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    config.validate()?;
    Ok(config)
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::at(
            path,
            format!("must be finite and positive, got {v}"),
        ))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::at(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.loading.dimension() == 0 {
            return Err(ConfigError::at("loading", "dimension must be positive"));
        }
        self.noise
            .validate()
            .map_err(|e| ConfigError::at("noise", e.to_string()))?;

        let est = &self.estimator;
        if est.variants.is_empty() {
            return Err(ConfigError::at("estimator.variants", "must not be empty"));
        }
        if est.s == Some(0) {
            return Err(ConfigError::at("estimator.s", "must be at least 1"));
        }
        positive("estimator.kappa", est.kappa)?;
        if let Some(z) = est.zeta {
            positive("estimator.zeta", z)?;
        }
        if !(est.gamma_split > 0.0 && est.gamma_split <= 0.5) {
            return Err(ConfigError::at(
                "estimator.gamma_split",
                "must lie in (0, 1/2]",
            ));
        }
        if let Some(c) = est.c_h {
            positive("estimator.c_h", c)?;
        }

        let d = self.loading.dimension();
        match &self.theta {
            ThetaSpec::Zero => {}
            ThetaSpec::Fixed { support, values } => {
                if support.len() != values.len() {
                    return Err(ConfigError::at(
                        "theta.values",
                        "must have one value per support index",
                    ));
                }
                if let Some(&j) = support.iter().find(|&&j| j >= d) {
                    return Err(ConfigError::at(
                        "theta.support",
                        format!("index {j} out of range for dimension {d}"),
                    ));
                }
                let mut sorted = support.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != support.len() {
                    return Err(ConfigError::at("theta.support", "indices must be distinct"));
                }
                if values.iter().any(|v| !v.is_finite() || *v == 0.0) {
                    return Err(ConfigError::at(
                        "theta.values",
                        "must be finite and nonzero",
                    ));
                }
            }
            ThetaSpec::SpikeGrid { s_true, rho, .. } => {
                if *s_true == 0 {
                    return Err(ConfigError::at("theta.s_true", "must be at least 1"));
                }
                if !(rho.is_finite() && *rho >= 0.0) {
                    return Err(ConfigError::at(
                        "theta.rho",
                        "must be finite and non-negative",
                    ));
                }
            }
            ThetaSpec::Prior { s, c1, c_alpha2 } => {
                if *s == 0 {
                    return Err(ConfigError::at("theta.s", "must be at least 1"));
                }
                if !(*c1 > 0.0 && *c1 < 2.0) {
                    return Err(ConfigError::at("theta.c1", "must lie in (0, 2)"));
                }
                positive("theta.c_alpha2", *c_alpha2)?;
            }
        }

        let sim = &self.simulation;
        if sim.replicates == 0 {
            return Err(ConfigError::at(
                "simulation.replicates",
                "must be at least 1",
            ));
        }
        if !(sim.sigma.is_finite() && sim.sigma >= 0.0) {
            return Err(ConfigError::at(
                "simulation.sigma",
                "must be finite and non-negative",
            ));
        }
        let g = &sim.grid;
        if g.d.contains(&0) {
            return Err(ConfigError::at(
                "simulation.grid.d",
                "entries must be positive",
            ));
        }
        if !g.d.is_empty() && matches!(self.loading, LoadingSpec::Explicit { .. }) {
            return Err(ConfigError::at(
                "simulation.grid.d",
                "an explicit loading has a fixed dimension",
            ));
        }
        if g.s.contains(&0) {
            return Err(ConfigError::at(
                "simulation.grid.s",
                "entries must be positive",
            ));
        }
        if let Some(a) = g.alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(ConfigError::at(
                "simulation.grid.alpha",
                format!("entries must be finite and positive, got {a}"),
            ));
        }
        if let Some(r) = g.rho.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(ConfigError::at(
                "simulation.grid.rho",
                format!("entries must be finite and non-negative, got {r}"),
            ));
        }
        if !g.rho.is_empty() && !matches!(self.theta, ThetaSpec::SpikeGrid { .. }) {
            return Err(ConfigError::at(
                "simulation.grid.rho",
                "a rho axis needs a spike_grid theta",
            ));
        }
        if !g.s.is_empty() && matches!(self.theta, ThetaSpec::Fixed { .. }) {
            return Err(ConfigError::at(
                "simulation.grid.s",
                "a fixed theta has a fixed sparsity",
            ));
        }
        let cells = [g.d.len(), g.s.len(), g.alpha.len(), g.rho.len()]
            .iter()
            .map(|&n| n.max(1))
            .product::<usize>();
        if cells > sim.max_cells {
            return Err(ConfigError::at(
                "simulation.grid",
                format!("{cells} cells exceed max_cells = {}", sim.max_cells),
            ));
        }

        let t = &sim.test;
        if !t.t0.is_finite() {
            return Err(ConfigError::at("simulation.test.t0", "must be finite"));
        }
        if let Some(b) = t.b {
            positive("simulation.test.B", b)?;
        }
        if let Some(a) = t.a_grid.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(ConfigError::at(
                "simulation.test.a_grid",
                format!("entries must be finite and non-negative, got {a}"),
            ));
        }
        if !(t.calibration_epsilon > 0.0 && t.calibration_epsilon < 1.0) {
            return Err(ConfigError::at(
                "simulation.test.calibration_epsilon",
                "must lie in (0, 1)",
            ));
        }
        if t.calibration_replicates == Some(0) {
            return Err(ConfigError::at(
                "simulation.test.calibration_replicates",
                "must be at least 1",
            ));
        }
        if sim.kind == SimKind::MomCoverage && self.noise.class != NoiseClass::G {
            return Err(ConfigError::at(
                "noise.class",
                "median-of-means coverage needs symmetric noise (class G)",
            ));
        }
        Ok(())
    }

    /// Sparsity used by estimators when no grid axis overrides it.
    pub fn base_sparsity(&self) -> usize {
        self.estimator
            .s
            .or_else(|| self.theta.sparsity())
            .unwrap_or(1)
    }

    /// Hex SHA-256 of the canonical JSON form (defaults filled, fixed key
    /// order), so equivalent files hash equally.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serialises");
        hex(&Sha256::digest(&canonical))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
