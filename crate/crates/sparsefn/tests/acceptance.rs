//! End-to-end acceptance run. Each criterion prints one `PASS`/`FAIL` line
//! with the measured quantities and its wall time against the budget; the
//! process exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparsefn::output::report_csv;
use sparsefn::sim::{PowerRow, RiskRow, Rows};
use sparsefn::{parse_config, simulate, SimulationReport};
use sparsefn_core::estimators::Variant;
use sparsefn_core::lowerbound::{build_prior, chi2_mixture_bound, prior_moments};
use sparsefn_core::noise::sigma_alpha;
use sparsefn_core::rates::{oracle_rate, AdaptiveRates};
use sparsefn_core::rng::stream_rng;
use sparsefn_core::threshold::{log_phi_objective, solve_beta};
use sparsefn_core::{LoadingSpec, LoadingVector, NoiseClass, NoiseFamily, NoiseModel, Tolerances};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_loading(rng: &mut ChaCha8Rng, d: usize) -> LoadingVector {
    let values = (0..d)
        .map(|_| {
            let mag = 10f64.powf(rng.random_range(-3.0..3.0));
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    LoadingVector::new(values).unwrap()
}

fn homogeneous(d: usize) -> LoadingVector {
    LoadingVector::from_spec(&LoadingSpec::Homogeneous { d }).unwrap()
}

fn two_phase(d: usize) -> LoadingVector {
    LoadingVector::from_spec(&LoadingSpec::TwoPhase {
        d,
        gamma_d: 0.4,
        gamma_lambda: 0.2,
    })
    .unwrap()
}

// η_j = exp(-2((j-1)/d)^γ).
fn exp_decay(d: usize, gamma: f64) -> LoadingVector {
    LoadingVector::from_spec(&LoadingSpec::ExpDecay {
        d,
        c: 2.0 / (d as f64).powf(gamma),
        gamma,
    })
    .unwrap()
}

fn run(config: &str, workers: usize) -> SimulationReport {
    let cfg = parse_config(config).unwrap_or_else(|e| panic!("bad acceptance config: {e}"));
    simulate(&cfg, workers).unwrap_or_else(|e| panic!("simulation failed: {e}"))
}

fn risk_rows(report: &SimulationReport) -> &[RiskRow] {
    match &report.results {
        Rows::Risk(rows) => rows,
        other => panic!("expected risk rows, got {other:?}"),
    }
}

fn solver_exactness() -> Check {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xac01);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..1000 {
        let d = rng.random_range(1..=1000);
        let l = random_loading(&mut rng, d);
        let alpha = rng.random_range(0.5..3.0);
        let s = rng.random_range(1..=d);
        let target = s as f64 / 2.0;
        let sol = solve_beta(&l, alpha, target, &tol).map_err(|e| format!("d={d}: {e}"))?;
        worst_rel = worst_rel.max(sol.residual / target);
        ensure(sol.residual <= 1e-10 * target, || {
            format!("d={d} alpha={alpha} s={s}: residual {}", sol.residual)
        })?;
    }
    let mut worst_beta: f64 = 0.0;
    for d in [4usize, 100, 10_000, 1_000_000] {
        let l = homogeneous(d);
        let root = (d as f64).sqrt();
        let mut ss = vec![1, 2, root as usize, (2.0 * root) as usize, d];
        ss.retain(|&s| s >= 1 && s <= d);
        ss.dedup();
        for s in ss {
            let target = s as f64 / 2.0;
            let sol = solve_beta(&l, 2.0, target, &tol).map_err(|e| format!("d={d}: {e}"))?;
            let want = 2.0 * (2.0 * root / s as f64).ln();
            worst_beta = worst_beta.max((sol.beta - want).abs());
            worst_rel = worst_rel.max(sol.residual / target);
            ensure(sol.residual <= 1e-10 * target, || {
                format!("homogeneous d={d} s={s}: residual {}", sol.residual)
            })?;
            ensure((sol.beta - want).abs() <= 1e-8, || {
                format!("homogeneous d={d} s={s}: beta {} vs {want}", sol.beta)
            })?;
        }
    }
    Ok(format!(
        "max residual/target {worst_rel:.2e}, max homogeneous |beta error| {worst_beta:.2e}"
    ))
}

fn standard_grid() -> Vec<(String, LoadingVector)> {
    let mut out = Vec::new();
    for d in [100usize, 1000, 10_000] {
        out.push((format!("homogeneous d={d}"), homogeneous(d)));
        out.push((format!("two_phase d={d}"), two_phase(d)));
        out.push((format!("exp_decay d={d} gamma=1"), exp_decay(d, 1.0)));
        out.push((format!("exp_decay d={d} gamma=2"), exp_decay(d, 2.0)));
    }
    out
}

fn monotonicity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac02);
    let mut pairs = 0;
    while pairs < 10_000 {
        let d = rng.random_range(1..200);
        let l = random_loading(&mut rng, d);
        let alpha = rng.random_range(0.5..3.0);
        for _ in 0..100 {
            let a: f64 = rng.random_range(-50.0..50.0);
            let b: f64 = rng.random_range(-50.0..50.0);
            if a == b {
                continue;
            }
            let (lo, hi) = (a.min(b), a.max(b));
            let (flo, fhi) = (
                log_phi_objective(&l, alpha, lo),
                log_phi_objective(&l, alpha, hi),
            );
            ensure(flo > fhi, || {
                format!("phi not decreasing: d={d} alpha={alpha} at {lo} < {hi}")
            })?;
            pairs += 1;
        }
    }
    let mut k_max: f64 = 0.0;
    for alpha in [1.0, 2.0] {
        for (name, l) in standard_grid() {
            let s_max = l.len().min(200);
            let mut prev = f64::INFINITY;
            for s in 1..=s_max {
                let lam = oracle_rate(&l, alpha, s)
                    .map_err(|e| format!("{name}: {e}"))?
                    .lambda_o;
                ensure(lam <= prev, || {
                    format!("{name} alpha={alpha}: lambda_o rose at s={s}")
                })?;
                prev = lam;
            }
            let rates = AdaptiveRates::new(&l, alpha).map_err(|e| format!("{name}: {e}"))?;
            let mut prev = f64::INFINITY;
            for lvl in rates.levels() {
                ensure(lvl.lambda <= prev, || {
                    format!("{name} alpha={alpha}: lambda_* rose at s={}", lvl.s)
                })?;
                prev = lvl.lambda;
            }
            let (k1, k2) = rates.almost_monotone_constants();
            k_max = k_max.max(k1).max(k2);
            ensure(k1 < 100.0 && k2 < 100.0, || {
                format!("{name} alpha={alpha}: K = ({k1}, {k2})")
            })?;
        }
    }
    Ok(format!(
        "{pairs} phi pairs strictly decreasing, max K {k_max:.3}"
    ))
}

// s² log^{2/α}(1 + m^{α/2}/s^α).
fn homogeneous_shape(m: f64, s: f64, alpha: f64) -> f64 {
    s * s
        * (m.powf(alpha / 2.0) / s.powf(alpha))
            .ln_1p()
            .powf(2.0 / alpha)
}

fn closed_forms() -> Check {
    let mut bands: Vec<(&str, f64, f64)> = vec![
        ("homogeneous", f64::INFINITY, 0.0),
        ("two_phase", f64::INFINITY, 0.0),
        ("exp_decay", f64::INFINITY, 0.0),
    ];
    let mut record = |k: usize, r: f64| {
        bands[k].1 = bands[k].1.min(r);
        bands[k].2 = bands[k].2.max(r);
    };
    let mut failures = Vec::new();
    for d in [100usize, 1000, 10_000] {
        let df = d as f64;
        let mut ss = vec![
            1,
            df.powf(0.25).floor() as usize,
            df.sqrt().floor() as usize,
            (2.0 * df.sqrt()).floor() as usize,
        ];
        ss.dedup();
        let hom = homogeneous(d);
        let tp = two_phase(d);
        for alpha in [1.0, 2.0] {
            for &s in &ss {
                let sf = s as f64;
                let check = |name: &str, r: f64, failures: &mut Vec<String>| {
                    if !(0.2..=10.0).contains(&r) {
                        failures.push(format!("{name} d={d} s={s} alpha={alpha}: ratio {r:.3}"));
                    }
                };
                let r =
                    oracle_rate(&hom, alpha, s).unwrap().phi_o / homogeneous_shape(df, sf, alpha);
                record(0, r);
                check("homogeneous", r, &mut failures);

                // Sum of the rates of the ⌈d^0.4⌉ head at height d^0.2 and of
                // the unit tail.
                let lam = df.powf(0.2);
                let head = df.powf(0.4);
                let want = lam * lam * homogeneous_shape(head, sf, alpha)
                    + homogeneous_shape(df, sf, alpha);
                let r = oracle_rate(&tp, alpha, s).unwrap().phi_o / want;
                record(1, r);
                check("two_phase", r, &mut failures);

                for gamma in [1.0, 2.0] {
                    let ed = exp_decay(d, gamma);
                    let j0 = ed.values().iter().take_while(|v| v.abs() >= 0.5).count();
                    if s > j0 {
                        continue;
                    }
                    let r = oracle_rate(&ed, alpha, s).unwrap().phi_o
                        / oracle_rate(&homogeneous(j0), alpha, s).unwrap().phi_o;
                    record(2, r);
                    check("exp_decay", r, &mut failures);
                }
            }
        }
    }
    let summary = bands
        .iter()
        .map(|(n, lo, hi)| format!("{n} [{lo:.3}, {hi:.3}]"))
        .collect::<Vec<_>>()
        .join(", ");
    if failures.is_empty() {
        Ok(format!("ratio ranges {summary}"))
    } else {
        Err(format!("{}; ranges {summary}", failures.join("; ")))
    }
}

fn gaussian_identity() -> Check {
    let s2 = sigma_alpha(2.0);
    ensure(s2 == std::f64::consts::SQRT_2, || {
        format!("sigma_2 = {s2:e}")
    })?;
    let n = 100_000;
    let weibull = NoiseModel::new(NoiseFamily::SymmWeibull, 2.0, 2.0, NoiseClass::G)
        .unwrap()
        .sample(n, 0xac04);
    let gauss = NoiseModel::gaussian().sample(n, 0xac05);
    let ks = sparsefn::stats::ks_two_sample(&weibull, &gauss);
    ensure(ks.p_value > 1e-3, || {
        format!("KS D={:.4} p={:.2e}", ks.statistic, ks.p_value)
    })?;
    Ok(format!(
        "sigma_2 = sqrt(2) exactly, KS D={:.4} p={:.3}",
        ks.statistic, ks.p_value
    ))
}

const SPIKE_RISK: &str = r#"{
    "schema_version": 1,
    "loading": {"kind": "homogeneous", "d": 100},
    "noise": {"family": "gaussian", "alpha": 2.0, "tau": 2.0, "class": "G"},
    "estimator": {"variants": [VARIANTS]},
    "theta": {"kind": "spike_grid", "s_true": 5, "rho": 1.0},
    "simulation": {
        "replicates": 2000,
        "grid": {"s": [2, 5], "rho": [0, 0.5, 1, 1.25, 1.5, 1.75, 2, 3]}
    },
    "seed": SEED
}"#;

fn spike_risk(variants: &str, seed: u64) -> SimulationReport {
    let text = SPIKE_RISK
        .replace("VARIANTS", variants)
        .replace("SEED", &seed.to_string());
    run(&text, 0)
}

fn paired(rows: &[RiskRow], a: Variant, b: Variant) -> Vec<(&RiskRow, &RiskRow)> {
    rows.iter()
        .filter(|r| r.estimator == a)
        .map(|ra| {
            let rb = rows
                .iter()
                .find(|r| r.estimator == b && r.cell == ra.cell)
                .expect("paired row");
            (ra, rb)
        })
        .collect()
}

fn oracle_risk() -> Check {
    let report = spike_risk(r#""oracle", "plug-in""#, 0xac05);
    let rows = risk_rows(&report);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for (o, p) in paired(rows, Variant::Oracle, Variant::PlugIn) {
        worst = worst.max(o.ratio);
        if o.ratio > 20.0 {
            failures.push(format!("oracle ratio {:.3} at {}", o.ratio, o.cell));
        }
        if (o.cell.s as f64) <= (o.cell.d as f64).sqrt() / 4.0 {
            min_gap = min_gap.min(p.ratio / o.ratio);
            if p.ratio <= o.ratio {
                failures.push(format!(
                    "plug-in {:.3} does not exceed oracle {:.3} at {}",
                    p.ratio, o.ratio, o.cell
                ));
            }
        }
    }
    ensure(min_gap.is_finite(), || "no cell with s <= sqrt(d)/4".into())?;
    if failures.is_empty() {
        Ok(format!(
            "max oracle ratio {worst:.3}, min plug-in/oracle ratio in sparse cells {min_gap:.2}"
        ))
    } else {
        Err(failures.join("; "))
    }
}

fn adaptation_cost() -> Check {
    let report = spike_risk(r#""oracle", "adaptive""#, 0xac06);
    let rows = risk_rows(&report);
    let s0 = AdaptiveRates::new(&homogeneous(100), 2.0).unwrap().s0();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (a, o) in paired(rows, Variant::Adaptive, Variant::Oracle) {
        let r = a.mse / o.mse;
        let m = a.cell.s.min(s0) as f64;
        let bound = 4.0 * (1.0 + m.ln()).powi(2);
        worst = worst.max(r / bound);
        if r.is_nan() || r > bound {
            failures.push(format!("{}: MSE ratio {r:.3} > {bound:.3}", a.cell));
        }
    }
    if failures.is_empty() {
        Ok(format!("s0={s0}, max MSE ratio / bound {worst:.3}"))
    } else {
        Err(format!("s0={s0}: {}", failures.join("; ")))
    }
}

fn mom_coverage() -> Check {
    let text = r#"{
        "schema_version": 1,
        "loading": {"kind": "homogeneous", "d": 1000},
        "noise": {"family": "gaussian", "alpha": 2.0, "tau": 2.0, "class": "G"},
        "estimator": {"gamma_split": 0.5},
        "theta": {"kind": "spike_grid", "s_true": 10, "rho": 1.0, "scale": "absolute"},
        "simulation": {"kind": "mom_coverage", "replicates": 2000},
        "seed": 44039
    }"#;
    let report = run(text, 0);
    let Rows::MomCoverage(rows) = &report.results else {
        return Err("expected coverage rows".into());
    };
    let row = &rows[0];
    ensure(row.coverage >= 0.99, || {
        format!("coverage {} over {} replicates", row.coverage, row.n_rep)
    })?;
    Ok(format!(
        "coverage {:.4}, mean |rel err| {:.4}, {} blocks",
        row.coverage, row.mean_abs_rel_err, row.blocks
    ))
}

fn test_separation() -> Check {
    let text = r#"{
        "schema_version": 1,
        "loading": {"kind": "homogeneous", "d": 100},
        "noise": {"family": "gaussian", "alpha": 2.0, "tau": 2.0, "class": "G"},
        "estimator": {"s": 5},
        "simulation": {
            "kind": "test_power",
            "replicates": 2000,
            "test": {"a_grid": [0.05, 8]}
        },
        "seed": 44040
    }"#;
    let report = run(text, 0);
    let Rows::TestPower(rows) = &report.results else {
        return Err("expected test rows".into());
    };
    let at = |a: f64| -> &PowerRow { rows.iter().find(|r| r.a == a).expect("row for A") };
    let (far, near) = (at(8.0), at(0.05));
    let far_total = far.type_i + far.type_ii;
    let near_total = near.type_i + near.type_ii;
    ensure(far.b_calibrated, || "B was not calibrated".into())?;
    let detail = format!(
        "B={:.3}, A=8: {:.4} + {:.4} = {far_total:.4}, A=0.05: {:.4} + {:.4} = {near_total:.4}",
        far.b, far.type_i, far.type_ii, near.type_i, near.type_ii
    );
    ensure(far_total <= 0.1 && near_total >= 0.8, || detail.clone())?;
    Ok(detail)
}

fn prior_construction() -> Check {
    // Mass: Σπ = c1 s / 2 wherever λ_o > 0.
    for (name, l) in standard_grid().into_iter().filter(|(_, l)| l.len() <= 1000) {
        for s in [2usize, 10, 30] {
            let lambda_o = oracle_rate(&l, 2.0, s).unwrap().lambda_o;
            let mut prev = 0.0;
            for c1 in [0.1, 0.25, 0.5, 1.0] {
                let p = build_prior(&l, 2.0, s, c1, 1.0).map_err(|e| format!("{name}: {e}"))?;
                if lambda_o > 0.0 {
                    let mass: f64 = p.pi.iter().sum();
                    let want = c1 * s as f64 / 2.0;
                    ensure((mass - want).abs() <= 1e-9 * want, || {
                        format!("{name} s={s} c1={c1}: mass {mass} vs {want}")
                    })?;
                }
                let b = chi2_mixture_bound(&p, 1.0).unwrap().bound;
                ensure(b >= prev, || {
                    format!("{name} s={s}: chi2 bound fell at c1={c1}")
                })?;
                prev = b;
            }
        }
    }

    let l = homogeneous(10_000);
    let (s, c1) = (30, 0.5);
    let p = build_prior(&l, 2.0, s, c1, 1.0).map_err(|e| e.to_string())?;
    let m = prior_moments(&p, &l);
    let scale = p.lambda_o * s as f64 + p.nu;
    ensure(scale >= 30.0, || {
        format!("fixture too small: lambda s + nu = {scale}")
    })?;

    let n = 100_000;
    let draws: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let theta = p.sample_with(&mut stream_rng(0xac09, &[k as u64]));
            let support = theta.iter().filter(|t| **t != 0.0).count() as f64;
            (support, l.functional(&theta))
        })
        .collect();
    let nf = n as f64;
    let mean = |f: &dyn Fn(&(f64, f64)) -> f64| draws.iter().map(f).sum::<f64>() / nf;
    let check_moment = |name: &str, x: &dyn Fn(&(f64, f64)) -> f64, mu: f64, var: f64| {
        let sample_mean = mean(x);
        let se_mean = (var / nf).sqrt();
        let sample_var = mean(&|d| (x(d) - sample_mean).powi(2));
        let m4 = mean(&|d| (x(d) - sample_mean).powi(4));
        let se_var = ((m4 - sample_var * sample_var) / nf).sqrt();
        ensure((sample_mean - mu).abs() <= 3.0 * se_mean, || {
            format!("{name} mean {sample_mean} vs {mu} (se {se_mean:.2e})")
        })?;
        ensure((sample_var - var).abs() <= 3.0 * se_var, || {
            format!("{name} variance {sample_var} vs {var} (se {se_var:.2e})")
        })
    };
    check_moment("support", &|d| d.0, m.mean_support, m.var_support)?;
    check_moment("L(theta)", &|d| d.1, m.mean_l, m.var_l)?;

    let level = p.separation_level();
    let hits = draws[..10_000]
        .iter()
        .filter(|(support, value)| *support <= s as f64 && *value >= level)
        .count();
    let freq = hits as f64 / 10_000.0;
    ensure(freq >= 0.7, || format!("separation frequency {freq}"))?;
    Ok(format!(
        "mass exact, moments within 3 se, separation frequency {freq:.4} (level {level:.3})"
    ))
}

fn determinism() -> Check {
    let configs = [
        SPIKE_RISK
            .replace(
                "VARIANTS",
                r#""oracle", "plug-in", "adaptive", "unknown-sigma", "nonsym""#,
            )
            .replace("2000", "200")
            .replace("SEED", "1"),
        r#"{
            "schema_version": 1,
            "loading": {"kind": "exp_decay", "d": 300, "c": 0.02, "gamma": 1.0},
            "noise": {"family": "symm_weibull", "alpha": 1.0, "tau": 3.0, "class": "G"},
            "estimator": {"variants": ["oracle", "family", "adaptive"]},
            "theta": {"kind": "prior", "s": 8},
            "simulation": {"replicates": 300, "grid": {"alpha": [1.0, 2.0]}},
            "seed": 2
        }"#
        .to_string(),
        r#"{
            "schema_version": 1,
            "loading": {"kind": "homogeneous", "d": 400},
            "noise": {"family": "gaussian", "alpha": 2.0, "tau": 2.0, "class": "G"},
            "theta": {"kind": "spike_grid", "s_true": 4, "rho": 1.0, "scale": "absolute"},
            "simulation": {"kind": "mom_coverage", "replicates": 500, "grid": {"d": [400, 800]}},
            "seed": 3
        }"#
        .to_string(),
        r#"{
            "schema_version": 1,
            "loading": {"kind": "homogeneous", "d": 100},
            "noise": {"family": "gaussian", "alpha": 2.0, "tau": 2.0, "class": "G"},
            "estimator": {"s": 5},
            "simulation": {"kind": "test_power", "replicates": 300},
            "seed": 4
        }"#
        .to_string(),
    ];
    for (i, text) in configs.iter().enumerate() {
        let base = report_csv(&run(text, 1));
        for workers in [2, 3, 8] {
            let other = report_csv(&run(text, workers));
            ensure(other == base, || {
                format!("config {i}: CSV differs with {workers} workers")
            })?;
        }
    }

    // The same contract through the binary.
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, &configs[0]).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for workers in ["1", "8"] {
        let out = dir.path().join(format!("w{workers}.csv"));
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_sparsefn"))
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--workers", workers])
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || {
            format!("simulate exited with {status}")
        })?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || {
        "binary CSV differs between 1 and 8 workers".into()
    })?;
    Ok(format!(
        "{} configs byte-identical across 1/2/3/8 workers",
        configs.len()
    ))
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    check: fn() -> Check,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            name: "solver exactness",
            budget: secs(10),
            check: solver_exactness,
        },
        Criterion {
            name: "monotonicity suites",
            budget: secs(30),
            check: monotonicity,
        },
        Criterion {
            name: "rate/closed-form agreement",
            budget: secs(60),
            check: closed_forms,
        },
        Criterion {
            name: "gaussian identity",
            budget: secs(5),
            check: gaussian_identity,
        },
        Criterion {
            name: "oracle risk bound",
            budget: secs(120),
            check: oracle_risk,
        },
        Criterion {
            name: "adaptation cost",
            budget: secs(300),
            check: adaptation_cost,
        },
        Criterion {
            name: "MoM coverage",
            budget: secs(30),
            check: mom_coverage,
        },
        Criterion {
            name: "test separation",
            budget: secs(120),
            check: test_separation,
        },
        Criterion {
            name: "prior construction",
            budget: secs(60),
            check: prior_construction,
        },
        Criterion {
            name: "determinism",
            budget: secs(60),
            check: determinism,
        },
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {}: {} ({:.1} s of {} s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
