//! CSV and JSON renderings of reports.
//!
//! CSV files start with a `#` line carrying the provenance triple
//! `tool_version`, `config_hash`, `seed`; readers such as pandas skip it with
//! `comment="#"`. Floats use Rust's shortest round-trip formatting, so equal
//! reports always render to equal bytes.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::sim::{Cell, Rows, SimulationReport};

/// Hex SHA-256 of the JSON form of `value`.
pub fn hash_json(value: &impl Serialize) -> String {
    let bytes = serde_json::to_vec(value).expect("value serialises");
    hex(&Sha256::digest(&bytes))
}

pub fn provenance_line(config_hash: &str, seed: Option<u64>) -> String {
    let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    format!(
        "# tool_version={} config_hash={config_hash} seed={seed}\n",
        crate::TOOL_VERSION
    )
}

fn cell_fields(c: &Cell) -> String {
    let rho = c.rho.map(|r| r.to_string()).unwrap_or_default();
    format!("{},{},{},{}", c.d, c.s, c.alpha, rho)
}

/// The report as CSV, one row per (cell, estimator) or (cell, separation).
pub fn report_csv(report: &SimulationReport) -> String {
    let mut out = provenance_line(&report.config_hash, Some(report.seed));
    match &report.results {
        Rows::Risk(rows) => {
            out.push_str("d,s,alpha,rho,estimator,n_rep,mse,mse_se,rate_kind,rate_value,ratio\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    cell_fields(&r.cell),
                    r.estimator,
                    r.n_rep,
                    r.mse,
                    r.mse_se,
                    r.rate_kind.name(),
                    r.rate_value,
                    r.ratio
                );
            }
        }
        Rows::MomCoverage(rows) => {
            out.push_str("d,s,alpha,rho,n_rep,blocks,coverage,mean_abs_rel_err\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    cell_fields(&r.cell),
                    r.n_rep,
                    r.blocks,
                    r.coverage,
                    r.mean_abs_rel_err
                );
            }
        }
        Rows::TestPower(rows) => {
            out.push_str("d,s,alpha,rho,a,separation,b,n_rep,type_i,type_ii\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    cell_fields(&r.cell),
                    r.a,
                    r.rho,
                    r.b,
                    r.n_rep,
                    r.type_i,
                    r.type_ii
                );
            }
        }
    }
    out
}

pub fn report_json(report: &SimulationReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialises");
    s.push('\n');
    s
}
