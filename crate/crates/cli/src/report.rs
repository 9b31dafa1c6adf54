//! The machine-readable report emitted by `error` and `fit-network`.
//!
//! Reports are deterministic: identical problem and seed produce
//! byte-identical JSON. Timings therefore go to the log on standard error,
//! never into the report.

use ridgegap::closed_form::ClosedFormReport;
use ridgegap::extremal::SupResult;
use ridgegap::geometry::SampledDomain;
use ridgegap::network::ShallowNetwork;
use ridgegap::ridge::BestApprox;
use serde::Serialize;
use std::collections::BTreeMap;

/// Relative tolerance for the duality agreement flag.
pub const AGREEMENT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProblemEcho {
    pub dims: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub domain: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    pub point_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub activation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Best ridge-sum tables keyed by level id, with the level-id to
/// projection-value dictionaries needed to interpret them.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BestRidgeReport {
    pub error: f64,
    pub g_table: BTreeMap<usize, f64>,
    pub h_table: BTreeMap<usize, f64>,
    pub a_level_values: BTreeMap<usize, f64>,
    pub b_level_values: BTreeMap<usize, f64>,
}

impl BestRidgeReport {
    pub fn new(domain: &SampledDomain, best: &BestApprox) -> BestRidgeReport {
        BestRidgeReport {
            error: best.error,
            g_table: best
                .v0
                .g_table()
                .iter()
                .enumerate()
                .map(|(i, &v)| (i, v))
                .collect(),
            h_table: best
                .v0
                .h_table()
                .iter()
                .enumerate()
                .map(|(i, &v)| (i, v))
                .collect(),
            a_level_values: domain
                .a_level_values()
                .iter()
                .enumerate()
                .map(|(i, &v)| (i, v))
                .collect(),
            b_level_values: domain
                .b_level_values()
                .iter()
                .enumerate()
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NetworkReport {
    pub network: ShallowNetwork,
    pub error: f64,
    pub g_sup_error: f64,
    pub h_sup_error: f64,
}

/// Agreement flags between the independent error routes.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Agreement {
    /// Closed-path supremum equals the LP error within tolerance.
    pub duality_equality: bool,
    /// Corner rule equals the LP error (boxes in the smooth class only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corner_formula: Option<bool>,
    /// Quadrature value equals the corner value within tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fubini: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub problem: ProblemEcho,
    pub lower_bound: SupResult,
    pub best_ridge: BestRidgeReport,
    pub closed_form: Option<ClosedFormReport>,
    pub network: Option<NetworkReport>,
    pub agreement: Agreement,
    pub notes: Vec<String>,
}

pub fn duality_agrees(lower: &SupResult, best: &BestApprox) -> bool {
    (lower.value - best.error).abs() <= AGREEMENT_TOL * best.error.max(1.0)
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}
