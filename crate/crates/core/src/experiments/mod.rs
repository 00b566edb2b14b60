//! Reproduction drivers for the worked examples, tables and findings.

pub mod example2;
pub mod findings;
pub mod table1;
pub mod table2;
pub mod two_price;

use serde::Serialize;

use crate::market_model::{MarketModel, Patience};

pub use example2::{example2_build, example2_verify_claim, Example2Claim, Example2Instance};
pub use findings::{finding5_run, finding6_run, Finding5Report, Finding6Report};
pub use table1::{table1_grid, table1_run, Table1Cell, Table1Row};
pub use table2::{table2_model, table2_run, Table2Row, TABLE2_EPSILONS};
pub use two_price::{two_price_analyze, ResetClass, TwoPriceReport};

/// Absolute margin for "policy A beats policy B".
pub const OUTPERFORM_TOL: f64 = 1e-9;

/// A named pass/fail check inside a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Provenance stamped on every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub scheme: String,
    pub tolerance: f64,
}

/// `100 (a - b) / b`.
pub fn outperform_pct(a: f64, b: f64) -> f64 {
    100.0 * (a - b) / b
}

pub(crate) fn uniform_model(v: Vec<f64>, q: Vec<Vec<f64>>, tau: Patience) -> MarketModel {
    let k = v.len();
    MarketModel::new(v, vec![1.0 / k as f64; k], q, tau)
}
