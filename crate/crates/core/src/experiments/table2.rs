//! Unbounded patience: truncate at `tau_eps`, optimize with `sigma = tau_eps`, and
//! compare `R(pi_eps) - eps` with the best fixed price.

use rayon::prelude::*;
use serde::Serialize;

use super::table1::csv_err;
use super::{uniform_model, Provenance};
use crate::error::Result;
use crate::market_model::{truncate_to_bp_with_nu, MarketModel, PaceConfig, Patience};
use crate::optimizer::{fixed_price_best, optimize};

pub const TABLE2_EPSILONS: [f64; 7] = [1e-13, 1e-5, 1e-3, 1e-2, 0.1, 0.2, 0.4];
pub const TABLE2_NU: f64 = 0.3;

/// The unbounded-patience instance of the table (uniform `gamma`).
pub fn table2_model() -> MarketModel {
    uniform_model(
        vec![1.0, 1.2, 1.5, 2.0],
        vec![
            vec![0.65, 0.05, 0.0, 0.05],
            vec![0.05, 0.65, 0.0, 0.05],
            vec![0.05, 0.05, 0.6, 0.0],
            vec![0.0, 0.0, 0.0, 0.6],
        ],
        Patience::Unbounded,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Row {
    pub epsilon: f64,
    pub tau_eps: usize,
    /// Optimal cycle of `tau_eps`-phases.
    pub policy: Vec<usize>,
    pub value: f64,
    pub fixed_best: usize,
    pub fixed_value: f64,
    /// `value - eps - fixed_value`.
    pub delta: f64,
    /// `v_K eps / nu`.
    pub error_bound: f64,
    pub nu: f64,
    #[serde(flatten)]
    pub provenance: Provenance,
}

pub fn table2_run(epsilons: &[f64], model: &MarketModel, nu_override: Option<f64>) -> Result<Vec<Table2Row>> {
    let nu = nu_override.unwrap_or_else(|| crate::market_model::nu(model));
    epsilons
        .par_iter()
        .map(|&eps| {
            let (bp, bound) = truncate_to_bp_with_nu(model, eps, nu_override)?;
            let tau = bp.tau_finite()?;
            let opt = optimize(&bp, &PaceConfig::new(tau, tau)?)?;
            let (kf, fv) = fixed_price_best(&bp)?;
            Ok(Table2Row {
                epsilon: eps,
                tau_eps: tau,
                policy: opt.prices.clone(),
                value: opt.value,
                fixed_best: kf,
                fixed_value: fv,
                delta: opt.value - eps - fv,
                error_bound: bound,
                nu,
                provenance: Provenance {
                    seed: None,
                    scheme: format!("M = 1, sigma = tau_eps, timing {:?}", bp.timing).to_lowercase(),
                    tolerance: 0.0,
                },
            })
        })
        .collect()
}

fn policy_str(p: &[usize]) -> String {
    let s: Vec<String> = p.iter().map(|k| k.to_string()).collect();
    format!("({})", s.join(","))
}

pub fn write_csv<W: std::io::Write>(rows: &[Table2Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "epsilon", "tau_eps", "policy", "value", "delta", "fixed_best", "fixed_value", "nu", "scheme",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            format!("{:e}", r.epsilon),
            r.tau_eps.to_string(),
            policy_str(&r.policy),
            format!("{:.4}", r.value),
            format!("{:.4}", r.delta),
            r.fixed_best.to_string(),
            format!("{:.4}", r.fixed_value),
            r.nu.to_string(),
            r.provenance.scheme.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
