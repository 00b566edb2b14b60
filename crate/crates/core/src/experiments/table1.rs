//! Random bounded-patience instances with `M = 1`: how often and by how much the
//! optimal cycle beats fixed prices and two-price cycles.
//!
//! Sampling: `v_1 = 1`, `v_{i+1} = v_i (1 + e zeta_i)` with `zeta_i ~ U(0,1)`; each
//! row of `Q` is `K` i.i.d. `U(0,1)` draws rescaled to sum to `1 - nu`; `gamma`
//! uniform. Draw `i` uses ChaCha8 stream `i` of the cell seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{outperform_pct, uniform_model, Provenance, OUTPERFORM_TOL};
use crate::error::Result;
use crate::market_model::{MarketModel, PaceConfig, Patience};
use crate::optimizer::{fixed_price_best, k_cyclic_best, optimize};

pub const SCHEME: &str = "q-rows: iid U(0,1) rescaled to 1-nu; v: multiplicative U(0,1) gaps; gamma uniform";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1Cell {
    pub tau: usize,
    pub nu: f64,
    pub e: f64,
}

/// The twelve parameter cells: a tau block, a nu block and an e block.
pub fn table1_grid() -> Vec<Table1Cell> {
    let c = |tau, nu, e| Table1Cell { tau, nu, e };
    vec![
        c(1, 0.1, 0.1),
        c(5, 0.1, 0.1),
        c(9, 0.1, 0.1),
        c(13, 0.1, 0.1),
        c(5, 0.0, 0.1),
        c(5, 0.1, 0.1),
        c(5, 0.2, 0.1),
        c(5, 0.3, 0.1),
        c(5, 0.1, 0.05),
        c(5, 0.1, 0.15),
        c(5, 0.1, 0.25),
        c(5, 0.1, 0.35),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub tau: usize,
    pub nu: f64,
    pub e: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub n_draws: usize,
    /// % of draws where the optimum beats every fixed price.
    pub f: f64,
    /// Mean % gain over the best fixed price, given a non-fixed optimum.
    pub d: f64,
    /// % of draws where the optimum beats every fixed price and two-price cycle.
    pub f_prime: f64,
    /// Mean % gain over fixed and two-price cycles, given an optimum with >= 3 prices.
    pub d_prime: f64,
    /// % of draws whose optimal cycle has at least three phases.
    pub three_cyclic: f64,
    /// % of draws whose optimal cycle is monotone decreasing.
    pub monotone: f64,
    pub max_cycle_length: usize,
    #[serde(flatten)]
    pub provenance: Provenance,
}

pub fn draw_instance(k: usize, tau: usize, nu: f64, e: f64, rng: &mut impl Rng) -> MarketModel {
    let mut v = vec![1.0];
    for _ in 1..k {
        let z: f64 = rng.gen();
        let last = *v.last().unwrap();
        v.push(last * (1.0 + e * z));
    }
    let q = (0..k)
        .map(|_| {
            let row: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
            let s: f64 = row.iter().sum();
            row.iter().map(|x| x / s * (1.0 - nu)).collect()
        })
        .collect();
    uniform_model(v, q, Patience::Bounded(tau))
}

struct Outcome {
    cycle_length: usize,
    monotone: bool,
    gain_fixed: f64,
    gain_two: f64,
    beats_fixed: bool,
    beats_two: bool,
}

fn evaluate(model: &MarketModel, tau: usize) -> Result<Outcome> {
    let opt = optimize(model, &PaceConfig::new(tau, tau)?)?;
    let (_, fixed) = fixed_price_best(model)?;
    let two = if model.k() >= 2 {
        fixed.max(k_cyclic_best(model, tau, 2)?.value)
    } else {
        fixed
    };
    Ok(Outcome {
        cycle_length: opt.diagnostics.cycle_length,
        monotone: opt.diagnostics.monotone_decreasing,
        gain_fixed: outperform_pct(opt.value, fixed),
        gain_two: outperform_pct(opt.value, two),
        beats_fixed: opt.value > fixed + OUTPERFORM_TOL,
        beats_two: opt.value > two + OUTPERFORM_TOL,
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

pub fn table1_run(cell: Table1Cell, k: usize, n_draws: usize, seed: u64) -> Result<Table1Row> {
    let outcomes: Vec<Outcome> = (0..n_draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let m = draw_instance(k, cell.tau, cell.nu, cell.e, &mut rng);
            evaluate(&m, cell.tau)
        })
        .collect::<Result<_>>()?;
    let n = n_draws.max(1) as f64;
    let pct = |p: &dyn Fn(&Outcome) -> bool| 100.0 * outcomes.iter().filter(|o| p(o)).count() as f64 / n;
    Ok(Table1Row {
        tau: cell.tau,
        nu: cell.nu,
        e: cell.e,
        k,
        n_draws,
        f: pct(&|o| o.beats_fixed),
        d: mean(outcomes.iter().filter(|o| o.cycle_length > 1).map(|o| o.gain_fixed)),
        f_prime: pct(&|o| o.beats_two),
        d_prime: mean(outcomes.iter().filter(|o| o.cycle_length >= 3).map(|o| o.gain_two)),
        three_cyclic: pct(&|o| o.cycle_length >= 3),
        monotone: pct(&|o| o.monotone),
        max_cycle_length: outcomes.iter().map(|o| o.cycle_length).max().unwrap_or(0),
        provenance: Provenance {
            seed: Some(seed),
            scheme: SCHEME.into(),
            tolerance: OUTPERFORM_TOL,
        },
    })
}

/// Table rows as CSV.
pub fn write_csv<W: std::io::Write>(rows: &[Table1Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "tau", "nu", "e", "K", "n_draws", "f", "d", "f_prime", "d_prime", "three_cyclic", "monotone",
        "max_cycle_length", "seed", "scheme", "tolerance",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.tau.to_string(),
            r.nu.to_string(),
            r.e.to_string(),
            r.k.to_string(),
            r.n_draws.to_string(),
            format!("{:.2}", r.f),
            format!("{:.3}", r.d),
            format!("{:.2}", r.f_prime),
            format!("{:.3}", r.d_prime),
            format!("{:.2}", r.three_cyclic),
            format!("{:.2}", r.monotone),
            r.max_cycle_length.to_string(),
            r.provenance.seed.map_or(String::new(), |s| s.to_string()),
            r.provenance.scheme.clone(),
            r.provenance.tolerance.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Io(std::io::Error::other(e))
}
