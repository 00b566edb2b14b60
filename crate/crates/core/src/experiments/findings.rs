//! Two hand-picked comparisons against constant-valuation reasoning, and a
//! three-price optimum with `M = 3`.

use rayon::prelude::*;
use serde::Serialize;

use super::{outperform_pct, uniform_model};
use crate::error::Result;
use crate::market_model::{MarketModel, PaceConfig, Patience};
use crate::optimizer::{fixed_price_best, k_cyclic_best, optimize};
use crate::policy::CyclicPolicy;
use crate::revenue_kernel::long_run_average;

const TAU5: usize = 10;

pub fn finding5_instance1(q: Option<Vec<Vec<f64>>>) -> MarketModel {
    let q = q.unwrap_or_else(|| {
        vec![
            vec![0.9, 0.05, 0.03, 0.02],
            vec![0.05, 0.8, 0.1, 0.05],
            vec![0.0, 0.05, 0.95, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ]
    });
    uniform_model(vec![1.0, 1.3, 1.45, 1.6], q, Patience::Bounded(TAU5))
}

pub fn finding5_instance2(q: Option<Vec<Vec<f64>>>) -> MarketModel {
    let q = q.unwrap_or_else(|| {
        vec![
            vec![0.7, 0.1, 0.05, 0.07],
            vec![0.05, 0.7, 0.07, 0.07],
            vec![0.07, 0.07, 0.7, 0.0],
            vec![0.0, 0.0, 0.05, 0.8],
        ]
    });
    uniform_model(vec![1.0, 1.1, 1.25, 1.4], q, Patience::Bounded(TAU5))
}

fn diag(d: &[f64]) -> Vec<Vec<f64>> {
    (0..d.len())
        .map(|i| (0..d.len()).map(|j| if i == j { d[i] } else { 0.0 }).collect())
        .collect()
}

fn lra(model: &MarketModel, prices: &[usize], sigma: usize) -> Result<f64> {
    long_run_average(model, &CyclicPolicy::from_prices(prices, sigma))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding5Report {
    pub instance1_optimum: Vec<usize>,
    pub instance1_value: f64,
    pub instance1_identity_optimum: Vec<usize>,
    /// Identity-Q optimum evaluated under the true `Q`.
    pub instance1_identity_value: f64,
    /// `100 (R* - R(identity optimum)) / R*`.
    pub instance1_loss_pct: f64,
    pub instance2_optimum: Vec<usize>,
    pub instance2_optimum_value: f64,
    pub instance2_value_321: f64,
    pub instance2_value_1: f64,
    /// `100 (R(3,2,1) - R(1)) / R(1)`.
    pub instance2_gain_pct: f64,
    pub diagonal_grid: Vec<f64>,
    pub diagonal_points: usize,
    pub diagonal_fixed1: usize,
    /// Grid points whose optimum is not the fixed price `(1)`, with that optimum.
    pub diagonal_exceptions: Vec<(Vec<f64>, Vec<usize>)>,
}

pub fn finding5_run() -> Result<Finding5Report> {
    let pace = PaceConfig::new(TAU5, TAU5)?;
    let m1 = finding5_instance1(None);
    let o1 = optimize(&m1, &pace)?;
    let id = finding5_instance1(Some(diag(&[1.0; 4])));
    let oid = optimize(&id, &pace)?;
    let r_id = lra(&m1, &oid.prices, TAU5)?;

    let m2 = finding5_instance2(None);
    let o2 = optimize(&m2, &pace)?;
    let r321 = lra(&m2, &[3, 2, 1], TAU5)?;
    let r1 = lra(&m2, &[1], TAU5)?;

    let grid: Vec<f64> = vec![0.6, 0.7, 0.8, 0.9, 1.0];
    let points: Vec<Vec<f64>> = (0..grid.len().pow(4))
        .map(|mut i| {
            (0..4)
                .map(|_| {
                    let d = grid[i % grid.len()];
                    i /= grid.len();
                    d
                })
                .collect()
        })
        .collect();
    let optima: Vec<Vec<usize>> = points
        .par_iter()
        .map(|d| Ok(optimize(&finding5_instance2(Some(diag(d))), &pace)?.prices))
        .collect::<Result<_>>()?;
    let exceptions: Vec<(Vec<f64>, Vec<usize>)> = points
        .iter()
        .zip(&optima)
        .filter(|(_, o)| o.as_slice() != [1])
        .map(|(d, o)| (d.clone(), o.clone()))
        .collect();

    Ok(Finding5Report {
        instance1_optimum: o1.prices.clone(),
        instance1_value: o1.value,
        instance1_identity_optimum: oid.prices.clone(),
        instance1_identity_value: r_id,
        instance1_loss_pct: 100.0 * (o1.value - r_id) / o1.value,
        instance2_optimum: o2.prices.clone(),
        instance2_optimum_value: o2.value,
        instance2_value_321: r321,
        instance2_value_1: r1,
        instance2_gain_pct: outperform_pct(r321, r1),
        diagonal_grid: grid,
        diagonal_points: points.len(),
        diagonal_fixed1: points.len() - exceptions.len(),
        diagonal_exceptions: exceptions,
    })
}

pub fn finding6_model() -> MarketModel {
    uniform_model(
        vec![1.0, 1.2, 1.4, 2.0],
        vec![
            vec![0.8, 0.05, 0.0, 0.0],
            vec![0.2, 0.6, 0.0, 0.2],
            vec![0.1, 0.2, 0.6, 0.0],
            vec![0.1, 0.2, 0.6, 0.0],
        ],
        Patience::Bounded(6),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding6Report {
    pub tau: usize,
    pub sigma: usize,
    pub cycle: Vec<usize>,
    pub value: f64,
    pub m_simple: bool,
    pub fixed_best: usize,
    pub fixed_value: f64,
    pub best_two_cycle: Vec<usize>,
    pub best_two_value: f64,
    pub best_three_cycle: Vec<usize>,
    pub best_three_value: f64,
    pub r_1: f64,
    pub r_31: f64,
    pub r_431: f64,
}

pub fn finding6_run() -> Result<Finding6Report> {
    let m = finding6_model();
    let sigma = 2;
    let opt = optimize(&m, &PaceConfig::for_model(&m, sigma)?)?;
    let (kf, fv) = fixed_price_best(&m)?;
    let two = k_cyclic_best(&m, sigma, 2)?;
    let three = k_cyclic_best(&m, sigma, 3)?;
    Ok(Finding6Report {
        tau: 6,
        sigma,
        cycle: opt.prices.clone(),
        value: opt.value,
        m_simple: opt.diagnostics.m_simple,
        fixed_best: kf,
        fixed_value: fv,
        best_two_cycle: two.prices,
        best_two_value: two.value,
        best_three_cycle: three.prices,
        best_three_value: three.value,
        r_1: lra(&m, &[1], sigma)?,
        r_31: lra(&m, &[3, 1], sigma)?,
        r_431: lra(&m, &[4, 3, 1], sigma)?,
    })
}
