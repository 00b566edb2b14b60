//! Cycle search over block tables and model-level optimization helpers.

pub mod brute;
pub mod discounted;
pub mod greedy;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market_model::{MarketModel, PaceConfig};
use crate::policy::{canonical_cycle, is_m_simple, is_monotone_decreasing, Block, CyclicPolicy};
use crate::revenue_kernel::{AffineParams, Kernel};
use crate::weakly_coupled::{build_coupled_fn, CoupledFn};

pub use discounted::PreCyclic;
pub use greedy::GreedyStats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Number of sigma-phases in the minimal period.
    pub cycle_length: usize,
    pub monotone_decreasing: bool,
    pub m_simple: bool,
    pub search: String,
    pub visited: usize,
    pub greedy: Option<GreedyStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    pub cycle: Vec<Block>,
    pub block_indices: Vec<usize>,
    /// Minimal-period phase cycle, rotated to its lexicographically largest form.
    pub prices: Vec<usize>,
    pub phases: Vec<(usize, usize)>,
    /// Per-period long-run revenue.
    pub value: f64,
    /// `phi` of the block cycle (revenue per block).
    pub phi: f64,
    pub is_fixed_price: bool,
    pub diagnostics: Diagnostics,
}

impl OptResult {
    fn from_cycle(f: &CoupledFn, cycle: Vec<usize>, phi: f64, search: &str, visited: usize) -> Self {
        let phase_prices = f.phase_prices(&cycle);
        let prices = canonical_cycle(&phase_prices);
        let tau = f.tau() as f64;
        OptResult {
            cycle: cycle.iter().map(|&w| f.block(w)).collect(),
            phases: prices.iter().map(|&k| (k, f.sigma)).collect(),
            is_fixed_price: prices.len() == 1,
            diagnostics: Diagnostics {
                cycle_length: prices.len(),
                monotone_decreasing: is_monotone_decreasing(&prices),
                m_simple: is_m_simple(&phase_prices, f.m),
                search: search.to_string(),
                visited,
                greedy: None,
            },
            prices,
            block_indices: cycle,
            value: phi / tau,
            phi,
        }
    }

    pub fn policy(&self) -> CyclicPolicy {
        CyclicPolicy {
            phases: self.phases.clone(),
        }
    }
}

pub fn greedy_cycle_search(f: &CoupledFn) -> OptResult {
    let (best, stats) = greedy::search(f);
    let mut r = OptResult::from_cycle(f, best.cycle, best.phi, "greedy", stats.strings_generated);
    r.diagnostics.greedy = Some(stats);
    r
}

pub fn brute_force_cycle_search(f: &CoupledFn, max_len: usize) -> Result<OptResult> {
    let (best, visited) = brute::search(f, max_len)?;
    Ok(OptResult::from_cycle(f, best.cycle, best.phi, "brute-force", visited))
}

pub fn karp_max_mean_cycle(f: &CoupledFn) -> f64 {
    brute::karp(f)
}

pub fn discounted_optimize(f: &CoupledFn, r: f64, length_bound: usize) -> Result<PreCyclic> {
    discounted::optimize(f, r, length_bound)
}

/// Optimal M-simple cyclic sigma-policy of a finite-patience model.
pub fn optimize(model: &MarketModel, pace: &PaceConfig) -> Result<OptResult> {
    let f = build_coupled_fn(model, pace)?;
    Ok(greedy_cycle_search(&f))
}

/// Best fixed price by steady rate `B_k`; ties go to the lower index.
pub fn fixed_price_best(model: &MarketModel) -> Result<(usize, f64)> {
    let kern = Kernel::new(model)?;
    let mut best = (1, f64::NEG_INFINITY);
    for k in 1..=model.k() {
        let b = kern.affine_params(k)?.b;
        if b > best.1 {
            best = (k, b);
        }
    }
    Ok(best)
}

/// Best cycle of exactly `n` distinct prices, each held `sigma` periods.
pub fn k_cyclic_best(model: &MarketModel, sigma: usize, n: usize) -> Result<OptResult> {
    if n != 2 && n != 3 {
        return Err(Error::validation(format!("k-cyclic search supports k = 2 or 3, got {n}")));
    }
    let kern = Kernel::new(model)?;
    let k = model.k();
    if k < n {
        return Err(Error::validation(format!("K = {k} has fewer than {n} prices")));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut visited = 0;
    brute::for_each_simple_cycle(k, n, |c| {
        if c.len() != n {
            return;
        }
        visited += 1;
        let prices: Vec<usize> = c.iter().map(|&i| i + 1).collect();
        let v = kern
            .long_run_average(&CyclicPolicy::from_prices(&prices, sigma))
            .expect("valid prices");
        let canon = canonical_cycle(&prices);
        let replace = match &best {
            None => true,
            Some((bc, bv)) => v > *bv || (v == *bv && canon < *bc),
        };
        if replace {
            best = Some((canon, v));
        }
    });
    let (prices, value) = best.expect("k >= n");
    Ok(OptResult {
        cycle: vec![Block {
            prices: prices.clone(),
        }],
        block_indices: vec![],
        phases: prices.iter().map(|&p| (p, sigma)).collect(),
        is_fixed_price: false,
        diagnostics: Diagnostics {
            cycle_length: n,
            monotone_decreasing: is_monotone_decreasing(&prices),
            m_simple: true,
            search: format!("{n}-cyclic"),
            visited,
            greedy: None,
        },
        prices,
        value,
        phi: value * (n * sigma) as f64,
    })
}

/// Threshold `sigma_0` beyond which the strict best fixed price beats every
/// candidate cycle (price lists, each price held `sigma >= tau` periods).
/// `None` when the best steady rate is not unique.
pub fn sigma0_certificate(model: &MarketModel, cycle_candidates: &[Vec<usize>]) -> Result<Option<f64>> {
    let kern = Kernel::new(model)?;
    let tau = kern.tau as f64;
    let params: Vec<AffineParams> = (1..=model.k())
        .map(|k| kern.affine_params(k))
        .collect::<Result<_>>()?;
    let bmax = params.iter().map(|p| p.b).fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<&AffineParams> = params.iter().filter(|p| p.b == bmax).collect();
    if winners.len() != 1 {
        return Ok(None);
    }
    let bk = bmax;
    let mut sigma0 = tau;
    for cand in cycle_candidates {
        let n = cand.len();
        if n == 0 {
            continue;
        }
        for &k in cand {
            model.check_price(k)?;
        }
        let p = |i: usize| &params[cand[i] - 1];
        let sum_a: f64 = (0..n).map(|i| p(i).a).sum();
        let sum_b: f64 = (0..n).map(|i| p(i).b).sum();
        let sum_t: f64 = (0..n)
            .map(|i| p((i + 1) % n).c.dot(&p(i).theta_bar))
            .sum();
        let denom = n as f64 * bk - sum_b;
        if denom <= 0.0 {
            continue;
        }
        sigma0 = sigma0.max((sum_a - tau * sum_b + sum_t) / denom);
    }
    Ok(Some(sigma0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_model::Patience;

    fn finding6() -> MarketModel {
        MarketModel::new(
            vec![1.0, 1.2, 1.4, 2.0],
            vec![0.25; 4],
            vec![
                vec![0.8, 0.05, 0.0, 0.0],
                vec![0.2, 0.6, 0.0, 0.2],
                vec![0.1, 0.2, 0.6, 0.0],
                vec![0.1, 0.2, 0.6, 0.0],
            ],
            Patience::Bounded(6),
        )
    }

    #[test]
    fn constant_table() {
        let f = CoupledFn::from_table(3, vec![0.7; 9]).unwrap();
        let r = greedy_cycle_search(&f);
        assert_eq!(r.cycle.len(), 1);
        assert_eq!(r.phi, 0.7);
    }

    #[test]
    fn single_price_model() {
        let m = MarketModel::new(vec![1.5], vec![1.0], vec![vec![0.3]], Patience::Bounded(2));
        let r = optimize(&m, &PaceConfig::new(2, 1).unwrap()).unwrap();
        assert!(r.is_fixed_price);
        assert!((r.value - 1.5).abs() < 1e-12);
    }

    #[test]
    fn finding6_fixed_price() {
        let (k, v) = fixed_price_best(&finding6()).unwrap();
        assert_eq!(k, 1);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k2_model_two_cycle() {
        let m = MarketModel::new(
            vec![1.0, 2.0],
            vec![0.5, 0.5],
            vec![vec![0.5, 0.2], vec![0.1, 0.3]],
            Patience::Bounded(2),
        );
        let r = k_cyclic_best(&m, 2, 2).unwrap();
        assert_eq!(r.prices, vec![2, 1]);
        assert!(k_cyclic_best(&m, 2, 4).is_err());
    }

    #[test]
    fn sigma0_ties_give_none() {
        let m = MarketModel::new(
            vec![1.0, 2.0],
            vec![0.0, 1.0],
            vec![vec![0.0; 2]; 2],
            Patience::Bounded(2),
        );
        // B_1 = 1, B_2 = 2: strict
        assert!(sigma0_certificate(&m, &[vec![2, 1]]).unwrap().is_some());
        let m = MarketModel::new(
            vec![1.0, 2.0],
            vec![0.5, 0.5],
            vec![vec![0.0; 2]; 2],
            Patience::Bounded(2),
        )
        .with_timing(crate::market_model::Timing::Immediate);
        // B_1 = 1 = B_2
        assert_eq!(sigma0_certificate(&m, &[vec![2, 1]]).unwrap(), None);
    }
}
