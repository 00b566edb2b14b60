//! Block revenue tables `f(w, w')` and cycle values `phi`.
//!
//! Blocks are indexed base-`K` little-endian on `prices - 1`, so block `w` with
//! prices `(p_1, .., p_M)` has index `sum (p_i - 1) K^(i-1)`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_model::{MarketModel, PaceConfig, Timing};
use crate::policy::Block;
use crate::revenue_kernel::Kernel;

/// Largest block alphabet whose `K~ x K~` table we are willing to build.
pub const MAX_BLOCKS: usize = 4096;
/// Work bound for the strategic builders (`K^(2 tau) * tau`).
pub const MAX_STRATEGIC_WORK: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledFn {
    #[serde(rename = "M")]
    pub m: usize,
    pub sigma: usize,
    #[serde(rename = "K")]
    pub k: usize,
    /// Row-major `K~ x K~` with `K~ = K^M`.
    pub table: Vec<f64>,
}

impl CoupledFn {
    /// A table over an abstract alphabet of `n` blocks (`M = 1`, `sigma = 1`).
    pub fn from_table(n: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != n * n {
            return Err(Error::validation(format!(
                "table has {} entries, expected {}",
                table.len(),
                n * n
            )));
        }
        if table.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("table entries must be finite"));
        }
        Ok(CoupledFn {
            m: 1,
            sigma: 1,
            k: n,
            table,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.k.pow(self.m as u32)
    }

    pub fn tau(&self) -> usize {
        self.m * self.sigma
    }

    #[inline]
    pub fn get(&self, w: usize, w2: usize) -> f64 {
        self.table[w * self.n_blocks() + w2]
    }

    pub fn block(&self, idx: usize) -> Block {
        Block::decode(idx, self.k, self.m)
    }

    /// Phase prices of a cycle of block indices.
    pub fn phase_prices(&self, cycle: &[usize]) -> Vec<usize> {
        cycle.iter().flat_map(|&w| self.block(w).prices).collect()
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.table.iter_mut().for_each(|x| *x *= c);
        self
    }

    /// Rows `w, w', f` in block-index order.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["w", "w_next", "w_prices", "w_next_prices", "f"])
            .map_err(csv_err)?;
        let n = self.n_blocks();
        let fmt = |b: Block| {
            b.prices
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        for w in 0..n {
            for w2 in 0..n {
                wtr.write_record([
                    w.to_string(),
                    w2.to_string(),
                    fmt(self.block(w)),
                    fmt(self.block(w2)),
                    format!("{:.17e}", self.get(w, w2)),
                ])
                .map_err(csv_err)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// `(1/n) sum f(w_i, w_{i+1})` with wraparound.
pub fn phi(f: &CoupledFn, cycle: &[usize]) -> f64 {
    let n = cycle.len();
    assert!(n > 0, "phi of an empty cycle");
    (0..n).map(|i| f.get(cycle[i], cycle[(i + 1) % n])).sum::<f64>() / n as f64
}

fn check_pace(model: &MarketModel, pace: &PaceConfig) -> Result<usize> {
    let tau = model.tau_finite()?;
    if tau != pace.tau() {
        return Err(Error::validation(format!(
            "tau not a multiple of sigma: tau = {tau}, M * sigma = {}",
            pace.tau()
        )));
    }
    let n = model.k().checked_pow(pace.m as u32).unwrap_or(usize::MAX);
    if n > MAX_BLOCKS {
        return Err(Error::infeasible(format!(
            "block alphabet K^M = {n} exceeds {MAX_BLOCKS}"
        )));
    }
    Ok(n)
}

/// Patient-customer table: revenue collected during `w'` after a block `w` that
/// started from an empty system.
pub fn build_coupled_fn(model: &MarketModel, pace: &PaceConfig) -> Result<CoupledFn> {
    let n = check_pace(model, pace)?;
    let kern = Kernel::new(model)?;
    let k = model.k();
    let run = |w: usize, start: &crate::revenue_kernel::AgeState| {
        let mut th = start.clone();
        let mut rev = 0.0;
        for p in Block::decode(w, k, pace.m).prices {
            let (next, r) = kern.phase(p, pace.sigma, &th).expect("validated");
            th = next;
            rev += r;
        }
        (th, rev)
    };
    let table: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|w| {
            let (after, _) = run(w, &kern.zeros());
            (0..n).map(move |w2| run(w2, &after).1).collect::<Vec<_>>()
        })
        .collect();
    Ok(CoupledFn {
        m: pace.m,
        sigma: pace.sigma,
        k,
        table,
    })
}

/// Purchase rule of a waiting customer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PurchaseRule {
    /// Buy as soon as valuation reaches the price.
    Patient,
    /// Buy if valuation reaches the price and no cheaper price is committed within
    /// the remaining window (the current valuation is the forecast).
    MyopicForecast,
    /// Buy if the current surplus is nonnegative and at least the expected maximum
    /// surplus over the remaining window.
    ExpectedMax,
}

/// Buying now on ties.
pub const BUY_ON_TIES: bool = true;

/// Decision context for a waiting customer.
pub struct Decider<'a> {
    pub v: &'a [f64],
    /// Customer-side transition minor used to forecast valuations.
    pub chain: &'a [Vec<f64>],
    pub timing: Timing,
    pub rule: PurchaseRule,
    cache: HashMap<(usize, usize, Vec<usize>), f64>,
}

impl<'a> Decider<'a> {
    pub fn new(v: &'a [f64], chain: &'a [Vec<f64>], timing: Timing, rule: PurchaseRule) -> Self {
        Decider {
            v,
            chain,
            timing,
            rule,
            cache: HashMap::new(),
        }
    }

    /// Level `m` (0-based), `age` periods since arrival, price now `k` and the
    /// committed prices for the remaining ages `age+1, ..`.
    pub fn buys(&mut self, m: usize, age: usize, k: usize, future: &[usize]) -> bool {
        let surplus = self.v[m] - self.v[k - 1];
        match self.rule {
            PurchaseRule::Patient => m + 1 >= k,
            PurchaseRule::MyopicForecast => {
                m + 1 >= k && future.iter().all(|&p| k <= p)
            }
            PurchaseRule::ExpectedMax => {
                if surplus < 0.0 {
                    return false;
                }
                if future.is_empty() {
                    return true;
                }
                let key = (m, age, future.to_vec());
                let em = match self.cache.get(&key) {
                    Some(&x) => x,
                    None => {
                        let x = expected_max_surplus(self.v, self.chain, self.timing, m, age, future);
                        self.cache.insert(key, x);
                        x
                    }
                };
                if BUY_ON_TIES {
                    surplus >= em
                } else {
                    surplus > em
                }
            }
        }
    }
}

/// `E max_j (V_j - v_{k_j})` over the future checks of a customer now at level `m`
/// and `age`, with exit counting as valuation 0.
///
/// Exact: `P(max <= y)` is a killed forward recursion for each candidate `y`.
pub fn expected_max_surplus(
    v: &[f64],
    chain: &[Vec<f64>],
    timing: Timing,
    m: usize,
    age: usize,
    future: &[usize],
) -> f64 {
    let k = v.len();
    let exit = k;
    let value = |state: usize, price: usize| -> f64 {
        let val = if state == exit { 0.0 } else { v[state] };
        val - v[price - 1]
    };
    let mut cands: Vec<f64> = future
        .iter()
        .flat_map(|&p| (0..=k).map(move |s| (s, p)))
        .map(|(s, p)| value(s, p))
        .collect();
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cands.dedup();
    let cdf = |y: f64| -> f64 {
        let mut x = vec![0.0; k + 1];
        x[m] = 1.0;
        for (i, &p) in future.iter().enumerate() {
            if timing.moves_at(age + 1 + i) {
                let mut nx = vec![0.0; k + 1];
                for s in 0..k {
                    if x[s] == 0.0 {
                        continue;
                    }
                    let mut stay = 0.0;
                    for t in 0..k {
                        nx[t] += x[s] * chain[s][t];
                        stay += chain[s][t];
                    }
                    nx[exit] += x[s] * (1.0 - stay).max(0.0);
                }
                nx[exit] += x[exit];
                x = nx;
            }
            for (s, xs) in x.iter_mut().enumerate() {
                if value(s, p) > y {
                    *xs = 0.0;
                }
            }
        }
        x.iter().sum()
    };
    let mut prev = 0.0;
    let mut e = 0.0;
    for &y in &cands {
        let f = cdf(y);
        e += y * (f - prev);
        prev = f;
    }
    e
}

/// Revenue from customers arriving during block `w`, over their whole window,
/// for each successor `w'`. Works for every [`PurchaseRule`].
pub fn build_coupled_fn_strategic(
    model: &MarketModel,
    pace: &PaceConfig,
    rule: PurchaseRule,
) -> Result<CoupledFn> {
    build_coupled_fn_strategic_with_chain(model, pace, rule, None)
}

pub fn build_coupled_fn_strategic_with_chain(
    model: &MarketModel,
    pace: &PaceConfig,
    rule: PurchaseRule,
    chain: Option<&[Vec<f64>]>,
) -> Result<CoupledFn> {
    let n = check_pace(model, pace)?;
    crate::market_model::validate(model).into_result()?;
    let tau = pace.tau();
    let k = model.k();
    let work = (k as f64).powi(2 * tau as i32) * tau as f64;
    if work > MAX_STRATEGIC_WORK {
        return Err(Error::infeasible(format!(
            "strategic enumeration K^(2 tau) tau = {work:.3e} exceeds {MAX_STRATEGIC_WORK:.0e}"
        )));
    }
    let chain: &[Vec<f64>] = chain.unwrap_or(&model.q);
    if chain.len() != k || chain.iter().any(|r| r.len() != k) {
        return Err(Error::validation("customer chain must be K x K"));
    }
    let expand = |w: usize| -> Vec<usize> {
        Block::decode(w, k, pace.m)
            .prices
            .into_iter()
            .flat_map(|p| std::iter::repeat(p).take(pace.sigma))
            .collect()
    };
    let table: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|w| {
            let mut dec = Decider::new(&model.v, chain, model.timing, rule);
            let first = expand(w);
            (0..n)
                .map(|w2| {
                    let mut prices = first.clone();
                    prices.extend(expand(w2));
                    (0..tau)
                        .map(|s| arrival_revenue(model, &mut dec, &prices[s..=s + tau]))
                        .sum::<f64>()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(CoupledFn {
        m: pace.m,
        sigma: pace.sigma,
        k,
        table,
    })
}

/// Expected revenue from one arrival facing `window[age]` at each age `0..=tau`.
fn arrival_revenue(model: &MarketModel, dec: &mut Decider, window: &[usize]) -> f64 {
    let k = model.k();
    let mut x = model.gamma.clone();
    let mut rev = 0.0;
    for (age, &p) in window.iter().enumerate() {
        if age > 0 && model.timing.moves_at(age) {
            let mut nx = vec![0.0; k];
            for i in 0..k {
                if x[i] != 0.0 {
                    for j in 0..k {
                        nx[j] += x[i] * model.q[i][j];
                    }
                }
            }
            x = nx;
        }
        let future = &window[age + 1..];
        for m in 0..k {
            if x[m] != 0.0 && dec.buys(m, age, p, future) {
                rev += x[m] * model.v[p - 1];
                x[m] = 0.0;
            }
        }
    }
    rev
}
