//! Monte Carlo simulation of the market under a committed cyclic policy.
//!
//! Every customer owns a ChaCha8 stream addressed by `(seed, replication, customer
//! id)`, so a customer's valuation path does not depend on what other customers do
//! or on the purchase rule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_model::{self, MarketModel, Patience};
use crate::policy::CyclicPolicy;
use crate::weakly_coupled::{Decider, PurchaseRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: usize,
    pub burn_in: usize,
    pub replications: usize,
    pub seed: u64,
    pub rule: PurchaseRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: usize,
    pub horizon: usize,
}

/// `max(10 cycle lengths, 10 tau)`; unbounded patience uses `10 / nu` for tau.
pub fn default_burn_in(model: &MarketModel, policy: &CyclicPolicy) -> usize {
    let tau = match model.tau {
        Patience::Bounded(t) => t,
        Patience::Unbounded => (1.0 / market_model::nu(model)).ceil() as usize,
    };
    (10 * policy.period()).max(10 * tau)
}

impl SimConfig {
    pub fn new(model: &MarketModel, policy: &CyclicPolicy, horizon: usize, replications: usize, seed: u64) -> Self {
        SimConfig {
            horizon,
            burn_in: default_burn_in(model, policy).min(horizon / 2),
            replications,
            seed,
            rule: PurchaseRule::Patient,
        }
    }

    pub fn with_rule(mut self, rule: PurchaseRule) -> Self {
        self.rule = rule;
        self
    }
}

struct Customer {
    level: usize,
    age: usize,
    rng: ChaCha8Rng,
}

/// Next level, or `None` on exit.
fn transition(row: &[f64], u: f64) -> Option<usize> {
    let mut acc = 0.0;
    for (j, &q) in row.iter().enumerate() {
        acc += q;
        if u < acc {
            return Some(j);
        }
    }
    None
}

fn draw_level(gamma: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (j, &g) in gamma.iter().enumerate() {
        acc += g;
        if u < acc {
            return j;
        }
    }
    // rounding: fall back to the last level with positive mass
    gamma.iter().rposition(|&g| g > 0.0).unwrap_or(0)
}

fn replication(model: &MarketModel, prices: &[usize], cfg: &SimConfig, rep: usize) -> f64 {
    let tau = model.tau.finite();
    let mut base = ChaCha8Rng::seed_from_u64(cfg.seed);
    base.set_stream(rep as u64);
    let mut dec = Decider::new(&model.v, &model.q, model.timing, cfg.rule);
    let p = prices.len();
    let mut live: Vec<Customer> = Vec::new();
    let mut acc = 0.0;
    let mut future = Vec::new();
    for t in 0..cfg.horizon {
        let k = prices[t % p];
        let price = model.v[k - 1];
        let mut rev = 0.0;
        let window = |age: usize, out: &mut Vec<usize>| {
            out.clear();
            let rem = tau.map_or(0, |tau| tau - age);
            out.extend((1..=rem).map(|i| prices[(t + i) % p]));
        };
        live.retain_mut(|c| {
            c.age += 1;
            if model.timing.moves_at(c.age) {
                let u: f64 = c.rng.gen();
                match transition(&model.q[c.level], u) {
                    Some(j) => c.level = j,
                    None => return false,
                }
            }
            window(c.age, &mut future);
            if dec.buys(c.level, c.age, k, &future) {
                rev += price;
                return false;
            }
            tau.map_or(true, |tau| c.age < tau)
        });
        let mut rng = base.clone();
        rng.set_word_pos((t as u128) << 32);
        let u: f64 = rng.gen();
        let c = Customer {
            level: draw_level(&model.gamma, u),
            age: 0,
            rng,
        };
        window(0, &mut future);
        if dec.buys(c.level, 0, k, &future) {
            rev += price;
        } else if tau.map_or(true, |tau| tau > 0) {
            live.push(c);
        }
        if t >= cfg.burn_in {
            acc += rev;
        }
    }
    acc / (cfg.horizon - cfg.burn_in) as f64
}

pub fn simulate(model: &MarketModel, policy: &CyclicPolicy, cfg: &SimConfig) -> Result<SimEstimate> {
    market_model::validate(model).into_result()?;
    policy.check(model.k())?;
    if cfg.horizon <= cfg.burn_in {
        return Err(Error::validation("horizon must exceed burn_in"));
    }
    if cfg.replications == 0 {
        return Err(Error::validation("replications must be at least 1"));
    }
    if model.tau == Patience::Unbounded && cfg.rule != PurchaseRule::Patient {
        return Err(Error::validation("strategic rules need finite patience"));
    }
    let prices = policy.per_period();
    let means: Vec<f64> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| replication(model, &prices, cfg, r))
        .collect();
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let std_error = if means.len() > 1 {
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(SimEstimate {
        mean,
        std_error,
        replications: cfg.replications,
        horizon: cfg.horizon,
    })
}
