#![allow(dead_code)]

pub mod strategic;

use cyclic_pricing::market_model::{MarketModel, Patience, Timing};
use cyclic_pricing::policy::CyclicPolicy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Increasing ladder from 1, random gamma, Q rows with random slack.
pub fn random_model(rng: &mut impl Rng, k: usize, tau: usize) -> MarketModel {
    let mut v = vec![1.0];
    for _ in 1..k {
        let last = *v.last().unwrap();
        v.push(last + rng.gen_range(0.05..0.6));
    }
    let g: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let gs: f64 = g.iter().sum();
    let q = (0..k)
        .map(|_| {
            let row: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
            let s: f64 = row.iter().sum();
            let keep = rng.gen_range(0.3..1.0);
            row.iter().map(|x| x / s * keep).collect()
        })
        .collect();
    MarketModel::new(v, g.iter().map(|x| x / gs).collect(), q, Patience::Bounded(tau))
}

pub fn random_timing(rng: &mut impl Rng) -> Timing {
    if rng.gen() {
        Timing::Lagged
    } else {
        Timing::Immediate
    }
}

/// Instance `seed` of the Monte Carlo agreement set.
pub fn sim_instance(seed: u64) -> (MarketModel, CyclicPolicy) {
    let mut r = rng(1000 + seed);
    let k = r.gen_range(1..=4);
    let tau = r.gen_range(1..=5);
    let m = random_model(&mut r, k, tau).with_timing(random_timing(&mut r));
    let p = random_policy(&mut r, k, 3, 2 * tau);
    (m, p)
}

pub fn random_policy(rng: &mut impl Rng, k: usize, max_phases: usize, max_len: usize) -> CyclicPolicy {
    let n = rng.gen_range(1..=max_phases);
    CyclicPolicy::new((0..n).map(|_| (rng.gen_range(1..=k), rng.gen_range(1..=max_len))).collect()).unwrap()
}

/// Expected revenue of a price sequence, following each arrival cohort through its
/// lifetime. `prices[t]` is the price in period `t`; revenue is summed over periods
/// `from..prices.len()`.
pub fn cohort_revenue(model: &MarketModel, prices: &[usize], from: usize) -> f64 {
    let tau = model.tau.finite().unwrap();
    let k = model.k();
    let mut total = 0.0;
    for s in 0..prices.len() {
        let mut dist = model.gamma.clone();
        for age in 0..=tau {
            let t = s + age;
            if t >= prices.len() {
                break;
            }
            if age > 0 && model.timing.moves_at(age) {
                let mut nd = vec![0.0; k];
                for i in 0..k {
                    for j in 0..k {
                        nd[j] += dist[i] * model.q[i][j];
                    }
                }
                dist = nd;
            }
            let p = prices[t];
            for m in p - 1..k {
                if t >= from {
                    total += dist[m] * model.v[p - 1];
                }
                dist[m] = 0.0;
            }
        }
    }
    total
}

/// Long-run average by brute force: many periods of the cyclic price string, cohort by cohort.
pub fn cohort_average(model: &MarketModel, policy: &CyclicPolicy) -> f64 {
    let tau = model.tau.finite().unwrap();
    let per = policy.per_period();
    let p = per.len();
    let warm = p * (tau / p + 2);
    let n = warm + p;
    let prices: Vec<usize> = (0..n).map(|t| per[t % p]).collect();
    cohort_revenue(model, &prices, warm) / p as f64
}

/// Max cycle mean of an `n x n` table by enumerating simple cycles from their smallest node.
pub fn max_cycle_mean(n: usize, table: &[f64]) -> f64 {
    fn go(n: usize, t: &[f64], start: usize, path: &mut Vec<usize>, used: &mut [bool], sum: f64, best: &mut f64) {
        let last = *path.last().unwrap();
        let close = (sum + t[last * n + start]) / path.len() as f64;
        if close > *best {
            *best = close;
        }
        for w in start + 1..n {
            if !used[w] {
                used[w] = true;
                path.push(w);
                go(n, t, start, path, used, sum + t[last * n + w], best);
                path.pop();
                used[w] = false;
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    for s in 0..n {
        let mut used = vec![false; n];
        used[s] = true;
        go(n, table, s, &mut vec![s], &mut used, 0.0, &mut best);
    }
    best
}

/// `max_w V(w)` for `V(w) = max_w' f(w, w') + e^{-r} V(w')`, by value iteration.
pub fn discounted_dp(n: usize, table: &[f64], r: f64) -> f64 {
    let d = (-r).exp();
    let mut v = vec![0.0; n];
    for _ in 0..100_000 {
        let nv: Vec<f64> = (0..n)
            .map(|w| (0..n).map(|w2| table[w * n + w2] + d * v[w2]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let diff = nv.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = nv;
        if diff < 1e-14 {
            break;
        }
    }
    v.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
