//! Strategic block revenue by enumerating every valuation path of every arrival.

use cyclic_pricing::market_model::{MarketModel, PaceConfig};
use cyclic_pricing::policy::Block;
use cyclic_pricing::weakly_coupled::PurchaseRule;

const EXIT: usize = usize::MAX;

/// Every valuation path of one customer over `len` checks starting at `start`
/// and age `age0`: `(probability, levels)` with `EXIT` after leaving.
fn paths(m: &MarketModel, start: usize, age0: usize, len: usize) -> Vec<(f64, Vec<usize>)> {
    let mut out = vec![(1.0, vec![start])];
    for i in 1..len {
        let age = age0 + i;
        let mut next = Vec::new();
        for (p, path) in out {
            let s = *path.last().unwrap();
            if s == EXIT || !m.timing.moves_at(age) {
                let mut q = path.clone();
                q.push(s);
                next.push((p, q));
                continue;
            }
            let mut stay = 0.0;
            for (t, &q) in m.q[s].iter().enumerate() {
                stay += q;
                let mut np = path.clone();
                np.push(t);
                next.push((p * q, np));
            }
            let mut np = path.clone();
            np.push(EXIT);
            next.push((p * (1.0 - stay), np));
        }
        out = next;
    }
    out
}

fn val(m: &MarketModel, s: usize) -> f64 {
    if s == EXIT {
        0.0
    } else {
        m.v[s]
    }
}

/// Whether a customer at level `s`, `age`, facing `window[0]` now, buys.
fn decides(m: &MarketModel, rule: PurchaseRule, s: usize, age: usize, window: &[usize]) -> bool {
    let price = |k: usize| m.v[k - 1];
    let surplus = m.v[s] - price(window[0]);
    let future = &window[1..];
    match rule {
        PurchaseRule::Patient => surplus >= 0.0,
        PurchaseRule::MyopicForecast => surplus >= 0.0 && future.iter().all(|&k| k >= window[0]),
        PurchaseRule::ExpectedMax => {
            if surplus < 0.0 {
                return false;
            }
            if future.is_empty() {
                return true;
            }
            // paths include the current check; drop it
            let em: f64 = paths(m, s, age, window.len())
                .iter()
                .map(|(p, path)| {
                    p * path[1..]
                        .iter()
                        .zip(future)
                        .map(|(&l, &k)| val(m, l) - price(k))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .sum();
            surplus >= em
        }
    }
}

/// Expected revenue of an arrival facing `window[a]` at ages `0..=tau`.
fn arrival(m: &MarketModel, rule: PurchaseRule, window: &[usize]) -> f64 {
    let mut total = 0.0;
    for (l0, &g) in m.gamma.iter().enumerate() {
        for (p, path) in paths(m, l0, 0, window.len()) {
            for (age, &s) in path.iter().enumerate() {
                if s == EXIT {
                    break;
                }
                if decides(m, rule, s, age, &window[age..]) {
                    total += g * p * m.v[window[age] - 1];
                    break;
                }
            }
        }
    }
    total
}

pub fn oracle_f(m: &MarketModel, pace: &PaceConfig, rule: PurchaseRule, w: usize, w2: usize) -> f64 {
    let tau = pace.tau();
    let expand = |b: usize| -> Vec<usize> {
        Block::decode(b, m.k(), pace.m)
            .prices
            .into_iter()
            .flat_map(|p| std::iter::repeat(p).take(pace.sigma))
            .collect()
    };
    let mut prices = expand(w);
    prices.extend(expand(w2));
    (0..tau).map(|s| arrival(m, rule, &prices[s..=s + tau])).sum()
}
