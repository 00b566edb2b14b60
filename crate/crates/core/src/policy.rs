//! Cyclic policies, blocks, and helpers on cyclic price strings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A cycle of `(price index, duration)` phases, repeated forever.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicPolicy {
    pub phases: Vec<(usize, usize)>,
}

/// `M` prices, each held `sigma` periods.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Block {
    pub prices: Vec<usize>,
}

impl CyclicPolicy {
    pub fn new(phases: Vec<(usize, usize)>) -> Result<Self> {
        let p = CyclicPolicy { phases };
        p.check(usize::MAX)?;
        Ok(p)
    }

    /// Every price held for `sigma` periods.
    pub fn from_prices(prices: &[usize], sigma: usize) -> Self {
        CyclicPolicy {
            phases: prices.iter().map(|&k| (k, sigma)).collect(),
        }
    }

    pub fn from_blocks(blocks: &[Block], sigma: usize) -> Self {
        let prices: Vec<usize> = blocks.iter().flat_map(|b| b.prices.iter().copied()).collect();
        Self::from_prices(&prices, sigma)
    }

    pub fn check(&self, k_max: usize) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::validation("policy has no phases"));
        }
        for &(k, t) in &self.phases {
            if t == 0 {
                return Err(Error::validation("phase duration must be at least 1"));
            }
            if k == 0 || k > k_max {
                return Err(Error::validation(format!("price index {k} out of range")));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.phases.iter().map(|p| p.1).sum()
    }

    /// Price index for every period of one cycle.
    pub fn per_period(&self) -> Vec<usize> {
        self.phases
            .iter()
            .flat_map(|&(k, t)| std::iter::repeat(k).take(t))
            .collect()
    }

    /// Adjacent equal prices merged (cyclically).
    pub fn merged(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &(k, t) in &self.phases {
            match out.last_mut() {
                Some(last) if last.0 == k => last.1 += t,
                _ => out.push((k, t)),
            }
        }
        if out.len() > 1 && out[0].0 == out[out.len() - 1].0 {
            let (_, t) = out.pop().unwrap();
            out[0].1 += t;
        }
        out
    }
}

impl Block {
    /// Decode a base-`k` little-endian index into `m` 1-based prices.
    pub fn decode(mut idx: usize, k: usize, m: usize) -> Self {
        let mut prices = Vec::with_capacity(m);
        for _ in 0..m {
            prices.push(idx % k + 1);
            idx /= k;
        }
        Block { prices }
    }

    pub fn encode(&self, k: usize) -> usize {
        self.prices
            .iter()
            .rev()
            .fold(0, |acc, &p| acc * k + (p - 1))
    }
}

/// Length of the shortest period of a cyclic string.
pub fn minimal_period<T: PartialEq>(s: &[T]) -> usize {
    let n = s.len();
    (1..=n)
        .find(|&p| n % p == 0 && (0..n).all(|i| s[i] == s[(i + p) % n]))
        .unwrap_or(n)
}

/// Shortest repeating unit, rotated to start at its lexicographically largest rotation.
pub fn canonical_cycle(s: &[usize]) -> Vec<usize> {
    let p = minimal_period(s);
    let unit = &s[..p];
    (0..p)
        .map(|r| (0..p).map(|i| unit[(r + i) % p]).collect::<Vec<_>>())
        .max()
        .unwrap_or_default()
}

/// Equal as cycles up to rotation.
pub fn same_cycle(a: &[usize], b: &[usize]) -> bool {
    canonical_cycle(a) == canonical_cycle(b)
}

/// No `m` consecutive phase prices repeat within the minimal period.
pub fn is_m_simple(phase_prices: &[usize], m: usize) -> bool {
    let p = minimal_period(phase_prices);
    let unit = &phase_prices[..p];
    let mut seen: Vec<Vec<usize>> = Vec::with_capacity(p);
    for start in 0..p {
        let w: Vec<usize> = (0..m).map(|i| unit[(start + i) % p]).collect();
        if seen.contains(&w) {
            return false;
        }
        seen.push(w);
    }
    true
}

/// Strictly decreasing around the cycle except for the single wrap back to the top.
pub fn is_monotone_decreasing(s: &[usize]) -> bool {
    let c = canonical_cycle(s);
    c.windows(2).all(|w| w[0] > w[1])
}
