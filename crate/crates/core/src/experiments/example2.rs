//! An adversarial instance with `tau = 1` whose optimal cycle is `(2, 3, .., K)`.
//!
//! The arrival weights `gamma_i = (1-eps) eps^(i-K)` are not a distribution; the
//! market model carries them normalized and tables are scaled back by their total
//! mass `c`, which leaves every claim unchanged since revenues are linear in `gamma`.
//!
//! `(i j)` is the revenue from customers who arrive under price `i` with valuation
//! below `v_i` and buy at price `j` one period later. With `tau = 1` every customer
//! lives two periods, so the block table is `f(i, j) = alpha + (i j)`.

use serde::Serialize;

use super::Check;
use crate::error::{Error, Result};
use crate::market_model::{MarketModel, PaceConfig, Patience, Timing};
use crate::optimizer::{brute, greedy};
use crate::policy::{canonical_cycle, same_cycle};
use crate::weakly_coupled::{build_coupled_fn, CoupledFn};

/// Relative tolerance of the identity checks.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Example2Instance {
    #[serde(rename = "K")]
    pub k: usize,
    pub epsilon: f64,
    pub v: Vec<f64>,
    /// Unnormalized arrival weights.
    pub gamma: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub alpha: f64,
    pub u: f64,
    pub xi: f64,
    /// `Gamma_i = sum_{l >= i} gamma_l`.
    pub big_gamma: Vec<f64>,
    /// `pair[i-1][j-1] = (i j)`.
    pub pair: Vec<Vec<f64>>,
    pub checks: Vec<Check>,
}

impl Example2Instance {
    /// Total arrival mass `c = sum gamma`.
    pub fn mass(&self) -> f64 {
        self.gamma.iter().sum()
    }

    /// Market model with `gamma / c`, `tau = 1`, transitions before every later check.
    pub fn model(&self) -> MarketModel {
        let c = self.mass();
        MarketModel::new(
            self.v.clone(),
            self.gamma.iter().map(|g| g / c).collect(),
            self.q.clone(),
            Patience::Bounded(1),
        )
        .with_timing(Timing::Immediate)
    }

    /// Kernel-built block table scaled by `c`.
    pub fn kernel_table(&self) -> Result<CoupledFn> {
        let f = build_coupled_fn(&self.model(), &PaceConfig::new(1, 1)?)?;
        Ok(f.scaled(self.mass()))
    }

    /// `(i j)` table over blocks `0..K`; cycle means differ from `f` by `alpha`.
    pub fn pair_table(&self) -> CoupledFn {
        let table = self.pair.iter().flatten().copied().collect();
        CoupledFn::from_table(self.k, table).expect("square table")
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn example2_build(k: usize) -> Result<Example2Instance> {
    if k < 5 {
        return Err(Error::validation(format!("example 2 needs K >= 5, got {k}")));
    }
    let eps = 1.0 / (200.0 * k as f64);
    let kf = k as i32;
    let gamma: Vec<f64> = (1..=kf).map(|i| (1.0 - eps) * eps.powi(i - kf)).collect();
    let v: Vec<f64> = (1..=kf)
        .map(|i| eps.powi(kf - i) / (1.0 - eps.powi(kf + 1 - i)))
        .collect();
    let mut q = vec![vec![0.0; k]; k];
    for i in 2..k {
        // q_{i-1, i+1}
        q[i - 2][i] = 10.0 / 11.0 * eps.powi(kf + 1) * (1.0 - eps.powi(kf - i as i32));
    }
    q[k - 2][1] = eps * eps * (1.0 - eps.powi(kf - 1)) / (1.0 - eps);
    q[k - 1][k - 1] = 1.0;

    let alpha = 1.0;
    let u = (1.0 - eps) * 10.0 / 11.0 * eps.powi(kf - 1);
    let big_gamma: Vec<f64> = (0..k).map(|i| gamma[i..].iter().sum()).collect();
    let qbar = |i: usize, j: usize| gamma[i - 1] * q[i - 1][j - 1];

    // (i j) = sum_{m < i} sum_{l >= j} gamma_m q_{m,l} v_j
    let mut pair = vec![vec![0.0; k]; k];
    for i in 1..=k {
        for j in 1..=k {
            let mut s = 0.0;
            for m in 1..i {
                for l in j..=k {
                    s += qbar(m, l);
                }
            }
            pair[i - 1][j - 1] = s * v[j - 1];
        }
    }
    let kk = pair[k - 1][1];
    let second: f64 = ((1..=k - 2).map(|i| qbar(i, i + 2)).sum::<f64>() + qbar(k - 1, 2)) * v[1];
    let xi = second / u - 1.0;

    let mut checks = Vec::new();
    let e0 = (0..k)
        .map(|i| (big_gamma[i] * v[i] - alpha).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new("E0", e0 <= IDENTITY_TOL, format!("max |Gamma_i v_i - alpha| = {e0:.3e}")));
    let e1 = (0..k - 1).all(|i| v[i] <= eps / (1.0 - eps) * v[i + 1] * (1.0 + IDENTITY_TOL));
    checks.push(Check::new("E1", e1, "v_i <= eps/(1-eps) v_{i+1}"));
    let e2a = (2..k).all(|i| rel_close(qbar(i - 1, i + 1) * v[i], u, IDENTITY_TOL))
        && (2..k).all(|i| (1..=k).all(|j| j == i + 1 || q[i - 2][j - 1] == 0.0));
    checks.push(Check::new("E2.1", e2a, "qbar_{i-1,i+1} v_{i+1} = U, other entries zero"));
    let e2b = (0.1 - IDENTITY_TOL..=0.1 + 2.0 * eps + IDENTITY_TOL).contains(&xi)
        && (1..=k).all(|j| j == 2 || q[k - 2][j - 1] == 0.0);
    checks.push(Check::new("E2.2", e2b, format!("xi = {xi:.15} in [0.1, 0.1 + 2 eps]")));
    let e2c = (0..k - 1).all(|j| q[k - 1][j] == 0.0) && q[k - 1][k - 1] == 1.0;
    checks.push(Check::new("E2.3", e2c, "last row is (0, .., 0, 1)"));

    let adj = (2..k).all(|i| rel_close(pair[i - 1][i], u, IDENTITY_TOL));
    checks.push(Check::new("lemma.adjacent", adj, "(i (i+1)) = U for i in [2, K-1]"));
    checks.push(Check::new(
        "lemma.adjacent.i1",
        rel_close(pair[0][1], u, IDENTITY_TOL),
        format!("(1 2) = {:.3e}: no customer is below v_1", pair[0][1]),
    ));
    let gaps = (1..=k).all(|i| (i + 2..=k).all(|j| pair[i - 1][j - 1] == 0.0));
    checks.push(Check::new("lemma.gap", gaps, "(i (i+l)) = 0 for l >= 2"));
    checks.push(Check::new(
        "lemma.K2",
        rel_close(kk, (1.0 + xi) * u, IDENTITY_TOL),
        format!("(K 2) / U = {:.15}", kk / u),
    ));
    checks.push(Check::new(
        "lemma.K2.11-10",
        rel_close(kk, 1.1 * u, IDENTITY_TOL),
        format!("(K 2) = 11/10 U exactly; (K 2) / U = {:.15}", kk / u),
    ));
    let bound = (1.0 + 1.0 / (100.0 * k as f64)) * u;
    let others = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .filter(|&(i, j)| !(i == k - 1 && j == 1))
        .all(|(i, j)| pair[i][j] <= bound * (1.0 + IDENTITY_TOL));
    checks.push(Check::new("lemma.bound", others, "(i j) <= (1 + 1/(100K)) U off (K 2)"));

    Ok(Example2Instance {
        k,
        epsilon: eps,
        v,
        gamma,
        q,
        alpha,
        u,
        xi,
        big_gamma,
        pair,
        checks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Example2Claim {
    #[serde(rename = "K")]
    pub k: usize,
    pub u: f64,
    pub xi: f64,
    /// Brute-force optimum, rotated to start at its smallest price.
    pub brute_cycle: Vec<usize>,
    pub greedy_cycle: Vec<usize>,
    /// `alpha + phi`.
    pub value: f64,
    /// Mean of `(w_i w_{i+1})` around the cycle.
    pub excess: f64,
    /// `U + xi U / (K - 1)`.
    pub expected_excess: f64,
    /// Optimum minus the best other simple cycle, in `(i j)` units.
    pub gap: f64,
    /// `U / (20 (K - 1))`.
    pub required_gap: f64,
    pub simple_cycles: usize,
    pub checks: Vec<Check>,
}

impl Example2Claim {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn rotate_min_first(c: &[usize]) -> Vec<usize> {
    let i = (0..c.len()).min_by_key(|&i| c[i]).unwrap_or(0);
    c[i..].iter().chain(&c[..i]).copied().collect()
}

/// Brute force and greedy over the `(i j)` table of [`example2_build`].
pub fn example2_verify_claim(k: usize) -> Result<Example2Claim> {
    if !(5..=6).contains(&k) {
        return Err(Error::infeasible(format!("claim check runs for K in {{5, 6}}, got {k}")));
    }
    let inst = example2_build(k)?;
    let f = inst.pair_table();
    let to_prices = |c: &[usize]| -> Vec<usize> { rotate_min_first(&c.iter().map(|&w| w + 1).collect::<Vec<_>>()) };
    let (best, visited) = brute::search(&f, k)?;
    let (g, _) = greedy::search(&f);
    let target: Vec<usize> = (2..=k).collect();

    let mut runner_up = f64::NEG_INFINITY;
    brute::for_each_simple_cycle(k, k, |c| {
        let prices: Vec<usize> = c.iter().map(|&w| w + 1).collect();
        if same_cycle(&prices, &target) {
            return;
        }
        let l = c.len();
        let s = (0..l).map(|i| f.get(c[i], c[(i + 1) % l])).sum::<f64>() / l as f64;
        runner_up = runner_up.max(s);
    });

    let excess = best.phi;
    let expected = inst.u + inst.xi * inst.u / (k - 1) as f64;
    let gap = excess - runner_up;
    let required = inst.u / (20.0 * (k - 1) as f64);
    let brute_cycle = to_prices(&best.cycle);
    let greedy_cycle = to_prices(&g.cycle);
    let mut checks = vec![
        Check::new("brute.cycle", brute_cycle == target, format!("{brute_cycle:?}")),
        Check::new("greedy.cycle", greedy_cycle == target, format!("{greedy_cycle:?}")),
        Check::new(
            "value",
            (excess - expected).abs() <= 1e-10 * expected,
            format!("excess {excess:.6e} vs U + xi U/(K-1) = {expected:.6e}"),
        ),
        Check::new("gap", gap >= required, format!("gap {gap:.4e} vs U/(20(K-1)) = {required:.4e}")),
        Check::new(
            "increasing",
            canonical_cycle(&brute_cycle).len() == k - 1 && brute_cycle.windows(2).all(|w| w[0] < w[1]),
            "increasing cycle of length K-1",
        ),
    ];
    // the kernel table must be alpha + (i j)
    let kt = inst.kernel_table()?;
    let dev = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| (kt.get(i, j) - inst.alpha - inst.pair[i][j]).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new("kernel", dev <= 1e-12, format!("max |f - alpha - (i j)| = {dev:.3e}")));

    Ok(Example2Claim {
        k,
        u: inst.u,
        xi: inst.xi,
        brute_cycle,
        greedy_cycle,
        value: inst.alpha + excess,
        excess,
        expected_excess: expected,
        gap,
        required_gap: required,
        simple_cycles: visited,
        checks,
    })
}
