//! Exhaustive simple-cycle enumeration and Karp's maximum mean cycle.

use crate::error::{Error, Result};
use crate::weakly_coupled::CoupledFn;

use super::greedy::{better, Candidate};

/// Upper bound on the number of simple cycles we agree to enumerate.
pub const MAX_CYCLES: f64 = 5e7;

/// Number of simple cycles of length `1..=max_len` on `n` nodes.
pub fn count_simple_cycles(n: usize, max_len: usize) -> f64 {
    // C(n, L) (L - 1)!
    let mut total = 0.0;
    for l in 1..=max_len.min(n) {
        let mut c = 1.0;
        for i in 0..l {
            c *= (n - i) as f64;
        }
        total += c / l as f64;
    }
    total
}

/// Visit every simple cycle once, rooted at its smallest block.
pub fn for_each_simple_cycle(n: usize, max_len: usize, mut visit: impl FnMut(&[usize])) {
    fn dfs(
        start: usize,
        n: usize,
        max_len: usize,
        path: &mut Vec<usize>,
        used: &mut [bool],
        visit: &mut dyn FnMut(&[usize]),
    ) {
        visit(path);
        if path.len() == max_len {
            return;
        }
        for nx in start + 1..n {
            if !used[nx] {
                used[nx] = true;
                path.push(nx);
                dfs(start, n, max_len, path, used, visit);
                path.pop();
                used[nx] = false;
            }
        }
    }
    let mut used = vec![false; n];
    for s in 0..n {
        used[s] = true;
        let mut path = vec![s];
        dfs(s, n, max_len, &mut path, &mut used, &mut visit);
        used[s] = false;
    }
}

pub fn search(f: &CoupledFn, max_len: usize) -> Result<(Candidate, usize)> {
    let n = f.n_blocks();
    let count = count_simple_cycles(n, max_len);
    if count > MAX_CYCLES {
        return Err(Error::infeasible(format!(
            "{count:.3e} simple cycles on {n} blocks exceed {MAX_CYCLES:.0e}"
        )));
    }
    let mut best: Option<Candidate> = None;
    let mut visited = 0;
    for_each_simple_cycle(n, max_len, |c| {
        visited += 1;
        let l = c.len();
        let s: f64 = (0..l).map(|i| f.get(c[i], c[(i + 1) % l])).sum();
        let cand = Candidate {
            cycle: c.to_vec(),
            phi: s / l as f64,
        };
        if best.as_ref().map_or(true, |b| better(&cand, b)) {
            best = Some(cand);
        }
    });
    Ok((best.expect("n >= 1"), visited))
}

/// Maximum mean cycle of the complete digraph with self-loops, weights `f(w, w')`.
pub fn karp(f: &CoupledFn) -> f64 {
    let n = f.n_blocks();
    let mut d = vec![vec![0.0f64; n]; n + 1];
    for j in 1..=n {
        for v in 0..n {
            d[j][v] = (0..n)
                .map(|u| d[j - 1][u] + f.get(u, v))
                .fold(f64::NEG_INFINITY, f64::max);
        }
    }
    (0..n)
        .map(|v| {
            (0..n)
                .map(|j| (d[n][v] - d[j][v]) / (n - j) as f64)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
