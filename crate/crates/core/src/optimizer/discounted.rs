//! Discounted objective: exhaustive search over pre-cyclic policies `(W0, W1, W1, ..)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::weakly_coupled::CoupledFn;

/// Upper bound on `(W0, W1)` pairs visited.
pub const MAX_PAIRS: f64 = 2e7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreCyclic {
    pub w0: Vec<usize>,
    pub w1: Vec<usize>,
    pub value: f64,
}

/// `sum_{n>=0} e^{-rn} f(s_n, s_{n+1})` for `s = W0 W1 W1 ..`, tail in closed form.
pub fn value(f: &CoupledFn, r: f64, w0: &[usize], w1: &[usize]) -> f64 {
    let d = (-r).exp();
    let p0 = w0.len();
    let p1 = w1.len();
    let at = |i: usize| if i < p0 { w0[i] } else { w1[(i - p0) % p1] };
    let mut head = 0.0;
    let mut disc = 1.0;
    for n in 0..p0 {
        head += disc * f.get(at(n), at(n + 1));
        disc *= d;
    }
    let mut cyc = 0.0;
    let mut dj = 1.0;
    for j in 0..p1 {
        cyc += dj * f.get(w1[j], w1[(j + 1) % p1]);
        dj *= d;
    }
    head + disc * cyc / (1.0 - d.powi(p1 as i32))
}

fn count(n: usize, bound: usize) -> f64 {
    let mut total = 0.0;
    let mut perms = 1.0;
    for l in 1..=bound.min(n) {
        perms *= (n - l + 1) as f64;
        total += perms * l as f64;
    }
    total
}

/// Best pre-cyclic policy with distinct blocks and `|W0| + |W1| <= length_bound`.
pub fn optimize(f: &CoupledFn, r: f64, length_bound: usize) -> Result<PreCyclic> {
    if !(r > 0.0) {
        return Err(Error::validation("discount rate must be positive"));
    }
    let n = f.n_blocks();
    let bound = length_bound.min(n).max(1);
    let c = count(n, bound);
    if c > MAX_PAIRS {
        return Err(Error::infeasible(format!(
            "{c:.3e} pre-cyclic candidates exceed {MAX_PAIRS:.0e}"
        )));
    }
    let mut best: Option<PreCyclic> = None;
    let mut seq = Vec::with_capacity(bound);
    let mut used = vec![false; n];
    fn rec(
        f: &CoupledFn,
        r: f64,
        bound: usize,
        seq: &mut Vec<usize>,
        used: &mut [bool],
        best: &mut Option<PreCyclic>,
    ) {
        if !seq.is_empty() {
            for split in 0..seq.len() {
                let (w0, w1) = seq.split_at(split);
                let v = value(f, r, w0, w1);
                if best.as_ref().map_or(true, |b| v > b.value) {
                    *best = Some(PreCyclic {
                        w0: w0.to_vec(),
                        w1: w1.to_vec(),
                        value: v,
                    });
                }
            }
        }
        if seq.len() == bound {
            return;
        }
        for w in 0..used.len() {
            if !used[w] {
                used[w] = true;
                seq.push(w);
                rec(f, r, bound, seq, used, best);
                seq.pop();
                used[w] = false;
            }
        }
    }
    rec(f, r, bound, &mut seq, &mut used, &mut best);
    Ok(best.expect("at least one block"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block() {
        let f = CoupledFn::from_table(1, vec![2.0]).unwrap();
        let p = optimize(&f, 0.5, 1).unwrap();
        assert!(p.w0.is_empty());
        assert_eq!(p.w1, vec![0]);
        assert!((p.value - 2.0 / (1.0 - (-0.5f64).exp())).abs() < 1e-12);
    }
}
