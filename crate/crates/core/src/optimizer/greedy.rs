//! Greedy cycle search over a block table.
//!
//! For a seed `(w1, w2)` the collection of simple strings is extended one block
//! at a time using `psi(w, w') = { w'' : f(w,w') + f(w',w'') = max_x f(w,x) + f(x,w'') }`.
//! Extensions that return to `w1` are harvested as candidate cycles, strings that
//! repeat a block are dropped, and among strings sharing an endpoint only the one
//! with the largest running sum survives.

use rayon::prelude::*;
use serde::Serialize;

use crate::policy::is_m_simple;
use crate::weakly_coupled::CoupledFn;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GreedyStats {
    pub seeds: usize,
    pub strings_generated: usize,
    pub closures_harvested: usize,
    /// Harvested closures whose phase expansion is not M-simple.
    pub closures_rejected: usize,
}

impl GreedyStats {
    fn add(&mut self, o: &GreedyStats) {
        self.seeds += o.seeds;
        self.strings_generated += o.strings_generated;
        self.closures_harvested += o.closures_harvested;
        self.closures_rejected += o.closures_rejected;
    }
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub cycle: Vec<usize>,
    pub phi: f64,
}

/// Larger phi wins; equal phi goes to the lexicographically smaller cycle.
pub fn better(a: &Candidate, b: &Candidate) -> bool {
    a.phi > b.phi || (a.phi == b.phi && a.cycle < b.cycle)
}

#[derive(Clone)]
struct Str {
    path: Vec<usize>,
    seen: Vec<bool>,
    sum: f64,
}

/// `T[w][w''] = max_x f(w,x) + f(x,w'')`.
fn two_step_max(f: &CoupledFn) -> Vec<f64> {
    let n = f.n_blocks();
    (0..n)
        .into_par_iter()
        .flat_map_iter(|w| {
            (0..n).map(move |w2| {
                (0..n)
                    .map(|x| f.get(w, x) + f.get(x, w2))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
        })
        .collect()
}

fn psi(f: &CoupledFn, t: &[f64], w: usize, w1: usize) -> Vec<usize> {
    let n = f.n_blocks();
    let base = f.get(w, w1);
    (0..n)
        .filter(|&w2| base + f.get(w1, w2) >= t[w * n + w2])
        .collect()
}

fn seed_search(
    f: &CoupledFn,
    t: &[f64],
    w1: usize,
    w2: usize,
) -> (Option<Candidate>, GreedyStats) {
    let n = f.n_blocks();
    let mut stats = GreedyStats {
        seeds: 1,
        ..Default::default()
    };
    let mut best: Option<Candidate> = None;
    let mut seen = vec![false; n];
    seen[w1] = true;
    seen[w2] = true;
    let mut coll = vec![Str {
        path: vec![w1, w2],
        seen,
        sum: f.get(w1, w2),
    }];
    let mut len = 2;
    while len <= n && !coll.is_empty() {
        // slot per endpoint keeps the collection admissible
        let mut slots: Vec<Option<Str>> = vec![None; n];
        for s in &coll {
            let a = s.path[len - 2];
            let b = s.path[len - 1];
            for nx in psi(f, t, a, b) {
                stats.strings_generated += 1;
                if nx == w1 {
                    stats.closures_harvested += 1;
                    if !is_m_simple(&f.phase_prices(&s.path), f.m) {
                        stats.closures_rejected += 1;
                        continue;
                    }
                    let cand = Candidate {
                        cycle: s.path.clone(),
                        phi: (s.sum + f.get(b, w1)) / len as f64,
                    };
                    if best.as_ref().map_or(true, |b| better(&cand, b)) {
                        best = Some(cand);
                    }
                    continue;
                }
                if s.seen[nx] {
                    continue;
                }
                let sum = s.sum + f.get(b, nx);
                let replace = match &slots[nx] {
                    None => true,
                    Some(o) => sum > o.sum || (sum == o.sum && s.path < o.path),
                };
                if replace {
                    let mut ns = s.clone();
                    ns.path.push(nx);
                    ns.seen[nx] = true;
                    ns.sum = sum;
                    slots[nx] = Some(ns);
                }
            }
        }
        coll = slots.into_iter().flatten().collect();
        len += 1;
    }
    (best, stats)
}

/// Best cycle over all seeds and all single blocks.
pub fn search(f: &CoupledFn) -> (Candidate, GreedyStats) {
    let n = f.n_blocks();
    let t = two_step_max(f);
    let mut best = (0..n)
        .map(|w| Candidate {
            cycle: vec![w],
            phi: f.get(w, w),
        })
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("at least one block");
    let per_seed: Vec<(Option<Candidate>, GreedyStats)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|w1| {
            let t = &t;
            (0..n)
                .filter(move |&w2| w2 != w1)
                .map(move |w2| seed_search(f, t, w1, w2))
        })
        .collect();
    let mut stats = GreedyStats::default();
    for (cand, s) in per_seed {
        stats.add(&s);
        if let Some(c) = cand {
            if better(&c, &best) {
                best = c;
            }
        }
    }
    (best, stats)
}
