mod common;

use common::*;
use common::strategic::oracle_f;
use cyclic_pricing::market_model::{MarketModel, PaceConfig, Timing};
use cyclic_pricing::weakly_coupled::{build_coupled_fn, build_coupled_fn_strategic, PurchaseRule};
use rand::Rng;

fn k2_models() -> Vec<MarketModel> {
    let mut r = rng(21);
    (0..20)
        .map(|i| {
            let m = random_model(&mut r, 2, 2);
            if i % 2 == 0 {
                m
            } else {
                m.with_timing(Timing::Immediate)
            }
        })
        .collect()
}

#[test]
fn strategic_f_matches_path_enumeration() {
    let rules = [PurchaseRule::Patient, PurchaseRule::MyopicForecast, PurchaseRule::ExpectedMax];
    for m in k2_models() {
        for sigma in [1, 2] {
            let pace = PaceConfig::new(2, sigma).unwrap();
            for rule in rules {
                let f = build_coupled_fn_strategic(&m, &pace, rule).unwrap();
                let n = f.n_blocks();
                for w in 0..n {
                    for w2 in 0..n {
                        let o = oracle_f(&m, &pace, rule, w, w2);
                        assert!((f.get(w, w2) - o).abs() <= 1e-12, "{rule:?} sigma {sigma} ({w},{w2}): {} vs {o}", f.get(w, w2));
                    }
                }
            }
        }
    }
}

#[test]
fn patient_rule_has_same_cycle_sums_as_patient_table() {
    // the two builders attribute revenue to different blocks; cycle sums agree
    let mut r = rng(22);
    for _ in 0..20 {
        let k = r.gen_range(2..=3);
        let m = random_model(&mut r, k, 2);
        let pace = PaceConfig::new(2, 1).unwrap();
        let a = build_coupled_fn(&m, &pace).unwrap();
        let b = build_coupled_fn_strategic(&m, &pace, PurchaseRule::Patient).unwrap();
        let n = a.n_blocks();
        for _ in 0..20 {
            let len = r.gen_range(1..=4);
            let c: Vec<usize> = (0..len).map(|_| r.gen_range(0..n)).collect();
            let s = |f: &cyclic_pricing::weakly_coupled::CoupledFn| -> f64 {
                (0..len).map(|i| f.get(c[i], c[(i + 1) % len])).sum()
            };
            assert!((s(&a) - s(&b)).abs() <= 1e-12);
        }
    }
}
