//! Acceptance criteria 1-10, one PASS/FAIL line each.
//!
//! Criteria that fail for documented reasons (the `KNOWN_RED` table) print FAIL
//! with the reason and do not fail the run. Any other failing check does.

mod common;

use std::fmt::Write as _;
use std::io::Write as _;
use std::time::Instant;

use common::*;
use cyclic_pricing::experiments::two_price::TwoPrice;
use cyclic_pricing::experiments::{
    example2_verify_claim, finding5_run, finding6_run, table1_grid, table1_run, table2_model, table2_run,
    two_price_analyze, TABLE2_EPSILONS,
};
use cyclic_pricing::market_model::{MarketModel, PaceConfig, Patience};
use cyclic_pricing::optimizer::{brute_force_cycle_search, greedy_cycle_search, karp_max_mean_cycle};
use cyclic_pricing::policy::{is_m_simple, CyclicPolicy};
use cyclic_pricing::revenue_kernel::{closed_form, long_run_average, rho, Kernel};
use cyclic_pricing::simulator::{simulate, SimConfig};
use cyclic_pricing::weakly_coupled::{build_coupled_fn, build_coupled_fn_strategic, CoupledFn, PurchaseRule};
use cyclic_pricing::Block;
use rand::Rng;

/// `(criterion, check, reason)` for checks expected to fail.
const KNOWN_RED: &[(u8, &str, &str)] = &[
    (1, "cycle", "optimum at M = 3 is (4,3,4,1) at 1.1566 > R(4,3,1) = 1.1436; (4,3,1) is optimal only at M = 2"),
    (2, "pi_eps", "with the given Q and v, fixed (4) earns ~0.69 and the optima are (1), (2,1), (3,1)"),
    (2, "R-bar", "target R-bar values are not reachable with the given instance"),
    (2, "delta signs", "rows 2 and 5 differ in sign with the given instance"),
    (3, "xi range", "the given parameters give xi = 0.1 + ~2.1 eps, just above 0.1 + 2 eps"),
    (7, "instance-1 loss", "loss of (2,1) under the true Q is 6.04%"),
    (7, "instance-2 gain", "(3,2,1) beats (1) by 1.98%"),
    (7, "diagonal grid", "(2,1)/(3,1) beat (1) when d_1 or d_2 is large"),
    (8, "classification", "with C < 0 the sign rule sends v_1 < B < v_1 + C ln q to t* = 0, but R(t) -> B > v_1"),
    (10, "strategic-4 fixed", "an expected-max customer can wait for an upward valuation move at a constant price"),
];

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

struct Criterion {
    id: u8,
    title: &'static str,
    checks: Vec<Check>,
    secs: f64,
}

impl Criterion {
    fn new(id: u8, title: &'static str) -> Self {
        Criterion {
            id,
            title,
            checks: Vec::new(),
            secs: 0.0,
        }
    }

    fn check(&mut self, name: &'static str, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name,
            ok,
            detail: detail.into(),
        });
    }

    fn runtime(&mut self, start: Instant, limit: Option<f64>) {
        self.secs = start.elapsed().as_secs_f64();
        let s = self.secs;
        if let Some(limit) = limit {
            self.check("runtime", s < limit, format!("{s:.2}s < {limit}s"));
        }
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

fn known(id: u8, name: &str) -> Option<&'static str> {
    KNOWN_RED.iter().find(|(i, n, _)| *i == id && *n == name).map(|(_, _, r)| *r)
}

fn c1() -> Criterion {
    let mut c = Criterion::new(1, "three-price optimum, K=4, tau=6, sigma=2");
    let t = Instant::now();
    let r = finding6_run().unwrap();
    c.check("cycle", r.cycle == [4, 3, 1], format!("optimize returned {:?} at {:.5}", r.cycle, r.value));
    c.check("R(1)", (r.r_1 - 1.00).abs() <= 0.005, format!("{:.5}", r.r_1));
    c.check("R(3,1)", (r.r_31 - 1.09).abs() <= 0.005, format!("{:.5}", r.r_31));
    c.check("R(4,3,1)", (r.r_431 - 1.14).abs() <= 0.005, format!("{:.5}", r.r_431));
    c.runtime(t, Some(10.0));
    let m = cyclic_pricing::experiments::findings::finding6_model();
    let p = CyclicPolicy::from_prices(&[4, 3, 1], 2);
    let est = simulate(&m, &p, &SimConfig::new(&m, &p, 100_000, 20, 61)).unwrap();
    c.check(
        "simulated R(4,3,1)",
        (est.mean - r.r_431).abs() <= 3.0 * est.std_error,
        format!("{:.5} +- {:.5} vs {:.5}", est.mean, est.std_error, r.r_431),
    );
    c
}

fn c2() -> Criterion {
    let mut c = Criterion::new(2, "truncated unbounded patience, nu = 0.3");
    let t = Instant::now();
    let rows = table2_run(&TABLE2_EPSILONS, &table2_model(), Some(0.3)).unwrap();
    let taus: Vec<usize> = rows.iter().map(|r| r.tau_eps).collect();
    c.check("tau_eps", taus == [83, 32, 19, 12, 6, 4, 2], format!("{taus:?}"));
    let target_pi: [&[usize]; 7] = [&[4], &[4, 1], &[4, 1], &[4, 1], &[4, 1], &[4, 1], &[4, 1]];
    let pis: Vec<&Vec<usize>> = rows.iter().map(|r| &r.policy).collect();
    c.check("pi_eps", rows.iter().zip(target_pi).all(|(r, p)| r.policy == p), format!("{pis:?}"));
    let target_r = [1.02, 1.03, 1.04, 1.05, 0.99];
    let rs: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.value)).collect();
    c.check(
        "R-bar",
        rows.iter().zip(target_r).all(|(r, p)| (r.value - p).abs() <= 0.01),
        format!("{rs:?}"),
    );
    let sign = |d: f64| if d.abs() < 0.005 { 0 } else { d.signum() as i32 };
    let target_sign = [0, 1, 1, 1, 0, -1, -1];
    let ds: Vec<String> = rows.iter().map(|r| format!("{:+.3}", r.delta)).collect();
    c.check(
        "delta signs",
        rows.iter().zip(target_sign).all(|(r, s)| sign(r.delta) == s),
        format!("{ds:?}"),
    );
    c.runtime(t, Some(60.0));
    c
}

fn c3() -> Criterion {
    let mut c = Criterion::new(3, "increasing cycle of length K-1, K=5, tau=1");
    let t = Instant::now();
    let k = 5;
    let eps = 1.0 / (200.0 * k as f64);
    let cl = example2_verify_claim(k).unwrap();
    c.check("brute cycle", cl.brute_cycle == [2, 3, 4, 5], format!("{:?}", cl.brute_cycle));
    c.check("greedy cycle", cl.greedy_cycle == [2, 3, 4, 5], format!("{:?}", cl.greedy_cycle));
    let want = cl.u + cl.xi * cl.u / (k - 1) as f64;
    let err = (cl.excess - want).abs();
    c.check("value", err <= 1e-10, format!("|R - alpha - U - xi U/4| = {err:.2e}"));
    c.check("value relative to U", err <= 1e-10 * cl.u, format!("{:.2e} U", err / cl.u));
    c.check(
        "xi range",
        (0.1..=0.1 + 2.0 * eps).contains(&cl.xi),
        format!("xi = {:.7}, bound {:.7}", cl.xi, 0.1 + 2.0 * eps),
    );
    let need = cl.u / 80.0 - 1e-12;
    c.check("gap", cl.gap >= need, format!("{:.3e} >= {:.3e}", cl.gap, cl.u / 80.0));
    c.runtime(t, Some(5.0));
    c
}

fn c4() -> Criterion {
    let mut c = Criterion::new(4, "oracle triangle, 100 tables, K~ <= 8");
    let t = Instant::now();
    let mut r = rng(404);
    let (mut agree, mut simple, mut worst) = (0, 0, 0.0f64);
    for i in 0..100 {
        let f = if i % 2 == 0 {
            let n = r.gen_range(1..=8);
            CoupledFn::from_table(n, (0..n * n).map(|_| r.gen::<f64>()).collect()).unwrap()
        } else {
            let (k, m) = [(2, 1), (2, 2), (2, 3), (3, 1), (4, 1), (8, 1)][r.gen_range(0..6)];
            let sigma = r.gen_range(1..=2);
            let model = random_model(&mut r, k, m * sigma);
            build_coupled_fn(&model, &PaceConfig::new(m * sigma, sigma).unwrap()).unwrap()
        };
        let g = greedy_cycle_search(&f);
        let b = brute_force_cycle_search(&f, f.n_blocks()).unwrap();
        let kp = karp_max_mean_cycle(&f);
        let e = (g.phi - b.phi).abs().max((b.phi - kp).abs());
        worst = worst.max(e);
        agree += (e <= 1e-12) as usize;
        simple += is_m_simple(&f.phase_prices(&g.block_indices), f.m) as usize;
    }
    c.check("values", agree == 100, format!("{agree}/100 agree, worst {worst:.1e}"));
    c.check("m-simple", simple == 100, format!("{simple}/100"));
    c.runtime(t, Some(60.0));
    c
}

fn c5() -> Criterion {
    let mut c = Criterion::new(5, "kernel consistency, 200 instances");
    let t = Instant::now();
    let mut r = rng(505);
    let (mut cf_worst, mut aff_worst, mut excess) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for _ in 0..200 {
        let k = r.gen_range(1..=5);
        let tau = r.gen_range(1..=6);
        let m = random_model(&mut r, k, tau);
        let kern = Kernel::new(&m).unwrap();
        let mut theta = kern.zeros();
        theta.mass.iter_mut().for_each(|x| *x = r.gen_range(0.0..0.5));
        for p in 1..=k {
            for t in 0..=3 * tau {
                let (s1, l1) = kern.phase(p, t, &theta).unwrap();
                let (s2, l2) = closed_form::phase(&kern, p, t, &theta).unwrap();
                cf_worst = cf_worst.max(rel_err(l1, l2));
                for (a, b) in s1.mass.iter().zip(&s2.mass) {
                    cf_worst = cf_worst.max(rel_err(*a, *b));
                }
            }
            let ap = closed_form::affine_params(&kern, p).unwrap();
            for t in tau..=3 * tau {
                let (s, l) = kern.phase(p, t, &theta).unwrap();
                let pred = ap.a + ap.b * (t - tau) as f64 + theta.dot(&ap.c);
                aff_worst = aff_worst.max(rel_err(l, pred)).max(s.max_abs_diff(&ap.theta_bar));
            }
        }
        let bound = rho(&m).unwrap();
        let mut th = kern.zeros();
        for _ in 0..10_000 {
            th = kern.step(r.gen_range(1..=k), &th).unwrap().0;
            for x in th.aggregate().theta {
                excess = excess.max(x - bound);
            }
        }
    }
    c.check("closed form", cf_worst <= 1e-10, format!("worst rel {cf_worst:.1e}"));
    c.check("affine", aff_worst <= 1e-10, format!("worst {aff_worst:.1e}"));
    c.check("rho bound", excess <= 1e-9, format!("max theta_m - rho = {excess:.3e}"));
    c.runtime(t, None);
    c
}

fn c6() -> Criterion {
    let mut c = Criterion::new(6, "Monte Carlo agreement, 30 instances");
    let t = Instant::now();
    let mut hits = 0;
    for i in 0..30u64 {
        let (m, p) = sim_instance(i);
        let exact = long_run_average(&m, &p).unwrap();
        let est = simulate(&m, &p, &SimConfig::new(&m, &p, 20_000, 10, i)).unwrap();
        hits += ((est.mean - exact).abs() <= 3.0 * est.std_error) as usize;
    }
    c.check("within 3 SE", hits >= 28, format!("{hits}/30"));
    c.runtime(t, None);
    c
}

fn c7() -> Criterion {
    let mut c = Criterion::new(7, "cost of ignoring valuation changes");
    let t = Instant::now();
    let r = finding5_run().unwrap();
    c.check(
        "instance-1 loss",
        (3.0..=5.0).contains(&r.instance1_loss_pct),
        format!("{:.2}%", r.instance1_loss_pct),
    );
    c.check(
        "instance-2 gain",
        (4.0..=6.0).contains(&r.instance2_gain_pct),
        format!("{:.2}%", r.instance2_gain_pct),
    );
    c.check(
        "identity optimum",
        r.instance1_identity_optimum == [2, 1],
        format!("{:?}", r.instance1_identity_optimum),
    );
    c.check(
        "diagonal grid",
        r.diagonal_fixed1 == r.diagonal_points,
        format!("{}/{} points give (1)", r.diagonal_fixed1, r.diagonal_points),
    );
    c.runtime(t, None);
    c
}

/// Random K = 2 unbounded model: gamma, both Q rows with positive slack, v_2 in (1, 2).
fn two_price_model(r: &mut impl Rng) -> MarketModel {
    let g: f64 = r.gen();
    let mut row = || {
        let (a, b, s): (f64, f64, f64) = (r.gen(), r.gen(), r.gen_range(0.05..1.0));
        vec![a / (a + b + s), b / (a + b + s)]
    };
    let q = vec![row(), row()];
    MarketModel::new(vec![1.0, 1.0 + r.gen::<f64>()], vec![1.0 - g, g], q, Patience::Unbounded)
}

fn c8() -> Criterion {
    let mut c = Criterion::new(8, "two-price reset, 200 instances");
    let t = Instant::now();
    let mut r = rng(808);
    let (mut agree, mut kern_worst, mut neg_c, mut other) = (0, 0.0f64, 0, 0);
    for _ in 0..200 {
        let m = two_price_model(&mut r);
        let rep = two_price_analyze(&m, 10_000, &[0, 1, 2, 3, 5, 8]).unwrap();
        if rep.class == rep.class_grid {
            agree += 1;
        } else if TwoPrice::from_model(&m).unwrap().c() < 0.0 {
            neg_c += 1;
        } else {
            other += 1;
        }
        kern_worst = kern_worst.max(rep.kernel_max_err);
    }
    c.check(
        "classification",
        agree == 200,
        format!("{agree}/200 match the grid argmax; {neg_c} of the misses have C < 0"),
    );
    c.check("misses have C < 0", other == 0, format!("{other} misses with C >= 0"));
    c.check("kernel", kern_worst <= 1e-8, format!("worst {kern_worst:.1e}"));
    c.runtime(t, None);
    c
}

fn c9() -> Criterion {
    let mut c = Criterion::new(9, "random-instance trends, 500 draws per cell, seed 2024");
    let t = Instant::now();
    let rows: Vec<_> = table1_grid().into_iter().map(|cell| table1_run(cell, 4, 500, 2024).unwrap()).collect();
    let f: Vec<f64> = rows.iter().map(|r| r.f).collect();
    let nonincreasing = |xs: &[f64]| xs.windows(2).all(|w| w[1] <= w[0]);
    c.check("f along tau", nonincreasing(&f[0..4]), format!("{:?}", &f[0..4]));
    c.check("f along nu", nonincreasing(&f[4..8]), format!("{:?}", &f[4..8]));
    let dp = rows.iter().map(|r| r.d_prime).fold(0.0, f64::max);
    c.check("d' <= 0.5", dp <= 0.5, format!("max d' = {dp:.3}"));
    let three = rows.iter().map(|r| r.three_cyclic).fold(0.0, f64::max);
    c.check("three-cyclic < 10%", three < 10.0, format!("max {three:.1}%"));
    c.runtime(t, Some(600.0));
    c
}

fn c10() -> Criterion {
    let mut c = Criterion::new(10, "strategic modes");
    let t = Instant::now();
    let mut r = rng(1010);
    let (mut s3, mut s4, mut vs_patient, mut total) = (0, 0, 0.0f64, 0);
    for _ in 0..30 {
        let k = r.gen_range(2..=3);
        let tau = r.gen_range(1..=3);
        let sigma = [1, tau][r.gen_range(0..2)];
        let m = random_model(&mut r, k, tau).with_timing(random_timing(&mut r));
        let pace = PaceConfig::new(tau, sigma).unwrap();
        let pat = build_coupled_fn_strategic(&m, &pace, PurchaseRule::Patient).unwrap();
        let f3 = build_coupled_fn_strategic(&m, &pace, PurchaseRule::MyopicForecast).unwrap();
        let f4 = build_coupled_fn_strategic(&m, &pace, PurchaseRule::ExpectedMax).unwrap();
        let base = build_coupled_fn(&m, &pace).unwrap();
        for p in 1..=k {
            let w = Block { prices: vec![p; pace.m] }.encode(k);
            total += 1;
            s3 += (f3.get(w, w) == pat.get(w, w)) as usize;
            s4 += (f4.get(w, w) == pat.get(w, w)) as usize;
            vs_patient = vs_patient.max((pat.get(w, w) - base.get(w, w)).abs());
        }
    }
    c.check("strategic-3 fixed", s3 == total, format!("{s3}/{total} identical"));
    c.check("strategic-4 fixed", s4 == total, format!("{s4}/{total} identical"));
    c.check("patient builders", vs_patient <= 1e-12, format!("worst {vs_patient:.1e}"));

    let mut worst = 0.0f64;
    let mut r = rng(1011);
    for _ in 0..10 {
        let m = random_model(&mut r, 2, 2).with_timing(random_timing(&mut r));
        for sigma in [1, 2] {
            let pace = PaceConfig::new(2, sigma).unwrap();
            for rule in [PurchaseRule::MyopicForecast, PurchaseRule::ExpectedMax] {
                let f = build_coupled_fn_strategic(&m, &pace, rule).unwrap();
                for w in 0..f.n_blocks() {
                    for w2 in 0..f.n_blocks() {
                        worst = worst.max((f.get(w, w2) - common::strategic::oracle_f(&m, &pace, rule, w, w2)).abs());
                    }
                }
            }
        }
    }
    c.check("path oracle K=2 tau=2", worst <= 1e-12, format!("worst {worst:.1e}"));
    c.runtime(t, None);
    c
}

#[test]
fn acceptance() {
    let all: Vec<Criterion> = vec![c1(), c2(), c3(), c4(), c5(), c6(), c7(), c8(), c9(), c10()];
    let mut unexpected = Vec::new();
    // straight to stderr so the report shows without --nocapture
    let mut out = String::from("\n");
    for c in &all {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        writeln!(out, "{verdict} {:>2} {} ({:.2}s)", c.id, c.title, c.secs).unwrap();
        for ch in &c.checks {
            let mark = if ch.ok { "ok  " } else { "FAIL" };
            writeln!(out, "       {mark} {}: {}", ch.name, ch.detail).unwrap();
            match (ch.ok, known(c.id, ch.name)) {
                (false, Some(why)) => writeln!(out, "            known: {why}").unwrap(),
                (false, None) => unexpected.push(format!("{}/{}", c.id, ch.name)),
                (true, Some(_)) => writeln!(out, "            note: listed as known red but passed").unwrap(),
                (true, None) => {}
            }
        }
    }
    std::io::stderr().write_all(out.as_bytes()).unwrap();
    assert!(unexpected.is_empty(), "unexpected failures: {unexpected:?}");
}
