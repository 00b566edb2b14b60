//! Two prices, unbounded patience: hold `v_2` for `t` periods, then reset at `v_1`.
//!
//! With `gamma` the probability of arriving high and `q = q_11`,
//!
//! ```text
//! (t+1) R(t) = v_1 + B t + C (1 - q^t)
//! B = v_2 (gamma q_10 + q_12) / (1 - q)
//! C = -v_2 (1-gamma) q_12 / (1-q)^2 + v_1 (1-gamma) (q + q_12) / (1-q)
//! ```
//!
//! where `q_10 = 1 - q_11 - q_12` is the exit probability of a low customer. The
//! formula assumes a waiting customer moves before each check after arrival.
//! Writing `N(t)` for the numerator of `dR/dt`, `N(0) = B - v_1 - C ln q` and
//! `N(inf) = B - v_1 - C`, so `t*` is interior iff `C ln q < B - v_1 < C`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market_model::{validate, MarketModel, Patience, Timing};
use crate::policy::CyclicPolicy;
use crate::revenue_kernel::long_run_average;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResetClass {
    Zero,
    Finite,
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPriceReport {
    pub b: f64,
    pub c: f64,
    /// Classification from the sign conditions on `B - v_1`.
    pub class: ResetClass,
    /// Integer argmax of `R(t)` over `0..=t_max` (smallest on ties).
    pub t_int: usize,
    pub class_int: ResetClass,
    pub r_at_t_int: f64,
    /// Argmax of `R` over the real grid: step `1/64` on `[0, 64]`, then unit steps to `t_max`.
    pub t_grid: f64,
    pub class_grid: ResetClass,
    pub t_max: usize,
    /// Sign changes of `N(t)` on the integer grid.
    pub crossings: usize,
    /// Largest `|R(t) - kernel|` over the checked durations.
    pub kernel_max_err: f64,
    pub kernel_checked: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct TwoPrice {
    pub v1: f64,
    pub v2: f64,
    pub gamma: f64,
    pub q11: f64,
    pub q12: f64,
}

impl TwoPrice {
    pub fn from_model(model: &MarketModel) -> Result<Self> {
        if model.k() != 2 {
            return Err(Error::validation(format!("two-price analysis needs K = 2, got {}", model.k())));
        }
        let q11 = model.q[0][0];
        if q11 >= 1.0 {
            return Err(Error::validation("q_11 = 1: low customers never leave"));
        }
        Ok(TwoPrice {
            v1: model.v[0],
            v2: model.v[1],
            gamma: model.gamma[1],
            q11,
            q12: model.q[0][1],
        })
    }

    pub fn b(&self) -> f64 {
        let q10 = 1.0 - self.q11 - self.q12;
        self.v2 * (self.gamma * q10 + self.q12) / (1.0 - self.q11)
    }

    pub fn c(&self) -> f64 {
        let low = 1.0 - self.gamma;
        let d = 1.0 - self.q11;
        -self.v2 * low * self.q12 / (d * d) + self.v1 * low * (self.q11 + self.q12) / d
    }

    pub fn revenue(&self, t: usize) -> f64 {
        self.revenue_real(t as f64)
    }

    /// `R` extended to real `t >= 0`.
    pub fn revenue_real(&self, t: f64) -> f64 {
        let qt = if t == 0.0 { 1.0 } else { self.q11.powf(t) };
        (self.v1 + self.b() * t + self.c() * (1.0 - qt)) / (t + 1.0)
    }

    /// Numerator of `dR/dt` at real `t`.
    pub fn numerator(&self, t: f64) -> f64 {
        let (b, c, q) = (self.b(), self.c(), self.q11);
        if q == 0.0 {
            return b - self.v1 - c;
        }
        b - self.v1 - c + c * q.powf(t) * (1.0 - (t + 1.0) * q.ln())
    }

    pub fn classify(&self) -> ResetClass {
        let (b, c) = (self.b(), self.c());
        let lhs = if c == 0.0 {
            0.0
        } else if self.q11 == 0.0 {
            // C ln q with q -> 0
            -c.signum() * f64::INFINITY
        } else {
            c * self.q11.ln()
        };
        let x = b - self.v1;
        if lhs < x && x < c {
            ResetClass::Finite
        } else if x < lhs {
            ResetClass::Zero
        } else {
            ResetClass::Infinite
        }
    }
}

/// Closed form, classification, grid argmax and kernel cross-check.
pub fn two_price_analyze(model: &MarketModel, t_max: usize, kernel_ts: &[usize]) -> Result<TwoPriceReport> {
    validate(model).into_result()?;
    let tp = TwoPrice::from_model(model)?;
    let classify = |t: f64, top: f64| {
        if t == 0.0 {
            ResetClass::Zero
        } else if t == top {
            ResetClass::Infinite
        } else {
            ResetClass::Finite
        }
    };
    let argmax = |ts: &mut dyn Iterator<Item = f64>| {
        let mut best = (0.0, f64::NEG_INFINITY);
        for t in ts {
            let r = tp.revenue_real(t);
            if r > best.1 {
                best = (t, r);
            }
        }
        best
    };
    let (t_int, r_int) = argmax(&mut (0..=t_max).map(|t| t as f64));
    const FINE: usize = 64;
    let mut real = (0..=FINE * FINE.min(t_max))
        .map(|j| j as f64 / FINE as f64)
        .chain((FINE.min(t_max) + 1..=t_max).map(|t| t as f64));
    let (t_grid, _) = argmax(&mut real);

    let mut crossings = 0;
    let mut prev_sign = 0.0;
    for t in 0..=t_max {
        let n = tp.numerator(t as f64);
        if n != 0.0 {
            if prev_sign != 0.0 && n.signum() != prev_sign {
                crossings += 1;
            }
            prev_sign = n.signum();
        }
    }

    // patience t + 1 loses nobody: every customer meets the reset within t periods
    let mut err: f64 = 0.0;
    for &t in kernel_ts {
        let m = model.clone().with_tau(Patience::Bounded(t + 1)).with_timing(Timing::Immediate);
        let phases = if t == 0 { vec![(1, 1)] } else { vec![(2, t), (1, 1)] };
        let k = long_run_average(&m, &CyclicPolicy::new(phases)?)?;
        err = err.max((k - tp.revenue(t)).abs());
    }

    Ok(TwoPriceReport {
        b: tp.b(),
        c: tp.c(),
        class: tp.classify(),
        t_int: t_int as usize,
        class_int: classify(t_int, t_max as f64),
        r_at_t_int: r_int,
        t_grid,
        class_grid: classify(t_grid, t_max as f64),
        t_max,
        crossings,
        kernel_max_err: err,
        kernel_checked: kernel_ts.to_vec(),
    })
}
