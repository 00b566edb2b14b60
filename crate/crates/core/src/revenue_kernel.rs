//! Exact revenue pair for phases of a cyclic policy.
//!
//! The state carried between periods is the expected mass of waiting customers by
//! age (periods since arrival, `0..tau`) and valuation level. A customer is checked
//! in its arrival period and in each of the next `tau` periods, then leaves.
//!
//! [`Kernel::step`] is the per-period recursion and the ground truth. The
//! [`closed_form`] submodule evaluates the same quantities from per-state revenue
//! coefficients and powers of the sub-block `Q_k`, and is validated against it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market_model::{self, MarketModel, Timing};
use crate::policy::CyclicPolicy;

/// Expected number of waiting customers per valuation level (age-summed).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    pub theta: Vec<f64>,
}

/// Waiting mass by age and level, row-major `[age][level]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgeState {
    pub tau: usize,
    pub k: usize,
    pub mass: Vec<f64>,
}

impl AgeState {
    pub fn zeros(tau: usize, k: usize) -> Self {
        AgeState {
            tau,
            k,
            mass: vec![0.0; tau * k],
        }
    }

    pub fn row(&self, age: usize) -> &[f64] {
        &self.mass[age * self.k..(age + 1) * self.k]
    }

    pub fn row_mut(&mut self, age: usize) -> &mut [f64] {
        &mut self.mass[age * self.k..(age + 1) * self.k]
    }

    pub fn aggregate(&self) -> StateVector {
        let mut theta = vec![0.0; self.k];
        for a in 0..self.tau {
            for (t, x) in theta.iter_mut().zip(self.row(a)) {
                *t += x;
            }
        }
        StateVector { theta }
    }

    pub fn max_abs_diff(&self, other: &AgeState) -> f64 {
        self.mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `<c, self>` over ages and levels.
    pub fn dot(&self, c: &AgeState) -> f64 {
        self.mass.iter().zip(&c.mass).map(|(a, b)| a * b).sum()
    }
}

/// Constants of the affine representation valid for durations `t >= tau`:
/// `L(k,t|theta) = A + B (t - tau) + <C, theta>` and `Theta(k,t|theta) = theta_bar`.
#[derive(Debug, Clone, Serialize)]
pub struct AffineParams {
    pub k: usize,
    pub a: f64,
    pub b: f64,
    /// Revenue from one waiting customer over its remaining life, by age and level.
    pub c: AgeState,
    pub theta_bar: AgeState,
}

/// Finite-patience kernel bound to one validated model.
#[derive(Debug, Clone)]
pub struct Kernel<'a> {
    pub model: &'a MarketModel,
    pub tau: usize,
    pub k: usize,
}

impl<'a> Kernel<'a> {
    pub fn new(model: &'a MarketModel) -> Result<Self> {
        market_model::validate(model).into_result()?;
        let tau = model.tau_finite()?;
        Ok(Kernel {
            model,
            tau,
            k: model.k(),
        })
    }

    pub fn zeros(&self) -> AgeState {
        AgeState::zeros(self.tau, self.k)
    }

    fn check_state(&self, theta: &AgeState) -> Result<()> {
        if theta.tau != self.tau || theta.k != self.k {
            return Err(Error::validation(format!(
                "state shape {}x{} does not match model {}x{}",
                theta.tau, theta.k, self.tau, self.k
            )));
        }
        Ok(())
    }

    /// One period at price `k` into `out`; returns the period's revenue.
    pub fn step_into(&self, k: usize, theta: &AgeState, out: &mut AgeState) -> f64 {
        let kk = self.k;
        let lo = k - 1;
        let price = self.model.v[lo];
        let timing = self.model.timing;
        let mut rev = 0.0;
        let mut x = vec![0.0; kk];
        out.mass.iter_mut().for_each(|m| *m = 0.0);
        for a in 0..self.tau {
            let src = theta.row(a);
            if timing.moves_at(a + 1) {
                x.iter_mut().for_each(|y| *y = 0.0);
                for (i, &s) in src.iter().enumerate() {
                    if s != 0.0 {
                        for (y, q) in x.iter_mut().zip(&self.model.q[i]) {
                            *y += s * q;
                        }
                    }
                }
            } else {
                x.copy_from_slice(src);
            }
            let bought: f64 = x[lo..].iter().sum();
            rev += bought * price;
            if a + 1 < self.tau {
                let dst = out.row_mut(a + 1);
                dst[..lo].copy_from_slice(&x[..lo]);
            }
        }
        let arrivals: f64 = self.model.gamma[lo..].iter().sum();
        rev += arrivals * price;
        out.row_mut(0)[..lo].copy_from_slice(&self.model.gamma[..lo]);
        rev
    }

    pub fn step(&self, k: usize, theta: &AgeState) -> Result<(AgeState, f64)> {
        self.model.check_price(k)?;
        self.check_state(theta)?;
        let mut out = self.zeros();
        let r = self.step_into(k, theta, &mut out);
        Ok((out, r))
    }

    /// `t` periods at price `k`: post-phase state and phase revenue.
    pub fn phase(&self, k: usize, t: usize, theta: &AgeState) -> Result<(AgeState, f64)> {
        self.model.check_price(k)?;
        self.check_state(theta)?;
        let mut cur = theta.clone();
        let mut nxt = self.zeros();
        let mut rev = 0.0;
        for _ in 0..t {
            rev += self.step_into(k, &cur, &mut nxt);
            std::mem::swap(&mut cur, &mut nxt);
        }
        Ok((cur, rev))
    }

    pub fn theta_after_phase(&self, k: usize, t: usize, theta: &AgeState) -> Result<AgeState> {
        Ok(self.phase(k, t, theta)?.0)
    }

    pub fn phase_revenue(&self, k: usize, t: usize, theta: &AgeState) -> Result<f64> {
        Ok(self.phase(k, t, theta)?.1)
    }

    pub fn theta_bar(&self, k: usize) -> Result<AgeState> {
        self.theta_after_phase(k, self.tau, &self.zeros())
    }

    /// Affine constants via the recursion: `A = L(k,tau|0)`, `B` the steady rate,
    /// `C` the lifetime revenue of one unit of waiting mass.
    pub fn affine_params(&self, k: usize) -> Result<AffineParams> {
        let zero = self.zeros();
        let (theta_bar, a) = self.phase(k, self.tau, &zero)?;
        let b = self.phase_revenue(k, self.tau + 1, &zero)? - a;
        let mut c = self.zeros();
        let mut unit = self.zeros();
        for idx in 0..unit.mass.len() {
            unit.mass[idx] = 1.0;
            c.mass[idx] = self.phase_revenue(k, self.tau, &unit)? - a;
            unit.mass[idx] = 0.0;
        }
        Ok(AffineParams {
            k,
            a,
            b,
            c,
            theta_bar,
        })
    }

    /// Per-period revenue of a cyclic policy at its periodic regime.
    pub fn long_run_average(&self, policy: &CyclicPolicy) -> Result<f64> {
        policy.check(self.k)?;
        let traverse = |start: &AgeState| -> Result<(AgeState, f64)> {
            let mut th = start.clone();
            let mut rev = 0.0;
            for &(k, t) in &policy.phases {
                let (n, r) = self.phase(k, t, &th)?;
                th = n;
                rev += r;
            }
            Ok((th, rev))
        };
        let period = policy.period();
        // memory is tau periods, so this many traversals reach the exact regime
        let max_traversals = self.tau / period + 2;
        let mut th = self.zeros();
        for _ in 0..max_traversals {
            let (n, _) = traverse(&th)?;
            let done = n.max_abs_diff(&th) < 1e-12;
            th = n;
            if done {
                break;
            }
        }
        let (_, rev) = traverse(&th)?;
        Ok(rev / period as f64)
    }
}

pub fn step_theta(model: &MarketModel, k: usize, theta: &AgeState) -> Result<(AgeState, f64)> {
    Kernel::new(model)?.step(k, theta)
}

pub fn theta_after_phase(model: &MarketModel, k: usize, t: usize, theta: &AgeState) -> Result<AgeState> {
    Kernel::new(model)?.theta_after_phase(k, t, theta)
}

pub fn phase_revenue(model: &MarketModel, k: usize, t: usize, theta: &AgeState) -> Result<f64> {
    Kernel::new(model)?.phase_revenue(k, t, theta)
}

pub fn theta_bar(model: &MarketModel, k: usize) -> Result<AgeState> {
    Kernel::new(model)?.theta_bar(k)
}

pub fn affine_params(model: &MarketModel, k: usize) -> Result<AffineParams> {
    Kernel::new(model)?.affine_params(k)
}

pub fn long_run_average(model: &MarketModel, policy: &CyclicPolicy) -> Result<f64> {
    Kernel::new(model)?.long_run_average(policy)
}

/// `min(tau, 1/nu)`, the bound on every aggregated state component.
pub fn rho(model: &MarketModel) -> Result<f64> {
    let tau = model.tau_finite()? as f64;
    let nu = market_model::nu(model);
    Ok(if nu > 0.0 { tau.min(1.0 / nu) } else { tau })
}

/// Number of valuation moves a customer has made by age `j`.
fn moves_by_age(timing: Timing, j: usize) -> usize {
    (1..=j).filter(|&i| timing.moves_at(i)).count()
}

pub mod closed_form {
    //! Phase revenue and post-phase state from revenue coefficients.
    //!
    //! With `Q_k` the block of `Q` on levels below `k`, `P` the vector of one-step
    //! purchase probabilities `sum_{l >= k} q_{il}` and `S_n = sum_{i<n} Q_k^i`:
    //!
    //! * a waiting customer of age `a` in level `m` earns
    //!   `v_k (G[m, >=k] 1 + G[m, <k] S_{n-1} P)` with `n = min(t, tau - a)` checks
    //!   left and `G = Q` or `I` depending on whether it moves before its first check;
    //! * an arrival `j` periods before the phase end earns
    //!   `v_k (delta_{m >= k} + 1_{m<k} (S_{d(j')} P)_m)` with `j' = min(j, tau)` and
    //!   `d` the number of valuation moves by that age.

    use nalgebra::{DMatrix, DVector};

    use super::{moves_by_age, AffineParams, AgeState, Kernel};
    use crate::error::Result;

    struct Blocks {
        /// Powers `Q_k^i`, `i = 0..=tau`.
        pow: Vec<DMatrix<f64>>,
        /// `S_n P`, `n = 0..=tau`.
        sp: Vec<DVector<f64>>,
        lo: usize,
    }

    fn blocks(kern: &Kernel, k: usize) -> Blocks {
        let lo = k - 1;
        let q = &kern.model.q;
        let qk = DMatrix::from_fn(lo, lo, |i, j| q[i][j]);
        let p = DVector::from_fn(lo, |i, _| q[i][lo..].iter().sum());
        let mut pow = vec![DMatrix::identity(lo, lo)];
        let mut sp = vec![DVector::zeros(lo)];
        for n in 0..kern.tau {
            sp.push(&sp[n] + &pow[n] * &p);
            pow.push(&pow[n] * &qk);
        }
        Blocks { pow, sp, lo }
    }

    /// Revenue coefficient of one unit of waiting mass at `(age, level)` over `n` checks.
    fn incumbent_coeff(kern: &Kernel, b: &Blocks, age: usize, m: usize, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let lo = b.lo;
        let g: Vec<f64> = if kern.model.timing.moves_at(age + 1) {
            kern.model.q[m].clone()
        } else {
            (0..kern.k).map(|j| if j == m { 1.0 } else { 0.0 }).collect()
        };
        let first: f64 = g[lo..].iter().sum();
        let later: f64 = (0..lo).map(|i| g[i] * b.sp[n - 1][i]).sum();
        kern.model.v[lo] * (first + later)
    }

    /// Lifetime-within-phase revenue of an arrival with `j` checks after arrival.
    fn arrival_coeff(kern: &Kernel, b: &Blocks, m: usize, j: usize) -> f64 {
        let lo = b.lo;
        let vk = kern.model.v[lo];
        if m >= lo {
            vk
        } else {
            let d = moves_by_age(kern.model.timing, j.min(kern.tau));
            vk * b.sp[d][m]
        }
    }

    pub fn phase(kern: &Kernel, k: usize, t: usize, theta: &AgeState) -> Result<(AgeState, f64)> {
        kern.model.check_price(k)?;
        let tau = kern.tau;
        let b = blocks(kern, k);
        let lo = b.lo;
        let gamma = &kern.model.gamma;

        let mut rev = 0.0;
        for s in 1..=t {
            let j = t - s;
            rev += (0..kern.k).map(|m| gamma[m] * arrival_coeff(kern, &b, m, j)).sum::<f64>();
        }
        for a in 0..tau {
            let n = t.min(tau - a);
            for m in 0..kern.k {
                let x = theta.row(a)[m];
                if x != 0.0 {
                    rev += x * incumbent_coeff(kern, &b, a, m, n);
                }
            }
        }

        if t == 0 {
            return Ok((theta.clone(), rev));
        }
        let mut out = kern.zeros();
        if lo == 0 {
            return Ok((out, rev));
        }
        let g0 = DVector::from_fn(lo, |i, _| gamma[i]);
        for j in 0..t.min(tau) {
            let d = moves_by_age(kern.model.timing, j);
            let z = b.pow[d].transpose() * &g0;
            out.row_mut(j)[..lo].copy_from_slice(z.as_slice());
        }
        {
            for a in 0..tau {
                if a + t >= tau {
                    continue;
                }
                let row = theta.row(a);
                let y: Vec<f64> = if kern.model.timing.moves_at(a + 1) {
                    (0..kern.k)
                        .map(|j| (0..kern.k).map(|i| row[i] * kern.model.q[i][j]).sum())
                        .collect()
                } else {
                    row.to_vec()
                };
                let z1 = DVector::from_fn(lo, |i, _| y[i]);
                let z = b.pow[t - 1].transpose() * z1;
                let dst = out.row_mut(a + t);
                for i in 0..lo {
                    dst[i] += z[i];
                }
            }
        }
        Ok((out, rev))
    }

    pub fn affine_params(kern: &Kernel, k: usize) -> Result<AffineParams> {
        kern.model.check_price(k)?;
        let tau = kern.tau;
        let b = blocks(kern, k);
        let gamma = &kern.model.gamma;
        let per_arrival =
            |j: usize| -> f64 { (0..kern.k).map(|m| gamma[m] * arrival_coeff(kern, &b, m, j)).sum() };
        let bb = per_arrival(tau);
        let a: f64 = (0..tau).map(per_arrival).sum();
        let mut c = kern.zeros();
        for age in 0..tau {
            for m in 0..kern.k {
                c.row_mut(age)[m] = incumbent_coeff(kern, &b, age, m, tau - age);
            }
        }
        let (theta_bar, _) = phase(kern, k, tau, &kern.zeros())?;
        Ok(AffineParams {
            k,
            a,
            b: bb,
            c,
            theta_bar,
        })
    }
}
